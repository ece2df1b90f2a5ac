//! Compare the reduction basis against random and top-singular bases.

use sumdist::experiment::{write_ndjson, InputSpec, ShapeQuery};
use sumdist::{run_experiment, Constants, ExperimentConfig, NoiseKind, PipelinePath, SynthSpec};

fn main() -> sumdist::Result<()> {
    let cfg = ExperimentConfig {
        input: InputSpec::Synth(SynthSpec::new(100, 5, 80, NoiseKind::Cauchy, 1.0)),
        k: 5,
        eps: 0.5,
        seed: 7,
        path: PipelinePath::Sparse,
        dims_to_probe: vec![5, 10, 20],
        shapes: ShapeQuery::Planted,
        constants: Constants::practical(),
        timing: false,
    };
    let records = run_experiment(&cfg)?;
    write_ndjson(&records, std::io::stdout().lock())
}
