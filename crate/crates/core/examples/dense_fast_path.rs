//! Block-sampled reduction for dense inputs, with its work counters.

use sumdist::{complete_dim_reduce_with_stats, exact_cost, reduced_cost, synth_generate, Constants, NoiseKind,
    PipelinePath, RngConfig, Shape, SynthSpec};

fn main() -> sumdist::Result<()> {
    let data = synth_generate(&SynthSpec::new(30, 2, 300, NoiseKind::Gaussian, 2.0), &mut RngConfig::new(5).rng())?;
    let cfg = Constants { path: PipelinePath::Dense, blocks: Some(12), ..Constants::practical() };
    let (rep, stats) = complete_dim_reduce_with_stats(&data.points, 2, 0.5, &cfg, &mut RngConfig::new(5).with_stream(1).rng())?;
    if let Some(d) = &stats.dense {
        println!("blocks {}, passes {}, draws {}, rows evaluated {}", d.blocks, d.passes, d.draws, d.rows_evaluated);
    }
    let s = Shape::centers(data.centers.clone())?;
    println!("dim {}: reduced {:.1}, exact {:.1}", rep.dim_sub(), reduced_cost(&rep, &s)?, exact_cost(&data.points, &s)?);
    Ok(())
}
