use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sumdist::coresets::{kmedian_coreset, kmedian_seed, subspace_coreset, CoresetFile, WeightedCoreset};
use sumdist::experiment::{
    run_experiment_with, write_csv_records, write_ndjson, ExperimentConfig, InputSpec, Method, NamedShape, ResultRecord,
    ShapeQuery, ShapeSpec,
};
use sumdist::ingest::{ingest, write_csv, InputFormat};
use sumdist::{
    complete_dim_reduce_with_stats, coreset_query_cost, exact_cost, reduced_cost, synth_generate, Constants, Error,
    NoiseKind, PipelinePath, PointMatrix, ReducedRep, Result, RngConfig, Shape, SynthSpec,
};

#[derive(Parser)]
#[command(name = "sumdist", version, about = "Dimensionality reduction and coresets for sum-of-distances objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted instance and write it as CSV.
    Synth(SynthArgs),
    /// Reduce a point set to a subspace plus per-point residuals.
    Reduce(Common),
    /// Build a weighted coreset from a reduced representation.
    Coreset(CoresetArgs),
    /// Compare reduced (or coreset) costs against exact costs.
    Evaluate(EvaluateArgs),
    /// Compare the reduction subspace against random and top-singular subspaces.
    Experiment(ExperimentArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Points (CSV or Matrix Market); a reduced representation for `coreset`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    path: Option<PathArg>,
    /// Number of row blocks on the dense path.
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print pipeline counters.
    #[arg(long)]
    stats: bool,
    /// Rank trial solutions by exact cost.
    #[arg(long)]
    exact_cost: bool,
    /// Run the maximal number of reduction rounds.
    #[arg(long)]
    deterministic_istar: bool,
    /// Constant overrides, e.g. `c_s=0.5,k_trust=1`.
    #[arg(long)]
    config: Option<String>,
    /// Emit CSV instead of newline-delimited JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Mm,
}

#[derive(Clone, Copy, ValueEnum)]
enum PathArg {
    Sparse,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum Noise {
    Cauchy,
    Gaussian,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Subspace,
    Kmedian,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 50)]
    d: usize,
    #[arg(long, default_value_t = 100)]
    samples_per_center: usize,
    #[arg(long, value_enum, default_value_t = Noise::Cauchy)]
    noise: Noise,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args)]
struct CoresetArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Kind::Kmedian)]
    kind: Kind,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Reduced representation written by `reduce`.
    #[arg(long, conflicts_with = "coreset")]
    rep: Option<PathBuf>,
    /// Coreset written by `coreset`.
    #[arg(long)]
    coreset: Option<PathBuf>,
    /// JSON array of named shapes; defaults to a k-median solution.
    #[arg(long)]
    shapes: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    /// Synthetic input when `--input` is absent.
    #[arg(long, default_value_t = 500)]
    d: usize,
    #[arg(long, default_value_t = 400)]
    samples_per_center: usize,
    #[arg(long, value_enum, default_value_t = Noise::Cauchy)]
    noise: Noise,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Extra subspace dimensions to probe, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// `planted`, `kmedian` or `rows:N`.
    #[arg(long, default_value = "planted")]
    shapes: String,
    /// Record wall-clock time (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn constants(&self) -> Result<Constants> {
        let mut c = match &self.config {
            Some(list) => Constants::default().parse_overrides(list)?,
            None => Constants::default(),
        };
        c.exact_cost |= self.exact_cost;
        c.deterministic_istar |= self.deterministic_istar;
        if let Some(p) = self.path {
            c.path = p.into();
        }
        if self.blocks.is_some() {
            c.blocks = self.blocks;
        }
        Ok(c)
    }

    fn input(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| Error::Parameter("--input is required".into()))
    }

    fn out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| Error::Parameter("--out is required".into()))
    }

    fn format_for(&self, path: &Path) -> InputFormat {
        match self.format {
            Some(Format::Csv) => InputFormat::Csv,
            Some(Format::Mm) => InputFormat::Mm,
            None => InputFormat::from_path(path),
        }
    }

    fn points(&self) -> Result<PointMatrix> {
        let path = self.input()?;
        ingest(path, self.format_for(path))
    }
}

impl From<PathArg> for PipelinePath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Sparse => PipelinePath::Sparse,
            PathArg::Dense => PipelinePath::Dense,
        }
    }
}

impl From<Noise> for NoiseKind {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Cauchy => NoiseKind::Cauchy,
            Noise::Gaussian => NoiseKind::Gaussian,
        }
    }
}

fn print_line(v: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn synth(args: &SynthArgs) -> Result<()> {
    let c = &args.common;
    let spec = SynthSpec::new(args.d, c.k, args.samples_per_center, args.noise.into(), args.scale);
    let data = synth_generate(&spec, &mut RngConfig::new(c.seed).rng())?;
    let out = c.out()?;
    write_csv(&data.points, BufWriter::new(File::create(out).map_err(Error::at(out))?))?;
    let centers_path = sibling(out, ".centers.json");
    let planted = NamedShape {
        id: "planted".into(),
        shape: ShapeSpec::Centers(data.centers.row_iter().map(|r| r.iter().copied().collect()).collect()),
    };
    fs::write(&centers_path, serde_json::to_vec(&[planted])?).map_err(Error::at(&centers_path))?;
    print_line(&json!({ "points": out, "centers": centers_path, "n": spec.n, "d": spec.d, "k": spec.k }))
}

fn reduce(c: &Common) -> Result<()> {
    let a = c.points()?;
    let cfg = c.constants()?;
    let (rep, stats) = complete_dim_reduce_with_stats(&a, c.k, c.eps, &cfg, &mut RngConfig::new(c.seed).rng())?;
    let out = c.out()?;
    rep.write(out, c.seed)?;
    let mut line = json!({ "out": out, "n": rep.n(), "d": a.ncols(), "dim": rep.dim_sub(), "eps": c.eps, "seed": c.seed });
    if c.stats {
        line["stats"] = serde_json::to_value(&stats)?;
    }
    print_line(&line)
}

fn coreset(args: &CoresetArgs) -> Result<()> {
    let c = &args.common;
    let (rep, _) = ReducedRep::read(c.input()?)?;
    let cfg = c.constants()?;
    let mut rng = RngConfig::new(c.seed).rng();
    let cs = match args.kind {
        Kind::Subspace => subspace_coreset(&rep, c.k, c.eps, &cfg, &mut rng)?,
        Kind::Kmedian => kmedian_coreset(&rep, c.k, c.eps, &cfg, &mut rng)?,
    };
    let out = c.out()?;
    let file = cs.to_file(&sibling(out, ".basis"))?;
    fs::write(out, serde_json::to_vec(&file)?).map_err(Error::at(out))?;
    let mut line = json!({ "out": out, "size": cs.len() });
    if c.stats {
        line["budget"] = json!(cs.budget);
        line["total_weight"] = json!(cs.total_weight());
        line["rows"] = json!(rep.n());
    }
    print_line(&line)
}

fn load_shapes(path: Option<&Path>, a: &PointMatrix, k: usize, cfg: &Constants, seed: u64) -> Result<Vec<(String, Shape)>> {
    match path {
        Some(p) => {
            let named: Vec<NamedShape> = serde_json::from_slice(&fs::read(p).map_err(Error::at(p))?)?;
            named.into_iter().map(|s| Ok((s.id, s.shape.to_shape()?))).collect()
        }
        None => {
            let sol = kmedian_seed(&a.to_dense(), k.min(a.nrows()), cfg, &mut RngConfig::new(seed).rng())?;
            Ok(vec![("kmedian".into(), Shape::centers(sol.center_points)?)])
        }
    }
}

fn emit(records: &[ResultRecord], c: &Common) -> Result<()> {
    let sink: Box<dyn Write> = match &c.out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(Error::at(p))?)),
        None => Box::new(io::stdout().lock()),
    };
    if c.csv {
        write_csv_records(records, sink)
    } else {
        write_ndjson(records, sink)
    }
}

enum Source {
    Rep(ReducedRep),
    Coreset(WeightedCoreset),
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let c = &args.common;
    let a = c.points()?;
    let cfg = c.constants()?;
    let shapes = load_shapes(args.shapes.as_deref(), &a, c.k, &cfg, c.seed)?;
    let source = match (&args.rep, &args.coreset) {
        (Some(p), _) => Source::Rep(ReducedRep::read(p)?.0),
        (None, Some(p)) => {
            let file: CoresetFile = serde_json::from_slice(&fs::read(p).map_err(Error::at(p))?)?;
            Source::Coreset(WeightedCoreset::from_file(&file)?)
        }
        (None, None) => return Err(Error::Parameter("one of --rep or --coreset is required".into())),
    };
    let (dim, approx) = match &source {
        Source::Rep(rep) => (rep.dim_sub(), Box::new(|s: &Shape| reduced_cost(rep, s)) as Box<dyn Fn(&Shape) -> Result<f64>>),
        Source::Coreset(cs) => (cs.basis.dim_sub(), Box::new(|s: &Shape| coreset_query_cost(cs, s)) as Box<dyn Fn(&Shape) -> Result<f64>>),
    };
    let records = shapes
        .iter()
        .map(|(id, s)| Ok(ResultRecord::new(Method::Paper, dim, id, approx(s)?, exact_cost(&a, s)?)))
        .collect::<Result<Vec<_>>>()?;
    emit(&records, c)
}

fn parse_query(s: &str) -> Result<ShapeQuery> {
    match s {
        "planted" => Ok(ShapeQuery::Planted),
        "kmedian" => Ok(ShapeQuery::Kmedian),
        _ => s
            .strip_prefix("rows:")
            .and_then(|n| n.parse().ok())
            .map(ShapeQuery::RandomRows)
            .ok_or_else(|| Error::Parameter(format!("unknown shape query {s:?}"))),
    }
}

fn experiment(args: &ExperimentArgs) -> Result<()> {
    let c = &args.common;
    let input = match &c.input {
        Some(p) => InputSpec::File { path: p.clone(), format: c.format_for(p) },
        None => InputSpec::Synth(SynthSpec::new(args.d, c.k, args.samples_per_center, args.noise.into(), args.scale)),
    };
    let constants = c.constants()?;
    let mut dims = args.dims.clone();
    dims.sort_unstable();
    let cfg = ExperimentConfig {
        input,
        k: c.k,
        eps: c.eps,
        seed: c.seed,
        path: constants.path,
        dims_to_probe: dims,
        shapes: parse_query(&args.shapes)?,
        constants,
        timing: args.timing,
    };
    let mut records = Vec::new();
    let outcome = run_experiment_with(&cfg, |r| {
        records.push(r.clone());
        Ok(())
    });
    // records computed before a failure are still written
    emit(&records, c)?;
    outcome
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Reduce(c) => reduce(&c),
        Command::Coreset(a) => coreset(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Experiment(a) => experiment(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sumdist: {e}");
            ExitCode::FAILURE
        }
    }
}
