//! Reduce a point set, save it, reload it and compare query costs.

use sumdist::{complete_dim_reduce_with_stats, exact_cost, reduced_cost, synth_generate, Basis, Constants, NoiseKind,
    ReducedRep, RngConfig, Shape, SynthSpec};

fn main() -> sumdist::Result<()> {
    let data = synth_generate(&SynthSpec::new(40, 3, 100, NoiseKind::Cauchy, 1.0), &mut RngConfig::new(4).rng())?;
    let a = &data.points;
    let (rep, stats) = complete_dim_reduce_with_stats(a, 3, 0.5, &Constants::practical(), &mut RngConfig::new(4).with_stream(1).rng())?;
    println!("{} rows reduced to dimension {} (i* = {}, {} fallback rows)", rep.n(), rep.dim_sub(), stats.istar, stats.fallback_rows);

    let path = std::env::temp_dir().join("sumdist_example_rep.bin");
    rep.write(&path, 4)?;
    let (back, seed) = ReducedRep::read(&path)?;
    assert_eq!((back == rep, seed), (true, 4));

    let shapes = [
        ("planted centers", Shape::centers(data.centers.clone())?),
        ("first axis", Shape::Subspace(Basis::identity(40).truncate(1))),
    ];
    for (name, s) in &shapes {
        println!("{name}: reduced {:.1}, exact {:.1}", reduced_cost(&back, s)?, exact_cost(a, s)?);
    }
    Ok(())
}
