//! Subspace and k-median coresets of a reduced representation.

use sumdist::coresets::LiftedRep;
use sumdist::{complete_dim_reduce, coreset_query_cost, kmedian_coreset, subspace_coreset, synth_generate, Basis,
    Constants, NoiseKind, RngConfig, Shape, SynthSpec};

fn main() -> sumdist::Result<()> {
    let data = synth_generate(&SynthSpec::new(15, 3, 200, NoiseKind::Gaussian, 1.0), &mut RngConfig::new(6).rng())?;
    let cfg = Constants::default();
    let rep = complete_dim_reduce(&data.points, 3, 0.5, &cfg, &mut RngConfig::new(6).with_stream(1).rng())?;
    let lifted = LiftedRep::from_rep(&rep);

    let centers = Shape::centers(data.centers.clone())?;
    let km = kmedian_coreset(&rep, 3, 0.5, &cfg, &mut RngConfig::new(6).with_stream(2).rng())?;
    println!("k-median coreset: {} of {} rows, cost {:.1} vs {:.1}", km.len(), rep.n(),
        coreset_query_cost(&km, &centers)?, lifted.cost(&centers)?);

    let plane = Shape::Subspace(Basis::identity(15).truncate(3));
    let sub = subspace_coreset(&rep, 3, 0.5, &cfg, &mut RngConfig::new(6).with_stream(3).rng())?;
    println!("subspace coreset: {} rows, cost {:.1} vs {:.1}", sub.len(), coreset_query_cost(&sub, &plane)?, lifted.cost(&plane)?);
    Ok(())
}
