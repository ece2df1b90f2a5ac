//! Norm estimates from Cauchy, Gaussian and CountSketch matrices.

use nalgebra::{DMatrix, DVector};
use sumdist::sketching::{cauchy_sketch, gaussian_l1_to_l2, gaussian_l2_estimate, gaussian_sketch, median_abs_l1, CountSketch};
use sumdist::RngConfig;

fn main() -> sumdist::Result<()> {
    let mut rng = RngConfig::new(1).rng();
    let x = DVector::from_fn(100, |i, _| ((i * 37) % 11) as f64 - 5.0);

    let c = cauchy_sketch(501, 100, &mut rng)?;
    println!("l1: exact {:.2}, cauchy median {:.2}", x.lp_norm(1), median_abs_l1(&c, &x)?);

    let g = gaussian_sketch(100, 200, 1.0 / 200f64.sqrt(), &mut rng)?;
    println!("l2: exact {:.2}, gaussian {:.2}", x.norm(), gaussian_l2_estimate(&g, &x)?);

    let g1 = gaussian_sketch(100, 500, 1.0, &mut rng)?;
    println!("l2 from l1 of a gaussian sketch: {:.2}", gaussian_l1_to_l2(&g1, &x, 500)?);

    let m = DMatrix::from_fn(100, 3, |i, j| x[i] * (j + 1) as f64 + (i % 7) as f64);
    let cs = CountSketch::new(60, 100, &mut rng)?;
    let sm = cs.apply(&m)?;
    println!("countsketch column norms: {:.2?} vs {:.2?}", sm.column_iter().map(|c| c.norm()).collect::<Vec<_>>(),
        m.column_iter().map(|c| c.norm()).collect::<Vec<_>>());
    Ok(())
}
