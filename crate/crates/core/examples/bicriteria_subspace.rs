//! Constant-factor and (1+eps) subspace solvers on a planted instance.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use sumdist::{eps_approx, poly_approx, residual_cost, Basis, Constants, PointMatrix, RngConfig};

fn main() -> sumdist::Result<()> {
    let mut rng = RngConfig::new(3).rng();
    let (n, d, k) = (400, 120, 3);
    let mut gauss = |r, c| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let v = Basis::spanning(&gauss(d, k));
    let a = gauss(n, k) * 10.0 * v.matrix().transpose() + gauss(n, d) * 0.3;
    let a = PointMatrix::Dense(a);
    let planted = residual_cost(&a, &[&v])?;

    let cfg = Constants::practical();
    let b = Basis::empty(d);
    let mut rng = RngConfig::new(3).with_stream(1).rng();
    let x = poly_approx(&a, &b, k, 0.1, &cfg, &mut rng)?;
    println!("poly_approx: dim {}, cost {:.1}", x.basis.dim_sub(), residual_cost(&a, &[&x.basis])?);
    let u = eps_approx(&a, &b, &x.basis, k, cfg.k_trust, 0.5, 0.1, &cfg, &mut rng)?;
    println!("eps_approx: dim {}, cost {:.1}", u.basis.dim_sub(), residual_cost(&a, &[&u.basis])?);
    println!("planted subspace cost {planted:.1}");
    Ok(())
}
