mod common;

use nalgebra::DMatrix;

use common::{gaussian_matrix, random_shape};
use sumdist::coresets::{kmedian_seed, LiftedRep};
use sumdist::experiment::{InputSpec, Method, ShapeQuery};
use sumdist::{
    complete_dim_reduce, coreset_query_cost, kmedian_coreset, run_experiment, subspace_coreset, synth_generate, Basis,
    Constants, ExperimentConfig, NoiseKind, PipelinePath, PointMatrix, ReducedRep, RngConfig, Shape, SynthSpec,
};

fn rng(seed: u64, stream: u64) -> sumdist::rng::SketchRng {
    RngConfig::new(seed).with_stream(stream).rng()
}

fn clusters(seed: u64, d: usize, per: usize) -> (PointMatrix, DMatrix<f64>) {
    let data = synth_generate(&SynthSpec::new(d, 3, per, NoiseKind::Gaussian, 1.0), &mut rng(seed, 0)).unwrap();
    (data.points, data.centers)
}

#[test]
fn subspace_coreset_preserves_projection_costs() {
    let mut good = 0;
    for seed in 0..5 {
        let a = PointMatrix::Dense(gaussian_matrix(300, 20, &mut rng(seed, 0)));
        let rep = complete_dim_reduce(&a, 2, 0.5, &Constants::default(), &mut rng(seed, 1)).unwrap();
        let cs = subspace_coreset(&rep, 2, 0.5, &Constants::default(), &mut rng(seed, 2)).unwrap();
        assert!(cs.len() < 300);
        let lifted = LiftedRep::from_rep(&rep);
        let mut sr = rng(seed, 3);
        for _ in 0..30 {
            let s = Shape::Subspace(Basis::spanning(&gaussian_matrix(20, 2, &mut sr)));
            let full = lifted.cost(&s).unwrap();
            good += usize::from((coreset_query_cost(&cs, &s).unwrap() / full - 1.0).abs() <= 0.5);
        }
    }
    assert!(good * 10 >= 9 * 150, "{good}/150");
}

#[test]
fn kmedian_coreset_preserves_center_costs() {
    let mut good = 0;
    for seed in 0..5 {
        let (a, _) = clusters(seed, 15, 200);
        let rep = complete_dim_reduce(&a, 3, 0.5, &Constants::default(), &mut rng(seed, 1)).unwrap();
        let cs = kmedian_coreset(&rep, 3, 0.5, &Constants::default(), &mut rng(seed, 2)).unwrap();
        assert!(cs.len() < 600);
        assert!((cs.total_weight() / 600.0 - 1.0).abs() < 0.5);
        let lifted = LiftedRep::from_rep(&rep);
        let mut sr = rng(seed, 3);
        for _ in 0..30 {
            let s = random_shape(&a, 3, 0, &mut sr);
            let full = lifted.cost(&s).unwrap();
            good += usize::from((coreset_query_cost(&cs, &s).unwrap() / full - 1.0).abs() <= 0.5);
        }
    }
    assert!(good * 10 >= 9 * 150, "{good}/150");
}

#[test]
fn kmedian_seed_is_within_three_of_planted() {
    let good = (0..20)
        .filter(|&seed| {
            let (a, centers) = clusters(seed, 10, 100);
            let a = a.to_dense();
            let planted: f64 = a.row_iter().enumerate().map(|(i, r)| (r - centers.row(i / 100)).norm()).sum();
            let sol = kmedian_seed(&a, 3, &Constants::default(), &mut rng(seed, 1)).unwrap();
            sol.centers.len() == 3 && sol.assignment.len() == 300 && sol.cost <= 3.0 * planted
        })
        .count();
    assert!(good >= 19, "{good}/20");
}

#[test]
fn coreset_cost_matches_independent_recomputation() {
    let (a, _) = clusters(4, 8, 50);
    let rep = complete_dim_reduce(&a, 3, 0.5, &Constants::default(), &mut rng(4, 1)).unwrap();
    let cs = kmedian_coreset(&rep, 3, 0.5, &Constants::default(), &mut rng(4, 2)).unwrap();
    let s = random_shape(&a, 3, 0, &mut rng(4, 3));
    let Shape::Centers(c) = &s else { unreachable!() };
    let want: f64 = (0..cs.len())
        .map(|j| {
            let p = cs.basis.matrix() * cs.coords.row(j).transpose();
            let near = c.row_iter().map(|r| (&p - r.transpose()).norm()).fold(f64::INFINITY, f64::min);
            cs.weights[j] * near.hypot(cs.residuals[j])
        })
        .sum();
    let got = coreset_query_cost(&cs, &s).unwrap();
    assert!((got - want).abs() <= 1e-12 * want);
}

#[test]
fn full_budget_coresets_are_exact() {
    let (a, _) = clusters(5, 6, 30);
    let cfg = Constants { coreset_fraction: 1.0, ..Constants::default() };
    let rep = ReducedRep::exact(&a, Basis::identity(6), 0.5).unwrap();
    let lifted = LiftedRep::from_rep(&rep);
    for cs in [
        subspace_coreset(&rep, 2, 0.5, &cfg, &mut rng(5, 1)).unwrap(),
        kmedian_coreset(&rep, 3, 0.5, &cfg, &mut rng(5, 2)).unwrap(),
    ] {
        assert_eq!(cs.len(), 90);
        let s = random_shape(&a, 3, 0, &mut rng(5, 3));
        let (x, y) = (coreset_query_cost(&cs, &s).unwrap(), lifted.cost(&s).unwrap());
        assert!((x - y).abs() <= 1e-9 * y);
    }
}

#[test]
fn synthetic_counts_and_noise_scale() {
    let spec = SynthSpec::new(10000, 5, 2000, NoiseKind::Cauchy, 1.0);
    assert_eq!((spec.n, spec.d, spec.k), (10000, 10000, 5));
    let small = synth_generate(&SynthSpec::new(20, 5, 2000, NoiseKind::Cauchy, 1.0), &mut rng(0, 0)).unwrap();
    assert_eq!((small.points.nrows(), small.centers.nrows()), (10000, 5));
    assert!((0..5).all(|c| small.labels.iter().filter(|&&l| l == c).count() == 2000));

    let g = synth_generate(&SynthSpec::new(100, 2, 500, NoiseKind::Gaussian, 1.0), &mut rng(1, 0)).unwrap();
    let pts = g.points.to_dense();
    let mean = (0..1000).map(|i| (pts.row(i) - g.centers.row(g.labels[i])).norm()).sum::<f64>() / 1000.0;
    assert!((mean / 10.0 - 1.0).abs() <= 0.1, "{mean}");
}

fn small_experiment(seed: u64, dims: Vec<usize>, eps: f64) -> ExperimentConfig {
    ExperimentConfig {
        input: InputSpec::Synth(SynthSpec::new(30, 3, 60, NoiseKind::Cauchy, 1.0)),
        k: 3,
        eps,
        seed,
        path: PipelinePath::Sparse,
        dims_to_probe: dims,
        shapes: ShapeQuery::Planted,
        constants: Constants::default(),
        timing: false,
    }
}

#[test]
fn full_dimension_probe_is_exact() {
    let records = run_experiment(&small_experiment(0, vec![30], 0.5)).unwrap();
    let at_d: Vec<_> = records.iter().filter(|r| r.subspace_dim == 30).collect();
    assert_eq!(at_d.len(), 3);
    assert!(at_d.iter().all(|r| (r.ratio - 1.0).abs() <= 1e-6), "{at_d:?}");
}

#[test]
fn paper_ratio_at_final_dimension() {
    let eps = 0.4;
    for seed in 0..3 {
        let records = run_experiment(&small_experiment(seed, vec![], eps)).unwrap();
        let last = records.iter().filter(|r| r.method == Method::Paper).max_by_key(|r| r.subspace_dim).unwrap();
        assert!((last.ratio - 1.0).abs() <= 5.0 * eps, "{last:?}");
    }
}

#[test]
fn experiment_is_reproducible() {
    let cfg = small_experiment(9, vec![2, 5], 0.5);
    assert_eq!(run_experiment(&cfg).unwrap(), run_experiment(&cfg).unwrap());
    let bad = ExperimentConfig { eps: 1.5, ..cfg };
    assert!(run_experiment(&bad).is_err());
}
