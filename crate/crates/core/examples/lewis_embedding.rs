//! Lewis weights and a certified l1 subspace embedding.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use sumdist::embeddings::EmbeddingPath;
use sumdist::{l1_embedding, lewis_weights, Constants, RngConfig};

fn main() -> sumdist::Result<()> {
    let mut rng = RngConfig::new(2).rng();
    let m = DMatrix::from_fn(400, 5, |_, _| rng.sample::<f64, _>(StandardNormal));

    let state = lewis_weights(&m, 20)?;
    println!("weights sum to {:.3} (rank 5) after {} iterations", state.weights.iter().sum::<f64>(), state.iterations);

    let emb = l1_embedding(&m, EmbeddingPath::Lewis, &Constants::default(), &mut rng)?;
    println!("embedding with {} rows, certified in [{:.3}, {:.3}]", emb.map.rows(), emb.alpha, emb.beta);

    let x = DVector::from_fn(5, |i, _| i as f64 - 2.0);
    let em = emb.map.apply(&m)?;
    println!("||Mx||_1 = {:.2}, ||EMx||_1 = {:.2}", (&m * &x).lp_norm(1), (em * &x).lp_norm(1));
    Ok(())
}
