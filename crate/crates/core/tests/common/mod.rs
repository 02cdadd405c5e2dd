#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruinpool::{ClaimDistribution, ModelSpec};

/// Random drift-only model: m <= max_m, rates in [0.1, 5], Exp or Erlang claims.
pub fn random_drift_model(rng: &mut ChaCha8Rng, max_m: usize) -> ModelSpec {
    let m = rng.random_range(1..=max_m);
    let lc: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..5.0)).collect();
    let mut rates = vec![rng.random_range(0.0..5.0)];
    rates.extend((0..m).map(|_| rng.random_range(0.1..5.0)));
    let claims = (0..m)
        .map(|_| {
            let mu = rng.random_range(0.1..5.0);
            if rng.random_bool(0.5) {
                ClaimDistribution::Exponential { mu }
            } else {
                ClaimDistribution::Erlang { k: 2, mu }
            }
        })
        .collect();
    ModelSpec::new(lc, claims, rates.into_iter().map(|r| ruinpool::LevyRegime::Drift { r }).collect()).unwrap()
}

/// Fixed battery of `count` models with their killing rates.
pub fn battery(count: usize, max_m: usize, seed: u64) -> Vec<(ModelSpec, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| (random_drift_model(&mut rng, max_m), [0.5, 1.0, 2.0][i % 3]))
        .collect()
}

pub const ALPHA_GRID: [f64; 8] = [0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0];

/// Figure 4 setup: lambda_circ_n = n, r_n = n / 100, Erlang(2, 1), m = 5.
pub fn fig4_model() -> ModelSpec {
    let m = 5;
    ModelSpec::drift(
        (1..=m).map(|n| n as f64).collect(),
        ClaimDistribution::Erlang { k: 2, mu: 1.0 },
        (0..=m).map(|n| n as f64 / 100.0).collect(),
    )
    .unwrap()
}
