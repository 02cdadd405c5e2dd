//! Regularly varying claims: the number of claims before killing and the
//! resulting tail asymptote of the ruin probability.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::claims::RVMeta;
use crate::error::{Result, RuinError};
use crate::model::{KilledRates, ModelSpec};

fn check_beta(beta: f64) -> Result<()> {
    if beta >= 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(RuinError::InvalidArgument(format!("beta = {beta} must be nonnegative")))
    }
}

/// `prod_{i=j}^n lambda_circ_i / lambda_i`.
fn survival_product(model: &ModelSpec, rates: &KilledRates, j: usize, n: usize) -> f64 {
    (j..=n).map(|i| model.rate(i) / rates.lambda(i)).product()
}

fn rv_meta(model: &ModelSpec) -> Result<RVMeta> {
    model.identical_claim()?.rv_meta()
}

/// `Phi_n(beta) = theta sum_{j=1}^n prod_{i=j}^n lambda_circ_i / lambda_i`.
pub fn phi_coefficient(model: &ModelSpec, beta: f64, n: usize) -> Result<f64> {
    check_beta(beta)?;
    if n > model.m() {
        return Err(RuinError::InvalidArgument(format!("n = {n} exceeds m = {}", model.m())));
    }
    let meta = rv_meta(model)?;
    let rates = KilledRates::unchecked(model, beta);
    let sum: f64 = (1..=n).map(|j| survival_product(model, &rates, j, n)).sum();
    Ok(meta.theta * sum)
}

/// Law of the number `M` of major claims that arrive before the killing time,
/// starting from `m` clients: index `n` holds `P(M = n)`.
pub fn m_distribution(model: &ModelSpec, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    let m = model.m();
    let rates = KilledRates::unchecked(model, beta);
    let mut out = vec![0.0; m + 1];
    // P(M = n) = P(first n claims beat the clock) * P(clock beats the next one)
    let mut reach = 1.0;
    for (n, slot) in out.iter_mut().enumerate() {
        let remaining = m - n;
        *slot = if remaining == 0 {
            reach
        } else {
            reach * beta / rates.lambda(remaining)
        };
        if remaining > 0 {
            reach *= model.rate(remaining) / rates.lambda(remaining);
        }
    }
    Ok(out)
}

/// `E M = sum_{j=1}^m prod_{i=j}^m lambda_circ_i / lambda_i`.
pub fn expected_claims(model: &ModelSpec, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let m = model.m();
    let rates = KilledRates::unchecked(model, beta);
    Ok((1..=m).map(|j| survival_product(model, &rates, j, m)).sum())
}

/// Asymptote `p_m(u, beta) ~ E M * P(B > u)` of the ruin probability.
pub fn rv_tail_approx(model: &ModelSpec, beta: f64, u: f64) -> Result<f64> {
    let claim = model.identical_claim()?;
    claim.rv_meta()?;
    Ok(expected_claims(model, beta)? * claim.tail(u))
}

/// Constants of the regular-variation asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RVAsymptote {
    pub phi_m: f64,
    /// `Phi_m (-1)^{n_delta} / Gamma(1 - delta)`, the constant in front of
    /// `u^{-delta} L(u)` in the ruin-probability tail.
    pub prefactor: f64,
    pub em: f64,
    pub theta: f64,
    pub delta: f64,
}

impl RVAsymptote {
    pub fn new(model: &ModelSpec, beta: f64) -> Result<Self> {
        let meta = rv_meta(model)?;
        let phi_m = phi_coefficient(model, beta, model.m())?;
        let sign = if meta.n_delta % 2 == 0 { 1.0 } else { -1.0 };
        Ok(RVAsymptote {
            phi_m,
            prefactor: phi_m * sign / gamma(1.0 - meta.delta),
            em: expected_claims(model, beta)?,
            theta: meta.theta,
            delta: meta.delta,
        })
    }

    /// `(Phi_m / theta) P(B > u)`.
    pub fn p_big(&self, model: &ModelSpec, u: f64) -> Result<f64> {
        Ok(self.phi_m / self.theta * model.identical_claim()?.tail(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::ClaimDistribution;
    use approx::assert_relative_eq;

    fn lomax() -> ClaimDistribution {
        ClaimDistribution::Lomax { c: 1.0, eps: 1.5 }
    }

    fn model(lc: Vec<f64>) -> ModelSpec {
        let m = lc.len();
        ModelSpec::drift(lc, lomax(), (0..=m).map(|n| (n * n) as f64).collect()).unwrap()
    }

    #[test]
    fn phi_examples() {
        let theta = lomax().rv_meta().unwrap().theta;
        let m = model(vec![1.0, 2.0]);
        assert_relative_eq!(phi_coefficient(&m, 1.0, 1).unwrap(), theta * 0.5, max_relative = 1e-15);
        assert_relative_eq!(phi_coefficient(&m, 1.0, 2).unwrap(), theta, max_relative = 1e-15);
        assert!(phi_coefficient(&m, 1e12, 2).unwrap() < 1e-10);
    }

    #[test]
    fn claim_count_law() {
        let m1 = model(vec![1.0]);
        assert_eq!(m_distribution(&m1, 1.0).unwrap(), vec![0.5, 0.5]);
        let m = model(vec![1.0, 2.0]);
        assert_relative_eq!(expected_claims(&m, 1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(expected_claims(&m, 0.0).unwrap(), 2.0);
        let big = model(vec![1.0, 2.0, 3.0]);
        assert!(m_distribution(&big, 1e9).unwrap()[0] > 1.0 - 1e-8);
        assert_eq!(m_distribution(&big, 0.0).unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
        let p = m_distribution(&model(vec![1.0, 1.0, 1.0]), 1.0).unwrap();
        for (a, b) in p.iter().zip([0.5, 0.25, 0.125, 0.125]) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
    }

    #[test]
    fn tail_approx_example() {
        let m1 = model(vec![1.0]);
        assert_relative_eq!(rv_tail_approx(&m1, 1.0, 3.0).unwrap(), 0.0625, max_relative = 1e-14);
        assert_relative_eq!(rv_tail_approx(&m1, 1.0, 0.0).unwrap(), 0.5, max_relative = 1e-15);
        let a = RVAsymptote::new(&model(vec![1.0, 2.0, 0.5]), 0.7).unwrap();
        assert!(a.prefactor > 0.0);
        assert_relative_eq!(a.phi_m, a.theta * a.em, max_relative = 1e-12);
    }

    #[test]
    fn rejects_light_tails() {
        let m = ModelSpec::drift(vec![1.0], ClaimDistribution::Exponential { mu: 1.0 }, vec![0.0, 1.0])
            .unwrap();
        assert!(phi_coefficient(&m, 1.0, 1).is_err());
    }
}
