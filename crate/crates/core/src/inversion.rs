//! Stehfest numerical Laplace inversion, and the curves obtained with it:
//! ruin probabilities in the initial reserve `u` and moments of the running
//! maximum in the time horizon `t`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Result, RuinError};
use crate::ladder::{pi, pi_series};
use crate::model::ModelSpec;

pub const DEFAULT_TERMS: usize = 14;

/// Precomputed Stehfest weights `V_1..V_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StehfestPlan {
    weights: Vec<f64>,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

impl StehfestPlan {
    /// Builds the weights in exact rational arithmetic.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(RuinError::InvalidArgument(format!(
                "Stehfest term count {n} must be even and at least 2"
            )));
        }
        let half = n / 2;
        let mut exact = Vec::with_capacity(n);
        for k in 1..=n {
            let mut sum = BigRational::zero();
            for j in (k + 1) / 2..=k.min(half) {
                let num = BigInt::from(j).pow(half as u32) * factorial(2 * j);
                let den = factorial(half - j)
                    * factorial(j)
                    * factorial(j - 1)
                    * factorial(k - j)
                    * factorial(2 * j - k);
                sum += BigRational::new(num, den);
            }
            if (k + half) % 2 == 1 {
                sum = -sum;
            }
            exact.push(sum);
        }
        let total: BigRational = exact.iter().cloned().sum();
        if !total.is_zero() {
            return Err(RuinError::NoConvergence("Stehfest weights do not sum to zero".into()));
        }
        let weights = exact
            .iter()
            .map(|v| v.to_f64().expect("weights are finite"))
            .collect();
        Ok(StehfestPlan { weights })
    }

    pub fn terms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Checks the inversion of three known transform pairs. Tolerances are
    /// relative for values above one; the largest weights are around 1e7 at
    /// N = 14, so `1/s^2` at `t = 3` only reaches about 4e-7 relative.
    pub fn self_test(&self) -> Result<()> {
        let checks: [(fn(f64) -> f64, f64, f64, f64); 3] = [
            (|s| 1.0 / s, 2.0, 1.0, 1e-8),
            (|s| 1.0 / (s + 1.0), 1.0, (-1.0f64).exp(), 1e-6),
            (|s| 1.0 / (s * s), 3.0, 3.0, 1e-6),
        ];
        for (f, t, expected, tol) in checks {
            let got = self.invert(|s| Ok(f(s)), t)?;
            if (got - expected).abs() > tol * expected.abs().max(1.0) {
                return Err(RuinError::NoConvergence(format!(
                    "Stehfest self test failed at t = {t}: {got} vs {expected}"
                )));
            }
        }
        Ok(())
    }

    /// `(ln 2 / t) sum_k V_k F(k ln 2 / t)`.
    pub fn invert<F: FnMut(f64) -> Result<f64>>(&self, mut f: F, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(RuinError::InvalidArgument(format!("inversion point {t} must be positive")));
        }
        let a = std::f64::consts::LN_2 / t;
        let mut acc = 0.0;
        for (i, v) in self.weights.iter().enumerate() {
            let s = a * (i + 1) as f64;
            let fs = f(s).map_err(|e| RuinError::EvaluationFailed(format!("at s = {s}: {e}")))?;
            acc += v * fs;
        }
        Ok(a * acc)
    }
}

impl Default for StehfestPlan {
    fn default() -> Self {
        let plan = StehfestPlan::new(DEFAULT_TERMS).expect("default term count is valid");
        plan.self_test().expect("default Stehfest plan passes its self test");
        plan
    }
}

/// Tolerance outside `[0, 1]` that is clamped silently.
const CLAMP_SLACK: f64 = 1e-6;

/// `p_m(u, beta) = P_m(Ybar(T_beta) > u)` for each `u > 0`, inverting
/// `alpha -> (1 - pi_m(alpha, beta)) / alpha`.
pub fn ruin_curve(model: &ModelSpec, beta: f64, u_grid: &[f64], plan: &StehfestPlan) -> Result<Vec<f64>> {
    ruin_curve_raw(model, beta, u_grid, plan).map(|raw| {
        raw.into_iter()
            .zip(u_grid)
            .map(|(p, u)| {
                if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&p) {
                    log::warn!("inverted ruin probability {p} at u = {u} clamped to [0, 1]");
                }
                p.clamp(0.0, 1.0)
            })
            .collect()
    })
}

/// Inverted values before clamping.
pub fn ruin_curve_raw(
    model: &ModelSpec,
    beta: f64,
    u_grid: &[f64],
    plan: &StehfestPlan,
) -> Result<Vec<f64>> {
    let m = model.m();
    u_grid
        .iter()
        .map(|&u| {
            if m == 0 {
                return Ok(0.0);
            }
            plan.invert(|a| Ok((1.0 - pi(model, beta, m, a)?) / a), u)
        })
        .collect()
}

/// Mean and variance of `Ybar(t)` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurves {
    pub t: Vec<f64>,
    pub mean: Vec<f64>,
    pub second: Vec<f64>,
    pub var: Vec<f64>,
}

/// Inverts `beta -> E Ybar(T_beta) / beta` and `beta -> E Ybar(T_beta)^2 / beta`
/// in `beta`; the variance is assembled after inversion.
pub fn moment_curves(model: &ModelSpec, t_grid: &[f64], plan: &StehfestPlan) -> Result<MomentCurves> {
    let m = model.m();
    let mut out = MomentCurves {
        t: t_grid.to_vec(),
        mean: Vec::with_capacity(t_grid.len()),
        second: Vec::with_capacity(t_grid.len()),
        var: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        if !(t > 0.0 && t.is_finite()) {
            return Err(RuinError::InvalidArgument(format!("time {t} must be positive")));
        }
        let a = std::f64::consts::LN_2 / t;
        let (mut m1, mut m2) = (0.0, 0.0);
        for (i, v) in plan.weights().iter().enumerate() {
            let beta = a * (i + 1) as f64;
            let s = pi_series(model, beta, m, 0.0, 2)
                .map_err(|e| RuinError::EvaluationFailed(format!("at beta = {beta}: {e}")))?;
            m1 += v * (-s.derivative(1) / beta);
            m2 += v * (s.derivative(2) / beta);
        }
        let (m1, m2) = (a * m1, a * m2);
        out.mean.push(m1);
        out.second.push(m2);
        out.var.push(m2 - m1 * m1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::ClaimDistribution;

    #[test]
    fn weights_sum_to_zero_and_pairs_hold() {
        for n in [2, 8, 14, 16] {
            let plan = StehfestPlan::new(n).unwrap();
            assert_eq!(plan.terms(), n);
            assert!(plan.weights().iter().sum::<f64>().abs() < 1e-6);
        }
        assert!(StehfestPlan::new(14).unwrap().self_test().is_ok());
        assert!(StehfestPlan::new(4).unwrap().self_test().is_err());
        let plan = StehfestPlan::default();
        for t in [0.5, 1.0, 7.0] {
            let v = plan.invert(|s| Ok(1.0 / s), t).unwrap();
            assert!((v - 1.0).abs() < 1e-8);
        }
        assert!(StehfestPlan::new(5).is_err());
    }

    #[test]
    fn exponential_claims_single_client() {
        // m = 1, drift r, Exp(mu) claim: P(Ybar > u) = (lam_c/lam) nu/(nu+mu) e^{-mu u}
        let (lc, beta, r, mu) = (1.0, 1.0, 1.0, 1.0);
        let m = ModelSpec::drift(vec![lc], ClaimDistribution::Exponential { mu }, vec![0.0, r]).unwrap();
        let lam = lc + beta;
        let nu = lam / r;
        let plan = StehfestPlan::default();
        let us = [0.5, 1.0, 3.0];
        let p = ruin_curve(&m, beta, &us, &plan).unwrap();
        for (u, p) in us.iter().zip(p) {
            let exact = lc / lam * nu / (nu + mu) * (-mu * u).exp();
            assert!((p - exact).abs() < 1e-5, "{u} {p} {exact}");
        }
    }

    #[test]
    fn empty_pool_curves() {
        let m = ModelSpec::drift(vec![], ClaimDistribution::Exponential { mu: 1.0 }, vec![1.0]).unwrap();
        let plan = StehfestPlan::default();
        assert_eq!(ruin_curve(&m, 1.0, &[1.0, 2.0], &plan).unwrap(), vec![0.0, 0.0]);
        let c = moment_curves(&m, &[1.0, 5.0], &plan).unwrap();
        assert!(c.mean.iter().chain(&c.var).all(|v| v.abs() < 1e-12));
    }
}
