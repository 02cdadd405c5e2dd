//! Overshoot transforms for drift-only models and the ladder-height
//! representations of the running-maximum transform built from them.
//!
//! `xi(n, k, alpha, beta, gamma)` is the transform of the overshoot over an
//! independent `Exp(gamma)` level, restricted to the event that the level is
//! crossed before killing by the claim that leaves `k` clients;
//! `zeta(n, k, alpha, beta)` is its `gamma -> infinity` limit (overshoot over
//! level zero).

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Result, RuinError};
use crate::model::{KilledRates, ModelSpec};
use crate::series::{slope_series, Series};

/// Largest pool size for which chains are enumerated explicitly.
pub const MAX_CHAIN_M: usize = 12;

struct Engine<'a> {
    model: &'a ModelSpec,
    rates: KilledRates,
    alpha: f64,
    memo: RefCell<HashMap<(usize, usize, u64), Series>>,
}

impl<'a> Engine<'a> {
    fn new(model: &'a ModelSpec, rates: KilledRates, alpha: f64) -> Self {
        Engine {
            model,
            rates,
            alpha,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn nu(&self, n: usize) -> f64 {
        self.rates.lambda(n) / self.model.drift_rate(n)
    }

    fn claim_at(&self, n: usize, y: f64, order: usize) -> Result<Series> {
        self.model.next_claim(n).lst_series(y, order)
    }

    /// Series in `gamma` of `B[alpha, y]` around `y`.
    fn slope_alpha(&self, n: usize, y: f64, order: usize) -> Result<Series> {
        slope_series(|x, o| self.claim_at(n, x, o), y, self.alpha, order)
    }

    fn xi_series(&self, n: usize, k: usize, gamma: f64, order: usize) -> Result<Series> {
        let key = (n, k, gamma.to_bits());
        if let Some(s) = self.memo.borrow().get(&key) {
            if s.order() >= order {
                return Ok(s.clone().truncate(order));
            }
        }
        let nu = self.nu(n);
        let lam_circ = self.model.rate(n);
        let out = if k + 1 == n {
            // (lam_circ gamma / r) B[alpha, nu, gamma]
            let second = slope_series(|y, o| self.slope_alpha(n, y, o), gamma, nu, order)?;
            let r = self.model.drift_rate(n);
            (&Series::variable(gamma, order) * &second).scale(lam_circ / r)
        } else {
            // (lam_circ / lam) (nu f(gamma) - gamma f(nu)) / (nu - gamma),
            // f = B * xi_{n-1,k}
            let f_at = |y: f64, o: usize| -> Result<Series> {
                let b = self.claim_at(n, y, o)?;
                let prev = self.xi_series(n - 1, k, y, o)?;
                Ok(&b * &prev)
            };
            let slope = slope_series(f_at, gamma, nu, order)?;
            let fg = f_at(gamma, order)?;
            (&fg - &(&Series::variable(gamma, order) * &slope))
                .scale(lam_circ / self.rates.lambda(n))
        };
        self.memo.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    fn xi(&self, n: usize, k: usize, gamma: f64) -> Result<f64> {
        Ok(self.xi_series(n, k, gamma, 0)?.value())
    }

    fn zeta(&self, n: usize, k: usize) -> Result<f64> {
        let nu = self.nu(n);
        let lam_circ = self.model.rate(n);
        if k + 1 == n {
            let slope = slope_series(|y, o| self.claim_at(n, y, o), self.alpha, nu, 0)?;
            Ok(-lam_circ / self.model.drift_rate(n) * slope.value())
        } else {
            let b = self.model.next_claim(n).lst(nu);
            Ok(lam_circ / self.rates.lambda(n) * b * self.xi(n - 1, k, nu)?)
        }
    }

    /// `table[n][k] = zeta_{n,k}` for `1 <= n <= m`, `k < n`.
    fn zeta_table(&self) -> Result<Vec<Vec<f64>>> {
        let m = self.model.m();
        let mut table = vec![Vec::new()];
        for n in 1..=m {
            let row = (0..n).map(|k| self.zeta(n, k)).collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        Ok(table)
    }
}

fn checked_rates(model: &ModelSpec, beta: f64) -> Result<KilledRates> {
    model.check_drift_only(model.m())?;
    if !(beta > 0.0) {
        return Err(RuinError::KillingRequired);
    }
    KilledRates::new(model, beta)
}

fn check_indices(model: &ModelSpec, n: usize, k: usize) -> Result<()> {
    if n == 0 || n > model.m() || k >= n {
        return Err(RuinError::InvalidArgument(format!(
            "need 0 <= k < n <= m, got n = {n}, k = {k}, m = {}",
            model.m()
        )));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 {
        Ok(())
    } else {
        Err(RuinError::InvalidArgument(format!("alpha = {alpha} must be nonnegative")))
    }
}

/// `xi_{n,k}(alpha, beta, gamma)`.
pub fn xi(model: &ModelSpec, n: usize, k: usize, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_indices(model, n, k)?;
    check_alpha(alpha)?;
    if !(gamma >= 0.0) {
        return Err(RuinError::InvalidArgument(format!("gamma = {gamma} must be nonnegative")));
    }
    let rates = checked_rates(model, beta)?;
    Engine::new(model, rates, alpha).xi(n, k, gamma)
}

/// `zeta_{n,k}(alpha, beta)`.
pub fn zeta(model: &ModelSpec, n: usize, k: usize, alpha: f64, beta: f64) -> Result<f64> {
    check_indices(model, n, k)?;
    check_alpha(alpha)?;
    let rates = checked_rates(model, beta)?;
    Engine::new(model, rates, alpha).zeta(n, k)
}

fn tables(model: &ModelSpec, rates: &KilledRates, alpha: f64) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let at_alpha = Engine::new(model, rates.clone(), alpha).zeta_table()?;
    let at_zero = Engine::new(model, rates.clone(), 0.0).zeta_table()?;
    Ok((at_alpha, at_zero))
}

/// `pi_m(alpha, beta)` through `pi_n = P_n(tau(0) > T) + sum_k zeta_{n,k} pi_k`.
pub fn pi_via_ladders(model: &ModelSpec, beta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let rates = checked_rates(model, beta)?;
    let (za, z0) = tables(model, &rates, alpha)?;
    let mut pi = vec![1.0];
    for n in 1..=model.m() {
        let survive = 1.0 - z0[n].iter().sum::<f64>();
        let jump: f64 = (0..n).map(|k| za[n][k] * pi[k]).sum();
        pi.push(survive + jump);
    }
    Ok(pi[model.m()])
}

/// `pi_m(alpha, beta)` as a sum over strictly decreasing ladder chains
/// `m = i_0 > i_1 > ... > i_j`.
pub fn pi_explicit_chains(model: &ModelSpec, beta: f64, alpha: f64) -> Result<f64> {
    let m = model.m();
    if m > MAX_CHAIN_M {
        return Err(RuinError::ChainBudgetExceeded { m, max: MAX_CHAIN_M });
    }
    check_alpha(alpha)?;
    let rates = checked_rates(model, beta)?;
    let (za, z0) = tables(model, &rates, alpha)?;
    let survive: Vec<f64> = (0..=m)
        .map(|n| if n == 0 { 0.0 } else { 1.0 - z0[n].iter().sum::<f64>() })
        .collect();

    fn walk(i: usize, weight: f64, za: &[Vec<f64>], survive: &[f64]) -> f64 {
        if i == 0 {
            return weight;
        }
        let mut total = weight * survive[i];
        for next in 0..i {
            total += walk(next, weight * za[i][next], za, survive);
        }
        total
    }
    Ok(walk(m, 1.0, &za, &survive))
}

/// Probability that the net claim process ever becomes positive
/// (infinite horizon), `p_m(0) = sum_k zeta_{m,k}(0, 0)`.
pub fn ruin_prob_at_zero(model: &ModelSpec) -> Result<f64> {
    model.check_drift_only(model.m())?;
    let m = model.m();
    if m == 0 {
        return Ok(0.0);
    }
    let rates = KilledRates::unchecked(model, 0.0);
    let engine = Engine::new(model, rates, 0.0);
    (0..m).map(|k| engine.zeta(m, k)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::ClaimDistribution;
    use crate::ladder::pi_drift;
    use approx::assert_relative_eq;

    fn m1() -> ModelSpec {
        ModelSpec::drift(vec![1.0], ClaimDistribution::Exponential { mu: 1.0 }, vec![0.0, 1.0]).unwrap()
    }

    fn m3() -> ModelSpec {
        ModelSpec::drift(
            vec![0.7, 1.9, 0.4],
            ClaimDistribution::Erlang { k: 2, mu: 1.3 },
            vec![0.0, 1.1, 0.6, 2.5],
        )
        .unwrap()
    }

    #[test]
    fn hand_values() {
        let m = m1();
        assert_relative_eq!(zeta(&m, 1, 0, 0.0, 1.0).unwrap(), 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(zeta(&m, 1, 0, 1.0, 1.0).unwrap(), 1.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(pi_via_ladders(&m, 1.0, 1.0).unwrap(), 5.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(pi_explicit_chains(&m, 1.0, 1.0).unwrap(), 5.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(ruin_prob_at_zero(&m).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(xi(&m, 1, 0, 0.0, 1.0, 1e9).unwrap(), 1.0 / 3.0, max_relative = 1e-8);
    }

    #[test]
    fn xi_limits_and_continuity() {
        let m = m3();
        assert!(xi(&m, 3, 1, 0.5, 1.0, 1e-12).unwrap().abs() < 1e-10);
        for (n, k) in [(3, 0), (3, 1), (3, 2), (2, 0)] {
            let big = xi(&m, n, k, 0.5, 1.0, 1e9).unwrap();
            assert_relative_eq!(big, zeta(&m, n, k, 0.5, 1.0).unwrap(), max_relative = 1e-6);
            let g = 0.8;
            let at = xi(&m, n, k, g, 1.0, g).unwrap();
            let lo = xi(&m, n, k, g - 1e-5, 1.0, g).unwrap();
            let hi = xi(&m, n, k, g + 1e-5, 1.0, g).unwrap();
            assert!((at - lo).abs() < 1e-4 && (at - hi).abs() < 1e-4);
        }
    }

    #[test]
    fn xi_at_descent_rate_matches_limit_formula() {
        let m = m1();
        let beta = 1.0;
        let nu = 2.0;
        let alpha = 0.4;
        let b = ClaimDistribution::Exponential { mu: 1.0 };
        let deriv = b.lst_jet(nu).unwrap().d1;
        let expected = nu / (2.0 - alpha) * ((b.lst(nu) - b.lst(alpha)) / (alpha - nu) + deriv);
        assert_relative_eq!(xi(&m, 1, 0, alpha, beta, nu).unwrap(), expected, max_relative = 1e-13);
    }

    #[test]
    fn three_routes_agree() {
        let m = m3();
        for beta in [0.5, 1.0, 2.0] {
            for a in [0.0, 0.3, 1.0, 4.0] {
                let d = pi_drift(&m, beta, 3, a).unwrap();
                assert!((d - pi_via_ladders(&m, beta, a).unwrap()).abs() < 1e-12);
                assert!((d - pi_explicit_chains(&m, beta, a).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_claims_never_ruin() {
        let m = ModelSpec::drift(vec![1.0, 2.0], ClaimDistribution::PointMass { b: 0.0 }, vec![0.0, 1.0, 1.0])
            .unwrap();
        assert!(ruin_prob_at_zero(&m).unwrap().abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let m = m1();
        assert!(matches!(zeta(&m, 1, 0, 1.0, 0.0), Err(RuinError::KillingRequired)));
        assert!(zeta(&m, 1, 1, 1.0, 1.0).is_err());
        let big = ModelSpec::drift(
            vec![1.0; 13],
            ClaimDistribution::Exponential { mu: 1.0 },
            vec![1.0; 14],
        )
        .unwrap();
        assert!(matches!(
            pi_explicit_chains(&big, 1.0, 1.0),
            Err(RuinError::ChainBudgetExceeded { .. })
        ));
    }
}
