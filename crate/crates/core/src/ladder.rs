//! Transforms of the running maximum via the ladder recursion.
//!
//! Level `k` of a generic ladder variable satisfies
//! `pi_k(a) = p0 + (1 - p0) (nu f(a) - a f(nu)) / (nu - a)` with
//! `f = C_k * pi_{k-1}`, or `pi_k = p0 + (1 - p0) f` when no exponential
//! descent separates the steps (`nu = infinity`). Every evaluation is done in
//! truncated Taylor arithmetic, memoized per `(level, argument)`, so moments
//! and coincident arguments share one code path.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Result, RuinError};
use crate::model::{KilledRates, LevyRegime, ModelSpec};
use crate::series::{slope_series, Series, TransformJet};

/// Taylor series of a composite claim transform at a point.
pub type CompositeFn<'a> = Box<dyn Fn(f64, usize) -> Result<Series> + 'a>;

pub struct LadderLevel<'a> {
    /// Rate of the exponential descent; `None` for a level without one.
    pub nu: Option<f64>,
    /// Probability that the step ends the walk.
    pub p0: f64,
    pub composite: CompositeFn<'a>,
}

pub struct GenericLadderSpec<'a> {
    levels: Vec<LadderLevel<'a>>,
}

impl<'a> GenericLadderSpec<'a> {
    pub fn new(levels: Vec<LadderLevel<'a>>) -> Result<Self> {
        for (i, l) in levels.iter().enumerate() {
            if !(0.0..=1.0).contains(&l.p0) {
                return Err(RuinError::InvalidArgument(format!(
                    "level {}: p0 = {} outside [0, 1]",
                    i + 1,
                    l.p0
                )));
            }
            if let Some(nu) = l.nu {
                if !(nu > 0.0 && nu.is_finite()) {
                    return Err(RuinError::InvalidArgument(format!(
                        "level {}: nu = {nu} must be positive",
                        i + 1
                    )));
                }
            }
        }
        Ok(GenericLadderSpec { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }
}

/// Memoizing evaluator; one per evaluation pass.
pub struct LadderEvaluator<'s, 'a> {
    spec: &'s GenericLadderSpec<'a>,
    memo: RefCell<HashMap<(usize, u64), Series>>,
}

impl<'s, 'a> LadderEvaluator<'s, 'a> {
    pub fn new(spec: &'s GenericLadderSpec<'a>) -> Self {
        LadderEvaluator {
            spec,
            memo: RefCell::new(HashMap::new()),
        }
    }

    /// Series of level `k` at `x`.
    pub fn series(&self, k: usize, x: f64, order: usize) -> Result<Series> {
        if k == 0 {
            return Ok(Series::constant(1.0, order));
        }
        let key = (k, x.to_bits());
        if let Some(s) = self.memo.borrow().get(&key) {
            if s.order() >= order {
                return Ok(s.clone().truncate(order));
            }
        }
        let level = &self.spec.levels[k - 1];
        let f_at = |y: f64, ord: usize| -> Result<Series> {
            let c = (level.composite)(y, ord)?;
            let prev = self.series(k - 1, y, ord)?;
            Ok(&c * &prev)
        };
        let g = match level.nu {
            None => f_at(x, order)?,
            Some(nu) => {
                let slope = slope_series(f_at, x, nu, order)?;
                let fx = f_at(x, order)?;
                &fx - &(&Series::variable(x, order) * &slope)
            }
        };
        let out = g.scale(1.0 - level.p0).add_constant(level.p0);
        self.memo.borrow_mut().insert(key, out.clone());
        Ok(out)
    }

    pub fn value(&self, k: usize, x: f64) -> Result<f64> {
        Ok(self.series(k, x, 0)?.value())
    }
}

/// `pi_n(alpha)` for the full depth of the spec.
pub fn pi_generic(spec: &GenericLadderSpec, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    LadderEvaluator::new(spec).value(spec.depth(), alpha)
}

/// Taylor series of `pi_n` around `alpha`.
pub fn pi_generic_series(spec: &GenericLadderSpec, alpha: f64, order: usize) -> Result<Series> {
    check_alpha(alpha)?;
    LadderEvaluator::new(spec).series(spec.depth(), alpha, order)
}

/// Several arguments evaluated in one pass with a shared cache.
pub fn pi_generic_batch(spec: &GenericLadderSpec, alphas: &[f64]) -> Result<Vec<f64>> {
    let ev = LadderEvaluator::new(spec);
    alphas
        .iter()
        .map(|&a| {
            check_alpha(a)?;
            ev.value(spec.depth(), a)
        })
        .collect()
}

/// `P(Y_k = 0) = p0 + (1 - p0) C_k(nu) pi_{k-1}(nu)`.
pub fn atom_at_zero(spec: &GenericLadderSpec, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    if k > spec.depth() {
        return Err(RuinError::InvalidArgument(format!(
            "level {k} exceeds depth {}",
            spec.depth()
        )));
    }
    let level = &spec.levels[k - 1];
    let nu = level.nu.ok_or_else(|| {
        RuinError::InvalidArgument("atom requires a finite descent rate".into())
    })?;
    let ev = LadderEvaluator::new(spec);
    let c = (level.composite)(nu, 0)?.value();
    Ok(level.p0 + (1.0 - level.p0) * c * ev.value(k - 1, nu)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 {
        Ok(())
    } else {
        Err(RuinError::InvalidArgument(format!("alpha = {alpha} must be nonnegative")))
    }
}

fn check_depth(model: &ModelSpec, n: usize) -> Result<()> {
    if n > model.m() {
        return Err(RuinError::InvalidArgument(format!(
            "n = {n} exceeds m = {}",
            model.m()
        )));
    }
    Ok(())
}

/// Ladder spec of a drift-only model: `C_k = B_{m-k+1}`, `nu_k = lambda_k / r_k`,
/// `p0 = beta / lambda_k`.
pub fn drift_ladder<'a>(model: &'a ModelSpec, beta: f64, n: usize) -> Result<GenericLadderSpec<'a>> {
    check_depth(model, n)?;
    model.check_drift_only(n)?;
    let rates = KilledRates::new(model, beta)?;
    drift_ladder_unchecked(model, &rates, n)
}

pub(crate) fn drift_ladder_unchecked<'a>(
    model: &'a ModelSpec,
    rates: &KilledRates,
    n: usize,
) -> Result<GenericLadderSpec<'a>> {
    let levels = (1..=n)
        .map(|k| {
            let lam = rates.lambda(k);
            let claim = model.next_claim(k);
            LadderLevel {
                nu: Some(lam / model.drift_rate(k)),
                p0: rates.beta() / lam,
                composite: Box::new(move |y, o| claim.lst_series(y, o)) as CompositeFn<'a>,
            }
        })
        .collect();
    GenericLadderSpec::new(levels)
}

fn regime_factor(regime: &LevyRegime, state: usize, y: f64, lam: f64, order: usize) -> Result<Series> {
    regime.max_factor_series(y, lam, order).map_err(|e| match e {
        RuinError::SubordinatorRegime { .. } => RuinError::SubordinatorRegime { state },
        other => other,
    })
}

/// Ladder spec of a general model: `C_k = B_{m-k+1} Z_{k-1}(., lambda_{k-1})`,
/// `nu_k = psi_k(lambda_k)` (none for subordinator states).
pub fn levy_ladder<'a>(model: &'a ModelSpec, beta: f64, n: usize) -> Result<GenericLadderSpec<'a>> {
    check_depth(model, n)?;
    if !(beta > 0.0) {
        return Err(RuinError::KillingRequired);
    }
    let rates = KilledRates::new(model, beta)?;
    let mut levels = Vec::with_capacity(n);
    for k in 1..=n {
        let lam = rates.lambda(k);
        let regime = model.regime(k);
        let nu = match regime {
            LevyRegime::Subordinator { .. } => None,
            LevyRegime::Drift { r } if *r <= 0.0 => {
                return Err(RuinError::RegimeMismatch(format!(
                    "regime {k} has nonpositive premium; declare it as a subordinator"
                )))
            }
            _ => Some(regime.inverse_exponent(lam)?),
        };
        let claim = model.next_claim(k);
        let below = model.regime(k - 1);
        let lam_below = rates.lambda(k - 1);
        levels.push(LadderLevel {
            nu,
            p0: beta / lam,
            composite: Box::new(move |y, o| {
                let b = claim.lst_series(y, o)?;
                let z = regime_factor(below, k - 1, y, lam_below, o)?;
                Ok(&b * &z)
            }),
        });
    }
    GenericLadderSpec::new(levels)
}

/// `pi_n(alpha, beta) = E_n exp(-alpha Ybar(T_beta))` for a drift-only model.
pub fn pi_drift(model: &ModelSpec, beta: f64, n: usize, alpha: f64) -> Result<f64> {
    pi_generic(&drift_ladder(model, beta, n)?, alpha)
}

pub fn pi_drift_series(
    model: &ModelSpec,
    beta: f64,
    n: usize,
    alpha: f64,
    order: usize,
) -> Result<Series> {
    pi_generic_series(&drift_ladder(model, beta, n)?, alpha, order)
}

/// `pi_n(alpha, beta)` for general spectrally-positive regimes (`beta > 0`).
pub fn pi_levy(model: &ModelSpec, beta: f64, n: usize, alpha: f64) -> Result<f64> {
    Ok(pi_levy_series(model, beta, n, alpha, 0)?.value())
}

pub fn pi_levy_series(
    model: &ModelSpec,
    beta: f64,
    n: usize,
    alpha: f64,
    order: usize,
) -> Result<Series> {
    let spec = levy_ladder(model, beta, n)?;
    let inner = pi_generic_series(&spec, alpha, order)?;
    let lam = KilledRates::new(model, beta)?.lambda(n);
    let outer = regime_factor(model.regime(n), n, alpha, lam, order)?;
    Ok(&outer * &inner)
}

/// Dispatches to the drift recursion for drift-only models and to the
/// general one otherwise.
pub fn pi(model: &ModelSpec, beta: f64, n: usize, alpha: f64) -> Result<f64> {
    Ok(pi_series(model, beta, n, alpha, 0)?.value())
}

pub fn pi_series(model: &ModelSpec, beta: f64, n: usize, alpha: f64, order: usize) -> Result<Series> {
    check_depth(model, n)?;
    if model.check_drift_only(n).is_ok() {
        pi_drift_series(model, beta, n, alpha, order)
    } else {
        pi_levy_series(model, beta, n, alpha, order)
    }
}

/// Laplace transform in `u` of `P_n(Ybar(T_beta) > u)`: `(1 - pi_n(alpha)) / alpha`.
pub fn ruin_transform(model: &ModelSpec, beta: f64, n: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(RuinError::InvalidArgument(format!("alpha = {alpha} must be positive")));
    }
    Ok((1.0 - pi(model, beta, n, alpha)?) / alpha)
}

/// `(1, -E Ybar, E Ybar^2)` at `alpha = 0`.
pub fn pi_jet(model: &ModelSpec, beta: f64, n: usize) -> Result<TransformJet> {
    Ok(TransformJet::from(&pi_series(model, beta, n, 0.0, 2)?))
}
