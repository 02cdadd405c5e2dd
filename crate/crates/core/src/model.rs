//! Model primitives: the pool of major clients, the small-client Lévy
//! regimes, and killing-rate bookkeeping.
//!
//! Exponents follow the convention `phi(a) = log E exp(-a Z(1))`, so a premium
//! inflow at rate `r` appears as `phi(a) = r a`.

use serde::{Deserialize, Serialize};

use crate::claims::ClaimDistribution;
use crate::error::{Result, RuinError};
use crate::phase_type::PhaseType;
use crate::series::{slope_series, Series};

/// Small-client process active while a given number of major clients remain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevyRegime {
    /// `Z(t) = -r t`.
    Drift { r: f64 },
    /// `Z(t) = -r t + sigma W(t)`.
    #[serde(rename = "brownian")]
    BrownianDrift { r: f64, sigma2: f64 },
    /// Brownian drift plus upward compound-Poisson jumps.
    CompoundPoisson {
        r: f64,
        #[serde(default)]
        sigma2: f64,
        jump_rate: f64,
        jump: ClaimDistribution,
    },
    /// Nondecreasing process: upward drift `c >= 0` plus optional upward jumps.
    Subordinator {
        #[serde(default)]
        c: f64,
        #[serde(default)]
        jump_rate: f64,
        #[serde(default)]
        jump: Option<ClaimDistribution>,
    },
}

impl LevyRegime {
    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(RuinError::InvalidModel(format!("{name} must be finite")))
            }
        };
        match self {
            LevyRegime::Drift { r } => finite(*r, "r"),
            LevyRegime::BrownianDrift { r, sigma2 } => {
                finite(*r, "r")?;
                if !(*sigma2 >= 0.0 && sigma2.is_finite()) {
                    return Err(RuinError::InvalidModel("sigma2 must be nonnegative".into()));
                }
                Ok(())
            }
            LevyRegime::CompoundPoisson { r, sigma2, jump_rate, jump } => {
                finite(*r, "r")?;
                if !(*sigma2 >= 0.0 && sigma2.is_finite()) {
                    return Err(RuinError::InvalidModel("sigma2 must be nonnegative".into()));
                }
                if !(*jump_rate >= 0.0 && jump_rate.is_finite()) {
                    return Err(RuinError::InvalidModel("jump_rate must be nonnegative".into()));
                }
                jump.validate()
            }
            LevyRegime::Subordinator { c, jump_rate, jump } => {
                if !(*c >= 0.0 && c.is_finite()) {
                    return Err(RuinError::InvalidModel("subordinator drift c must be nonnegative".into()));
                }
                if !(*jump_rate >= 0.0 && jump_rate.is_finite()) {
                    return Err(RuinError::InvalidModel("jump_rate must be nonnegative".into()));
                }
                if *jump_rate > 0.0 && jump.is_none() {
                    return Err(RuinError::InvalidModel("jump_rate > 0 needs a jump law".into()));
                }
                match jump {
                    Some(j) => j.validate(),
                    None => Ok(()),
                }
            }
        }
    }

    pub fn is_subordinator(&self) -> bool {
        matches!(self, LevyRegime::Subordinator { .. })
    }

    /// Premium rate `r` of a pure drift, if this is one.
    pub fn drift_rate(&self) -> Option<f64> {
        match self {
            LevyRegime::Drift { r } => Some(*r),
            _ => None,
        }
    }

    /// `phi(alpha)`.
    pub fn laplace_exponent(&self, alpha: f64) -> f64 {
        match self {
            LevyRegime::Drift { r } => r * alpha,
            LevyRegime::BrownianDrift { r, sigma2 } => r * alpha + 0.5 * sigma2 * alpha * alpha,
            LevyRegime::CompoundPoisson { r, sigma2, jump_rate, jump } => {
                r * alpha + 0.5 * sigma2 * alpha * alpha - jump_rate * (1.0 - jump.lst(alpha))
            }
            LevyRegime::Subordinator { c, jump_rate, jump } => {
                let jumps = jump.as_ref().map_or(0.0, |j| jump_rate * (1.0 - j.lst(alpha)));
                -c * alpha - jumps
            }
        }
    }

    /// Taylor series of `phi` around `alpha`.
    pub fn exponent_series(&self, alpha: f64, order: usize) -> Result<Series> {
        let quad = |r: f64, sigma2: f64| {
            let mut coef = vec![0.0; order + 1];
            coef[0] = r * alpha + 0.5 * sigma2 * alpha * alpha;
            if order >= 1 {
                coef[1] = r + sigma2 * alpha;
            }
            if order >= 2 {
                coef[2] = 0.5 * sigma2;
            }
            Series::from_coefficients(coef)
        };
        let jumps = |rate: f64, law: &ClaimDistribution| -> Result<Series> {
            Ok(law.lst_series(alpha, order)?.add_constant(-1.0).scale(rate))
        };
        Ok(match self {
            LevyRegime::Drift { r } => quad(*r, 0.0),
            LevyRegime::BrownianDrift { r, sigma2 } => quad(*r, *sigma2),
            LevyRegime::CompoundPoisson { r, sigma2, jump_rate, jump } => {
                &quad(*r, *sigma2) + &jumps(*jump_rate, jump)?
            }
            LevyRegime::Subordinator { c, jump_rate, jump } => {
                let base = quad(-c, 0.0);
                match jump {
                    Some(j) => &base + &jumps(*jump_rate, j)?,
                    None => base,
                }
            }
        })
    }

    /// `phi'(alpha)`.
    pub fn exponent_derivative(&self, alpha: f64) -> Result<f64> {
        Ok(self.exponent_series(alpha, 1)?.coef(1))
    }

    /// Largest root `psi(lam)` of `phi(a) = lam`.
    pub fn inverse_exponent(&self, lam: f64) -> Result<f64> {
        if !(lam > 0.0) {
            return Err(RuinError::InvalidArgument(format!("lam = {lam} must be positive")));
        }
        match self {
            LevyRegime::Subordinator { .. } => Err(RuinError::SubordinatorRegime { state: 0 }),
            LevyRegime::Drift { r } => {
                if *r > 0.0 {
                    Ok(lam / r)
                } else {
                    Err(RuinError::NoRoot { lam })
                }
            }
            LevyRegime::BrownianDrift { r, sigma2 } if *sigma2 > 0.0 => {
                Ok((-r + (r * r + 2.0 * sigma2 * lam).sqrt()) / sigma2)
            }
            LevyRegime::BrownianDrift { r, .. } => LevyRegime::Drift { r: *r }.inverse_exponent(lam),
            LevyRegime::CompoundPoisson { .. } => self.solve_exponent(lam),
        }
    }

    /// Newton iteration from the right of the root: on the convex increasing
    /// branch the iterates decrease monotonically; bisection guards the rest.
    fn solve_exponent(&self, lam: f64) -> Result<f64> {
        let tol = 1e-12 * lam.max(1.0);
        let mut hi = 1.0f64;
        while self.laplace_exponent(hi) <= lam {
            hi *= 2.0;
            if hi > 1e200 {
                return Err(RuinError::NoRoot { lam });
            }
        }
        let mut lo = 0.0f64;
        let mut x = hi;
        for _ in 0..500 {
            let g = self.laplace_exponent(x) - lam;
            if g.abs() <= tol {
                return Ok(x);
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.exponent_derivative(x)?;
            let newton = x - g / d;
            x = if d > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(x);
            }
        }
        Err(RuinError::NoConvergence(format!("right-inverse exponent at {lam}")))
    }

    /// `E exp(-alpha sup_{t <= T} Z(t))` with `T ~ Exp(lam)`, non-subordinators.
    pub fn wiener_hopf_factor(&self, alpha: f64, lam: f64) -> Result<f64> {
        Ok(self.wiener_hopf_series(alpha, lam, 0)?.value())
    }

    /// Taylor series in `alpha` of the Wiener–Hopf factor.
    pub fn wiener_hopf_series(&self, alpha: f64, lam: f64, order: usize) -> Result<Series> {
        match self {
            LevyRegime::Subordinator { .. } => Err(RuinError::SubordinatorRegime { state: 0 }),
            LevyRegime::Drift { r } if *r >= 0.0 => Ok(Series::constant(1.0, order)),
            LevyRegime::Drift { .. } => Err(RuinError::RegimeMismatch(
                "negative premium drift must be declared as a subordinator".into(),
            )),
            LevyRegime::BrownianDrift { r, sigma2 } if *sigma2 > 0.0 => {
                let dual = (r + (r * r + 2.0 * sigma2 * lam).sqrt()) / sigma2;
                // dual / (alpha + dual)
                let d = alpha + dual;
                let mut coef = Vec::with_capacity(order + 1);
                let mut t = dual / d;
                for _ in 0..=order {
                    coef.push(t);
                    t *= -1.0 / d;
                }
                Ok(Series::from_coefficients(coef))
            }
            LevyRegime::BrownianDrift { r, .. } => {
                LevyRegime::Drift { r: *r }.wiener_hopf_series(alpha, lam, order)
            }
            LevyRegime::CompoundPoisson { .. } => {
                let psi = self.inverse_exponent(lam)?;
                // (psi - a) / (lam - phi(a)) = 1 / phi[a, psi]
                let slope = slope_series(|y, k| self.exponent_series(y, k), alpha, psi, order)?;
                let z = slope.recip().scale(lam / psi);
                Ok(if alpha == 0.0 { z.with_value(1.0) } else { z })
            }
        }
    }

    /// `lam / (lam - phi(alpha))` for a subordinator regime.
    pub fn subordinator_max_factor(&self, alpha: f64, lam: f64) -> Result<f64> {
        Ok(self.subordinator_series(alpha, lam, 0)?.value())
    }

    pub fn subordinator_series(&self, alpha: f64, lam: f64, order: usize) -> Result<Series> {
        if !self.is_subordinator() {
            return Err(RuinError::NotSubordinator);
        }
        let phi = self.exponent_series(alpha, order)?;
        Ok((-&phi).add_constant(lam).recip().scale(lam))
    }

    /// Series of the maximum's LST over an `Exp(lam)` interval, choosing the
    /// subordinator form where flagged.
    pub fn max_factor_series(&self, alpha: f64, lam: f64, order: usize) -> Result<Series> {
        if self.is_subordinator() {
            self.subordinator_series(alpha, lam, order)
        } else {
            self.wiener_hopf_series(alpha, lam, order)
        }
    }
}

/// Full set of model primitives.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    lambda_circ: Vec<f64>,
    claims: Vec<ClaimDistribution>,
    regimes: Vec<LevyRegime>,
}

impl ModelSpec {
    /// `lambda_circ[n-1]` is the claim rate with `n` clients remaining,
    /// `claims[i-1]` the law of the i-th arriving claim and `regimes[n]` the
    /// small-client process while `n` clients remain.
    pub fn new(
        lambda_circ: Vec<f64>,
        claims: Vec<ClaimDistribution>,
        regimes: Vec<LevyRegime>,
    ) -> Result<Self> {
        let m = lambda_circ.len();
        if claims.len() != m {
            return Err(RuinError::InvalidModel(format!(
                "expected {m} claim laws, got {}",
                claims.len()
            )));
        }
        if regimes.len() != m + 1 {
            return Err(RuinError::InvalidModel(format!(
                "expected {} regimes, got {}",
                m + 1,
                regimes.len()
            )));
        }
        for (i, l) in lambda_circ.iter().enumerate() {
            if !(*l > 0.0 && l.is_finite()) {
                return Err(RuinError::InvalidModel(format!(
                    "lambda_circ[{i}] = {l} must be positive"
                )));
            }
        }
        for c in &claims {
            c.validate()?;
        }
        for r in &regimes {
            r.validate()?;
        }
        Ok(ModelSpec {
            lambda_circ,
            claims,
            regimes,
        })
    }

    /// Drift-only model with i.i.d. claims.
    pub fn drift(lambda_circ: Vec<f64>, claim: ClaimDistribution, rates: Vec<f64>) -> Result<Self> {
        let m = lambda_circ.len();
        ModelSpec::new(
            lambda_circ,
            vec![claim; m],
            rates.into_iter().map(|r| LevyRegime::Drift { r }).collect(),
        )
    }

    pub fn m(&self) -> usize {
        self.lambda_circ.len()
    }

    pub fn lambda_circ(&self) -> &[f64] {
        &self.lambda_circ
    }

    pub fn claims(&self) -> &[ClaimDistribution] {
        &self.claims
    }

    pub fn regimes(&self) -> &[LevyRegime] {
        &self.regimes
    }

    /// Claim rate while `n >= 1` clients remain.
    pub fn rate(&self, n: usize) -> f64 {
        self.lambda_circ[n - 1]
    }

    /// Law of the claim that arrives next while `n >= 1` clients remain
    /// (the `(m - n + 1)`-th arrival).
    pub fn next_claim(&self, n: usize) -> &ClaimDistribution {
        &self.claims[self.m() - n]
    }

    pub fn regime(&self, n: usize) -> &LevyRegime {
        &self.regimes[n]
    }

    /// Premium rate of regime `n`; panics unless it is a pure drift.
    pub fn drift_rate(&self, n: usize) -> f64 {
        self.regimes[n]
            .drift_rate()
            .expect("drift_rate called on a non-drift regime")
    }

    /// Every regime with clients left is a positive drift and the final one a
    /// nonnegative drift (so the maximum after the last claim is zero).
    pub fn is_drift_only(&self) -> bool {
        self.check_drift_only(self.m()).is_ok()
    }

    pub(crate) fn check_drift_only(&self, n: usize) -> Result<()> {
        match self.regimes[0] {
            LevyRegime::Drift { r } if r >= 0.0 => {}
            _ => {
                return Err(RuinError::RegimeMismatch(
                    "regime 0 must be a nonnegative drift".into(),
                ))
            }
        }
        for k in 1..=n {
            match self.regimes[k] {
                LevyRegime::Drift { r } if r > 0.0 => {}
                _ => {
                    return Err(RuinError::RegimeMismatch(format!(
                        "regime {k} is not a positive drift"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn has_identical_claims(&self) -> bool {
        self.claims.windows(2).all(|w| w[0] == w[1])
    }

    pub fn identical_claim(&self) -> Result<&ClaimDistribution> {
        if !self.has_identical_claims() {
            return Err(RuinError::NonIdenticalClaims);
        }
        self.claims
            .first()
            .ok_or_else(|| RuinError::InvalidModel("model has no claims".into()))
    }

    pub fn identical_phase_type_claim(&self) -> Result<PhaseType> {
        self.identical_claim()?.as_phase_type().ok_or_else(|| {
            RuinError::InvalidModel("claim law has no phase-type representation".into())
        })
    }

    /// Copy of the model with every client claim law replaced.
    pub fn with_claims(&self, claim: ClaimDistribution) -> Result<Self> {
        ModelSpec::new(
            self.lambda_circ.clone(),
            vec![claim; self.m()],
            self.regimes.clone(),
        )
    }
}

/// Killed claim rates `lambda_n = lambda_circ_n + beta`, with `lambda_0 = beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct KilledRates {
    beta: f64,
    lambda: Vec<f64>,
}

impl KilledRates {
    /// `beta = 0` (infinite horizon) is accepted only for drift-only models.
    pub fn new(model: &ModelSpec, beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(RuinError::InvalidArgument(format!(
                "killing rate {beta} must be nonnegative and finite"
            )));
        }
        if beta == 0.0 && !model.is_drift_only() {
            return Err(RuinError::KillingRequired);
        }
        Ok(Self::unchecked(model, beta))
    }

    pub(crate) fn unchecked(model: &ModelSpec, beta: f64) -> Self {
        let mut lambda = Vec::with_capacity(model.m() + 1);
        lambda.push(beta);
        lambda.extend(model.lambda_circ.iter().map(|l| l + beta));
        KilledRates { beta, lambda }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `lambda_n`, with `lambda_0 = beta`.
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }
}
