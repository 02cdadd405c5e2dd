//! Claim-size distributions.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Result, RuinError};
use crate::phase_type::PhaseType;
use crate::quad;
use crate::series::{Series, TransformJet};

/// Law of a single major-client claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClaimDistribution {
    #[serde(rename = "exp")]
    Exponential { mu: f64 },
    #[serde(rename = "erlang")]
    Erlang { k: u32, mu: f64 },
    #[serde(rename = "ph")]
    PhaseType(PhaseType),
    /// Pareto type II: `P(B > u) = (C / (C + u))^eps`.
    #[serde(rename = "lomax")]
    Lomax { c: f64, eps: f64 },
    #[serde(rename = "point")]
    PointMass { b: f64 },
}

/// Regular-variation data of a heavy-tailed claim law: the LST satisfies
/// `B(a) = sum_{i <= n_delta} (-a)^i b_i / i! + theta a^delta L(1/a) + o(...)`
/// with `L` taken to be constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RVMeta {
    pub delta: f64,
    pub theta: f64,
    pub n_delta: u32,
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl ClaimDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(RuinError::InvalidModel(msg.to_string()));
        match self {
            ClaimDistribution::Exponential { mu } if !(*mu > 0.0 && mu.is_finite()) => {
                bad("exponential rate mu must be positive")
            }
            ClaimDistribution::Erlang { k, mu } if *k == 0 || !(*mu > 0.0 && mu.is_finite()) => {
                bad("erlang needs k >= 1 and mu > 0")
            }
            ClaimDistribution::Lomax { c, eps }
                if !(*c > 0.0 && c.is_finite() && *eps > 0.0 && eps.is_finite()) =>
            {
                bad("lomax needs c > 0 and eps > 0")
            }
            ClaimDistribution::PointMass { b } if !(*b >= 0.0 && b.is_finite()) => {
                bad("point mass location b must be nonnegative")
            }
            _ => Ok(()),
        }
    }

    /// `E exp(-alpha B)`.
    pub fn lst(&self, alpha: f64) -> f64 {
        if alpha == 0.0 {
            return 1.0;
        }
        match self {
            ClaimDistribution::Exponential { mu } => mu / (mu + alpha),
            ClaimDistribution::Erlang { k, mu } => (mu / (mu + alpha)).powi(*k as i32),
            ClaimDistribution::PhaseType(ph) => ph.lst(alpha).expect("valid phase-type law"),
            ClaimDistribution::PointMass { b } => (-alpha * b).exp(),
            ClaimDistribution::Lomax { .. } => self.lomax_series(alpha, 0).value(),
        }
    }

    /// Taylor coefficients of the LST around `alpha`.
    pub fn lst_series(&self, alpha: f64, order: usize) -> Result<Series> {
        let series = match self {
            ClaimDistribution::Exponential { mu } => exp_series(*mu, alpha, order),
            ClaimDistribution::Erlang { k, mu } => exp_series(*mu, alpha, order).powi(*k),
            ClaimDistribution::PhaseType(ph) => {
                let s = ph.lst_series(alpha, order)?;
                if alpha == 0.0 {
                    s.with_value(1.0)
                } else {
                    s
                }
            }
            ClaimDistribution::PointMass { b } => {
                let base = (-alpha * b).exp();
                let mut coef = Vec::with_capacity(order + 1);
                let mut term = base;
                for j in 0..=order {
                    coef.push(term);
                    term *= -b / (j + 1) as f64;
                }
                Series::from_coefficients(coef)
            }
            ClaimDistribution::Lomax { c, eps } => {
                if alpha > 0.0 {
                    self.lomax_series(alpha, order)
                } else {
                    let mut coef = Vec::with_capacity(order + 1);
                    for j in 0..=order {
                        if j as f64 >= *eps {
                            return Err(RuinError::MomentUndefined { order: j, alpha });
                        }
                        let m = lomax_moment(*c, *eps, j as u32);
                        coef.push(if j % 2 == 0 { m } else { -m } / factorial(j));
                    }
                    Series::from_coefficients(coef)
                }
            }
        };
        Ok(series)
    }

    /// Value and first two derivatives of the LST.
    pub fn lst_jet(&self, alpha: f64) -> Result<TransformJet> {
        Ok(TransformJet::from(&self.lst_series(alpha, 2)?))
    }

    fn lomax_series(&self, alpha: f64, order: usize) -> Series {
        let ClaimDistribution::Lomax { c, eps } = *self else {
            unreachable!("lomax_series on a non-lomax law")
        };
        // Substitute v = F(u) so the integrand is bounded on [0, 1].
        let inv = 1.0 / eps;
        let (vals, _) = quad::integrate(
            |v, out| {
                let u = c * ((1.0 - v).powf(-inv) - 1.0);
                let mut w = (-alpha * u).exp();
                for (j, slot) in out.iter_mut().enumerate() {
                    *slot = w;
                    w *= -u / (j + 1) as f64;
                }
            },
            0.0,
            1.0,
            order + 1,
            1e-15,
            1e-13,
            20_000,
        );
        Series::from_coefficients(vals)
    }

    /// Survival function `P(B > u)`.
    pub fn tail(&self, u: f64) -> f64 {
        if u < 0.0 {
            return 1.0;
        }
        match self {
            ClaimDistribution::Exponential { mu } => (-mu * u).exp(),
            ClaimDistribution::Erlang { k, mu } => {
                let x = mu * u;
                let mut term = 1.0;
                let mut sum = 1.0;
                for j in 1..*k {
                    term *= x / j as f64;
                    sum += term;
                }
                (-x).exp() * sum
            }
            ClaimDistribution::PhaseType(ph) => ph.tail(u),
            ClaimDistribution::Lomax { c, eps } => (c / (c + u)).powf(*eps),
            ClaimDistribution::PointMass { b } => {
                if u < *b {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Raw moment `E B^k`, or `None` when it is infinite.
    pub fn moment(&self, k: u32) -> Option<f64> {
        match self {
            ClaimDistribution::Exponential { mu } => Some(factorial(k as usize) / mu.powi(k as i32)),
            ClaimDistribution::Erlang { k: shape, mu } => {
                let rising: f64 = (0..k).map(|i| (*shape + i) as f64).product();
                Some(rising / mu.powi(k as i32))
            }
            ClaimDistribution::PhaseType(ph) => ph.moment(k).ok(),
            ClaimDistribution::PointMass { b } => Some(b.powi(k as i32)),
            ClaimDistribution::Lomax { c, eps } => {
                if (k as f64) < *eps {
                    Some(lomax_moment(*c, *eps, k))
                } else {
                    None
                }
            }
        }
    }

    pub fn mean(&self) -> Option<f64> {
        self.moment(1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ClaimDistribution::Exponential { mu } => Exp::new(*mu).expect("validated rate").sample(rng),
            ClaimDistribution::Erlang { k, mu } => {
                let e = Exp::new(*mu).expect("validated rate");
                (0..*k).map(|_| e.sample(rng)).sum()
            }
            ClaimDistribution::PhaseType(ph) => sample_phase_type(ph, rng),
            ClaimDistribution::Lomax { c, eps } => {
                let v: f64 = rng.random();
                c * ((1.0 - v).powf(-1.0 / eps) - 1.0)
            }
            ClaimDistribution::PointMass { b } => *b,
        }
    }

    /// Phase-type representation, when the law has one.
    pub fn as_phase_type(&self) -> Option<PhaseType> {
        match self {
            ClaimDistribution::Exponential { mu } => PhaseType::exponential(*mu).ok(),
            ClaimDistribution::Erlang { k, mu } => PhaseType::erlang(*k as usize, *mu).ok(),
            ClaimDistribution::PhaseType(ph) => Some(ph.clone()),
            ClaimDistribution::PointMass { b } if *b == 0.0 => Some(PhaseType::zero()),
            _ => None,
        }
    }

    /// Size of the Jordan block of the dominant eigenvalue of the standard
    /// phase-type representation, for the closed-form kinds.
    pub fn dominant_multiplicity(&self) -> Option<usize> {
        match self {
            ClaimDistribution::Exponential { .. } => Some(1),
            ClaimDistribution::Erlang { k, .. } => Some(*k as usize),
            _ => None,
        }
    }

    /// Regular-variation metadata; only Lomax laws with a non-integer index qualify.
    pub fn rv_meta(&self) -> Result<RVMeta> {
        match self {
            ClaimDistribution::Lomax { c, eps } => {
                if eps.fract() == 0.0 {
                    return Err(RuinError::InvalidArgument(
                        "integer tail index is not supported".into(),
                    ));
                }
                let n_delta = eps.floor() as u32;
                let sign = if n_delta % 2 == 0 { 1.0 } else { -1.0 };
                Ok(RVMeta {
                    delta: *eps,
                    theta: gamma(1.0 - eps) * sign * c.powf(*eps),
                    n_delta,
                })
            }
            _ => Err(RuinError::InvalidArgument(
                "claim law is not regularly varying".into(),
            )),
        }
    }
}

fn exp_series(mu: f64, alpha: f64, order: usize) -> Series {
    let d = mu + alpha;
    let mut coef = Vec::with_capacity(order + 1);
    let mut term = mu / d;
    for _ in 0..=order {
        coef.push(term);
        term *= -1.0 / d;
    }
    Series::from_coefficients(coef)
}

/// `E U^k = C^k k! / prod_{j=1}^k (eps - j)` for `k < eps`.
fn lomax_moment(c: f64, eps: f64, k: u32) -> f64 {
    let mut m = 1.0;
    for j in 1..=k {
        m *= c * j as f64 / (eps - j as f64);
    }
    m
}

fn sample_phase_type<R: Rng + ?Sized>(ph: &PhaseType, rng: &mut R) -> f64 {
    let d = ph.dim();
    let pick = |rng: &mut R, weights: &mut dyn Iterator<Item = f64>| -> Option<usize> {
        let mut v: f64 = rng.random();
        for (i, w) in weights.enumerate() {
            if v < w {
                return Some(i);
            }
            v -= w;
        }
        None
    };
    let Some(mut state) = pick(rng, &mut ph.delta().iter().copied()) else {
        return 0.0;
    };
    let s = ph.generator();
    let mut t = 0.0;
    loop {
        let rate = -s[(state, state)];
        t += Exp::new(rate).expect("negative diagonal").sample(rng);
        let mut probs = (0..d).map(|j| if j == state { 0.0 } else { s[(state, j)] / rate });
        match pick(rng, &mut probs) {
            Some(next) => state = next,
            None => return t,
        }
    }
}
