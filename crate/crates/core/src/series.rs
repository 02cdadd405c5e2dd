//! Truncated Taylor series in one variable.
//!
//! A [`Series`] stores normalized coefficients `c[i] = f^(i)(x0) / i!` of a
//! function around some expansion point `x0`. The ladder and overshoot
//! recursions are evaluated entirely in this arithmetic so that derivatives
//! (for moments) and removable singularities (coincident rates) are handled
//! by the same code path.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};

/// Relative distance below which two evaluation points are treated as
/// coincident and divided differences are taken from a Taylor expansion.
/// Above it the direct quotient loses at most ~3 digits per difference order.
pub const COINCIDENCE_TOL: f64 = 1e-3;

/// Extra Taylor terms carried when expanding around a nearby point, so that
/// re-centering by up to `COINCIDENCE_TOL` relative keeps full precision.
pub const EXTRA_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    coef: Vec<f64>,
}

impl Series {
    /// Series of the given order (`order + 1` coefficients) from raw coefficients.
    pub fn from_coefficients(coef: Vec<f64>) -> Self {
        assert!(!coef.is_empty(), "a series needs at least one coefficient");
        Series { coef }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut coef = vec![0.0; order + 1];
        coef[0] = value;
        Series { coef }
    }

    /// The identity function `x -> x` expanded around `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut coef = vec![0.0; order + 1];
        coef[0] = x0;
        if order >= 1 {
            coef[1] = 1.0;
        }
        Series { coef }
    }

    pub fn order(&self) -> usize {
        self.coef.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    pub fn coef(&self, i: usize) -> f64 {
        self.coef.get(i).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// i-th derivative at the expansion point.
    pub fn derivative(&self, i: usize) -> f64 {
        let mut fact = 1.0;
        for k in 2..=i {
            fact *= k as f64;
        }
        self.coef(i) * fact
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.coef.truncate(order + 1);
        self
    }

    pub fn scale(&self, s: f64) -> Self {
        Series {
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    /// Same series with the constant term replaced.
    pub fn with_value(mut self, v: f64) -> Self {
        self.coef[0] = v;
        self
    }

    pub fn add_constant(&self, v: f64) -> Self {
        let mut out = self.clone();
        out.coef[0] += v;
        out
    }

    /// Multiplicative inverse; the value must be nonzero.
    pub fn recip(&self) -> Self {
        Series::constant(1.0, self.order()).div(self)
    }

    pub fn div(&self, rhs: &Series) -> Self {
        let n = self.order().min(rhs.order());
        let d0 = rhs.coef[0];
        let mut q = vec![0.0; n + 1];
        for k in 0..=n {
            let mut acc = self.coef[k];
            for j in 1..=k {
                acc -= rhs.coef[j] * q[k - j];
            }
            q[k] = acc / d0;
        }
        Series { coef: q }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Series::constant(1.0, self.order());
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// `exp(f)` via the recurrence `g' = f' g`.
    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut g = vec![0.0; n + 1];
        g[0] = self.coef[0].exp();
        for k in 1..=n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coef[j] * g[k - j];
            }
            g[k] = acc / k as f64;
        }
        Series { coef: g }
    }

    /// Re-expand around `x0 + h`. The highest coefficients are approximate
    /// (truncation error of order `h^(order+1)`), which is harmless for the
    /// tiny shifts used in the coincident-point branches.
    pub fn shift(&self, h: f64) -> Self {
        if h == 0.0 {
            return self.clone();
        }
        let n = self.order();
        let mut out = vec![0.0; n + 1];
        for (j, slot) in out.iter_mut().enumerate() {
            // sum_{i >= j} c_i binom(i, j) h^(i-j)
            let mut acc = 0.0;
            let mut binom = 1.0;
            let mut hp = 1.0;
            for i in j..=n {
                if i > j {
                    binom = binom * i as f64 / (i - j) as f64;
                    hp *= h;
                }
                acc += self.coef[i] * binom * hp;
            }
            *slot = acc;
        }
        Series { coef: out }
    }

    /// Drop the constant term and lower the order by one: the series of
    /// `(f(x0 + h) - f(x0)) / h`.
    pub fn difference_quotient(&self) -> Self {
        if self.order() == 0 {
            return Series::constant(0.0, 0);
        }
        Series {
            coef: self.coef[1..].to_vec(),
        }
    }

    /// Series in `h` of `(f(x0 + h) - f_c) / (x0 + h - c)` where `f_c = f(c)`
    /// and `c` is well separated from `x0`.
    pub fn divided_difference_at(&self, x0: f64, c: f64, f_c: f64) -> Self {
        let num = self.add_constant(-f_c);
        let mut den = Series::variable(x0, self.order());
        den.coef[0] -= c;
        num.div(&den)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        let n = self.order().min(rhs.order());
        Series {
            coef: (0..=n).map(|i| self.coef[i] + rhs.coef[i]).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        let n = self.order().min(rhs.order());
        Series {
            coef: (0..=n).map(|i| self.coef[i] - rhs.coef[i]).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.order().min(rhs.order());
        let mut out = vec![0.0; n + 1];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..=k {
                acc += self.coef[j] * rhs.coef[k - j];
            }
            *slot = acc;
        }
        Series { coef: out }
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

/// Value of a transform together with its first two derivatives in the
/// transform argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformJet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl TransformJet {
    pub fn new(v: f64, d1: f64, d2: f64) -> Self {
        TransformJet { v, d1, d2 }
    }
}

impl From<&Series> for TransformJet {
    fn from(s: &Series) -> Self {
        TransformJet {
            v: s.value(),
            d1: s.derivative(1),
            d2: s.derivative(2),
        }
    }
}

/// True when `a` and `b` should be treated as the same evaluation point.
pub fn coincident(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Series in `h` of the divided difference `(F(x + h) - F(c)) / (x + h - c)`,
/// where `at(y, k)` returns the order-`k` Taylor series of `F` at `y`.
/// Near-coincident `x` and `c` are handled through the expansion at `c`.
pub fn slope_series<F>(mut at: F, x: f64, c: f64, order: usize) -> Result<Series>
where
    F: FnMut(f64, usize) -> Result<Series>,
{
    if coincident(x, c, COINCIDENCE_TOL) {
        match at(c, order + 1 + EXTRA_ORDER) {
            Ok(s) => {
                return Ok(s.difference_quotient().shift(x - c).truncate(order));
            }
            // Expansion point on a branch point (heavy-tailed law at 0):
            // fall back to the direct quotient when the points differ.
            Err(RuinError::MomentUndefined { .. }) if x != c => {}
            Err(e) => return Err(e),
        }
    }
    let fx = at(x, order)?;
    let fc = at(c, 0)?.value();
    Ok(fx.divided_difference_at(x, c, fc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exp_series(x0: f64, order: usize) -> Series {
        // e^{-x}
        let mut c = Vec::new();
        let mut f = 1.0;
        for i in 0..=order {
            if i > 0 {
                f *= i as f64;
            }
            c.push((-x0).exp() * (-1f64).powi(i as i32) / f);
        }
        Series::from_coefficients(c)
    }

    #[test]
    fn product_and_quotient_roundtrip() {
        let a = exp_series(0.3, 5);
        let b = Series::from_coefficients(vec![2.0, 0.5, -0.25, 0.1, 0.0, 0.3]);
        let q = (&a * &b).div(&b);
        for i in 0..=5 {
            assert_relative_eq!(q.coef(i), a.coef(i), max_relative = 1e-13);
        }
    }

    #[test]
    fn shift_matches_direct_expansion() {
        let a = exp_series(1.0, 8);
        let b = a.shift(1e-3);
        let direct = exp_series(1.0 + 1e-3, 8);
        for i in 0..4 {
            assert_relative_eq!(b.coef(i), direct.coef(i), max_relative = 1e-12);
        }
    }

    #[test]
    fn exp_of_linear() {
        let x = Series::variable(0.5, 4).scale(-2.0);
        let e = x.exp();
        assert_relative_eq!(e.value(), (-1.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(e.derivative(1), -2.0 * (-1.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(e.derivative(4), 16.0 * (-1.0f64).exp(), max_relative = 1e-13);
    }

    #[test]
    fn divided_difference_of_smooth_function() {
        let f = exp_series(1.0, 3);
        let c = 2.0;
        let dd = f.divided_difference_at(1.0, c, (-c).exp());
        let expected = ((-1.0f64).exp() - (-2.0f64).exp()) / (1.0 - 2.0);
        assert_relative_eq!(dd.value(), expected, max_relative = 1e-14);
    }
}
