//! Phase-type distributions: transforms, convolution, the running-maximum
//! representation for drift-only models with i.i.d. phase-type claims, and
//! the Erlang-like tail asymptotics that follow from it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};
use crate::model::{KilledRates, LevyRegime, ModelSpec};
use crate::series::Series;

/// Dimensions above which the matrix exponential switches from Padé to
/// uniformization.
const PADE_MAX_DIM: usize = 200;

/// Absorption time of a finite Markov chain, allowing an atom at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhaseTypeRepr", into = "PhaseTypeRepr")]
pub struct PhaseType {
    delta: DVector<f64>,
    delta_abs: f64,
    generator: DMatrix<f64>,
    exit: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
struct PhaseTypeRepr {
    delta: Vec<f64>,
    #[serde(default)]
    delta_abs: Option<f64>,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
}

impl TryFrom<PhaseTypeRepr> for PhaseType {
    type Error = RuinError;
    fn try_from(r: PhaseTypeRepr) -> Result<Self> {
        let d = r.delta.len();
        if r.s.len() != d || r.s.iter().any(|row| row.len() != d) {
            return Err(RuinError::InvalidModel(format!(
                "S must be {d}x{d} to match delta"
            )));
        }
        let mass: f64 = r.delta.iter().sum();
        let delta_abs = r.delta_abs.unwrap_or((1.0 - mass).max(0.0));
        let gen = DMatrix::from_fn(d, d, |i, j| r.s[i][j]);
        PhaseType::new(r.delta, delta_abs, gen)
    }
}

impl From<PhaseType> for PhaseTypeRepr {
    fn from(p: PhaseType) -> Self {
        let d = p.dim();
        PhaseTypeRepr {
            delta: p.delta.iter().copied().collect(),
            delta_abs: Some(p.delta_abs),
            s: (0..d)
                .map(|i| (0..d).map(|j| p.generator[(i, j)]).collect())
                .collect(),
        }
    }
}

impl PhaseType {
    /// Validates the initial vector and the sub-generator.
    pub fn new(delta: Vec<f64>, delta_abs: f64, generator: DMatrix<f64>) -> Result<Self> {
        let d = delta.len();
        if generator.nrows() != d || generator.ncols() != d {
            return Err(RuinError::InvalidModel("generator dimension mismatch".into()));
        }
        if delta.iter().any(|&x| !(x >= 0.0)) || !(0.0..=1.0).contains(&delta_abs) {
            return Err(RuinError::InvalidModel(
                "initial distribution must be nonnegative".into(),
            ));
        }
        let total = delta.iter().sum::<f64>() + delta_abs;
        if (total - 1.0).abs() > 1e-12 {
            return Err(RuinError::InvalidModel(format!(
                "initial distribution sums to {total}, expected 1"
            )));
        }
        for i in 0..d {
            if !(generator[(i, i)] < 0.0) {
                return Err(RuinError::InvalidModel(format!(
                    "S[{i}][{i}] must be negative"
                )));
            }
            let mut row = 0.0;
            for j in 0..d {
                let v = generator[(i, j)];
                if i != j && v < 0.0 {
                    return Err(RuinError::InvalidModel(format!(
                        "S[{i}][{j}] must be nonnegative"
                    )));
                }
                row += v;
            }
            if row > 1e-12 * generator[(i, i)].abs() {
                return Err(RuinError::InvalidModel(format!("row {i} of S sums above zero")));
            }
        }
        let exit = -(&generator * DVector::from_element(d, 1.0));
        let exit = exit.map(|x| if x < 0.0 && x > -1e-12 { 0.0 } else { x });
        let ph = PhaseType {
            delta: DVector::from_vec(delta),
            delta_abs,
            generator,
            exit,
        };
        if d > 0 && ph.generator.clone().lu().solve(&ph.exit).is_none() {
            return Err(RuinError::InvalidModel("S is singular".into()));
        }
        Ok(ph)
    }

    /// Exponential(mu) as a one-phase distribution.
    pub fn exponential(mu: f64) -> Result<Self> {
        PhaseType::new(vec![1.0], 0.0, DMatrix::from_element(1, 1, -mu))
    }

    /// Erlang(k, mu) as a chain of k phases.
    pub fn erlang(k: usize, mu: f64) -> Result<Self> {
        let mut s = DMatrix::zeros(k, k);
        for i in 0..k {
            s[(i, i)] = -mu;
            if i + 1 < k {
                s[(i, i + 1)] = mu;
            }
        }
        let mut delta = vec![0.0; k];
        if k > 0 {
            delta[0] = 1.0;
        }
        PhaseType::new(delta, if k == 0 { 1.0 } else { 0.0 }, s)
    }

    /// Point mass at zero (dimension 0).
    pub fn zero() -> Self {
        PhaseType {
            delta: DVector::zeros(0),
            delta_abs: 1.0,
            generator: DMatrix::zeros(0, 0),
            exit: DVector::zeros(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    pub fn delta_abs(&self) -> f64 {
        self.delta_abs
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn exit(&self) -> &DVector<f64> {
        &self.exit
    }

    fn shifted_solve(&self, alpha: f64, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.dim();
        let a = DMatrix::from_diagonal_element(d, d, alpha) - &self.generator;
        a.lu().solve(rhs).ok_or(RuinError::SingularSystem)
    }

    /// `delta_abs + delta^T (alpha I - S)^{-1} s`.
    pub fn lst(&self, alpha: f64) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(self.delta_abs);
        }
        let x = self.shifted_solve(alpha, &self.exit)?;
        Ok(self.delta_abs + self.delta.dot(&x))
    }

    /// Taylor coefficients of the LST at `alpha`:
    /// `c_i = (-1)^i delta^T (alpha I - S)^{-(i+1)} s` (plus the atom at i = 0).
    pub fn lst_series(&self, alpha: f64, order: usize) -> Result<Series> {
        let mut coef = vec![0.0; order + 1];
        coef[0] = self.delta_abs;
        if self.dim() > 0 {
            let d = self.dim();
            let lu = (DMatrix::from_diagonal_element(d, d, alpha) - &self.generator).lu();
            let mut v = self.exit.clone();
            let mut sign = 1.0;
            for c in coef.iter_mut() {
                v = lu.solve(&v).ok_or(RuinError::SingularSystem)?;
                *c += sign * self.delta.dot(&v);
                sign = -sign;
            }
        }
        Ok(Series::from_coefficients(coef))
    }

    /// Raw moment `E U^k = k! delta^T (-S)^{-k} 1`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(if k == 0 { 1.0 } else { 0.0 });
        }
        let d = self.dim();
        let lu = (-&self.generator).lu();
        let mut v = DVector::from_element(d, 1.0);
        let mut fact = 1.0;
        for i in 1..=k {
            v = lu.solve(&v).ok_or(RuinError::SingularSystem)?;
            fact *= i as f64;
        }
        if k == 0 {
            return Ok(1.0);
        }
        Ok(fact * self.delta.dot(&v))
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// `exp(S u)` applied from the left to `delta`, optionally with the
    /// generator shifted by `shift * I` (used to factor out a known decay).
    fn delta_times_exp(&self, u: f64, shift: f64) -> DVector<f64> {
        let d = self.dim();
        if d <= PADE_MAX_DIM {
            let m = (&self.generator + DMatrix::from_diagonal_element(d, d, shift)) * u;
            let e = m.exp();
            e.transpose() * &self.delta
        } else {
            uniformized_row(&self.delta, &self.generator, shift, u)
        }
    }

    /// Survival function `delta^T exp(S u) 1` for `u >= 0`.
    pub fn tail(&self, u: f64) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        if u <= 0.0 {
            return self.delta.sum();
        }
        self.delta_times_exp(u, 0.0).sum().clamp(0.0, 1.0)
    }

    /// Density `delta^T exp(S u) s` of the absolutely continuous part.
    pub fn density(&self, u: f64) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.delta_times_exp(u.max(0.0), 0.0).dot(&self.exit).max(0.0)
    }

    /// `e^{shift u} * tail(u)`, computed without underflow.
    pub fn scaled_tail(&self, u: f64, shift: f64) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.delta_times_exp(u, shift).sum()
    }

    /// Eigenvalues of the sub-generator.
    pub fn eigenvalues(&self) -> Vec<nalgebra::Complex<f64>> {
        if self.dim() == 0 {
            return Vec::new();
        }
        self.generator.clone().complex_eigenvalues().iter().copied().collect()
    }
}

/// Row vector times `exp((S + shift I) u)` by uniformization, splitting long
/// horizons so the Poisson weights never underflow.
fn uniformized_row(row: &DVector<f64>, s: &DMatrix<f64>, shift: f64, u: f64) -> DVector<f64> {
    let d = s.nrows();
    let q = (0..d).map(|i| -s[(i, i)]).fold(0.0f64, f64::max).max(1e-300);
    let p = DMatrix::identity(d, d) + s / q;
    let pt = p.transpose();
    let chunks = ((q * u) / 200.0).ceil().max(1.0) as usize;
    let h = u / chunks as f64;
    let qh = q * h;
    let mut v = row.clone();
    for _ in 0..chunks {
        let mut term = v.clone();
        let mut w = (-qh).exp();
        let mut acc = &term * w;
        let mut cum = w;
        let mut k = 0usize;
        while 1.0 - cum > 1e-16 && k < 100_000 {
            k += 1;
            term = &pt * term;
            w *= qh / k as f64;
            cum += w;
            acc += &term * w;
        }
        v = acc * (shift * h).exp();
    }
    v
}

/// Sum of two independent phase-type variables.
pub fn ph_convolve(u: &PhaseType, v: &PhaseType) -> PhaseType {
    let (du, dv) = (u.dim(), v.dim());
    let d = du + dv;
    let mut delta = DVector::zeros(d);
    delta.rows_mut(0, du).copy_from(&u.delta);
    delta.rows_mut(du, dv).copy_from(&(&v.delta * u.delta_abs));
    let mut s = DMatrix::zeros(d, d);
    s.view_mut((0, 0), (du, du)).copy_from(&u.generator);
    s.view_mut((0, du), (du, dv)).copy_from(&(&u.exit * v.delta.transpose()));
    s.view_mut((du, du), (dv, dv)).copy_from(&v.generator);
    let mut exit = DVector::zeros(d);
    exit.rows_mut(0, du).copy_from(&(&u.exit * v.delta_abs));
    exit.rows_mut(du, dv).copy_from(&v.exit);
    PhaseType {
        delta,
        delta_abs: u.delta_abs * v.delta_abs,
        generator: s,
        exit,
    }
}

fn check_drift_model(model: &ModelSpec, n: usize) -> Result<()> {
    if n > model.m() {
        return Err(RuinError::InvalidArgument(format!(
            "n = {n} exceeds m = {}",
            model.m()
        )));
    }
    for k in 1..=n {
        match model.regime(k) {
            LevyRegime::Drift { r } if *r > 0.0 => {}
            _ => {
                return Err(RuinError::RegimeMismatch(format!(
                    "regime {k} is not a positive drift"
                )))
            }
        }
    }
    Ok(())
}

/// Exact phase-type law of the running maximum over `[0, T_beta]` started
/// with `n` clients remaining, for drift-only models with i.i.d. phase-type
/// claims. Dimension is `n * d`.
pub fn running_max_ph(model: &ModelSpec, beta: f64, n: usize) -> Result<PhaseType> {
    check_drift_model(model, n)?;
    if !(beta > 0.0) {
        return Err(RuinError::KillingRequired);
    }
    let claim = model.identical_phase_type_claim()?;
    let rates = KilledRates::new(model, beta)?;
    let d = claim.dim();

    let mut current = PhaseType::zero();
    for k in 1..=n {
        let lam = rates.lambda(k);
        let lam_circ = model.rate(k);
        let r = model.drift_rate(k);
        let nu = lam / r;
        // Law of (claim + running max from k-1): initial vector delta'_k and S_k.
        let sum = ph_convolve(&current, &claim);
        let dim = k * d;
        let a = DMatrix::from_diagonal_element(dim, dim, nu) - &sum.generator;
        let x = a
            .transpose()
            .lu()
            .solve(&sum.delta)
            .ok_or(RuinError::SingularSystem)?;
        let delta = x * (lam_circ / lam * nu);
        let delta_abs = 1.0 - delta.sum();
        current = PhaseType {
            delta,
            delta_abs,
            generator: sum.generator,
            exit: sum.exit,
        };
    }
    Ok(current)
}

/// Leading-order tail behaviour `tail(u) ~ coeff * exp(-mu u) u^(mult-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTail {
    pub mu: f64,
    pub mult: usize,
    pub coeff: f64,
    /// Smallest sampled level beyond which every sampled ratio stayed within 1%.
    pub stable_from: f64,
}

impl SpectralTail {
    /// `coeff * exp(-mu u) u^(mult-1)`.
    pub fn approx(&self, u: f64) -> f64 {
        self.coeff * (-self.mu * u).exp() * u.powi(self.mult as i32 - 1)
    }

    /// `tail(u) / approx(u)`, evaluated in scaled form.
    pub fn ratio(&self, ph: &PhaseType, u: f64) -> f64 {
        ph.scaled_tail(u, self.mu) / (self.coeff * u.powi(self.mult as i32 - 1))
    }
}

fn scaled_ratio(ph: &PhaseType, mu: f64, mult: usize, u: f64) -> f64 {
    ph.scaled_tail(u, mu) / u.powi(mult as i32 - 1)
}

/// Extract the dominant decay rate, multiplicity `blocks * d1` and limit
/// constant of a running-maximum phase-type law built from `blocks` copies
/// of a claim block whose dominant eigenvalue has multiplicity `d1`.
pub fn spectral_tail(ph: &PhaseType, blocks: usize, d1: usize) -> Result<SpectralTail> {
    if blocks == 0 || ph.dim() == 0 || ph.dim() % blocks != 0 {
        return Err(RuinError::InvalidArgument(
            "phase-type dimension is not a multiple of the block count".into(),
        ));
    }
    let d = ph.dim() / blocks;
    let block = ph.generator.view((0, 0), (d, d)).into_owned();
    let eig = block.complex_eigenvalues();
    let lead = eig
        .iter()
        .copied()
        .max_by(|a, b| a.re.total_cmp(&b.re))
        .ok_or_else(|| RuinError::NoConvergence("empty spectrum".into()))?;
    if lead.im.abs() > 1e-8 * lead.re.abs().max(1.0) {
        return Err(RuinError::NoConvergence(
            "dominant eigenvalue is complex".into(),
        ));
    }
    let mu = -lead.re;
    let mult = blocks * d1;

    // R(u) = c + a/u + b/u^2 + ...; doubling grid with two Richardson passes.
    let mut u = (2.0 * mult as f64 / mu).max(1.0);
    let mut grid = Vec::new();
    let mut raw = Vec::new();
    let mut estimates: Vec<f64> = Vec::new();
    let mut coeff = None;
    for _ in 0..40 {
        grid.push(u);
        raw.push(scaled_ratio(ph, mu, mult, u));
        let k = raw.len();
        if k >= 3 {
            let r1a = 2.0 * raw[k - 2] - raw[k - 3];
            let r1b = 2.0 * raw[k - 1] - raw[k - 2];
            let est = (4.0 * r1b - r1a) / 3.0;
            if let Some(prev) = estimates.last() {
                if est.is_finite() && ((est - prev) / est).abs() < 5e-3 {
                    estimates.push(est);
                    coeff = Some(est);
                    break;
                }
            }
            estimates.push(est);
        }
        u *= 2.0;
    }
    let coeff = coeff.ok_or_else(|| {
        RuinError::NoConvergence("tail ratio did not stabilize within the level budget".into())
    })?;
    let scale = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(coeff > 1e-10 * scale) {
        return Err(RuinError::NoConvergence(
            "limit constant vanishes: dominant multiplicity mismatch".into(),
        ));
    }
    // First grid level after which all sampled ratios stay within 1%.
    let mut stable_from = f64::INFINITY;
    for i in (0..grid.len()).rev() {
        if ((raw[i] / coeff) - 1.0).abs() <= 0.01 {
            stable_from = grid[i];
        } else {
            break;
        }
    }
    if !stable_from.is_finite() {
        // Extend the grid until the raw ratio settles within 1%.
        let mut u = *grid.last().unwrap();
        for _ in 0..30 {
            u *= 2.0;
            if ((scaled_ratio(ph, mu, mult, u) / coeff) - 1.0).abs() <= 0.01 {
                stable_from = u;
                break;
            }
        }
    }
    if !stable_from.is_finite() {
        return Err(RuinError::NoConvergence(
            "ratio did not settle within 1% of the extrapolated limit".into(),
        ));
    }
    Ok(SpectralTail {
        mu,
        mult,
        coeff,
        stable_from,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_lst_and_tail() {
        let e = PhaseType::exponential(2.0).unwrap();
        assert_relative_eq!(e.lst(1.0).unwrap(), 2.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(e.lst(0.0).unwrap(), 1.0, max_relative = 1e-15);
        let e1 = PhaseType::exponential(1.0).unwrap();
        assert_relative_eq!(e1.tail(2.0), (-2.0f64).exp(), max_relative = 1e-13);
        assert_eq!(e1.tail(0.0), 1.0);
    }

    #[test]
    fn erlang_lst() {
        let e = PhaseType::erlang(2, 1.0).unwrap();
        assert_relative_eq!(e.lst(1.0).unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(e.mean().unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(e.moment(2).unwrap(), 6.0, max_relative = 1e-14);
    }

    #[test]
    fn convolution_of_exponentials() {
        let w = ph_convolve(
            &PhaseType::exponential(1.0).unwrap(),
            &PhaseType::exponential(2.0).unwrap(),
        );
        assert_eq!(w.generator()[(0, 0)], -1.0);
        assert_eq!(w.generator()[(0, 1)], 1.0);
        assert_eq!(w.generator()[(1, 0)], 0.0);
        assert_eq!(w.generator()[(1, 1)], -2.0);
        assert_eq!(w.delta().as_slice(), &[1.0, 0.0]);
        for a in [0.0, 0.3, 1.0, 4.0] {
            let expected = 1.0 / ((1.0 + a) * (1.0 + a / 2.0));
            assert_relative_eq!(w.lst(a).unwrap(), expected, max_relative = 1e-14);
        }
        assert_relative_eq!(w.mean().unwrap(), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn convolution_with_zero_is_identity() {
        let e = PhaseType::erlang(3, 2.0).unwrap();
        let w = ph_convolve(&PhaseType::zero(), &e);
        assert_eq!(w, e);
        let w2 = ph_convolve(&e, &PhaseType::zero());
        assert_eq!(w2.generator(), e.generator());
        assert_eq!(w2.delta_abs(), 0.0);
    }

    #[test]
    fn rejects_bad_generator() {
        let s = DMatrix::from_row_slice(2, 2, &[-1.0, -0.5, 0.0, -1.0]);
        assert!(PhaseType::new(vec![1.0, 0.0], 0.0, s).is_err());
        let s = DMatrix::from_row_slice(1, 1, &[-1.0]);
        assert!(PhaseType::new(vec![0.5], 0.0, s).is_err());
    }

    #[test]
    fn series_matches_finite_differences() {
        let s = DMatrix::from_row_slice(2, 2, &[-3.0, 1.0, 0.5, -2.0]);
        let ph = PhaseType::new(vec![0.6, 0.3], 0.1, s).unwrap();
        let a = 0.7;
        let h = 1e-5;
        let ser = ph.lst_series(a, 2).unwrap();
        let fd1 = (ph.lst(a + h).unwrap() - ph.lst(a - h).unwrap()) / (2.0 * h);
        let fd2 = (ph.lst(a + h).unwrap() - 2.0 * ph.lst(a).unwrap() + ph.lst(a - h).unwrap())
            / (h * h);
        assert_relative_eq!(ser.derivative(1), fd1, max_relative = 1e-8);
        assert_relative_eq!(ser.derivative(2), fd2, max_relative = 1e-4);
    }

    #[test]
    fn uniformization_agrees_with_pade() {
        let ph = PhaseType::erlang(3, 1.5).unwrap();
        for u in [0.5, 3.0, 20.0] {
            let pade = ph.delta_times_exp(u, 0.0).sum();
            let unif = uniformized_row(ph.delta(), ph.generator(), 0.0, u).sum();
            assert_relative_eq!(pade, unif, max_relative = 1e-10);
        }
    }
}
