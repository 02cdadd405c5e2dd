//! Monte Carlo path engine for the net cumulative claim process `Y`.
//!
//! Every path owns a ChaCha8 stream keyed by `(seed, path index)`, and
//! aggregates are pairwise sums over fixed chunks reduced in index order, so
//! results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Result, RuinError};
use crate::heavy_tail::m_distribution;
use crate::model::{LevyRegime, ModelSpec};

const CHUNK: usize = 4096;

/// Time horizon over which the running maximum is taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Independent exponential killing time with rate `beta > 0`.
    Killed { beta: f64 },
    /// Deterministic times; the maximum is recorded at each of them.
    Fixed { times: Vec<f64> },
    /// Up to the last claim, plus the supremum of regime 0 afterwards.
    UntilLastClaim,
}

impl Horizon {
    /// `Killed` for `beta > 0`, `UntilLastClaim` for `beta = 0`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta.is_finite() {
            Ok(Horizon::Killed { beta })
        } else if beta == 0.0 {
            Ok(Horizon::UntilLastClaim)
        } else {
            Err(RuinError::InvalidArgument(format!("beta = {beta} must be nonnegative")))
        }
    }
}

/// First passage above one queried level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub time: f64,
    pub overshoot: f64,
    /// Major clients remaining right after the passage.
    pub n_at_ruin: usize,
    /// Passage caused by a major claim.
    pub at_claim: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathResult {
    /// Running maximum at each checkpoint (a single entry unless the horizon
    /// is `Fixed`).
    pub max: Vec<f64>,
    pub hits: Vec<Option<Hit>>,
    pub claims_count: usize,
}

struct PathState<'a> {
    y: f64,
    max: f64,
    t: f64,
    levels: &'a [f64],
    hits: Vec<Option<Hit>>,
}

impl<'a> PathState<'a> {
    fn new(levels: &'a [f64]) -> Self {
        PathState { y: 0.0, max: 0.0, t: 0.0, levels, hits: vec![None; levels.len()] }
    }

    /// Continuous passage: anything crossed is crossed with zero overshoot.
    fn raise_continuous(&mut self, peak: f64, n: usize) {
        if peak <= self.max {
            return;
        }
        for (u, hit) in self.levels.iter().zip(self.hits.iter_mut()) {
            if hit.is_none() && peak > *u {
                *hit = Some(Hit { time: self.t, overshoot: 0.0, n_at_ruin: n, at_claim: false });
            }
        }
        self.max = peak;
    }

    fn jump(&mut self, size: f64, n_after: usize, at_claim: bool) {
        self.y += size;
        if self.y <= self.max {
            return;
        }
        for (u, hit) in self.levels.iter().zip(self.hits.iter_mut()) {
            if hit.is_none() && self.y > *u {
                *hit = Some(Hit { time: self.t, overshoot: self.y - u, n_at_ruin: n_after, at_claim });
            }
        }
        self.max = self.y;
    }

    /// `Z(t) = -r t + sigma W(t)` over `dt`; the segment maximum is drawn from
    /// its law given the endpoint.
    fn continuous<R: Rng>(&mut self, r: f64, sigma2: f64, dt: f64, n: usize, rng: &mut R) {
        if dt <= 0.0 {
            return;
        }
        let (x, seg_max) = if sigma2 > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            let x = -r * dt + (sigma2 * dt).sqrt() * z;
            let v: f64 = 1.0 - rng.random::<f64>();
            (x, 0.5 * (x + (x * x - 2.0 * sigma2 * dt * v.ln()).sqrt()))
        } else {
            let x = -r * dt;
            (x, x.max(0.0))
        };
        self.t += dt;
        self.raise_continuous(self.y + seg_max, n);
        self.y += x;
    }

    fn segment<R: Rng>(&mut self, regime: &LevyRegime, dt: f64, n: usize, rng: &mut R) -> Result<()> {
        match regime {
            LevyRegime::Drift { r } => self.continuous(*r, 0.0, dt, n, rng),
            LevyRegime::BrownianDrift { r, sigma2 } => self.continuous(*r, *sigma2, dt, n, rng),
            LevyRegime::CompoundPoisson { r, sigma2, jump_rate, jump } => {
                self.jumps(*r, *sigma2, *jump_rate, dt, n, rng, |rng| jump.sample(rng))?
            }
            LevyRegime::Subordinator { c, jump_rate, jump } => match jump {
                Some(j) => self.jumps(-c, 0.0, *jump_rate, dt, n, rng, |rng| j.sample(rng))?,
                None if *jump_rate == 0.0 => self.continuous(-c, 0.0, dt, n, rng),
                None => {
                    return Err(RuinError::UnsupportedRegime(
                        "subordinator with jumps but no jump law".into(),
                    ))
                }
            },
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn jumps<R: Rng, F: Fn(&mut R) -> f64>(
        &mut self,
        r: f64,
        sigma2: f64,
        jump_rate: f64,
        dt: f64,
        n: usize,
        rng: &mut R,
        draw: F,
    ) -> Result<()> {
        if jump_rate <= 0.0 {
            self.continuous(r, sigma2, dt, n, rng);
            return Ok(());
        }
        let gap = Exp::new(jump_rate).map_err(|e| RuinError::InvalidModel(e.to_string()))?;
        let mut left = dt;
        loop {
            let next: f64 = gap.sample(rng);
            if next >= left {
                self.continuous(r, sigma2, left, n, rng);
                return Ok(());
            }
            self.continuous(r, sigma2, next, n, rng);
            left -= next;
            let size = draw(rng);
            self.jump(size, n, false);
        }
    }
}

/// Supremum of regime 0 over an infinite horizon.
fn drain_out<R: Rng>(regime: &LevyRegime, rng: &mut R) -> Result<f64> {
    match regime {
        LevyRegime::Drift { r } if *r >= 0.0 => Ok(0.0),
        LevyRegime::BrownianDrift { r, sigma2 } if *r > 0.0 => {
            if *sigma2 == 0.0 {
                return Ok(0.0);
            }
            let e = Exp::new(2.0 * r / sigma2).map_err(|e| RuinError::InvalidModel(e.to_string()))?;
            Ok(e.sample(rng))
        }
        other => Err(RuinError::UnsupportedRegime(format!(
            "no closed-form supremum after the last claim for {other:?}"
        ))),
    }
}

fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Simulates one path.
pub fn simulate_path(
    model: &ModelSpec,
    horizon: &Horizon,
    levels: &[f64],
    seed: u64,
    index: u64,
) -> Result<PathResult> {
    let mut rng = path_rng(seed, index);
    let m = model.m();

    // sorted checkpoints with their original positions
    let mut checkpoints: Vec<(f64, usize)> = match horizon {
        Horizon::Killed { beta } => {
            let e = Exp::new(*beta).map_err(|e| RuinError::InvalidArgument(e.to_string()))?;
            vec![(e.sample(&mut rng), 0)]
        }
        Horizon::Fixed { times } => times.iter().copied().zip(0..).collect(),
        Horizon::UntilLastClaim => Vec::new(),
    };
    checkpoints.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut maxima = vec![0.0; checkpoints.len().max(1)];

    let mut state = PathState::new(levels);
    let mut n = m;
    let mut claims = 0;
    let mut next_cp = 0;
    loop {
        let t_claim = if n > 0 {
            state.t + Exp::new(model.rate(n)).expect("positive rate").sample(&mut rng)
        } else {
            f64::INFINITY
        };
        while next_cp < checkpoints.len() && checkpoints[next_cp].0 <= t_claim {
            let (tc, pos) = checkpoints[next_cp];
            state.segment(model.regime(n), tc - state.t, n, &mut rng)?;
            maxima[pos] = state.max;
            next_cp += 1;
        }
        if !checkpoints.is_empty() && next_cp == checkpoints.len() {
            break;
        }
        if n == 0 {
            let extra = drain_out(model.regime(0), &mut rng)?;
            state.raise_continuous(state.y + extra, 0);
            maxima[0] = state.max;
            break;
        }
        state.segment(model.regime(n), t_claim - state.t, n, &mut rng)?;
        state.t = t_claim;
        let b = model.next_claim(n).sample(&mut rng);
        state.jump(b, n - 1, true);
        n -= 1;
        claims += 1;
    }

    if model.is_drift_only() {
        debug_assert!(
            state.hits.iter().flatten().all(|h| h.at_claim),
            "drift-only path exceeded a level between claims"
        );
    }
    Ok(PathResult { max: maxima, hits: state.hits, claims_count: claims })
}

/// Estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_sums(s1: f64, s2: f64, n: f64) -> Self {
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0);
        Estimate { value: mean, stderr: (var / n).sqrt() }
    }

    /// Whether `x` lies within `k` standard errors.
    pub fn covers(&self, x: f64, k: f64) -> bool {
        (self.value - x).abs() <= k * self.stderr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxMoments {
    pub time: Option<f64>,
    pub mean: Estimate,
    pub second: Estimate,
    pub var: Estimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub n_paths: usize,
    pub seed: u64,
    /// Levels `u` for ruin frequencies and overshoot laws.
    pub levels: Vec<f64>,
    /// Arguments of the empirical LSTs.
    pub alphas: Vec<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub n_paths: usize,
    pub seed: u64,
    pub max_moments: Vec<MaxMoments>,
    /// `E exp(-alpha Ybar)` at the final checkpoint, one per alpha.
    pub lst: Vec<Estimate>,
    /// `P(Ybar > u)`, one per level.
    pub ruin: Vec<Estimate>,
    /// `E overshoot; hit`, one per level.
    pub overshoot_mean: Vec<Estimate>,
    /// `E exp(-alpha overshoot); hit`, indexed `[level][alpha]`.
    pub overshoot_lst: Vec<Vec<Estimate>>,
    /// `P(hit, N = k)`, indexed `[level][k]`.
    pub ruin_by_remaining: Vec<Vec<Estimate>>,
    /// Counts of the number of claims before the horizon.
    pub claims_histogram: Vec<u64>,
    /// Goodness of fit of the claim counts (killed horizon only).
    pub claims_chi_square: Option<ChiSquareTest>,
}

struct Layout {
    k: usize,
    a: usize,
    l: usize,
    m1: usize,
}

impl Layout {
    fn width(&self) -> usize {
        4 * self.k + 2 * self.a + self.l * (4 + 2 * self.a + self.m1) + self.m1
    }

    fn fill(&self, p: &PathResult, alphas: &[f64], row: &mut [f64]) {
        let mut i = 0;
        for &x in &p.max {
            let x2 = x * x;
            row[i..i + 4].copy_from_slice(&[x, x2, x2 * x, x2 * x2]);
            i += 4;
        }
        let last = *p.max.last().expect("at least one checkpoint");
        for a in alphas {
            let e = (-a * last).exp();
            row[i] = e;
            row[i + 1] = e * e;
            i += 2;
        }
        for h in &p.hits {
            if let Some(h) = h {
                row[i] = 1.0;
                row[i + 1] = 1.0;
                row[i + 2] = h.overshoot;
                row[i + 3] = h.overshoot * h.overshoot;
            }
            i += 4;
            for a in alphas {
                if let Some(h) = h {
                    let e = (-a * h.overshoot).exp();
                    row[i] = e;
                    row[i + 1] = e * e;
                }
                i += 2;
            }
            if let Some(h) = h {
                row[i + h.n_at_ruin] = 1.0;
            }
            i += self.m1;
        }
        row[i + p.claims_count] = 1.0;
    }
}

fn pairwise_sum(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.len() <= 8 {
        let mut acc = vec![0.0; rows.first().map_or(0, Vec::len)];
        for r in rows {
            for (a, x) in acc.iter_mut().zip(r) {
                *a += x;
            }
        }
        return acc;
    }
    let (lo, hi) = rows.split_at(rows.len() / 2);
    let mut a = pairwise_sum(lo);
    for (x, y) in a.iter_mut().zip(pairwise_sum(hi)) {
        *x += y;
    }
    a
}

fn chi_square(counts: &[u64], probs: &[f64]) -> Option<ChiSquareTest> {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    // merge adjacent cells until each expects at least 5
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(probs) {
        o += *c as f64;
        e += p * n;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    if cells.len() < 2 {
        return None;
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).ok()?;
    Some(ChiSquareTest { statistic, dof, p_value: 1.0 - dist.cdf(statistic) })
}

/// Simulates `n_paths` paths and aggregates them.
pub fn simulate_paths(model: &ModelSpec, horizon: &Horizon, opts: &SimOptions) -> Result<SimSummary> {
    if opts.n_paths == 0 {
        return Err(RuinError::InvalidArgument("n_paths must be at least 1".into()));
    }
    if let Some(u) = opts.levels.iter().find(|u| !(**u >= 0.0 && u.is_finite())) {
        return Err(RuinError::InvalidArgument(format!("level {u} must be nonnegative")));
    }
    match horizon {
        Horizon::Killed { beta } if !(*beta > 0.0 && beta.is_finite()) => {
            return Err(RuinError::InvalidArgument(format!("killing rate {beta} must be positive")));
        }
        Horizon::Fixed { times } if times.is_empty() || times.iter().any(|t| !(*t >= 0.0)) => {
            return Err(RuinError::InvalidArgument("fixed horizon needs nonnegative times".into()));
        }
        _ => {}
    }
    let m = model.m();
    let times: Vec<Option<f64>> = match horizon {
        Horizon::Fixed { times } => times.iter().map(|t| Some(*t)).collect(),
        _ => vec![None],
    };
    let layout = Layout { k: times.len(), a: opts.alphas.len(), l: opts.levels.len(), m1: m + 1 };
    let width = layout.width();
    let n_chunks = opts.n_paths.div_ceil(CHUNK);

    let run_chunk = |c: usize| -> Result<Vec<f64>> {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(opts.n_paths);
        let mut rows = Vec::with_capacity(end - start);
        for i in start..end {
            let p = simulate_path(model, horizon, &opts.levels, opts.seed, i as u64)?;
            let mut row = vec![0.0; width];
            layout.fill(&p, &opts.alphas, &mut row);
            rows.push(row);
        }
        Ok(pairwise_sum(&rows))
    };
    let partials: Result<Vec<Vec<f64>>> = match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| RuinError::InvalidArgument(e.to_string()))?;
            pool.install(|| (0..n_chunks).into_par_iter().map(run_chunk).collect())
        }
        None => (0..n_chunks).into_par_iter().map(run_chunk).collect(),
    };
    let sums = pairwise_sum(&partials?);

    let n = opts.n_paths as f64;
    let mut i = 0;
    let mut max_moments = Vec::with_capacity(layout.k);
    for t in &times {
        let s = &sums[i..i + 4];
        let (m1, m2, m3, m4) = (s[0] / n, s[1] / n, s[2] / n, s[3] / n);
        let var = (m2 - m1 * m1).max(0.0);
        let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
        max_moments.push(MaxMoments {
            time: *t,
            mean: Estimate::from_sums(s[0], s[1], n),
            second: Estimate::from_sums(s[1], s[3], n),
            var: Estimate { value: var, stderr: ((mu4 - var * var).max(0.0) / n).sqrt() },
        });
        i += 4;
    }
    let mut lst = Vec::with_capacity(layout.a);
    for _ in &opts.alphas {
        lst.push(Estimate::from_sums(sums[i], sums[i + 1], n));
        i += 2;
    }
    let mut ruin = Vec::new();
    let mut overshoot_mean = Vec::new();
    let mut overshoot_lst = Vec::new();
    let mut ruin_by_remaining = Vec::new();
    for _ in &opts.levels {
        ruin.push(Estimate::from_sums(sums[i], sums[i + 1], n));
        overshoot_mean.push(Estimate::from_sums(sums[i + 2], sums[i + 3], n));
        i += 4;
        let mut row = Vec::with_capacity(layout.a);
        for _ in &opts.alphas {
            row.push(Estimate::from_sums(sums[i], sums[i + 1], n));
            i += 2;
        }
        overshoot_lst.push(row);
        // indicators: the sum of squares equals the sum
        ruin_by_remaining.push((0..=m).map(|k| Estimate::from_sums(sums[i + k], sums[i + k], n)).collect());
        i += layout.m1;
    }
    let claims_histogram: Vec<u64> = sums[i..i + layout.m1].iter().map(|c| c.round() as u64).collect();
    let claims_chi_square = match horizon {
        Horizon::Killed { beta } if m > 0 => chi_square(&claims_histogram, &m_distribution(model, *beta)?),
        _ => None,
    };

    Ok(SimSummary {
        n_paths: opts.n_paths,
        seed: opts.seed,
        max_moments,
        lst,
        ruin,
        overshoot_mean,
        overshoot_lst,
        ruin_by_remaining,
        claims_histogram,
        claims_chi_square,
    })
}

/// Empirical `E exp(-alpha sup_{s <= T} Z(s))` for a single regime killed at
/// rate `lam`, one estimate per alpha.
pub fn killed_regime_max_lst(
    regime: &LevyRegime,
    lam: f64,
    alphas: &[f64],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if !(lam > 0.0 && lam.is_finite()) || n_paths == 0 {
        return Err(RuinError::InvalidArgument("need lam > 0 and n_paths >= 1".into()));
    }
    regime.validate()?;
    let clock = Exp::new(lam).map_err(|e| RuinError::InvalidArgument(e.to_string()))?;
    let n_chunks = n_paths.div_ceil(CHUNK);
    let partials: Result<Vec<Vec<f64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n_paths);
            let mut rows = Vec::with_capacity(end - start);
            for i in start..end {
                let mut rng = path_rng(seed, i as u64);
                let t = clock.sample(&mut rng);
                let mut state = PathState::new(&[]);
                state.segment(regime, t, 0, &mut rng)?;
                let mut row = Vec::with_capacity(2 * alphas.len());
                for a in alphas {
                    let e = (-a * state.max).exp();
                    row.extend([e, e * e]);
                }
                rows.push(row);
            }
            Ok(pairwise_sum(&rows))
        })
        .collect();
    let sums = pairwise_sum(&partials?);
    let n = n_paths as f64;
    Ok((0..alphas.len()).map(|j| Estimate::from_sums(sums[2 * j], sums[2 * j + 1], n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::ClaimDistribution;

    fn hand_model() -> ModelSpec {
        ModelSpec::drift(vec![1.0], ClaimDistribution::Exponential { mu: 1.0 }, vec![0.0, 1.0]).unwrap()
    }

    fn opts(n_paths: usize, seed: u64) -> SimOptions {
        SimOptions { n_paths, seed, levels: vec![0.0, 1.0], alphas: vec![1.0], threads: None }
    }

    #[test]
    fn empty_pool_never_ruins() {
        let m = ModelSpec::drift(vec![], ClaimDistribution::Exponential { mu: 1.0 }, vec![1.0]).unwrap();
        let s = simulate_paths(&m, &Horizon::Killed { beta: 1.0 }, &opts(1000, 3)).unwrap();
        assert_eq!(s.max_moments[0].mean.value, 0.0);
        assert!(s.ruin.iter().all(|e| e.value == 0.0));
        assert_eq!(s.claims_histogram, vec![1000]);
    }

    #[test]
    fn hand_model_lst_and_ruin() {
        let s = simulate_paths(&hand_model(), &Horizon::Killed { beta: 1.0 }, &opts(200_000, 11)).unwrap();
        assert!(s.lst[0].covers(5.0 / 6.0, 4.0), "{:?}", s.lst[0]);
        // P(Ybar > 0) = 1 - 2/3 and the overshoot is Exp(1)
        assert!(s.ruin[0].covers(1.0 / 3.0, 4.0));
        assert!(s.overshoot_lst[0][0].covers(1.0 / 6.0, 4.0));
        assert!(s.ruin_by_remaining[0][0].covers(1.0 / 3.0, 4.0));
        assert!(s.overshoot_mean[0].covers(1.0 / 3.0, 4.0));
        // P(Ybar > 1) = (1/3) e^{-1}
        assert!(s.ruin[1].covers((-1.0f64).exp() / 3.0, 4.0));
        assert!(s.max_moments[0].mean.covers(1.0 / 3.0, 4.0));
        let chi = s.claims_chi_square.unwrap();
        assert!(chi.p_value > 1e-3);
    }

    #[test]
    fn paths_are_reproducible_and_thread_independent() {
        let m = hand_model();
        let mut o = opts(10_000, 5);
        o.threads = Some(1);
        let a = simulate_paths(&m, &Horizon::Killed { beta: 1.0 }, &o).unwrap();
        o.threads = Some(4);
        let b = simulate_paths(&m, &Horizon::Killed { beta: 1.0 }, &o).unwrap();
        assert_eq!(a, b);
        let p = simulate_path(&m, &Horizon::UntilLastClaim, &[0.0], 9, 17).unwrap();
        assert_eq!(p, simulate_path(&m, &Horizon::UntilLastClaim, &[0.0], 9, 17).unwrap());
        assert_eq!(p.claims_count, 1);
    }

    #[test]
    fn fixed_horizon_maxima_are_monotone() {
        let m = ModelSpec::drift(vec![0.25, 0.5], ClaimDistribution::Exponential { mu: 0.25 }, vec![0.0, 1.0, 2.0])
            .unwrap();
        let h = Horizon::Fixed { times: vec![5.0, 1.0, 10.0] };
        for i in 0..200 {
            let p = simulate_path(&m, &h, &[], 1, i).unwrap();
            assert!(p.max[1] <= p.max[0] && p.max[0] <= p.max[2]);
        }
    }

    #[test]
    fn brownian_segment_max_matches_wiener_hopf() {
        let regime = LevyRegime::BrownianDrift { r: 1.0, sigma2: 1.0 };
        let lam = 1.5;
        let alphas = [0.5, 2.0];
        let est = killed_regime_max_lst(&regime, lam, &alphas, 100_000, 2).unwrap();
        for (a, e) in alphas.iter().zip(&est) {
            let z = regime.wiener_hopf_factor(*a, lam).unwrap();
            assert!(e.covers(z, 4.0), "{a}: {e:?} vs {z}");
        }
    }

    #[test]
    fn compound_poisson_segment_max_matches_wiener_hopf() {
        let regime = LevyRegime::CompoundPoisson {
            r: 2.0,
            sigma2: 0.5,
            jump_rate: 1.0,
            jump: ClaimDistribution::Exponential { mu: 2.0 },
        };
        let est = killed_regime_max_lst(&regime, 1.0, &[1.0], 100_000, 4).unwrap();
        let z = regime.wiener_hopf_factor(1.0, 1.0).unwrap();
        assert!(est[0].covers(z, 4.0), "{:?} vs {z}", est[0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = hand_model();
        assert!(simulate_paths(&m, &Horizon::Killed { beta: 0.0 }, &opts(10, 1)).is_err());
        assert!(simulate_paths(&m, &Horizon::Killed { beta: 1.0 }, &opts(0, 1)).is_err());
        let sub = ModelSpec::new(
            vec![1.0],
            vec![ClaimDistribution::Exponential { mu: 1.0 }],
            vec![LevyRegime::Subordinator { c: 1.0, jump_rate: 0.0, jump: None }, LevyRegime::Drift { r: 1.0 }],
        )
        .unwrap();
        let err = simulate_paths(&sub, &Horizon::UntilLastClaim, &opts(10, 1)).unwrap_err();
        assert!(matches!(err, RuinError::UnsupportedRegime(_)));
    }
}
