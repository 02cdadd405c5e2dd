//! Command-line front end: transform tables, inverted curves and Monte Carlo
//! summaries for a model config.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ruinpool::config::ModelConfig;
use ruinpool::heavy_tail::rv_tail_approx;
use ruinpool::inversion::{moment_curves, ruin_curve, StehfestPlan};
use ruinpool::ladder::pi;
use ruinpool::overshoot::pi_via_ladders;
use ruinpool::phase_type::{running_max_ph, spectral_tail};
use ruinpool::simulate::{simulate_paths, Estimate, Horizon, SimOptions, SimSummary};
use ruinpool::{ModelSpec, RuinError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(RuinError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<RuinError> for CliError {
    fn from(e: RuinError) -> Self {
        match e {
            RuinError::Config(_)
            | RuinError::InvalidModel(_)
            | RuinError::InvalidArgument(_)
            | RuinError::KillingRequired => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ruinpool", version, about = "Ruin probabilities for an insurance pool with few major clients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Moments,
    Ruin,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of the running-maximum LST over an alpha grid.
    Transform {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,5")]
        alpha_grid: Vec<f64>,
        /// Killing rate; overrides the config value.
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
    },
    /// Inverted curves: moments in t or ruin probabilities in u.
    Curves {
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        u_grid: Option<Vec<f64>>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Number of Stehfest terms.
        #[arg(long, default_value_t = ruinpool::inversion::DEFAULT_TERMS)]
        stehfest_n: usize,
        /// Monte Carlo paths for the ruin columns (0 leaves them empty).
        #[arg(long, default_value_t = 0)]
        mc_paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Monte Carlo summary as JSON.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Reserve levels for ruin frequencies.
        #[arg(long, value_delimiter = ',')]
        u: Vec<f64>,
        /// Arguments of the empirical LSTs.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        alpha: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        /// Fixed time horizons instead of an exponential one.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn load(path: &PathBuf) -> Result<(ModelConfig, ModelSpec), CliError> {
    let cfg = ModelConfig::load(path)?;
    let model = cfg.build()?;
    Ok((cfg, model))
}

fn resolve_beta(cfg: &ModelConfig, flag: Option<f64>) -> Result<f64, CliError> {
    let beta = flag
        .or(cfg.beta)
        .ok_or_else(|| CliError::Config("beta: required in the config or via --beta".into()))?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(CliError::Config(format!("beta: {beta} must be nonnegative")));
    }
    Ok(beta)
}

pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Transform { config, alpha_grid, beta } => {
            let (cfg, model) = load(&config)?;
            transform(&model, resolve_beta(&cfg, beta)?, &alpha_grid)
        }
        Command::Curves { config, mode, t_grid, u_grid, beta, stehfest_n, mc_paths, seed } => {
            let (cfg, model) = load(&config)?;
            let plan = StehfestPlan::new(stehfest_n)?;
            match mode {
                Mode::Moments => {
                    let t = t_grid.ok_or_else(|| CliError::Config("--t-grid is required".into()))?;
                    moments(&model, &t, &plan)
                }
                Mode::Ruin => {
                    let u = u_grid.ok_or_else(|| CliError::Config("--u-grid is required".into()))?;
                    ruin(&model, resolve_beta(&cfg, beta)?, &u, &plan, mc_paths, seed)
                }
            }
        }
        Command::Simulate { config, paths, seed, u, alpha, beta, times, threads } => {
            let (cfg, model) = load(&config)?;
            let horizon = match times {
                Some(times) => Horizon::Fixed { times },
                None => Horizon::from_beta(resolve_beta(&cfg, beta)?)?,
            };
            let opts = SimOptions { n_paths: paths, seed, levels: u, alphas: alpha, threads };
            let summary = simulate_paths(&model, &horizon, &opts)?;
            Ok(simulate_json(&horizon, &opts, &summary))
        }
    }
}

pub fn transform(model: &ModelSpec, beta: f64, alphas: &[f64]) -> Result<String, CliError> {
    let mut out = String::from("alpha,pi_ladder,pi_overshoot,abs_diff\n");
    let m = model.m();
    for &a in alphas {
        let ladder = pi(model, beta, m, a)?;
        if model.is_drift_only() {
            let over = pi_via_ladders(model, beta, a)?;
            writeln!(out, "{},{},{},{}", num(a), num(ladder), num(over), num((ladder - over).abs())).unwrap();
        } else {
            writeln!(out, "{},{},,", num(a), num(ladder)).unwrap();
        }
    }
    Ok(out)
}

pub fn moments(model: &ModelSpec, t_grid: &[f64], plan: &StehfestPlan) -> Result<String, CliError> {
    let curves = moment_curves(model, t_grid, plan)?;
    let mut out = String::from("t,mean,var\n");
    for i in 0..t_grid.len() {
        writeln!(out, "{},{},{}", num(curves.t[i]), num(curves.mean[i]), num(curves.var[i])).unwrap();
    }
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Exact and asymptotic columns, where the model admits them.
fn reference_columns(model: &ModelSpec, beta: f64, u_grid: &[f64]) -> Result<(Vec<Option<f64>>, Vec<Option<f64>>), CliError> {
    let none = vec![None; u_grid.len()];
    let m = model.m();
    if m == 0 {
        return Ok((vec![Some(0.0); u_grid.len()], none));
    }
    let Ok(claim) = model.identical_claim() else {
        return Ok((none.clone(), none));
    };
    if claim.rv_meta().is_ok() {
        let asym = u_grid.iter().map(|u| rv_tail_approx(model, beta, *u).map(Some)).collect::<Result<_, _>>()?;
        return Ok((none, asym));
    }
    if !(beta > 0.0) || !model.is_drift_only() || claim.as_phase_type().is_none() {
        return Ok((none.clone(), none));
    }
    let ph = running_max_ph(model, beta, m)?;
    let exact = u_grid.iter().map(|u| Some(ph.tail(*u))).collect();
    let asym = match claim.dominant_multiplicity().map(|d1| spectral_tail(&ph, m, d1)) {
        Some(Ok(st)) => u_grid.iter().map(|u| Some(st.approx(*u))).collect(),
        Some(Err(e)) => {
            log::warn!("no spectral asymptote: {e}");
            none
        }
        None => none,
    };
    Ok((exact, asym))
}

pub fn ruin(
    model: &ModelSpec,
    beta: f64,
    u_grid: &[f64],
    plan: &StehfestPlan,
    mc_paths: usize,
    seed: u64,
) -> Result<String, CliError> {
    let inverted = ruin_curve(model, beta, u_grid, plan)?;
    let (exact, asym) = reference_columns(model, beta, u_grid)?;
    let mc: Vec<Option<Estimate>> = if mc_paths > 0 {
        let opts = SimOptions { n_paths: mc_paths, seed, levels: u_grid.to_vec(), alphas: vec![], threads: None };
        simulate_paths(model, &Horizon::from_beta(beta)?, &opts)?.ruin.into_iter().map(Some).collect()
    } else {
        vec![None; u_grid.len()]
    };
    let mut out = String::from("u,p_inverted,p_exact_ph,p_asymptote,p_montecarlo,mc_stderr\n");
    for i in 0..u_grid.len() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(u_grid[i]),
            num(inverted[i]),
            opt(exact[i]),
            opt(asym[i]),
            opt(mc[i].map(|e| e.value)),
            opt(mc[i].map(|e| e.stderr)),
        )
        .unwrap();
    }
    Ok(out)
}

fn split(v: &[Estimate]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|e| e.value).collect(), v.iter().map(|e| e.stderr).collect())
}

pub fn simulate_json(horizon: &Horizon, opts: &SimOptions, s: &SimSummary) -> String {
    let pick = |f: fn(&ruinpool::simulate::MaxMoments) -> Estimate| -> Vec<Estimate> {
        s.max_moments.iter().map(f).collect()
    };
    let (mean, mean_se) = split(&pick(|m| m.mean));
    let (second, second_se) = split(&pick(|m| m.second));
    let (var, var_se) = split(&pick(|m| m.var));
    let (ruin, ruin_se) = split(&s.ruin);
    let (lst, lst_se) = split(&s.lst);
    let (over, over_se) = split(&s.overshoot_mean);
    let (by_n, by_n_se): (Vec<_>, Vec<_>) = s.ruin_by_remaining.iter().map(|row| split(row)).unzip();
    let value = json!({
        "seed": s.seed,
        "n_paths": s.n_paths,
        "horizon": horizon,
        "u": opts.levels,
        "alpha": opts.alphas,
        "estimates": {
            "max_mean": mean,
            "max_second_moment": second,
            "max_var": var,
            "ruin_probability": ruin,
            "max_lst": lst,
            "overshoot_mean": over,
            "ruin_by_remaining": by_n,
        },
        "stderr": {
            "max_mean": mean_se,
            "max_second_moment": second_se,
            "max_var": var_se,
            "ruin_probability": ruin_se,
            "max_lst": lst_se,
            "overshoot_mean": over_se,
            "ruin_by_remaining": by_n_se,
        },
        "claims_histogram": s.claims_histogram,
        "claims_chi_square": s.claims_chi_square,
    });
    let mut text = serde_json::to_string_pretty(&value).expect("summary serializes");
    text.push('\n');
    text
}
