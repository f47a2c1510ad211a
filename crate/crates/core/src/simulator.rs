//! Stochastic oracles.
//!
//! * [`simulate_tax_mc`] pushes a Pareto sample through the tax map and refits.
//! * [`simulate_additive_exchange`] runs random pairwise money transfers; the
//!   stationary wealth law is exponential.
//! * [`simulate_multiplicative`] runs independent geometric random walks
//!   reflected at a barrier; the stationary law is a power law.
//!
//! A replica is sequential and owns its state. Independent replicas may run
//! in parallel through [`replicate`].

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::distributions::CapitalModel;
use crate::error::{Error, Result};
use crate::estimate::{fit_boltzmann_binned, hill_estimator};
use crate::io::{BinRow, BinTable};
use crate::policy::revenue;
use crate::rng::{derive_seed, stream};
use crate::stats::{ks_statistic, ks_statistic_sorted};

/// Ledger units per `x̄` in the additive model; balances are integers so the
/// total is conserved exactly.
pub const UNITS_PER_MEAN: u64 = 1 << 20;
/// Checkpoints compared when judging stationarity.
pub const CONVERGENCE_WINDOW: usize = 10;
/// Relative drift below which the additive model counts as converged.
pub const ADDITIVE_DRIFT_TOLERANCE: f64 = 5e-3;
/// Relative drift below which the multiplicative model counts as converged.
pub const MULTIPLICATIVE_DRIFT_TOLERANCE: f64 = 1e-2;
/// The Hill fit uses agents above `barrier · exp(HILL_OFFSET_SIGMAS · volatility)`.
pub const HILL_OFFSET_SIGMAS: f64 = 2.0;
/// Smallest sample accepted by [`simulate_tax_mc`].
pub const MIN_TAX_MC_SAMPLE: usize = 1_000;

const ADDITIVE_BINS: usize = 100;
const ADDITIVE_BIN_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeConfig {
    pub n_agents: usize,
    /// Interaction events: pairwise transfers (additive) or single-agent
    /// updates (multiplicative, so one sweep is `n_agents` steps).
    pub steps: u64,
    /// Additive transfer scale in units of `x̄`, in `(0, 1]`.
    pub exchange_fraction: f64,
    /// Per-step log drift.
    pub drift: f64,
    /// Per-step log standard deviation.
    pub volatility: f64,
    pub barrier: f64,
    pub seed: u64,
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        Self {
            n_agents: 10_000,
            steps: 0,
            exchange_fraction: 1.0,
            drift: 0.0,
            volatility: 0.1,
            barrier: 1.0,
            seed: 0,
        }
    }
}

impl ExchangeConfig {
    fn check_common(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::Config(format!(
                "need at least 2 agents, got {}",
                self.n_agents
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub final_wealth: Vec<f64>,
    /// Fitted mean (additive), or tail exponent (multiplicative and tax map).
    pub fitted_param: f64,
    pub ks_stat: f64,
    pub converged: bool,
    /// `(step, fitted_param)` at every checkpoint.
    pub trace: Vec<(u64, f64)>,
    /// Sum of integer balances for the additive model.
    pub ledger_total: Option<u64>,
}

impl SimReport {
    /// Histogram of `final_wealth` on `[lo, hi)` with bins of `width`.
    pub fn histogram(&self, lo: f64, hi: f64, width: f64) -> Result<BinTable> {
        if !(width > 0.0 && hi > lo) {
            return Err(Error::Config(format!(
                "histogram needs hi > lo and width > 0, got [{lo}, {hi}) step {width}"
            )));
        }
        let n = ((hi - lo) / width).ceil() as usize;
        let edges: Vec<f64> = (0..=n).map(|k| (lo + k as f64 * width).min(hi)).collect();
        BinTable::histogram(&self.final_wealth, &edges)
    }
}

/// Relative gap between the means of the newer and older halves of the last
/// [`CONVERGENCE_WINDOW`] checkpoints.
pub fn trace_drift(trace: &[(u64, f64)]) -> f64 {
    if trace.len() < CONVERGENCE_WINDOW {
        return f64::INFINITY;
    }
    let tail = &trace[trace.len() - CONVERGENCE_WINDOW..];
    let (old, new) = tail.split_at(CONVERGENCE_WINDOW / 2);
    let mean = |s: &[(u64, f64)]| s.iter().map(|p| p.1).sum::<f64>() / s.len() as f64;
    let (a, b) = (mean(old), mean(new));
    let d = ((b - a) / (0.5 * (a + b))).abs();
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

// ---------------------------------------------------------------------------
// Tax map

#[derive(Debug, Clone, PartialEq)]
pub struct TaxMcReport {
    /// Post-tax sample in `final_wealth`; `fitted_param` is the refitted η.
    pub report: SimReport,
    /// `Σ (x - X(x))` over the sample.
    pub tax_collected: f64,
    /// `n` times the closed-form revenue per capita.
    pub expected_tax: f64,
    /// Standard error of the per-capita tax, from the sample.
    pub per_capita_stderr: f64,
}

impl TaxMcReport {
    pub fn per_capita_tax(&self) -> f64 {
        self.tax_collected / self.report.final_wealth.len() as f64
    }

    pub fn expected_per_capita_tax(&self) -> f64 {
        self.expected_tax / self.report.final_wealth.len() as f64
    }
}

/// Samples `n` incomes from Pareto(γ) above `x_c`, applies the tax map with
/// exponent `τ` and refits the tail exponent of the result.
pub fn simulate_tax_mc(n: usize, gamma: f64, x_c: f64, tau: f64, seed: u64) -> Result<TaxMcReport> {
    if n < MIN_TAX_MC_SAMPLE {
        return Err(Error::Config(format!(
            "need at least {MIN_TAX_MC_SAMPLE} draws, got {n}"
        )));
    }
    let expected_tax = revenue(gamma, tau, n as f64, x_c)?;
    let model = CapitalModel::new(gamma, x_c, 1.0)?;
    let pre = model.sample(n, seed);
    let mut taxes = Vec::with_capacity(n);
    let post: Vec<f64> = pre
        .iter()
        .map(|&x| {
            let y = (x_c * (x / x_c).powf(tau)).max(x_c);
            taxes.push(x - y);
            y
        })
        .collect();
    let tax_collected: f64 = taxes.iter().sum();
    let mean = tax_collected / n as f64;
    let var = taxes.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let (eta_hat, _) = hill_estimator(&post, x_c)?;
    let eta = 1.0 + (gamma - 1.0) / tau;
    let target = CapitalModel::new(eta, x_c, 1.0)?.tail_stats();
    let ks_stat = ks_statistic(&post, |x| target.cdf(x));
    Ok(TaxMcReport {
        report: SimReport {
            final_wealth: post,
            fitted_param: eta_hat,
            ks_stat,
            converged: true,
            trace: vec![(n as u64, eta_hat)],
            ledger_total: None,
        },
        tax_collected,
        expected_tax,
        per_capita_stderr: (var / n as f64).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Additive exchange

fn fit_additive(units: &[u64]) -> f64 {
    let mut counts = [0.0f64; ADDITIVE_BINS];
    let scale = 1.0 / (ADDITIVE_BIN_WIDTH * UNITS_PER_MEAN as f64);
    for &u in units {
        let k = (u as f64 * scale) as usize;
        if k < ADDITIVE_BINS {
            counts[k] += 1.0;
        }
    }
    let rows = counts
        .iter()
        .enumerate()
        .map(|(k, &count)| BinRow {
            lo: k as f64 * ADDITIVE_BIN_WIDTH,
            hi: (k + 1) as f64 * ADDITIVE_BIN_WIDTH,
            count,
        })
        .collect();
    let upper = ADDITIVE_BINS as f64 * ADDITIVE_BIN_WIDTH;
    BinTable::new(rows)
        .and_then(|t| fit_boltzmann_binned(&t, 0.0, upper))
        .map(|f| f.x_bar_hat)
        .unwrap_or(f64::NAN)
}

/// Random pairwise transfers with every agent starting at `x̄_target`.
///
/// Each event picks an ordered pair `(i, j)`, `i != j`, and moves an amount
/// uniform on `[0, exchange_fraction · x̄_target]` from `i` to `j` unless `i`
/// cannot cover it. `fitted_param` is the binned exponential mean on
/// `[0, 10 x̄_target]`, and `ks_stat` is measured against the exponential law
/// with mean `x̄_target`.
pub fn simulate_additive_exchange(cfg: &ExchangeConfig, x_bar_target: f64) -> Result<SimReport> {
    cfg.check_common()?;
    if !(cfg.exchange_fraction > 0.0 && cfg.exchange_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "exchange fraction must lie in (0, 1], got {}",
            cfg.exchange_fraction
        )));
    }
    if !(x_bar_target > 0.0 && x_bar_target.is_finite()) {
        return Err(Error::Config(format!(
            "target mean must be positive, got {x_bar_target}"
        )));
    }
    let n = cfg.n_agents;
    let max_delta = (cfg.exchange_fraction * UNITS_PER_MEAN as f64).round() as u64;
    let mut units = vec![UNITS_PER_MEAN; n];
    let mut rng = stream(cfg.seed);
    let mut trace = Vec::new();
    let every = n as u64;

    let mut step = 0u64;
    while step < cfg.steps {
        let burst = every.min(cfg.steps - step);
        for _ in 0..burst {
            let i = rng.random_range(0..n);
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let delta = rng.random_range(0..=max_delta);
            if units[i] >= delta {
                units[i] -= delta;
                units[j] += delta;
            }
        }
        step += burst;
        trace.push((step, fit_additive(&units) * x_bar_target));
    }

    let ledger_total = units.iter().sum::<u64>();
    let scale = x_bar_target / UNITS_PER_MEAN as f64;
    let final_wealth: Vec<f64> = units.iter().map(|&u| u as f64 * scale).collect();
    let fitted_param = match trace.last() {
        Some(&(_, m)) => m,
        None => fit_additive(&units) * x_bar_target,
    };
    let ks_stat = ks_statistic(&final_wealth, |x| -(-x / x_bar_target).exp_m1());
    let converged = trace_drift(&trace) < ADDITIVE_DRIFT_TOLERANCE;
    Ok(SimReport {
        final_wealth,
        fitted_param,
        ks_stat,
        converged,
        trace,
        ledger_total: Some(ledger_total),
    })
}

// ---------------------------------------------------------------------------
// Multiplicative walk

/// Drift giving a stationary tail exponent `γ` for a reflected walk with
/// log-volatility `σ`: `μ = -σ² (γ - 1) / 2`.
pub fn drift_for_tail_exponent(gamma: f64, volatility: f64) -> f64 {
    -volatility * volatility * (gamma - 1.0) / 2.0
}

/// Stationary tail exponent of a reflected walk: `γ = 1 - 2 μ / σ²`.
pub fn tail_exponent_for_drift(drift: f64, volatility: f64) -> f64 {
    1.0 - 2.0 * drift / (volatility * volatility)
}

/// Hill estimate from log-wealth above the barrier, using agents at least
/// `offset` above it.
fn hill_from_logs(logs: &[f64], offset: f64) -> f64 {
    let mut n = 0usize;
    let mut sum = 0.0;
    for &y in logs {
        if y >= offset {
            n += 1;
            sum += y - offset;
        }
    }
    if n == 0 || sum <= 0.0 {
        f64::NAN
    } else {
        1.0 + n as f64 / sum
    }
}

/// Independent walks `w ← max(w · exp(drift + volatility · Z), barrier)`,
/// every agent starting at the barrier. The walk is carried in
/// `ln(w / barrier)`.
pub fn simulate_multiplicative(cfg: &ExchangeConfig) -> Result<SimReport> {
    cfg.check_common()?;
    if !(cfg.volatility > 0.0 && cfg.volatility.is_finite()) {
        return Err(Error::Config(format!(
            "volatility must be positive, got {}",
            cfg.volatility
        )));
    }
    if !(cfg.barrier > 0.0 && cfg.barrier.is_finite()) {
        return Err(Error::Config(format!(
            "barrier must be positive, got {}",
            cfg.barrier
        )));
    }
    if !cfg.drift.is_finite() {
        return Err(Error::Config(format!(
            "drift must be finite, got {}",
            cfg.drift
        )));
    }
    let n = cfg.n_agents;
    let offset = HILL_OFFSET_SIGMAS * cfg.volatility;
    let mut logs = vec![0.0f64; n];
    let mut rng = stream(cfg.seed);
    let mut trace = Vec::new();

    let mut step = 0u64;
    while step < cfg.steps {
        let burst = (n as u64).min(cfg.steps - step) as usize;
        for y in &mut logs[..burst] {
            let z: f64 = rng.sample(StandardNormal);
            *y = (*y + cfg.drift + cfg.volatility * z).max(0.0);
        }
        step += burst as u64;
        trace.push((step, hill_from_logs(&logs, offset)));
    }

    let fitted_param = hill_from_logs(&logs, offset);
    let mut above: Vec<f64> = logs.iter().copied().filter(|&y| y >= offset).collect();
    above.sort_unstable_by(f64::total_cmp);
    let ks_stat = if above.is_empty() || !fitted_param.is_finite() {
        f64::NAN
    } else {
        let rate = fitted_param - 1.0;
        ks_statistic_sorted(&above, |y| -(-rate * (y - offset)).exp_m1())
    };
    let converged = trace_drift(&trace) < MULTIPLICATIVE_DRIFT_TOLERANCE;
    Ok(SimReport {
        final_wealth: logs.iter().map(|&y| cfg.barrier * y.exp()).collect(),
        fitted_param,
        ks_stat,
        converged,
        trace,
        ledger_total: None,
    })
}

/// Runs `count` replicas in parallel, replica `k` seeded with
/// `derive_seed(cfg.seed, k)`.
pub fn replicate<F>(cfg: &ExchangeConfig, count: usize, run: F) -> Result<Vec<SimReport>>
where
    F: Fn(&ExchangeConfig) -> Result<SimReport> + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|k| {
            let c = ExchangeConfig {
                seed: derive_seed(cfg.seed, k as u64),
                ..*cfg
            };
            run(&c)
        })
        .collect()
}
