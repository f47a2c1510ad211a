//! Parameter estimation from micro-data and binned tables.
//!
//! * [`fit_boltzmann_binned`]: multinomial maximum likelihood for a doubly
//!   truncated exponential on `[x_pov, x_c]`, solved by bracketed root finding
//!   on the score in the rate `λ = 1/x̄`.
//! * [`fit_pareto_tail`]: the Hill estimator on micro-data, or multinomial
//!   maximum likelihood by golden-section search on binned data.
//!
//! Goodness of fit is the KS distance to the fitted law, optionally with a
//! parametric-bootstrap p-value (refitting every resample).

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::io::{BinRow, BinTable};
use crate::rng::{derive_seed, open_unit, stream};
use crate::stats::{ks_critical_value, ks_statistic_sorted};

/// Minimum number of observations above `x_c` for a tail fit.
pub const MIN_TAIL_OBSERVATIONS: usize = 50;
/// Minimum number of non-empty bins for the exponential fit.
pub const MIN_BOLTZMANN_BINS: usize = 3;
/// Search interval for the binned Pareto exponent.
pub const PARETO_GAMMA_RANGE: (f64, f64) = (2.0, 10.0);
/// Significance level used to flag a rejected fit.
pub const GOF_ALPHA: f64 = 0.01;
/// Bootstrap resamples used by [`FitOptions::bootstrap`].
pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitOptions {
    /// Parametric-bootstrap resamples; zero skips the p-value.
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

impl FitOptions {
    pub fn bootstrap(seed: u64) -> Self {
        Self {
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    /// KS distance between the data and the fitted law.
    pub ks: f64,
    /// Large-sample critical distance at [`GOF_ALPHA`] for this sample size.
    pub critical: f64,
    pub p_value: Option<f64>,
}

impl GoodnessOfFit {
    /// Rejection at [`GOF_ALPHA`]: by bootstrap p-value when available,
    /// otherwise by the asymptotic critical distance.
    pub fn rejected(&self) -> bool {
        match self.p_value {
            Some(p) => p < GOF_ALPHA,
            None => self.ks > self.critical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannFit {
    pub x_bar_hat: f64,
    /// Fitted head count extrapolated to `[0, ∞)`.
    pub n_lab_hat: f64,
    pub gof: GoodnessOfFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParetoFit {
    pub gamma_hat: f64,
    pub stderr: f64,
    /// Observations (or binned mass) entering the fit.
    pub n: f64,
    pub gof: GoodnessOfFit,
}

/// Input to [`fit_pareto_tail`].
#[derive(Debug, Clone, Copy)]
pub enum TailData<'a> {
    Sample(&'a [f64]),
    Binned(&'a BinTable),
}

// ---------------------------------------------------------------------------
// Exponential fit on bins

/// `w / expm1(λ w) - 1/λ`, continuous through `λ = 0`.
fn centered_inverse(lambda: f64, w: f64) -> f64 {
    let z = lambda * w;
    if z.abs() < 1e-4 {
        -w / 2.0 + lambda * w * w / 12.0
    } else {
        w / z.exp_m1() - 1.0 / lambda
    }
}

struct ExpWindow {
    rows: Vec<BinRow>,
    lo: f64,
    hi: f64,
    total: f64,
}

impl ExpWindow {
    fn select(bins: &BinTable, x_pov: f64, x_c: f64) -> Result<Self> {
        if !(x_pov >= 0.0 && x_c > x_pov) {
            return Err(domain(format!(
                "fit window needs 0 <= x_pov < x_c, got [{x_pov}, {x_c}]"
            )));
        }
        let rows: Vec<BinRow> = bins
            .rows()
            .iter()
            .copied()
            .filter(|r| r.lo >= x_pov && r.hi <= x_c)
            .collect();
        let occupied = rows.iter().filter(|r| r.count > 0.0).count();
        if occupied == 1 {
            return Err(Error::Estimation(
                "degenerate histogram: all mass inside [x_pov, x_c] sits in one bin".into(),
            ));
        }
        if occupied < MIN_BOLTZMANN_BINS {
            return Err(Error::Estimation(format!(
                "need at least {MIN_BOLTZMANN_BINS} non-empty bins inside [x_pov, x_c], found {occupied}"
            )));
        }
        let lo = rows.first().map(|r| r.lo).unwrap_or(x_pov);
        let hi = rows.last().map(|r| r.hi).unwrap_or(x_c);
        let total = rows.iter().map(|r| r.count).sum();
        Ok(Self {
            rows,
            lo,
            hi,
            total,
        })
    }

    /// Derivative of the multinomial log-likelihood in `λ`.
    fn score(&self, lambda: f64) -> f64 {
        let span = self.hi - self.lo;
        let mut s = -self.total * centered_inverse(lambda, span);
        for r in &self.rows {
            s += r.count * ((self.lo - r.lo) + centered_inverse(lambda, r.width()));
        }
        s
    }

    /// Truncated-exponential CDF on the window, rate `λ > 0`.
    fn cdf(&self, lambda: f64, x: f64) -> f64 {
        let num = -(-lambda * (x - self.lo)).exp_m1();
        let den = -(-lambda * (self.hi - self.lo)).exp_m1();
        num / den
    }

    fn solve(&self) -> Result<f64> {
        let span = self.hi - self.lo;
        if !(self.score(0.0) > 0.0) {
            return Err(Error::Estimation(
                "binned counts do not decrease across [x_pov, x_c]; no decaying exponential fits"
                    .into(),
            ));
        }
        let mut lo = 1e-9 / span;
        while self.score(lo) <= 0.0 {
            lo *= 0.5;
        }
        let mut hi = 1.0 / span;
        let mut expansions = 0;
        while self.score(hi) > 0.0 {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::Estimation(
                    "likelihood keeps increasing with the decay rate; mass is concentrated at the window edge"
                        .into(),
                ));
            }
        }
        // bisection in log λ to 1e-13 relative
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if self.score(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 < 1e-13 {
                break;
            }
        }
        Ok((lo * hi).sqrt())
    }

    fn ks(&self, lambda: f64) -> f64 {
        let mut cum = 0.0;
        let mut d: f64 = 0.0;
        for r in &self.rows {
            d = d.max((cum / self.total - self.cdf(lambda, r.lo)).abs());
            cum += r.count;
            d = d.max((cum / self.total - self.cdf(lambda, r.hi)).abs());
        }
        d
    }

    fn probabilities(&self, lambda: f64) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| self.cdf(lambda, r.hi) - self.cdf(lambda, r.lo))
            .collect()
    }

    fn with_counts(&self, counts: &[f64]) -> Self {
        let rows: Vec<BinRow> = self
            .rows
            .iter()
            .zip(counts)
            .map(|(r, &count)| BinRow { count, ..*r })
            .collect();
        Self {
            total: counts.iter().sum(),
            rows,
            lo: self.lo,
            hi: self.hi,
        }
    }
}

/// Maximum-likelihood exponential fit to the bins lying inside `[x_pov, x_c]`.
pub fn fit_boltzmann_binned(bins: &BinTable, x_pov: f64, x_c: f64) -> Result<BoltzmannFit> {
    fit_boltzmann_binned_with(bins, x_pov, x_c, FitOptions::default())
}

pub fn fit_boltzmann_binned_with(
    bins: &BinTable,
    x_pov: f64,
    x_c: f64,
    options: FitOptions,
) -> Result<BoltzmannFit> {
    let window = ExpWindow::select(bins, x_pov, x_c)?;
    let lambda = window.solve()?;
    let x_bar_hat = 1.0 / lambda;
    let in_window = (-window.lo * lambda).exp() - (-window.hi * lambda).exp();
    let ks = window.ks(lambda);
    let p_value = (options.bootstrap_resamples > 0).then(|| {
        let probs = window.probabilities(lambda);
        let n = window.total.round() as u64;
        bootstrap_p_value(ks, options, |rng| {
            let counts = multinomial(rng, n, &probs);
            let w = window.with_counts(&counts);
            w.solve().ok().map(|l| w.ks(l))
        })
    });
    Ok(BoltzmannFit {
        x_bar_hat,
        n_lab_hat: window.total / in_window,
        gof: GoodnessOfFit {
            ks,
            critical: ks_critical_value(GOF_ALPHA, window.total.round().max(1.0) as usize),
            p_value,
        },
    })
}

// ---------------------------------------------------------------------------
// Pareto tail

/// Hill estimator `γ̂ = 1 + n / Σ ln(x_i / x_c)` with standard error `(γ̂ - 1)/√n`.
pub fn hill_estimator(sample: &[f64], x_c: f64) -> Result<(f64, f64)> {
    if !(x_c > 0.0) {
        return Err(domain(format!("threshold must be positive, got {x_c}")));
    }
    if let Some(&bad) = sample.iter().find(|&&x| !(x >= x_c)) {
        return Err(domain(format!(
            "observation {bad} lies below the threshold {x_c}"
        )));
    }
    if sample.len() < MIN_TAIL_OBSERVATIONS {
        return Err(Error::Estimation(format!(
            "need at least {MIN_TAIL_OBSERVATIONS} observations above x_c, found {}",
            sample.len()
        )));
    }
    let n = sample.len() as f64;
    let log_sum: f64 = sample.iter().map(|&x| (x / x_c).ln()).sum();
    if !(log_sum > 0.0) {
        return Err(Error::Estimation(
            "every observation sits at the threshold; the exponent is unbounded".into(),
        ));
    }
    let gamma = 1.0 + n / log_sum;
    Ok((gamma, (gamma - 1.0) / n.sqrt()))
}

fn pareto_cdf(gamma: f64, x_c: f64, x: f64) -> f64 {
    if x <= x_c {
        0.0
    } else {
        -((1.0 - gamma) * (x / x_c).ln()).exp_m1()
    }
}

fn hill_ks(sorted: &[f64], x_c: f64) -> Option<(f64, f64)> {
    let n = sorted.len() as f64;
    let log_sum: f64 = sorted.iter().map(|&x| (x / x_c).ln()).sum();
    if !(log_sum > 0.0) {
        return None;
    }
    let gamma = 1.0 + n / log_sum;
    Some((
        gamma,
        ks_statistic_sorted(sorted, |x| pareto_cdf(gamma, x_c, x)),
    ))
}

struct ParetoWindow {
    rows: Vec<BinRow>,
    lo: f64,
    hi: f64,
    x_c: f64,
    total: f64,
}

impl ParetoWindow {
    fn select(bins: &BinTable, x_c: f64) -> Result<Self> {
        if !(x_c > 0.0) {
            return Err(domain(format!("threshold must be positive, got {x_c}")));
        }
        let rows: Vec<BinRow> = bins
            .rows()
            .iter()
            .copied()
            .filter(|r| r.lo >= x_c)
            .collect();
        let total: f64 = rows.iter().map(|r| r.count).sum();
        if total < MIN_TAIL_OBSERVATIONS as f64 {
            return Err(Error::Estimation(format!(
                "need binned mass of at least {MIN_TAIL_OBSERVATIONS} above x_c, found {total}"
            )));
        }
        if rows.iter().filter(|r| r.count > 0.0).count() < 2 {
            return Err(Error::Estimation(
                "degenerate histogram: all tail mass sits in one bin".into(),
            ));
        }
        Ok(Self {
            lo: rows.first().map(|r| r.lo).unwrap_or(x_c),
            hi: rows.last().map(|r| r.hi).unwrap_or(x_c),
            rows,
            x_c,
            total,
        })
    }

    /// `ln(S(a) - S(b))` for the Pareto survival `S(x) = (x/x_c)^{1-γ}`.
    fn log_mass(&self, gamma: f64, a: f64, b: f64) -> f64 {
        let k = 1.0 - gamma;
        k * (a / self.x_c).ln() + (-(k * (b / a).ln()).exp_m1()).ln()
    }

    fn log_likelihood(&self, gamma: f64) -> f64 {
        let norm = self.log_mass(gamma, self.lo, self.hi);
        self.rows
            .iter()
            .filter(|r| r.count > 0.0)
            .map(|r| r.count * (self.log_mass(gamma, r.lo, r.hi) - norm))
            .sum()
    }

    fn cdf(&self, gamma: f64, x: f64) -> f64 {
        let k = 1.0 - gamma;
        let s = |v: f64| (k * (v / self.lo).ln()).exp();
        (1.0 - s(x)) / (1.0 - s(self.hi))
    }

    fn solve(&self) -> f64 {
        golden_section_max(
            |g| self.log_likelihood(g),
            PARETO_GAMMA_RANGE.0 + 1e-9,
            PARETO_GAMMA_RANGE.1,
            1e-8,
        )
    }

    fn ks(&self, gamma: f64) -> f64 {
        let mut cum = 0.0;
        let mut d: f64 = 0.0;
        for r in &self.rows {
            d = d.max((cum / self.total - self.cdf(gamma, r.lo)).abs());
            cum += r.count;
            d = d.max((cum / self.total - self.cdf(gamma, r.hi)).abs());
        }
        d
    }

    fn probabilities(&self, gamma: f64) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| self.cdf(gamma, r.hi) - self.cdf(gamma, r.lo))
            .collect()
    }

    fn with_counts(&self, counts: &[f64]) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .zip(counts)
                .map(|(r, &count)| BinRow { count, ..*r })
                .collect(),
            total: counts.iter().sum(),
            ..*self
        }
    }
}

/// Maximizes a unimodal `f` on `[a, b]` to an interval width of `tol`.
fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Fits the Pareto exponent above `x_c`.
pub fn fit_pareto_tail(data: TailData<'_>, x_c: f64) -> Result<ParetoFit> {
    fit_pareto_tail_with(data, x_c, FitOptions::default())
}

pub fn fit_pareto_tail_with(
    data: TailData<'_>,
    x_c: f64,
    options: FitOptions,
) -> Result<ParetoFit> {
    match data {
        TailData::Sample(sample) => {
            let (gamma_hat, stderr) = hill_estimator(sample, x_c)?;
            let mut sorted = sample.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            let ks = ks_statistic_sorted(&sorted, |x| pareto_cdf(gamma_hat, x_c, x));
            let n = sample.len();
            let p_value = (options.bootstrap_resamples > 0).then(|| {
                let inv = -1.0 / (gamma_hat - 1.0);
                bootstrap_p_value(ks, options, |rng| {
                    let mut s: Vec<f64> = (0..n)
                        .map(|_| (x_c * open_unit(rng).powf(inv)).max(x_c))
                        .collect();
                    s.sort_unstable_by(f64::total_cmp);
                    hill_ks(&s, x_c).map(|(_, d)| d)
                })
            });
            Ok(ParetoFit {
                gamma_hat,
                stderr,
                n: n as f64,
                gof: GoodnessOfFit {
                    ks,
                    critical: ks_critical_value(GOF_ALPHA, n),
                    p_value,
                },
            })
        }
        TailData::Binned(bins) => {
            let window = ParetoWindow::select(bins, x_c)?;
            let gamma_hat = window.solve();
            let ks = window.ks(gamma_hat);
            let p_value = (options.bootstrap_resamples > 0).then(|| {
                let probs = window.probabilities(gamma_hat);
                let n = window.total.round() as u64;
                bootstrap_p_value(ks, options, |rng| {
                    let w = window.with_counts(&multinomial(rng, n, &probs));
                    let g = w.solve();
                    Some(w.ks(g))
                })
            });
            Ok(ParetoFit {
                gamma_hat,
                stderr: (gamma_hat - 1.0) / window.total.sqrt(),
                n: window.total,
                gof: GoodnessOfFit {
                    ks,
                    critical: ks_critical_value(GOF_ALPHA, window.total.round() as usize),
                    p_value,
                },
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Bootstrap plumbing

/// Draws multinomial counts by sequential conditional binomials.
fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64]) -> Vec<f64> {
    let mut remaining = n;
    let mut mass_left = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 || i + 1 == probs.len() {
            out.push(if i + 1 == probs.len() {
                remaining as f64
            } else {
                0.0
            });
            if i + 1 < probs.len() {
                continue;
            }
            break;
        }
        let q = (p / mass_left).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q)
            .map(|b| b.sample(rng))
            .unwrap_or(0);
        out.push(k as f64);
        remaining -= k;
        mass_left -= p;
    }
    out
}

/// Fraction of resampled KS distances at least as large as `observed`,
/// with the usual `(1 + k) / (B + 1)` correction. Failed refits count as extreme.
fn bootstrap_p_value<F>(observed: f64, options: FitOptions, resample_ks: F) -> f64
where
    F: Fn(&mut crate::rng::StreamRng) -> Option<f64> + Sync,
{
    let b = options.bootstrap_resamples;
    let exceed: usize = (0..b)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(derive_seed(options.seed, i as u64));
            match resample_ks(&mut rng) {
                Some(d) if d < observed => 0,
                _ => 1,
            }
        })
        .sum();
    (1 + exceed) as f64 / (b + 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{CapitalModel, LaborModel};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn belgian_bins() -> BinTable {
        let m = LaborModel::new(28_013.0, 6.09e6).unwrap();
        BinTable::from_labor_model(&m, 0.0, 100_000.0, 1_000.0).unwrap()
    }

    #[test]
    fn exact_bins_recover_mean() {
        let fit = fit_boltzmann_binned(&belgian_bins(), 13_250.0, 100_000.0).unwrap();
        assert!(rel(fit.x_bar_hat, 28_013.0) < 1e-8, "{fit:?}");
        assert!(rel(fit.n_lab_hat, 6.09e6) < 1e-8);
        assert!(fit.gof.ks < 1e-9);
        assert!(!fit.gof.rejected());
    }

    #[test]
    fn rounded_bins_within_tolerance() {
        let rows = belgian_bins()
            .rows()
            .iter()
            .map(|r| BinRow {
                count: r.count.round(),
                ..*r
            })
            .collect();
        let fit = fit_boltzmann_binned(&BinTable::new(rows).unwrap(), 13_250.0, 1e5).unwrap();
        assert!(rel(fit.x_bar_hat, 28_013.0) < 2e-3);
    }

    #[test]
    fn doubling_counts_is_equivariant() {
        let base = belgian_bins();
        let doubled = BinTable::new(
            base.rows()
                .iter()
                .map(|r| BinRow {
                    count: 2.0 * r.count,
                    ..*r
                })
                .collect(),
        )
        .unwrap();
        let a = fit_boltzmann_binned(&base, 13_250.0, 1e5).unwrap();
        let b = fit_boltzmann_binned(&doubled, 13_250.0, 1e5).unwrap();
        assert!(rel(a.x_bar_hat, b.x_bar_hat) < 1e-12);
        assert!(rel(2.0 * a.n_lab_hat, b.n_lab_hat) < 1e-12);
    }

    #[test]
    fn uniform_bins_are_rejected() {
        // flat counts on [0, 60k): a decaying fit exists inside [x_pov, x_c] but is poor
        let rows = (0..100)
            .map(|k| BinRow {
                lo: k as f64 * 1e3,
                hi: (k + 1) as f64 * 1e3,
                count: if k < 60 { 50_000.0 } else { 0.0 },
            })
            .collect();
        let fit = fit_boltzmann_binned(&BinTable::new(rows).unwrap(), 13_250.0, 1e5).unwrap();
        assert!(fit.x_bar_hat.is_finite() && fit.x_bar_hat > 0.0);
        assert!(fit.gof.rejected(), "{fit:?}");
        assert!(fit.gof.ks > 10.0 * fit.gof.critical);
    }

    #[test]
    fn boltzmann_errors() {
        let one = BinTable::new(vec![
            BinRow {
                lo: 2e4,
                hi: 2.1e4,
                count: 10.0,
            },
            BinRow {
                lo: 2.1e4,
                hi: 2.2e4,
                count: 0.0,
            },
        ])
        .unwrap();
        assert!(matches!(
            fit_boltzmann_binned(&one, 13_250.0, 1e5),
            Err(Error::Estimation(m)) if m.contains("degenerate")
        ));
        let two = BinTable::new(vec![
            BinRow {
                lo: 2e4,
                hi: 2.1e4,
                count: 10.0,
            },
            BinRow {
                lo: 2.1e4,
                hi: 2.2e4,
                count: 5.0,
            },
        ])
        .unwrap();
        assert!(fit_boltzmann_binned(&two, 13_250.0, 1e5).is_err());
        let rising = BinTable::new(
            (0..10)
                .map(|k| BinRow {
                    lo: 2e4 + k as f64 * 1e3,
                    hi: 2.1e4 + k as f64 * 1e3,
                    count: (k + 1) as f64,
                })
                .collect(),
        )
        .unwrap();
        assert!(fit_boltzmann_binned(&rising, 13_250.0, 1e5).is_err());
        assert!(fit_boltzmann_binned(&belgian_bins(), 1e5, 1e4).is_err());
    }

    #[test]
    fn boltzmann_bootstrap_is_deterministic() {
        let m = LaborModel::new(28_013.0, 1.0).unwrap();
        let sample = m.sample(20_000, 5);
        let edges: Vec<f64> = (0..=100).map(|k| k as f64 * 1e3).collect();
        let bins = BinTable::histogram(&sample, &edges).unwrap();
        let opts = FitOptions {
            bootstrap_resamples: 50,
            seed: 11,
        };
        let a = fit_boltzmann_binned_with(&bins, 13_250.0, 1e5, opts).unwrap();
        let b = fit_boltzmann_binned_with(&bins, 13_250.0, 1e5, opts).unwrap();
        assert_eq!(a, b);
        let p = a.gof.p_value.unwrap();
        assert!(p > 0.0 && p <= 1.0);
        assert!(rel(a.x_bar_hat, 28_013.0) < 0.05);
    }

    #[test]
    fn hill_closed_form_cases() {
        let e = std::f64::consts::E;
        let repeated = vec![e * 1e5; 100];
        let (g, se) = hill_estimator(&repeated, 1e5).unwrap();
        assert!((g - 2.0).abs() < 1e-14);
        assert!((se - 0.1).abs() < 1e-14);

        assert!(matches!(
            hill_estimator(&[2e5; 10], 1e5),
            Err(Error::Estimation(_))
        ));
        let mut bad = vec![2e5; 60];
        bad[7] = 9e4;
        assert!(matches!(hill_estimator(&bad, 1e5), Err(Error::Domain(_))));
        assert!(hill_estimator(&[1e5; 60], 1e5).is_err());
    }

    #[test]
    fn micro_and_binned_agree() {
        let m = CapitalModel::new(2.4, 1e5, 1.0).unwrap();
        let sample = m.sample(200_000, 77);
        let micro = fit_pareto_tail(TailData::Sample(&sample), 1e5).unwrap();
        let bins = BinTable::sparse_histogram(&sample, 1e5, 1e3).unwrap();
        let binned = fit_pareto_tail(TailData::Binned(&bins), 1e5).unwrap();
        assert!((micro.gamma_hat - 2.4).abs() < 3.0 * micro.stderr);
        assert!(
            (micro.gamma_hat - binned.gamma_hat).abs() < 2.0 * micro.stderr,
            "micro {micro:?} binned {binned:?}"
        );
        assert!(!micro.gof.rejected());
        assert!(!binned.gof.rejected());
    }

    #[test]
    fn pareto_bootstrap() {
        let m = CapitalModel::new(2.4, 1e5, 1.0).unwrap();
        let sample = m.sample(2_000, 3);
        let opts = FitOptions {
            bootstrap_resamples: 100,
            seed: 1,
        };
        let fit = fit_pareto_tail_with(TailData::Sample(&sample), 1e5, opts).unwrap();
        assert!(fit.gof.p_value.unwrap() > GOF_ALPHA);

        // an exponential shifted above x_c is not a power law
        let l = LaborModel::new(1e5, 1.0).unwrap();
        let shifted: Vec<f64> = l.sample(2_000, 3).into_iter().map(|x| x + 1e5).collect();
        let fit = fit_pareto_tail_with(TailData::Sample(&shifted), 1e5, opts).unwrap();
        assert!(fit.gof.rejected(), "{fit:?}");
    }

    #[test]
    fn binned_tail_errors() {
        let few = BinTable::new(vec![BinRow {
            lo: 1e5,
            hi: 1.01e5,
            count: 10.0,
        }])
        .unwrap();
        assert!(fit_pareto_tail(TailData::Binned(&few), 1e5).is_err());
        let one = BinTable::new(vec![BinRow {
            lo: 1e5,
            hi: 1.01e5,
            count: 1e4,
        }])
        .unwrap();
        assert!(fit_pareto_tail(TailData::Binned(&one), 1e5).is_err());
    }

    #[test]
    fn multinomial_preserves_total() {
        let mut rng = stream(4);
        let probs = [0.1, 0.2, 0.3, 0.4];
        for _ in 0..100 {
            let c = multinomial(&mut rng, 12_345, &probs);
            assert_eq!(c.iter().sum::<f64>(), 12_345.0);
            assert_eq!(c.len(), 4);
        }
    }
}
