//! Aggregate accounting for the two income classes.
//!
//! The central relation ties the Pareto exponent to the capital income mass:
//!
//! ```text
//! γ = (2 M_cap - N_cap x_c) / (M_cap - N_cap x_c)
//! M_cap = N_cap x_c (γ - 1) / (γ - 2)
//! ```
//!
//! so a fitted exponent implies a capital mass, and a comparison with the
//! declared mass estimates undeclared income.

use crate::distributions::{CapitalModel, LaborModel};
use crate::error::{domain, Error, Result};

/// Capital share of total income used when a scenario declares neither a
/// capital mass nor a share. Reproduces M_cap ≈ 60 G€ against 170.6 G€ labor.
pub const DEFAULT_CAPITAL_SHARE: f64 = 0.26;

/// Typical range of `x_c / x̄`; outside it the snapshot carries a warning.
pub const CROSSOVER_RATIO_RANGE: (f64, f64) = (3.0, 4.0);

/// Relative slack allowed between a reported `n_tot` and `n_lab + n_cap`
/// (published totals are rounded to three significant figures).
pub const HEAD_COUNT_TOLERANCE: f64 = 5e-3;

/// Pareto exponent implied by a capital income mass.
pub fn gamma_from_capital(m_cap: f64, n_cap: f64, x_c: f64) -> Result<f64> {
    let floor = n_cap * x_c;
    if !(n_cap > 0.0 && x_c > 0.0 && floor.is_finite()) {
        return Err(domain(format!(
            "n_cap and x_c must be positive, got n_cap={n_cap}, x_c={x_c}"
        )));
    }
    if !(m_cap > floor) || !m_cap.is_finite() {
        return Err(Error::InfeasibleEconomy { m_cap, floor });
    }
    Ok((2.0 * m_cap - floor) / (m_cap - floor))
}

/// Capital income mass implied by a Pareto exponent.
pub fn capital_from_gamma(gamma: f64, n_cap: f64, x_c: f64) -> Result<f64> {
    if !(gamma > 2.0 && gamma.is_finite()) {
        return Err(domain(format!(
            "Pareto exponent must exceed 2 for finite capital income, got {gamma}"
        )));
    }
    if !(n_cap >= 0.0 && x_c > 0.0) {
        return Err(domain(format!(
            "n_cap must be non-negative and x_c positive, got n_cap={n_cap}, x_c={x_c}"
        )));
    }
    Ok(n_cap * x_c * (gamma - 1.0) / (gamma - 2.0))
}

/// Fit-implied capital mass minus declared mass. Positive values point at
/// undeclared income; negative values are returned as-is.
pub fn evasion_gap(gamma_fit: f64, n_cap: f64, x_c: f64, m_declared: f64) -> Result<f64> {
    if !(m_declared >= 0.0) {
        return Err(domain(format!(
            "declared capital income must be non-negative, got {m_declared}"
        )));
    }
    Ok(capital_from_gamma(gamma_fit, n_cap, x_c)? - m_declared)
}

/// Capital mass whose share of total income is `share`: `m_lab s / (1 - s)`.
pub fn capital_share_estimate(m_lab: f64, share: f64) -> Result<f64> {
    if !(share > 0.0 && share < 1.0) {
        return Err(domain(format!(
            "capital share must lie in (0, 1), got {share}"
        )));
    }
    if !(m_lab >= 0.0) {
        return Err(domain(format!(
            "labor income must be non-negative, got {m_lab}"
        )));
    }
    Ok(m_lab * share / (1.0 - share))
}

/// Mean income of the labor class.
pub fn mean_labor(m_lab: f64, n_lab: f64) -> Result<f64> {
    if !(n_lab > 0.0) {
        return Err(domain(format!(
            "labor head count must be positive, got {n_lab}"
        )));
    }
    Ok(m_lab / n_lab)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnapshotWarning {
    /// `x_c / x̄` lies outside [`CROSSOVER_RATIO_RANGE`].
    CrossoverRatio { ratio: f64 },
}

impl std::fmt::Display for SnapshotWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnapshotWarning::CrossoverRatio { ratio } => write!(
                f,
                "x_c is {ratio:.2} times the mean labor income, outside the usual {}-{} range",
                CROSSOVER_RATIO_RANGE.0, CROSSOVER_RATIO_RANGE.1
            ),
        }
    }
}

/// Aggregate class totals and thresholds of one economy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomySnapshot {
    n_tot: f64,
    n_lab: f64,
    n_cap: f64,
    m_lab: f64,
    m_cap: Option<f64>,
    x_pov: f64,
    x_c: f64,
}

impl EconomySnapshot {
    /// Builds a snapshot with `n_tot = n_lab + n_cap`.
    pub fn new(
        n_lab: f64,
        n_cap: f64,
        m_lab: f64,
        m_cap: Option<f64>,
        x_pov: f64,
        x_c: f64,
    ) -> Result<Self> {
        for (name, v) in [("n_lab", n_lab), ("n_cap", n_cap), ("m_lab", m_lab)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be a non-negative number, got {v}"
                )));
            }
        }
        if !(x_pov > 0.0 && x_pov < x_c && x_c.is_finite()) {
            return Err(Error::Validation(format!(
                "thresholds must satisfy 0 < x_pov < x_c, got x_pov={x_pov}, x_c={x_c}"
            )));
        }
        let snapshot = Self {
            n_tot: n_lab + n_cap,
            n_lab,
            n_cap,
            m_lab,
            m_cap: None,
            x_pov,
            x_c,
        };
        match m_cap {
            Some(m) => snapshot.with_capital(m),
            None => Ok(snapshot),
        }
    }

    /// Checks a separately reported total head count against `n_lab + n_cap`.
    pub fn with_reported_total(mut self, n_tot: f64) -> Result<Self> {
        let sum = self.n_lab + self.n_cap;
        if !(n_tot > 0.0) || ((sum - n_tot) / n_tot).abs() > HEAD_COUNT_TOLERANCE {
            return Err(Error::Validation(format!(
                "n_tot={n_tot} does not match n_lab + n_cap = {sum}"
            )));
        }
        self.n_tot = n_tot;
        Ok(self)
    }

    /// Sets the capital mass; it must exceed `n_cap * x_c` so that γ > 2.
    pub fn with_capital(mut self, m_cap: f64) -> Result<Self> {
        let floor = self.n_cap * self.x_c;
        if !(m_cap > floor && m_cap.is_finite()) {
            return Err(Error::InfeasibleEconomy { m_cap, floor });
        }
        self.m_cap = Some(m_cap);
        Ok(self)
    }

    /// Belgian personal income tax aggregates for 2014.
    pub fn belgium_2014() -> Self {
        Self::new(6.09e6, 1.73e5, 170.6e9, Some(60e9), 13_250.0, 100_000.0)
            .and_then(|s| s.with_reported_total(6.26e6))
            .expect("reference snapshot is valid")
    }

    pub fn n_tot(&self) -> f64 {
        self.n_tot
    }
    pub fn n_lab(&self) -> f64 {
        self.n_lab
    }
    pub fn n_cap(&self) -> f64 {
        self.n_cap
    }
    pub fn m_lab(&self) -> f64 {
        self.m_lab
    }
    pub fn m_cap(&self) -> Option<f64> {
        self.m_cap
    }
    pub fn x_pov(&self) -> f64 {
        self.x_pov
    }
    pub fn x_c(&self) -> f64 {
        self.x_c
    }

    pub fn x_bar(&self) -> Result<f64> {
        mean_labor(self.m_lab, self.n_lab)
    }

    pub fn crossover_ratio(&self) -> Result<f64> {
        Ok(self.x_c / self.x_bar()?)
    }

    /// Soft consistency checks; none of these make the snapshot unusable.
    pub fn warnings(&self) -> Vec<SnapshotWarning> {
        let mut out = Vec::new();
        if let Ok(ratio) = self.crossover_ratio() {
            let (lo, hi) = CROSSOVER_RATIO_RANGE;
            if !(lo..=hi).contains(&ratio) {
                out.push(SnapshotWarning::CrossoverRatio { ratio });
            }
        }
        out
    }

    /// Largest levy (exclusive) the capital class can bear while staying Pareto above x_c.
    pub fn max_levy(&self) -> Result<f64> {
        Ok(self.require_capital()? - self.n_cap * self.x_c)
    }

    pub fn gamma(&self) -> Result<f64> {
        gamma_from_capital(self.require_capital()?, self.n_cap, self.x_c)
    }

    pub fn labor_model(&self) -> Result<LaborModel> {
        LaborModel::new(self.x_bar()?, self.n_lab)
    }

    pub fn capital_model(&self) -> Result<CapitalModel> {
        CapitalModel::new(self.gamma()?, self.x_c, self.n_cap)
    }

    pub(crate) fn require_capital(&self) -> Result<f64> {
        self.m_cap.ok_or_else(|| {
            Error::Validation(
                "capital income is unresolved; declare it, give a capital share, or fit γ".into(),
            )
        })
    }
}

/// How the capital mass of a snapshot was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapitalSource {
    Declared,
    ShareEstimated { share: f64 },
    FitImplied { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapitalEstimate {
    pub source: CapitalSource,
    pub m_cap: f64,
}

/// The three capital-mass routes evaluated side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalEstimates {
    pub declared: Option<CapitalEstimate>,
    pub share_estimated: Option<CapitalEstimate>,
    pub fit_implied: Option<CapitalEstimate>,
}

impl CapitalEstimates {
    pub fn evaluate(
        snapshot: &EconomySnapshot,
        share: Option<f64>,
        gamma_fit: Option<f64>,
    ) -> Result<Self> {
        let declared = snapshot.m_cap().map(|m_cap| CapitalEstimate {
            source: CapitalSource::Declared,
            m_cap,
        });
        let share_estimated = share
            .map(|s| -> Result<CapitalEstimate> {
                Ok(CapitalEstimate {
                    source: CapitalSource::ShareEstimated { share: s },
                    m_cap: capital_share_estimate(snapshot.m_lab(), s)?,
                })
            })
            .transpose()?;
        let fit_implied = gamma_fit
            .map(|g| -> Result<CapitalEstimate> {
                Ok(CapitalEstimate {
                    source: CapitalSource::FitImplied { gamma: g },
                    m_cap: capital_from_gamma(g, snapshot.n_cap(), snapshot.x_c())?,
                })
            })
            .transpose()?;
        Ok(Self {
            declared,
            share_estimated,
            fit_implied,
        })
    }

    /// Preferred resolution order: declared, then share, then fit.
    pub fn preferred(&self) -> Option<CapitalEstimate> {
        self.declared.or(self.share_estimated).or(self.fit_implied)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CapitalEstimate> {
        [&self.declared, &self.share_estimated, &self.fit_implied]
            .into_iter()
            .flatten()
    }
}
