//! The equilibrium-conserving capital income tax.
//!
//! Raising `ΔM` from a Pareto(γ) class while keeping it Pareto fixes the
//! post-tax exponent `η` (same mass relation, smaller mass). Requiring the
//! post-tax law to be the push-forward of the pre-tax law,
//! `f_post(X) dX = f_pre(x) dx`, gives the tax map
//!
//! ```text
//! τ    = (γ - 1) / (η - 1)
//! X(x) = x_c^{1-τ} x^τ
//! T(x) = 1 - (x_c / x)^{1-τ}
//! ```
//!
//! which is continuous at `x_c`, order preserving and progressive.

use crate::distributions::{CapitalModel, LaborModel};
use crate::economy::{gamma_from_capital, EconomySnapshot};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, integrate_pareto_tail, Tolerance};

/// Number of points in the default rate-curve grid.
pub const FIGURE_GRID_POINTS: usize = 200;
/// Upper end of the default rate-curve grid, as a multiple of `x_c`.
pub const FIGURE_GRID_SPAN: f64 = 10.0;

/// Money needed to lift everyone below `x_pov` up to `x_pov`:
/// `m_lab [r - (1 - e^{-r})]` with `r = x_pov / x̄`.
pub fn poverty_gap(x_pov: f64, x_bar: f64, m_lab: f64) -> Result<f64> {
    if !(x_pov > 0.0) || !(x_bar > 0.0) {
        return Err(domain(format!(
            "poverty line and mean income must be positive, got x_pov={x_pov}, x_bar={x_bar}"
        )));
    }
    if !(m_lab >= 0.0) {
        return Err(domain(format!(
            "labor income must be non-negative, got {m_lab}"
        )));
    }
    let r = x_pov / x_bar;
    let bracket = if r < 1e-3 {
        // r + expm1(-r) cancels catastrophically for small r
        r * r * (0.5 - r * (1.0 / 6.0 - r * (1.0 / 24.0 - r / 120.0)))
    } else {
        r + (-r).exp_m1()
    };
    Ok(m_lab * bracket)
}

/// Quadrature of `(x_pov - x) f_lab(x)` over `[0, x_pov]`.
pub fn poverty_gap_by_quadrature(x_pov: f64, labor: &LaborModel) -> Result<f64> {
    if !(x_pov > 0.0) {
        return Err(domain(format!(
            "poverty line must be positive, got {x_pov}"
        )));
    }
    let est = integrate(
        |x| (x_pov - x) * labor.density(x).unwrap_or(0.0),
        0.0,
        x_pov,
        Tolerance::relative(1e-12),
    )?;
    Ok(est.value)
}

/// Exponent of the post-tax Pareto law after levying `delta_m`.
pub fn post_tax_exponent(m_cap: f64, delta_m: f64, n_cap: f64, x_c: f64) -> Result<f64> {
    if !(delta_m >= 0.0) {
        return Err(domain(format!(
            "levy must be non-negative (subsidies are not modelled), got {delta_m}"
        )));
    }
    let max_delta_m = m_cap - n_cap * x_c;
    if !(delta_m < max_delta_m) {
        return Err(Error::InfeasibleLevy {
            delta_m,
            max_delta_m,
        });
    }
    gamma_from_capital(m_cap - delta_m, n_cap, x_c)
}

/// `τ = (γ - 1) / (η - 1)`, in `(0, 1]` whenever `η >= γ`.
pub fn tau_parameter(gamma: f64, eta: f64) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(domain(format!(
            "pre-tax exponent must exceed 1, got {gamma}"
        )));
    }
    if !(eta >= gamma) || !eta.is_finite() {
        return Err(domain(format!(
            "post-tax exponent {eta} below pre-tax exponent {gamma} would imply a negative tax"
        )));
    }
    Ok((gamma - 1.0) / (eta - 1.0))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(domain(format!(
            "tax-map parameter must lie in (0, 1], got {tau}"
        )));
    }
    Ok(())
}

fn check_taxable(x: f64, x_c: f64) -> Result<()> {
    if !(x_c > 0.0) {
        return Err(domain(format!("threshold must be positive, got {x_c}")));
    }
    if !(x >= x_c) {
        return Err(domain(format!(
            "income {x} lies below the taxation threshold {x_c}"
        )));
    }
    Ok(())
}

/// Post-tax income `X = x_c^{1-τ} x^τ` for `x >= x_c`.
pub fn post_tax_income(x: f64, tau: f64, x_c: f64) -> Result<f64> {
    check_tau(tau)?;
    check_taxable(x, x_c)?;
    Ok(x_c * (x / x_c).powf(tau))
}

/// Average tax rate `T(x) = 1 - (x_c/x)^{1-τ}` for `x >= x_c`.
pub fn tax_rate(x: f64, tau: f64, x_c: f64) -> Result<f64> {
    check_tau(tau)?;
    check_taxable(x, x_c)?;
    Ok(-((1.0 - tau) * (x_c / x).ln()).exp_m1())
}

/// Closed-form revenue of the tax map on a Pareto(γ) class:
/// `M_cap - n_cap x_c (γ-1)/(γ-1-τ)`.
pub fn revenue(gamma: f64, tau: f64, n_cap: f64, x_c: f64) -> Result<f64> {
    if !(gamma > 2.0 && gamma.is_finite()) {
        return Err(domain(format!(
            "pre-tax exponent must exceed 2, got {gamma}"
        )));
    }
    check_tau(tau)?;
    if !(n_cap >= 0.0 && x_c > 0.0) {
        return Err(domain(format!(
            "n_cap must be non-negative and x_c positive, got n_cap={n_cap}, x_c={x_c}"
        )));
    }
    // γ - 1 - τ, arranged so that τ = 1 reproduces γ - 2 exactly
    let denom = (gamma - 2.0) + (1.0 - tau);
    if !(denom > 0.0) {
        return Err(Error::DivergentIntegral(format!(
            "post-tax income mass diverges for gamma - tau = {} <= 1",
            gamma - tau
        )));
    }
    // M_cap - post-tax mass, with the difference taken analytically
    Ok(n_cap * x_c * (gamma - 1.0) * (1.0 - tau) / ((gamma - 2.0) * denom))
}

/// Quadrature of `(x - X(x)) f_cap(x)` over `[x_c, ∞)`.
pub fn revenue_by_quadrature(model: &CapitalModel, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let x_c = model.x_c();
    let (gamma, n_cap) = (model.gamma(), model.n_cap());
    let est = integrate_pareto_tail(
        |x| {
            // (x - X) f(x) = n (γ-1) r^{1-γ} (1 - r^{τ-1}); the product form keeps the
            // far tail from underflowing before the substitution's Jacobian is applied
            let ln_r = (x / x_c).ln();
            let taxed_share = -((tau - 1.0) * ln_r).exp_m1();
            n_cap * (gamma - 1.0) * ((1.0 - gamma) * ln_r).exp() * taxed_share
        },
        x_c,
        model.gamma() - 2.0,
        Tolerance::relative(1e-11),
    )?;
    Ok(est.value)
}

/// Scale factor `α = 1 - ΔM / M_lab` of a flat labor tax raising `ΔM`.
pub fn flat_tax_alpha(delta_m: f64, m_lab: f64) -> Result<f64> {
    if !(delta_m >= 0.0) {
        return Err(domain(format!("levy must be non-negative, got {delta_m}")));
    }
    if !(m_lab > 0.0) {
        return Err(domain(format!(
            "labor income must be positive, got {m_lab}"
        )));
    }
    if delta_m > m_lab {
        return Err(domain(format!(
            "levy {delta_m} exceeds total labor income {m_lab}"
        )));
    }
    Ok(1.0 - delta_m / m_lab)
}

/// A flat labor tax raising a given amount, for comparison with the capital scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatTax {
    pub alpha: f64,
    pub delta_m: f64,
    /// Post-tax labor law (mean `α x̄`), when the scale is non-degenerate.
    pub post_tax: Option<LaborModel>,
}

impl FlatTax {
    pub fn new(labor: &LaborModel, delta_m: f64) -> Result<Self> {
        let alpha = flat_tax_alpha(delta_m, labor.total_income())?;
        let post_tax = if alpha > 0.0 {
            Some(labor.scaled(alpha)?)
        } else {
            None
        };
        Ok(Self {
            alpha,
            delta_m,
            post_tax,
        })
    }
}

/// A validated equilibrium-to-equilibrium capital tax.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxPolicy {
    delta_m: f64,
    gamma: f64,
    eta: f64,
    tau: f64,
    x_c: f64,
    n_cap: f64,
    m_cap: f64,
}

/// Builds the policy raising `delta_m` from the capital class of `snapshot`.
pub fn build_policy(snapshot: &EconomySnapshot, delta_m: f64) -> Result<TaxPolicy> {
    let m_cap = snapshot.require_capital()?;
    let (n_cap, x_c) = (snapshot.n_cap(), snapshot.x_c());
    let gamma = gamma_from_capital(m_cap, n_cap, x_c)?;
    let eta = post_tax_exponent(m_cap, delta_m, n_cap, x_c)?;
    let tau = tau_parameter(gamma, eta)?;
    Ok(TaxPolicy {
        delta_m,
        gamma,
        eta,
        tau,
        x_c,
        n_cap,
        m_cap,
    })
}

impl TaxPolicy {
    /// Builds the policy from a chosen `τ`; the levy follows from the revenue formula.
    pub fn from_tau(snapshot: &EconomySnapshot, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let m_cap = snapshot.require_capital()?;
        let (n_cap, x_c) = (snapshot.n_cap(), snapshot.x_c());
        let gamma = gamma_from_capital(m_cap, n_cap, x_c)?;
        let eta = 1.0 + (gamma - 1.0) / tau;
        let delta_m = revenue(gamma, tau, n_cap, x_c)?;
        Ok(Self {
            delta_m,
            gamma,
            eta,
            tau,
            x_c,
            n_cap,
            m_cap,
        })
    }

    pub fn delta_m(&self) -> f64 {
        self.delta_m
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn tau(&self) -> f64 {
        self.tau
    }
    pub fn x_c(&self) -> f64 {
        self.x_c
    }
    pub fn n_cap(&self) -> f64 {
        self.n_cap
    }
    pub fn m_cap(&self) -> f64 {
        self.m_cap
    }

    /// Remaining headroom before the levy becomes infeasible.
    pub fn feasibility_margin(&self) -> f64 {
        self.m_cap - self.n_cap * self.x_c - self.delta_m
    }

    /// Levy as a fraction of capital income; lies strictly between `T(x_c)` and `lim T`.
    pub fn average_rate(&self) -> f64 {
        self.delta_m / self.m_cap
    }

    pub fn pre_tax_model(&self) -> Result<CapitalModel> {
        CapitalModel::new(self.gamma, self.x_c, self.n_cap)
    }

    pub fn post_tax_model(&self) -> Result<CapitalModel> {
        CapitalModel::new(self.eta, self.x_c, self.n_cap)
    }

    pub fn post_tax_income(&self, x: f64) -> Result<f64> {
        post_tax_income(x, self.tau, self.x_c)
    }

    /// `dX/dx = τ X / x`.
    pub fn post_tax_slope(&self, x: f64) -> Result<f64> {
        Ok(self.tau * self.post_tax_income(x)? / x)
    }

    pub fn tax_rate(&self, x: f64) -> Result<f64> {
        tax_rate(x, self.tau, self.x_c)
    }

    pub fn revenue(&self) -> Result<f64> {
        revenue(self.gamma, self.tau, self.n_cap, self.x_c)
    }

    pub fn revenue_by_quadrature(&self) -> Result<f64> {
        revenue_by_quadrature(&self.pre_tax_model()?, self.tau)
    }

    pub fn schedule(&self, grid: &[f64]) -> Result<Vec<ScheduleRow>> {
        schedule_table(self, grid)
    }
}

/// One row of a rate schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleRow {
    pub income: f64,
    pub rate: f64,
    pub post_tax_income: f64,
}

/// Evaluates rate and post-tax income on an ascending grid at or above `x_c`.
pub fn schedule_table(policy: &TaxPolicy, grid: &[f64]) -> Result<Vec<ScheduleRow>> {
    if let Some(w) = grid.windows(2).find(|w| !(w[0] <= w[1])) {
        return Err(domain(format!(
            "schedule grid must be ascending, found {} before {}",
            w[0], w[1]
        )));
    }
    grid.iter()
        .map(|&x| {
            Ok(ScheduleRow {
                income: x,
                rate: policy.tax_rate(x)?,
                post_tax_income: policy.post_tax_income(x)?,
            })
        })
        .collect()
}

/// `n` geometrically spaced points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(domain(format!(
            "geometric grid needs 0 < lo <= hi, got lo={lo}, hi={hi}"
        )));
    }
    match n {
        0 => Err(domain("geometric grid needs at least one point")),
        1 => Ok(vec![lo]),
        _ => {
            let ratio = (hi / lo).ln() / (n - 1) as f64;
            let mut g: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64).exp()).collect();
            g[n - 1] = hi;
            Ok(g)
        }
    }
}

/// The rate-curve grid: `FIGURE_GRID_POINTS` points from `x_c` to `FIGURE_GRID_SPAN x_c`.
pub fn figure_grid(x_c: f64) -> Result<Vec<f64>> {
    geometric_grid(x_c, FIGURE_GRID_SPAN * x_c, FIGURE_GRID_POINTS)
}
