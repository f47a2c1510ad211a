//! The two equilibrium income families.
//!
//! [`LaborModel`] is the Boltzmann–Gibbs (exponential) law of the additive,
//! wage-earning class; [`CapitalModel`] is the Pareto law of the
//! multiplicative, capital-earning class above the crossover `x_c`. Both are
//! person-densities: they integrate to the class head count, not to one.
//!
//! Samplers use inverse-CDF transforms on a seeded [`StreamRng`], so a given
//! seed always reproduces the same draws.

use rand::Rng;

use crate::error::{domain, Result};
use crate::rng::{open_unit, stream};

/// Exponential income law `f(x) = (n_lab / x̄) exp(-x / x̄)` on `[0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaborModel {
    x_bar: f64,
    n_lab: f64,
}

impl LaborModel {
    pub fn new(x_bar: f64, n_lab: f64) -> Result<Self> {
        if !(x_bar > 0.0 && x_bar.is_finite()) {
            return Err(domain(format!(
                "mean income x_bar must be positive, got {x_bar}"
            )));
        }
        if !(n_lab >= 0.0 && n_lab.is_finite()) {
            return Err(domain(format!(
                "head count n_lab must be non-negative, got {n_lab}"
            )));
        }
        Ok(Self { x_bar, n_lab })
    }

    /// Mean income of the class (the "temperature").
    pub fn x_bar(&self) -> f64 {
        self.x_bar
    }

    pub fn n_lab(&self) -> f64 {
        self.n_lab
    }

    /// Persons per EUR at income `x`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("income must be non-negative, got {x}")));
        }
        Ok(self.n_lab / self.x_bar * (-x / self.x_bar).exp())
    }

    /// Normalized cumulative distribution; zero below the origin.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x / self.x_bar).exp_m1()
        }
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(domain(format!(
                "quantile level must lie in [0, 1), got {q}"
            )));
        }
        Ok(-self.x_bar * (-q).ln_1p())
    }

    /// Total income of the class, `n_lab * x̄`.
    pub fn total_income(&self) -> f64 {
        self.n_lab * self.x_bar
    }

    /// The law of `alpha * x` when `x` follows this model (a flat tax at rate `1 - alpha`).
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(domain(format!(
                "scale factor must be positive, got {alpha}"
            )));
        }
        Self::new(alpha * self.x_bar, self.n_lab)
    }

    /// `n` i.i.d. draws from the normalized law.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(&mut stream(seed), n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| -self.x_bar * open_unit(rng).ln()).collect()
    }
}

/// Pareto income law `f(x) = ((γ-1) n_cap / x_c) (x / x_c)^{-γ}` on `[x_c, ∞)`.
///
/// The exponent must exceed 2 so that the class has finite total income.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapitalModel {
    gamma: f64,
    x_c: f64,
    n_cap: f64,
}

impl CapitalModel {
    pub fn new(gamma: f64, x_c: f64, n_cap: f64) -> Result<Self> {
        if !(gamma > 2.0 && gamma.is_finite()) {
            return Err(domain(format!(
                "Pareto exponent must exceed 2 for finite capital income, got {gamma}"
            )));
        }
        if !(x_c > 0.0 && x_c.is_finite()) {
            return Err(domain(format!("threshold x_c must be positive, got {x_c}")));
        }
        if !(n_cap >= 0.0 && n_cap.is_finite()) {
            return Err(domain(format!(
                "head count n_cap must be non-negative, got {n_cap}"
            )));
        }
        Ok(Self { gamma, x_c, n_cap })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn x_c(&self) -> f64 {
        self.x_c
    }

    pub fn n_cap(&self) -> f64 {
        self.n_cap
    }

    /// Persons per EUR at income `x >= x_c`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if !(x >= self.x_c) {
            return Err(domain(format!(
                "income {x} lies below the Pareto threshold {}",
                self.x_c
            )));
        }
        Ok((self.gamma - 1.0) * self.n_cap / self.x_c * (x / self.x_c).powf(-self.gamma))
    }

    pub fn tail_stats(&self) -> TailStats {
        TailStats {
            model: *self,
            total_income: self.n_cap * self.x_c * (self.gamma - 1.0) / (self.gamma - 2.0),
        }
    }

    /// `n` i.i.d. draws; every draw is at least `x_c`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        self.sample_with(&mut stream(seed), n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let inv = -1.0 / (self.gamma - 1.0);
        (0..n)
            .map(|_| (self.x_c * open_unit(rng).powf(inv)).max(self.x_c))
            .collect()
    }
}

/// Closed-form tail statistics of a [`CapitalModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailStats {
    model: CapitalModel,
    /// Total income of the class, `n_cap x_c (γ-1)/(γ-2)`.
    pub total_income: f64,
}

impl TailStats {
    /// `1 - (x/x_c)^{1-γ}`, zero at and below the threshold.
    pub fn cdf(&self, x: f64) -> f64 {
        let m = &self.model;
        if x <= m.x_c {
            0.0
        } else {
            -((1.0 - m.gamma) * (x / m.x_c).ln()).exp_m1()
        }
    }

    /// Survival function `(x/x_c)^{1-γ}`; accurate deep in the tail where `1 - cdf` is not.
    pub fn survival(&self, x: f64) -> f64 {
        let m = &self.model;
        if x <= m.x_c {
            1.0
        } else {
            (x / m.x_c).powf(1.0 - m.gamma)
        }
    }

    /// `x_c (1-q)^{1/(1-γ)}` for `q` in `[0, 1)`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(domain(format!(
                "quantile level must lie in [0, 1), got {q}"
            )));
        }
        let m = &self.model;
        Ok(m.x_c * ((-q).ln_1p() / (1.0 - m.gamma)).exp())
    }
}
