//! Equilibrium-conserving taxation of capital income.
//!
//! Incomes split into two equilibrium classes: an exponential (Boltzmann–Gibbs)
//! labor class below the crossover `x_c` and a Pareto capital class above it.
//! This crate computes the tax map that carries the Pareto(γ) capital
//! distribution onto another Pareto(η) distribution while raising a chosen
//! revenue, estimates the model parameters from data, and checks every
//! closed form against quadrature, Monte-Carlo and agent-based oracles.
//!
//! All money is in EUR internally; see [`units`] for the k€/G€ edges.

pub mod distributions;
pub mod economy;
pub mod error;
pub mod estimate;
pub mod io;
pub mod policy;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod stats;
pub mod units;

pub use distributions::{CapitalModel, LaborModel, TailStats};
pub use economy::{
    capital_from_gamma, capital_share_estimate, evasion_gap, gamma_from_capital, mean_labor,
    CapitalEstimates, CapitalSource, EconomySnapshot,
};
pub use error::{Error, Result};
pub use estimate::{
    fit_boltzmann_binned, fit_boltzmann_binned_with, fit_pareto_tail, fit_pareto_tail_with,
    hill_estimator, BoltzmannFit, FitOptions, GoodnessOfFit, ParetoFit, TailData,
};
pub use io::{BinRow, BinTable, Scenario};
pub use policy::{
    build_policy, flat_tax_alpha, post_tax_exponent, post_tax_income, poverty_gap, revenue,
    schedule_table, tau_parameter, tax_rate, FlatTax, ScheduleRow, TaxPolicy,
};
pub use simulator::{
    drift_for_tail_exponent, simulate_additive_exchange, simulate_multiplicative, simulate_tax_mc,
    ExchangeConfig, SimReport, TaxMcReport,
};
