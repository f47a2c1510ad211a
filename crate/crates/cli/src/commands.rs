use std::fmt::Write as _;
use std::path::Path;

use eqtax_core::capital_from_gamma;
use eqtax_core::economy::{capital_share_estimate, EconomySnapshot};
use eqtax_core::estimate::{
    fit_boltzmann_binned_with, fit_pareto_tail_with, FitOptions, GoodnessOfFit, TailData,
};
use eqtax_core::io::{
    emit_histogram_csv, emit_schedule_csv, parse_bins_csv, parse_scenario, Scenario,
};
use eqtax_core::policy::{
    build_policy, figure_grid, flat_tax_alpha, geometric_grid, poverty_gap,
    poverty_gap_by_quadrature, schedule_table, TaxPolicy,
};
use eqtax_core::simulator::{
    drift_for_tail_exponent, simulate_additive_exchange, simulate_multiplicative, simulate_tax_mc,
    ExchangeConfig, SimReport,
};
use eqtax_core::stats::ks_critical_value;
use eqtax_core::units::{eur_to_geur, eur_to_keur, geur_to_eur, keur_to_eur};

use crate::output::{read, sig, Emitter, ParamTable};
use crate::{
    Cli, CliError, Command, CommandOutcome, ExchangeArgs, FitArgs, Grid, Model, PolicyArgs,
    ScheduleArgs, SimulateTaxArgs,
};

/// Quoted rate-curve exponent and incomes reported by `report`.
const FIGURE_TAU: f64 = 0.85;
const REPORT_INCOMES_KEUR: [f64; 3] = [120.0, 200.0, 500.0];
const REPORT_SHARES: [f64; 3] = [0.25, 0.26, 0.30];

struct Produced {
    summary: String,
    /// Main table for `--csv`.
    table: String,
}

pub fn execute(cli: &Cli) -> Result<CommandOutcome, CliError> {
    let mut out = Emitter::new(&cli.out)?;
    let produced = match &cli.command {
        Command::Fit(a) => fit(a, &mut out)?,
        Command::Gamma(a) => gamma(&a.scenario, &mut out)?,
        Command::Schedule(a) => schedule(a, &mut out)?,
        Command::Revenue(a) => revenue(a, &mut out)?,
        Command::SimulateTax(a) => simulate_tax(a, &mut out)?,
        Command::SimulateExchange(a) => simulate_exchange(a, &mut out)?,
        Command::Report(a) => report(a, &mut out)?,
    };
    Ok(CommandOutcome {
        exit_code: 0,
        emitted_files: out.files,
        summary: produced.summary,
        csv: cli.csv.then_some(produced.table),
    })
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    parse_scenario(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// How the levy was chosen.
enum LevySource {
    Flag,
    Scenario,
    PovertyGap,
}

impl LevySource {
    fn describe(&self) -> &'static str {
        match self {
            LevySource::Flag => "command line",
            LevySource::Scenario => "scenario file",
            LevySource::PovertyGap => "poverty gap",
        }
    }
}

fn resolve_policy(
    args: &PolicyArgs,
    scenario: &Scenario,
    snapshot: &EconomySnapshot,
) -> Result<(TaxPolicy, LevySource), CliError> {
    if let Some(d) = args.delta_m_geur {
        return Ok((build_policy(snapshot, geur_to_eur(d))?, LevySource::Flag));
    }
    if let Some(t) = args.tau {
        return Ok((TaxPolicy::from_tau(snapshot, t)?, LevySource::Flag));
    }
    if let Some(d) = scenario.delta_m {
        return Ok((build_policy(snapshot, d)?, LevySource::Scenario));
    }
    if let Some(t) = scenario.tau_override {
        return Ok((TaxPolicy::from_tau(snapshot, t)?, LevySource::Scenario));
    }
    let gap = poverty_gap(snapshot.x_pov(), snapshot.x_bar()?, snapshot.m_lab())?;
    Ok((build_policy(snapshot, gap)?, LevySource::PovertyGap))
}

fn capital_source(scenario: &Scenario) -> String {
    match (scenario.m_cap, scenario.capital_share) {
        (Some(_), _) => "declared".into(),
        (None, Some(s)) => format!("capital share {s}"),
        (None, None) => format!(
            "default capital share {}",
            eqtax_core::economy::DEFAULT_CAPITAL_SHARE
        ),
    }
}

fn economy_params(t: &mut ParamTable, s: &EconomySnapshot) -> Result<(), CliError> {
    t.push("n_tot", s.n_tot(), "persons")
        .push("n_lab", s.n_lab(), "persons")
        .push("n_cap", s.n_cap(), "persons")
        .push("m_lab", eur_to_geur(s.m_lab()), "GEUR")
        .push("m_cap", eur_to_geur(s.m_cap().unwrap_or(f64::NAN)), "GEUR")
        .push("x_pov", eur_to_keur(s.x_pov()), "kEUR")
        .push("x_c", eur_to_keur(s.x_c()), "kEUR")
        .push("x_bar", eur_to_keur(s.x_bar()?), "kEUR")
        .push("crossover_ratio", s.crossover_ratio()?, "1")
        .push("gamma", s.gamma()?, "1")
        .push("max_delta_m", eur_to_geur(s.max_levy()?), "GEUR");
    Ok(())
}

fn policy_params(t: &mut ParamTable, p: &TaxPolicy, s: &EconomySnapshot) -> Result<(), CliError> {
    t.push("delta_m", eur_to_geur(p.delta_m()), "GEUR")
        .push("eta", p.eta(), "1")
        .push("tau", p.tau(), "1")
        .push(
            "feasibility_margin",
            eur_to_geur(p.feasibility_margin()),
            "GEUR",
        )
        .push("average_rate", p.average_rate(), "1")
        .push("alpha", flat_tax_alpha(p.delta_m(), s.m_lab())?, "1");
    Ok(())
}

fn warnings(snapshot: &EconomySnapshot) -> String {
    snapshot
        .warnings()
        .iter()
        .map(|w| format!("warning: {w}\n"))
        .collect()
}

fn titled(title: String, headline: String, params: &ParamTable) -> String {
    format!("{title}\n{headline}\n{}", params.to_summary())
}

fn grid_points(grid: Option<Grid>, x_c: f64) -> Result<Vec<f64>, CliError> {
    Ok(match grid {
        Some(g) => geometric_grid(keur_to_eur(g.lo_keur), keur_to_eur(g.hi_keur), g.n)?,
        None => figure_grid(x_c)?,
    })
}

fn gof_params(t: &mut ParamTable, prefix: &str, g: &GoodnessOfFit) {
    t.push(format!("{prefix}_ks"), g.ks, "1").push(
        format!("{prefix}_ks_critical_1pct"),
        g.critical,
        "1",
    );
    if let Some(p) = g.p_value {
        t.push(format!("{prefix}_p_value"), p, "1");
    }
}

// ---------------------------------------------------------------------------

fn fit(a: &FitArgs, out: &mut Emitter) -> Result<Produced, CliError> {
    let bins = parse_bins_csv(&read(&a.bins)?)
        .map_err(|e| CliError::Input(format!("{}: {e}", a.bins.display())))?;
    let (x_pov, x_c) = (keur_to_eur(a.x_pov_keur), keur_to_eur(a.x_c_keur));
    let opts = a.seed.map(FitOptions::bootstrap).unwrap_or_default();
    let labor = fit_boltzmann_binned_with(&bins, x_pov, x_c, opts)?;
    let tail = fit_pareto_tail_with(TailData::Binned(&bins), x_c, opts)?;
    let n_cap: f64 = bins
        .rows()
        .iter()
        .filter(|r| r.lo >= x_c)
        .map(|r| r.count)
        .sum();
    let m_cap = capital_from_gamma(tail.gamma_hat, n_cap, x_c)?;

    let mut t = ParamTable::default();
    t.push("x_pov", a.x_pov_keur, "kEUR")
        .push("x_c", a.x_c_keur, "kEUR")
        .push("x_bar_hat", eur_to_keur(labor.x_bar_hat), "kEUR")
        .push("n_lab_hat", labor.n_lab_hat, "persons");
    gof_params(&mut t, "labor", &labor.gof);
    t.push("gamma_hat", tail.gamma_hat, "1")
        .push("gamma_stderr", tail.stderr, "1")
        .push("n_cap", n_cap, "persons")
        .push("m_cap_implied", eur_to_geur(m_cap), "GEUR");
    gof_params(&mut t, "tail", &tail.gof);
    if let Some(seed) = a.seed {
        t.push("seed", seed as f64, "1");
    }
    let csv = t.to_csv();
    out.write("fit_params.csv", &csv)?;

    let mut headline = format!(
        "x̄ = {} k€, γ = {} ± {}, implied M_cap = {} G€",
        sig(eur_to_keur(labor.x_bar_hat), 6),
        sig(tail.gamma_hat, 6),
        sig(tail.stderr, 2),
        sig(eur_to_geur(m_cap), 4)
    );
    for (name, g) in [("exponential", &labor.gof), ("Pareto", &tail.gof)] {
        if g.rejected() {
            let _ = write!(
                headline,
                "\nwarning: the {name} fit is rejected at the 1% level"
            );
        }
    }
    Ok(Produced {
        summary: titled(format!("fit: {}", a.bins.display()), headline, &t),
        table: csv,
    })
}

fn gamma(path: &Path, out: &mut Emitter) -> Result<Produced, CliError> {
    let scenario = load_scenario(path)?;
    let snapshot = scenario.snapshot()?;
    let mut t = ParamTable::default();
    economy_params(&mut t, &snapshot)?;
    let csv = t.to_csv();
    out.write("gamma_params.csv", &csv)?;
    let headline = format!(
        "γ = {:.5}  (M_cap {} G€, {})\n{}",
        snapshot.gamma()?,
        sig(t.get("m_cap").unwrap_or(f64::NAN), 6),
        capital_source(&scenario),
        warnings(&snapshot)
    );
    Ok(Produced {
        summary: titled(format!("gamma: {}", path.display()), headline, &t),
        table: csv,
    })
}

fn schedule(a: &ScheduleArgs, out: &mut Emitter) -> Result<Produced, CliError> {
    let scenario = load_scenario(&a.policy.scenario.scenario)?;
    let snapshot = scenario.snapshot()?;
    let (policy, source) = resolve_policy(&a.policy, &scenario, &snapshot)?;
    let rows = schedule_table(&policy, &grid_points(a.grid, snapshot.x_c())?)?;
    let table = emit_schedule_csv(&rows);
    out.write("schedule.csv", &table)?;

    let mut t = ParamTable::default();
    t.push("gamma", policy.gamma(), "1");
    policy_params(&mut t, &policy, &snapshot)?;
    t.push("grid_points", rows.len() as f64, "1");
    out.write("schedule_params.csv", &t.to_csv())?;

    let headline = format!(
        "η = {:.4}, τ = {:.4}  (ΔM {} G€ from {})\n{}",
        policy.eta(),
        policy.tau(),
        sig(eur_to_geur(policy.delta_m()), 6),
        source.describe(),
        warnings(&snapshot)
    );
    Ok(Produced {
        summary: titled(
            format!("schedule: {}", a.policy.scenario.scenario.display()),
            headline,
            &t,
        ),
        table,
    })
}

fn revenue(a: &PolicyArgs, out: &mut Emitter) -> Result<Produced, CliError> {
    let scenario = load_scenario(&a.scenario.scenario)?;
    let snapshot = scenario.snapshot()?;
    let labor = snapshot.labor_model()?;
    let gap = poverty_gap(snapshot.x_pov(), labor.x_bar(), snapshot.m_lab())?;
    let gap_quad = poverty_gap_by_quadrature(snapshot.x_pov(), &labor)?;
    let (policy, source) = resolve_policy(a, &scenario, &snapshot)?;
    let closed = policy.revenue()?;
    let quad = policy.revenue_by_quadrature()?;

    let mut t = ParamTable::default();
    t.push("gamma", policy.gamma(), "1")
        .push("poverty_gap", eur_to_geur(gap), "GEUR")
        .push("poverty_gap_quadrature", eur_to_geur(gap_quad), "GEUR");
    policy_params(&mut t, &policy, &snapshot)?;
    t.push("max_delta_m", eur_to_geur(snapshot.max_levy()?), "GEUR")
        .push("revenue_closed_form", eur_to_geur(closed), "GEUR")
        .push("revenue_quadrature", eur_to_geur(quad), "GEUR")
        .push(
            "levy_minus_poverty_gap",
            eur_to_geur(policy.delta_m() - gap),
            "GEUR",
        );
    let csv = t.to_csv();
    out.write("revenue_params.csv", &csv)?;

    let covers = if policy.delta_m() >= gap {
        "covers"
    } else {
        "falls short of"
    };
    let headline = format!(
        "ΔM = {} G€ (from {}) {covers} the poverty gap of {} G€; revenue check {} G€\n{}",
        sig(eur_to_geur(policy.delta_m()), 6),
        source.describe(),
        sig(eur_to_geur(gap), 6),
        sig(eur_to_geur(closed), 6),
        warnings(&snapshot)
    );
    Ok(Produced {
        summary: titled(
            format!("revenue: {}", a.scenario.scenario.display()),
            headline,
            &t,
        ),
        table: csv,
    })
}

fn histogram_csv(r: &SimReport, lo: f64, hi: f64, width: f64) -> Result<String, CliError> {
    Ok(emit_histogram_csv(&r.histogram(lo, hi, width)?))
}

fn simulate_tax(a: &SimulateTaxArgs, out: &mut Emitter) -> Result<Produced, CliError> {
    let scenario = load_scenario(&a.policy.scenario.scenario)?;
    let snapshot = scenario.snapshot()?;
    let (policy, _) = resolve_policy(&a.policy, &scenario, &snapshot)?;
    let x_c = snapshot.x_c();
    let mc = simulate_tax_mc(a.n, policy.gamma(), x_c, policy.tau(), a.seed)?;
    let table = histogram_csv(&mc.report, x_c, 10.0 * x_c, 1e3)?;
    out.write("simulate-tax_histogram.csv", &table)?;

    let eta_se = (policy.eta() - 1.0) / (a.n as f64).sqrt();
    let mut t = ParamTable::default();
    t.push("n", a.n as f64, "draws")
        .push("seed", a.seed as f64, "1")
        .push("gamma", policy.gamma(), "1")
        .push("tau", policy.tau(), "1")
        .push("eta", policy.eta(), "1")
        .push("eta_hat", mc.report.fitted_param, "1")
        .push("eta_stderr", eta_se, "1")
        .push("ks_vs_eta", mc.report.ks_stat, "1")
        .push("ks_critical_1pct", ks_critical_value(0.01, a.n), "1")
        .push("tax_per_capita", eur_to_keur(mc.per_capita_tax()), "kEUR")
        .push(
            "tax_per_capita_closed_form",
            eur_to_keur(mc.expected_per_capita_tax()),
            "kEUR",
        )
        .push(
            "tax_per_capita_stderr",
            eur_to_keur(mc.per_capita_stderr),
            "kEUR",
        );
    out.write("simulate-tax_params.csv", &t.to_csv())?;

    let headline = format!(
        "η̂ = {:.4} vs η = {:.4} (±{}); tax per capita {} k€ vs {} k€",
        mc.report.fitted_param,
        policy.eta(),
        sig(eta_se, 2),
        sig(eur_to_keur(mc.per_capita_tax()), 4),
        sig(eur_to_keur(mc.expected_per_capita_tax()), 4)
    );
    Ok(Produced {
        summary: titled("simulate-tax".into(), headline, &t),
        table,
    })
}

fn simulate_exchange(a: &ExchangeArgs, out: &mut Emitter) -> Result<Produced, CliError> {
    let per_agent = match a.model {
        Model::Additive => 1_000,
        Model::Multiplicative => 2_000,
    };
    let steps = a.steps.unwrap_or(a.agents as u64 * per_agent);
    let mut cfg = ExchangeConfig {
        n_agents: a.agents,
        steps,
        exchange_fraction: a.fraction,
        seed: a.seed,
        ..Default::default()
    };
    let mut t = ParamTable::default();
    t.push("agents", a.agents as f64, "1")
        .push("steps", steps as f64, "events")
        .push("seed", a.seed as f64, "1");
    let (report, table, headline) = match a.model {
        Model::Additive => {
            let mean = keur_to_eur(a.mean_keur);
            let r = simulate_additive_exchange(&cfg, mean)?;
            let table = histogram_csv(&r, 0.0, 10.0 * mean, mean / 10.0)?;
            t.push("fraction", a.fraction, "1")
                .push("mean_target", a.mean_keur, "kEUR")
                .push("mean_fitted", eur_to_keur(r.fitted_param), "kEUR")
                .push("ledger_total", r.ledger_total.unwrap_or(0) as f64, "units");
            let headline = format!(
                "additive: fitted mean {} k€ vs {} k€",
                sig(eur_to_keur(r.fitted_param), 6),
                sig(a.mean_keur, 6)
            );
            (r, table, headline)
        }
        Model::Multiplicative => {
            cfg.volatility = a.volatility;
            cfg.drift = drift_for_tail_exponent(a.gamma_target, a.volatility);
            cfg.barrier = keur_to_eur(a.barrier_keur);
            let r = simulate_multiplicative(&cfg)?;
            let table = histogram_csv(&r, cfg.barrier, 20.0 * cfg.barrier, cfg.barrier / 100.0)?;
            t.push("volatility", a.volatility, "1")
                .push("drift", cfg.drift, "1")
                .push("barrier", a.barrier_keur, "kEUR")
                .push("gamma_target", a.gamma_target, "1")
                .push("gamma_hill", r.fitted_param, "1");
            let headline = format!(
                "multiplicative: Hill exponent {:.4} vs target {}",
                r.fitted_param, a.gamma_target
            );
            (r, table, headline)
        }
    };
    t.push("ks", report.ks_stat, "1").push(
        "converged",
        if report.converged { 1.0 } else { 0.0 },
        "1",
    );
    out.write("simulate-exchange_histogram.csv", &table)?;
    let mut trace = String::from("step,fitted_param\n");
    for (step, v) in &report.trace {
        let _ = writeln!(trace, "{step},{v}");
    }
    out.write("simulate-exchange_trace.csv", &trace)?;
    out.write("simulate-exchange_params.csv", &t.to_csv())?;
    Ok(Produced {
        summary: titled("simulate-exchange".into(), headline, &t),
        table,
    })
}

fn report(a: &ScheduleArgs, out: &mut Emitter) -> Result<Produced, CliError> {
    let path = &a.policy.scenario.scenario;
    let scenario = load_scenario(path)?;
    let snapshot = scenario.snapshot()?;
    let (policy, source) = resolve_policy(&a.policy, &scenario, &snapshot)?;
    let gap = poverty_gap(snapshot.x_pov(), snapshot.x_bar()?, snapshot.m_lab())?;
    let grid = grid_points(a.grid, snapshot.x_c())?;

    let mut t = ParamTable::default();
    economy_params(&mut t, &snapshot)?;
    for s in REPORT_SHARES {
        let m = capital_share_estimate(snapshot.m_lab(), s)?;
        t.push(format!("m_cap_share_{s}"), eur_to_geur(m), "GEUR");
    }
    if let Some(m) = scenario.m_cap {
        t.push("m_cap_declared", eur_to_geur(m), "GEUR");
    }
    t.push("poverty_gap", eur_to_geur(gap), "GEUR");
    policy_params(&mut t, &policy, &snapshot)?;
    let figure = TaxPolicy::from_tau(&snapshot, FIGURE_TAU)?;
    for x in REPORT_INCOMES_KEUR {
        t.push(format!("rate_{x}k"), policy.tax_rate(keur_to_eur(x))?, "1");
    }
    for x in REPORT_INCOMES_KEUR {
        t.push(
            format!("rate_{x}k_tau_{FIGURE_TAU}"),
            figure.tax_rate(keur_to_eur(x))?,
            "1",
        );
    }
    out.write("report_params.csv", &t.to_csv())?;
    let table = emit_schedule_csv(&schedule_table(&policy, &grid)?);
    out.write("report_schedule.csv", &table)?;
    out.write(
        "report_schedule_tau_0.85.csv",
        &emit_schedule_csv(&schedule_table(&figure, &grid)?),
    )?;

    let mut headline = String::new();
    let _ = writeln!(
        headline,
        "γ = {:.5} from M_cap = {} G€ ({})",
        policy.gamma(),
        sig(eur_to_geur(policy.m_cap()), 6),
        capital_source(&scenario)
    );
    let _ = writeln!(
        headline,
        "poverty gap = {} G€; flat labor tax α = {:.4}",
        sig(eur_to_geur(gap), 4),
        flat_tax_alpha(policy.delta_m(), snapshot.m_lab())?
    );
    let _ = writeln!(
        headline,
        "ΔM = {} G€ ({}): η = {:.4}, τ = {:.4}",
        sig(eur_to_geur(policy.delta_m()), 6),
        source.describe(),
        policy.eta(),
        policy.tau()
    );
    let rates: Vec<String> = REPORT_INCOMES_KEUR
        .iter()
        .map(|&x| {
            figure
                .tax_rate(keur_to_eur(x))
                .map(|r| format!("T({x} k€) = {:.3}%", 100.0 * r))
        })
        .collect::<Result<_, _>>()?;
    let _ = write!(
        headline,
        "τ = {FIGURE_TAU}: {}\n{}",
        rates.join(", "),
        warnings(&snapshot)
    );
    Ok(Produced {
        summary: titled(format!("report: {}", path.display()), headline, &t),
        table,
    })
}
