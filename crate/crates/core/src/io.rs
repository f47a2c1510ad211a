//! Text formats: binned income tables, scenario files and report CSVs.
//!
//! Money is written in k€ in every external file and converted to EUR on
//! the way in. Parsers reject malformed input with a line and column rather
//! than repairing it. Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;

use crate::distributions::LaborModel;
use crate::economy::{capital_share_estimate, EconomySnapshot, DEFAULT_CAPITAL_SHARE};
use crate::error::{Error, Result};
use crate::policy::ScheduleRow;
use crate::units::{eur_to_keur, geur_to_eur, keur_to_eur};

pub const BINS_HEADER: &str = "income_keur_lo,income_keur_hi,count";
pub const HISTOGRAM_HEADER: &str = "wealth_keur_lo,wealth_keur_hi,count";
pub const SCHEDULE_HEADER: &str = "income_keur,tax_rate,post_tax_keur";

/// One histogram bin `[lo, hi)` in EUR with a non-negative (possibly fractional) count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinRow {
    pub lo: f64,
    pub hi: f64,
    pub count: f64,
}

impl BinRow {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Sorted, non-overlapping income bins. Gaps between rows are allowed and
/// read as empty bins.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BinTable {
    rows: Vec<BinRow>,
}

impl BinTable {
    pub fn new(rows: Vec<BinRow>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo < r.hi) {
                return Err(Error::Validation(format!(
                    "bin {i}: lower edge {} must be below upper edge {}",
                    r.lo, r.hi
                )));
            }
            if !(r.count >= 0.0 && r.count.is_finite()) {
                return Err(Error::Validation(format!(
                    "bin {i}: count must be non-negative, got {}",
                    r.count
                )));
            }
        }
        if let Some(i) = rows.windows(2).position(|w| w[1].lo < w[0].hi) {
            return Err(Error::Validation(format!(
                "bins {} and {} are unsorted or overlap",
                i,
                i + 1
            )));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[BinRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when every bin starts where the previous one ends.
    pub fn is_contiguous(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].hi == w[1].lo)
    }

    pub fn total_count(&self) -> f64 {
        self.rows.iter().map(|r| r.count).sum()
    }

    /// Counts `values` into the bins delimited by the ascending `edges`;
    /// values outside `[edges[0], edges[last])` are dropped.
    pub fn histogram(values: &[f64], edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Validation(
                "a histogram needs at least two edges".into(),
            ));
        }
        let mut counts = vec![0.0; edges.len() - 1];
        for &v in values {
            if v < edges[0] || !(v < edges[edges.len() - 1]) {
                continue;
            }
            // index of the last edge <= v
            let k = edges.partition_point(|&e| e <= v) - 1;
            counts[k] += 1.0;
        }
        Self::new(
            edges
                .windows(2)
                .zip(counts)
                .map(|(w, count)| BinRow {
                    lo: w[0],
                    hi: w[1],
                    count,
                })
                .collect(),
        )
    }

    /// Like [`BinTable::histogram`] but keeps only non-empty bins, for heavy tails
    /// where most of a fine grid is empty. Uses edges `lo + k * width`.
    pub fn sparse_histogram(values: &[f64], lo: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && lo.is_finite()) {
            return Err(Error::Validation(format!(
                "sparse histogram needs a finite origin and positive width, got {lo}, {width}"
            )));
        }
        let mut keys: Vec<u64> = values
            .iter()
            .filter(|&&v| v >= lo && v.is_finite())
            .map(|&v| ((v - lo) / width).floor() as u64)
            .collect();
        keys.sort_unstable();
        let mut rows: Vec<BinRow> = Vec::new();
        for k in keys {
            let edge = lo + k as f64 * width;
            match rows.last_mut() {
                Some(r) if r.lo == edge => r.count += 1.0,
                _ => rows.push(BinRow {
                    lo: edge,
                    hi: lo + (k + 1) as f64 * width,
                    count: 1.0,
                }),
            }
        }
        Self::new(rows)
    }

    /// Expected counts of an exponential law over `[lo, hi)` in bins of `width`.
    pub fn from_labor_model(model: &LaborModel, lo: f64, hi: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && lo >= 0.0 && hi > lo) {
            return Err(Error::Validation(format!(
                "synthetic bins need 0 <= lo < hi and width > 0, got {lo}, {hi}, {width}"
            )));
        }
        let n = ((hi - lo) / width).round() as usize;
        let rows = (0..n)
            .map(|k| {
                let a = lo + k as f64 * width;
                let b = lo + (k + 1) as f64 * width;
                BinRow {
                    lo: a,
                    hi: b,
                    count: model.n_lab() * (model.cdf(b) - model.cdf(a)),
                }
            })
            .collect();
        Self::new(rows)
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
        }
    }
}

impl<'a> Iterator for Lines<'a> {
    /// (1-based line number, line with any trailing CR removed)
    type Item = (usize, &'a str);

    fn next(&mut self) -> Option<Self::Item> {
        for (i, line) in self.inner.by_ref() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((i + 1, line));
        }
        None
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Splits a CSV line into trimmed fields tagged with their 1-based column.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in line.split(',') {
        let lead = part.len() - part.trim_start().len();
        out.push((start + lead + 1, part.trim()));
        start += part.len() + 1;
    }
    out
}

fn parse_number(lineno: usize, column: usize, text: &str, what: &str) -> Result<f64> {
    let v: f64 = text
        .parse()
        .map_err(|_| parse_err(lineno, column, format!("{what}: '{text}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(
            lineno,
            column,
            format!("{what}: '{text}' is not finite"),
        ));
    }
    Ok(v)
}

fn expect_header(lines: &mut Lines<'_>, header: &str) -> Result<()> {
    match lines.next() {
        None => Err(parse_err(1, 1, format!("missing header '{header}'"))),
        Some((n, line)) => {
            let got: Vec<&str> = fields(line).into_iter().map(|(_, f)| f).collect();
            let want: Vec<&str> = header.split(',').collect();
            if got != want {
                Err(parse_err(
                    n,
                    1,
                    format!("expected header '{header}', found '{line}'"),
                ))
            } else {
                Ok(())
            }
        }
    }
}

fn parse_bin_rows(text: &str, header: &str) -> Result<BinTable> {
    let mut lines = Lines::new(text);
    expect_header(&mut lines, header)?;
    let mut rows: Vec<BinRow> = Vec::new();
    for (n, line) in lines {
        let f = fields(line);
        if f.len() != 3 {
            return Err(parse_err(
                n,
                1,
                format!("expected 3 fields, found {}", f.len()),
            ));
        }
        let lo = parse_number(n, f[0].0, f[0].1, "lower edge")?;
        let hi = parse_number(n, f[1].0, f[1].1, "upper edge")?;
        let count = parse_number(n, f[2].0, f[2].1, "count")?;
        if !(lo < hi) {
            return Err(parse_err(
                n,
                f[1].0,
                format!("upper edge {hi} must exceed lower edge {lo}"),
            ));
        }
        if count < 0.0 {
            return Err(parse_err(n, f[2].0, format!("negative count {count}")));
        }
        let row = BinRow {
            lo: keur_to_eur(lo),
            hi: keur_to_eur(hi),
            count,
        };
        if let Some(prev) = rows.last() {
            if row.lo < prev.hi {
                return Err(Error::Validation(format!(
                    "line {n}: bin starting at {lo} k€ is unsorted or overlaps the previous bin"
                )));
            }
        }
        rows.push(row);
    }
    BinTable::new(rows)
}

fn emit_bin_rows(table: &BinTable, header: &str) -> String {
    let mut out = String::with_capacity(32 * (table.len() + 1));
    out.push_str(header);
    out.push('\n');
    for r in table.rows() {
        let _ = writeln!(
            out,
            "{},{},{}",
            eur_to_keur(r.lo),
            eur_to_keur(r.hi),
            r.count
        );
    }
    out
}

/// Parses `income_keur_lo,income_keur_hi,count` text.
pub fn parse_bins_csv(text: &str) -> Result<BinTable> {
    parse_bin_rows(text, BINS_HEADER)
}

pub fn emit_bins_csv(table: &BinTable) -> String {
    emit_bin_rows(table, BINS_HEADER)
}

/// Parses simulator histogram text (`wealth_keur_lo,wealth_keur_hi,count`).
pub fn parse_histogram_csv(text: &str) -> Result<BinTable> {
    parse_bin_rows(text, HISTOGRAM_HEADER)
}

pub fn emit_histogram_csv(table: &BinTable) -> String {
    emit_bin_rows(table, HISTOGRAM_HEADER)
}

/// Writes a schedule as `income_keur,tax_rate,post_tax_keur`: incomes in
/// shortest round-trip form, rates with six decimals, post-tax income to
/// the euro.
pub fn emit_schedule_csv(rows: &[ScheduleRow]) -> String {
    let mut out = String::with_capacity(40 * (rows.len() + 1));
    out.push_str(SCHEDULE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.3}",
            eur_to_keur(r.income),
            // normalizes -0.0 at the threshold
            r.rate + 0.0,
            eur_to_keur(r.post_tax_income)
        );
    }
    out
}

/// Reads back a schedule CSV (values in EUR).
pub fn parse_schedule_csv(text: &str) -> Result<Vec<ScheduleRow>> {
    let mut lines = Lines::new(text);
    expect_header(&mut lines, SCHEDULE_HEADER)?;
    lines
        .map(|(n, line)| {
            let f = fields(line);
            if f.len() != 3 {
                return Err(parse_err(
                    n,
                    1,
                    format!("expected 3 fields, found {}", f.len()),
                ));
            }
            Ok(ScheduleRow {
                income: keur_to_eur(parse_number(n, f[0].0, f[0].1, "income")?),
                rate: parse_number(n, f[1].0, f[1].1, "tax rate")?,
                post_tax_income: keur_to_eur(parse_number(n, f[2].0, f[2].1, "post-tax income")?),
            })
        })
        .collect()
}

/// A policy scenario: aggregate economy plus optional policy choices.
/// Money fields are in EUR.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n_tot: Option<f64>,
    pub n_lab: f64,
    pub n_cap: f64,
    pub m_lab: f64,
    pub m_cap: Option<f64>,
    pub capital_share: Option<f64>,
    pub x_pov: f64,
    pub x_c: f64,
    pub delta_m: Option<f64>,
    pub tau_override: Option<f64>,
    pub seed: Option<u64>,
}

pub const REQUIRED_SCENARIO_KEYS: [&str; 5] =
    ["n_lab", "n_cap", "m_lab_geur", "x_pov_keur", "x_c_keur"];
pub const OPTIONAL_SCENARIO_KEYS: [&str; 6] = [
    "n_tot",
    "m_cap_geur",
    "capital_share",
    "delta_m_geur",
    "tau",
    "seed",
];

impl Scenario {
    /// Snapshot with the capital mass resolved: declared, else share-estimated
    /// (falling back to [`DEFAULT_CAPITAL_SHARE`]).
    pub fn snapshot(&self) -> Result<EconomySnapshot> {
        let m_cap = match (self.m_cap, self.capital_share) {
            (Some(m), _) => m,
            (None, share) => {
                capital_share_estimate(self.m_lab, share.unwrap_or(DEFAULT_CAPITAL_SHARE))?
            }
        };
        let s = EconomySnapshot::new(
            self.n_lab,
            self.n_cap,
            self.m_lab,
            Some(m_cap),
            self.x_pov,
            self.x_c,
        )?;
        match self.n_tot {
            Some(n) => s.with_reported_total(n),
            None => Ok(s),
        }
    }

    /// Snapshot without resolving the capital mass.
    pub fn declared_snapshot(&self) -> Result<EconomySnapshot> {
        let s = EconomySnapshot::new(
            self.n_lab, self.n_cap, self.m_lab, None, self.x_pov, self.x_c,
        )?;
        let s = match self.n_tot {
            Some(n) => s.with_reported_total(n)?,
            None => s,
        };
        match self.m_cap {
            Some(m) => s.with_capital(m),
            None => Ok(s),
        }
    }
}

/// Parses `key = value` scenario text. Unknown or repeated keys are errors.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut values: Vec<(&str, usize, f64, &str)> = Vec::new();
    for (n, line) in Lines::new(text) {
        let Some(eq) = line.find('=') else {
            return Err(parse_err(
                n,
                1,
                format!("expected 'key = value', found '{}'", line.trim()),
            ));
        };
        let key = line[..eq].trim();
        let raw = line[eq + 1..].trim();
        let key_col = line.len() - line.trim_start().len() + 1;
        let val_col = eq + 2 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len());
        if !REQUIRED_SCENARIO_KEYS.contains(&key) && !OPTIONAL_SCENARIO_KEYS.contains(&key) {
            return Err(parse_err(n, key_col, format!("unknown key '{key}'")));
        }
        if values.iter().any(|(k, ..)| *k == key) {
            return Err(parse_err(n, key_col, format!("duplicate key '{key}'")));
        }
        let v = if key == "seed" {
            raw.parse::<u64>().map_err(|_| {
                parse_err(
                    n,
                    val_col,
                    format!("seed: '{raw}' is not an unsigned integer"),
                )
            })? as f64
        } else {
            parse_number(n, val_col, raw, key)?
        };
        values.push((key, n, v, raw));
    }

    let missing: Vec<&str> = REQUIRED_SCENARIO_KEYS
        .iter()
        .copied()
        .filter(|k| !values.iter().any(|(key, ..)| key == k))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "scenario is missing required keys: {}",
            missing.join(", ")
        )));
    }
    let get = |k: &str| values.iter().find(|(key, ..)| *key == k).map(|v| v.2);
    let line_of = |k: &str| {
        values
            .iter()
            .find(|(key, ..)| *key == k)
            .map(|v| v.1)
            .unwrap_or(1)
    };

    if get("m_cap_geur").is_some() && get("capital_share").is_some() {
        return Err(parse_err(
            line_of("capital_share"),
            1,
            "m_cap_geur and capital_share are mutually exclusive",
        ));
    }
    if get("delta_m_geur").is_some() && get("tau").is_some() {
        return Err(parse_err(
            line_of("tau"),
            1,
            "delta_m_geur and tau are mutually exclusive",
        ));
    }
    if let Some(s) = get("capital_share") {
        if !(s > 0.0 && s < 1.0) {
            return Err(parse_err(
                line_of("capital_share"),
                1,
                format!("capital_share must lie in (0, 1), got {s}"),
            ));
        }
    }
    let seed = values
        .iter()
        .find(|(k, ..)| *k == "seed")
        .map(|(_, _, _, raw)| raw.parse::<u64>().expect("validated above"));

    let scenario = Scenario {
        n_tot: get("n_tot"),
        n_lab: get("n_lab").expect("required"),
        n_cap: get("n_cap").expect("required"),
        m_lab: geur_to_eur(get("m_lab_geur").expect("required")),
        m_cap: get("m_cap_geur").map(geur_to_eur),
        capital_share: get("capital_share"),
        x_pov: keur_to_eur(get("x_pov_keur").expect("required")),
        x_c: keur_to_eur(get("x_c_keur").expect("required")),
        delta_m: get("delta_m_geur").map(geur_to_eur),
        tau_override: get("tau"),
        seed,
    };
    // surface invariant violations (counts, thresholds, n_tot) at parse time
    scenario.declared_snapshot()?;
    Ok(scenario)
}

/// Serializes a scenario back to `key = value` text.
pub fn emit_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    if let Some(v) = s.n_tot {
        kv("n_tot", v.to_string());
    }
    kv("n_lab", s.n_lab.to_string());
    kv("n_cap", s.n_cap.to_string());
    kv("m_lab_geur", (s.m_lab / 1e9).to_string());
    if let Some(v) = s.m_cap {
        kv("m_cap_geur", (v / 1e9).to_string());
    }
    if let Some(v) = s.capital_share {
        kv("capital_share", v.to_string());
    }
    kv("x_pov_keur", eur_to_keur(s.x_pov).to_string());
    kv("x_c_keur", eur_to_keur(s.x_c).to_string());
    if let Some(v) = s.delta_m {
        kv("delta_m_geur", (v / 1e9).to_string());
    }
    if let Some(v) = s.tau_override {
        kv("tau", v.to_string());
    }
    if let Some(v) = s.seed {
        kv("seed", v.to_string());
    }
    out
}

/// The 2014 Belgian aggregates in scenario form.
pub const BELGIUM_SCENARIO: &str = "\
# Belgium, personal income tax records 2014
n_lab = 6.09e6
m_lab_geur = 170.6
n_cap = 1.73e5
x_pov_keur = 13.25
x_c_keur = 100
capital_share = 0.26
";
