//! Parameter sweeps over the superparabolic family and comparison of the
//! approximate methods against numerical propagation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::KeyValues;
use crate::ddp::ddp_probability;
use crate::models::DiabaticModel;
use crate::propagator::{propagate, PropagatorSettings};
use crate::znt::ZntInputs;
use crate::{Error, Result};

/// Default peak threshold on the linear probability scale.
pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Numeric,
    Ddp,
    ZntDouble,
    ZntTunnel,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Numeric, Method::Ddp, Method::ZntDouble, Method::ZntTunnel];

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            Method::Numeric => "numeric",
            Method::Ddp => "ddp",
            Method::ZntDouble => "znt_double",
            Method::ZntTunnel => "znt_tunnel",
        }
    }

    /// Probability of the superparabolic model (N, α) by this method.
    pub fn evaluate(self, n: u32, alpha: f64, settings: &PropagatorSettings) -> Result<f64> {
        match self {
            Method::Numeric => propagate(&DiabaticModel::superparabolic(n, alpha)?, settings).map(|r| r.probability),
            Method::Ddp => ddp_probability(n, alpha),
            Method::ZntDouble => ZntInputs::superparabolic(n, alpha)?.double_crossing(0.0),
            Method::ZntTunnel => ZntInputs::superparabolic(n, alpha)?.tunneling(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "numeric" => Ok(Method::Numeric),
            "ddp" => Ok(Method::Ddp),
            "znt_double" => Ok(Method::ZntDouble),
            "znt_tunnel" => Ok(Method::ZntTunnel),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

/// Parses a comma-separated method list such as `numeric,ddp,znt-double`.
pub fn parse_methods(list: &str) -> Result<BTreeSet<Method>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(Error::Parse(format!("unknown spacing {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Serial,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

/// Sweep over the superparabolic family.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub orders: Vec<u32>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub points: usize,
    pub spacing: Spacing,
    pub methods: BTreeSet<Method>,
    pub settings: PropagatorSettings,
    pub output: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            orders: vec![2, 6, 10],
            alpha_min: 0.1,
            alpha_max: 3.0,
            points: 300,
            spacing: Spacing::Log,
            methods: Method::ALL.into_iter().collect(),
            settings: PropagatorSettings::default(),
            output: None,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.orders.is_empty() {
            return Err(Error::InvalidSettings("at least one N is required".into()));
        }
        for &n in &self.orders {
            DiabaticModel::superparabolic(n, 1.0)?;
        }
        if !(self.alpha_min > 0.0) || !(self.alpha_max >= self.alpha_min) || !self.alpha_max.is_finite() {
            return Err(Error::InvalidSettings(format!(
                "need 0 < alpha_min ≤ alpha_max, got [{}, {}]",
                self.alpha_min, self.alpha_max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidSettings(format!("need at least 2 points, got {}", self.points)));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidSettings("method set is empty".into()));
        }
        self.settings.validate()
    }

    /// The α grid, ascending, with exact endpoints.
    pub fn alpha_grid(&self) -> Vec<f64> {
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == last {
                    return self.alpha_max;
                }
                let f = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.alpha_min + f * (self.alpha_max - self.alpha_min),
                    Spacing::Log => self.alpha_min * (self.alpha_max / self.alpha_min).powf(f),
                }
            })
            .collect()
    }

    /// Builds a configuration from key=value entries on top of `self`.
    ///
    /// Recognized keys: `model` (must be superparabolic), `N` (comma list),
    /// `alpha_min`, `alpha_max`, `points`, `spacing`, `methods`, `out`, and
    /// the propagator settings `rel_tol`, `abs_tol`, `asymptotic_ratio`,
    /// `convergence_tol`, `max_span_refinements`, `tail_tol`.
    pub fn with_overrides(mut self, kv: &KeyValues) -> Result<Self> {
        if let Some(model) = kv.get("model") {
            if !model.eq_ignore_ascii_case("superparabolic") {
                return Err(Error::InvalidSettings(format!("sweeps cover the superparabolic family, got {model:?}")));
            }
        }
        if let Some(list) = kv.get("N") {
            self.orders = list
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad N entry {s:?}"))))
                .collect::<Result<_>>()?;
        }
        if let Some(v) = kv.get_parsed("alpha_min")? {
            self.alpha_min = v;
        }
        if let Some(v) = kv.get_parsed("alpha_max")? {
            self.alpha_max = v;
        }
        if let Some(v) = kv.get_parsed("points")? {
            self.points = v;
        }
        if let Some(v) = kv.get_parsed("spacing")? {
            self.spacing = v;
        }
        if let Some(list) = kv.get("methods") {
            self.methods = parse_methods(list)?;
        }
        if let Some(out) = kv.get("out") {
            self.output = Some(PathBuf::from(out));
        }
        self.settings = settings_with_overrides(self.settings, kv)?;
        Ok(self)
    }
}

/// Applies propagator keys from `kv` to `settings`.
pub fn settings_with_overrides(mut settings: PropagatorSettings, kv: &KeyValues) -> Result<PropagatorSettings> {
    let fields: [(&str, &mut f64); 5] = [
        ("rel_tol", &mut settings.rel_tol),
        ("abs_tol", &mut settings.abs_tol),
        ("asymptotic_ratio", &mut settings.asymptotic_ratio),
        ("convergence_tol", &mut settings.convergence_tol),
        ("tail_tol", &mut settings.tail_tol),
    ];
    for (key, slot) in fields {
        if let Some(v) = kv.get_parsed(key)? {
            *slot = v;
        }
    }
    if let Some(v) = kv.get_parsed("max_span_refinements")? {
        settings.max_span_refinements = v;
    }
    Ok(settings)
}

/// Result of one method at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Value(f64),
    /// The method raised an error; holds its kind, e.g. `BranchFailure`.
    Failed(String),
}

impl Outcome {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Outcome::Value(v) => Some(v),
            Outcome::Failed(_) => None,
        }
    }
}

impl From<Result<f64>> for Outcome {
    fn from(r: Result<f64>) -> Self {
        match r {
            Ok(v) => Outcome::Value(v),
            Err(e) => Outcome::Failed(e.kind().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: u32,
    pub alpha: f64,
    /// Only the requested methods are present.
    pub outcomes: BTreeMap<Method, Outcome>,
}

impl SweepRow {
    pub fn value(&self, method: Method) -> Option<f64> {
        self.outcomes.get(&method).and_then(Outcome::value)
    }

    /// `ok`, or `column:Kind` entries joined by `;` for failed methods.
    pub fn status(&self) -> String {
        let failures: Vec<String> = self
            .outcomes
            .iter()
            .filter_map(|(m, o)| match o {
                Outcome::Failed(kind) => Some(format!("{}:{kind}", m.column())),
                Outcome::Value(_) => None,
            })
            .collect();
        if failures.is_empty() {
            "ok".into()
        } else {
            failures.join(";")
        }
    }
}

fn evaluate_point(n: u32, alpha: f64, config: &SweepConfig) -> SweepRow {
    let outcomes = config
        .methods
        .iter()
        .map(|&m| (m, Outcome::from(m.evaluate(n, alpha, &config.settings))))
        .collect();
    SweepRow { n, alpha, outcomes }
}

/// Runs the sweep with the default execution mode and writes the CSV if
/// an output path is configured.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    run_sweep_with(config, Execution::default())
}

pub fn run_sweep_with(config: &SweepConfig, execution: Execution) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let grid = config.alpha_grid();
    let points: Vec<(u32, f64)> = config.orders.iter().flat_map(|&n| grid.iter().map(move |&a| (n, a))).collect();
    let rows: Vec<SweepRow> = match execution {
        Execution::Serial => points.iter().map(|&(n, a)| evaluate_point(n, a, config)).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            points.par_iter().map(|&(n, a)| evaluate_point(n, a, config)).collect()
        }
    };
    if let Some(path) = &config.output {
        write_sweep_file(path, &rows)?;
    }
    Ok(rows)
}

const CSV_HEADER: [&str; 7] = ["N", "alpha", "numeric", "ddp", "znt_double", "znt_tunnel", "status"];

fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_sweep<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(CSV_HEADER)?;
    for row in rows {
        let mut record = vec![row.n.to_string(), format_value(row.alpha)];
        for m in Method::ALL {
            record.push(match row.outcomes.get(&m) {
                None => String::new(),
                Some(Outcome::Value(v)) => format_value(*v),
                Some(Outcome::Failed(_)) => "NaN".into(),
            });
        }
        record.push(row.status());
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_sweep_file(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<()> {
    write_sweep(std::io::BufWriter::new(std::fs::File::create(path)?), rows)
}

/// Parses rows written by [`write_sweep`]. Method columns may be missing.
pub fn read_sweep<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut csv = csv::Reader::from_reader(input);
    let headers = csv.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let n_col = find("N").ok_or(Error::MissingColumn("N"))?;
    let alpha_col = find("alpha").ok_or(Error::MissingColumn("alpha"))?;
    let status_col = find("status");
    let method_cols: Vec<(Method, usize)> = Method::ALL.iter().filter_map(|&m| find(m.column()).map(|i| (m, i))).collect();

    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let number = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| Error::Parse(format!("not a number: {:?}", field(i))))
        };
        let n = field(n_col).parse().map_err(|_| Error::Parse(format!("bad N {:?}", field(n_col))))?;
        let alpha = number(alpha_col)?;
        let failures: BTreeMap<&str, &str> = status_col
            .map(field)
            .filter(|s| *s != "ok")
            .into_iter()
            .flat_map(|s| s.split(';'))
            .filter_map(|entry| entry.split_once(':'))
            .collect();
        let mut outcomes = BTreeMap::new();
        for &(m, i) in &method_cols {
            let raw = field(i);
            if raw.is_empty() {
                continue;
            }
            let outcome = if raw.eq_ignore_ascii_case("nan") {
                Outcome::Failed(failures.get(m.column()).copied().unwrap_or("Unknown").to_string())
            } else {
                Outcome::Value(number(i)?)
            };
            outcomes.insert(m, outcome);
        }
        rows.push(SweepRow { n, alpha, outcomes });
    }
    Ok(rows)
}

pub fn read_sweep_file(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    read_sweep(std::fs::File::open(path)?)
}

/// α of strict interior local maxima with P above `threshold`.
pub fn find_oscillation_peaks(series: &[(f64, f64)], threshold: f64) -> Vec<f64> {
    series
        .windows(3)
        .filter(|w| w[1].1 > threshold && w[1].1 > w[0].1 && w[1].1 > w[2].1)
        .map(|w| w[1].0)
        .collect()
}

/// α of strict interior local minima.
pub fn find_oscillation_nodes(series: &[(f64, f64)]) -> Vec<f64> {
    series
        .windows(3)
        .filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1)
        .map(|w| w[1].0)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    /// max |P_method − P_numeric| over points where both succeeded.
    pub max_abs_deviation: Option<f64>,
    /// α at which the maximum deviation occurs.
    pub max_deviation_alpha: Option<f64>,
    pub failures: usize,
    pub peaks: Vec<f64>,
    pub peak_count: usize,
    pub nodes: Vec<f64>,
    /// For each numeric node, |α_method − α_numeric|/α_numeric to the
    /// nearest node of this method.
    pub node_relative_differences: Vec<f64>,
    /// Largest entry of `node_relative_differences`.
    pub frequency_agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderComparison {
    pub n: u32,
    pub points: usize,
    pub methods: BTreeMap<Method, MethodSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub threshold: f64,
    pub orders: Vec<OrderComparison>,
}

impl ComparisonReport {
    pub fn summary(&self, n: u32, method: Method) -> Option<&MethodSummary> {
        self.orders.iter().find(|o| o.n == n)?.methods.get(&method)
    }
}

fn nearest_relative(target: f64, candidates: &[f64]) -> Option<f64> {
    candidates
        .iter()
        .map(|&c| (c - target).abs() / target)
        .min_by(|a, b| a.total_cmp(b))
}

/// Compares every method column with the numeric one, separately per N.
/// Row order is irrelevant.
pub fn compare_methods(rows: &[SweepRow], threshold: f64) -> Result<ComparisonReport> {
    if !rows.iter().any(|r| r.outcomes.contains_key(&Method::Numeric)) {
        return Err(Error::MissingColumn("numeric"));
    }
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.n.cmp(&b.n).then(a.alpha.total_cmp(&b.alpha)));

    let mut orders = Vec::new();
    for chunk in sorted.chunk_by(|a, b| a.n == b.n) {
        let n = chunk[0].n;
        let series = |m: Method| -> Vec<(f64, f64)> { chunk.iter().filter_map(|r| r.value(m).map(|v| (r.alpha, v))).collect() };
        let numeric_nodes = find_oscillation_nodes(&series(Method::Numeric));
        let present: BTreeSet<Method> = chunk.iter().flat_map(|r| r.outcomes.keys().copied()).collect();
        let mut methods = BTreeMap::new();
        for m in present {
            let s = series(m);
            let mut max_dev: Option<(f64, f64)> = None;
            for r in chunk {
                if let (Some(v), Some(num)) = (r.value(m), r.value(Method::Numeric)) {
                    let d = (v - num).abs();
                    if max_dev.is_none_or(|(best, _)| d > best) {
                        max_dev = Some((d, r.alpha));
                    }
                }
            }
            let peaks = find_oscillation_peaks(&s, threshold);
            let nodes = find_oscillation_nodes(&s);
            let node_relative_differences: Vec<f64> =
                numeric_nodes.iter().filter_map(|&a| nearest_relative(a, &nodes)).collect();
            let frequency_agreement = node_relative_differences.iter().copied().max_by(|a, b| a.total_cmp(b));
            methods.insert(
                m,
                MethodSummary {
                    max_abs_deviation: max_dev.map(|(d, _)| d),
                    max_deviation_alpha: max_dev.map(|(_, a)| a),
                    failures: chunk.iter().filter(|r| matches!(r.outcomes.get(&m), Some(Outcome::Failed(_)))).count(),
                    peak_count: peaks.len(),
                    peaks,
                    nodes,
                    node_relative_differences,
                    frequency_agreement,
                },
            );
        }
        orders.push(OrderComparison { n, points: chunk.len(), methods });
    }
    Ok(ComparisonReport { threshold, orders })
}
