//! Experiment runner behind the `mimome-secrecy` binary: declarative sweeps,
//! CSV emission, figure presets and the diversity-order fit.

mod presets;

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, SystemConfig};
use crate::closed_form;
use crate::error::{Error, Result};
use crate::math_kernels::{MiModel, Modulation};
use crate::monte_carlo::{self, EstimatorConfig};

pub use presets::{figure_ids, figure_series, reproduce_figure, FigureSeries};
use presets::{sidecar_json, write_file};

pub const CSV_HEADER: &str = "axis,axis_value,metric,method,value,std_error,trials,seed";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrBDb,
    SnrEDb,
    NTx,
    NRx,
    NEve,
    Rs,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::SnrBDb => "snr_b_db",
            Axis::SnrEDb => "snr_e_db",
            Axis::NTx => "n_tx",
            Axis::NRx => "n_rx",
            Axis::NEve => "n_eve",
            Axis::Rs => "rs",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, Axis::NTx | Axis::NRx | Axis::NEve)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MiCurve,
    Ergodic,
    Pnz,
    Sop,
    SopAsymptotic,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::MiCurve => "mi_curve",
            Metric::Ergodic => "ergodic",
            Metric::Pnz => "pnz",
            Metric::Sop => "sop",
            Metric::SopAsymptotic => "sop_asymptotic",
        }
    }

    fn needs_rate(self) -> bool {
        matches!(self, Metric::Sop | Metric::SopAsymptotic)
    }

    fn supports(self, method: Method) -> bool {
        !matches!(
            (self, method),
            (Metric::MiCurve, Method::MonteCarlo) | (Metric::Pnz, Method::Semianalytic)
        )
    }
}

/// How a metric is evaluated.
///
/// | metric | closed_form | semianalytic | monte_carlo |
/// |---|---|---|---|
/// | mi_curve | approximated MI | exact MI | - |
/// | ergodic | double sum | 2-D quadrature | simulated |
/// | pnz | double sum | - | simulated |
/// | sop | double sum with H | 1-D quadrature | simulated |
/// | sop_asymptotic | approximated MI limit | exact MI limit | simulated SOP |
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Semianalytic,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Semianalytic => "semianalytic",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub metrics: Vec<Metric>,
    pub methods: Vec<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorConfig>,
    /// Semianalytic routes use exact MI when set, the approximation otherwise.
    #[serde(default = "default_true")]
    pub semianalytic_exact: bool,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate().map_err(|e| match e {
            Error::Config { field, reason } => Error::config(format!("base.{field}"), reason),
            other => other,
        })?;
        if self.values.is_empty() {
            return Err(Error::config("values", "must not be empty"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("values", "must be finite"));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("values", "must be strictly increasing"));
        }
        if self.axis.is_count()
            && self
                .values
                .iter()
                .any(|&v| v < 1.0 || v.fract() != 0.0 || v > f64::from(u32::MAX))
        {
            return Err(Error::config(
                "values",
                format!("{} values must be positive integers", self.axis.name()),
            ));
        }
        if self.metrics.is_empty() {
            return Err(Error::config("metrics", "must not be empty"));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "must not be empty"));
        }
        if has_duplicates(&self.metrics) {
            return Err(Error::config("metrics", "contains duplicates"));
        }
        if has_duplicates(&self.methods) {
            return Err(Error::config("methods", "contains duplicates"));
        }
        for &metric in &self.metrics {
            for &method in &self.methods {
                if !metric.supports(method) {
                    return Err(Error::config(
                        "methods",
                        format!("{} is not available for {}", method.name(), metric.name()),
                    ));
                }
            }
        }
        if self.metrics.contains(&Metric::MiCurve)
            && !matches!(self.axis, Axis::SnrBDb | Axis::SnrEDb)
        {
            return Err(Error::config("axis", "mi_curve needs an SNR axis"));
        }
        let wants_rate = self.metrics.iter().any(|m| m.needs_rate());
        match (wants_rate, self.axis == Axis::Rs, self.rs) {
            (true, false, None) => {
                return Err(Error::config("rs", "required when a SOP metric is requested"))
            }
            (true, true, Some(_)) => {
                return Err(Error::config("rs", "must be omitted when sweeping over rs"))
            }
            (false, true, _) => {
                return Err(Error::config("axis", "rs axis requires a SOP metric"))
            }
            (false, false, Some(_)) => {
                return Err(Error::config("rs", "only valid with a SOP metric"))
            }
            _ => {}
        }
        if let Some(rs) = self.rs {
            // Range problems are numeric domain errors, raised by the evaluators.
            if !rs.is_finite() {
                return Err(Error::config("rs", "must be finite"));
            }
        }
        match &self.estimator {
            Some(est) => {
                est.validate()?;
                if est.mi_model.modulation() != self.base.modulation {
                    return Err(Error::config(
                        "estimator.mi_model",
                        "modulation differs from base.modulation",
                    ));
                }
            }
            None if self.methods.contains(&Method::MonteCarlo) => {
                return Err(Error::config("estimator", "required for monte_carlo"))
            }
            None => {}
        }
        Ok(())
    }

    /// Configuration and target rate at one axis value.
    fn point(&self, value: f64) -> (SystemConfig, Option<f64>) {
        let mut cfg = self.base;
        let mut rs = self.rs;
        match self.axis {
            Axis::SnrBDb => cfg.snr_b_db = value,
            Axis::SnrEDb => cfg.snr_e_db = value,
            Axis::NTx => cfg.n_tx = value as u32,
            Axis::NRx => cfg.n_rx = value as u32,
            Axis::NEve => cfg.n_eve = value as u32,
            Axis::Rs => rs = Some(value),
        }
        (cfg, rs)
    }

    fn semianalytic_model(&self) -> MiModel {
        MiModel::new(self.base.modulation, self.semianalytic_exact)
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, a)| items[..i].contains(a))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axis: Axis,
    pub axis_value: f64,
    pub metric: Metric,
    pub method: Method,
    pub value: f64,
    pub std_error: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

/// Evaluates every `(metric, method)` pair at each axis value, in axis order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * spec.metrics.len() * spec.methods.len());
    for &x in &spec.values {
        let (cfg, rs) = spec.point(x);
        for &metric in &spec.metrics {
            for &method in &spec.methods {
                let mut row = ResultRow {
                    axis: spec.axis,
                    axis_value: x,
                    metric,
                    method,
                    value: 0.0,
                    std_error: None,
                    trials: None,
                    seed: None,
                };
                if method == Method::MonteCarlo {
                    let est = spec.estimator.as_ref().expect("validated");
                    let e = match metric {
                        Metric::Ergodic => monte_carlo::estimate_ergodic_rate(&cfg, est)?,
                        Metric::Pnz => monte_carlo::estimate_prob_nonzero(&cfg, est)?,
                        Metric::Sop | Metric::SopAsymptotic => {
                            monte_carlo::estimate_sop(&cfg, est, rs.expect("validated"))?
                        }
                        Metric::MiCurve => unreachable!("rejected by validate"),
                    };
                    row.value = e.mean;
                    row.std_error = Some(e.std_error);
                    row.trials = Some(e.trials);
                    row.seed = Some(e.seed);
                } else {
                    row.value = analytic(spec, &cfg, rs, metric, method)?;
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn analytic(
    spec: &SweepSpec,
    cfg: &SystemConfig,
    rs: Option<f64>,
    metric: Metric,
    method: Method,
) -> Result<f64> {
    let closed = method == Method::ClosedForm;
    let rs = || rs.expect("validated");
    match metric {
        Metric::MiCurve => {
            let db = if spec.axis == Axis::SnrEDb {
                cfg.snr_e_db
            } else {
                cfg.snr_b_db
            };
            MiModel::new(cfg.modulation, !closed).mi(db_to_linear(db))
        }
        Metric::Ergodic if closed => closed_form::ergodic_secrecy_rate_approx(cfg),
        Metric::Ergodic => closed_form::ergodic_secrecy_rate_quadrature(cfg, spec.semianalytic_model()),
        Metric::Pnz => closed_form::prob_nonzero_secrecy(cfg),
        Metric::Sop if closed => closed_form::sop_approx(cfg, rs()),
        Metric::Sop => closed_form::sop_semianalytic(cfg, rs(), spec.semianalytic_model()),
        Metric::SopAsymptotic => closed_form::sop_asymptotic(cfg, rs(), !closed),
    }
}

/// `%g`-style formatting with 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Renders rows as CSV under the fixed header.
pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for r in rows {
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            r.axis.name().to_string(),
            format_number(r.axis_value),
            r.metric.name().to_string(),
            r.method.name().to_string(),
            format_number(r.value),
            opt(r.std_error.map(format_number)),
            opt(r.trials.map(|t| t.to_string())),
            opt(r.seed.map(|s| s.to_string())),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Provenance written next to every CSV; its `spec` reruns to the same bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    pub csv: String,
    pub spec: SweepSpec,
}

impl Sidecar {
    pub fn new(spec: SweepSpec, csv: impl Into<String>) -> Self {
        Sidecar {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            figure: None,
            series: None,
            csv: csv.into(),
            spec,
        }
    }
}

/// Command-line settings that replace the corresponding spec fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub workers: Option<usize>,
    pub modulation: Option<Modulation>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut SweepSpec) {
        if let Some(m) = self.modulation {
            spec.base.modulation = m;
        }
        if let Some(est) = spec.estimator.as_mut() {
            est.seed = self.seed.unwrap_or(est.seed);
            est.trials = self.trials.unwrap_or(est.trials);
            est.workers = self.workers.unwrap_or(est.workers);
            est.mi_model = MiModel::new(spec.base.modulation, est.mi_model.is_exact());
        }
    }
}

/// Runs `spec` and writes the CSV to `csv_path` with a sidecar next to it
/// (same stem, `.json`).
pub fn write_sweep(spec: &SweepSpec, csv_path: &std::path::Path) -> Result<std::path::PathBuf> {
    let csv = rows_to_csv(&run_sweep(spec)?);
    let name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let json_path = csv_path.with_extension("json");
    write_file(csv_path, csv.as_bytes())?;
    write_file(&json_path, sidecar_json(&Sidecar::new(spec.clone(), name)).as_bytes())?;
    Ok(json_path)
}

/// Parses a sweep config: either a bare [`SweepSpec`] or a [`Sidecar`].
pub fn parse_sweep_config(text: &str) -> Result<SweepSpec> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
    let spec = if value.get("spec").is_some() {
        serde_json::from_value::<Sidecar>(value).map(|s| s.spec)
    } else {
        serde_json::from_value::<SweepSpec>(value)
    };
    spec.map_err(|e| Error::config("config", e.to_string()))
}

pub fn read_sweep_config(path: &std::path::Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep_config(&text)
}

/// Least-squares slope of `−log10(sop)` against `snr_b_db / 10`.
pub fn estimate_diversity_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::domain("diversity fit needs at least 3 points"));
    }
    if let Some(&(_, p)) = points.iter().find(|(_, p)| p.is_nan() || *p <= 0.0) {
        return Err(Error::domain(format!("outage probability must be positive, got {p}")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(db, _)| db / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|(_, p)| -p.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("diversity fit needs distinct SNR values"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
