use std::path::{Path, PathBuf};

use super::{rows_to_csv, run_sweep, Axis, Method, Metric, Overrides, Sidecar, SweepSpec};
use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::math_kernels::MiModel;
use crate::monte_carlo::EstimatorConfig;

/// One curve of a figure; written as `fig<id>_<name>.csv` plus `.json`.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureSeries {
    pub figure: &'static str,
    pub name: String,
    pub spec: SweepSpec,
}

const FIGURES: [&str; 6] = ["1", "2", "3", "4a", "4b", "5"];

pub fn figure_ids() -> &'static [&'static str] {
    &FIGURES
}

fn grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    let n = ((to - from) / step).round() as usize;
    (0..=n).map(|i| from + step * i as f64).collect()
}

fn sweep(base: SystemConfig, values: Vec<f64>, metric: Metric, methods: &[Method]) -> SweepSpec {
    SweepSpec {
        base,
        axis: Axis::SnrBDb,
        values,
        metrics: vec![metric],
        methods: methods.to_vec(),
        rs: None,
        estimator: None,
        semianalytic_exact: true,
    }
}

/// Preset sweeps for a figure. Seeds are `seed`, `seed + 1`, ... per series.
pub fn figure_series(id: &str, seed: u64) -> Result<Vec<FigureSeries>> {
    let figure = *FIGURES
        .iter()
        .find(|&&f| f == id)
        .ok_or_else(|| Error::config("figure", format!("unknown figure id `{id}`, expected one of {FIGURES:?}")))?;
    let simulated = |trials: EstimatorConfig| EstimatorConfig {
        mi_model: MiModel::ExactBpsk,
        ..trials
    };
    let mut out = Vec::new();
    match figure {
        "1" => {
            let spec = sweep(
                SystemConfig::new(1, 1, 1, 0.0, 0.0),
                grid(-15.0, 15.0, 1.0),
                Metric::MiCurve,
                &[Method::ClosedForm, Method::Semianalytic],
            );
            out.push(FigureSeries { figure, name: "bpsk".into(), spec });
        }
        "2" => {
            for (i, n_tx) in [1, 2, 4, 8, 16].into_iter().enumerate() {
                let mut spec = sweep(
                    SystemConfig::new(n_tx, 3, 2, 0.0, -10.0),
                    grid(-15.0, 10.0, 1.0),
                    Metric::Ergodic,
                    &[Method::ClosedForm, Method::MonteCarlo],
                );
                spec.estimator = Some(simulated(EstimatorConfig::for_rates(seed + i as u64)));
                out.push(FigureSeries { figure, name: format!("n_tx{n_tx}"), spec });
            }
        }
        "3" => {
            for (i, snr_e_db) in [-10.0, 0.0, 10.0].into_iter().enumerate() {
                let mut spec = sweep(
                    SystemConfig::new(3, 2, 2, 0.0, snr_e_db),
                    grid(-10.0, 20.0, 2.0),
                    Metric::Pnz,
                    &[Method::ClosedForm, Method::MonteCarlo],
                );
                spec.estimator = Some(simulated(EstimatorConfig::for_probabilities(seed + i as u64)));
                out.push(FigureSeries { figure, name: format!("snr_e{snr_e_db}"), spec });
            }
        }
        "4a" | "4b" => {
            let snr_e_db = if figure == "4a" { -10.0 } else { -6.0 };
            for n_tx in 1..=8u32 {
                let mut spec = sweep(
                    SystemConfig::new(n_tx, 3, 2, 0.0, snr_e_db),
                    grid(-15.0, 30.0, 5.0),
                    Metric::Sop,
                    &[Method::ClosedForm, Method::MonteCarlo],
                );
                spec.rs = Some(0.5);
                spec.estimator = Some(simulated(EstimatorConfig::for_rates(seed + u64::from(n_tx - 1))));
                out.push(FigureSeries { figure, name: format!("n_tx{n_tx}"), spec });
            }
        }
        "5" => {
            let mut spec = sweep(
                SystemConfig::new(5, 2, 2, 30.0, 0.0),
                grid(-10.0, 0.0, 1.0),
                Metric::SopAsymptotic,
                &[Method::ClosedForm, Method::Semianalytic, Method::MonteCarlo],
            );
            spec.axis = Axis::SnrEDb;
            spec.rs = Some(0.5);
            // The asymptote is derived from the approximated MI; exact-MI
            // simulation tracks the semianalytic (exact) rows instead.
            spec.estimator = Some(EstimatorConfig {
                mi_model: MiModel::ApproxBpsk,
                ..EstimatorConfig::for_rates(seed)
            });
            out.push(FigureSeries { figure, name: "asymptote".into(), spec });
        }
        _ => unreachable!("id checked against FIGURES"),
    }
    Ok(out)
}

/// Runs every series of a figure and writes CSV and JSON sidecars into
/// `out_dir`. Returns the written paths.
pub fn reproduce_figure(id: &str, out_dir: &Path, overrides: &Overrides) -> Result<Vec<PathBuf>> {
    let series = figure_series(id, overrides.seed.unwrap_or(1))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    // The seed already went into the per-series seeds.
    let rest = Overrides {
        seed: None,
        ..*overrides
    };
    let mut written = Vec::new();
    for s in series {
        let mut spec = s.spec;
        rest.apply(&mut spec);
        let csv = rows_to_csv(&run_sweep(&spec)?);
        let stem = format!("fig{}_{}", s.figure, s.name);
        let csv_path = out_dir.join(format!("{stem}.csv"));
        let mut sidecar = Sidecar::new(spec, format!("{stem}.csv"));
        sidecar.figure = Some(s.figure.to_string());
        sidecar.series = Some(s.name);
        let json_path = out_dir.join(format!("{stem}.json"));
        write_file(&csv_path, csv.as_bytes())?;
        write_file(&json_path, sidecar_json(&sidecar).as_bytes())?;
        written.extend([csv_path, json_path]);
    }
    Ok(written)
}

pub(crate) fn sidecar_json(sidecar: &Sidecar) -> String {
    let mut s = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    s.push('\n');
    s
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
