use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mimome_secrecy::cli::{
    self, estimate_diversity_order, read_sweep_config, reproduce_figure, rows_to_csv, run_sweep,
    Axis, Method, Metric, Overrides, SweepSpec,
};
use mimome_secrecy::closed_form;
use mimome_secrecy::{EstimatorConfig, MiModel, Modulation, Result, SystemConfig};

#[derive(Parser)]
#[command(name = "mimome-secrecy", version, about = "Secrecy performance of antenna-selection MIMO wiretap channels with BPSK/QPSK inputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and approximated MI over an SNR grid (dB).
    MiTable {
        #[arg(long, default_value_t = -30.0, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, default_value_t = 40.0, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Ergodic secrecy rate.
    Ergodic(PointArgs),
    /// Probability of non-zero secrecy rate.
    Pnz(PointArgs),
    /// Secrecy outage probability.
    Sop(RateArgs),
    /// High-SNR outage asymptote.
    Asymptotic(RateArgs),
    /// Run a sweep from a JSON spec (or a sidecar written by an earlier run).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Write CSV here (plus a `.json` sidecar) instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write the preset sweeps behind a figure (1, 2, 3, 4a, 4b, 5).
    ReproduceFig {
        id: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the secrecy diversity order to outage probabilities over γ̄_b.
    Diversity {
        #[arg(long, value_delimiter = ',', default_values_t = [30.0, 35.0, 40.0], allow_negative_numbers = true)]
        snr_b_list: Vec<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Semianalytic)]
        method: MethodArg,
        #[command(flatten)]
        rate: RateArgs,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    modulation: Option<ModulationArg>,
}

#[derive(Args, Clone)]
struct PointArgs {
    #[arg(long, default_value_t = 1)]
    n_tx: u32,
    #[arg(long, default_value_t = 1)]
    n_rx: u32,
    #[arg(long, default_value_t = 1)]
    n_eve: u32,
    /// Main-channel average SNR (dB).
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_b: f64,
    /// Eavesdropper average SNR (dB).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_e: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::ClosedForm])]
    methods: Vec<MethodArg>,
    /// Use the approximated MI curve for simulation and quadrature.
    #[arg(long)]
    approx_mi: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct RateArgs {
    /// Target secrecy rate (bits per channel use).
    #[arg(long, allow_negative_numbers = true)]
    rs: f64,
    #[command(flatten)]
    point: PointArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModulationArg {
    Bpsk,
    Qpsk,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Semianalytic,
    MonteCarlo,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::ClosedForm => Method::ClosedForm,
            MethodArg::Semianalytic => Method::Semianalytic,
            MethodArg::MonteCarlo => Method::MonteCarlo,
        }
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trials: self.trials,
            workers: self.workers,
            modulation: self.modulation.map(|m| match m {
                ModulationArg::Bpsk => Modulation::Bpsk,
                ModulationArg::Qpsk => Modulation::Qpsk,
            }),
        }
    }
}

impl PointArgs {
    fn spec(&self, metric: Metric, rs: Option<f64>) -> SweepSpec {
        let o = self.common.overrides();
        let modulation = o.modulation.unwrap_or(Modulation::Bpsk);
        let base = SystemConfig::new(self.n_tx, self.n_rx, self.n_eve, self.snr_b, self.snr_e)
            .with_modulation(modulation);
        let methods: Vec<Method> = self.methods.iter().map(|&m| m.into()).collect();
        let estimator = methods.contains(&Method::MonteCarlo).then(|| {
            let seed = o.seed.unwrap_or(1);
            let defaults = match metric {
                Metric::Ergodic => EstimatorConfig::for_rates(seed),
                _ => EstimatorConfig::for_probabilities(seed),
            };
            EstimatorConfig {
                trials: o.trials.unwrap_or(defaults.trials),
                workers: o.workers.unwrap_or(1),
                mi_model: MiModel::new(modulation, !self.approx_mi),
                ..defaults
            }
        });
        SweepSpec {
            base,
            axis: Axis::SnrBDb,
            values: vec![self.snr_b],
            metrics: vec![metric],
            methods,
            rs,
            estimator,
            semianalytic_exact: !self.approx_mi,
        }
    }
}

fn print_sweep(spec: &SweepSpec) -> Result<()> {
    print!("{}", rows_to_csv(&run_sweep(spec)?));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::MiTable { from, to, step, common } => {
            if !(step > 0.0 && to >= from) {
                return Err(mimome_secrecy::Error::Config {
                    field: "step".into(),
                    reason: "need step > 0 and to >= from".into(),
                });
            }
            let n = ((to - from) / step + 1e-9).floor() as usize;
            let modulation = common.overrides().modulation.unwrap_or(Modulation::Bpsk);
            let spec = SweepSpec {
                base: SystemConfig::new(1, 1, 1, 0.0, 0.0).with_modulation(modulation),
                axis: Axis::SnrBDb,
                values: (0..=n).map(|i| from + step * i as f64).collect(),
                metrics: vec![Metric::MiCurve],
                methods: vec![Method::ClosedForm, Method::Semianalytic],
                rs: None,
                estimator: None,
                semianalytic_exact: true,
            };
            print_sweep(&spec)
        }
        Command::Ergodic(p) => print_sweep(&p.spec(Metric::Ergodic, None)),
        Command::Pnz(p) => print_sweep(&p.spec(Metric::Pnz, None)),
        Command::Sop(r) => print_sweep(&r.point.spec(Metric::Sop, Some(r.rs))),
        Command::Asymptotic(r) => print_sweep(&r.point.spec(Metric::SopAsymptotic, Some(r.rs))),
        Command::Sweep { config, out, common } => {
            let mut spec = read_sweep_config(&config)?;
            common.overrides().apply(&mut spec);
            match out {
                Some(path) => cli::write_sweep(&spec, &path).map(|_| ()),
                None => print_sweep(&spec),
            }
        }
        Command::ReproduceFig { id, out, common } => {
            for path in reproduce_figure(&id, &out, &common.overrides())? {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Diversity { snr_b_list, method, rate } => {
            let spec = rate.point.spec(Metric::Sop, Some(rate.rs));
            let model = MiModel::new(spec.base.modulation, !rate.point.approx_mi);
            let mut points = Vec::with_capacity(snr_b_list.len());
            for &db in &snr_b_list {
                let cfg = SystemConfig { snr_b_db: db, ..spec.base };
                let p = match method {
                    MethodArg::ClosedForm => closed_form::sop_approx(&cfg, rate.rs)?,
                    MethodArg::Semianalytic => closed_form::sop_semianalytic(&cfg, rate.rs, model)?,
                    MethodArg::MonteCarlo => {
                        let o = rate.point.common.overrides();
                        let est = EstimatorConfig {
                            trials: o.trials.unwrap_or(10_000_000),
                            seed: o.seed.unwrap_or(1),
                            workers: o.workers.unwrap_or(1),
                            mi_model: model,
                        };
                        mimome_secrecy::monte_carlo::estimate_sop(&cfg, &est, rate.rs)?.mean
                    }
                };
                points.push((db, p));
            }
            println!("{}", cli::format_number(estimate_diversity_order(&points)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
