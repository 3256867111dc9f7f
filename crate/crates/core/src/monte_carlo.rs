//! Monte-Carlo estimators over simulated fading draws.
//!
//! Trial `i` draws from a ChaCha8 stream keyed by `(seed, i)`, and trials are
//! grouped into fixed blocks that are summed in index order and then reduced
//! pairwise. Results are therefore bit-identical for any worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    sample_channel_into, secrecy_rate, snr_pair_from_draw, ChannelDraw, SnrPair, SystemConfig,
};
use crate::closed_form::check_rate;
use crate::error::{Error, Result};
use crate::math_kernels::MiModel;

const BLOCK: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_model")]
    pub mi_model: MiModel,
}

fn default_workers() -> usize {
    1
}

fn default_model() -> MiModel {
    MiModel::ExactBpsk
}

impl EstimatorConfig {
    /// 10^6 trials, the default for rate estimates.
    pub fn for_rates(seed: u64) -> Self {
        EstimatorConfig {
            trials: 1_000_000,
            seed,
            workers: 1,
            mi_model: MiModel::ExactBpsk,
        }
    }

    /// 10^7 trials, the default for probability estimates.
    pub fn for_probabilities(seed: u64) -> Self {
        EstimatorConfig {
            trials: 10_000_000,
            ..Self::for_rates(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("estimator.trials", "must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::config("estimator.workers", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Generator for trial `index`: stream `index` of the seeded ChaCha8 key.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.set_word_pos(0);
    rng
}

#[derive(Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

fn reduce(mut parts: Vec<Moments>) -> Moments {
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|c| match c {
                [a, b] => Moments {
                    sum: a.sum + b.sum,
                    sum_sq: a.sum_sq + b.sum_sq,
                },
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
    }
    parts.pop().unwrap_or_default()
}

/// Averages `metric` over `est.trials` draws; `bernoulli` selects the
/// binomial standard error for 0/1 metrics.
fn run<F>(cfg: &SystemConfig, est: &EstimatorConfig, metric: F, bernoulli: bool) -> Result<Estimate>
where
    F: Fn(SnrPair) -> f64 + Sync,
{
    cfg.validate()?;
    est.validate()?;
    let base = ChaCha8Rng::seed_from_u64(est.seed);
    let blocks = est.trials.div_ceil(BLOCK);
    let block = |b: u64| {
        let mut draw = ChannelDraw::empty(cfg);
        let mut m = Moments::default();
        let end = ((b + 1) * BLOCK).min(est.trials);
        for i in b * BLOCK..end {
            let mut rng = base.clone();
            rng.set_stream(i);
            rng.set_word_pos(0);
            sample_channel_into(&mut rng, &mut draw);
            let x = metric(snr_pair_from_draw(&draw, cfg));
            m.sum += x;
            m.sum_sq += x * x;
        }
        m
    };
    let parts: Vec<Moments> = if est.workers == 1 {
        (0..blocks).map(block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(est.workers)
            .build()
            .map_err(|e| Error::config("estimator.workers", e.to_string()))?;
        pool.install(|| (0..blocks).into_par_iter().map(block).collect())
    };
    let total = reduce(parts);
    let n = est.trials as f64;
    let mean = total.sum / n;
    let std_error = if est.trials == 1 {
        0.0
    } else if bernoulli {
        (mean * (1.0 - mean) / n).max(0.0).sqrt()
    } else {
        let var = ((total.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    };
    Ok(Estimate {
        mean,
        std_error,
        trials: est.trials,
        seed: est.seed,
    })
}

/// Mean secrecy rate `E[[I(γ_b) − I(γ_e)]^+]` under `est.mi_model`.
pub fn estimate_ergodic_rate(cfg: &SystemConfig, est: &EstimatorConfig) -> Result<Estimate> {
    let model = est.mi_model;
    run(cfg, est, |p| secrecy_rate(p, model), false)
}

/// Fraction of draws with `γ_b > γ_e`.
pub fn estimate_prob_nonzero(cfg: &SystemConfig, est: &EstimatorConfig) -> Result<Estimate> {
    run(cfg, est, |p| f64::from(u8::from(p.gamma_b > p.gamma_e)), true)
}

/// Fraction of draws whose secrecy rate falls below `rs`.
pub fn estimate_sop(cfg: &SystemConfig, est: &EstimatorConfig, rs: f64) -> Result<Estimate> {
    check_rate(rs, est.mi_model.cap())?;
    let model = est.mi_model;
    run(cfg, est, |p| f64::from(u8::from(secrecy_rate(p, model) < rs)), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn est(trials: u64, workers: usize) -> EstimatorConfig {
        EstimatorConfig {
            trials,
            seed: 7,
            workers,
            mi_model: MiModel::ApproxBpsk,
        }
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a = trial_rng(3, 10).next_u64();
        let _ = trial_rng(3, 9).next_u64();
        assert_eq!(a, trial_rng(3, 10).next_u64());
        assert_ne!(a, trial_rng(3, 11).next_u64());
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let cfg = SystemConfig::new(2, 2, 2, 5.0, 0.0);
        let one = estimate_ergodic_rate(&cfg, &est(10_000, 1)).unwrap();
        let four = estimate_ergodic_rate(&cfg, &est(10_000, 4)).unwrap();
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
    }

    #[test]
    fn single_trial_has_zero_error() {
        let cfg = SystemConfig::new(1, 1, 1, 0.0, 0.0);
        let e = estimate_prob_nonzero(&cfg, &est(1, 1)).unwrap();
        assert_eq!(e.std_error, 0.0);
        assert!(e.mean == 0.0 || e.mean == 1.0);
    }

    #[test]
    fn invalid_inputs() {
        let cfg = SystemConfig::new(1, 1, 1, 0.0, 0.0);
        assert!(matches!(
            estimate_sop(&cfg, &est(0, 1), 0.5),
            Err(Error::Config { field, .. }) if field == "estimator.trials"
        ));
        assert!(matches!(estimate_sop(&cfg, &est(10, 1), 1.2), Err(Error::OutageCertain { .. })));
        assert!(matches!(estimate_sop(&cfg, &est(10, 1), -0.1), Err(Error::Domain(_))));
    }
}
