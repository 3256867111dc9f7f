//! Rayleigh-fading MIMO wiretap model with transmit antenna selection at
//! the source and selection combining at both receivers.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math_kernels::{MiModel, Modulation, PHI};

/// Antenna counts, average per-antenna SNRs (dB) and modulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_tx: u32,
    pub n_rx: u32,
    pub n_eve: u32,
    pub snr_b_db: f64,
    pub snr_e_db: f64,
    pub modulation: Modulation,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemConfig {
    pub fn new(n_tx: u32, n_rx: u32, n_eve: u32, snr_b_db: f64, snr_e_db: f64) -> Self {
        Self {
            n_tx,
            n_rx,
            n_eve,
            snr_b_db,
            snr_e_db,
            modulation: Modulation::Bpsk,
        }
    }

    pub fn with_modulation(mut self, modulation: Modulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (field, n) in [("n_tx", self.n_tx), ("n_rx", self.n_rx), ("n_eve", self.n_eve)] {
            if n == 0 {
                return Err(Error::config(field, "antenna count must be at least 1"));
            }
        }
        for (field, db) in [("snr_b_db", self.snr_b_db), ("snr_e_db", self.snr_e_db)] {
            let lin = db_to_linear(db);
            if !db.is_finite() || !lin.is_finite() || lin <= 0.0 {
                return Err(Error::config(
                    field,
                    format!("{db} dB does not map to a finite positive linear SNR"),
                ));
            }
        }
        Ok(())
    }

    /// γ̄_b as a linear ratio.
    pub fn snr_b(&self) -> f64 {
        db_to_linear(self.snr_b_db)
    }

    /// γ̄_e as a linear ratio.
    pub fn snr_e(&self) -> f64 {
        db_to_linear(self.snr_e_db)
    }

    /// N_A·N_B, the number of candidate main-channel links.
    pub fn main_links(&self) -> u32 {
        self.n_tx * self.n_rx
    }
}

/// One realization of the post-selection instantaneous SNRs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrPair {
    pub gamma_b: f64,
    pub gamma_e: f64,
}

/// A complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }
}

/// Main and eavesdropper channel matrices together with the selected
/// transmit antenna β*, legitimate receive antenna α* and eavesdropper
/// antenna ξ*.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelDraw {
    /// H_B, N_B × N_A.
    pub h_b: ComplexMatrix,
    /// H_E, N_E × N_A.
    pub h_e: ComplexMatrix,
    pub selected_tx: usize,
    pub selected_rx: usize,
    pub selected_eve: usize,
}

impl ChannelDraw {
    pub fn empty(cfg: &SystemConfig) -> Self {
        Self {
            h_b: ComplexMatrix::zeros(cfg.n_rx as usize, cfg.n_tx as usize),
            h_e: ComplexMatrix::zeros(cfg.n_eve as usize, cfg.n_tx as usize),
            selected_tx: 0,
            selected_rx: 0,
            selected_eve: 0,
        }
    }

    /// |f_AB|²
    pub fn main_gain(&self) -> f64 {
        self.h_b.get(self.selected_rx, self.selected_tx).norm_sqr()
    }

    /// |f_AE|²
    pub fn eve_gain(&self) -> f64 {
        self.h_e.get(self.selected_eve, self.selected_tx).norm_sqr()
    }

    /// Apply TAS/SC to the current matrices. Ties go to the lowest row-major
    /// index.
    pub fn select(&mut self) {
        let (mut best, mut best_idx) = (-1.0, 0);
        for (idx, h) in self.h_b.data.iter().enumerate() {
            let g = h.norm_sqr();
            if g > best {
                best = g;
                best_idx = idx;
            }
        }
        self.selected_rx = best_idx / self.h_b.cols;
        self.selected_tx = best_idx % self.h_b.cols;

        let (mut best, mut best_row) = (-1.0, 0);
        for row in 0..self.h_e.rows {
            let g = self.h_e.get(row, self.selected_tx).norm_sqr();
            if g > best {
                best = g;
                best_row = row;
            }
        }
        self.selected_eve = best_row;
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("SNR argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// Density of the maximum of `n` i.i.d. exponentials with mean `mean`.
fn max_exp_pdf(x: f64, n: u32, mean: f64) -> f64 {
    let e = (-x / mean).exp();
    let base = -(-x / mean).exp_m1();
    let power = if n == 1 { 1.0 } else { base.powi(n as i32 - 1) };
    f64::from(n) * power * e / mean
}

fn max_exp_cdf(x: f64, n: u32, mean: f64) -> f64 {
    (-(-x / mean).exp_m1()).powi(n as i32)
}

/// `1 − F(x)` for the maximum of `n` exponentials, without cancellation in
/// the far tail.
pub(crate) fn max_exp_sf(x: f64, n: u32, mean: f64) -> f64 {
    let e = (-x / mean).exp();
    -(f64::from(n) * (-e).ln_1p()).exp_m1()
}

/// PDF of γ_b: `N_A N_B (1−e^{−x/γ̄_b})^{N_A N_B−1} e^{−x/γ̄_b} / γ̄_b`.
pub fn pdf_gamma_b(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_x(x)?;
    Ok(max_exp_pdf(x, cfg.main_links(), cfg.snr_b()))
}

/// CDF of γ_b: `(1−e^{−x/γ̄_b})^{N_A N_B}`.
pub fn cdf_gamma_b(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_x(x)?;
    Ok(max_exp_cdf(x, cfg.main_links(), cfg.snr_b()))
}

/// PDF of γ_e: `N_E (1−e^{−x/γ̄_e})^{N_E−1} e^{−x/γ̄_e} / γ̄_e`.
pub fn pdf_gamma_e(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_x(x)?;
    Ok(max_exp_pdf(x, cfg.n_eve, cfg.snr_e()))
}

/// CDF of γ_e: `(1−e^{−x/γ̄_e})^{N_E}`.
pub fn cdf_gamma_e(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_x(x)?;
    Ok(max_exp_cdf(x, cfg.n_eve, cfg.snr_e()))
}

/// Draw one i.i.d. CN(0, 1) entry (variance 1/2 per real component).
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Refill `draw` in place from `rng` and apply the selection rule.
pub fn sample_channel_into<R: Rng + ?Sized>(rng: &mut R, draw: &mut ChannelDraw) {
    for h in draw.h_b.data.iter_mut() {
        *h = complex_normal(rng);
    }
    for h in draw.h_e.data.iter_mut() {
        *h = complex_normal(rng);
    }
    draw.select();
}

pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> ChannelDraw {
    let mut draw = ChannelDraw::empty(cfg);
    sample_channel_into(rng, &mut draw);
    draw
}

/// `γ_b = γ̄_b |f_AB|²`, `γ_e = γ̄_e |f_AE|²`.
pub fn snr_pair_from_draw(draw: &ChannelDraw, cfg: &SystemConfig) -> SnrPair {
    SnrPair {
        gamma_b: cfg.snr_b() * draw.main_gain(),
        gamma_e: cfg.snr_e() * draw.eve_gain(),
    }
}

/// `max(I(γ_b) − I(γ_e), 0)`; zero whenever `γ_b <= γ_e`.
pub fn secrecy_rate(pair: SnrPair, model: MiModel) -> f64 {
    if pair.gamma_b <= pair.gamma_e {
        return 0.0;
    }
    let gap = pair.gamma_b - pair.gamma_e;
    let rate = match model {
        // e^{−φγ_e} − e^{−φγ_b} = e^{−φγ_e}·(1 − e^{−φ(γ_b−γ_e)})
        MiModel::ApproxBpsk => (-PHI * pair.gamma_e).exp() * -(-PHI * gap).exp_m1(),
        MiModel::ApproxQpsk => {
            2.0 * (-PHI * pair.gamma_e / 2.0).exp() * -(-PHI * gap / 2.0).exp_m1()
        }
        _ => model.complement_unchecked(pair.gamma_e) - model.complement_unchecked(pair.gamma_b),
    };
    rate.clamp(0.0, model.cap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n_tx: u32, n_rx: u32, n_eve: u32, b: f64, e: f64) -> SystemConfig {
        SystemConfig::new(n_tx, n_rx, n_eve, b, e)
    }

    #[test]
    fn pdf_at_origin() {
        assert_eq!(pdf_gamma_b(0.0, &cfg(1, 1, 1, 0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(pdf_gamma_b(0.0, &cfg(2, 1, 1, 0.0, 0.0)).unwrap(), 0.0);
        assert!(pdf_gamma_b(-1.0, &cfg(1, 1, 1, 0.0, 0.0)).is_err());
        assert!(cdf_gamma_e(-1.0, &cfg(1, 1, 1, 0.0, 0.0)).is_err());
    }

    #[test]
    fn cdf_limits_and_median() {
        let c = cfg(3, 2, 4, 7.0, -3.0);
        assert_eq!(cdf_gamma_b(0.0, &c).unwrap(), 0.0);
        assert_eq!(cdf_gamma_e(0.0, &c).unwrap(), 0.0);
        assert!((cdf_gamma_b(1e6 * c.snr_b(), &c).unwrap() - 1.0).abs() < 1e-12);
        assert!((cdf_gamma_e(1e6 * c.snr_e(), &c).unwrap() - 1.0).abs() < 1e-12);
        let single = cfg(1, 1, 1, 0.0, 4.0);
        let median = single.snr_e() * std::f64::consts::LN_2;
        assert!((cdf_gamma_e(median, &single).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn survival_matches_cdf_complement() {
        let c = cfg(1, 1, 3, 0.0, 0.0);
        for x in [0.0, 0.1, 1.0, 5.0] {
            let sf = max_exp_sf(x, 3, c.snr_e());
            assert!((sf - (1.0 - cdf_gamma_e(x, &c).unwrap())).abs() < 1e-15);
        }
    }

    #[test]
    fn single_antenna_always_selects_zero() {
        let c = cfg(1, 1, 1, 0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let d = sample_channel(&mut rng, &c);
            assert_eq!((d.selected_tx, d.selected_rx, d.selected_eve), (0, 0, 0));
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let c = cfg(3, 2, 2, 0.0, 0.0);
        let a = sample_channel(&mut ChaCha8Rng::seed_from_u64(99), &c);
        let b = sample_channel(&mut ChaCha8Rng::seed_from_u64(99), &c);
        assert_eq!(a, b);
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let c = cfg(2, 2, 2, 0.0, 0.0);
        let mut d = ChannelDraw::empty(&c);
        for h in d.h_b.data.iter_mut() {
            *h = Complex64::new(1.0, 0.0);
        }
        d.select();
        assert_eq!((d.selected_rx, d.selected_tx, d.selected_eve), (0, 0, 0));
    }

    #[test]
    fn zero_matrices_give_zero_snrs() {
        let c = cfg(2, 3, 2, 10.0, 10.0);
        let mut d = ChannelDraw::empty(&c);
        d.select();
        let p = snr_pair_from_draw(&d, &c);
        assert_eq!((p.gamma_b, p.gamma_e), (0.0, 0.0));
    }

    #[test]
    fn unit_gain_at_zero_db() {
        let c = cfg(1, 1, 1, 0.0, 0.0);
        let mut d = ChannelDraw::empty(&c);
        d.h_b.data[0] = Complex64::new(0.6, 0.8);
        let p = snr_pair_from_draw(&d, &c);
        assert!((p.gamma_b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn secrecy_rate_examples() {
        let eq = SnrPair { gamma_b: 2.0, gamma_e: 2.0 };
        assert_eq!(secrecy_rate(eq, MiModel::ExactBpsk), 0.0);
        let sat = SnrPair { gamma_b: 1e4, gamma_e: 0.0 };
        let r = secrecy_rate(sat, MiModel::ExactBpsk);
        assert!(1.0 - r < 1e-9);
        let p = SnrPair { gamma_b: 2.0, gamma_e: 1.0 };
        let want = (-0.6507f64).exp() - (-1.3014f64).exp();
        assert!((secrecy_rate(p, MiModel::ApproxBpsk) - want).abs() < 1e-15);
        assert!((want - 0.249_529_957_108_33).abs() < 1e-13);
    }

    #[test]
    fn invalid_configs_name_the_field() {
        let bad = cfg(0, 1, 1, 0.0, 0.0);
        match bad.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "n_tx"),
            other => panic!("{other:?}"),
        }
        let bad = cfg(1, 1, 1, f64::NAN, 0.0);
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "snr_b_db"));
        let bad = cfg(1, 1, 1, 0.0, 4000.0);
        assert!(matches!(bad.validate(), Err(Error::Config { field, .. }) if field == "snr_e_db"));
    }
}
