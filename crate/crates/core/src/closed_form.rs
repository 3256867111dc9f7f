//! Analytic evaluators: approximated ergodic secrecy rate, probability of
//! non-zero secrecy, secrecy outage probability (closed form, semianalytic
//! and high-SNR asymptote), plus a direct 2-D quadrature of the ergodic rate.
//!
//! The closed forms are alternating double sums over `k ∈ [0, N_A N_B)` and
//! `j ∈ [0, N_E)` whose terms grow like `C(N_A N_B − 1, k)`. Every term is
//! built and accumulated in double-double arithmetic; beyond
//! [`MAX_MAIN_LINKS`] the binomials leave the exactly representable range and
//! the evaluators refuse.
//!
//! QPSK is handled as two BPSK rails: with rates doubled and per-rail SNRs
//! halved, `I_QPSK(γ) − I_QPSK(γ') = 2·(I_BPSK(γ/2) − I_BPSK(γ'/2))`, so each
//! QPSK quantity is the BPSK one at `(γ̄_b/2, γ̄_e/2, R_s/2)`.

use serde::{Deserialize, Serialize};

use crate::channel::{max_exp_sf, SnrPair, SystemConfig};
use crate::dd::{binomial, DoubleDouble};
use crate::error::{Error, Result};
use crate::math_kernels::{h_terms_dd, MiModel, Modulation, PHI};
use crate::quad::{self, Tolerance};

/// Largest supported N_A·N_B for the binomial sums.
pub const MAX_MAIN_LINKS: u32 = 64;

/// Indices and exponents of one `(k, j)` term of the outage sum:
/// `v_k = (1+k)/(γ̄_b φ)`, `u_j = (1+j)/(γ̄_e φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SopTermIndices {
    pub k: u32,
    pub j: u32,
    pub v_k: f64,
    pub u_j: f64,
}

/// All `(k, j)` index pairs of the outage sum for `cfg` (BPSK scaling).
pub fn sop_term_indices(cfg: &SystemConfig) -> Vec<SopTermIndices> {
    let (gb, ge) = (cfg.snr_b(), cfg.snr_e());
    let mut out = Vec::with_capacity((cfg.main_links() * cfg.n_eve) as usize);
    for k in 0..cfg.main_links() {
        for j in 0..cfg.n_eve {
            out.push(SopTermIndices {
                k,
                j,
                v_k: f64::from(1 + k) / (gb * PHI),
                u_j: f64::from(1 + j) / (ge * PHI),
            });
        }
    }
    out
}

fn check_cfg(cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    let product = u64::from(cfg.n_tx) * u64::from(cfg.n_rx);
    if product > u64::from(MAX_MAIN_LINKS) {
        return Err(Error::UnsupportedSize {
            product,
            limit: u64::from(MAX_MAIN_LINKS),
        });
    }
    Ok(())
}

pub(crate) fn check_rate(rs: f64, cap: f64) -> Result<()> {
    if rs.is_nan() || rs <= 0.0 {
        return Err(Error::domain(format!(
            "target secrecy rate must lie in (0, {cap}), got {rs}"
        )));
    }
    if rs >= cap {
        return Err(Error::OutageCertain { rate: rs, cap });
    }
    Ok(())
}

/// Per-rail linear SNRs and rate scale: `(γ̄_b, γ̄_e, rails)`.
fn rails(cfg: &SystemConfig) -> (f64, f64, f64) {
    match cfg.modulation {
        Modulation::Bpsk => (cfg.snr_b(), cfg.snr_e(), 1.0),
        Modulation::Qpsk => (cfg.snr_b() / 2.0, cfg.snr_e() / 2.0, 2.0),
    }
}

fn dd(x: f64) -> DoubleDouble {
    DoubleDouble::from_f64(x)
}

fn dd_int(n: u32) -> DoubleDouble {
    DoubleDouble::from_f64(f64::from(n))
}

fn binom_dd(n: u32, k: u32) -> DoubleDouble {
    // n < 64 here, so the value fits comfortably.
    DoubleDouble::from_u128(binomial(n, k).expect("binomial within range"))
}

fn signed(term: DoubleDouble, k: u32, j: u32) -> DoubleDouble {
    if (k + j) % 2 == 0 {
        term
    } else {
        -term
    }
}

/// BPSK approximated ergodic secrecy rate for linear `(γ̄_b, γ̄_e)`.
fn ergodic_bpsk_dd(m: u32, n_e: u32, gb: f64, ge: f64) -> DoubleDouble {
    let (gb, ge, phi) = (dd(gb), dd(ge), dd(PHI));
    let prefactor = dd_int(m) * dd_int(n_e) / ge;
    let phi_gb = phi * gb;
    let mut sum = DoubleDouble::ZERO;
    for k in 0..m {
        let kp1 = dd_int(k + 1);
        let ck = binom_dd(m - 1, k);
        // 1/(k+1) − 1/(k+1+φγ̄_b) = φγ̄_b / ((k+1)(k+1+φγ̄_b))
        let bracket = phi_gb / (kp1 * (kp1 + phi_gb));
        for j in 0..n_e {
            let denom = phi + dd_int(j + 1) / ge + kp1 / gb;
            let term = prefactor * ck * binom_dd(n_e - 1, j) * bracket / denom;
            sum += signed(term, k, j);
        }
    }
    sum
}

/// Approximated ergodic secrecy rate, the double alternating sum obtained
/// with `I(γ) ≈ 1 − e^{−φγ}`. Clamped to `[0, cap]`.
pub fn ergodic_secrecy_rate_approx(cfg: &SystemConfig) -> Result<f64> {
    check_cfg(cfg)?;
    let (gb, ge, scale) = rails(cfg);
    let value = scale * ergodic_bpsk_dd(cfg.main_links(), cfg.n_eve, gb, ge).to_f64();
    Ok(value.clamp(0.0, cfg.modulation.cap()))
}

fn prob_nonzero_dd(m: u32, n_e: u32, gb: f64, ge: f64) -> DoubleDouble {
    let (gb, ge) = (dd(gb), dd(ge));
    let prefactor = dd_int(m) * dd_int(n_e) / ge;
    let mut sum = DoubleDouble::ZERO;
    for k in 0..m {
        let kp1 = dd_int(k + 1);
        let ck = binom_dd(m - 1, k);
        for j in 0..n_e {
            let rate_sum = dd_int(j + 1) / ge + kp1 / gb;
            let term = prefactor * ck * binom_dd(n_e - 1, j) / (kp1 * rate_sum);
            sum += signed(term, k, j);
        }
    }
    sum
}

/// `Pr(γ_b > γ_e)`, exact (the event does not depend on the MI curve).
pub fn prob_nonzero_secrecy(cfg: &SystemConfig) -> Result<f64> {
    check_cfg(cfg)?;
    let value = prob_nonzero_dd(cfg.main_links(), cfg.n_eve, cfg.snr_b(), cfg.snr_e()).to_f64();
    Ok(value.clamp(0.0, 1.0))
}

/// Approximated secrecy outage probability from the closed-form double sum,
/// with each `(−R_s)^{v_k} B(u_j, 1) ₂F₁(−v_k, u_j; u_j+1; 1/R_s)` factor
/// evaluated as the real integral `H(v_k, u_j, R_s)`.
pub fn sop_approx(cfg: &SystemConfig, rs: f64) -> Result<f64> {
    check_cfg(cfg)?;
    let cap = cfg.modulation.cap();
    check_rate(rs, cap)?;
    let (gb, ge, scale) = rails(cfg);
    let rs = rs / scale;
    let m = cfg.main_links();
    let n_e = cfg.n_eve;
    let (gb, ge, phi) = (dd(gb), dd(ge), dd(PHI));

    let vs: Vec<DoubleDouble> = (0..m).map(|k| dd_int(k + 1) / (gb * phi)).collect();
    let us: Vec<DoubleDouble> = (0..n_e).map(|j| dd_int(j + 1) / (ge * phi)).collect();
    let h = h_terms_dd(&vs, &us, rs);

    let prefactor = dd_int(m) * dd_int(n_e) / (ge * phi);
    let mut sum = DoubleDouble::ZERO;
    for k in 0..m {
        let ck = binom_dd(m - 1, k) / dd_int(k + 1);
        for j in 0..n_e {
            let term = prefactor * ck * binom_dd(n_e - 1, j) * h[(k * n_e + j) as usize];
            sum += signed(term, k, j);
        }
    }
    Ok((DoubleDouble::ONE - sum).to_f64().clamp(0.0, 1.0))
}

/// Secrecy outage probability by one-dimensional quadrature over γ_e:
///
/// `P_out = Pr(γ_e ≥ γ_max) + ∫_0^{γ_max} F_b(I⁻¹(R_s + I(γ_e))) f_e(γ_e) dγ_e`
///
/// with `γ_max = I⁻¹(cap − R_s)`; beyond `γ_max` no main-channel SNR can
/// reach the target, so that tail is certain outage. The MI curve (and with
/// it the modulation) comes from `model`; `cfg.modulation` is not consulted.
pub fn sop_semianalytic(cfg: &SystemConfig, rs: f64, model: MiModel) -> Result<f64> {
    check_cfg(cfg)?;
    check_rate(rs, model.cap())?;
    let m = cfg.main_links();
    let n_e = cfg.n_eve;
    let (gb, ge) = (cfg.snr_b(), cfg.snr_e());

    // I(γ) = cap − c(γ); I(γ_b) = R_s + I(γ_e) ⇔ c(γ_b) = c(γ_e) − R_s.
    let gamma_max = model.inverse_complement(rs);
    let tail = max_exp_sf(gamma_max, n_e, ge);

    let integrand = |gamma_e: f64| {
        let density = crate::channel::pdf_gamma_e(gamma_e, cfg).unwrap_or(0.0);
        if density == 0.0 {
            return 0.0;
        }
        let needed = model.complement_unchecked(gamma_e) - rs;
        let cdf_b = if needed <= 0.0 {
            1.0
        } else {
            let gamma_b = match model {
                // −ln(e^{−φγ_e} − R_s)/φ
                MiModel::ApproxBpsk => -((-PHI * gamma_e).exp() - rs).ln() / PHI,
                _ => model.inverse_complement(needed),
            };
            (-(-gamma_b / gb).exp_m1()).powi(m as i32)
        };
        cdf_b * density
    };
    // F_b(I⁻¹(·)) rises from 0 to 1 in a layer against γ_max whose width
    // shrinks like e^{−φγ̄_b}; cluster panels geometrically toward it.
    let breaks: Vec<f64> = (1..48)
        .map(|i| gamma_max * (1.0 - 0.5f64.powi(i)))
        .chain([ge, 4.0 * ge, 16.0 * ge])
        .collect();
    let body = quad::integrate_with_breaks(
        integrand,
        0.0,
        gamma_max,
        &breaks,
        Tolerance::relative(1e-11).with_abs(1e-300),
    );
    Ok((tail + body.value).clamp(0.0, 1.0))
}

/// High-SNR limit of the outage probability as γ̄_b → ∞:
/// `1 − (1 − e^{−I⁻¹(cap − R_s)/γ̄_e})^{N_E}`. With `exact = false` the
/// approximated MI gives `1 − (1 − R_s^{1/(φγ̄_e)})^{N_E}` for BPSK.
/// Independent of γ̄_b, N_A and N_B.
pub fn sop_asymptotic(cfg: &SystemConfig, rs: f64, exact: bool) -> Result<f64> {
    cfg.validate()?;
    let cap = cfg.modulation.cap();
    check_rate(rs, cap)?;
    let ge = cfg.snr_e();
    let value = match (cfg.modulation, exact) {
        (Modulation::Bpsk, false) => {
            1.0 - (1.0 - rs.powf(1.0 / (PHI * ge))).powi(cfg.n_eve as i32)
        }
        (modulation, _) => {
            let threshold = MiModel::new(modulation, exact).inverse_complement(rs);
            max_exp_sf(threshold, cfg.n_eve, ge)
        }
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Ergodic secrecy rate by nested adaptive quadrature of
/// `∫∫ I_s(γ_b, γ_e) f_b(γ_b) f_e(γ_e)`, for any MI model (including exact
/// MI, which has no closed form). The model determines the modulation.
pub fn ergodic_secrecy_rate_quadrature(cfg: &SystemConfig, model: MiModel) -> Result<f64> {
    check_cfg(cfg)?;
    let (gb, ge) = (cfg.snr_b(), cfg.snr_e());
    let scale_b = gb * (1.0 + f64::from(cfg.main_links()).ln());
    let scale_e = ge * (1.0 + f64::from(cfg.n_eve).ln());
    let landmarks: Vec<f64> = [0.01, 0.1, 1.0, 10.0, 100.0]
        .iter()
        .flat_map(|&f| [f * gb, f * ge])
        .collect();

    let inner = |gamma_e: f64| -> f64 {
        let density_e = crate::channel::pdf_gamma_e(gamma_e, cfg).unwrap_or(0.0);
        if density_e == 0.0 {
            return 0.0;
        }
        let j = integrate_tail(
            |gamma_b| {
                let density_b = crate::channel::pdf_gamma_b(gamma_b, cfg).unwrap_or(0.0);
                if density_b == 0.0 {
                    return 0.0;
                }
                crate::channel::secrecy_rate(SnrPair { gamma_b, gamma_e }, model) * density_b
            },
            gamma_e,
            scale_b,
            &landmarks,
            Tolerance::relative(1e-11).with_abs(1e-300),
        );
        j * density_e
    };
    let value = integrate_tail(
        inner,
        0.0,
        scale_e,
        &landmarks,
        Tolerance::relative(1e-10).with_abs(1e-300),
    );
    Ok(value.clamp(0.0, model.cap()))
}

/// `∫_a^∞ f` with extra breakpoints placed at the absolute positions
/// `landmarks` (those above `a`).
fn integrate_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    landmarks: &[f64],
    tol: Tolerance,
) -> f64 {
    let mut breaks: Vec<f64> = landmarks
        .iter()
        .filter(|&&x| x > a)
        .map(|&x| (x - a) / (x - a + scale))
        .collect();
    breaks.extend([1.0 / 9.0, 0.5, 8.0 / 9.0, 64.0 / 65.0]);
    quad::integrate_with_breaks(
        |t| {
            let one_minus = 1.0 - t;
            let v = f(a + scale * t / one_minus);
            if v == 0.0 {
                0.0
            } else {
                v * scale / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        &breaks,
        tol,
    )
    .value
}
