//! Mutual-information kernels for BPSK/QPSK over AWGN, their inverses, and
//! the composite integral `H(v, u, rs)` behind the closed-form outage sum.
//!
//! Internally every model is evaluated through its *complement*
//! `cap − I(γ)`, which stays relatively accurate as the MI saturates. The
//! secrecy-rate difference `I(γ_b) − I(γ_e)` and the inverse near the cap are
//! both formed from complements.

use std::f64::consts::{FRAC_1_SQRT_2, LOG2_E, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dd::DoubleDouble;
use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};

/// Decay constant of the exponential BPSK MI approximation `1 − e^{−φγ}`.
pub const PHI: f64 = 0.6507;

/// Above this linear SNR the exact BPSK integrand develops a softplus corner
/// of width `~1/√γ` that 64 Hermite nodes cannot resolve to 1e-9; adaptive
/// Gauss–Kronrod takes over.
pub const HERMITE_SNR_LIMIT: f64 = 1.0;

const HERMITE_NODES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl Modulation {
    /// Alphabet cap in bits: log2 of the constellation size.
    pub fn cap(self) -> f64 {
        match self {
            Modulation::Bpsk => 1.0,
            Modulation::Qpsk => 2.0,
        }
    }
}

/// Which mutual-information curve to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiModel {
    ExactBpsk,
    ApproxBpsk,
    ExactQpsk,
    ApproxQpsk,
}

impl MiModel {
    pub const ALL: [MiModel; 4] = [
        MiModel::ExactBpsk,
        MiModel::ApproxBpsk,
        MiModel::ExactQpsk,
        MiModel::ApproxQpsk,
    ];

    pub fn new(modulation: Modulation, exact: bool) -> Self {
        match (modulation, exact) {
            (Modulation::Bpsk, true) => MiModel::ExactBpsk,
            (Modulation::Bpsk, false) => MiModel::ApproxBpsk,
            (Modulation::Qpsk, true) => MiModel::ExactQpsk,
            (Modulation::Qpsk, false) => MiModel::ApproxQpsk,
        }
    }

    pub fn modulation(self) -> Modulation {
        match self {
            MiModel::ExactBpsk | MiModel::ApproxBpsk => Modulation::Bpsk,
            MiModel::ExactQpsk | MiModel::ApproxQpsk => Modulation::Qpsk,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, MiModel::ExactBpsk | MiModel::ExactQpsk)
    }

    pub fn cap(self) -> f64 {
        self.modulation().cap()
    }

    /// Mutual information in bits at linear SNR `gamma`.
    pub fn mi(self, gamma: f64) -> Result<f64> {
        check_snr(gamma)?;
        Ok(self.mi_unchecked(gamma))
    }

    pub(crate) fn mi_unchecked(self, gamma: f64) -> f64 {
        match self {
            MiModel::ApproxBpsk => -(-PHI * gamma).exp_m1(),
            MiModel::ApproxQpsk => -2.0 * (-PHI * gamma / 2.0).exp_m1(),
            _ => self.cap() - self.complement_unchecked(gamma),
        }
    }

    /// `cap − I(γ)`, accurate in relative terms even when tiny.
    pub(crate) fn complement_unchecked(self, gamma: f64) -> f64 {
        match self {
            MiModel::ExactBpsk => bpsk_exact_complement(gamma, Rule::Production),
            MiModel::ApproxBpsk => (-PHI * gamma).exp(),
            MiModel::ExactQpsk => 2.0 * bpsk_exact_complement(gamma / 2.0, Rule::Production),
            MiModel::ApproxQpsk => 2.0 * (-PHI * gamma / 2.0).exp(),
        }
    }

    /// Linear SNR at which the complement `cap − I(γ)` equals `complement`.
    /// Values at or above the cap map to 0.
    pub(crate) fn inverse_complement(self, complement: f64) -> f64 {
        let cap = self.cap();
        if complement >= cap {
            return 0.0;
        }
        if complement <= 0.0 {
            return f64::INFINITY;
        }
        match self {
            MiModel::ApproxBpsk => -complement.ln() / PHI,
            MiModel::ApproxQpsk => -2.0 * (complement / 2.0).ln() / PHI,
            _ => {
                // −ln(complement) is increasing in γ; solve in that scale.
                let goal = -complement.ln();
                solve_increasing(|g| -self.complement_unchecked(g).ln(), goal)
            }
        }
    }
}

fn check_snr(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::domain(format!(
            "linear SNR must be finite and nonnegative, got {gamma}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Rule {
    Production,
    Refined,
}

/// `log2(1 + e^z)` without overflow for large `z`.
fn softplus_log2(z: f64) -> f64 {
    if z > 0.0 {
        z * LOG2_E + (-z).exp().ln_1p() * LOG2_E
    } else {
        z.exp().ln_1p() * LOG2_E
    }
}

fn hermite(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static H64: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static H128: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        64 => H64.get_or_init(|| quad::gauss_hermite(64)),
        128 => H128.get_or_init(|| quad::gauss_hermite(128)),
        _ => unreachable!("only 64 and 128 node rules are cached"),
    }
}

/// `E_u[log2(1 + e^{−2√γ·u − 2γ})]` for `u ~ N(0, 1)`, i.e. `1 − I_BPSK(γ)`.
fn bpsk_exact_complement(gamma: f64, rule: Rule) -> f64 {
    if gamma == 0.0 {
        return 1.0;
    }
    let root = gamma.sqrt();
    let integrand = |u: f64| softplus_log2(-2.0 * root * u - 2.0 * gamma);
    if gamma <= HERMITE_SNR_LIMIT {
        let n = match rule {
            Rule::Production => HERMITE_NODES,
            Rule::Refined => 2 * HERMITE_NODES,
        };
        let (x, w) = hermite(n);
        // u = √2·x maps the e^{−x²} weight onto the standard normal.
        let s: f64 = x
            .iter()
            .zip(w)
            .map(|(&x, &w)| w * integrand(std::f64::consts::SQRT_2 * x))
            .sum();
        return s / PI.sqrt();
    }
    // The mass sits in a bump of width ~1/√γ around u = −√γ (the softplus
    // corner); seed panels at that scale.
    let corner = -root;
    let s = 1.0 / root;
    let breaks = [
        corner - 8.0,
        corner - 2.0,
        corner - 8.0 * s,
        corner - 2.0 * s,
        corner - 0.5 * s,
        corner,
        corner + 0.5 * s,
        corner + 2.0 * s,
        corner + 8.0 * s,
        corner + 2.0,
        corner + 8.0,
    ];
    let tol = match rule {
        Rule::Production => Tolerance::relative(1e-12),
        Rule::Refined => Tolerance::relative(1e-15),
    };
    let norm = FRAC_1_SQRT_2 / PI.sqrt();
    quad::integrate_with_breaks(
        |u| norm * (-0.5 * u * u).exp() * integrand(u),
        corner - 38.5,
        38.5f64.max(corner + 38.5),
        &breaks,
        tol,
    )
    .value
}

/// Exact BPSK mutual information (bits) by Gaussian quadrature.
pub fn mi_bpsk_exact(gamma: f64) -> Result<f64> {
    MiModel::ExactBpsk.mi(gamma)
}

/// Exact BPSK MI with twice the Hermite nodes (or a 1000× tighter adaptive
/// tolerance above [`HERMITE_SNR_LIMIT`]); used to bound the production
/// rule's own error.
pub fn mi_bpsk_exact_refined(gamma: f64) -> Result<f64> {
    check_snr(gamma)?;
    Ok(1.0 - bpsk_exact_complement(gamma, Rule::Refined))
}

/// `1 − e^{−φγ}`.
pub fn mi_bpsk_approx(gamma: f64) -> Result<f64> {
    MiModel::ApproxBpsk.mi(gamma)
}

/// QPSK as two orthogonal BPSK rails sharing the symbol SNR equally:
/// `2·I_BPSK(γ/2)`.
pub fn mi_qpsk(gamma: f64, exact: bool) -> Result<f64> {
    MiModel::new(Modulation::Qpsk, exact).mi(gamma)
}

/// Linear SNR `γ` with `I(γ) = target`.
pub fn mi_inverse(target: f64, model: MiModel) -> Result<f64> {
    let cap = model.cap();
    if !target.is_finite() || target < 0.0 {
        return Err(Error::domain(format!(
            "MI target must be finite and nonnegative, got {target}"
        )));
    }
    if target >= cap {
        return Err(Error::domain(format!(
            "MI target {target} is not below the alphabet cap {cap}; the MI never attains it"
        )));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    Ok(match model {
        MiModel::ApproxBpsk => -(-target).ln_1p() / PHI,
        MiModel::ApproxQpsk => -2.0 * (-target / 2.0).ln_1p() / PHI,
        _ if target <= cap / 2.0 => solve_increasing(|g| model.mi_unchecked(g), target),
        _ => model.inverse_complement(cap - target),
    })
}

/// Root of a continuous increasing `f` with `f(0) <= goal`, by bracketing
/// then Illinois false position.
fn solve_increasing<F: Fn(f64) -> f64>(f: F, goal: f64) -> f64 {
    let mut lo = 0.0;
    let mut f_lo = f(lo) - goal;
    if f_lo >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut f_hi = f(hi) - goal;
    while f_hi < 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi) - goal;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let tol = 1e-14 * goal.abs().max(1e-300);
    let mut side = 0i8;
    for _ in 0..200 {
        let mut x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x) - goal;
        if fx.abs() <= tol || (hi - lo) <= 4.0 * f64::EPSILON * hi {
            return x;
        }
        if fx < 0.0 {
            lo = x;
            f_lo = fx;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            f_hi = fx;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

fn check_h_args(v: f64, u: f64, rs: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::domain(format!("h_term: v must be >= 0, got {v}")));
    }
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::domain(format!("h_term: u must be > 0, got {u}")));
    }
    if !(rs > 0.0 && rs < 1.0) {
        return Err(Error::domain(format!("h_term: rs must lie in (0, 1), got {rs}")));
    }
    Ok(())
}

/// `H(v, u, rs) = ∫_{rs}^{1} t^{u−1} (t − rs)^v dt`.
///
/// This is the real value behind `(−rs)^v·B(u, 1)·₂F₁(−v, u; u+1; 1/rs)`;
/// the hypergeometric form is never evaluated. Integration uses a
/// double-exponential rule whose node clustering absorbs the `(t − rs)^v`
/// power law at the lower limit.
pub fn h_term(v: f64, u: f64, rs: f64) -> Result<f64> {
    check_h_args(v, u, rs)?;
    Ok(h_terms_dd(&[DoubleDouble::from_f64(v)], &[DoubleDouble::from_f64(u)], rs)[0].to_f64())
}

/// `H(v_k, u_j, rs)` for every pair, row-major in `k`, in double-double
/// precision. Arguments are assumed validated.
pub(crate) fn h_terms_dd(vs: &[DoubleDouble], us: &[DoubleDouble], rs: f64) -> Vec<DoubleDouble> {
    let rs_dd = DoubleDouble::from_f64(rs);
    let width = DoubleDouble::ONE - rs_dd;
    let u_minus_one: Vec<DoubleDouble> = us.iter().map(|&u| u - DoubleDouble::ONE).collect();
    let mut log_t_terms = vec![DoubleDouble::ZERO; us.len()];
    let mut log_s_terms = vec![DoubleDouble::ZERO; vs.len()];
    let (values, _) = quad::tanh_sinh_dd_batch(
        |from_rs, from_one, out: &mut [DoubleDouble]| {
            let t = if from_rs < from_one {
                rs_dd + from_rs
            } else {
                DoubleDouble::ONE - from_one
            };
            let ln_t = t.ln();
            let ln_s = from_rs.ln();
            for (slot, &a) in log_t_terms.iter_mut().zip(&u_minus_one) {
                *slot = if a.hi == 0.0 { DoubleDouble::ZERO } else { a * ln_t };
            }
            for (slot, &v) in log_s_terms.iter_mut().zip(vs) {
                *slot = if v.hi == 0.0 { DoubleDouble::ZERO } else { v * ln_s };
            }
            let mut idx = 0;
            for ls in &log_s_terms {
                for lt in &log_t_terms {
                    out[idx] = (*ls + *lt).exp();
                    idx += 1;
                }
            }
        },
        vs.len() * us.len(),
        width,
        1e-26,
    );
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approx_substitutions() {
        assert_eq!(mi_bpsk_approx(0.0).unwrap(), 0.0);
        assert!((mi_bpsk_approx(1.0).unwrap() - 0.478_319_527_411_34).abs() < 1e-7);
        assert!((mi_bpsk_approx(10.0).unwrap() - (1.0 - (-6.507f64).exp())).abs() < 1e-15);
        assert!((mi_qpsk(2.0, false).unwrap() - 2.0 * (1.0 - (-PHI).exp())).abs() < 1e-15);
    }

    #[test]
    fn exact_endpoints() {
        assert!(mi_bpsk_exact(0.0).unwrap().abs() < 1e-15);
        let top = mi_bpsk_exact(1e4).unwrap();
        assert!(1.0 - top < 1e-9 && top <= 1.0);
        assert!(mi_qpsk(0.0, true).unwrap().abs() < 1e-15);
        assert!((mi_qpsk(1e5, true).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_or_nan_snr_is_domain_error() {
        for model in MiModel::ALL {
            assert!(matches!(model.mi(-1e-3), Err(Error::Domain(_))));
            assert!(matches!(model.mi(f64::NAN), Err(Error::Domain(_))));
            assert!(matches!(model.mi(f64::INFINITY), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn inverse_rejects_cap() {
        assert!(mi_inverse(1.0, MiModel::ExactBpsk).is_err());
        assert!(mi_inverse(2.0, MiModel::ApproxQpsk).is_err());
        assert!(mi_inverse(-0.1, MiModel::ApproxBpsk).is_err());
        assert_eq!(mi_inverse(0.0, MiModel::ExactQpsk).unwrap(), 0.0);
        assert!((mi_inverse(0.478_319_527_411_34, MiModel::ApproxBpsk).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn complement_inverse_near_cap() {
        for model in MiModel::ALL {
            let g = model.inverse_complement(1e-12);
            let c = model.complement_unchecked(g);
            assert!((c / 1e-12 - 1.0).abs() < 1e-9, "{model:?}: {c}");
        }
    }

    #[test]
    fn h_term_polynomial_cases() {
        for &rs in &[0.1, 0.5, 0.9] {
            let got = h_term(1.0, 1.0, rs).unwrap();
            let want = (1.0 - rs) * (1.0 - rs) / 2.0;
            assert!((got / want - 1.0).abs() < 1e-14, "rs={rs}");
        }
    }

    #[test]
    fn h_term_domain() {
        assert!(h_term(-0.1, 1.0, 0.5).is_err());
        assert!(h_term(0.5, 0.0, 0.5).is_err());
        assert!(h_term(0.5, 1.0, 1.0).is_err());
        assert!(h_term(0.5, 1.0, 0.0).is_err());
    }
}
