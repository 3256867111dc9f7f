//! C ABI over `mimome-secrecy`.
//!
//! Every fallible call returns an [`MsStatus`] and writes its result through
//! an out-pointer. On failure `ms_last_error_message` describes the error for
//! the calling thread. Configurations live behind the opaque [`MsConfig`]
//! handle, created by `ms_config_new` and released with `ms_config_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mimome_secrecy::{closed_form, math_kernels, monte_carlo};
use mimome_secrecy::{Error, EstimatorConfig, MiModel, Modulation, SystemConfig};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsStatus {
    Ok = 0,
    NullPointer = 1,
    Config = 2,
    Domain = 3,
    Io = 4,
    UnsupportedSize = 5,
    OutageCertain = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsModulation {
    Bpsk = 0,
    Qpsk = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsMiModel {
    ExactBpsk = 0,
    ApproxBpsk = 1,
    ExactQpsk = 2,
    ApproxQpsk = 3,
}

/// Simulation settings. `workers` does not change results, only speed.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct MsEstimatorConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: u32,
    pub mi_model: MsMiModel,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MsEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Opaque system configuration.
pub struct MsConfig {
    inner: SystemConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> MsStatus {
    match err {
        Error::Config { .. } => MsStatus::Config,
        Error::Domain(_) => MsStatus::Domain,
        Error::Io { .. } => MsStatus::Io,
        Error::UnsupportedSize { .. } => MsStatus::UnsupportedSize,
        Error::OutageCertain { .. } => MsStatus::OutageCertain,
    }
}

impl From<MsMiModel> for MiModel {
    fn from(m: MsMiModel) -> Self {
        match m {
            MsMiModel::ExactBpsk => MiModel::ExactBpsk,
            MsMiModel::ApproxBpsk => MiModel::ApproxBpsk,
            MsMiModel::ExactQpsk => MiModel::ExactQpsk,
            MsMiModel::ApproxQpsk => MiModel::ApproxQpsk,
        }
    }
}

impl From<MsModulation> for Modulation {
    fn from(m: MsModulation) -> Self {
        match m {
            MsModulation::Bpsk => Modulation::Bpsk,
            MsModulation::Qpsk => Modulation::Qpsk,
        }
    }
}

/// Runs `f`, stores its value in `out` and maps errors and panics to a status.
fn guard<T>(out: *mut T, f: impl FnOnce() -> mimome_secrecy::Result<T>) -> MsStatus {
    if out.is_null() {
        set_last_error("output pointer is null".into());
        return MsStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(value)) => {
            unsafe { out.write(value) };
            MsStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            MsStatus::Panic
        }
    }
}

unsafe fn config<'a>(cfg: *const MsConfig) -> Option<&'a SystemConfig> {
    cfg.as_ref().map(|c| &c.inner)
}

macro_rules! with_config {
    ($cfg:expr, $out:expr, |$c:ident| $body:expr) => {{
        let Some($c) = (unsafe { config($cfg) }) else {
            set_last_error("config handle is null".into());
            return MsStatus::NullPointer;
        };
        guard($out, || $body)
    }};
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ms_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ms_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates and allocates a configuration. SNRs are in dB.
#[no_mangle]
pub unsafe extern "C" fn ms_config_new(
    n_tx: u32,
    n_rx: u32,
    n_eve: u32,
    snr_b_db: f64,
    snr_e_db: f64,
    modulation: MsModulation,
    out: *mut *mut MsConfig,
) -> MsStatus {
    guard(out, || {
        let inner = SystemConfig::new(n_tx, n_rx, n_eve, snr_b_db, snr_e_db)
            .with_modulation(modulation.into());
        inner.validate()?;
        Ok(Box::into_raw(Box::new(MsConfig { inner })))
    })
}

/// Releases a configuration; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn ms_config_free(cfg: *mut MsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Replaces both average SNRs (dB), keeping the handle unchanged on error.
#[no_mangle]
pub unsafe extern "C" fn ms_config_set_snr(cfg: *mut MsConfig, snr_b_db: f64, snr_e_db: f64) -> MsStatus {
    let Some(handle) = cfg.as_mut() else {
        set_last_error("config handle is null".into());
        return MsStatus::NullPointer;
    };
    let mut unit = ();
    guard(&mut unit, || {
        let next = SystemConfig { snr_b_db, snr_e_db, ..handle.inner };
        next.validate()?;
        handle.inner = next;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn ms_mi(model: MsMiModel, gamma: f64, out: *mut f64) -> MsStatus {
    guard(out, || MiModel::from(model).mi(gamma))
}

#[no_mangle]
pub unsafe extern "C" fn ms_mi_inverse(model: MsMiModel, target: f64, out: *mut f64) -> MsStatus {
    guard(out, || math_kernels::mi_inverse(target, model.into()))
}

/// `∫_rs^1 t^(u−1) (t − rs)^v dt`.
#[no_mangle]
pub unsafe extern "C" fn ms_h_term(v: f64, u: f64, rs: f64, out: *mut f64) -> MsStatus {
    guard(out, || math_kernels::h_term(v, u, rs))
}

#[no_mangle]
pub unsafe extern "C" fn ms_ergodic_rate_approx(cfg: *const MsConfig, out: *mut f64) -> MsStatus {
    with_config!(cfg, out, |c| closed_form::ergodic_secrecy_rate_approx(c))
}

#[no_mangle]
pub unsafe extern "C" fn ms_ergodic_rate_quadrature(
    cfg: *const MsConfig,
    model: MsMiModel,
    out: *mut f64,
) -> MsStatus {
    with_config!(cfg, out, |c| closed_form::ergodic_secrecy_rate_quadrature(c, model.into()))
}

#[no_mangle]
pub unsafe extern "C" fn ms_prob_nonzero(cfg: *const MsConfig, out: *mut f64) -> MsStatus {
    with_config!(cfg, out, |c| closed_form::prob_nonzero_secrecy(c))
}

#[no_mangle]
pub unsafe extern "C" fn ms_sop_approx(cfg: *const MsConfig, rs: f64, out: *mut f64) -> MsStatus {
    with_config!(cfg, out, |c| closed_form::sop_approx(c, rs))
}

#[no_mangle]
pub unsafe extern "C" fn ms_sop_semianalytic(
    cfg: *const MsConfig,
    rs: f64,
    model: MsMiModel,
    out: *mut f64,
) -> MsStatus {
    with_config!(cfg, out, |c| closed_form::sop_semianalytic(c, rs, model.into()))
}

#[no_mangle]
pub unsafe extern "C" fn ms_sop_asymptotic(cfg: *const MsConfig, rs: f64, exact: bool, out: *mut f64) -> MsStatus {
    with_config!(cfg, out, |c| closed_form::sop_asymptotic(c, rs, exact))
}

unsafe fn estimator(est: *const MsEstimatorConfig) -> Option<EstimatorConfig> {
    est.as_ref().map(|e| EstimatorConfig {
        trials: e.trials,
        seed: e.seed,
        workers: e.workers as usize,
        mi_model: e.mi_model.into(),
    })
}

fn to_ffi(e: monte_carlo::Estimate) -> MsEstimate {
    MsEstimate {
        mean: e.mean,
        std_error: e.std_error,
        trials: e.trials,
        seed: e.seed,
    }
}

macro_rules! with_estimator {
    ($est:expr, |$e:ident| $body:expr) => {{
        let Some($e) = (unsafe { estimator($est) }) else {
            set_last_error("estimator config is null".into());
            return MsStatus::NullPointer;
        };
        $body
    }};
}

#[no_mangle]
pub unsafe extern "C" fn ms_estimate_ergodic_rate(
    cfg: *const MsConfig,
    est: *const MsEstimatorConfig,
    out: *mut MsEstimate,
) -> MsStatus {
    with_estimator!(est, |e| with_config!(cfg, out, |c| {
        monte_carlo::estimate_ergodic_rate(c, &e).map(to_ffi)
    }))
}

#[no_mangle]
pub unsafe extern "C" fn ms_estimate_prob_nonzero(
    cfg: *const MsConfig,
    est: *const MsEstimatorConfig,
    out: *mut MsEstimate,
) -> MsStatus {
    with_estimator!(est, |e| with_config!(cfg, out, |c| {
        monte_carlo::estimate_prob_nonzero(c, &e).map(to_ffi)
    }))
}

#[no_mangle]
pub unsafe extern "C" fn ms_estimate_sop(
    cfg: *const MsConfig,
    est: *const MsEstimatorConfig,
    rs: f64,
    out: *mut MsEstimate,
) -> MsStatus {
    with_estimator!(est, |e| with_config!(cfg, out, |c| {
        monte_carlo::estimate_sop(c, &e, rs).map(to_ffi)
    }))
}
