//! C ABI over the verification suites, chain operators and spectra.
//!
//! Every function returns an [`HbStatus`]. Objects cross the boundary as opaque handles that
//! the caller releases with the matching `*_free`. On failure the message is available from
//! [`hb_last_error`] on the same thread.

use hecke_boundary::cli::{emit_spectrum, emit_verify, run_spectrum, run_suite, Format, RightArg, RunConfig, Suite};
use hecke_boundary::reflection_k::LeftBoundaryKind;
use hecke_boundary::spin_chain::{build_hamiltonian, build_transfer, HamiltonianRoute};
use hecke_boundary::{Gauge, ModelParams, Operator, C64};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes. The first four match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbStatus {
    Ok = 0,
    CheckFailed = 1,
    InvalidInput = 2,
    Io = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbGauge {
    Homogeneous = 0,
    Principal = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbLeft {
    Identity = 0,
    TransposeShift = 1,
    AffineLimit = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbRight {
    Explicit = 0,
    Ansatz = 1,
    Diagonal = 2,
    Trivial = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HbSuite {
    Hecke = 0,
    Ybe = 1,
    Reflection = 2,
    Algebra = 3,
    Chain = 4,
    Symmetry = 5,
}

/// Complex number as two doubles.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HbComplex {
    pub re: f64,
    pub im: f64,
}

impl From<HbComplex> for C64 {
    fn from(z: HbComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Opaque chain configuration: model parameters, boundaries and sampling settings.
pub struct HbChain {
    cfg: RunConfig,
}

/// Opaque dense operator on the chain space.
pub struct HbOperator {
    op: Operator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn guard(f: impl FnOnce() -> Result<HbStatus, (HbStatus, String)>) -> HbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            HbStatus::Panic
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> (HbStatus, String) {
    (HbStatus::InvalidInput, e.to_string())
}

fn null(what: &str) -> (HbStatus, String) {
    (HbStatus::NullPointer, format!("{what} is null"))
}

fn out_string(text: String, out: *mut *mut c_char) -> Result<(), (HbStatus, String)> {
    if out.is_null() {
        return Err(null("output string pointer"));
    }
    let c = CString::new(text).map_err(invalid)?;
    // SAFETY: `out` checked non-null above.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Last error message on this thread, or null. Owned by the library; valid until the next call.
#[no_mangle]
pub extern "C" fn hb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Create a chain. `diag_block` and `xi` are used only by the diagonal right boundary.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn hb_chain_new(
    n: usize,
    sites: usize,
    mu: HbComplex,
    m: HbComplex,
    zeta: HbComplex,
    gauge: HbGauge,
    left: HbLeft,
    right: HbRight,
    diag_block: usize,
    xi: HbComplex,
    out: *mut *mut HbChain,
) -> HbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams::new(n, mu.into(), m.into(), zeta.into(), sites).map_err(invalid)?;
        if matches!(right, HbRight::Diagonal) && (diag_block < 1 || diag_block >= n) {
            return Err(invalid(format!("diag_block L = {diag_block} must satisfy 1 <= L < n = {n}")));
        }
        let cfg = RunConfig {
            params,
            gauge: match gauge {
                HbGauge::Homogeneous => Gauge::Homogeneous,
                HbGauge::Principal => Gauge::Principal,
            },
            left: match left {
                HbLeft::Identity => LeftBoundaryKind::Identity,
                HbLeft::TransposeShift => LeftBoundaryKind::TransposeShift,
                HbLeft::AffineLimit => LeftBoundaryKind::AffineLimit,
            },
            right: match right {
                HbRight::Explicit => RightArg::Explicit,
                HbRight::Ansatz => RightArg::Ansatz,
                HbRight::Diagonal => RightArg::Diagonal,
                HbRight::Trivial => RightArg::Trivial,
            },
            diag_block: if matches!(right, HbRight::Diagonal) { diag_block } else { 1 },
            xi: xi.into(),
            ..RunConfig::default()
        };
        *out = Box::into_raw(Box::new(HbChain { cfg }));
        Ok(HbStatus::Ok)
    })
}

/// # Safety
/// `chain` must come from [`hb_chain_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hb_chain_free(chain: *mut HbChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Run one suite. Writes the JSON report to `out_json` (free with [`hb_string_free`]) and
/// returns `Ok` if every check passed, `CheckFailed` otherwise.
///
/// # Safety
/// `chain` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hb_verify(
    chain: *const HbChain,
    suite: HbSuite,
    samples: usize,
    seed: u64,
    tol: f64,
    out_json: *mut *mut c_char,
) -> HbStatus {
    guard(|| {
        let chain = chain.as_ref().ok_or_else(|| null("chain"))?;
        if !(tol.is_finite() && tol > 0.0) {
            return Err(invalid(format!("tol = {tol} must be positive and finite")));
        }
        let cfg = RunConfig { samples, seed, tol, ..chain.cfg.clone() };
        let suite = match suite {
            HbSuite::Hecke => Suite::Hecke,
            HbSuite::Ybe => Suite::Ybe,
            HbSuite::Reflection => Suite::Reflection,
            HbSuite::Algebra => Suite::Algebra,
            HbSuite::Chain => Suite::Chain,
            HbSuite::Symmetry => Suite::Symmetry,
        };
        let report = run_suite(&cfg, suite).map_err(|e| invalid(e.message()))?;
        let pass = report.pass;
        out_string(emit_verify(&[report], Format::Json).trim_end().to_string(), out_json)?;
        Ok(if pass { HbStatus::Ok } else { HbStatus::CheckFailed })
    })
}

/// Spectrum of the open-chain Hamiltonian as a JSON report.
///
/// # Safety
/// `chain` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hb_spectrum(chain: *const HbChain, out_json: *mut *mut c_char) -> HbStatus {
    guard(|| {
        let chain = chain.as_ref().ok_or_else(|| null("chain"))?;
        let report = run_spectrum(&chain.cfg).map_err(|e| invalid(e.message()))?;
        out_string(emit_spectrum(&report, Format::Json).trim_end().to_string(), out_json)?;
        Ok(HbStatus::Ok)
    })
}

/// Open-chain Hamiltonian (Hecke-generator form).
///
/// # Safety
/// `chain` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hb_hamiltonian(chain: *const HbChain, out: *mut *mut HbOperator) -> HbStatus {
    guard(|| {
        let chain = chain.as_ref().ok_or_else(|| null("chain"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let op = build_hamiltonian(&chain.cfg.chain_spec(), HamiltonianRoute::HeckeForm).map_err(invalid)?;
        *out = Box::into_raw(Box::new(HbOperator { op }));
        Ok(HbStatus::Ok)
    })
}

/// Transfer matrix t(λ); `closed` selects the periodic chain.
///
/// # Safety
/// `chain` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hb_transfer(
    chain: *const HbChain,
    lambda: HbComplex,
    closed: bool,
    out: *mut *mut HbOperator,
) -> HbStatus {
    guard(|| {
        let chain = chain.as_ref().ok_or_else(|| null("chain"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let op = build_transfer(&chain.cfg.chain_spec(), lambda.into(), closed).map_err(invalid)?;
        *out = Box::into_raw(Box::new(HbOperator { op }));
        Ok(HbStatus::Ok)
    })
}

/// Side length of the square matrix.
///
/// # Safety
/// `op` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hb_operator_dim(op: *const HbOperator) -> usize {
    op.as_ref().map_or(0, |o| o.op.side())
}

/// Copy the matrix in row-major order into `buf`, which holds `len` complex entries.
///
/// # Safety
/// `op` must be a live handle; `buf` must point to `len` writable [`HbComplex`] values.
#[no_mangle]
pub unsafe extern "C" fn hb_operator_copy(op: *const HbOperator, buf: *mut HbComplex, len: usize) -> HbStatus {
    guard(|| {
        let o = op.as_ref().ok_or_else(|| null("operator"))?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        let d = o.op.side();
        if len < d * d {
            return Err(invalid(format!("buffer holds {len} entries, need {}", d * d)));
        }
        let dst = std::slice::from_raw_parts_mut(buf, d * d);
        for r in 0..d {
            for c in 0..d {
                let z = o.op.get(r, c);
                dst[r * d + c] = HbComplex { re: z.re, im: z.im };
            }
        }
        Ok(HbStatus::Ok)
    })
}

/// # Safety
/// `op` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hb_operator_free(op: *mut HbOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn cx(re: f64, im: f64) -> HbComplex {
        HbComplex { re, im }
    }

    #[test]
    fn invalid_mu_sets_message() {
        let mut h = std::ptr::null_mut();
        let s = unsafe {
            hb_chain_new(3, 2, cx(0.0, 0.0), cx(0.9, 0.2), cx(0.6, 0.0), HbGauge::Homogeneous, HbLeft::Identity, HbRight::Explicit, 1, cx(0.3, 0.0), &mut h)
        };
        assert_eq!(s, HbStatus::InvalidInput);
        assert!(h.is_null());
        let msg = unsafe { CStr::from_ptr(hb_last_error()) }.to_str().unwrap();
        assert!(msg.contains("sinh(i mu)"));
    }

    #[test]
    fn null_handles() {
        let mut s = std::ptr::null_mut();
        assert_eq!(unsafe { hb_verify(std::ptr::null(), HbSuite::Ybe, 1, 0, 1e-9, &mut s) }, HbStatus::NullPointer);
        assert_eq!(unsafe { hb_operator_dim(std::ptr::null()) }, 0);
        unsafe {
            hb_chain_free(std::ptr::null_mut());
            hb_string_free(std::ptr::null_mut());
        }
    }
}
