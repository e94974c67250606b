//! C interface to `jsr-core`.
//!
//! Objects are opaque handles created by `*_new`/`*_parse`/`jsr_compute`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`JsrStatus`]; on failure `jsr_last_error()` describes the problem for
//! the calling thread. Strings returned to the caller are released with
//! `jsr_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Instant;

use jsr_core::apps::daubechies;
use jsr_core::cli::{self, CertificateFile};
use jsr_core::linalg::Matrix;
use jsr_core::pipeline::{compute, ComputeOptions};
use jsr_core::polytope::RunStatus;
use jsr_core::{Error, MatrixFamily};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JsrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    Numerical = 4,
    LinearProgram = 5,
    NoCandidate = 6,
    Balancing = 7,
    Io = 8,
    /// The polytope did not close within the iteration limit. The
    /// certificate is still returned but does not certify the JSR.
    NotCertified = 9,
    Internal = 10,
}

impl From<&Error> for JsrStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::DimensionMismatch(_) | Error::InvalidInput(_) => JsrStatus::InvalidInput,
            Error::Parse { .. } | Error::Json(_) => JsrStatus::Parse,
            Error::NoConvergence { .. } | Error::ComplexLeading { .. } | Error::DegeneratePairing { .. } => {
                JsrStatus::Numerical
            }
            Error::LpStall { .. } | Error::LpStatus(_) => JsrStatus::LinearProgram,
            Error::NoCandidate(_) => JsrStatus::NoCandidate,
            Error::Balancing(_) => JsrStatus::Balancing,
            Error::Io(_) => JsrStatus::Io,
        }
    }
}

/// Tunable settings; obtain defaults from `jsr_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct JsrOptions {
    pub n_bar: usize,
    pub k_balance: usize,
    pub k_max: usize,
    pub delta_int: f64,
    pub adjoint: bool,
    pub parallel: bool,
}

impl JsrOptions {
    fn to_compute(self) -> ComputeOptions {
        let mut o = ComputeOptions::default();
        o.candidates.n_bar = self.n_bar;
        o.k_balance = self.k_balance;
        o.k_balance_max = o.k_balance_max.max(self.k_balance);
        o.polytope.k_max = self.k_max;
        o.polytope.delta_int = self.delta_int;
        o.adjoint = self.adjoint;
        o.polytope.parallel = self.parallel;
        o
    }
}

/// Opaque matrix family.
pub struct JsrFamily {
    inner: MatrixFamily,
}

/// Opaque certificate.
pub struct JsrCertificate {
    inner: CertificateFile,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn fail(status: JsrStatus, msg: impl Into<String>) -> JsrStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> JsrStatus {
    let status = JsrStatus::from(&e);
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> JsrStatus) -> JsrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(JsrStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, JsrStatus> {
    if s.is_null() {
        return Err(fail(JsrStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(JsrStatus::InvalidInput, "string is not UTF-8"))
}

fn string_out(s: String, out: *mut *mut c_char) -> JsrStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            JsrStatus::Ok
        }
        Err(_) => fail(JsrStatus::Internal, "string contains a NUL byte"),
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn jsr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn jsr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn jsr_options_default() -> JsrOptions {
    let o = ComputeOptions::default();
    JsrOptions {
        n_bar: o.candidates.n_bar,
        k_balance: o.k_balance,
        k_max: o.polytope.k_max,
        delta_int: o.polytope.delta_int,
        adjoint: false,
        parallel: false,
    }
}

/// Builds a family from `count` square matrices of size `dim`, stored
/// one after another in row-major order.
///
/// # Safety
/// `data` must point to `count * dim * dim` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jsr_family_new(
    dim: usize,
    count: usize,
    data: *const f64,
    out: *mut *mut JsrFamily,
) -> JsrStatus {
    guard(|| {
        if data.is_null() || out.is_null() {
            return fail(JsrStatus::NullPointer, "null argument");
        }
        let Some(len) = count.checked_mul(dim).and_then(|x| x.checked_mul(dim)) else {
            return fail(JsrStatus::InvalidInput, "size overflow");
        };
        let values = std::slice::from_raw_parts(data, len);
        let mats = (0..count)
            .map(|k| Matrix::from_row_slice(dim, dim, &values[k * dim * dim..(k + 1) * dim * dim]))
            .collect();
        match MatrixFamily::new(mats) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(JsrFamily { inner: f }));
                JsrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parses a family file held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jsr_family_parse(text: *const c_char, out: *mut *mut JsrFamily) -> JsrStatus {
    guard(|| {
        if out.is_null() {
            return fail(JsrStatus::NullPointer, "null output");
        }
        let text = match read_str(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match cli::parse_family(text) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(JsrFamily { inner: f.family }));
                JsrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `family` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn jsr_family_free(family: *mut JsrFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// # Safety
/// `family` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn jsr_family_dim(family: *const JsrFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.dim())
}

/// # Safety
/// `family` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn jsr_family_count(family: *const JsrFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.len())
}

/// Runs the full computation. `options` may be NULL for defaults. A
/// certificate is produced both for certified runs (`Ok`) and for runs
/// that hit the iteration limit (`NotCertified`).
///
/// # Safety
/// Handles must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn jsr_compute(
    family: *const JsrFamily,
    options: *const JsrOptions,
    out: *mut *mut JsrCertificate,
) -> JsrStatus {
    guard(|| {
        let (Some(f), false) = (family.as_ref(), out.is_null()) else {
            return fail(JsrStatus::NullPointer, "null argument");
        };
        let opts = options.as_ref().copied().unwrap_or_else(|| jsr_options_default()).to_compute();
        let start = Instant::now();
        match compute(&f.inner, &opts) {
            Ok(rep) => {
                let status = rep.certificate.status;
                let file = CertificateFile::new(
                    &f.inner,
                    &opts,
                    rep.certificate,
                    rep.warnings,
                    start.elapsed().as_secs_f64(),
                );
                *out = Box::into_raw(Box::new(JsrCertificate { inner: file }));
                match status {
                    RunStatus::Terminated => JsrStatus::Ok,
                    RunStatus::MaxIterations => fail(JsrStatus::NotCertified, "polytope did not close"),
                }
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `cert` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_free(cert: *mut JsrCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// # Safety
/// `cert` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_value(cert: *const JsrCertificate) -> f64 {
    cert.as_ref().map_or(f64::NAN, |c| c.inner.certificate.jsr)
}

/// # Safety
/// `cert` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_terminated(cert: *const JsrCertificate) -> bool {
    cert.as_ref().is_some_and(|c| c.inner.certificate.status == RunStatus::Terminated)
}

/// # Safety
/// `cert` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_iterations(cert: *const JsrCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.inner.certificate.iterations)
}

/// Number of stored vertices; each stands for itself and its negative.
///
/// # Safety
/// `cert` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_vertex_count(cert: *const JsrCertificate) -> usize {
    cert.as_ref().map_or(0, |c| c.inner.certificate.vertex_count())
}

/// Copies vertex `index` into `buf`, which holds `len` doubles.
///
/// # Safety
/// `cert` must be valid and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_vertex(
    cert: *const JsrCertificate,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> JsrStatus {
    guard(|| {
        let (Some(c), false) = (cert.as_ref(), buf.is_null()) else {
            return fail(JsrStatus::NullPointer, "null argument");
        };
        let Some(v) = c.inner.certificate.vertices.get(index) else {
            return fail(JsrStatus::InvalidInput, format!("vertex {index} out of range"));
        };
        if len < v.len() {
            return fail(JsrStatus::InvalidInput, format!("buffer holds {len}, vertex has {}", v.len()));
        }
        std::slice::from_raw_parts_mut(buf, v.len()).copy_from_slice(v);
        JsrStatus::Ok
    })
}

/// Maximizing products as text, one-based letters, e.g. `"[1]; [1 2]"`.
///
/// # Safety
/// `cert` must be valid; `out` receives a string for `jsr_string_free`.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_smp(cert: *const JsrCertificate, out: *mut *mut c_char) -> JsrStatus {
    guard(|| {
        let (Some(c), false) = (cert.as_ref(), out.is_null()) else {
            return fail(JsrStatus::NullPointer, "null argument");
        };
        let words: Vec<String> = c.inner.certificate.smp_words.iter().map(|w| w.to_string()).collect();
        string_out(words.join("; "), out)
    })
}

/// # Safety
/// `cert` must be valid; `out` receives a string for `jsr_string_free`.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_to_json(cert: *const JsrCertificate, out: *mut *mut c_char) -> JsrStatus {
    guard(|| {
        let (Some(c), false) = (cert.as_ref(), out.is_null()) else {
            return fail(JsrStatus::NullPointer, "null argument");
        };
        match c.inner.to_json() {
            Ok(s) => string_out(s, out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn jsr_certificate_from_json(json: *const c_char, out: *mut *mut JsrCertificate) -> JsrStatus {
    guard(|| {
        if out.is_null() {
            return fail(JsrStatus::NullPointer, "null output");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match CertificateFile::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(JsrCertificate { inner }));
                JsrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Independent recheck. `passed` is set to the verdict and `residual`
/// (optional) to the recomputed invariance residual.
///
/// # Safety
/// `cert` must be valid; `passed` must be writable; `residual` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jsr_verify(cert: *const JsrCertificate, passed: *mut bool, residual: *mut f64) -> JsrStatus {
    guard(|| {
        let (Some(c), false) = (cert.as_ref(), passed.is_null()) else {
            return fail(JsrStatus::NullPointer, "null argument");
        };
        match cli::verify_certificate(&c.inner, None) {
            Ok(r) => {
                *passed = r.passed();
                if !residual.is_null() {
                    *residual = r.residual;
                }
                JsrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Hölder exponent of the Daubechies wavelet of order `n` (2..=20) with
/// default settings. `jsr` (optional) receives the certified JSR.
///
/// # Safety
/// `alpha` must be writable; `jsr` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn jsr_daubechies_holder(n: usize, alpha: *mut f64, jsr: *mut f64) -> JsrStatus {
    guard(|| {
        if alpha.is_null() {
            return fail(JsrStatus::NullPointer, "null output");
        }
        match daubechies::daubechies_holder(n, &ComputeOptions::default()) {
            Ok(h) => {
                *alpha = h.alpha;
                if !jsr.is_null() {
                    *jsr = h.report.certificate.jsr;
                }
                match h.report.certificate.status {
                    RunStatus::Terminated => JsrStatus::Ok,
                    RunStatus::MaxIterations => fail(JsrStatus::NotCertified, "polytope did not close"),
                }
            }
            Err(e) => from_error(e),
        }
    })
}
