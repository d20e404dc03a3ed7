//! C ABI over the `everett` library.
//!
//! Handles are opaque heap objects created by `*_new` style functions and
//! released by the matching `*_free`. Every fallible call returns an
//! [`EverettStatus`]; on failure, [`everett_last_error`] describes the most
//! recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use everett::asymptotics;
use everett::branching::{self, Coefficients, CountClass};
use everett::cat::{self, CatRecord, CatState, SuperpositionParams};
use everett::hilbert::{Amplitude, StateVector};
use everett::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EverettStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ZeroVector = 3,
    LabelError = 4,
    BasisCoverage = 5,
    PartitionError = 6,
    HistoryDepth = 7,
    SizeGuard = 8,
    InvalidClass = 9,
    /// No unitary operator satisfies the requested recording rule.
    Obstruction = 10,
    BufferTooSmall = 11,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EverettCat {
    Live = 0,
    Dead = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EverettCatRecord {
    Blank = 0,
    RecLive = 1,
    RecDead = 2,
    RecPlus = 3,
    RecMinus = 4,
}

/// Normalized outcome coefficients `C_1 .. C_M`.
pub struct EverettCoefficients(Coefficients);

/// Normalized joint cat/observer state.
pub struct EverettState(StateVector);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> EverettStatus {
    match err {
        Error::ZeroVector => EverettStatus::ZeroVector,
        Error::Label(_) | Error::RoleCollision(_) => EverettStatus::LabelError,
        Error::BasisCoverage(_) => EverettStatus::BasisCoverage,
        Error::Partition(_) => EverettStatus::PartitionError,
        Error::HistoryDepth { .. } => EverettStatus::HistoryDepth,
        Error::SizeGuard { .. } => EverettStatus::SizeGuard,
        Error::InvalidClass(_) => EverettStatus::InvalidClass,
        Error::NoUnitaryCompletion { .. } | Error::NotUnitary { .. } => EverettStatus::Obstruction,
        Error::InvalidCoefficients(_)
        | Error::InvalidParams(_)
        | Error::InvalidBasisTransform { .. } => EverettStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), (EverettStatus, String)>) -> EverettStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EverettStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EverettStatus::Panic
        }
    }
}

fn lib(err: Error) -> (EverettStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (EverettStatus, String) {
    (EverettStatus::NullPointer, format!("{what} is null"))
}

unsafe fn coeffs_ref<'a>(c: *const EverettCoefficients) -> Result<&'a Coefficients, (EverettStatus, String)> {
    c.as_ref().map(|c| &c.0).ok_or_else(|| null("coefficients"))
}

unsafe fn counts_slice<'a>(counts: *const u64, len: usize) -> Result<&'a [u64], (EverettStatus, String)> {
    if counts.is_null() {
        return Err(null("counts"));
    }
    Ok(slice::from_raw_parts(counts, len))
}

fn write<T>(out: *mut T, value: T) -> Result<(), (EverettStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    // SAFETY: checked non-null; caller guarantees it is valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

fn params(a_re: f64, a_im: f64, b_re: f64, b_im: f64) -> Result<SuperpositionParams, (EverettStatus, String)> {
    SuperpositionParams::new(Amplitude::new(a_re, a_im), Amplitude::new(b_re, b_im)).map_err(lib)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn everett_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn everett_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds coefficients from outcome measures `|C_i|^2` (must sum to 1).
///
/// # Safety
/// `measures` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn everett_coefficients_new(
    measures: *const f64,
    len: usize,
    out: *mut *mut EverettCoefficients,
) -> EverettStatus {
    guard(|| {
        if measures.is_null() {
            return Err(null("measures"));
        }
        let values = slice::from_raw_parts(measures, len);
        let coeffs = Coefficients::from_measures(values).map_err(lib)?;
        write(out, Box::into_raw(Box::new(EverettCoefficients(coeffs))))
    })
}

/// # Safety
/// `coeffs` must come from [`everett_coefficients_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn everett_coefficients_free(coeffs: *mut EverettCoefficients) {
    if !coeffs.is_null() {
        drop(Box::from_raw(coeffs));
    }
}

/// Number of outcomes `M`, or 0 for a null handle.
///
/// # Safety
/// `coeffs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn everett_coefficients_len(coeffs: *const EverettCoefficients) -> usize {
    coeffs.as_ref().map_or(0, |c| c.0.len())
}

/// Measure of the count class `counts[0..len]`, linear and natural log.
/// A class recording a zero-coefficient outcome yields 0 and `-inf`.
///
/// # Safety
/// Pointers must be valid; `counts` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn everett_class_measure(
    coeffs: *const EverettCoefficients,
    counts: *const u64,
    len: usize,
    out_linear: *mut f64,
    out_log: *mut f64,
) -> EverettStatus {
    guard(|| {
        let coeffs = coeffs_ref(coeffs)?;
        let class = CountClass::new(counts_slice(counts, len)?.to_vec());
        let m = branching::class_measure(coeffs, &class).map_err(lib)?.measure;
        write(out_linear, m.linear())?;
        write(out_log, m.log())
    })
}

/// `ln(N! / prod n_i!)`.
///
/// # Safety
/// `counts` must hold `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn everett_class_count_ln(counts: *const u64, len: usize, out: *mut f64) -> EverettStatus {
    guard(|| {
        let class = CountClass::new(counts_slice(counts, len)?.to_vec());
        write(out, branching::class_count(&class).ln)
    })
}

/// Sum of all class measures at `n`; 1 up to rounding.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn everett_total_class_measure(
    coeffs: *const EverettCoefficients,
    n: u64,
    out: *mut f64,
) -> EverettStatus {
    guard(|| write(out, branching::total_class_measure(coeffs_ref(coeffs)?, n).linear()))
}

/// Maximizing fractions `|C_i|^2` into `out[0..len]`.
///
/// # Safety
/// `out` must hold `len` writable doubles, `len >= M`.
#[no_mangle]
pub unsafe extern "C" fn everett_lagrange_fractions(
    coeffs: *const EverettCoefficients,
    out: *mut f64,
    len: usize,
) -> EverettStatus {
    guard(|| {
        let coeffs = coeffs_ref(coeffs)?;
        let sol = asymptotics::lagrange_fractions(coeffs, None);
        copy_out(&sol.fractions, out, len)
    })
}

unsafe fn copy_out<T: Copy>(values: &[T], out: *mut T, len: usize) -> Result<(), (EverettStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < values.len() {
        return Err((
            EverettStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Modal count class at `n` into `out_counts[0..len]`; `out_tie` reports
/// whether another class has equal measure.
///
/// # Safety
/// `out_counts` must hold `len >= M` writable values; `out_tie` writable.
#[no_mangle]
pub unsafe extern "C" fn everett_modal_class(
    coeffs: *const EverettCoefficients,
    n: u64,
    out_counts: *mut u64,
    len: usize,
    out_tie: *mut bool,
) -> EverettStatus {
    guard(|| {
        let modal = asymptotics::modal_class(coeffs_ref(coeffs)?, n);
        copy_out(modal.class.counts(), out_counts, len)?;
        write(out_tie, modal.tie())
    })
}

/// Measure of the classes within `epsilon` (max norm) of `|C_i|^2`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn everett_typicality_measure(
    coeffs: *const EverettCoefficients,
    n: u64,
    epsilon: f64,
    out: *mut f64,
) -> EverettStatus {
    guard(|| {
        let t = asymptotics::typicality_measure(coeffs_ref(coeffs)?, n, epsilon).map_err(lib)?;
        write(out, t.linear())
    })
}

/// `1 - sum_i p_i (1 - p_i) / (n epsilon^2)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn everett_chebyshev_floor(
    coeffs: *const EverettCoefficients,
    n: u64,
    epsilon: f64,
    out: *mut f64,
) -> EverettStatus {
    guard(|| write(out, asymptotics::chebyshev_floor(coeffs_ref(coeffs)?, n, epsilon)))
}

/// `R_n = 1 - m(apportioned class)`; the class is written to
/// `out_class[0..len]` when `out_class` is non-null.
///
/// # Safety
/// Pointers must be valid; `out_class` null or holding `len >= M` values.
#[no_mangle]
pub unsafe extern "C" fn everett_residual_measure(
    coeffs: *const EverettCoefficients,
    n: u64,
    out_residual: *mut f64,
    out_class: *mut u64,
    len: usize,
) -> EverettStatus {
    guard(|| {
        let r = asymptotics::residual_measure(coeffs_ref(coeffs)?, n);
        if !out_class.is_null() {
            copy_out(r.class.counts(), out_class, len)?;
        }
        write(out_residual, r.residual.linear())
    })
}

/// `U (a|live> + b|dead>)|blank>`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn everett_cat_observe(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    out: *mut *mut EverettState,
) -> EverettStatus {
    guard(|| {
        let p = params(a_re, a_im, b_re, b_im)?;
        let s = cat::observe_superposition(&p).map_err(lib)?;
        write(out, Box::into_raw(Box::new(EverettState(s))))
    })
}

/// `U' |which>|blank>`. Fails with `Obstruction` when `|a| != |b|`, in which
/// case `out_overlap` (if non-null) receives `|a|^2 - |b|^2`.
///
/// # Safety
/// `out` must be writable; `out_overlap` null or writable.
#[no_mangle]
pub unsafe extern "C" fn everett_cat_uprime_on_definite(
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    which: EverettCat,
    out: *mut *mut EverettState,
    out_overlap: *mut f64,
) -> EverettStatus {
    guard(|| {
        let p = params(a_re, a_im, b_re, b_im)?;
        if !out_overlap.is_null() {
            write(out_overlap, p.phi_overlap())?;
        }
        let which = match which {
            EverettCat::Live => CatState::Live,
            EverettCat::Dead => CatState::Dead,
        };
        let s = cat::uprime_on_definite(&p, which).map_err(lib)?;
        write(out, Box::into_raw(Box::new(EverettState(s))))
    })
}

/// # Safety
/// `state` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn everett_state_free(state: *mut EverettState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Number of nonzero terms, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn everett_state_len(state: *const EverettState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dimension())
}

/// Measure of the observer memory state `record` in `state`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn everett_state_record_measure(
    state: *const EverettState,
    record: EverettCatRecord,
    out: *mut f64,
) -> EverettStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let record = CatRecord::ALL[record as usize];
        let m = cat::cat_branch_measures(&s.0).get(&record).map_or(0.0, |m| m.linear());
        write(out, m)
    })
}

/// Cat amplitude of `|cat>|record>` in `state`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn everett_state_amplitude(
    state: *const EverettState,
    which: EverettCat,
    record: EverettCatRecord,
    out_re: *mut f64,
    out_im: *mut f64,
) -> EverettStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let cat = CatState::ALL[which as usize];
        let a = s.0.amplitude(&cat::joint_label(cat, CatRecord::ALL[record as usize]));
        write(out_re, a.re)?;
        write(out_im, a.im)
    })
}

/// Runs `trials` seeded Haar-random object-basis rotations through the
/// invariance check for real `a = sqrt(a_sq)`.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn everett_basis_invariance(
    a_sq: f64,
    seed: u64,
    trials: u64,
    out_max_deviation: *mut f64,
    out_pass: *mut bool,
) -> EverettStatus {
    guard(|| {
        let p = SuperpositionParams::from_a_sq(a_sq).map_err(lib)?;
        let worst = cat::seeded_invariance_trials(&p, seed, trials)
            .map_err(lib)?
            .iter()
            .fold(0.0f64, |w, r| w.max(r.max_deviation));
        write(out_max_deviation, worst)?;
        write(out_pass, worst <= everett::hilbert::NORM_TOL)
    })
}
