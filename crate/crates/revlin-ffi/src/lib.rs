//! C ABI for the revlin engine.
//!
//! Callers work with two opaque types: `RevlinArena`, an execution
//! context that provisions a fresh cell store per call and carries
//! resource guards, and `RevlinMatrix`, an exact rational matrix.
//! Every fallible function returns a `RevlinStatus`; on failure a
//! thread-local message is available via `revlin_last_error_message`.
//! All pointers are owned by exactly one side: matrices and strings
//! returned from this library must be released with the matching
//! `revlin_*_free` function, never with `free(3)`.
//!
//! Safety contract for every `unsafe extern` function below: pointer
//! arguments must be null or obtained from this library (or, for
//! text, a valid NUL-terminated buffer), and nothing may be used
//! after it is freed. Null inputs are rejected with
//! `REVLIN_STATUS_INVALID_ARGUMENT`, never dereferenced.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use revlin::arena::Arena;
use revlin::error::RevError;
use revlin::instances;
use revlin::inversion::{build_inverse, invert_matrix};
use revlin::kernels::{build_matmul, multiply, MatrixHandle};
use revlin::program::verify_roundtrip;
use revlin::ratmat::RatMatrix;
use revlin::rational::Rational;
use revlin::regression::{build_ols, fit, RegressionProblem};

/// Execution context: per-call cell stores inherit its guards.
pub struct RevlinArena {
    bit_limit: Option<u64>,
}

/// An exact rational matrix value.
pub struct RevlinMatrix {
    values: RatMatrix,
}

/// Result codes; `REVLIN_STATUS_OK` is zero, everything else is a
/// failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevlinStatus {
    Ok = 0,
    /// A required pointer was null or an argument was out of range.
    InvalidArgument = 1,
    /// Text did not parse as a rational, matrix, or option value.
    ParseError = 2,
    /// Matrix dimensions do not fit the operation.
    ShapeError = 3,
    /// A zero pivot or singular system stopped the computation.
    Singular = 4,
    /// A rational outgrew the configured bit-width guard.
    BitLimit = 5,
    /// A backward run failed to restore the store (an engine bug).
    GarbageLeak = 6,
    /// An unexpected internal failure.
    Internal = 7,
}

/// Resource accounting for one call, mirroring the engine's meter.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RevlinReport {
    pub primitive_ops: u64,
    pub peak_live_cells: usize,
    pub persistent_cells: usize,
    pub transient_peak: usize,
    pub garbage_cells: usize,
    pub max_bits: u64,
}

/// Program families accepted by `revlin_verify_roundtrip`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevlinOp {
    Matmul = 0,
    Invert = 1,
    Ols = 2,
}

thread_local! {
    // not `const { .. }`: cbindgen's parser cannot read that form
    #[allow(clippy::missing_const_for_thread_local)]
    static LAST_ERROR: RefCell<Option<CString>> = RefCell::new(None);
}

fn set_error(message: String) {
    let message = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn status_of(err: &RevError) -> RevlinStatus {
    match err.root_cause() {
        RevError::Parse(_) => RevlinStatus::ParseError,
        RevError::ShapeMismatch(_) => RevlinStatus::ShapeError,
        RevError::SingularPivot { .. }
        | RevError::Singular
        | RevError::ZeroPivot { .. }
        | RevError::DivideByZero { .. }
        | RevError::NonInvertible { .. } => RevlinStatus::Singular,
        RevError::BitLimitExceeded { .. } => RevlinStatus::BitLimit,
        RevError::GarbageLeak { .. } => RevlinStatus::GarbageLeak,
        _ => RevlinStatus::Internal,
    }
}

fn fail(err: RevError) -> RevlinStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

fn invalid(message: &str) -> RevlinStatus {
    set_error(message.to_string());
    RevlinStatus::InvalidArgument
}

/// Runs a closure, converting panics into `Internal` status.
fn guarded<F: FnOnce() -> RevlinStatus>(body: F) -> RevlinStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic".to_string());
            RevlinStatus::Internal
        }
    }
}

fn report_from(report: &revlin::arena::ResourceReport) -> RevlinReport {
    RevlinReport {
        primitive_ops: report.primitive_ops,
        peak_live_cells: report.peak_live_cells,
        persistent_cells: report.persistent_cells,
        transient_peak: report.transient_peak,
        garbage_cells: report.garbage_cells,
        max_bits: report.max_bits,
    }
}

/// Creates an execution context. Never fails; release with
/// `revlin_arena_free`.
#[no_mangle]
pub extern "C" fn revlin_arena_new() -> *mut RevlinArena {
    Box::into_raw(Box::new(RevlinArena { bit_limit: None }))
}

/// Releases a context. A null pointer is ignored.
#[no_mangle]
pub unsafe extern "C" fn revlin_arena_free(arena: *mut RevlinArena) {
    if !arena.is_null() {
        drop(Box::from_raw(arena));
    }
}

/// Caps the bit-width of every rational touched by later calls on
/// this context; zero removes the cap.
#[no_mangle]
pub unsafe extern "C" fn revlin_arena_set_bit_limit(
    arena: *mut RevlinArena,
    limit: u64,
) -> RevlinStatus {
    guarded(|| {
        let Some(arena) = arena.as_mut() else {
            return invalid("revlin_arena_set_bit_limit: arena is null");
        };
        arena.bit_limit = (limit > 0).then_some(limit);
        RevlinStatus::Ok
    })
}

unsafe fn cell_store(arena: *const RevlinArena) -> Result<Arena, RevlinStatus> {
    let Some(context) = arena.as_ref() else {
        return Err(invalid("arena is null"));
    };
    let mut store = Arena::new();
    store.set_bit_limit(context.bit_limit);
    Ok(store)
}

/// Parses matrix text (one row per line, whitespace-separated
/// rationals) into a new matrix.
#[no_mangle]
pub unsafe extern "C" fn revlin_matrix_parse(
    text: *const c_char,
    out: *mut *mut RevlinMatrix,
) -> RevlinStatus {
    guarded(|| {
        if out.is_null() {
            return invalid("revlin_matrix_parse: out is null");
        }
        if text.is_null() {
            return invalid("revlin_matrix_parse: text is null");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return invalid("revlin_matrix_parse: text is not UTF-8");
        };
        match text.parse::<RatMatrix>() {
            Ok(values) => {
                *out = Box::into_raw(Box::new(RevlinMatrix { values }));
                RevlinStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Formats a matrix in the same text form `revlin_matrix_parse`
/// accepts. Release the string with `revlin_string_free`.
#[no_mangle]
pub unsafe extern "C" fn revlin_matrix_format(matrix: *const RevlinMatrix) -> *mut c_char {
    let Some(matrix) = matrix.as_ref() else {
        return ptr::null_mut();
    };
    match CString::new(matrix.values.to_string()) {
        Ok(text) => text.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// Row count; zero if the pointer is null.
#[no_mangle]
pub unsafe extern "C" fn revlin_matrix_rows(matrix: *const RevlinMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.values.n_rows())
}

/// Column count; zero if the pointer is null.
#[no_mangle]
pub unsafe extern "C" fn revlin_matrix_cols(matrix: *const RevlinMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.values.n_cols())
}

/// Releases a matrix. A null pointer is ignored.
#[no_mangle]
pub unsafe extern "C" fn revlin_matrix_free(matrix: *mut RevlinMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Reversible product C = A·B. On success `out` receives a new
/// matrix and, when `report` is non-null, it receives the run's
/// resource accounting.
#[no_mangle]
pub unsafe extern "C" fn revlin_matmul(
    arena: *const RevlinArena,
    a: *const RevlinMatrix,
    b: *const RevlinMatrix,
    out: *mut *mut RevlinMatrix,
    report: *mut RevlinReport,
) -> RevlinStatus {
    guarded(|| {
        let (Some(a), Some(b)) = (a.as_ref(), b.as_ref()) else {
            return invalid("revlin_matmul: input matrix is null");
        };
        if out.is_null() {
            return invalid("revlin_matmul: out is null");
        }
        let mut store = match cell_store(arena) {
            Ok(store) => store,
            Err(status) => return status,
        };
        let outcome = (|| {
            let ha = MatrixHandle::load(&mut store, &a.values)?;
            let hb = MatrixHandle::load(&mut store, &b.values)?;
            let (hc, run_report) = multiply(&mut store, &ha, &hb)?;
            Ok((hc.to_values(&store)?, run_report))
        })();
        match outcome {
            Ok((product, run_report)) => {
                *out = Box::into_raw(Box::new(RevlinMatrix { values: product }));
                if !report.is_null() {
                    *report = report_from(&run_report);
                }
                RevlinStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Reversible inverse via row-pull elimination (no pivoting; a zero
/// leading pivot fails with `REVLIN_STATUS_SINGULAR`).
#[no_mangle]
pub unsafe extern "C" fn revlin_invert(
    arena: *const RevlinArena,
    a: *const RevlinMatrix,
    out: *mut *mut RevlinMatrix,
    report: *mut RevlinReport,
) -> RevlinStatus {
    guarded(|| {
        let Some(a) = a.as_ref() else {
            return invalid("revlin_invert: input matrix is null");
        };
        if out.is_null() {
            return invalid("revlin_invert: out is null");
        }
        let mut store = match cell_store(arena) {
            Ok(store) => store,
            Err(status) => return status,
        };
        let outcome = (|| {
            let ha = MatrixHandle::load(&mut store, &a.values)?;
            let (hinv, run_report) = invert_matrix(&mut store, &ha)?;
            Ok((hinv.to_values(&store)?, run_report))
        })();
        match outcome {
            Ok((inverse, run_report)) => {
                *out = Box::into_raw(Box::new(RevlinMatrix { values: inverse }));
                if !report.is_null() {
                    *report = report_from(&run_report);
                }
                RevlinStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

unsafe fn targets_from(y: &RatMatrix) -> Result<Vec<Rational>, RevlinStatus> {
    let row = if y.n_rows() == 1 {
        (0..y.n_cols()).map(|j| y.at(0, j).clone()).collect()
    } else if y.n_cols() == 1 {
        (0..y.n_rows()).map(|i| y.at(i, 0).clone()).collect()
    } else {
        return Err(invalid("revlin_ols_fit: y must be a single row or column"));
    };
    Ok(row)
}

/// Least-squares or ridge fit. `x` holds one data point per column;
/// with `add_bias` nonzero an all-ones row is appended. `lambda_text`
/// is a nonnegative rational, or null for plain least squares. On
/// success `out_theta` receives the full coefficient column (bias
/// coordinate last when requested).
#[no_mangle]
pub unsafe extern "C" fn revlin_ols_fit(
    arena: *const RevlinArena,
    x: *const RevlinMatrix,
    y: *const RevlinMatrix,
    lambda_text: *const c_char,
    add_bias: i32,
    out_theta: *mut *mut RevlinMatrix,
    report: *mut RevlinReport,
) -> RevlinStatus {
    guarded(|| {
        let (Some(x), Some(y)) = (x.as_ref(), y.as_ref()) else {
            return invalid("revlin_ols_fit: input matrix is null");
        };
        if out_theta.is_null() {
            return invalid("revlin_ols_fit: out_theta is null");
        }
        let lambda = if lambda_text.is_null() {
            Rational::zero()
        } else {
            let Ok(text) = CStr::from_ptr(lambda_text).to_str() else {
                return invalid("revlin_ols_fit: lambda is not UTF-8");
            };
            match text.parse::<Rational>() {
                Ok(lambda) => lambda,
                Err(err) => return fail(err),
            }
        };
        let targets = match targets_from(&y.values) {
            Ok(targets) => targets,
            Err(status) => return status,
        };
        let mut store = match cell_store(arena) {
            Ok(store) => store,
            Err(status) => return status,
        };
        let bias = add_bias != 0;
        let outcome = (|| {
            let points: Vec<Vec<Rational>> = (0..x.values.n_cols())
                .map(|j| {
                    (0..x.values.n_rows())
                        .map(|i| x.values.at(i, j).clone())
                        .collect()
                })
                .collect();
            let prob = RegressionProblem::from_points(&mut store, &points, &targets, lambda, bias)?;
            let model = fit(&mut store, &prob)?;
            let theta = model.theta_values(&store)?;
            let column = RatMatrix::from_rows(theta.into_iter().map(|t| vec![t]).collect())?;
            Ok((column, model.report().clone()))
        })();
        match outcome {
            Ok((column, run_report)) => {
                *out_theta = Box::into_raw(Box::new(RevlinMatrix { values: column }));
                if !report.is_null() {
                    *report = report_from(&run_report);
                }
                RevlinStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Builds a random program of the given family and size, runs it
/// forward and backward, and checks bit-exact restoration. Returns
/// `REVLIN_STATUS_OK` on a clean round trip.
#[no_mangle]
pub unsafe extern "C" fn revlin_verify_roundtrip(
    arena: *const RevlinArena,
    op: RevlinOp,
    size: usize,
    seed: u64,
) -> RevlinStatus {
    guarded(|| {
        if size == 0 {
            return invalid("revlin_verify_roundtrip: size must be positive");
        }
        let mut store = match cell_store(arena) {
            Ok(store) => store,
            Err(status) => return status,
        };
        let mut rng = instances::rng(seed);
        let outcome = (|| match op {
            RevlinOp::Matmul => {
                let a = instances::random_matrix(&mut rng, size, size);
                let b = instances::random_matrix(&mut rng, size, size);
                let ha = MatrixHandle::load(&mut store, &a)?;
                let hb = MatrixHandle::load(&mut store, &b)?;
                let hc = MatrixHandle::alloc(&mut store, size, size);
                let (prog, _) = build_matmul(&mut store, &ha, &hb, &hc)?;
                verify_roundtrip(&mut store, &prog).map(|_| ())
            }
            RevlinOp::Invert => {
                let a = instances::random_minor_friendly(&mut rng, size);
                let ha = MatrixHandle::load(&mut store, &a)?;
                let (prog, _) = build_inverse(&mut store, &ha)?;
                verify_roundtrip(&mut store, &prog).map(|_| ())
            }
            RevlinOp::Ols => {
                let n = size.max(3);
                let (x, y) = instances::random_regression(&mut rng, 2, n, true);
                let prob =
                    RegressionProblem::from_full_x(&mut store, &x, &y, Rational::zero(), true)?;
                let (prog, _) = build_ols(&mut store, &prob)?;
                verify_roundtrip(&mut store, &prog).map(|_| ())
            }
        })();
        match outcome {
            Ok(()) => RevlinStatus::Ok,
            Err(err) => fail(err),
        }
    })
}

/// Static name for a status code; never null, do not free.
#[no_mangle]
pub extern "C" fn revlin_status_name(status: RevlinStatus) -> *const c_char {
    let name: &'static str = match status {
        RevlinStatus::Ok => "ok\0",
        RevlinStatus::InvalidArgument => "invalid argument\0",
        RevlinStatus::ParseError => "parse error\0",
        RevlinStatus::ShapeError => "shape mismatch\0",
        RevlinStatus::Singular => "singular or pivot-blocked\0",
        RevlinStatus::BitLimit => "bit limit exceeded\0",
        RevlinStatus::GarbageLeak => "garbage leak\0",
        RevlinStatus::Internal => "internal error\0",
    };
    name.as_ptr().cast()
}

/// The message for this thread's most recent failure, or null if
/// none was recorded. Release with `revlin_string_free`.
#[no_mangle]
pub extern "C" fn revlin_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |msg| msg.clone().into_raw())
    })
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn revlin_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}
