//! C ABI over `possdro`. Models are built from JSON documents and solved
//! into solution handles; both are opaque and freed by the caller.
//!
//! Every fallible call returns a [`PossdroError`] code. The message of the
//! last failure on the calling thread is available from
//! [`possdro_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use possdro::document::ModelDocument;
use possdro::reform::{build_problem, Built};
use possdro::solver::{solve_conic, SolverConfig, Status};

/// Result codes of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PossdroError {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The document failed to parse or validate.
    Parse = 3,
    /// The document parsed but the model could not be assembled.
    Model = 4,
    /// Bad solver settings.
    Config = 5,
    /// The output buffer is too small.
    Buffer = 6,
    /// An internal panic was caught at the boundary.
    Internal = 7,
}

/// Solve outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PossdroStatus {
    Optimal = 0,
    Infeasible = 1,
    Unbounded = 2,
    IterationLimit = 3,
}

impl From<Status> for PossdroStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => PossdroStatus::Optimal,
            Status::Infeasible => PossdroStatus::Infeasible,
            Status::Unbounded => PossdroStatus::Unbounded,
            Status::IterationLimit => PossdroStatus::IterationLimit,
        }
    }
}

/// Solver settings passed by value.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PossdroSolverConfig {
    pub feas_tol: f64,
    pub cone_tol: f64,
    pub max_pivots: u64,
    pub max_cuts_per_cone: u64,
}

impl From<PossdroSolverConfig> for SolverConfig {
    fn from(c: PossdroSolverConfig) -> Self {
        SolverConfig {
            feas_tol: c.feas_tol,
            cone_tol: c.cone_tol,
            max_pivots: usize::try_from(c.max_pivots).unwrap_or(usize::MAX),
            max_cuts_per_cone: usize::try_from(c.max_cuts_per_cone).unwrap_or(usize::MAX),
        }
    }
}

/// Assembled model.
pub struct PossdroModel {
    built: Built,
    dimension: usize,
}

/// Result of a solve.
pub struct PossdroSolution {
    status: PossdroStatus,
    objective: f64,
    x: Vec<f64>,
    iterations: u64,
    cuts: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<(), (PossdroError, String)>) -> PossdroError {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            PossdroError::Ok
        }
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            PossdroError::Internal
        }
    }
}

fn null(what: &str) -> (PossdroError, String) {
    (PossdroError::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next API call on this thread.
#[no_mangle]
pub extern "C" fn possdro_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn possdro_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default solver settings.
#[no_mangle]
pub extern "C" fn possdro_solver_config_default() -> PossdroSolverConfig {
    let d = SolverConfig::default();
    PossdroSolverConfig {
        feas_tol: d.feas_tol,
        cone_tol: d.cone_tol,
        max_pivots: d.max_pivots as u64,
        max_cuts_per_cone: d.max_cuts_per_cone as u64,
    }
}

/// Parses a JSON model document and assembles it. On success `*out`
/// receives a handle to release with [`possdro_model_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn possdro_model_from_json(json: *const c_char, out: *mut *mut PossdroModel) -> PossdroError {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (PossdroError::InvalidUtf8, e.to_string()))?;
        let doc = ModelDocument::parse(text).map_err(|e| (PossdroError::Parse, e.to_string()))?;
        let (o, c, d) = doc.to_problem().map_err(|e| (PossdroError::Model, e.to_string()))?;
        let built = build_problem(&o, &c, &d).map_err(|e| (PossdroError::Model, e.to_string()))?;
        *out = Box::into_raw(Box::new(PossdroModel {
            built,
            dimension: doc.dimension,
        }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from [`possdro_model_from_json`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn possdro_model_free(model: *mut PossdroModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of decision variables.
///
/// # Safety
/// `model` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn possdro_model_dimension(model: *const PossdroModel) -> usize {
    model.as_ref().map_or(0, |m| m.dimension)
}

/// Solves a model. On success `*out` receives a handle to release with
/// [`possdro_solution_free`]; non-optimal outcomes are reported through
/// the solution status, not the return code.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn possdro_model_solve(
    model: *const PossdroModel,
    config: PossdroSolverConfig,
    out: *mut *mut PossdroSolution,
) -> PossdroError {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let cfg = SolverConfig::from(config);
        cfg.validate().map_err(|e| (PossdroError::Config, e.to_string()))?;
        let res = solve_conic(&m.built.model, &cfg);
        *out = Box::into_raw(Box::new(PossdroSolution {
            status: res.status.into(),
            objective: res.objective,
            x: m.built.decision(&res),
            iterations: res.iterations as u64,
            cuts: res.cut_count as u64,
        }));
        Ok(())
    })
}

/// Writes the LP-style listing of the assembled model into `*out`, to be
/// released with [`possdro_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn possdro_model_export_text(model: *const PossdroModel, out: *mut *mut c_char) -> PossdroError {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let text = CString::new(m.built.model.export_text()).map_err(|e| (PossdroError::Internal, e.to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn possdro_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `sol` must come from [`possdro_model_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn possdro_solution_free(sol: *mut PossdroSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `sol` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn possdro_solution_status(sol: *const PossdroSolution) -> PossdroStatus {
    sol.as_ref().map_or(PossdroStatus::IterationLimit, |s| s.status)
}

/// Objective value; NaN for a null handle.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn possdro_solution_objective(sol: *const PossdroSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.objective)
}

/// Simplex pivots and cuts spent.
///
/// # Safety
/// `sol` must be a live handle; the outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn possdro_solution_counts(sol: *const PossdroSolution, iterations: *mut u64, cuts: *mut u64) -> PossdroError {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if let Some(i) = iterations.as_mut() {
            *i = s.iterations;
        }
        if let Some(c) = cuts.as_mut() {
            *c = s.cuts;
        }
        Ok(())
    })
}

/// Copies the decision vector into `buf`, which must hold `len >=
/// dimension` values.
///
/// # Safety
/// `sol` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn possdro_solution_x(sol: *const PossdroSolution, buf: *mut f64, len: usize) -> PossdroError {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < s.x.len() {
            return Err((PossdroError::Buffer, format!("buffer holds {len} values, {} needed", s.x.len())));
        }
        std::slice::from_raw_parts_mut(buf, s.x.len()).copy_from_slice(&s.x);
        Ok(())
    })
}
