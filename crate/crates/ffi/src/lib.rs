//! C ABI for `gm-surrogate`.
//!
//! Graphs and match reports are opaque heap handles owned by the caller and
//! released with their `_free` functions. Every fallible call returns a
//! [`GmStatus`]; on failure a description is available from
//! [`gm_last_error_message`] on the same thread until the next failing call.
//! Strings returned by the library are released with [`gm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gm_surrogate::cli::{cmd_match, parse_graph, MatchOptions, MatchReport};
use gm_surrogate::{oracle_gm, AdjacencyMatrix, Error, SolverOptions};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    /// The solver stopped early; the report is still produced.
    IterationLimit = 5,
    SizeLimit = 6,
    Internal = 7,
    Panic = 8,
}

/// Opaque graph handle.
pub struct GmGraph(AdjacencyMatrix);

/// Opaque match report handle.
pub struct GmReport(MatchReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(message).ok());
}

fn status_of(err: &Error) -> GmStatus {
    match err {
        Error::Parse { .. } => GmStatus::Parse,
        Error::SizeLimit { .. } => GmStatus::SizeLimit,
        e if e.is_input_error() => GmStatus::InvalidInput,
        _ => GmStatus::Internal,
    }
}

fn fail(err: Error) -> GmStatus {
    let status = status_of(&err);
    set_last_error(err.to_string());
    status
}

fn guarded(body: impl FnOnce() -> GmStatus) -> GmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("panic inside gm-surrogate");
            GmStatus::Panic
        }
    }
}

fn null_pointer(what: &str) -> GmStatus {
    set_last_error(format!("{what} is null"));
    GmStatus::NullPointer
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a graph in matrix or edge-list format.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_parse(text: *const c_char, out: *mut *mut GmGraph) -> GmStatus {
    guarded(|| {
        if text.is_null() {
            return null_pointer("text");
        }
        if out.is_null() {
            return null_pointer("out");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            set_last_error("graph text is not valid UTF-8");
            return GmStatus::InvalidUtf8;
        };
        match parse_graph(text) {
            Ok(g) => {
                *out = Box::into_raw(Box::new(GmGraph(g)));
                GmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `graph` must come from [`gm_graph_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_free(graph: *mut GmGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_vertex_count(graph: *const GmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n())
}

/// Number of edges, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_graph_edge_count(graph: *const GmGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Matches `g1` onto `g2` with the certified perturbation. A
/// `max_iterations` of 0 runs to optimality. On `GM_STATUS_ITERATION_LIMIT`
/// the report is still written to `out`.
///
/// # Safety
/// `g1` and `g2` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gm_match(
    g1: *const GmGraph,
    g2: *const GmGraph,
    max_iterations: u64,
    out: *mut *mut GmReport,
) -> GmStatus {
    guarded(|| {
        let (Some(g1), Some(g2)) = (g1.as_ref(), g2.as_ref()) else {
            return null_pointer("graph");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let solver = if max_iterations == 0 {
            SolverOptions::default()
        } else {
            match SolverOptions::with_max_iterations(max_iterations as usize) {
                Ok(opts) => opts,
                Err(e) => return fail(e),
            }
        };
        let opts = MatchOptions { solver, t: None };
        match cmd_match(&g1.0, &g2.0, &opts) {
            Ok(report) => {
                let status = if report.is_optimal() {
                    GmStatus::Ok
                } else {
                    set_last_error("iteration limit reached before optimality was proven");
                    GmStatus::IterationLimit
                };
                *out = Box::into_raw(Box::new(GmReport(report)));
                status
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `report` must come from [`gm_match`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gm_report_free(report: *mut GmReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Edge disagreement of the reported relabeling, or -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_report_symdiff(report: *const GmReport) -> i64 {
    report.as_ref().map_or(-1, |r| r.0.symdiff as i64)
}

/// Integer upper bound on the objective, or -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_report_upper_bound(report: *const GmReport) -> i64 {
    report.as_ref().map_or(-1, |r| r.0.upper_bound_int)
}

/// Optimality gap, or -1 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_report_gap(report: *const GmReport) -> i64 {
    report.as_ref().map_or(-1, |r| r.0.gap)
}

/// Whether the solver proved optimality.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_report_is_optimal(report: *const GmReport) -> bool {
    report.as_ref().is_some_and(|r| r.0.is_optimal())
}

/// Copies the 1-based relabeling into `out`, which must hold `len` entries
/// with `len` equal to the vertex count.
///
/// # Safety
/// `report` must be a live handle and `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn gm_report_sigma(report: *const GmReport, out: *mut usize, len: usize) -> GmStatus {
    guarded(|| {
        let Some(report) = report.as_ref() else {
            return null_pointer("report");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        let image = report.0.sigma.one_based();
        if len != image.len() {
            return fail(Error::DimensionMismatch {
                expected: image.len(),
                found: len,
            });
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&image);
        GmStatus::Ok
    })
}

/// The report as JSON; release with [`gm_string_free`]. Null on failure.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gm_report_to_json(report: *const GmReport) -> *mut c_char {
    let Some(report) = report.as_ref() else {
        null_pointer("report");
        return ptr::null_mut();
    };
    CString::new(report.0.to_json()).map_or(ptr::null_mut(), CString::into_raw)
}

/// Exhaustive minimum edge disagreement between `g1` and `g2`.
///
/// # Safety
/// `g1` and `g2` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn gm_oracle_min_symdiff(g1: *const GmGraph, g2: *const GmGraph, out: *mut u64) -> GmStatus {
    guarded(|| {
        let (Some(g1), Some(g2)) = (g1.as_ref(), g2.as_ref()) else {
            return null_pointer("graph");
        };
        if out.is_null() {
            return null_pointer("out");
        }
        match oracle_gm(&g1.0, &g2.0) {
            Ok(r) => {
                *out = r.min_symdiff as u64;
                GmStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn gm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
