//! C ABI over `bregman_pdmm`.
//!
//! Objects cross the boundary as opaque handles created by `bpdmm_*` functions
//! and released by the matching `*_free`. Every fallible function returns a
//! [`BpdmmStatus`]; on failure a message is kept per thread and can be read
//! with [`bpdmm_last_error`]. Output pointers are written only on success,
//! except for [`bpdmm_run`], which also hands out the partial trace when an
//! iteration fails.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use bregman_pdmm::diagnostics::write_csv;
use bregman_pdmm::geometry::{bregman_divergence, euclidean_simplex_projection, FeasibleSet, MirrorMap, StackedPoint};
use bregman_pdmm::graph::{build_laplacian_averaging, gen_erdos_renyi, optimize_averaging_matrix, AveragingMatrix, Graph};
use bregman_pdmm::solver::{run, ProblemInstance, RunTrace, SolverConfig, Variant};
use bregman_pdmm::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BpdmmStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    SolverFailure = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BpdmmVariant {
    Euclid = 0,
    Bregman = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BpdmmMirror {
    SquaredEuclidean = 0,
    NegativeEntropy = 1,
}

/// One trace row. Absent values are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BpdmmRecord {
    pub t: u64,
    pub objective_gap: f64,
    pub consensus_residual: f64,
    pub r: f64,
    pub v: f64,
    pub wall_nanos: u64,
}

pub struct BpdmmGraph(Graph);
pub struct BpdmmAveraging(AveragingMatrix);
pub struct BpdmmProblem(ProblemInstance);
pub struct BpdmmTrace(RunTrace);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

fn fail(status: BpdmmStatus, msg: impl Into<String>) -> BpdmmStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> BpdmmStatus {
    match e {
        Error::Io { .. } => BpdmmStatus::Io,
        e if e.is_solver_failure() => BpdmmStatus::SolverFailure,
        _ => BpdmmStatus::InvalidArgument,
    }
}

fn from_error(e: Error) -> BpdmmStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

/// Runs `f`, turning panics into [`BpdmmStatus::Panic`].
fn guard(f: impl FnOnce() -> BpdmmStatus) -> BpdmmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(BpdmmStatus::Panic, "internal panic"),
    }
}

fn emit<T>(value: T, out: *mut *mut T) -> BpdmmStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    BpdmmStatus::Ok
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            return fail(BpdmmStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bpdmm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Draws a connected Erdős–Rényi graph.
#[no_mangle]
pub extern "C" fn bpdmm_graph_erdos_renyi(m: usize, p_edge: f64, seed: u64, out: *mut *mut BpdmmGraph) -> BpdmmStatus {
    guard(|| {
        non_null!(out);
        match gen_erdos_renyi(m, p_edge, seed) {
            Ok(g) => emit(BpdmmGraph(g), out),
            Err(e) => from_error(e),
        }
    })
}

/// Builds a graph from `count` edges given as index pairs in `edges`
/// (`2 * count` entries).
///
/// # Safety
/// `edges` must point to `2 * count` readable values.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_graph_from_edges(
    m: usize,
    edges: *const usize,
    count: usize,
    out: *mut *mut BpdmmGraph,
) -> BpdmmStatus {
    guard(|| {
        non_null!(out);
        if count > 0 {
            non_null!(edges);
        }
        let flat = if count == 0 { &[][..] } else { slice::from_raw_parts(edges, 2 * count) };
        match Graph::new(m, flat.chunks(2).map(|e| (e[0], e[1]))) {
            Ok(g) => emit(BpdmmGraph(g), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_graph_vertex_count(g: *const BpdmmGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.m())
}

/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_graph_edge_count(g: *const BpdmmGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `g` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_graph_free(g: *mut BpdmmGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// `P = I − L/(2 d_max)`.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_averaging_laplacian(g: *const BpdmmGraph, out: *mut *mut BpdmmAveraging) -> BpdmmStatus {
    guard(|| {
        non_null!(g, out);
        match build_laplacian_averaging(&(*g).0) {
            Ok(p) => emit(BpdmmAveraging(p), out),
            Err(e) => from_error(e),
        }
    })
}

/// Averaging matrix on `g` with small second eigenvalue magnitude.
///
/// # Safety
/// `g` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_averaging_optimize(
    g: *const BpdmmGraph,
    iters: usize,
    out: *mut *mut BpdmmAveraging,
) -> BpdmmStatus {
    guard(|| {
        non_null!(g, out);
        match optimize_averaging_matrix(&(*g).0, iters) {
            Ok(p) => emit(BpdmmAveraging(p), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_averaging_lambda2(p: *const BpdmmAveraging, out: *mut f64) -> BpdmmStatus {
    guard(|| {
        non_null!(p, out);
        match (*p).0.lambda2_abs() {
            Ok(v) => {
                *out = v;
                BpdmmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `p` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_averaging_dim(p: *const BpdmmAveraging) -> usize {
    p.as_ref().map_or(0, |p| p.0.m())
}

/// Copies the `m × m` entries, row-major, into `out` (length `len ≥ m²`).
///
/// # Safety
/// `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_averaging_entries(p: *const BpdmmAveraging, out: *mut f64, len: usize) -> BpdmmStatus {
    guard(|| {
        non_null!(p, out);
        let e = (*p).0.entries();
        if len < e.len() {
            return fail(BpdmmStatus::InvalidArgument, format!("buffer holds {len}, need {}", e.len()));
        }
        slice::from_raw_parts_mut(out, e.len()).copy_from_slice(e);
        BpdmmStatus::Ok
    })
}

/// # Safety
/// As for [`bpdmm_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn bpdmm_averaging_free(p: *mut BpdmmAveraging) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Linear costs `c` (`m × n`, row `i` is vertex `i`) over the simplex when
/// `simplex` is nonzero, else over free space.
///
/// # Safety
/// `costs` must point to `m * n` readable values.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_problem_linear(
    m: usize,
    n: usize,
    costs: *const f64,
    simplex: c_int,
    out: *mut *mut BpdmmProblem,
) -> BpdmmStatus {
    guard(|| {
        non_null!(costs, out);
        let data = slice::from_raw_parts(costs, m * n).to_vec();
        let set = if simplex != 0 { FeasibleSet::ProbabilitySimplex } else { FeasibleSet::FreeSpace };
        match StackedPoint::from_data(m, n, data).and_then(|c| ProblemInstance::linear(&c, set)) {
            Ok(pr) => emit(BpdmmProblem(pr), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// As for [`bpdmm_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn bpdmm_problem_free(p: *mut BpdmmProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Runs one engine with a JSON solver configuration (keys `rho`, `tau`,
/// `delta`, `gamma`, `mirror`, `max_iters`, `stop_tol`, `seed`, `strict`).
///
/// Returns [`BpdmmStatus::SolverFailure`] with `*out` set when an iteration
/// fails part way; the trace then ends at the last completed iteration.
///
/// # Safety
/// Handles must be live; `config_json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_run(
    problem: *const BpdmmProblem,
    p: *const BpdmmAveraging,
    config_json: *const c_char,
    variant: BpdmmVariant,
    out: *mut *mut BpdmmTrace,
) -> BpdmmStatus {
    guard(|| {
        non_null!(problem, p, config_json, out);
        let text = match CStr::from_ptr(config_json).to_str() {
            Ok(t) => t,
            Err(_) => return fail(BpdmmStatus::InvalidArgument, "config is not UTF-8"),
        };
        let cfg: SolverConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => return fail(BpdmmStatus::InvalidArgument, format!("config: {e}")),
        };
        let variant = match variant {
            BpdmmVariant::Euclid => Variant::Euclid,
            BpdmmVariant::Bregman => Variant::Bregman,
        };
        match run(&(*problem).0, &(*p).0, &cfg, variant) {
            Ok(trace) => {
                let status = match &trace.failure {
                    Some(e) => fail(BpdmmStatus::SolverFailure, e.to_string()),
                    None => BpdmmStatus::Ok,
                };
                emit(BpdmmTrace(trace), out);
                status
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of records (iterations run plus one).
///
/// # Safety
/// `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_trace_len(t: *const BpdmmTrace) -> usize {
    t.as_ref().map_or(0, |t| t.0.records.len())
}

/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_trace_record(t: *const BpdmmTrace, index: usize, out: *mut BpdmmRecord) -> BpdmmStatus {
    guard(|| {
        non_null!(t, out);
        let Some(r) = (&(*t).0.records).get(index) else {
            return fail(BpdmmStatus::InvalidArgument, format!("record {index} out of range"));
        };
        *out = BpdmmRecord {
            t: r.t as u64,
            objective_gap: r.objective_gap.unwrap_or(f64::NAN),
            consensus_residual: r.consensus_residual,
            r: r.r.unwrap_or(f64::NAN),
            v: r.v.unwrap_or(f64::NAN),
            wall_nanos: r.wall_nanos,
        };
        BpdmmStatus::Ok
    })
}

/// Copies the final primal iterate (`m × n`, row-major) into `out`.
///
/// # Safety
/// `out` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_trace_final_primal(t: *const BpdmmTrace, out: *mut f64, len: usize) -> BpdmmStatus {
    guard(|| {
        non_null!(t, out);
        let x = (*t).0.final_state.x.data();
        if len < x.len() {
            return fail(BpdmmStatus::InvalidArgument, format!("buffer holds {len}, need {}", x.len()));
        }
        slice::from_raw_parts_mut(out, x.len()).copy_from_slice(x);
        BpdmmStatus::Ok
    })
}

/// Writes the trace as CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_trace_write_csv(t: *const BpdmmTrace, path: *const c_char) -> BpdmmStatus {
    guard(|| {
        non_null!(t, path);
        let Ok(path) = CStr::from_ptr(path).to_str() else {
            return fail(BpdmmStatus::InvalidArgument, "path is not UTF-8");
        };
        match write_csv(&(*t).0.records, Path::new(path)) {
            Ok(()) => BpdmmStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// As for [`bpdmm_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn bpdmm_trace_free(t: *mut BpdmmTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Euclidean projection of `v` onto the probability simplex.
///
/// # Safety
/// `v` and `out` must hold `n` values; they may alias.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_simplex_projection(v: *const f64, n: usize, out: *mut f64) -> BpdmmStatus {
    guard(|| {
        non_null!(v, out);
        if n == 0 {
            return fail(BpdmmStatus::InvalidArgument, "empty vector");
        }
        let x = euclidean_simplex_projection(slice::from_raw_parts(v, n));
        ptr::copy_nonoverlapping(x.as_ptr(), out, n);
        BpdmmStatus::Ok
    })
}

/// `B_φ(u, v)`.
///
/// # Safety
/// `u` and `v` must hold `n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bpdmm_bregman_divergence(
    mirror: BpdmmMirror,
    u: *const f64,
    v: *const f64,
    n: usize,
    out: *mut f64,
) -> BpdmmStatus {
    guard(|| {
        non_null!(u, v, out);
        let phi = match mirror {
            BpdmmMirror::SquaredEuclidean => MirrorMap::SquaredEuclidean,
            BpdmmMirror::NegativeEntropy => MirrorMap::NegativeEntropy,
        };
        match bregman_divergence(phi, slice::from_raw_parts(u, n), slice::from_raw_parts(v, n)) {
            Ok(b) => {
                *out = b;
                BpdmmStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}
