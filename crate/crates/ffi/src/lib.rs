//! C ABI for `tclkraus`.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`TkStatus`]; on failure a message is
//!   kept per thread and can be read with [`tk_last_error_message`].
//! * Complex matrices cross the boundary as interleaved `re, im` doubles in
//!   row-major order, so a `d×d` matrix occupies `2·d·d` doubles. Stacks of
//!   matrices (generators, Kraus operators, trajectories) are concatenated.
//! * Objects are opaque handles created by `tk_*_new`/constructor functions
//!   and released with the matching `tk_*_free`. Freeing `NULL` is a no-op.
//! * No function panics across the boundary; a caught panic is reported as
//!   [`TkStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;
use tclkraus::bath::{BathCorrelation, BathMode};
use tclkraus::kraus::{apply_channel, born_channel, canonical_kraus, KrausOptions, KrausSet};
use tclkraus::linalg::{ComplexMatrix, ErrorGeneratorSet, SystemHamiltonian};
use tclkraus::ode::{integrate, OdeSettings, TimeGrid};
use tclkraus::report::run_scenario;
use tclkraus::scenario::Scenario;
use tclkraus::tcl::{collision_tcl2, MasterEquation, Tcl2Generator};
use tclkraus::Error;

/// Result codes shared by every function of the C API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotHermitian = 4,
    /// Quadrature or integrator failure, non-finite values, trace drift.
    Numerical = 5,
    NotCompletelyPositive = 6,
    OutsideValidity = 7,
    TruncationInsufficient = 8,
    /// Malformed or inconsistent scenario file.
    Scenario = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

/// Bath correlation model (discrete modes, Ohmic or Markovian).
pub struct TkBath(BathCorrelation);

/// Second-order TCL generator: system Hamiltonian, error generators and bath.
pub struct TkGenerator(Tcl2Generator);

/// Canonical Kraus set of the second-order channel at one time.
pub struct TkKrausSet(KrausSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> TkStatus {
    match err {
        Error::DimensionMismatch(_) | Error::DimensionGuard { .. } => TkStatus::DimensionMismatch,
        Error::InvalidInput(_) | Error::Distributional(_) => TkStatus::InvalidArgument,
        Error::NotHermitian { .. } => TkStatus::NotHermitian,
        Error::NonFinite(_)
        | Error::QuadratureNonConvergence { .. }
        | Error::StepCollapse { .. }
        | Error::TraceDrift { .. } => TkStatus::Numerical,
        Error::NotCompletelyPositive { .. } => TkStatus::NotCompletelyPositive,
        Error::OutsideValidity { .. } => TkStatus::OutsideValidity,
        Error::TruncationInsufficient(_) => TkStatus::TruncationInsufficient,
        Error::Scenario { .. } => TkStatus::Scenario,
        Error::RunFailed { source, .. } => status_of(source),
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => TkStatus::Io,
    }
}

struct Failure(TkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TkStatus::NullPointer, format!("{what} is NULL"))
}

/// Run `f`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> TkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TkStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            TkStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be NULL or point to `len` readable doubles.
unsafe fn doubles<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be NULL or point to `len` writable doubles.
unsafe fn doubles_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn read_matrix(data: &[f64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        Complex64::new(data[k], data[k + 1])
    })
}

fn write_matrix(m: &ComplexMatrix, out: &mut [f64]) {
    let d = m.ncols();
    for i in 0..m.nrows() {
        for j in 0..d {
            let k = 2 * (i * d + j);
            out[k] = m[(i, j)].re;
            out[k + 1] = m[(i, j)].im;
        }
    }
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Copy the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len` bytes). Returns the full message length in bytes
/// excluding the terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Forget the calling thread's last error.
#[no_mangle]
pub extern "C" fn tk_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

// ---------------------------------------------------------------------------
// Baths
// ---------------------------------------------------------------------------

/// Discrete bath of `n_modes` modes coupled to a single generator.
/// `g` holds `n_modes` interleaved complex couplings.
///
/// # Safety
/// `omegas` must point to `n_modes` doubles, `g` to `2·n_modes` doubles and
/// `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tk_bath_discrete(
    n_modes: usize,
    omegas: *const f64,
    g: *const f64,
    temperature: f64,
    out: *mut *mut TkBath,
) -> TkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let w = doubles(omegas, n_modes, "omegas")?;
        let g = doubles(g, 2 * n_modes, "g")?;
        let modes = (0..n_modes)
            .map(|k| BathMode::new(w[k], Complex64::new(g[2 * k], g[2 * k + 1])))
            .collect();
        put(out, TkBath(BathCorrelation::discrete(modes, temperature)?));
        Ok(())
    })
}

/// Ohmic bath with exponential cutoff, identical and independent for each of
/// `n_generators` generators.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tk_bath_ohmic(
    eta: f64,
    cutoff: f64,
    temperature: f64,
    n_generators: usize,
    out: *mut *mut TkBath,
) -> TkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TkBath(BathCorrelation::ohmic(eta, cutoff, temperature, n_generators)?));
        Ok(())
    })
}

/// Delta-correlated bath `χ(t) = ½γ δ(t)` with an `n×n` Hermitian PSD `γ`
/// given as interleaved complex entries.
///
/// # Safety
/// `gamma` must point to `2·n·n` doubles and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tk_bath_markovian(n_generators: usize, gamma: *const f64, out: *mut *mut TkBath) -> TkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = doubles(gamma, 2 * n_generators * n_generators, "gamma")?;
        put(out, TkBath(BathCorrelation::markovian(read_matrix(g, n_generators))?));
        Ok(())
    })
}

/// Number of error generators the bath couples to.
///
/// # Safety
/// `bath` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_bath_generators(bath: *const TkBath) -> usize {
    bath.as_ref().map_or(0, |b| b.0.n_generators())
}

/// `χ_{αβ}(t)` written to `out[0..2]` as `re, im`.
///
/// # Safety
/// `bath` must be a live handle and `out` must point to 2 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tk_bath_chi(bath: *const TkBath, alpha: usize, beta: usize, t: f64, out: *mut f64) -> TkStatus {
    guard(|| {
        let b = reference(bath, "bath")?;
        let o = doubles_mut(out, 2, "out")?;
        if alpha >= b.0.n_generators() || beta >= b.0.n_generators() {
            return Err(Failure(
                TkStatus::InvalidArgument,
                format!("generator index ({alpha}, {beta}) out of range"),
            ));
        }
        let z = b.0.chi(alpha, beta, t)?;
        o[0] = z.re;
        o[1] = z.im;
        Ok(())
    })
}

/// # Safety
/// `bath` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tk_bath_free(bath: *mut TkBath) {
    if !bath.is_null() {
        drop(Box::from_raw(bath));
    }
}

// ---------------------------------------------------------------------------
// TCL2 generator
// ---------------------------------------------------------------------------

/// Build a TCL2 generator for a `d`-level system. `h` is the `d×d` system
/// Hamiltonian, `generators` holds `n_generators` stacked `d×d` Hermitian
/// operators. The bath is copied; it may be freed afterwards.
///
/// # Safety
/// `h` must point to `2·d·d` doubles, `generators` to `2·n·d·d` doubles,
/// `bath` must be a live handle and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tk_generator_new(
    d: usize,
    h: *const f64,
    n_generators: usize,
    generators: *const f64,
    bath: *const TkBath,
    out: *mut *mut TkGenerator,
) -> TkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if d == 0 || n_generators == 0 {
            return Err(Failure(TkStatus::InvalidArgument, "d and n_generators must be positive".into()));
        }
        let hs = SystemHamiltonian::new(read_matrix(doubles(h, 2 * d * d, "h")?, d))?;
        let raw = doubles(generators, 2 * n_generators * d * d, "generators")?;
        let ops = raw.chunks_exact(2 * d * d).map(|c| read_matrix(c, d)).collect();
        let gens = ErrorGeneratorSet::new(ops)?;
        let b = reference(bath, "bath")?;
        put(out, TkGenerator(Tcl2Generator::new(hs, gens, b.0.clone())?));
        Ok(())
    })
}

/// System dimension `d`.
///
/// # Safety
/// `gen` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_generator_dim(gen: *const TkGenerator) -> usize {
    gen.as_ref().map_or(0, |g| g.0.hamiltonian().dim())
}

/// Dissipative part `C(t)ρ` of the TCL2 generator.
///
/// # Safety
/// `gen` must be a live handle; `rho` and `out` must point to `2·d·d` doubles.
#[no_mangle]
pub unsafe extern "C" fn tk_generator_collision(gen: *const TkGenerator, t: f64, rho: *const f64, out: *mut f64) -> TkStatus {
    guard(|| {
        let g = reference(gen, "generator")?;
        let d = g.0.hamiltonian().dim();
        let r = read_matrix(doubles(rho, 2 * d * d, "rho")?, d);
        let o = doubles_mut(out, 2 * d * d, "out")?;
        write_matrix(&collision_tcl2(&g.0, t, &r)?, o);
        Ok(())
    })
}

/// Integrate the TCL2 master equation from `rho0` on a uniform grid of
/// `n_points` times in `[0, t_max]`, writing the `n_points` states to `out`.
///
/// # Safety
/// `gen` must be a live handle, `rho0` must point to `2·d·d` doubles and
/// `out` to `2·n_points·d·d` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tk_generator_evolve(
    gen: *const TkGenerator,
    rho0: *const f64,
    t_max: f64,
    n_points: usize,
    out: *mut f64,
) -> TkStatus {
    guard(|| {
        let g = reference(gen, "generator")?;
        let d = g.0.hamiltonian().dim();
        let r0 = read_matrix(doubles(rho0, 2 * d * d, "rho0")?, d);
        let grid = TimeGrid::uniform(t_max, n_points)?;
        let o = doubles_mut(out, 2 * n_points * d * d, "out")?;
        let traj = integrate(&g.0, &r0, &grid, None, &OdeSettings::default())?;
        for (state, chunk) in traj.states.iter().zip(o.chunks_exact_mut(2 * d * d)) {
            write_matrix(state, chunk);
        }
        Ok(())
    })
}

/// # Safety
/// `gen` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tk_generator_free(gen: *mut TkGenerator) {
    if !gen.is_null() {
        drop(Box::from_raw(gen));
    }
}

// ---------------------------------------------------------------------------
// Kraus sets
// ---------------------------------------------------------------------------

/// Canonical (interaction-picture) Kraus set of the second-order channel at
/// time `t`. `cp_tolerance <= 0` selects the default clipping threshold;
/// `normalize != 0` applies the `S^{-1/2}` completeness correction.
///
/// # Safety
/// `gen` must be a live handle and `out` writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_born(
    gen: *const TkGenerator,
    t: f64,
    cp_tolerance: f64,
    normalize: c_int,
    out: *mut *mut TkKrausSet,
) -> TkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let g = &reference(gen, "generator")?.0;
        let m = born_channel(t, g.hamiltonian(), g.generators(), g.bath(), g.quadrature())?;
        let opts = KrausOptions {
            cp_tolerance: (cp_tolerance > 0.0).then_some(cp_tolerance),
            normalize: normalize != 0,
        };
        put(out, TkKrausSet(canonical_kraus(&m, &opts)?));
        Ok(())
    })
}

/// Number of Kraus operators.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_count(set: *const TkKrausSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.operators.len())
}

/// Operator dimension `d`.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_dim(set: *const TkKrausSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.dim())
}

/// Copy the operators (stacked, `2·count·d·d` doubles) into `out`.
/// `len` is the capacity of `out` in doubles.
///
/// # Safety
/// `set` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_operators(set: *const TkKrausSet, out: *mut f64, len: usize) -> TkStatus {
    guard(|| {
        let s = &reference(set, "kraus set")?.0;
        let d = s.dim();
        let need = 2 * s.operators.len() * d * d;
        if len < need {
            return Err(Failure(TkStatus::BufferTooSmall, format!("need {need} doubles, got {len}")));
        }
        let o = doubles_mut(out, need, "out")?;
        for (k, chunk) in s.operators.iter().zip(o.chunks_exact_mut(2 * d * d)) {
            write_matrix(k, chunk);
        }
        Ok(())
    })
}

/// Copy the eigenvalues `d_α` (descending, one per operator) into `out`.
///
/// # Safety
/// `set` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_eigenvalues(set: *const TkKrausSet, out: *mut f64, len: usize) -> TkStatus {
    guard(|| {
        let s = &reference(set, "kraus set")?.0;
        let n = s.eigenvalues.len();
        if len < n {
            return Err(Failure(TkStatus::BufferTooSmall, format!("need {n} doubles, got {len}")));
        }
        doubles_mut(out, n, "out")?.copy_from_slice(&s.eigenvalues);
        Ok(())
    })
}

/// `‖Σ K†K − I‖_max`, or NaN for a NULL handle.
///
/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_completeness(set: *const TkKrausSet) -> f64 {
    set.as_ref().map_or(f64::NAN, |s| s.0.completeness_dev)
}

/// `Σ K ρ K†` in the interaction picture.
///
/// # Safety
/// `set` must be a live handle; `rho` and `out` must point to `2·d·d` doubles.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_apply(set: *const TkKrausSet, rho: *const f64, out: *mut f64) -> TkStatus {
    guard(|| {
        let s = &reference(set, "kraus set")?.0;
        let d = s.dim();
        let r = read_matrix(doubles(rho, 2 * d * d, "rho")?, d);
        let o = doubles_mut(out, 2 * d * d, "out")?;
        write_matrix(&apply_channel(s, &r)?, o);
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tk_kraus_free(set: *mut TkKrausSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

// ---------------------------------------------------------------------------
// Metrics and scenarios
// ---------------------------------------------------------------------------

/// Trace distance `½‖ρ₁ − ρ₂‖₁` of two `d×d` Hermitian matrices.
///
/// # Safety
/// `rho1` and `rho2` must point to `2·d·d` doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn tk_trace_distance(d: usize, rho1: *const f64, rho2: *const f64, out: *mut f64) -> TkStatus {
    guard(|| {
        let a = read_matrix(doubles(rho1, 2 * d * d, "rho1")?, d);
        let b = read_matrix(doubles(rho2, 2 * d * d, "rho2")?, d);
        if out.is_null() {
            return Err(null("out"));
        }
        *out = tclkraus::metrics::trace_distance(&a, &b)?;
        Ok(())
    })
}

/// Run a scenario file and write its artifacts to `out_dir` (or the
/// scenario's `output_dir`, or `out/<name>` when both are NULL/absent).
/// `*gates_passed` is set to 1 when every declared gate passes, else 0.
///
/// # Safety
/// `path` must be a NUL-terminated string, `out_dir` NULL or a NUL-terminated
/// string, and `gates_passed` must point to one writable `int`.
#[no_mangle]
pub unsafe extern "C" fn tk_run_scenario(path: *const c_char, out_dir: *const c_char, gates_passed: *mut c_int) -> TkStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if gates_passed.is_null() {
            return Err(null("gates_passed"));
        }
        let utf8 = |p: *const c_char, what: &str| -> Result<String, Failure> {
            CStr::from_ptr(p)
                .to_str()
                .map(str::to_owned)
                .map_err(|_| Failure(TkStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
        };
        let scenario = Scenario::from_path(Path::new(&utf8(path, "path")?))?;
        let dir = if out_dir.is_null() {
            scenario
                .output_dir
                .clone()
                .unwrap_or_else(|| Path::new("out").join(&scenario.name))
        } else {
            utf8(out_dir, "out_dir")?.into()
        };
        let output = run_scenario(&scenario, None)?;
        output.write_artifacts(&dir)?;
        *gates_passed = c_int::from(output.report.gates_passed);
        Ok(())
    })
}
