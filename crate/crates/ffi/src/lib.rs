//! C ABI over `branchlab`.
//!
//! Objects cross the boundary as opaque handles created by `bl_*_new`-style
//! constructors and released with the matching `bl_*_free`. Every fallible
//! call returns a [`BlStatus`]; on failure a message is kept per thread and
//! can be read with [`bl_last_error`].
//!
//! Strings are NUL-terminated UTF-8. Functions that produce text take
//! `(buf, len, needed)`: `*needed` receives the size including the NUL; a
//! NULL `buf` is a size query and succeeds, a short `buf` fails with
//! `BL_STATUS_BUFFER_TOO_SMALL` and leaves it untouched.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::str::FromStr;

use branchlab::branch::{self, BranchTrajectory, PerturbationSpec};
use branchlab::cagrid::{self, CaGrid, CaMode, CaSeed, RenderFormat, RenderOptions};
use branchlab::lemmalab::{self, Counterexample};
use branchlab::syracuse::{self, SyracuseTrajectory};
use branchlab::{Error, ExactRational};
use num_bigint::BigUint;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// Malformed or out-of-range input (parse errors, even seeds, ...).
    InvalidArgument = 2,
    /// Well-formed input outside the domain of the operation (rejected
    /// parameter block, inadmissible perturbation, index out of range, ...).
    Domain = 3,
    /// The output buffer is too small; `*needed` holds the required size.
    BufferTooSmall = 4,
    Io = 5,
    /// An identity that must hold did not; indicates a defect.
    Internal = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlCaMode {
    /// Seed is an odd positive integer.
    Syracuse = 0,
    /// Seed is a positive dyadic rational `a/b`.
    RationalPower = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlRenderFormat {
    Text = 0,
    Pbm = 1,
    Svg = 2,
}

/// Opaque Branch trajectory.
pub struct BlBranchTrajectory {
    inner: BranchTrajectory,
}

/// Opaque Syracuse trajectory.
pub struct BlSyracuseTrajectory {
    inner: SyracuseTrajectory,
}

/// Opaque cellular automaton grid.
pub struct BlCaGrid {
    inner: CaGrid,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

type Failure = (BlStatus, String);

fn status_of(e: &Error) -> BlStatus {
    match e {
        Error::InvalidBase(_)
        | Error::Negative(_)
        | Error::InvertedWindow { .. }
        | Error::ParseRational(_)
        | Error::Usage(_)
        | Error::GridShape(_)
        | Error::InvertedRange { .. }
        | Error::ZeroResolution
        | Error::NotOddPositive(_)
        | Error::ZeroSeed
        | Error::NotDyadic(_) => BlStatus::InvalidArgument,
        Error::Params { .. }
        | Error::BranchCondition(_)
        | Error::Inadmissible { .. }
        | Error::CorruptedState { .. }
        | Error::PerturbationsExhausted(_)
        | Error::NonPositivePerturbation { .. }
        | Error::TrajectoryTooShort { .. }
        | Error::IndexOutOfRange { .. }
        | Error::GridTooNarrow { .. }
        | Error::GeometryMismatch(_)
        | Error::ZeroValuation
        | Error::DivisionByZero => BlStatus::Domain,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => BlStatus::Io,
        Error::ThetaCap { .. } | Error::CarryIdentity { .. } | Error::Internal(_) => BlStatus::Internal,
    }
}

fn fail(e: Error) -> Failure {
    (status_of(&e), e.to_string())
}

fn set_last_error(msg: String) {
    LAST_ERROR.with(|m| *m.borrow_mut() = msg);
}

/// Runs `f`, records any failure and converts panics to `BL_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error(String::new());
            BlStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic caught at the C boundary".into());
            BlStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((BlStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (BlStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn parse<T: FromStr>(s: &str, what: &str) -> Result<T, Failure> {
    s.trim().parse().map_err(|_| (BlStatus::InvalidArgument, format!("{what}: cannot parse {s:?}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| (BlStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err((BlStatus::NullPointer, "output handle pointer is NULL".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_bytes(data: &[u8], buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Failure> {
    let size = data.len() + 1;
    if !needed.is_null() {
        *needed = size;
    }
    if buf.is_null() {
        return Ok(());
    }
    if len < size {
        return Err((BlStatus::BufferTooSmall, format!("buffer of {len} bytes, {size} needed")));
    }
    std::ptr::copy_nonoverlapping(data.as_ptr(), buf.cast::<u8>(), data.len());
    *buf.add(data.len()) = 0;
    Ok(())
}

fn index<T>(items: &[T], n: usize) -> Result<&T, Failure> {
    items.get(n).ok_or_else(|| fail(Error::IndexOutOfRange { index: n, len: items.len() }))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message (empty after a success).
///
/// # Safety
/// `buf` must be NULL or valid for `len` bytes; `needed` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bl_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> BlStatus {
    let msg = LAST_ERROR.with(|m| m.borrow().clone());
    let size = msg.len() + 1;
    if !needed.is_null() {
        *needed = size;
    }
    if buf.is_null() {
        return BlStatus::Ok;
    }
    if len < size {
        return BlStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), msg.len());
    *buf.add(msg.len()) = 0;
    BlStatus::Ok
}

/// Iterates `steps` transitions from `S_0 = xi` with parameters `(p, q)`.
/// `perturbation` uses the CLI syntax: `zero`, `syracuse:C[:E0]`,
/// `explicit:R0,R1,...` or `grid:RES[:SEED]`.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bl_branch_iterate(
    p: u32,
    q: u32,
    xi: *const c_char,
    perturbation: *const c_char,
    steps: usize,
    out: *mut *mut BlBranchTrajectory,
) -> BlStatus {
    guard(|| {
        let xi: ExactRational = read_str(xi, "xi")?.parse().map_err(fail)?;
        let spec: PerturbationSpec = read_str(perturbation, "perturbation")?.parse().map_err(fail)?;
        let params = branch::validate_params(p, q, xi).map_err(fail)?;
        let traj = branch::iterate_v2(&params, &spec, steps).map_err(fail)?;
        store(out, BlBranchTrajectory { inner: traj })
    })
}

/// Embedded Branch trajectory of the odd seed `w0` (decimal), run to 1.
///
/// # Safety
/// `w0` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bl_branch_embed_syracuse(w0: *const c_char, cap: u64, out: *mut *mut BlBranchTrajectory) -> BlStatus {
    guard(|| {
        let w0: BigUint = parse(read_str(w0, "w0")?, "w0")?;
        let traj = syracuse::trajectory(&w0, cap).map_err(fail)?;
        let emb = syracuse::embed(&traj).map_err(fail)?;
        store(out, BlBranchTrajectory { inner: emb.trajectory })
    })
}

/// Number of recorded states.
///
/// # Safety
/// `h` must be a live handle or NULL; `len` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn bl_branch_len(h: *const BlBranchTrajectory, len: *mut usize) -> BlStatus {
    guard(|| {
        let h = handle(h, "trajectory")?;
        *len.as_mut().ok_or((BlStatus::NullPointer, "len is NULL".to_string()))? = h.inner.len();
        Ok(())
    })
}

/// State `S_n` as `a/b` text.
///
/// # Safety
/// `h` live or NULL; `buf` NULL or valid for `len` bytes; `needed` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bl_branch_state(
    h: *const BlBranchTrajectory,
    n: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> BlStatus {
    guard(|| {
        let h = handle(h, "trajectory")?;
        let s = index(&h.inner.steps, n)?.s.to_string();
        write_bytes(s.as_bytes(), buf, len, needed)
    })
}

/// `(p^n / q^(n+e_n)) (xi + Sigma_n)` recomputed from the recorded
/// perturbations and valuations, as `a/b` text.
///
/// # Safety
/// As for [`bl_branch_state`].
#[no_mangle]
pub unsafe extern "C" fn bl_branch_closed_form(
    h: *const BlBranchTrajectory,
    n: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> BlStatus {
    guard(|| {
        let h = handle(h, "trajectory")?;
        let v = branch::closed_form(&h.inner, n).map_err(fail)?.to_string();
        write_bytes(v.as_bytes(), buf, len, needed)
    })
}

/// Runs the domination checks for `k` in `2..=k_max` and writes the claim
/// reports as a JSON array.
///
/// # Safety
/// As for [`bl_branch_state`].
#[no_mangle]
pub unsafe extern "C" fn bl_lemma_domination_json(
    h: *const BlBranchTrajectory,
    k_max: u32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> BlStatus {
    guard(|| {
        let h = handle(h, "trajectory")?;
        let reports = lemmalab::domination_check(&h.inner, k_max).map_err(fail)?;
        let json = serde_json::to_string(&reports).map_err(|e| fail(e.into()))?;
        write_bytes(json.as_bytes(), buf, len, needed)
    })
}

/// Recomputes a certificate given as JSON (the bare certificate or a file
/// envelope with a `certificate` field). `*valid` is true iff it still
/// violates its relation with the recorded sides.
///
/// # Safety
/// `json` NULL or NUL-terminated; `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_certificate_replay(json: *const c_char, valid: *mut bool) -> BlStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| fail(e.into()))?;
        let body = value.get("certificate").cloned().unwrap_or(value);
        let cert: Counterexample = serde_json::from_value(body).map_err(|e| fail(e.into()))?;
        let ok = cert.replay().map_err(fail)?;
        *valid.as_mut().ok_or((BlStatus::NullPointer, "valid is NULL".to_string()))? = ok;
        Ok(())
    })
}

/// Releases a trajectory. NULL is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_branch_free(h: *mut BlBranchTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Odd-step Syracuse trajectory of `w0` (decimal) until 1 or `cap` steps.
///
/// # Safety
/// `w0` NULL or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_syracuse_trajectory(w0: *const c_char, cap: u64, out: *mut *mut BlSyracuseTrajectory) -> BlStatus {
    guard(|| {
        let w0: BigUint = parse(read_str(w0, "w0")?, "w0")?;
        let traj = syracuse::trajectory(&w0, cap).map_err(fail)?;
        store(out, BlSyracuseTrajectory { inner: traj })
    })
}

/// Number of recorded odd values, and whether 1 was reached.
///
/// # Safety
/// `h` live or NULL; `len` and `reached_one` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn bl_syracuse_len(h: *const BlSyracuseTrajectory, len: *mut usize, reached_one: *mut bool) -> BlStatus {
    guard(|| {
        let h = handle(h, "trajectory")?;
        if let Some(l) = len.as_mut() {
            *l = h.inner.len();
        }
        if let Some(r) = reached_one.as_mut() {
            *r = h.inner.reached_one;
        }
        Ok(())
    })
}

/// `W_n` as decimal text.
///
/// # Safety
/// As for [`bl_branch_state`].
#[no_mangle]
pub unsafe extern "C" fn bl_syracuse_value(
    h: *const BlSyracuseTrajectory,
    n: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> BlStatus {
    guard(|| {
        let h = handle(h, "trajectory")?;
        let w = index(&h.inner.steps, n)?.w.to_string();
        write_bytes(w.as_bytes(), buf, len, needed)
    })
}

/// Releases a trajectory. NULL is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_syracuse_free(h: *mut BlSyracuseTrajectory) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Builds `rows` rows of the automaton. `width = 0` fits the integer parts
/// plus 16 fractional columns.
///
/// # Safety
/// `seed` NULL or NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_ca_build(
    mode: BlCaMode,
    seed: *const c_char,
    rows: usize,
    width: usize,
    out: *mut *mut BlCaGrid,
) -> BlStatus {
    guard(|| {
        let text = read_str(seed, "seed")?;
        let (mode, seed) = match mode {
            BlCaMode::Syracuse => (CaMode::Syracuse, CaSeed::Odd(parse(text, "seed")?)),
            BlCaMode::RationalPower => (CaMode::RationalPower, CaSeed::Rational(text.parse().map_err(fail)?)),
        };
        let grid = if width == 0 {
            cagrid::build_fitted(mode, &seed, rows, cagrid::DEFAULT_FRAC_DEPTH as usize)
        } else {
            cagrid::build(mode, &seed, rows, width)
        }
        .map_err(fail)?;
        store(out, BlCaGrid { inner: grid })
    })
}

/// Gray recoding of `h` as a new grid.
///
/// # Safety
/// `h` live or NULL; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_ca_gray(h: *const BlCaGrid, out: *mut *mut BlCaGrid) -> BlStatus {
    guard(|| {
        let h = handle(h, "grid")?;
        store(out, BlCaGrid { inner: cagrid::gray(&h.inner) })
    })
}

/// Grid geometry: number of rows and rendered width.
///
/// # Safety
/// `h` live or NULL; `rows` and `width` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn bl_ca_shape(h: *const BlCaGrid, rows: *mut usize, width: *mut usize) -> BlStatus {
    guard(|| {
        let h = handle(h, "grid")?;
        if let Some(r) = rows.as_mut() {
            *r = h.inner.rows.len();
        }
        if let Some(w) = width.as_mut() {
            *w = h.inner.width;
        }
        Ok(())
    })
}

/// Renders the grid (PBM `P1`, SVG or text) into `buf`.
///
/// # Safety
/// As for [`bl_branch_state`].
#[no_mangle]
pub unsafe extern "C" fn bl_ca_render(
    h: *const BlCaGrid,
    format: BlRenderFormat,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> BlStatus {
    guard(|| {
        let h = handle(h, "grid")?;
        let format = match format {
            BlRenderFormat::Text => RenderFormat::Text,
            BlRenderFormat::Pbm => RenderFormat::Pbm,
            BlRenderFormat::Svg => RenderFormat::Svg,
        };
        let mut bytes = Vec::new();
        cagrid::render(&h.inner, format, RenderOptions::default(), &mut bytes).map_err(fail)?;
        write_bytes(&bytes, buf, len, needed)
    })
}

/// Releases a grid. NULL is ignored.
///
/// # Safety
/// `h` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_ca_free(h: *mut BlCaGrid) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
