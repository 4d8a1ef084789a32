//! C ABI over `map_ising`.
//!
//! Every function returns an [`MiStatus`]; on failure a message is kept per
//! thread and can be read with [`mi_last_error_message`]. Decode results are
//! opaque handles released with [`mi_decode_result_free`]. Spins are `int8_t`
//! values `+1` / `-1`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use map_ising::sampler::{sample_pair, SpinSequence};
use map_ising::viterbi::{decode_count, stats_of};
use map_ising::{analyze, boundary_epsilon, ComparisonMode, Couplings, DecodeResult, Error, ModelParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiStatus {
    Ok = 0,
    /// A probability outside `(0, 1/2)`.
    Domain = 1,
    InvalidArgument = 2,
    NullPointer = 3,
    /// Two energies could not be ordered inside the guard band.
    Ambiguous = 4,
    Numeric = 5,
    /// The output buffer is too small; the required size was still reported.
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiMode {
    /// Exact boundary arithmetic when `(q, eps)` classifies as a boundary.
    Auto = 0,
    Incommensurate = 1,
    /// Exact arithmetic at `h = 2J/m`; `m` is passed separately.
    Commensurate = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MiObservables {
    pub f: f64,
    pub c: f64,
    pub v: f64,
    pub theta: f64,
    pub m: u32,
    pub on_boundary: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MiDecodeStats {
    pub v_hat: f64,
    /// NaN for a single site.
    pub c_hat: f64,
    pub theta_hat: f64,
    pub energy_per_site: f64,
}

/// Opaque decode result.
pub struct MiDecodeResult {
    result: DecodeResult,
    couplings: Couplings,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MiStatus {
    match e {
        Error::Domain { .. } => MiStatus::Domain,
        Error::Ambiguous { .. } => MiStatus::Ambiguous,
        Error::Trial { source, .. } => status_of(source),
        Error::StateBudget { .. } | Error::UnexpectedState { .. } | Error::Numeric(_) => MiStatus::Numeric,
        _ => MiStatus::InvalidArgument,
    }
}

struct Fail(MiStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(MiStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MiStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("panic inside map_ising".into());
            MiStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn write_out<T>(p: *mut T, name: &str, value: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

/// Message of the last failure on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// `J = ½ ln((1-q)/q)`, `h = ½ ln((1-eps)/eps)`.
///
/// # Safety
/// `j_out` and `h_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mi_couplings(q: f64, eps: f64, j_out: *mut f64, h_out: *mut f64) -> MiStatus {
    guard(|| {
        let c = ModelParams::new(q, eps)?.couplings();
        write_out(j_out, "j_out", c.j)?;
        write_out(h_out, "h_out", c.h)
    })
}

/// Regime index `m` with `2J/(m-1) > h > 2J/m`; on a boundary `h = 2J/k`, `m = k`.
///
/// # Safety
/// `m_out` and `on_boundary_out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mi_regime_index(q: f64, eps: f64, m_out: *mut u32, on_boundary_out: *mut bool) -> MiStatus {
    guard(|| {
        let r = ModelParams::new(q, eps)?.couplings().regime();
        write_out(m_out, "m_out", r.m)?;
        write_out(on_boundary_out, "on_boundary_out", r.on_boundary())
    })
}

/// Error probability at which `h = 2J/m`.
///
/// # Safety
/// `eps_out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_boundary_epsilon(q: f64, m: u32, eps_out: *mut f64) -> MiStatus {
    guard(|| write_out(eps_out, "eps_out", boundary_epsilon(q, m)?))
}

/// Analytic free energy, correlator, overlap and entropy per site.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_observables(q: f64, eps: f64, out: *mut MiObservables) -> MiStatus {
    guard(|| {
        let a = analyze(&ModelParams::new(q, eps)?)?;
        let o = a.observables;
        write_out(
            out,
            "out",
            MiObservables {
                f: o.f,
                c: o.c,
                v: o.v,
                theta: o.theta,
                m: a.regime.m,
                on_boundary: a.regime.on_boundary(),
            },
        )
    })
}

/// Hidden chain `x` and observation `y` of length `n`, reproducible in `(seed, stream)`.
///
/// # Safety
/// `x_out` and `y_out` must each be valid for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn mi_sample_pair(
    q: f64,
    eps: f64,
    n: usize,
    seed: u64,
    stream: u64,
    x_out: *mut i8,
    y_out: *mut i8,
) -> MiStatus {
    guard(|| {
        if x_out.is_null() {
            return Err(null("x_out"));
        }
        if y_out.is_null() {
            return Err(null("y_out"));
        }
        if n == 0 {
            return Err(Fail(MiStatus::InvalidArgument, "n must be at least 1".into()));
        }
        let params = ModelParams::new(q, eps)?;
        let (x, y) = sample_pair(&params, n, seed, stream);
        slice::from_raw_parts_mut(x_out, n).copy_from_slice(x.as_slice());
        slice::from_raw_parts_mut(y_out, n).copy_from_slice(y.as_slice());
        Ok(())
    })
}

/// Decode `y` under the model `(q, eps)`. `m` is read only for
/// [`MiMode::Commensurate`]. On success `*out` owns a new handle.
///
/// # Safety
/// `y` must be valid for `n` reads and `out` for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_decode(
    y: *const i8,
    n: usize,
    q: f64,
    eps: f64,
    mode: MiMode,
    m: u32,
    out: *mut *mut MiDecodeResult,
) -> MiStatus {
    guard(|| {
        if y.is_null() {
            return Err(null("y"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let seq = SpinSequence::new(slice::from_raw_parts(y, n).to_vec())?;
        let couplings = ModelParams::new(q, eps)?.couplings();
        let mode = match mode {
            MiMode::Auto => ComparisonMode::for_regime(&couplings.regime()),
            MiMode::Incommensurate => ComparisonMode::Incommensurate,
            MiMode::Commensurate => ComparisonMode::Commensurate(m),
        };
        let result = decode_count(&seq, &couplings, mode)?;
        out.write(Box::into_raw(Box::new(MiDecodeResult { result, couplings })));
        Ok(())
    })
}

/// # Safety
/// `r` must be null or a live handle from [`mi_decode`].
unsafe fn handle<'a>(r: *const MiDecodeResult) -> Result<&'a MiDecodeResult, Fail> {
    r.as_ref().ok_or_else(|| null("result"))
}

/// Release a handle; null is ignored.
///
/// # Safety
/// `r` must be null or a handle from [`mi_decode`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mi_decode_result_free(r: *mut MiDecodeResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Sequence length of a result.
///
/// # Safety
/// `r` must be a live handle and `len_out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_decode_result_len(r: *const MiDecodeResult, len_out: *mut usize) -> MiStatus {
    guard(|| write_out(len_out, "len_out", handle(r)?.result.len()))
}

/// Minimal energy as the lattice pair `(a, b)` with `E = -(aJ + bh)`.
///
/// # Safety
/// `r` must be a live handle; `a_out`, `b_out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mi_decode_result_energy(
    r: *const MiDecodeResult,
    a_out: *mut i64,
    b_out: *mut i64,
) -> MiStatus {
    guard(|| {
        let e = handle(r)?.result.energy;
        write_out(a_out, "a_out", e.a)?;
        write_out(b_out, "b_out", e.b)
    })
}

/// Natural log of the number of optimal paths.
///
/// # Safety
/// `r` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_decode_result_ln_count(r: *const MiDecodeResult, out: *mut f64) -> MiStatus {
    guard(|| write_out(out, "out", handle(r)?.result.ln_count()))
}

/// Exact number of optimal paths as a NUL-terminated decimal string.
/// `*required_out` receives the buffer size needed, terminator included;
/// `buf` may be null to query it.
///
/// # Safety
/// `r` must be a live handle, `buf` null or valid for `buf_len` writes,
/// `required_out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_decode_result_count(
    r: *const MiDecodeResult,
    buf: *mut c_char,
    buf_len: usize,
    required_out: *mut usize,
) -> MiStatus {
    guard(|| {
        let digits = handle(r)?.result.count.to_string();
        let needed = digits.len() + 1;
        write_out(required_out, "required_out", needed)?;
        if buf.is_null() {
            return Ok(());
        }
        if buf_len < needed {
            return Err(Fail(
                MiStatus::BufferTooSmall,
                format!("count needs {needed} bytes, buffer has {buf_len}"),
            ));
        }
        let dst = slice::from_raw_parts_mut(buf.cast::<u8>(), needed);
        dst[..digits.len()].copy_from_slice(digits.as_bytes());
        dst[digits.len()] = 0;
        Ok(())
    })
}

/// Per-site statistics averaged over all optimal paths.
///
/// # Safety
/// `r` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn mi_decode_result_stats(r: *const MiDecodeResult, out: *mut MiDecodeStats) -> MiStatus {
    guard(|| {
        let h = handle(r)?;
        let s = stats_of(&h.result, &h.couplings);
        write_out(
            out,
            "out",
            MiDecodeStats {
                v_hat: s.v_hat,
                c_hat: s.c_hat,
                theta_hat: s.theta_hat,
                energy_per_site: s.energy_per_site,
            },
        )
    })
}

/// Copy one optimal path (ties broken towards `+1`) into `x_out`.
///
/// # Safety
/// `r` must be a live handle and `x_out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn mi_decode_result_witness(r: *const MiDecodeResult, x_out: *mut i8, len: usize) -> MiStatus {
    guard(|| {
        let w = handle(r)?.result.witness.as_slice();
        if x_out.is_null() {
            return Err(null("x_out"));
        }
        if len < w.len() {
            return Err(Fail(
                MiStatus::BufferTooSmall,
                format!("witness needs {} entries, buffer has {len}", w.len()),
            ));
        }
        slice::from_raw_parts_mut(x_out, w.len()).copy_from_slice(w);
        Ok(())
    })
}
