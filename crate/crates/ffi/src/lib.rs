//! C ABI over `cutlab`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CutlabStatus`]; on failure [`cutlab_last_error`] describes the cause.
//! Numeric outputs are `f64`; instances in rank mode are evaluated with
//! their ranks as times.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cutlab::excursion_ops::drifted_records;
use cutlab::harness::{run_suite, SuiteConfig};
use cutlab::model::component_masses;
use cutlab::pacman::{bertoin_function, BreakpointFunction};
use cutlab::samplers::{sample_instance, Seed};
use cutlab::{build_cut_tree, CutTree, Error, Instance, Mode};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidInstance = 3,
    BufferTooSmall = 4,
    Io = 5,
    Internal = 6,
}

/// A labelled tree with its cut schedule.
pub struct CutlabInstance {
    inner: Instance,
}

/// Breakpoints `(h_j, F(h_j))` of a Pac-Man function.
pub struct CutlabFunction {
    inner: BreakpointFunction<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(CutlabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidTree(_) | Error::ScheduleLength { .. } | Error::DuplicateTime(..) | Error::Malformed(_) => {
                CutlabStatus::InvalidInstance
            }
            Error::Io(_) => CutlabStatus::Io,
            Error::Json(_) => CutlabStatus::InvalidInstance,
            _ => CutlabStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null() -> Failure {
    Failure(CutlabStatus::NullPointer, "null pointer argument".into())
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CutlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CutlabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CutlabStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(CutlabStatus::InvalidArgument, "string is not UTF-8".into()))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    let c = CString::new(s).map_err(|_| Failure(CutlabStatus::Internal, "interior NUL".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Copies `data` into `buf` when it fits; always reports the length.
unsafe fn write_slice(data: &[f64], buf: *mut f64, cap: usize, len_out: *mut usize) -> Result<(), Failure> {
    if len_out.is_null() {
        return Err(null());
    }
    *len_out = data.len();
    if data.len() > cap {
        return Err(Failure(CutlabStatus::BufferTooSmall, format!("need {} slots, have {cap}", data.len())));
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(null());
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn cutlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cutlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Samples a uniform labelled tree on `n` vertices with a cut schedule;
/// `exponential` selects exponential clocks over ranks.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cutlab_instance_generate(
    n: usize,
    exponential: bool,
    seed: u64,
    out: *mut *mut CutlabInstance,
) -> CutlabStatus {
    guard(|| {
        let mode = if exponential { Mode::Exponential } else { Mode::Rank };
        let inner = sample_instance(n, mode, &Seed::new(seed))?;
        write_out(out, CutlabInstance { inner })
    })
}

/// Parses an instance from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cutlab_instance_from_json(json: *const c_char, out: *mut *mut CutlabInstance) -> CutlabStatus {
    guard(|| {
        let v: serde_json::Value = serde_json::from_str(read_str(json)?).map_err(Error::from)?;
        let inner = Instance::from_json(&v)?;
        write_out(out, CutlabInstance { inner })
    })
}

/// Serializes an instance; release the string with [`cutlab_string_free`].
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cutlab_instance_to_json(inst: *const CutlabInstance, out: *mut *mut c_char) -> CutlabStatus {
    guard(|| {
        let inst = borrow(inst)?;
        write_string(out, inst.inner.to_json().to_string())
    })
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `inst` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cutlab_instance_vertex_count(inst: *const CutlabInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.n())
}

/// Releases an instance.
///
/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cutlab_instance_free(inst: *mut CutlabInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Fragment masses at time `t`, largest first. `*len_out` receives the
/// count even when `cap` is too small.
///
/// # Safety
/// `inst` must be a live handle, `buf` must hold `cap` doubles and
/// `len_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cutlab_component_masses(
    inst: *const CutlabInstance,
    t: f64,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> CutlabStatus {
    guard(|| {
        let inst = &borrow(inst)?.inner;
        let masses = component_masses::<f64>(&inst.tree, &inst.schedule, t)?;
        write_slice(&masses.masses, buf, cap, len_out)
    })
}

/// Builds the cut-tree of `inst` and its Pac-Man function.
///
/// # Safety
/// `inst` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cutlab_bertoin_function(
    inst: *const CutlabInstance,
    out: *mut *mut CutlabFunction,
) -> CutlabStatus {
    guard(|| {
        let inst = &borrow(inst)?.inner;
        let ct: CutTree<f64> = build_cut_tree(&inst.tree, &inst.schedule)?;
        write_out(out, CutlabFunction { inner: bertoin_function(&ct)? })
    })
}

/// Number of breakpoints, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cutlab_function_len(f: *const CutlabFunction) -> usize {
    f.as_ref().map_or(0, |f| f.inner.len())
}

/// Copies abscissae into `h` and values into `values`, each of capacity
/// `cap`.
///
/// # Safety
/// `f` must be a live handle, `h` and `values` must hold `cap` doubles and
/// `len_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cutlab_function_points(
    f: *const CutlabFunction,
    h: *mut f64,
    values: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> CutlabStatus {
    guard(|| {
        let f = &borrow(f)?.inner;
        write_slice(&f.h, h, cap, len_out)?;
        write_slice(&f.values, values, cap, len_out)
    })
}

/// Excursion lengths of `F(h) - t h` above its running minimum, in order.
///
/// # Safety
/// `f` must be a live handle, `buf` must hold `cap` doubles and `len_out`
/// must be valid.
#[no_mangle]
pub unsafe extern "C" fn cutlab_excursion_lengths(
    f: *const CutlabFunction,
    t: f64,
    buf: *mut f64,
    cap: usize,
    len_out: *mut usize,
) -> CutlabStatus {
    guard(|| {
        let f = &borrow(f)?.inner;
        if !t.is_finite() {
            return Err(Failure(CutlabStatus::InvalidArgument, "t must be finite".into()));
        }
        write_slice(&drifted_records(f, t).lengths, buf, cap, len_out)
    })
}

/// Releases a function.
///
/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cutlab_function_free(f: *mut CutlabFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Runs a named experiment from a JSON configuration such as
/// `{"experiment": "prim-figure", "seed": 1}`. The report JSON goes to
/// `report_out` and the overall verdict to `pass_out`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `report_out` and
/// `pass_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cutlab_run_suite(
    config_json: *const c_char,
    report_out: *mut *mut c_char,
    pass_out: *mut bool,
) -> CutlabStatus {
    guard(|| {
        if pass_out.is_null() {
            return Err(null());
        }
        let cfg: SuiteConfig = serde_json::from_str(read_str(config_json)?).map_err(Error::from)?;
        let report = run_suite(&cfg)?;
        *pass_out = report.pass;
        write_string(report_out, report.to_json().to_string())
    })
}
