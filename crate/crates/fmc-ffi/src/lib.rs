//! C interface to the `fmc` crate.
//!
//! Terms are opaque `FmcTerm` handles. Every fallible call returns an [`FmcStatus`];
//! the message of the most recent failure on the calling thread is available from
//! [`fmc_last_error`]. Strings returned through out-parameters are owned by the caller
//! and released with [`fmc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fmc::machine::{run, DeltaRegistry, RunError};
use fmc::measure::{measure, measure_variant};
use fmc::parser::{parse_memory, parse_term, parse_type, print_term, print_type};
use fmc::reduction::{normalize, ReductionError, Strategy};
use fmc::syntax::{alpha_eq, Term};
use fmc::types::{check, ground_type, infer, Context, Derivation};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    TypeError = 4,
    Stuck = 5,
    FuelExhausted = 6,
    Panic = 7,
}

/// Opaque term handle.
pub struct FmcTerm {
    term: Term,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).expect("no interior NUL"));
}

type Res<T> = Result<T, FmcStatus>;

fn err<T>(status: FmcStatus, msg: impl std::fmt::Display) -> Res<T> {
    set_error(msg.to_string());
    Err(status)
}

/// Run `f`, turning panics into `Panic` and recording nothing on success.
fn guard(f: impl FnOnce() -> Res<()>) -> FmcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FmcStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            FmcStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Res<&'a str> {
    if p.is_null() {
        return err(FmcStatus::NullArgument, "null string argument");
    }
    CStr::from_ptr(p).to_str().or_else(|_| err(FmcStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn handle<'a>(t: *const FmcTerm) -> Res<&'a FmcTerm> {
    t.as_ref().ok_or_else(|| {
        set_error("null term handle");
        FmcStatus::NullArgument
    })
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Res<()> {
    if out.is_null() {
        return err(FmcStatus::NullArgument, "null output pointer");
    }
    *out = CString::new(s).expect("printed terms contain no NUL").into_raw();
    Ok(())
}

unsafe fn derivation(t: &Term, ty: *const c_char) -> Res<Derivation> {
    let r = if ty.is_null() {
        ground_type(t).map(|(_, d)| d)
    } else {
        let ty = parse_type(text(ty)?).or_else(|e| err(FmcStatus::ParseError, e))?;
        check(&Context::new(), t, &ty)
    };
    r.or_else(|e| err(FmcStatus::TypeError, e))
}

/// Message of the last failure on this thread; empty if none. Valid until the next call.
#[no_mangle]
pub extern "C" fn fmc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse `src` into a new handle stored in `*out`.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fmc_term_parse(src: *const c_char, out: *mut *mut FmcTerm) -> FmcStatus {
    guard(|| {
        if out.is_null() {
            return err(FmcStatus::NullArgument, "null output pointer");
        }
        let term = parse_term(text(src)?).or_else(|e| err(FmcStatus::ParseError, e))?;
        *out = Box::into_raw(Box::new(FmcTerm { term }));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `t` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fmc_term_free(t: *mut FmcTerm) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn fmc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Print a term in concrete syntax.
///
/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fmc_term_print(t: *const FmcTerm, out: *mut *mut c_char) -> FmcStatus {
    guard(|| out_string(out, print_term(&handle(t)?.term)))
}

/// Alpha-equivalence of two terms.
///
/// # Safety
/// Both handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fmc_term_alpha_eq(a: *const FmcTerm, b: *const FmcTerm, out: *mut bool) -> FmcStatus {
    guard(|| {
        let (a, b) = (handle(a)?, handle(b)?);
        if out.is_null() {
            return err(FmcStatus::NullArgument, "null output pointer");
        }
        *out = alpha_eq(&a.term, &b.term);
        Ok(())
    })
}

/// Check a closed term against a type written like `rnd(Z) c(Z) > c(Z)`.
///
/// # Safety
/// `t` must be a live handle and `ty` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fmc_term_check(t: *const FmcTerm, ty: *const c_char) -> FmcStatus {
    guard(|| {
        if ty.is_null() {
            return err(FmcStatus::NullArgument, "null type");
        }
        derivation(&handle(t)?.term, ty).map(|_| ())
    })
}

/// Principal type with row variables, as text.
///
/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fmc_term_infer(t: *const FmcTerm, out: *mut *mut c_char) -> FmcStatus {
    guard(|| {
        let s = infer(&Context::new(), &handle(t)?.term).or_else(|e| err(FmcStatus::TypeError, e))?;
        out_string(out, s.to_string())
    })
}

/// Ground type of a closed term (rows ε, free type variables `>`), as text.
///
/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fmc_term_type(t: *const FmcTerm, out: *mut *mut c_char) -> FmcStatus {
    guard(|| {
        let (ty, _) = ground_type(&handle(t)?.term).or_else(|e| err(FmcStatus::TypeError, e))?;
        out_string(out, print_type(&ty))
    })
}

/// Run the machine from memory `mem` (may be null for empty memory). On success the final
/// memory is written to `*out` and the transition count to `*steps`.
///
/// # Safety
/// `t` must be a live handle, `mem` null or NUL-terminated, `out` and `steps` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fmc_run(
    t: *const FmcTerm,
    mem: *const c_char,
    fuel: usize,
    out: *mut *mut c_char,
    steps: *mut usize,
) -> FmcStatus {
    guard(|| {
        let term = &handle(t)?.term;
        let m = if mem.is_null() { Default::default() } else { parse_memory(text(mem)?).or_else(|e| err(FmcStatus::ParseError, e))? };
        if steps.is_null() {
            return err(FmcStatus::NullArgument, "null output pointer");
        }
        match run(&m, term, &DeltaRegistry::default(), fuel) {
            Ok(r) => {
                *steps = r.steps;
                out_string(out, r.memory.to_string())
            }
            Err(e @ RunError::FuelExhausted { .. }) => err(FmcStatus::FuelExhausted, e),
            Err(e) => err(FmcStatus::Stuck, e),
        }
    })
}

/// Leftmost-outermost beta normal form as a new handle.
///
/// # Safety
/// `t` must be a live handle and `out` a valid pointer; `steps` may be null.
#[no_mangle]
pub unsafe extern "C" fn fmc_normalize(t: *const FmcTerm, fuel: usize, out: *mut *mut FmcTerm, steps: *mut usize) -> FmcStatus {
    guard(|| {
        let term = &handle(t)?.term;
        if out.is_null() {
            return err(FmcStatus::NullArgument, "null output pointer");
        }
        match normalize(term, Strategy::LeftmostOutermost, fuel, false) {
            Ok(n) => {
                if !steps.is_null() {
                    *steps = n.steps;
                }
                *out = Box::into_raw(Box::new(FmcTerm { term: n.term }));
                Ok(())
            }
            Err(e @ ReductionError::FuelExhausted { .. }) => err(FmcStatus::FuelExhausted, e),
            Err(e) => err(FmcStatus::Stuck, e),
        }
    })
}

/// Strong-normalisation measure of a typed term; `ty` null means the ground inferred type.
/// `variant` selects the run-length variant.
///
/// # Safety
/// `t` must be a live handle, `ty` null or NUL-terminated, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fmc_measure(t: *const FmcTerm, ty: *const c_char, variant: bool, out: *mut u64) -> FmcStatus {
    guard(|| {
        let d = derivation(&handle(t)?.term, ty)?;
        if out.is_null() {
            return err(FmcStatus::NullArgument, "null output pointer");
        }
        *out = if variant { measure_variant(&d) } else { measure(&d) };
        Ok(())
    })
}
