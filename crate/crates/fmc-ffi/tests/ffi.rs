use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use fmc_ffi::*;

fn parse(src: &str) -> *mut FmcTerm {
    let s = CString::new(src).unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { fmc_term_parse(s.as_ptr(), &mut t) }, FmcStatus::Ok);
    t
}

fn take(s: *mut std::ffi::c_char) -> String {
    let r = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { fmc_string_free(s) };
    r
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fmc_last_error()) }.to_str().unwrap().to_owned()
}

#[test]
fn parse_print_free() {
    let t = parse("rnd<x>.[x].c<y>.[y].+.<z>.[z]c.*");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fmc_term_print(t, &mut s) }, FmcStatus::Ok);
    assert_eq!(take(s), "rnd<x>.[x].c<y>.[y].+.<z>.[z]c");
    unsafe { fmc_term_free(t) };
}

#[test]
fn parse_errors_are_reported() {
    let s = CString::new("[x").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { fmc_term_parse(s.as_ptr(), &mut t) }, FmcStatus::ParseError);
    assert!(t.is_null());
    assert!(last_error().contains("1:3"), "{}", last_error());
}

#[test]
fn null_arguments() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { fmc_term_parse(ptr::null(), &mut t) }, FmcStatus::NullArgument);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fmc_term_print(ptr::null(), &mut s) }, FmcStatus::NullArgument);
    let t = parse("*");
    assert_eq!(unsafe { fmc_term_print(t, ptr::null_mut()) }, FmcStatus::NullArgument);
    assert_eq!(unsafe { fmc_term_check(t, ptr::null()) }, FmcStatus::NullArgument);
    unsafe {
        fmc_term_free(t);
        fmc_term_free(ptr::null_mut());
        fmc_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_utf8() {
    let bytes = [0xffu8, 0];
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { fmc_term_parse(bytes.as_ptr().cast(), &mut t) }, FmcStatus::InvalidUtf8);
}

#[test]
fn run_example() {
    let t = parse("rnd<x>.[x].c<y>.[y].+.<z>.[z]c");
    let mem = CString::new("rnd = 9 7 3 ; c = 5").unwrap();
    let mut out = ptr::null_mut();
    let mut steps = 0usize;
    assert_eq!(unsafe { fmc_run(t, mem.as_ptr(), 1000, &mut out, &mut steps) }, FmcStatus::Ok);
    assert_eq!(take(out), "c = 8 | rnd = 9 7");
    assert_eq!(steps, 7);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { fmc_run(t, ptr::null(), 1000, &mut out, &mut steps) }, FmcStatus::Stuck);
    assert!(out.is_null());
    unsafe { fmc_term_free(t) };
}

#[test]
fn omega_exhausts_fuel() {
    let t = parse("[<x>.[x].x].<x>.[x].x");
    let mut out = ptr::null_mut();
    let mut steps = 0;
    assert_eq!(unsafe { fmc_run(t, ptr::null(), 50, &mut out, &mut steps) }, FmcStatus::FuelExhausted);
    let mut n = ptr::null_mut();
    assert_eq!(unsafe { fmc_normalize(t, 50, &mut n, ptr::null_mut()) }, FmcStatus::FuelExhausted);
    assert!(n.is_null());
    unsafe { fmc_term_free(t) };
}

#[test]
fn normalize_and_compare() {
    let t = parse("[4].[3].[2].+.mul.[1].+");
    let mut out = ptr::null_mut();
    let mut steps = 0;
    assert_eq!(unsafe { fmc_run(t, ptr::null(), 1000, &mut out, &mut steps) }, FmcStatus::Ok);
    assert_eq!(take(out), "λ = 21");
    let a = parse("[<x>.[x]].<f>.[*].f");
    let mut n = ptr::null_mut();
    let mut k = 0;
    assert_eq!(unsafe { fmc_normalize(a, 100, &mut n, &mut k) }, FmcStatus::Ok);
    assert_eq!(k, 2);
    let want = parse("[*]");
    let mut eq = false;
    assert_eq!(unsafe { fmc_term_alpha_eq(n, want, &mut eq) }, FmcStatus::Ok);
    assert!(eq);
    unsafe {
        fmc_term_free(t);
        fmc_term_free(a);
        fmc_term_free(n);
        fmc_term_free(want);
    }
}

#[test]
fn types_and_measure() {
    let t = parse("rnd<x>.[x].c<y>.[y].+.<z>.[z]c");
    let good = CString::new("rnd(Z) c(Z) > c(Z)").unwrap();
    let bad = CString::new("rnd(Z) > c(Z)").unwrap();
    let junk = CString::new("rnd(").unwrap();
    unsafe {
        assert_eq!(fmc_term_check(t, good.as_ptr()), FmcStatus::Ok);
        assert_eq!(fmc_term_check(t, bad.as_ptr()), FmcStatus::TypeError);
        assert_eq!(fmc_term_check(t, junk.as_ptr()), FmcStatus::ParseError);
        let mut s = ptr::null_mut();
        assert_eq!(fmc_term_type(t, &mut s), FmcStatus::Ok);
        assert_eq!(take(s), "c(Z) rnd(Z) > c(Z)");
        assert_eq!(fmc_term_infer(t, &mut s), FmcStatus::Ok);
        assert!(take(s).contains('>'));
        fmc_term_free(t);
    }
    let t = parse("[<x>.[x]].<f>.[*].f");
    let (mut m, mut v) = (0u64, 0u64);
    unsafe {
        assert_eq!(fmc_measure(t, ptr::null(), false, &mut m), FmcStatus::Ok);
        assert_eq!(fmc_measure(t, ptr::null(), true, &mut v), FmcStatus::Ok);
        fmc_term_free(t);
    }
    assert!(m >= 2, "measure {m} below the reduction length");
    assert!(v > 0);
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fmc.h")).unwrap();
    for f in [
        "fmc_last_error",
        "fmc_term_parse",
        "fmc_term_free",
        "fmc_string_free",
        "fmc_term_print",
        "fmc_term_alpha_eq",
        "fmc_term_check",
        "fmc_term_infer",
        "fmc_term_type",
        "fmc_run",
        "fmc_normalize",
        "fmc_measure",
        "typedef struct FmcTerm FmcTerm",
        "FMC_STATUS_FUEL_EXHAUSTED = 6",
    ] {
        assert!(h.contains(f), "header lacks {f}");
    }
}

#[test]
fn header_compiles_as_c_and_cxx() {
    let h = concat!(env!("CARGO_MANIFEST_DIR"), "/include/fmc.h");
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(st) = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, h]).status() else {
            eprintln!("{cc} not found; skipped");
            continue;
        };
        assert!(st.success(), "{cc} rejects the header");
    }
}
