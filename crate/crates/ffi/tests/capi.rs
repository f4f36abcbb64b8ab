use std::ffi::{CStr, CString};
use std::ptr;

use libc::c_char;
use mdcrt_ffi::*;

fn parse(s: &str) -> *mut MdcrtMatrix {
    let c = CString::new(s).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_matrix_parse(c.as_ptr(), &mut m) },
        MdcrtStatus::Ok
    );
    m
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { mdcrt_string_free(s) };
    out
}

fn show(m: *const MdcrtMatrix) -> String {
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_matrix_to_string(m, &mut s) },
        MdcrtStatus::Ok
    );
    take(s)
}

fn last_error() -> String {
    let p = mdcrt_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned()
}

#[test]
fn parse_det_and_shape() {
    let m = parse("[[2,1],[0,3]]");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mdcrt_matrix_det(m, &mut s) }, MdcrtStatus::Ok);
    assert_eq!(take(s), "6");
    let (mut r, mut c) = (0, 0);
    assert_eq!(
        unsafe { mdcrt_matrix_shape(m, &mut r, &mut c) },
        MdcrtStatus::Ok
    );
    assert_eq!((r, c), (2, 2));
    assert_eq!(show(m), "[[2,1],[0,3]]");
    unsafe { mdcrt_matrix_free(m) };
}

#[test]
fn parse_error_sets_message() {
    let c = CString::new("[[1,2],[3]]").unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_matrix_parse(c.as_ptr(), &mut m) },
        MdcrtStatus::Parse
    );
    assert!(m.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_arguments() {
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_matrix_parse(ptr::null(), &mut m) },
        MdcrtStatus::NullPointer
    );
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_matrix_det(ptr::null(), &mut s) },
        MdcrtStatus::NullPointer
    );
    unsafe {
        mdcrt_matrix_free(ptr::null_mut());
        mdcrt_string_free(ptr::null_mut());
    }
}

#[test]
fn non_square_rejected() {
    let m = parse("[[1,2,3],[4,5,6]]");
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_matrix_det(m, &mut s) },
        MdcrtStatus::InvalidArgument
    );
    unsafe { mdcrt_matrix_free(m) };
}

#[test]
fn normal_forms() {
    let m = parse("[[2,1],[0,3]]");
    let (mut h, mut u) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { mdcrt_hnf(m, &mut h, &mut u) }, MdcrtStatus::Ok);
    assert_eq!(show(h), "[[1,0],[3,6]]");
    let (mut l, mut su, mut sv) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
    assert_eq!(
        unsafe { mdcrt_snf(m, &mut l, &mut su, &mut sv) },
        MdcrtStatus::Ok
    );
    assert_eq!(show(l), "[[1,0],[0,6]]");
    let singular = parse("[[1,2],[2,4]]");
    assert_eq!(
        unsafe { mdcrt_hnf(singular, &mut h, &mut u) },
        MdcrtStatus::Singular
    );
    unsafe {
        for p in [m, h, u, l, su, sv, singular] {
            mdcrt_matrix_free(p);
        }
    }
}

#[test]
fn gcld_lcrm_coprime() {
    let a = parse("[[4,0],[0,4]]");
    let b = parse("[[6,0],[0,6]]");
    let (mut g, mut l) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { mdcrt_gcld(a, b, &mut g) }, MdcrtStatus::Ok);
    assert_eq!(unsafe { mdcrt_lcrm(a, b, &mut l) }, MdcrtStatus::Ok);
    assert_eq!(show(g), "[[2,0],[0,2]]");
    assert_eq!(show(l), "[[12,0],[0,12]]");
    let mut cop = true;
    assert_eq!(unsafe { mdcrt_is_coprime(a, b, &mut cop) }, MdcrtStatus::Ok);
    assert!(!cop);
    unsafe {
        for p in [a, b, g, l] {
            mdcrt_matrix_free(p);
        }
    }
}

#[test]
fn shortest_vector() {
    let m = parse("[[1,0],[971,3257]]");
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_shortest_vector_sq(m, &mut s) },
        MdcrtStatus::Ok
    );
    assert_eq!(take(s), "3730");
    unsafe { mdcrt_matrix_free(m) };
}

#[test]
fn crt_and_robust() {
    let ms = [parse("[[3,0],[0,3]]"), parse("[[5,0],[0,5]]")];
    let rs = [
        CString::new("[2,1]").unwrap(),
        CString::new("[3,1]").unwrap(),
    ];
    let mp: Vec<*const MdcrtMatrix> = ms.iter().map(|&m| m as *const _).collect();
    let rp: Vec<*const c_char> = rs.iter().map(|r| r.as_ptr()).collect();
    let (mut v, mut l) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(
        unsafe { mdcrt_crt_solve(mp.as_ptr(), rp.as_ptr(), 2, &mut v, &mut l) },
        MdcrtStatus::Ok
    );
    assert_eq!(take(v), "[8,1]");
    assert_eq!(show(l), "[[15,0],[0,15]]");
    unsafe { mdcrt_matrix_free(l) };

    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { mdcrt_robust_reconstruct(mp.as_ptr(), rp.as_ptr(), 2, &mut e) },
        MdcrtStatus::Ok
    );
    take(e);

    let bad = [
        CString::new("[1,0]").unwrap(),
        CString::new("[0,0]").unwrap(),
    ];
    let same = [parse("[[2,0],[0,2]]"), parse("[[4,0],[0,4]]")];
    let sp: Vec<*const MdcrtMatrix> = same.iter().map(|&m| m as *const _).collect();
    let bp: Vec<*const c_char> = bad.iter().map(|r| r.as_ptr()).collect();
    assert_eq!(
        unsafe { mdcrt_crt_solve(sp.as_ptr(), bp.as_ptr(), 2, &mut v, &mut l) },
        MdcrtStatus::Inconsistent
    );
    assert_eq!(
        unsafe { mdcrt_crt_solve(sp.as_ptr(), bp.as_ptr(), 0, &mut v, &mut l) },
        MdcrtStatus::InvalidArgument
    );
    unsafe {
        for p in ms.into_iter().chain(same) {
            mdcrt_matrix_free(p);
        }
    }
}

#[test]
fn svp_search() {
    let (mut d, mut i) = (0, 0);
    assert_eq!(
        unsafe { mdcrt_search_max_svp(3257, &mut d, &mut i) },
        MdcrtStatus::Ok
    );
    assert_eq!(d, 3730);
    assert_eq!(
        unsafe { mdcrt_search_max_svp(9, &mut d, &mut i) },
        MdcrtStatus::NotPrime
    );
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/mdcrt.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "mdcrt_matrix_parse",
        "mdcrt_crt_solve",
        "MDCRT_STATUS_INCONSISTENT",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler, skipping syntax check");
        return;
    };
    assert!(status.success());
}
