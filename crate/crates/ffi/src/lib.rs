//! C ABI over the `mdcrt` library.
//!
//! Matrices cross the boundary as opaque [`MdcrtMatrix`] handles. Vectors and
//! big integers cross as NUL-terminated strings in the library's text format
//! (`[1,2]`, `[[1,0],[0,1]]`). Every function returns an [`MdcrtStatus`]; on
//! failure [`mdcrt_last_error`] describes the cause.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};
use mdcrt::crt::{crt_solve, gcld, is_coprime, lcrm, Congruence};
use mdcrt::lattice::{shortest_vector, LatticeBasis};
use mdcrt::linalg::{det, hnf, snf, IntMatrix, IntVector};
use mdcrt::robust::{build_instance, robust_reconstruct};
use mdcrt::svp_search::search_max_svp;
use mdcrt::Error;

/// Result code of every exported function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MdcrtStatus {
    Ok = 0,
    NullPointer = 1,
    Parse = 2,
    InvalidArgument = 3,
    Singular = 4,
    Inconsistent = 5,
    CapExceeded = 6,
    DimensionUnsupported = 7,
    NotPrime = 8,
    Panic = 9,
}

/// Opaque integer matrix.
pub struct MdcrtMatrix(IntMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MdcrtStatus {
    match e {
        Error::Parse { .. } => MdcrtStatus::Parse,
        Error::SingularMatrix | Error::RankDeficient => MdcrtStatus::Singular,
        Error::Inconsistent => MdcrtStatus::Inconsistent,
        Error::CapExceeded { .. } => MdcrtStatus::CapExceeded,
        Error::DimensionUnsupported(_) => MdcrtStatus::DimensionUnsupported,
        Error::NotPrime(_) => MdcrtStatus::NotPrime,
        _ => MdcrtStatus::InvalidArgument,
    }
}

struct Fail(MdcrtStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MdcrtStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MdcrtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MdcrtStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            MdcrtStatus::Panic
        }
    }
}

unsafe fn matrix_ref<'a>(m: *const MdcrtMatrix, what: &str) -> Result<&'a IntMatrix, Fail> {
    m.as_ref().map(|m| &m.0).ok_or_else(|| null(what))
}

unsafe fn square_ref<'a>(m: *const MdcrtMatrix, what: &str) -> Result<&'a IntMatrix, Fail> {
    let m = matrix_ref(m, what)?;
    if !m.is_square() || m.rows() == 0 {
        return Err(Fail(
            MdcrtStatus::InvalidArgument,
            format!("{what} is not square"),
        ));
    }
    Ok(m)
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(MdcrtStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn put_matrix(out: *mut *mut MdcrtMatrix, m: IntMatrix) {
    *out = Box::into_raw(Box::new(MdcrtMatrix(m)));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) {
    *out = CString::new(s)
        .expect("formatted output has no NUL")
        .into_raw();
}

macro_rules! check_out {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return Err(null(stringify!($p)));
        })+
    };
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn mdcrt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by the library.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `[[a,b],[c,d]]` into a new matrix handle.
///
/// # Safety
/// `text` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_matrix_parse(
    text: *const c_char,
    out: *mut *mut MdcrtMatrix,
) -> MdcrtStatus {
    guard(|| {
        check_out!(out);
        let m = IntMatrix::parse(read_str(text, "text")?)?;
        put_matrix(out, m);
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_matrix_free(m: *mut MdcrtMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a valid handle and `out` a valid pointer. Free the result with
/// [`mdcrt_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mdcrt_matrix_to_string(
    m: *const MdcrtMatrix,
    out: *mut *mut c_char,
) -> MdcrtStatus {
    guard(|| {
        check_out!(out);
        put_string(out, matrix_ref(m, "m")?.to_string());
        Ok(())
    })
}

/// # Safety
/// `m` must be a valid handle; `rows` and `cols` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_matrix_shape(
    m: *const MdcrtMatrix,
    rows: *mut size_t,
    cols: *mut size_t,
) -> MdcrtStatus {
    guard(|| {
        check_out!(rows, cols);
        let m = matrix_ref(m, "m")?;
        *rows = m.rows();
        *cols = m.cols();
        Ok(())
    })
}

/// Determinant as a decimal string.
///
/// # Safety
/// `m` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_matrix_det(
    m: *const MdcrtMatrix,
    out: *mut *mut c_char,
) -> MdcrtStatus {
    guard(|| {
        check_out!(out);
        put_string(out, det(square_ref(m, "m")?).to_string());
        Ok(())
    })
}

/// Hermite normal form `m = h u`.
///
/// # Safety
/// `m` must be a valid handle; `h` and `u` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_hnf(
    m: *const MdcrtMatrix,
    h: *mut *mut MdcrtMatrix,
    u: *mut *mut MdcrtMatrix,
) -> MdcrtStatus {
    guard(|| {
        check_out!(h, u);
        let d = hnf(square_ref(m, "m")?)?;
        put_matrix(h, d.h);
        put_matrix(u, d.u);
        Ok(())
    })
}

/// Smith normal form `u m v = lambda`.
///
/// # Safety
/// `m` must be a valid handle; `lambda`, `u` and `v` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_snf(
    m: *const MdcrtMatrix,
    lambda: *mut *mut MdcrtMatrix,
    u: *mut *mut MdcrtMatrix,
    v: *mut *mut MdcrtMatrix,
) -> MdcrtStatus {
    guard(|| {
        check_out!(lambda, u, v);
        let d = snf(matrix_ref(m, "m")?);
        put_matrix(lambda, d.lambda);
        put_matrix(u, d.u);
        put_matrix(v, d.v);
        Ok(())
    })
}

/// # Safety
/// `a` and `b` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_gcld(
    a: *const MdcrtMatrix,
    b: *const MdcrtMatrix,
    out: *mut *mut MdcrtMatrix,
) -> MdcrtStatus {
    guard(|| {
        check_out!(out);
        let g = gcld(square_ref(a, "a")?, square_ref(b, "b")?)?;
        put_matrix(out, g);
        Ok(())
    })
}

/// # Safety
/// `a` and `b` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_lcrm(
    a: *const MdcrtMatrix,
    b: *const MdcrtMatrix,
    out: *mut *mut MdcrtMatrix,
) -> MdcrtStatus {
    guard(|| {
        check_out!(out);
        let l = lcrm(square_ref(a, "a")?, square_ref(b, "b")?)?;
        put_matrix(out, l);
        Ok(())
    })
}

/// # Safety
/// `a` and `b` must be valid handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_is_coprime(
    a: *const MdcrtMatrix,
    b: *const MdcrtMatrix,
    out: *mut bool,
) -> MdcrtStatus {
    guard(|| {
        check_out!(out);
        *out = is_coprime(square_ref(a, "a")?, square_ref(b, "b")?)?;
        Ok(())
    })
}

/// Squared length of a shortest nonzero vector of the column lattice of `m`.
///
/// # Safety
/// `m` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_shortest_vector_sq(
    m: *const MdcrtMatrix,
    out: *mut *mut c_char,
) -> MdcrtStatus {
    guard(|| {
        check_out!(out);
        let (len, _) = shortest_vector(&LatticeBasis::new(square_ref(m, "m")?.clone())?)?;
        put_string(out, len.to_string());
        Ok(())
    })
}

unsafe fn read_system(
    moduli: *const *const MdcrtMatrix,
    remainders: *const *const c_char,
    count: size_t,
) -> Result<(Vec<IntMatrix>, Vec<IntVector>), Fail> {
    if count == 0 {
        return Err(Fail(MdcrtStatus::InvalidArgument, "count is zero".into()));
    }
    if moduli.is_null() {
        return Err(null("moduli"));
    }
    if remainders.is_null() {
        return Err(null("remainders"));
    }
    let mut ms = Vec::with_capacity(count);
    let mut rs = Vec::with_capacity(count);
    for i in 0..count {
        ms.push(square_ref(*moduli.add(i), "modulus")?.clone());
        rs.push(IntVector::parse(read_str(
            *remainders.add(i),
            "remainder",
        )?)?);
    }
    Ok((ms, rs))
}

/// Solves `f = r_i mod M_i`. Writes the solution in `N(lcrm)` and the lcrm.
///
/// # Safety
/// `moduli` and `remainders` must point to `count` valid handles and C
/// strings; `value` and `lcrm_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_crt_solve(
    moduli: *const *const MdcrtMatrix,
    remainders: *const *const c_char,
    count: size_t,
    value: *mut *mut c_char,
    lcrm_out: *mut *mut MdcrtMatrix,
) -> MdcrtStatus {
    guard(|| {
        check_out!(value, lcrm_out);
        let (ms, rs) = read_system(moduli, remainders, count)?;
        let cs = ms
            .into_iter()
            .zip(rs)
            .map(|(m, r)| Congruence::new(m, r))
            .collect::<mdcrt::Result<Vec<_>>>()?;
        let sol = crt_solve(&cs)?;
        put_string(value, sol.value.to_string());
        put_matrix(lcrm_out, sol.lcrm);
        Ok(())
    })
}

/// Robust reconstruction from noisy remainders. `estimate` receives a
/// rational vector such as `[7/2,-3]`.
///
/// # Safety
/// As for [`mdcrt_crt_solve`]; `estimate` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_robust_reconstruct(
    moduli: *const *const MdcrtMatrix,
    remainders: *const *const c_char,
    count: size_t,
    estimate: *mut *mut c_char,
) -> MdcrtStatus {
    guard(|| {
        check_out!(estimate);
        let (ms, rs) = read_system(moduli, remainders, count)?;
        let out = robust_reconstruct(&build_instance(&ms)?, &rs)?;
        put_string(estimate, out.estimate.to_string());
        Ok(())
    })
}

/// Maximum squared shortest-vector length over `[[1,0],[i,p]]` and its
/// smallest achieving index.
///
/// # Safety
/// `d` and `first_achiever` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mdcrt_search_max_svp(
    p: u64,
    d: *mut u64,
    first_achiever: *mut u64,
) -> MdcrtStatus {
    guard(|| {
        check_out!(d, first_achiever);
        let r = search_max_svp(p)?;
        *d = r.d;
        *first_achiever = r.achievers.iter().next().copied().unwrap_or(0);
        Ok(())
    })
}
