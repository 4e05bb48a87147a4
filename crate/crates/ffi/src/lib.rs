//! C ABI over `psc-core`: opaque handles, integer status codes, and
//! JSON/text results returned as heap strings owned by the caller.
//!
//! Every function returns a [`PscStatus`]. On failure the message is kept
//! per thread and read with [`psc_last_error`]. Strings handed out must be
//! released with [`psc_string_free`]; handles with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use psc_core::grouphom::{self, Chain, GroupSpec, Ring};
use psc_core::positivity::{self, Outcome};
use psc_core::text::parse_chain;
use psc_core::Error;

/// Status codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PscStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    OddPrimeRequired = 3,
    InvalidInput = 4,
    ParseError = 5,
    NotACycle = 6,
    PreconditionFailed = 7,
    DegreeCap = 8,
    Internal = 9,
}

/// Finite abelian p-group `Z/p^a_1 x ... x Z/p^a_n`.
pub struct PscGroup {
    spec: GroupSpec,
}

/// Chain over a group with integral or `Z/p^l` coefficients.
pub struct PscChain {
    chain: Chain,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PscStatus {
    match e {
        Error::OddPrimeRequired => PscStatus::OddPrimeRequired,
        Error::Parse(_) => PscStatus::ParseError,
        Error::NotACycle => PscStatus::NotACycle,
        Error::DegreeCap { .. } => PscStatus::DegreeCap,
        Error::Precondition(_) | Error::Unsupported(_) | Error::Composition => PscStatus::PreconditionFailed,
        Error::InvalidSpec(_) | Error::Dimension(_) | Error::RingMismatch(_) => PscStatus::InvalidInput,
    }
}

enum Fail {
    Status(PscStatus, String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> PscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PscStatus::Ok,
        Ok(Err(Fail::Status(s, m))) => {
            set_error(&m);
            s
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            PscStatus::Internal
        }
    }
}

fn null() -> Fail {
    Fail::Status(PscStatus::NullArgument, "null argument".into())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail::Status(PscStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail::Status(PscStatus::Internal, "interior nul".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn ring_of(exponent: u32) -> Ring {
    if exponent == 0 {
        Ring::Integers
    } else {
        Ring::ModPrimePower(exponent)
    }
}

/// Message of the last failure on this thread; valid until the next call.
#[no_mangle]
pub extern "C" fn psc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn psc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn psc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Create a group from an odd prime and `n` ascending exponents.
///
/// # Safety
/// `alphas` must point to `n` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn psc_group_new(p: u64, alphas: *const u32, n: usize, out: *mut *mut PscGroup) -> PscStatus {
    guard(|| {
        if out.is_null() || (alphas.is_null() && n > 0) {
            return Err(null());
        }
        let a = if n == 0 { Vec::new() } else { std::slice::from_raw_parts(alphas, n).to_vec() };
        let spec = GroupSpec::new(p, a)?;
        *out = Box::into_raw(Box::new(PscGroup { spec }));
        Ok(())
    })
}

/// # Safety
/// `g` must come from [`psc_group_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn psc_group_free(g: *mut PscGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Parse a chain such as `"T(c1,c5)"`; `ring_exponent` 0 means integers.
///
/// # Safety
/// `g` must be a live group, `text` a nul-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_chain_parse(
    g: *const PscGroup,
    ring_exponent: u32,
    text: *const c_char,
    out: *mut *mut PscChain,
) -> PscStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            return Err(null());
        }
        let t = read_str(text)?;
        let chain = parse_chain(&(*g).spec, ring_of(ring_exponent), t)?;
        grouphom::check_degree(chain.degree)?;
        *out = Box::into_raw(Box::new(PscChain { chain }));
        Ok(())
    })
}

/// # Safety
/// `c` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn psc_chain_free(c: *mut PscChain) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Canonical text of a chain.
///
/// # Safety
/// `c` must be a live chain and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_chain_to_string(c: *const PscChain, out: *mut *mut c_char) -> PscStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return Err(null());
        }
        out_string(out, (*c).chain.to_string())
    })
}

/// Degree of a chain.
///
/// # Safety
/// `c` must be a live chain and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_chain_degree(c: *const PscChain, out: *mut u32) -> PscStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return Err(null());
        }
        *out = (*c).chain.degree;
        Ok(())
    })
}

/// Homology in degree `d` as JSON: invariant factors (0 for `Z`) and
/// representatives in canonical text.
///
/// # Safety
/// `g` must be a live group and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_homology_json(
    g: *const PscGroup,
    d: u32,
    ring_exponent: u32,
    out: *mut *mut c_char,
) -> PscStatus {
    guard(|| {
        if g.is_null() || out.is_null() {
            return Err(null());
        }
        grouphom::check_degree(d)?;
        let h = grouphom::homology(&(*g).spec, d, ring_of(ring_exponent))?;
        let doc = serde_json::json!({
            "schema": 1,
            "degree": d,
            "invariant_factors": h.invariant_factors.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
            "representatives": h.representatives.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        });
        out_string(out, doc.to_string())
    })
}

/// Bockstein of a chain read mod `p^ell`; the result is a new chain mod `p`.
///
/// # Safety
/// `c` must be a live chain and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_bockstein(c: *const PscChain, ell: u32, out: *mut *mut PscChain) -> PscStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return Err(null());
        }
        let chain = psc_core::chainops::bockstein_chain(&(*c).chain, ell)?;
        *out = Box::into_raw(Box::new(PscChain { chain }));
        Ok(())
    })
}

/// Derivation of order `kappa` on a chain read mod `p^ell`.
///
/// # Safety
/// `c` must be a live chain and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_milnor(c: *const PscChain, kappa: u32, ell: u32, out: *mut *mut PscChain) -> PscStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return Err(null());
        }
        let chain = psc_core::chainops::milnor_chain(&(*c).chain, kappa, ell)?;
        *out = Box::into_raw(Box::new(PscChain { chain }));
        Ok(())
    })
}

/// Torality of an integral cycle: writes 1 if toral, 0 if atoral.
///
/// # Safety
/// `c` must be a live chain and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_is_p_toral(c: *const PscChain, out: *mut i32) -> PscStatus {
    guard(|| {
        if c.is_null() || out.is_null() {
            return Err(null());
        }
        let ch = &(*c).chain;
        *out = positivity::is_p_toral(&ch.spec, ch)?.toral as i32;
        Ok(())
    })
}

/// Certify an integral cycle. Writes 1 to `certified` and the certificate
/// JSON to `out`, or 0 and the failure reason JSON.
///
/// # Safety
/// `c` must be a live chain; `certified` and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_certify(
    c: *const PscChain,
    assume_bordism: i32,
    certified: *mut i32,
    out: *mut *mut c_char,
) -> PscStatus {
    guard(|| {
        if c.is_null() || certified.is_null() || out.is_null() {
            return Err(null());
        }
        let ch = &(*c).chain;
        let json = match positivity::certify_atoral_bordism(&ch.spec, ch, assume_bordism != 0)? {
            Outcome::Certified(cert) => {
                if !positivity::verify_certificate(&cert) {
                    return Err(Fail::Status(PscStatus::Internal, "certificate failed verification".into()));
                }
                *certified = 1;
                serde_json::to_string(&cert)
            }
            Outcome::Failed(f) => {
                *certified = 0;
                serde_json::to_string(&f)
            }
        };
        out_string(out, json.map_err(|e| Fail::Status(PscStatus::Internal, e.to_string()))?)
    })
}

/// Verify a certificate given as JSON: writes 1 if every node checks.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn psc_verify_certificate(json: *const c_char, out: *mut i32) -> PscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let t = read_str(json)?;
        let cert: positivity::Certificate =
            serde_json::from_str(t).map_err(|e| Fail::Status(PscStatus::ParseError, format!("certificate: {e}")))?;
        *out = positivity::verify_certificate(&cert) as i32;
        Ok(())
    })
}
