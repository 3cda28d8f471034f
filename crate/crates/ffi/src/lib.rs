//! C ABI over the `nullcode` library.
//!
//! Objects are opaque handles created by `nc_*_new`-style functions and
//! released with the matching `nc_*_free`. Every fallible call returns an
//! [`NcStatus`]; on failure a message is available from
//! [`nc_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nullcode::codes::{paper_preset, CodeSpec};
use nullcode::gf::FieldCtx;
use nullcode::hashing::HashFamily;
use nullcode::instances::{Bias, OracleInstance};
use nullcode::qsim::{run_alg1, GoodSet};
use nullcode::{Budget, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BudgetExceeded = 3,
    LengthMismatch = 4,
    DomainMismatch = 5,
    EmptySupport = 6,
    Parse = 7,
    Io = 8,
    Panic = 9,
}

/// Finite field `GF(2^s)`.
pub struct NcField(FieldCtx);

/// Linear code folded over `Σ = F_q^m`.
pub struct NcCode(CodeSpec);

/// Biased oracle instance for a code.
pub struct NcInstance(OracleInstance);

/// Polynomial hash family.
pub struct NcHashFamily(HashFamily);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NcCodeInfo {
    /// Unfolded length `N`.
    pub len: usize,
    /// Folded length `n`.
    pub n: usize,
    pub m: usize,
    pub q: u64,
    pub dimension: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NcAlg1Summary {
    pub success_probability: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub l2_distance: f64,
    pub bound_holds: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> NcStatus {
    match e {
        Error::BudgetExceeded { .. } => NcStatus::BudgetExceeded,
        Error::LengthMismatch { .. } => NcStatus::LengthMismatch,
        Error::DomainMismatch { .. } => NcStatus::DomainMismatch,
        Error::EmptySupport(_) => NcStatus::EmptySupport,
        Error::Parse { .. } => NcStatus::Parse,
        Error::Io(_) => NcStatus::Io,
        _ => NcStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (NcStatus, String)>) -> NcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NcStatus::Panic
        }
    }
}

fn lib<T>(r: nullcode::Result<T>) -> Result<T, (NcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (NcStatus, String) {
    (NcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NcStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (NcStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const u32, len: usize, what: &str) -> Result<&'a [u32], (NcStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_handle<T>(value: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(value));
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out_field` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_field_new(s: u32, out_field: *mut *mut NcField) -> NcStatus {
    guard(|| {
        let dst = out(out_field, "out_field")?;
        into_handle(NcField(lib(FieldCtx::with_default_modulus(s))?), dst);
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from [`nc_field_new`].
#[no_mangle]
pub unsafe extern "C" fn nc_field_free(field: *mut NcField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_field_mul(field: *const NcField, a: u32, b: u32, out_value: *mut u32) -> NcStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let dst = out(out_value, "out_value")?;
        if !f.contains(a) || !f.contains(b) {
            let bad = if f.contains(a) { b } else { a };
            return lib(Err(Error::DomainMismatch { value: bad as u64, s: f.s() }));
        }
        *dst = f.mul(a, b);
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_field_inv(field: *const NcField, a: u32, out_value: *mut u32) -> NcStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let dst = out(out_value, "out_value")?;
        *dst = lib(f.inv(a))?;
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_field_trace(field: *const NcField, a: u32, out_value: *mut u32) -> NcStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let dst = out(out_value, "out_value")?;
        if !f.contains(a) {
            return lib(Err(Error::DomainMismatch { value: a as u64, s: f.s() }));
        }
        *dst = f.trace(a);
        Ok(())
    })
}

/// Preset folded Reed-Solomon code for parameter `t`.
///
/// # Safety
/// `out_code` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_code_preset(t: u32, out_code: *mut *mut NcCode) -> NcStatus {
    guard(|| {
        let dst = out(out_code, "out_code")?;
        into_handle(NcCode(lib(paper_preset(t))?), dst);
        Ok(())
    })
}

/// Self-dual `[8,4]` toy code folded into `Σ = F_2^2`.
///
/// # Safety
/// `out_code` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_code_toy(out_code: *mut *mut NcCode) -> NcStatus {
    guard(|| {
        let dst = out(out_code, "out_code")?;
        into_handle(NcCode(nullcode::toy::self_dual_8_4()), dst);
        Ok(())
    })
}

/// Code from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out_code` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_code_from_json(json: *const c_char, out_code: *mut *mut NcCode) -> NcStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let dst = out(out_code, "out_code")?;
        let text = CStr::from_ptr(json).to_str().map_err(|e| (NcStatus::InvalidArgument, e.to_string()))?;
        let spec: CodeSpec = lib(serde_json::from_str(text).map_err(Error::from))?;
        into_handle(NcCode(spec), dst);
        Ok(())
    })
}

/// JSON description of a code; release with [`nc_string_free`].
///
/// # Safety
/// `code` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_code_to_json(code: *const NcCode, out_json: *mut *mut c_char) -> NcStatus {
    guard(|| {
        let c = &deref(code, "code")?.0;
        let dst = out(out_json, "out_json")?;
        let s = lib(serde_json::to_string(c).map_err(Error::from))?;
        *dst = CString::new(s).map_err(|e| (NcStatus::InvalidArgument, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `code` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn nc_code_free(code: *mut NcCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// # Safety
/// `code` must be a live handle and `out_info` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_code_info(code: *const NcCode, out_info: *mut NcCodeInfo) -> NcStatus {
    guard(|| {
        let c = &deref(code, "code")?.0;
        let dst = out(out_info, "out_info")?;
        *dst = NcCodeInfo { len: c.len(), n: c.n(), m: c.m(), q: c.q(), dimension: c.dimension() };
        Ok(())
    })
}

/// Whether the unfolded word of length `len` is a codeword.
///
/// # Safety
/// `word` must point to `len` values, `code` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_code_contains(
    code: *const NcCode,
    word: *const u32,
    len: usize,
    out_result: *mut bool,
) -> NcStatus {
    guard(|| {
        let c = &deref(code, "code")?.0;
        let w = slice(word, len, "word")?;
        let dst = out(out_result, "out_result")?;
        *dst = c.contains(w);
        Ok(())
    })
}

/// Samples a `num/den`-biased instance.
///
/// # Safety
/// `code` must be a live handle and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_instance_sample(
    code: *const NcCode,
    num: u64,
    den: u64,
    seed: u64,
    out_instance: *mut *mut NcInstance,
) -> NcStatus {
    guard(|| {
        let c = &deref(code, "code")?.0;
        let dst = out(out_instance, "out_instance")?;
        let p = lib(Bias::new(num, den))?;
        into_handle(NcInstance(lib(OracleInstance::sample(c, p, seed, &Budget::default()))?), dst);
        Ok(())
    })
}

/// Instance whose tables are identically `value`.
///
/// # Safety
/// `code` must be a live handle and `out_instance` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_instance_constant(
    code: *const NcCode,
    value: bool,
    out_instance: *mut *mut NcInstance,
) -> NcStatus {
    guard(|| {
        let c = &deref(code, "code")?.0;
        let dst = out(out_instance, "out_instance")?;
        into_handle(NcInstance(lib(OracleInstance::constant(c, value))?), dst);
        Ok(())
    })
}

/// # Safety
/// `instance` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn nc_instance_free(instance: *mut NcInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Whether the word is a codeword on which every oracle bit is zero.
///
/// # Safety
/// `word` must point to `len` values, `instance` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_instance_verify(
    instance: *const NcInstance,
    word: *const u32,
    len: usize,
    out_result: *mut bool,
) -> NcStatus {
    guard(|| {
        let inst = &deref(instance, "instance")?.0;
        let w = slice(word, len, "word")?;
        let dst = out(out_result, "out_result")?;
        *dst = inst.verify(w);
        Ok(())
    })
}

/// # Safety
/// `instance` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_instance_count_solutions(instance: *const NcInstance, out_count: *mut u64) -> NcStatus {
    guard(|| {
        let inst = &deref(instance, "instance")?.0;
        let dst = out(out_count, "out_count")?;
        *dst = lib(inst.count_solutions(&Budget::default()))?;
        Ok(())
    })
}

/// Exact simulation of the quantum protocol on `instance`.
///
/// # Safety
/// `instance` must be a live handle and `out_summary` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_alg1_run(instance: *const NcInstance, out_summary: *mut NcAlg1Summary) -> NcStatus {
    guard(|| {
        let inst = &deref(instance, "instance")?.0;
        let dst = out(out_summary, "out_summary")?;
        let r = lib(run_alg1(inst, GoodSet::default(), &Budget::default()))?;
        *dst = NcAlg1Summary {
            success_probability: r.success_probability,
            epsilon: r.epsilon,
            delta: r.delta,
            l2_distance: r.l2_distance,
            bound_holds: r.bound_holds,
        };
        Ok(())
    })
}

/// # Safety
/// `out_family` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nc_hash_family_new(
    r: u32,
    lambda: usize,
    n: usize,
    sigma: u64,
    out_family: *mut *mut NcHashFamily,
) -> NcStatus {
    guard(|| {
        let dst = out(out_family, "out_family")?;
        into_handle(NcHashFamily(lib(HashFamily::new(r, lambda, n, sigma))?), dst);
        Ok(())
    })
}

/// # Safety
/// `family` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn nc_hash_family_free(family: *mut NcHashFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Output bits of `h_key(e, i)` for the symbol of rank `rank`.
///
/// # Safety
/// `key` must point to `key_len` coefficients.
#[no_mangle]
pub unsafe extern "C" fn nc_hash_eval(
    family: *const NcHashFamily,
    key: *const u32,
    key_len: usize,
    rank: u64,
    i: usize,
    out_value: *mut u32,
) -> NcStatus {
    guard(|| {
        let fam = &deref(family, "family")?.0;
        let k = slice(key, key_len, "key")?;
        let dst = out(out_value, "out_value")?;
        *dst = lib(fam.eval(k, rank, i))?;
        Ok(())
    })
}

/// `2^r · suc^t`.
#[no_mangle]
pub extern "C" fn nc_union_bound(r: u32, t: u64, suc: f64) -> f64 {
    nullcode::tbnc::union_bound(r, t, suc)
}
