//! C ABI over the certificate library.
//!
//! The interface follows the usual conventions for C bindings: opaque
//! handles, integer status codes, and a thread-local last-error message.
//! Certificates are built with [`expunge_certify`] or parsed from JSON,
//! inspected through accessor functions, replayed with
//! [`expunge_certificate_verify`], and released with
//! [`expunge_certificate_free`]. Strings returned through `char **`
//! out-parameters are owned by the caller and must be released with
//! [`expunge_string_free`].
//!
//! Every entry point catches panics at the boundary and reports them as
//! [`EXPUNGE_ERR_PANIC`]; nothing unwinds into the caller. Out-parameters
//! are written only on success. The hand-maintained header in
//! `include/expunge.h` mirrors this file; a repository test checks that
//! the two declare the same symbols.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use expunge::constructions::certify_driver;
use expunge::rules::{replay_tables, verify_certificate, Certificate};
use expunge::Error;

// ─────────────────────────────────────────────────────────────────────────
// Status codes
// ─────────────────────────────────────────────────────────────────────────

/// The call succeeded (for `expunge_certificate_verify`: the certificate
/// is valid).
pub const EXPUNGE_OK: i32 = 0;
/// Invalid input: parameters out of scope, malformed JSON, or data that
/// fails validation.
pub const EXPUNGE_ERR_INVALID_INPUT: i32 = 1;
/// The search ran to completion without finding a certificate.
pub const EXPUNGE_ERR_NOT_FOUND: i32 = 2;
/// The search stopped because its time budget ran out.
pub const EXPUNGE_ERR_BUDGET: i32 = 3;
/// The certificate replayed but failed verification.
pub const EXPUNGE_ERR_VERIFY: i32 = 4;
/// A required pointer argument was null.
pub const EXPUNGE_ERR_NULL: i32 = 5;
/// A string argument was not valid UTF-8.
pub const EXPUNGE_ERR_UTF8: i32 = 6;
/// An internal panic was caught at the boundary.
pub const EXPUNGE_ERR_PANIC: i32 = 7;

// ─────────────────────────────────────────────────────────────────────────
// Handles and error state
// ─────────────────────────────────────────────────────────────────────────

/// Opaque certificate handle. Allocated by this library; release with
/// [`expunge_certificate_free`].
#[allow(non_camel_case_types)]
pub struct expunge_certificate {
    inner: Certificate,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::default();
    });
}

fn error_status(err: &Error) -> i32 {
    match err {
        Error::NotFound(_) => EXPUNGE_ERR_NOT_FOUND,
        Error::BudgetExhausted { .. } => EXPUNGE_ERR_BUDGET,
        _ => EXPUNGE_ERR_INVALID_INPUT,
    }
}

/// Run a fallible body under a panic guard, mapping outcomes to status
/// codes and recording failure messages for `expunge_last_error`.
fn guarded<F>(body: F) -> i32
where
    F: FnOnce() -> std::result::Result<(), (i32, String)>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_last_error();
            EXPUNGE_OK
        }
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic caught at the C boundary");
            EXPUNGE_ERR_PANIC
        }
    }
}

fn fail_on(err: Error) -> (i32, String) {
    (error_status(&err), err.to_string())
}

fn null_arg(name: &str) -> (i32, String) {
    (EXPUNGE_ERR_NULL, format!("{name} must not be null"))
}

// ─────────────────────────────────────────────────────────────────────────
// Library information
// ─────────────────────────────────────────────────────────────────────────

/// Library version as a static NUL-terminated string; never freed by the
/// caller.
#[no_mangle]
pub extern "C" fn expunge_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread, or an empty
/// string when the last call succeeded. The pointer stays valid until the
/// next call into the library from the same thread; never freed by the
/// caller.
#[no_mangle]
pub extern "C" fn expunge_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

// ─────────────────────────────────────────────────────────────────────────
// Certificate construction
// ─────────────────────────────────────────────────────────────────────────

/// Build a certificate for the case `(g, r, d, m)` using the construction
/// drivers, searching for at most `budget_seconds` where no closed form
/// applies. On success writes a new handle to `out`.
///
/// # Safety
/// `out`, when non-null, must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn expunge_certify(
    g: i64,
    r: i64,
    d: i64,
    m: i64,
    budget_seconds: f64,
    out: *mut *mut expunge_certificate,
) -> i32 {
    guarded(|| {
        if out.is_null() {
            return Err(null_arg("out"));
        }
        if !budget_seconds.is_finite() || budget_seconds <= 0.0 {
            return Err((
                EXPUNGE_ERR_INVALID_INPUT,
                format!("budget must be a positive number of seconds, got {budget_seconds}"),
            ));
        }
        let budget = Duration::from_secs_f64(budget_seconds);
        let (cert, _provenance) = certify_driver(g, r, d, m, budget, true).map_err(fail_on)?;
        let handle = Box::new(expunge_certificate { inner: cert });
        unsafe { out.write(Box::into_raw(handle)) };
        Ok(())
    })
}

/// Parse a certificate from a NUL-terminated JSON string. On success
/// writes a new handle to `out`.
///
/// # Safety
/// `json`, when non-null, must point to a NUL-terminated string; `out`,
/// when non-null, must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn expunge_certificate_from_json(
    json: *const c_char,
    out: *mut *mut expunge_certificate,
) -> i32 {
    guarded(|| {
        if json.is_null() {
            return Err(null_arg("json"));
        }
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|_| (EXPUNGE_ERR_UTF8, "json is not valid UTF-8".to_string()))?;
        let cert = Certificate::from_json(text).map_err(fail_on)?;
        let handle = Box::new(expunge_certificate { inner: cert });
        unsafe { out.write(Box::into_raw(handle)) };
        Ok(())
    })
}

/// Serialize a certificate to JSON. On success writes a NUL-terminated
/// string to `out`; release it with `expunge_string_free`.
///
/// # Safety
/// `cert` must be a live handle from this library; `out`, when non-null,
/// must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn expunge_certificate_to_json(
    cert: *const expunge_certificate,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        if cert.is_null() {
            return Err(null_arg("cert"));
        }
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let json = unsafe { &(*cert).inner }.to_json().map_err(fail_on)?;
        let owned = CString::new(json)
            .map_err(|_| (EXPUNGE_ERR_INVALID_INPUT, "JSON contained a NUL byte".to_string()))?;
        unsafe { out.write(owned.into_raw()) };
        Ok(())
    })
}

// ─────────────────────────────────────────────────────────────────────────
// Certificate inspection
// ─────────────────────────────────────────────────────────────────────────

/// Number of rows the certificate eliminates (its `N`).
///
/// # Safety
/// `cert` must be a live handle from this library; `out`, when non-null,
/// must point to writable storage for one `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn expunge_certificate_n(
    cert: *const expunge_certificate,
    out: *mut u64,
) -> i32 {
    guarded(|| {
        if cert.is_null() {
            return Err(null_arg("cert"));
        }
        if out.is_null() {
            return Err(null_arg("out"));
        }
        let n = unsafe { &(*cert).inner }.n() as u64;
        unsafe { out.write(n) };
        Ok(())
    })
}

/// Case parameters of a certificate. Each out-pointer may be null to skip
/// that field.
///
/// # Safety
/// `cert` must be a live handle from this library; each non-null
/// out-pointer must point to writable storage for one `int64_t`.
#[no_mangle]
pub unsafe extern "C" fn expunge_certificate_case(
    cert: *const expunge_certificate,
    g: *mut i64,
    r: *mut i64,
    d: *mut i64,
    m: *mut i64,
) -> i32 {
    guarded(|| {
        if cert.is_null() {
            return Err(null_arg("cert"));
        }
        let case = unsafe { &(*cert).inner }.case;
        unsafe {
            if !g.is_null() {
                g.write(case.g);
            }
            if !r.is_null() {
                r.write(case.r);
            }
            if !d.is_null() {
                d.write(case.d);
            }
            if !m.is_null() {
                m.write(case.m);
            }
        }
        Ok(())
    })
}

/// Replay a certificate against freshly built tables: `EXPUNGE_OK` when
/// it verifies, `EXPUNGE_ERR_VERIFY` (with the failure in
/// `expunge_last_error`) when it does not. `strict_vi` requires Rule VI
/// pairs to appear in both compared columns.
///
/// # Safety
/// `cert` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn expunge_certificate_verify(
    cert: *const expunge_certificate,
    strict_vi: bool,
) -> i32 {
    guarded(|| {
        if cert.is_null() {
            return Err(null_arg("cert"));
        }
        let inner = unsafe { &(*cert).inner };
        let (ttable, mask) = replay_tables(inner).map_err(fail_on)?;
        let report = verify_certificate(&ttable, &mask, inner, strict_vi);
        if report.valid {
            Ok(())
        } else {
            Err((
                EXPUNGE_ERR_VERIFY,
                report
                    .failure
                    .unwrap_or_else(|| "unspecified verification failure".to_string()),
            ))
        }
    })
}

// ─────────────────────────────────────────────────────────────────────────
// Destructors
// ─────────────────────────────────────────────────────────────────────────

/// Release a certificate handle. Null is ignored; a handle must not be
/// used after it is freed.
///
/// # Safety
/// `cert`, when non-null, must be a handle returned by this library that
/// has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn expunge_certificate_free(cert: *mut expunge_certificate) {
    if !cert.is_null() {
        drop(unsafe { Box::from_raw(cert) });
    }
}

/// Release a string returned through a `char **` out-parameter. Null is
/// ignored.
///
/// # Safety
/// `s`, when non-null, must be a string returned by this library that has
/// not already been freed.
#[no_mangle]
pub unsafe extern "C" fn expunge_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ─────────────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn version_is_a_static_utf8_string() {
        let version = unsafe { CStr::from_ptr(expunge_version()) };
        assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }

    #[test]
    fn last_error_starts_empty_and_tracks_failures() {
        clear_last_error();
        let empty = unsafe { CStr::from_ptr(expunge_last_error()) };
        assert!(empty.to_bytes().is_empty());

        let status = unsafe { expunge_certify(4, 3, 6, 2, 5.0, ptr::null_mut()) };
        assert_eq!(status, EXPUNGE_ERR_NULL);
        let message = unsafe { CStr::from_ptr(expunge_last_error()) };
        assert!(message.to_str().unwrap().contains("null"));
    }

    #[test]
    fn error_statuses_follow_the_error_kind() {
        assert_eq!(
            error_status(&Error::NotFound("x".into())),
            EXPUNGE_ERR_NOT_FOUND
        );
        assert_eq!(
            error_status(&Error::BudgetExhausted { visited: 1 }),
            EXPUNGE_ERR_BUDGET
        );
        assert_eq!(
            error_status(&Error::OutOfScope("x".into())),
            EXPUNGE_ERR_INVALID_INPUT
        );
    }
}
