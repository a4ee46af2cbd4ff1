//! C ABI bindings.
//!
//! Every entry point returns a [`PirStatus`]; on anything other than
//! `PIR_STATUS_OK` the message is available from [`pir_last_error`] on the
//! same thread. Strings handed out by the library are freed with
//! [`pir_string_free`], plans with [`pir_plan_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coded_pir::{
    achieved_rate, build_plan, closed_form_rate, full_privacy_sweep, reconstruct, run_session, Adversary, Database,
    PlanError, QueryPlan, QueryRef, RateReport, SchemeParams, Seed, StorageCode,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PirStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    PreconditionViolated = 4,
    OutOfRange = 5,
    DecodingFailure = 6,
    AuditFailed = 7,
    Internal = 8,
}

/// Opaque handle to a built query plan.
pub struct PirPlan {
    plan: QueryPlan,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PirStatus, String);

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        Failure(PirStatus::PreconditionViolated, e.to_string())
    }
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PirStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PirStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PirStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(PirStatus::NullPointer, "null string argument".into()));
    }
    // SAFETY: caller passes a NUL-terminated string.
    CStr::from_ptr(s).to_str().map_err(|e| Failure(PirStatus::InvalidUtf8, e.to_string()))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(PirStatus::NullPointer, "null output pointer".into()));
    }
    // SAFETY: non-null and caller-owned.
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(PirStatus::Internal, e.to_string()))?;
    write_out(out, c.into_raw())
}

unsafe fn plan_ref<'a>(plan: *const PirPlan) -> Result<&'a QueryPlan, Failure> {
    // SAFETY: caller passes a live handle from `pir_plan_build`.
    plan.as_ref().map(|p| &p.plan).ok_or_else(|| Failure(PirStatus::NullPointer, "null plan".into()))
}

unsafe fn index_list<'a>(ptr: *const usize, len: usize) -> Result<&'a [usize], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure(PirStatus::NullPointer, "null index list".into()));
    }
    // SAFETY: caller guarantees `len` readable elements.
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn parse_params(json: &str) -> Result<SchemeParams, Failure> {
    serde_json::from_str(json).map_err(|e| Failure(PirStatus::InvalidJson, e.to_string()))
}

/// Message for the last failing call on this thread, or NULL. Valid until
/// the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn pir_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pir_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw.
        drop(CString::from_raw(s));
    }
}

/// Builds a plan from scheme parameters in JSON.
///
/// # Safety
/// `params_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_build(params_json: *const c_char, out: *mut *mut PirPlan) -> PirStatus {
    guard(|| {
        let params = parse_params(read_str(params_json)?)?;
        let plan = build_plan(&params)?;
        write_out(out, Box::into_raw(Box::new(PirPlan { plan })))
    })
}

/// # Safety
/// `plan` must be NULL or a handle from [`pir_plan_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_free(plan: *mut PirPlan) {
    if !plan.is_null() {
        // SAFETY: produced by Box::into_raw.
        drop(Box::from_raw(plan));
    }
}

/// # Safety
/// `plan` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_to_json(plan: *const PirPlan, out: *mut *mut c_char) -> PirStatus {
    guard(|| write_string(out, plan_ref(plan)?.to_json()))
}

/// Rows per file (L).
///
/// # Safety
/// `plan` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_rows(plan: *const PirPlan, out: *mut usize) -> PirStatus {
    guard(|| write_out(out, plan_ref(plan)?.l_rows))
}

/// Number of queries sent to `server`.
///
/// # Safety
/// `plan` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_query_count(plan: *const PirPlan, server: usize, out: *mut usize) -> PirStatus {
    guard(|| {
        let plan = plan_ref(plan)?;
        let list = plan
            .queries
            .get(server)
            .ok_or_else(|| Failure(PirStatus::OutOfRange, format!("server {server} out of range")))?;
        write_out(out, list.len())
    })
}

/// Writes query `index` of `server` as an M·L coefficient vector into
/// `buf`, which must hold exactly `len` = M·L elements.
///
/// # Safety
/// `plan` must be live; `buf` must have `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_query_vector(
    plan: *const PirPlan,
    server: usize,
    index: usize,
    buf: *mut u64,
    len: usize,
) -> PirStatus {
    guard(|| {
        let plan = plan_ref(plan)?;
        let q: QueryRef =
            *plan.queries.get(server).and_then(|l| l.get(index)).ok_or_else(|| {
                Failure(PirStatus::OutOfRange, format!("query {index} of server {server} out of range"))
            })?;
        let want = plan.n_files() * plan.l_rows;
        if len != want {
            return Err(Failure(PirStatus::OutOfRange, format!("buffer holds {len} elements, need {want}")));
        }
        if buf.is_null() {
            return Err(Failure(PirStatus::NullPointer, "null buffer".into()));
        }
        // SAFETY: `len` writable elements per the contract.
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&plan.query_vector(q));
        Ok(())
    })
}

/// Closed-form rate as `"num/den"`.
///
/// # Safety
/// `params_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pir_closed_form_rate(params_json: *const c_char, out: *mut *mut c_char) -> PirStatus {
    guard(|| {
        let params = parse_params(read_str(params_json)?)?;
        write_string(out, closed_form_rate(&params)?.to_string())
    })
}

/// Runs the privacy sweep; writes its JSON and returns
/// `PIR_STATUS_AUDIT_FAILED` when some set fails.
///
/// # Safety
/// `plan` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_audit(plan: *const PirPlan, out: *mut *mut c_char) -> PirStatus {
    guard(|| {
        let sweep = full_privacy_sweep(plan_ref(plan)?);
        let json = serde_json::to_string(&sweep).map_err(|e| Failure(PirStatus::Internal, e.to_string()))?;
        write_string(out, json)?;
        if sweep.pass {
            Ok(())
        } else {
            Err(Failure(PirStatus::AuditFailed, "privacy audit failed".into()))
        }
    })
}

/// Runs one session against a random database and decodes it. Writes a
/// rate report JSON; returns `PIR_STATUS_DECODING_FAILURE` when the desired
/// files are not recovered exactly.
///
/// # Safety
/// `plan` must be live; `absent`/`corrupt` must hold `n_absent`/`n_corrupt`
/// readable elements (either may be NULL when its length is 0); `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn pir_plan_simulate(
    plan: *const PirPlan,
    db_seed: u64,
    absent: *const usize,
    n_absent: usize,
    corrupt: *const usize,
    n_corrupt: usize,
    corruption_seed: u64,
    out: *mut *mut c_char,
) -> PirStatus {
    guard(|| {
        let plan = plan_ref(plan)?;
        let params = &plan.params;
        let mut adversary =
            Adversary::corrupting(index_list(corrupt, n_corrupt)?.iter().copied(), Seed(corruption_seed));
        adversary.robust = index_list(absent, n_absent)?.iter().copied().collect();
        let f = plan.field();
        let code = StorageCode::reed_solomon(&f, params.n_servers, params.code_dim)
            .map_err(|e| Failure(PirStatus::PreconditionViolated, e.to_string()))?;
        let db = Database::random(&f, params.n_files, plan.l_rows, params.code_dim, Seed(db_seed));
        let transcript =
            run_session(plan, &db, &code, &adversary).map_err(|e| Failure(PirStatus::OutOfRange, e.to_string()))?;
        let report = RateReport::new(achieved_rate(plan, &transcript), closed_form_rate(params)?);
        let json = serde_json::to_string(&report).map_err(|e| Failure(PirStatus::Internal, e.to_string()))?;
        write_string(out, json)?;
        let files =
            reconstruct(plan, &transcript, &code).map_err(|e| Failure(PirStatus::DecodingFailure, e.to_string()))?;
        if files.iter().all(|(&m, w)| *w == db.files[m]) {
            Ok(())
        } else {
            Err(Failure(PirStatus::DecodingFailure, "recovered data differs from the database".into()))
        }
    })
}
