use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use coded_pir_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(s: *mut std::ffi::c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { pir_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(pir_last_error()) }.to_string_lossy().into_owned()
}

const ROBUST: &str = r#"{"variant":"robust","n_servers":6,"code_dim":2,"collusion_size":2,"n_files":2,"desired":[1],"robust":1,"seed":5}"#;
const BYZANTINE: &str =
    r#"{"variant":"byzantine","n_servers":8,"code_dim":2,"collusion_size":2,"n_files":2,"desired":[0],"byzantine":1}"#;

fn build(json: &str) -> *mut PirPlan {
    let mut plan = ptr::null_mut();
    assert_eq!(unsafe { pir_plan_build(c(json).as_ptr(), &mut plan) }, PirStatus::Ok);
    plan
}

#[test]
fn plan_lifecycle_and_queries() {
    let plan = build(ROBUST);
    let mut rows = 0;
    assert_eq!(unsafe { pir_plan_rows(plan, &mut rows) }, PirStatus::Ok);
    assert_eq!(rows, 100);

    let mut count = 0;
    assert_eq!(unsafe { pir_plan_query_count(plan, 5, &mut count) }, PirStatus::Ok);
    assert_eq!(count, 95);
    assert_eq!(unsafe { pir_plan_query_count(plan, 6, &mut count) }, PirStatus::OutOfRange);

    let mut buf = vec![0u64; 2 * rows];
    assert_eq!(unsafe { pir_plan_query_vector(plan, 0, 3, buf.as_mut_ptr(), buf.len()) }, PirStatus::Ok);
    assert!(buf.iter().any(|&v| v != 0));
    assert_eq!(unsafe { pir_plan_query_vector(plan, 0, 3, buf.as_mut_ptr(), 7) }, PirStatus::OutOfRange);
    assert!(last_error().contains("need 200"));

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { pir_plan_to_json(plan, &mut json) }, PirStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["l_rows"], 100);
    unsafe { pir_plan_free(plan) };
}

#[test]
fn rates_and_preconditions() {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pir_closed_form_rate(c(BYZANTINE).as_ptr(), &mut out) }, PirStatus::Ok);
    assert_eq!(take(out), "7/27");

    let bad =
        r#"{"variant":"robust","n_servers":4,"code_dim":2,"collusion_size":2,"n_files":2,"desired":[0],"robust":2}"#;
    assert_eq!(unsafe { pir_closed_form_rate(c(bad).as_ptr(), &mut out) }, PirStatus::PreconditionViolated);
    assert!(last_error().contains("C(N−S,K)"));

    let mut plan = ptr::null_mut();
    assert_eq!(unsafe { pir_plan_build(c("not json").as_ptr(), &mut plan) }, PirStatus::InvalidJson);
    assert!(plan.is_null());
    assert_eq!(unsafe { pir_plan_build(ptr::null(), &mut plan) }, PirStatus::NullPointer);
}

#[test]
fn simulate_and_audit() {
    let plan = build(ROBUST);
    let absent = [2usize];
    let mut out = ptr::null_mut();
    let status = unsafe { pir_plan_simulate(plan, 1, absent.as_ptr(), 1, ptr::null(), 0, 0, &mut out) };
    assert_eq!(status, PirStatus::Ok);
    let report: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(report["achieved"], "8/19");
    assert_eq!(report["match"], true);

    let two = [0usize, 1];
    let status = unsafe { pir_plan_simulate(plan, 1, two.as_ptr(), 2, ptr::null(), 0, 0, &mut out) };
    assert_eq!(status, PirStatus::DecodingFailure);
    unsafe { pir_string_free(out) };

    assert_eq!(unsafe { pir_plan_audit(plan, &mut out) }, PirStatus::Ok);
    let sweep: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(sweep["audits"].as_array().unwrap().len(), 15);
    unsafe { pir_plan_free(plan) };

    let byz = build(BYZANTINE);
    let bad = [4usize];
    let status = unsafe { pir_plan_simulate(byz, 2, ptr::null(), 0, bad.as_ptr(), 1, 9, &mut out) };
    assert_eq!(status, PirStatus::Ok);
    unsafe { pir_string_free(out) };
    unsafe { pir_plan_free(byz) };
}

#[test]
fn null_handles_are_rejected() {
    let mut rows = 0;
    assert_eq!(unsafe { pir_plan_rows(ptr::null(), &mut rows) }, PirStatus::NullPointer);
    unsafe { pir_plan_free(ptr::null_mut()) };
    unsafe { pir_string_free(ptr::null_mut()) };
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/coded_pir.h")).unwrap();
    for name in [
        "pir_last_error",
        "pir_string_free",
        "pir_plan_build",
        "pir_plan_free",
        "pir_plan_to_json",
        "pir_plan_rows",
        "pir_plan_query_count",
        "pir_plan_query_vector",
        "pir_closed_form_rate",
        "pir_plan_audit",
        "pir_plan_simulate",
        "typedef struct PirPlan PirPlan",
        "PIR_STATUS_DECODING_FAILURE = 6",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = [deps.join("libcoded_pir_ffi.a"), deps.parent().unwrap().join("libcoded_pir_ffi.a")]
        .into_iter()
        .find(|p| p.exists())
        .expect("static library next to the test binary");
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
