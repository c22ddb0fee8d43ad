use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use entscale_ffi::*;

fn last_error() -> String {
    let p = es_last_error_message();
    assert!(!p.is_null());
    let msg = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { es_string_free(p) };
    msg
}

#[test]
fn bell_state_entropy_and_rank() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let re = [h, 0.0, 0.0, h];
    let im = [0.0; 4];
    let mut st = ptr::null_mut();
    unsafe {
        assert_eq!(es_state_new(2, re.as_ptr(), im.as_ptr(), 4, &mut st), EsStatus::Ok);
        let mut e = 0.0;
        assert_eq!(es_state_entropy(st, 0, &mut e), EsStatus::Ok);
        assert!((e - 1.0).abs() < 1e-12);
        let mut rank = 0;
        assert_eq!(es_state_schmidt_rank(st, 1, 1e-10, &mut rank), EsStatus::Ok);
        assert_eq!(rank, 2);
        es_state_free(st);
    }
}

#[test]
fn unnormalized_state_is_rejected_with_message() {
    let re = [1.0, 1.0];
    let im = [0.0, 0.0];
    let mut st = ptr::null_mut();
    let status = unsafe { es_state_new(1, re.as_ptr(), im.as_ptr(), 2, &mut st) };
    assert_eq!(status, EsStatus::InvalidState);
    assert!(st.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_are_reported() {
    let status = unsafe { es_shor_order(7, 15, ptr::null_mut()) };
    assert_eq!(status, EsStatus::NullPointer);
    assert!(last_error().contains("out_order"));
    let mut e = 0.0;
    assert_eq!(unsafe { es_state_entropy(ptr::null(), 0, &mut e) }, EsStatus::NullPointer);
}

#[test]
fn success_clears_the_last_error() {
    let mut r = 0;
    unsafe {
        assert_eq!(es_shor_order(6, 15, &mut r), EsStatus::InvalidArgument);
        assert_eq!(es_shor_order(7, 15, &mut r), EsStatus::Ok);
    }
    assert_eq!(r, 4);
    assert!(es_last_error_message().is_null());
}

#[test]
fn instance_round_trip_and_sweep() {
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(es_instance_generate(6, 3, 11, &mut inst), EsStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(es_instance_to_json(inst, &mut json), EsStatus::Ok);
        let text = CStr::from_ptr(json).to_owned();
        es_string_free(json);

        let mut copy = ptr::null_mut();
        assert_eq!(es_instance_from_json(text.as_ptr(), &mut copy), EsStatus::Ok);
        let mut n = 0;
        assert_eq!(es_instance_n_qubits(copy, &mut n), EsStatus::Ok);
        assert_eq!(n, 6);

        let mut prof = ptr::null_mut();
        assert_eq!(es_sweep(copy, 0.05, 0, 1, &mut prof), EsStatus::Ok);
        let mut len = 0;
        assert_eq!(es_profile_len(prof, &mut len), EsStatus::Ok);
        assert_eq!(len, 21);
        let mut rec = EsSweepRecord::default();
        assert_eq!(es_profile_record(prof, 20, &mut rec), EsStatus::Ok);
        assert_eq!(rec.s, 1.0);
        assert!(rec.e0.abs() < 1e-10 && rec.entropy.abs() < 1e-10);
        assert_eq!(es_profile_record(prof, 21, &mut rec), EsStatus::InvalidArgument);
        let (mut sg, mut se) = (0.0, 0.0);
        assert_eq!(es_profile_critical_points(prof, &mut sg, &mut se), EsStatus::Ok);
        assert!(sg > 0.0 && sg < 1.0 && se > 0.0 && se < 1.0);

        es_profile_free(prof);
        es_instance_free(copy);
        es_instance_free(inst);
    }
}

#[test]
fn bad_json_and_generation_cap() {
    let bad = CString::new("{\"n\": 3}").unwrap();
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(es_instance_from_json(bad.as_ptr(), &mut inst), EsStatus::InvalidArgument);
        assert_eq!(es_instance_generate(3, 3, 0, &mut inst), EsStatus::ResourceLimit);
    }
    assert!(inst.is_null());
}

#[test]
fn grover_and_shor_values() {
    let mut p = EsGroverPoint::default();
    unsafe {
        assert_eq!(es_grover_point(10, 0.5, &mut p), EsStatus::Ok);
        assert!((p.entropy - 0.913_469_162_044_746_8).abs() < 1e-12);
        assert_eq!(es_grover_point(9, 0.5, &mut p), EsStatus::InvalidArgument);

        let (mut e, mut rank) = (0.0, 0);
        assert_eq!(es_shor_target_entanglement(15, 7, &mut e, &mut rank), EsStatus::Ok);
        assert_eq!(rank, 4);
        assert!((e - 2.0).abs() < 1e-12);
    }
}

#[test]
fn freeing_null_is_a_no_op() {
    unsafe {
        es_state_free(ptr::null_mut());
        es_instance_free(ptr::null_mut());
        es_profile_free(ptr::null_mut());
        es_string_free(ptr::null_mut());
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/entscale.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["es_state_new", "es_sweep", "es_shor_order", "es_last_error_message", "ES_STATUS_PANIC"] {
        assert!(text.contains(sym), "{sym} missing from the header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .status()
    else {
        eprintln!("no C compiler found; syntax check skipped");
        return;
    };
    assert!(status.success());
}
