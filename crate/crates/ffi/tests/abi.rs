use std::ffi::{CStr, CString};
use std::ptr;

use fockfilter_ffi::*;

const TOL: f64 = 1e-12;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ff_last_error_message()) }.to_string_lossy().into_owned()
}

fn ideal_filter() -> *mut FfCircuit {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { ff_filter_circuit_new(0.75, false, 0.0, 0.0, &mut c) }, FfStatus::Ok);
    assert!(!c.is_null());
    c
}

#[test]
fn effective_operator_is_the_parity_filter() {
    let c = ideal_filter();
    let (mut re, mut im) = ([0.0; 16], [0.0; 16]);
    let status = unsafe { ff_circuit_effective_operator(c, re.as_mut_ptr(), im.as_mut_ptr()) };
    assert_eq!(status, FfStatus::Ok);
    for row in 0..4 {
        for col in 0..4 {
            let expected = if row == col && (row == 0 || row == 3) { 0.25 } else { 0.0 };
            assert!((re[4 * row + col] - expected).abs() < TOL, "{row},{col}");
            assert!(im[4 * row + col].abs() < TOL);
        }
    }
    unsafe { ff_circuit_free(c) };

    let mut open = ptr::null_mut();
    assert_eq!(unsafe { ff_filter_circuit_new(0.0, false, 0.0, 0.0, &mut open) }, FfStatus::Ok);
    unsafe { ff_circuit_effective_operator(open, re.as_mut_ptr(), im.as_mut_ptr()) };
    assert!((re[15] - 0.5).abs() < TOL);
    unsafe { ff_circuit_free(open) };
}

#[test]
fn run_basis_and_read_amplitudes() {
    let c = ideal_filter();
    let n = unsafe { ff_circuit_mode_count(c) };
    assert_eq!(n, 7);
    let hh = [1u8, 0, 1, 0, 0, 0, 0];
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { ff_circuit_run_basis(c, hh.as_ptr(), n, &mut e) }, FfStatus::Ok);
    assert!((unsafe { ff_ensemble_acceptance(e) } - 0.0625).abs() < TOL);
    assert_eq!(unsafe { ff_ensemble_branch_count(e) }, 1);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { ff_ensemble_amplitude(e, hh.as_ptr(), n, &mut re, &mut im) }, FfStatus::Ok);
    assert!((re - 0.25).abs() < TOL && im.abs() < TOL);
    assert_eq!(
        unsafe { ff_ensemble_amplitude(e, hh.as_ptr(), 3, &mut re, &mut im) },
        FfStatus::InvalidArgument
    );
    unsafe { ff_ensemble_free(e) };

    let hv = [1u8, 0, 0, 1, 0, 0, 0];
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { ff_circuit_run_basis(c, hv.as_ptr(), n, &mut e) }, FfStatus::Ok);
    assert!(unsafe { ff_ensemble_acceptance(e) }.abs() < TOL);
    unsafe { ff_ensemble_free(e) };

    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { ff_circuit_run_basis(c, hh.as_ptr(), 2, &mut e) },
        FfStatus::InvalidArgument
    );
    assert!(e.is_null());
    assert!(!last_error().is_empty());
    unsafe { ff_circuit_free(c) };
}

#[test]
fn json_round_trip() {
    let c = ideal_filter();
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { ff_circuit_to_json(c, &mut text) }, FfStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { ff_circuit_parse_json(text, &mut back) }, FfStatus::Ok);
    let mut again = ptr::null_mut();
    unsafe { ff_circuit_to_json(back, &mut again) };
    assert_eq!(unsafe { CStr::from_ptr(text) }, unsafe { CStr::from_ptr(again) });
    unsafe {
        ff_string_free(text);
        ff_string_free(again);
        ff_circuit_free(back);
        ff_circuit_free(c);
    }
}

#[test]
fn error_report_values() {
    let mut r = FfErrorReport::default();
    assert_eq!(unsafe { ff_error_analysis(0.88, 0.0, 1e4, 1e-9, &mut r) }, FfStatus::Ok);
    assert!((r.misread_2_as_1 - 0.2112).abs() < TOL);
    assert!((r.hv_error_rate - 0.046464).abs() < TOL);
    assert!((r.ideal_success_prob - 0.03125).abs() < TOL);
    assert!((r.lossy_acceptance - 0.0485936).abs() < 1e-7);
    assert_eq!(r.dark_counts_per_pulse, 1e-5);

    assert_eq!(
        unsafe { ff_error_analysis(1.5, 0.0, 0.0, 0.0, &mut r) },
        FfStatus::InvalidArgument
    );
}

#[test]
fn failure_codes() {
    assert_eq!(
        unsafe { ff_filter_circuit_new(0.5, false, 0.0, 0.0, ptr::null_mut()) },
        FfStatus::NullPointer
    );
    assert_eq!(last_error(), "out is null");

    let mut c = ptr::null_mut();
    assert_eq!(
        unsafe { ff_filter_circuit_new(0.5, true, 2.0, 0.0, &mut c) },
        FfStatus::InvalidArgument
    );
    assert!(c.is_null());

    let bad = CString::new("{\"modes\": 3}").unwrap();
    assert_eq!(unsafe { ff_circuit_parse_json(bad.as_ptr(), &mut c) }, FfStatus::Parse);
    assert!(c.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { ff_circuit_mode_count(ptr::null()) }, 0);
    assert!(unsafe { ff_ensemble_acceptance(ptr::null()) }.is_nan());
    unsafe {
        ff_circuit_free(ptr::null_mut());
        ff_ensemble_free(ptr::null_mut());
        ff_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fockfilter.h")).unwrap();
    for symbol in [
        "ff_last_error_message",
        "ff_filter_circuit_new",
        "ff_circuit_parse_json",
        "ff_circuit_to_json",
        "ff_circuit_mode_count",
        "ff_circuit_effective_operator",
        "ff_circuit_run_basis",
        "ff_ensemble_acceptance",
        "ff_ensemble_branch_count",
        "ff_ensemble_amplitude",
        "ff_error_analysis",
        "ff_circuit_free",
        "ff_ensemble_free",
        "ff_string_free",
        "typedef struct FfCircuit FfCircuit",
        "FF_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(symbol), "{symbol}");
    }
}
