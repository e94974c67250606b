use std::ffi::{CStr, CString};
use std::ptr;

use jsr_ffi::*;

const PAIR: [f64; 8] = [1.0, -0.125, 0.0, 0.5, 0.5, 0.0, 1.0, 1.0];

fn last_error() -> String {
    let p = jsr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn compute_verify_and_json_round_trip() {
    unsafe {
        let mut fam = ptr::null_mut();
        assert_eq!(jsr_family_new(2, 2, PAIR.as_ptr(), &mut fam), JsrStatus::Ok);
        assert_eq!((jsr_family_dim(fam), jsr_family_count(fam)), (2, 2));

        let mut cert = ptr::null_mut();
        assert_eq!(jsr_compute(fam, ptr::null(), &mut cert), JsrStatus::Ok);
        assert!(jsr_certificate_terminated(cert));
        assert!((jsr_certificate_value(cert) - 1.0).abs() < 1e-10);
        assert!(jsr_certificate_vertex_count(cert) >= 1);

        let mut v = [0.0; 2];
        assert_eq!(jsr_certificate_vertex(cert, 0, v.as_mut_ptr(), 2), JsrStatus::Ok);
        assert!(v.iter().any(|x| *x != 0.0));
        assert_eq!(jsr_certificate_vertex(cert, 999, v.as_mut_ptr(), 2), JsrStatus::InvalidInput);
        assert!(last_error().contains("out of range"));

        let mut smp = ptr::null_mut();
        assert_eq!(jsr_certificate_smp(cert, &mut smp), JsrStatus::Ok);
        assert!(!CStr::from_ptr(smp).to_bytes().is_empty());
        jsr_string_free(smp);

        let mut passed = false;
        let mut residual = f64::NAN;
        assert_eq!(jsr_verify(cert, &mut passed, &mut residual), JsrStatus::Ok);
        assert!(passed && residual <= 1e-7);

        let mut json = ptr::null_mut();
        assert_eq!(jsr_certificate_to_json(cert, &mut json), JsrStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(jsr_certificate_from_json(json, &mut back), JsrStatus::Ok);
        assert_eq!(jsr_certificate_value(back), jsr_certificate_value(cert));
        jsr_string_free(json);

        jsr_certificate_free(back);
        jsr_certificate_free(cert);
        jsr_family_free(fam);
    }
}

#[test]
fn iteration_limit_reports_not_certified() {
    unsafe {
        let mut fam = ptr::null_mut();
        assert_eq!(jsr_family_new(2, 2, PAIR.as_ptr(), &mut fam), JsrStatus::Ok);
        let mut opts = jsr_options_default();
        opts.k_balance = 0;
        opts.k_max = 3;
        let mut cert = ptr::null_mut();
        let status = jsr_compute(fam, &opts, &mut cert);
        if status == JsrStatus::NotCertified {
            assert!(!cert.is_null());
            assert!(!jsr_certificate_terminated(cert));
            jsr_certificate_free(cert);
        } else {
            assert_eq!(status, JsrStatus::Ok);
            jsr_certificate_free(cert);
        }
        jsr_family_free(fam);
    }
}

#[test]
fn parse_errors_and_null_arguments() {
    unsafe {
        let bad = CString::new("dim = 2\n[matrix A]\n1 x\n0 1\n").unwrap();
        let mut fam = ptr::null_mut();
        assert_eq!(jsr_family_parse(bad.as_ptr(), &mut fam), JsrStatus::Parse);
        assert!(last_error().contains("3"));
        assert!(fam.is_null());

        assert_eq!(jsr_family_parse(ptr::null(), &mut fam), JsrStatus::NullPointer);
        assert_eq!(jsr_family_new(2, 1, ptr::null(), &mut fam), JsrStatus::NullPointer);
        assert_eq!(jsr_compute(ptr::null(), ptr::null(), ptr::null_mut()), JsrStatus::NullPointer);

        let junk = CString::new("{not json").unwrap();
        let mut cert = ptr::null_mut();
        assert_eq!(jsr_certificate_from_json(junk.as_ptr(), &mut cert), JsrStatus::Parse);

        jsr_family_free(ptr::null_mut());
        jsr_certificate_free(ptr::null_mut());
        jsr_string_free(ptr::null_mut());
    }
}

#[test]
fn parsed_family_matches_raw_data() {
    unsafe {
        let text = CString::new("dim = 2\n[matrix A1]\n1 -1/8\n0 1/2\n[matrix A2]\n1/2 0\n1 1\n").unwrap();
        let mut fam = ptr::null_mut();
        assert_eq!(jsr_family_parse(text.as_ptr(), &mut fam), JsrStatus::Ok);
        let mut cert = ptr::null_mut();
        assert_eq!(jsr_compute(fam, ptr::null(), &mut cert), JsrStatus::Ok);
        assert!((jsr_certificate_value(cert) - 1.0).abs() < 1e-10);
        jsr_certificate_free(cert);
        jsr_family_free(fam);
    }
}

#[test]
fn daubechies_order_two() {
    let mut alpha = 0.0;
    let mut jsr = 0.0;
    let status = unsafe { jsr_daubechies_holder(2, &mut alpha, &mut jsr) };
    assert_eq!(status, JsrStatus::Ok);
    assert!((alpha - 0.550015686523504).abs() < 1e-9);
    assert_eq!(unsafe { jsr_daubechies_holder(1, &mut alpha, ptr::null_mut()) }, JsrStatus::InvalidInput);
}
