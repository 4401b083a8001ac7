use std::ffi::{CStr, CString};
use std::ptr;

use lqg_growth_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = lqg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn loewner_suite_round_trip() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(lqg_config_new(cstr("loewner").as_ptr(), 7, &mut cfg), LqgStatus::Ok);
        assert_eq!(lqg_config_set(cfg, cstr("n").as_ptr(), cstr("8").as_ptr()), LqgStatus::Ok);
        let mut rep = ptr::null_mut();
        assert_eq!(lqg_run(cfg, &mut rep), LqgStatus::Ok);
        assert!(lqg_report_passed(rep));
        let n = lqg_report_check_count(rep);
        assert_eq!(n, 5);
        let mut c = LqgCheck::default();
        assert_eq!(lqg_report_check(rep, 0, &mut c), LqgStatus::Ok);
        assert!(c.pass && c.stderr.is_nan());
        assert_eq!(CStr::from_ptr(lqg_report_check_id(rep, 0)).to_str().unwrap(), "loewner.uniform_flow");
        assert!(lqg_report_check_id(rep, n).is_null());
        assert_eq!(lqg_report_check(rep, n, &mut c), LqgStatus::OutOfRange);

        let mut json = ptr::null_mut();
        assert_eq!(lqg_report_json(rep, &mut json), LqgStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_string();
        lqg_string_free(json);
        assert!(text.contains("\"suite\": \"loewner\""));

        let dir = tempfile::tempdir().unwrap();
        let d = cstr(dir.path().to_str().unwrap());
        assert_eq!(lqg_report_write(rep, d.as_ptr()), LqgStatus::Ok);
        assert_eq!(std::fs::read_to_string(dir.path().join("report.json")).unwrap(), text);
        assert!(dir.path().join("hadamard.csv").exists());

        lqg_report_free(rep);
        lqg_config_free(cfg);
    }
}

#[test]
fn errors_map_to_codes() {
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(lqg_config_new(cstr("nope").as_ptr(), 0, &mut cfg), LqgStatus::UnknownSuite);
        assert!(last_error().contains("nope"));
        assert!(cfg.is_null());
        assert_eq!(lqg_config_new(ptr::null(), 0, &mut cfg), LqgStatus::NullPointer);
        assert_eq!(lqg_config_new(cstr("gmc").as_ptr(), 0, ptr::null_mut()), LqgStatus::NullPointer);

        assert_eq!(lqg_config_new(cstr("gmc").as_ptr(), 0, &mut cfg), LqgStatus::Ok);
        assert!(lqg_last_error().is_null());
        assert_eq!(lqg_config_set(cfg, cstr("xi").as_ptr(), cstr("2").as_ptr()), LqgStatus::Config);
        assert_eq!(lqg_config_set(cfg, cstr("bogus").as_ptr(), cstr("1").as_ptr()), LqgStatus::Config);
        let bad = [0xffu8, 0];
        assert_eq!(lqg_config_set(cfg, bad.as_ptr().cast(), cstr("1").as_ptr()), LqgStatus::InvalidUtf8);
        // failed overrides leave the config usable
        assert_eq!(lqg_config_set(cfg, cstr("n_samples").as_ptr(), cstr("200").as_ptr()), LqgStatus::Ok);
        lqg_config_free(cfg);

        assert!(!lqg_report_passed(ptr::null()));
        assert_eq!(lqg_report_check_count(ptr::null()), 0);
        assert_eq!(lqg_run(ptr::null(), ptr::null_mut()), LqgStatus::NullPointer);
        lqg_config_free(ptr::null_mut());
        lqg_report_free(ptr::null_mut());
        lqg_string_free(ptr::null_mut());
    }
}

#[test]
fn numeric_entry_points() {
    unsafe {
        let mut pg = LqgPureGravity::default();
        assert_eq!(lqg_pure_gravity(&mut pg), LqgStatus::Ok);
        assert!((pg.gamma * pg.gamma - 8.0 / 3.0).abs() < 1e-14);
        assert!((pg.xi - 1.0 / 6f64.sqrt()).abs() < 1e-15);

        let (mut a, mut b) = (LqgEstimate::default(), LqgEstimate::default());
        assert_eq!(lqg_gmc_mass_moments(pg.xi, 8, 64, 2000, 3, &mut a, &mut b), LqgStatus::Ok);
        assert!((a.mean - 2.0 * std::f64::consts::PI).abs() < 4.0 * a.stderr);
        let mut again = LqgEstimate::default();
        lqg_gmc_mass_moments(pg.xi, 8, 64, 2000, 3, &mut again, &mut b);
        assert_eq!(a.mean.to_bits(), again.mean.to_bits());
        assert_eq!(lqg_gmc_mass_moments(1.5, 8, 64, 2000, 3, &mut a, &mut b), LqgStatus::Config);
        assert_eq!(lqg_gmc_mass_moments(pg.xi, 8, 64, 2000, 3, ptr::null_mut(), &mut b), LqgStatus::NullPointer);
    }
}

#[test]
fn header_declares_the_abi() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/lqg_growth.h")).unwrap();
    for name in [
        "lqg_config_new",
        "lqg_config_set",
        "lqg_run",
        "lqg_report_check",
        "lqg_report_json",
        "lqg_last_error",
        "LQG_STATUS_OK",
        "typedef struct LqgReport LqgReport",
    ] {
        assert!(h.contains(name), "{name} missing from header");
    }
}
