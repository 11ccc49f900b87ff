use std::ffi::{CStr, CString};
use std::ptr;

use mccp_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        mccp_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(mccp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn aggregation_matches_worked_examples() {
    let mut out = [0.0; 3];
    let status = unsafe { mccp_aggregate_single_labels([1u32, 1, 2, 3].as_ptr(), 4, 3, out.as_mut_ptr()) };
    assert_eq!(status, MccpStatus::Ok);
    assert_eq!(out, [0.5, 0.25, 0.25]);

    // One ranking with blocks {2} then {5, 7}.
    let mut out = [0.0; 10];
    let status = unsafe {
        mccp_aggregate_rankings([2u32, 5, 7].as_ptr(), 3, [1usize, 2].as_ptr(), 2, [2usize].as_ptr(), 1, 10, out.as_mut_ptr())
    };
    assert_eq!(status, MccpStatus::Ok);
    assert!((out[1] - 2.0 / 3.0).abs() < 1e-15 && (out[4] - 1.0 / 6.0).abs() < 1e-15 && (out[6] - 1.0 / 6.0).abs() < 1e-15);

    let status = unsafe { mccp_aggregate_single_labels([0u32].as_ptr(), 1, 3, out.as_mut_ptr()) };
    assert_eq!(status, MccpStatus::LabelOutOfRange);
    assert!(last_error().contains("outside"));
    let status = unsafe {
        mccp_aggregate_rankings([2u32, 2].as_ptr(), 2, [1usize, 1].as_ptr(), 2, [2usize].as_ptr(), 1, 10, out.as_mut_ptr())
    };
    assert_eq!(status, MccpStatus::InvalidAnnotations);
    let status = unsafe {
        mccp_aggregate_rankings([2u32].as_ptr(), 1, [2usize].as_ptr(), 1, [1usize].as_ptr(), 1, 10, out.as_mut_ptr())
    };
    assert_eq!(status, MccpStatus::ShapeMismatch);
}

#[test]
fn validation_and_null_pointers() {
    assert_eq!(unsafe { mccp_validate_plausibilities([0.2, 0.8].as_ptr(), 2) }, MccpStatus::Ok);
    assert_eq!(last_error(), "");
    assert_eq!(unsafe { mccp_validate_plausibilities([0.2, 0.7].as_ptr(), 2) }, MccpStatus::InvalidPlausibilities);
    assert_eq!(unsafe { mccp_validate_plausibilities(ptr::null(), 2) }, MccpStatus::NullPointer);
    assert_eq!(unsafe { mccp_p_value([0.1].as_ptr(), 1, 0.5, ptr::null_mut()) }, MccpStatus::NullPointer);
    assert_eq!(unsafe { mccp_predict(ptr::null(), [0.5].as_ptr(), 1, [0u8].as_mut_ptr(), ptr::null_mut()) }, MccpStatus::NullPointer);
    unsafe { mccp_calibration_free(ptr::null_mut()) };
}

#[test]
fn split_calibration_and_prediction() {
    let calib = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let mut p = 0.0;
    assert_eq!(unsafe { mccp_p_value(calib.as_ptr(), 9, 0.45, &mut p) }, MccpStatus::Ok);
    assert_eq!(p, 0.5);

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { mccp_calibrate_split(calib.as_ptr(), 9, 0.2, &mut h) }, MccpStatus::Ok);
    let mut alpha = 0.0;
    assert_eq!(unsafe { mccp_calibration_alpha(h, &mut alpha) }, MccpStatus::Ok);
    assert_eq!(alpha, 0.2);
    let row = [0.05, 0.25, 0.95];
    let mut in_set = [9u8; 3];
    let mut p_values = [0.0; 3];
    assert_eq!(unsafe { mccp_predict(h, row.as_ptr(), 3, in_set.as_mut_ptr(), p_values.as_mut_ptr()) }, MccpStatus::Ok);
    // p-values 0.1, 0.3, 1.0 against alpha 0.2.
    assert_eq!(in_set, [0, 1, 1]);
    assert_eq!(p_values, [0.1, 0.3, 1.0]);

    let dir = tempfile::TempDir::new().unwrap();
    let path = CString::new(dir.path().join("cal.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { mccp_calibration_save(h, path.as_ptr()) }, MccpStatus::Ok);
    let mut loaded = ptr::null_mut();
    assert_eq!(unsafe { mccp_calibration_load(path.as_ptr(), &mut loaded) }, MccpStatus::Ok);
    let mut again = [9u8; 3];
    unsafe { mccp_predict(loaded, row.as_ptr(), 3, again.as_mut_ptr(), ptr::null_mut()) };
    assert_eq!(again, in_set);
    unsafe {
        mccp_calibration_free(h);
        mccp_calibration_free(loaded);
    }

    assert_eq!(unsafe { mccp_calibrate_split(calib.as_ptr(), 9, 1.0, &mut h) }, MccpStatus::InvalidArgument);
    let missing = CString::new("/nonexistent/cal.json").unwrap();
    assert_eq!(unsafe { mccp_calibration_load(missing.as_ptr(), &mut h) }, MccpStatus::Io);
}

#[test]
fn monte_carlo_calibrations() {
    // Three classes; row i puts its score on class i % 3.
    let n = 300;
    let mut scores = Vec::new();
    let mut plaus = Vec::new();
    for i in 0..n {
        let mut s = [0.1; 3];
        s[i % 3] = 0.8;
        scores.extend(s);
        plaus.extend([0.6, 0.3, 0.1]);
    }
    let mut mc = ptr::null_mut();
    let status = unsafe { mccp_calibrate_mc(scores.as_ptr(), plaus.as_ptr(), n, 3, 10, 0.1, 7, &mut mc) };
    assert_eq!(status, MccpStatus::Ok);
    let mut in_set = [0u8; 3];
    let mut p_values = [0.0; 3];
    unsafe { mccp_predict(mc, [0.8, 0.1, 0.1].as_ptr(), 3, in_set.as_mut_ptr(), p_values.as_mut_ptr()) };
    assert!(p_values.iter().all(|p| (0.0..=1.0).contains(p)));
    assert_eq!(in_set[0], 1);
    unsafe { mccp_calibration_free(mc) };

    let mut ecdf = ptr::null_mut();
    let status = unsafe { mccp_calibrate_ecdf_mc(scores.as_ptr(), plaus.as_ptr(), n, 3, 10, 150, 1e-4, 0.1, 7, &mut ecdf) };
    assert_eq!(status, MccpStatus::Ok);
    unsafe { mccp_calibration_free(ecdf) };
    let status = unsafe { mccp_calibrate_ecdf_mc(scores.as_ptr(), plaus.as_ptr(), n, 3, 10, n - 1, 1e-4, 0.1, 7, &mut ecdf) };
    assert_eq!(status, MccpStatus::SplitTooSmall);

    plaus[0] = 0.9;
    let status = unsafe { mccp_calibrate_mc(scores.as_ptr(), plaus.as_ptr(), n, 3, 10, 0.1, 7, &mut mc) };
    assert_eq!(status, MccpStatus::InvalidPlausibilities);
}
