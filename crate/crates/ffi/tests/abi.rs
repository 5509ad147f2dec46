use std::ffi::{CStr, CString};
use std::ptr;

use dispersion_ffi::*;

fn make(lo: f64, hi: f64, bps: &[f64], slopes: &[f64], intercepts: &[f64]) -> *mut DispersionFn {
    let mut f = ptr::null_mut();
    let s = unsafe {
        dispersion_fn_new(
            lo,
            hi,
            bps.as_ptr(),
            bps.len(),
            slopes.as_ptr(),
            intercepts.as_ptr(),
            &mut f,
        )
    };
    assert_eq!(s, DispersionStatus::Ok);
    f
}

fn last_error() -> String {
    let p = dispersion_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn threshold_function_round_trip() {
    let f = make(0.0, 1.0, &[0.5], &[0.0, 0.0], &[0.0, 1.0]);
    unsafe {
        let mut v = f64::NAN;
        assert_eq!(dispersion_fn_eval(f, 0.25, &mut v), DispersionStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(dispersion_fn_eval(f, 0.5, &mut v), DispersionStatus::Ok);
        assert_eq!(v, 1.0);

        let mut count = 0;
        assert_eq!(dispersion_fn_piece_count(f, &mut count), DispersionStatus::Ok);
        assert_eq!(count, 2);

        // 0.5 e^0 + 0.5 e^1
        let mut z = 0.0;
        assert_eq!(
            dispersion_fn_exp_integral(f, 1.0, 0.0, 1.0, &mut z),
            DispersionStatus::Ok
        );
        let expected = 0.5 + 0.5 * std::f64::consts::E;
        assert!((z - expected).abs() <= 1e-12 * expected);

        let (mut rho, mut best) = (f64::NAN, f64::NAN);
        assert_eq!(dispersion_fn_argmax(f, &mut rho, &mut best), DispersionStatus::Ok);
        // constant pieces report their midpoint
        assert_eq!((rho, best), (0.75, 1.0));

        let mut a = 0.0;
        let mut b = 0.0;
        assert_eq!(dispersion_fn_sample(f, 3.0, 11, &mut a), DispersionStatus::Ok);
        assert_eq!(dispersion_fn_sample(f, 3.0, 11, &mut b), DispersionStatus::Ok);
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));

        let mut json = ptr::null_mut();
        assert_eq!(dispersion_fn_to_json(f, &mut json), DispersionStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        dispersion_string_free(json);
        let back: dispersion_core::PiecewiseFn1D = serde_json::from_str(&text).unwrap();
        assert_eq!(back.breakpoints(), &[0.5]);
        dispersion_fn_free(f);
    }
}

#[test]
fn sums_match_pointwise() {
    let a = make(0.0, 1.0, &[0.3], &[0.0, 1.0], &[0.2, 0.0]);
    let b = make(0.0, 1.0, &[0.6], &[0.0, 0.0], &[0.5, 0.1]);
    unsafe {
        let mut s = ptr::null_mut();
        let list = [a as *const DispersionFn, b as *const DispersionFn];
        assert_eq!(dispersion_fn_sum(list.as_ptr(), 2, &mut s), DispersionStatus::Ok);
        for x in [0.0, 0.29, 0.3, 0.45, 0.6, 0.99, 1.0] {
            let (mut va, mut vb, mut vs) = (0.0, 0.0, 0.0);
            dispersion_fn_eval(a, x, &mut va);
            dispersion_fn_eval(b, x, &mut vb);
            dispersion_fn_eval(s, x, &mut vs);
            assert!((vs - (va + vb)).abs() < 1e-15, "{x}");
        }
        assert_eq!(
            dispersion_fn_sum(list.as_ptr(), 0, &mut s),
            DispersionStatus::InvalidInput
        );
        dispersion_fn_free(s);
        dispersion_fn_free(a);
        dispersion_fn_free(b);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut f = ptr::null_mut();
    let bps = [0.7, 0.2];
    let forms = [0.0; 3];
    unsafe {
        let s = dispersion_fn_new(0.0, 1.0, bps.as_ptr(), 2, forms.as_ptr(), forms.as_ptr(), &mut f);
        assert_eq!(s, DispersionStatus::InvalidInput);
        assert!(f.is_null());
        assert!(last_error().contains("increasing"));

        let s = dispersion_fn_new(0.0, 1.0, ptr::null(), 0, ptr::null(), forms.as_ptr(), &mut f);
        assert_eq!(s, DispersionStatus::NullPointer);
        assert!(last_error().contains("slopes"));

        let g = make(0.0, 1.0, &[], &[0.0], &[1.0]);
        let mut v = 0.0;
        assert_eq!(dispersion_fn_eval(g, 2.0, &mut v), DispersionStatus::OutOfDomain);
        assert_eq!(
            dispersion_fn_eval(ptr::null(), 0.5, &mut v),
            DispersionStatus::NullPointer
        );
        assert_eq!(dispersion_fn_eval(g, 0.5, &mut v), DispersionStatus::Ok);
        assert!(dispersion_last_error_message().is_null());
        dispersion_fn_free(g);
        dispersion_fn_free(ptr::null_mut());
    }
}

#[test]
fn greedy_curves_match_the_core() {
    unsafe {
        // one swap candidate at (ln .25 - ln .5) / (ln 2 - ln 4) = 1
        let (values, sizes) = ([0.25, 0.5], [2.0, 4.0]);
        let mut f = ptr::null_mut();
        let s = dispersion_knapsack_curve(values.as_ptr(), sizes.as_ptr(), 2, 5.0, 10.0, &mut f);
        assert_eq!(s, DispersionStatus::Ok);
        let inst = dispersion_core::greedy::KnapsackInstance::new(values.to_vec(), sizes.to_vec(), 5.0).unwrap();
        for i in 0..=100 {
            let rho = i as f64 / 10.0;
            let mut v = 0.0;
            dispersion_fn_eval(f, rho, &mut v);
            assert_eq!(v, dispersion_core::greedy::knapsack_greedy(&inst, rho).1);
        }
        dispersion_fn_free(f);

        // path a-b-c weighted (0.6, 0.9, 0.6): {b} at rho = 0, {a, c} at rho = 1
        let weights = [0.6, 0.9, 0.6];
        let edges: [usize; 4] = [0, 1, 1, 2];
        let mut g = ptr::null_mut();
        assert_eq!(
            dispersion_mwis_curve(weights.as_ptr(), 3, edges.as_ptr(), 2, 10.0, true, &mut g),
            DispersionStatus::Ok
        );
        let mut v = 0.0;
        dispersion_fn_eval(g, 0.0, &mut v);
        assert_eq!(v, 0.9);
        dispersion_fn_eval(g, 1.0, &mut v);
        assert_eq!(v, 1.2);
        dispersion_fn_free(g);

        let bad = [1.5];
        assert_eq!(
            dispersion_knapsack_curve(bad.as_ptr(), sizes.as_ptr(), 1, 5.0, 10.0, &mut f),
            DispersionStatus::BadParameter
        );
    }
}

#[test]
fn learning_rates() {
    let mut l = 0.0;
    unsafe {
        assert_eq!(
            dispersion_lambda_full_info(1, std::f64::consts::E, 1.0, 1, 1.0, &mut l),
            DispersionStatus::Ok
        );
        assert!((l - 1.0).abs() < 1e-15);
        assert_eq!(
            dispersion_lambda_private(0.5, 0.01, 100, 1.0, &mut l),
            DispersionStatus::Ok
        );
        let expected = 0.5 / (4.0 * (200.0 * 100f64.ln()).sqrt());
        assert!((l - expected).abs() < 1e-15);
        assert_eq!(
            dispersion_lambda_private(1.5, 0.01, 100, 1.0, &mut l),
            DispersionStatus::BadParameter
        );
        assert_eq!(
            dispersion_lambda_full_info(1, 1.0, 2.0, 1, 1.0, &mut l),
            DispersionStatus::BadParameter
        );
    }
}

#[test]
fn forecaster_concentrates_on_the_good_half() {
    unsafe {
        let mut fc = ptr::null_mut();
        assert_eq!(
            dispersion_forecaster_new(0.0, 1.0, 1.0, 1.0, 5, &mut fc),
            DispersionStatus::Ok
        );
        let good = make(0.0, 1.0, &[0.5], &[0.0, 0.0], &[0.0, 1.0]);
        for _ in 0..20 {
            let mut rho = 0.0;
            assert_eq!(dispersion_forecaster_play(fc, &mut rho), DispersionStatus::Ok);
            assert_eq!(dispersion_forecaster_update(fc, good), DispersionStatus::Ok);
        }
        // mass on [0.5, 1] is e^20 / (1 + e^20)
        let mut upper = 0;
        for _ in 0..50 {
            let mut rho = 0.0;
            dispersion_forecaster_play(fc, &mut rho);
            upper += usize::from(rho >= 0.5);
        }
        assert!(upper >= 49);
        let too_big = make(0.0, 1.0, &[], &[0.0], &[2.0]);
        assert_eq!(
            dispersion_forecaster_update(fc, too_big),
            DispersionStatus::RangeViolation
        );
        dispersion_fn_free(too_big);
        dispersion_fn_free(good);
        dispersion_forecaster_free(fc);
    }
}

#[test]
fn exp_mech_is_seeded() {
    let a = make(0.0, 2.0, &[1.0], &[0.0, 0.0], &[0.0, 1.0]);
    let list = [a as *const DispersionFn; 3];
    let (mut x, mut y) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            dispersion_exp_mech_1d(list.as_ptr(), 3, 1.0, 1.0, 9, &mut x),
            DispersionStatus::Ok
        );
        assert_eq!(
            dispersion_exp_mech_1d(list.as_ptr(), 3, 1.0, 1.0, 9, &mut y),
            DispersionStatus::Ok
        );
        assert_eq!(x, y);
        assert!((0.0..=2.0).contains(&x));
        assert_eq!(
            dispersion_exp_mech_1d(list.as_ptr(), 3, -1.0, 1.0, 9, &mut x),
            DispersionStatus::BadParameter
        );
        dispersion_fn_free(a);
    }
}

const HEADER: &str = include_str!("../include/dispersion.h");

#[test]
fn header_declares_every_export() {
    let src = include_str!("../src/lib.rs");
    let exports: Vec<&str> = src
        .split("pub unsafe extern \"C\" fn ")
        .skip(1)
        .chain(src.split("pub extern \"C\" fn ").skip(1))
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 18);
    for name in exports {
        assert!(HEADER.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(HEADER.contains("typedef struct DispersionFn DispersionFn;"));
    assert!(HEADER.contains("DISPERSION_STATUS_OK = 0"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = std::env::temp_dir().join(format!("dispersion-h-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"dispersion.h\"\nint main(void) { return DISPERSION_STATUS_OK; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include])
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
    let _ = CString::new("ok");
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}
