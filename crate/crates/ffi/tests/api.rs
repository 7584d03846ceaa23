use boundlab_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    let p = bl_last_error_message();
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned();
    unsafe { bl_string_free(p) };
    s
}

#[test]
fn scalar_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(bl_binary_kl(0.5, 0.25, &mut v), BlStatus::Ok);
        let oracle = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((v - oracle).abs() < 1e-15);

        assert_eq!(bl_hoeffding_radius(1000, 0.01, 0, &mut v), BlStatus::Ok);
        assert!((v - 0.047985).abs() < 1e-6);

        assert_eq!(bl_kl_mean_bound(0.0, 1000, 0.01, 0, 1, &mut v), BlStatus::Ok);
        assert!((v - 0.0045946).abs() < 1e-6);

        assert_eq!(bl_kl_inverse(0.0, 0.01, 1, &mut v), BlStatus::Ok);
        assert!((v - (1.0 - (-0.01f64).exp())).abs() < 1e-12);
    }
}

#[test]
fn errors_are_reported() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(bl_binary_kl(1.5, 0.5, &mut v), BlStatus::Domain);
        assert!(last_error().contains("outside"));
        assert_eq!(bl_binary_kl(0.5, 0.5, ptr::null_mut()), BlStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(bl_empirical_bernstein(ptr::null(), 3, 0.05, &mut v), BlStatus::NullPointer);
        let rho = [0.5, 0.7];
        let pi = [0.5, 0.5];
        assert_eq!(bl_pb_kl_bound(rho.as_ptr(), pi.as_ptr(), 2, 10, 0.1, 0.05, &mut v), BlStatus::Domain);
    }
}

#[test]
fn sample_bounds() {
    let xs = [0.0, 0.5, 1.0, 0.5, 0.5, 0.0, 1.0, 0.5];
    let mut split = 0.0;
    let mut kl = 0.0;
    let mut eb = 0.0;
    let mut ub = 0.0;
    unsafe {
        let single = [0.0, 1.0];
        let bin = [0.0, 1.0, 1.0, 0.0, 1.0];
        assert_eq!(bl_split_kl(bin.as_ptr(), 5, single.as_ptr(), 2, 0.05, &mut split), BlStatus::Ok);
        assert_eq!(bl_kl_mean_bound(0.6, 5, 0.05, 0, 1, &mut kl), BlStatus::Ok);
        assert!((split - kl).abs() < 1e-12);

        assert_eq!(bl_empirical_bernstein(xs.as_ptr(), xs.len(), 0.05, &mut eb), BlStatus::Ok);
        assert!(eb >= 0.5);
        assert_eq!(bl_unexpected_bernstein(xs.as_ptr(), xs.len(), 1.0, 0.05, &mut ub), BlStatus::Ok);
        assert!(ub >= 0.5);
    }
}

#[test]
fn pac_bayes_kl_with_posterior_equal_to_prior() {
    let w = [0.25; 4];
    let (n, delta, emp) = (200usize, 0.05, 0.1);
    let mut v = 0.0;
    let mut direct = 0.0;
    unsafe {
        assert_eq!(bl_pb_kl_bound(w.as_ptr(), w.as_ptr(), 4, n, emp, delta, &mut v), BlStatus::Ok);
        let eps = (2.0 * (n as f64).sqrt() / delta).ln() / n as f64;
        assert_eq!(bl_kl_inverse(emp, eps, 1, &mut direct), BlStatus::Ok);
    }
    assert_eq!(v, direct);
}

#[test]
fn log_lines() {
    let line = CString::new("7 0 1 0 0 1 0 1 0 0 1 0").unwrap();
    let (mut a, mut r, mut f) = (0usize, 9u8, [9u8; 10]);
    unsafe {
        assert_eq!(bl_parse_log_line(line.as_ptr(), 16, &mut a, &mut r, f.as_mut_ptr()), BlStatus::Ok);
        assert_eq!((a, r), (7, 0));
        assert_eq!(f, [1, 0, 0, 1, 0, 1, 0, 0, 1, 0]);
        let bad = CString::new("1 2 0 0 0 0 0 0 0 0 0 0").unwrap();
        assert_eq!(bl_parse_log_line(bad.as_ptr(), 16, &mut a, &mut r, f.as_mut_ptr()), BlStatus::Parse);
    }
}

#[test]
fn policy_handles() {
    unsafe {
        let mut h: *mut BlPolicy = ptr::null_mut();
        assert_eq!(bl_policy_new_ucb1(3, 1, 7, &mut h), BlStatus::Ok);
        let mut arm = 99;
        assert_eq!(bl_policy_observe_bandit(h, 0, 0.5), BlStatus::Domain);
        // initialization plays every arm once in order
        for expected in 0..3 {
            assert_eq!(bl_policy_select(h, &mut arm), BlStatus::Ok);
            assert_eq!(arm, expected);
            assert_eq!(bl_policy_select(h, &mut arm), BlStatus::Ok);
            assert_eq!(arm, expected);
            let loss = if expected == 2 { 0.0 } else { 1.0 };
            assert_eq!(bl_policy_observe_bandit(h, arm, loss), BlStatus::Ok);
        }
        assert_eq!(bl_policy_select(h, &mut arm), BlStatus::Ok);
        assert_eq!(arm, 2);
        assert_eq!(bl_policy_observe_bandit(h, 0, 0.0), BlStatus::Domain);
        bl_policy_free(h);

        let mut e: *mut BlPolicy = ptr::null_mut();
        assert_eq!(bl_policy_new_exp3(4, 1, &mut e), BlStatus::Ok);
        for _ in 0..100 {
            assert_eq!(bl_policy_select(e, &mut arm), BlStatus::Ok);
            assert!(arm < 4);
            assert_eq!(bl_policy_observe_bandit(e, arm, 0.3), BlStatus::Ok);
        }
        bl_policy_free(e);

        let mut hd: *mut BlPolicy = ptr::null_mut();
        assert_eq!(bl_policy_new_hedge(2, 1, &mut hd), BlStatus::Ok);
        let losses = [1.0, 0.0];
        for _ in 0..200 {
            assert_eq!(bl_policy_select(hd, &mut arm), BlStatus::Ok);
            assert_eq!(bl_policy_observe_full(hd, losses.as_ptr(), 2), BlStatus::Ok);
        }
        assert_eq!(bl_policy_select(hd, &mut arm), BlStatus::Ok);
        assert_eq!(arm, 1);
        let three = [0.0; 3];
        assert_eq!(bl_policy_observe_full(hd, three.as_ptr(), 3), BlStatus::LengthMismatch);
        bl_policy_free(hd);
        bl_policy_free(ptr::null_mut());

        assert_eq!(bl_policy_new_ucb1(0, 1, 7, &mut h), BlStatus::Domain);
    }
}
