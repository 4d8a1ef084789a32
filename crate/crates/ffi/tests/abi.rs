use std::ffi::CStr;
use std::ptr;

use map_ising_ffi::*;

fn last_error() -> String {
    let p = mi_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn couplings_and_regime() {
    let (mut j, mut h) = (0.0, 0.0);
    assert_eq!(unsafe { mi_couplings(0.24, 0.15, &mut j, &mut h) }, MiStatus::Ok);
    assert!((j - 0.5 * (0.76f64 / 0.24).ln()).abs() < 1e-15);
    assert!((h - 0.5 * (0.85f64 / 0.15).ln()).abs() < 1e-15);
    assert!(mi_last_error_message().is_null());

    let (mut m, mut b) = (0, true);
    assert_eq!(unsafe { mi_regime_index(0.24, 0.15, &mut m, &mut b) }, MiStatus::Ok);
    assert_eq!((m, b), (2, false));

    let mut e = 0.0;
    assert_eq!(unsafe { mi_boundary_epsilon(0.24, 2, &mut e) }, MiStatus::Ok);
    assert!((e - 0.24).abs() < 1e-14);
    assert_eq!(unsafe { mi_regime_index(0.24, e, &mut m, &mut b) }, MiStatus::Ok);
    assert_eq!((m, b), (2, true));
}

#[test]
fn errors_are_reported() {
    let (mut j, mut h) = (0.0, 0.0);
    assert_eq!(unsafe { mi_couplings(0.6, 0.1, &mut j, &mut h) }, MiStatus::Domain);
    assert!(last_error().contains("q = 0.6"));
    assert_eq!(unsafe { mi_couplings(0.2, 0.1, ptr::null_mut(), &mut h) }, MiStatus::NullPointer);
    let mut e = 0.0;
    assert_eq!(unsafe { mi_boundary_epsilon(0.24, 0, &mut e) }, MiStatus::InvalidArgument);

    let y = [1i8, 0, -1];
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { mi_decode(y.as_ptr(), 3, 0.24, 0.15, MiMode::Auto, 0, &mut r) }, MiStatus::InvalidArgument);
    assert!(r.is_null());
    let y = [1i8, -1, 1];
    assert_eq!(
        unsafe { mi_decode(y.as_ptr(), 3, 0.24, 0.15, MiMode::Commensurate, 2, &mut r) },
        MiStatus::InvalidArgument
    );
}

#[test]
fn observables_match_library() {
    let mut o = MiObservables::default();
    assert_eq!(unsafe { mi_observables(0.24, 0.05, &mut o) }, MiStatus::Ok);
    assert_eq!((o.v, o.theta, o.m), (1.0, 0.0, 1));
    assert!((o.c - 0.4212).abs() < 1e-12);
    let a = map_ising::analyze(&map_ising::ModelParams::new(0.24, 0.3).unwrap()).unwrap();
    assert_eq!(unsafe { mi_observables(0.24, 0.3, &mut o) }, MiStatus::Ok);
    assert_eq!((o.f, o.c, o.v, o.theta), (a.observables.f, a.observables.c, a.observables.v, a.observables.theta));
}

#[test]
fn sample_and_decode() {
    let n = 500;
    let (mut x, mut y) = (vec![0i8; n], vec![0i8; n]);
    assert_eq!(unsafe { mi_sample_pair(0.24, 0.15, n, 9, 3, x.as_mut_ptr(), y.as_mut_ptr()) }, MiStatus::Ok);
    let (xs, ys) = map_ising::sampler::sample_pair(&map_ising::ModelParams::new(0.24, 0.15).unwrap(), n, 9, 3);
    assert_eq!((x.as_slice(), y.as_slice()), (xs.as_slice(), ys.as_slice()));

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { mi_decode(y.as_ptr(), n, 0.24, 0.15, MiMode::Auto, 0, &mut r) }, MiStatus::Ok);
    let expected = map_ising::decode_count(&ys, &map_ising::ModelParams::new(0.24, 0.15).unwrap().couplings(), map_ising::ComparisonMode::Incommensurate).unwrap();

    let mut len = 0;
    assert_eq!(unsafe { mi_decode_result_len(r, &mut len) }, MiStatus::Ok);
    assert_eq!(len, n);
    let (mut a, mut b) = (0, 0);
    assert_eq!(unsafe { mi_decode_result_energy(r, &mut a, &mut b) }, MiStatus::Ok);
    assert_eq!((a, b), (expected.energy.a, expected.energy.b));

    let mut need = 0;
    assert_eq!(unsafe { mi_decode_result_count(r, ptr::null_mut(), 0, &mut need) }, MiStatus::Ok);
    let mut small = vec![0 as std::ffi::c_char; need - 1];
    assert_eq!(
        unsafe { mi_decode_result_count(r, small.as_mut_ptr(), small.len(), &mut need) },
        MiStatus::BufferTooSmall
    );
    let mut buf = vec![0 as std::ffi::c_char; need];
    assert_eq!(unsafe { mi_decode_result_count(r, buf.as_mut_ptr(), need, &mut need) }, MiStatus::Ok);
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(s, expected.count.to_string());

    let mut lnc = 0.0;
    assert_eq!(unsafe { mi_decode_result_ln_count(r, &mut lnc) }, MiStatus::Ok);
    assert_eq!(lnc, expected.ln_count());

    let mut st = MiDecodeStats::default();
    assert_eq!(unsafe { mi_decode_result_stats(r, &mut st) }, MiStatus::Ok);
    assert!((st.theta_hat - lnc / n as f64).abs() < 1e-15);

    let mut w = vec![0i8; n];
    assert_eq!(unsafe { mi_decode_result_witness(r, w.as_mut_ptr(), n) }, MiStatus::Ok);
    assert_eq!(w.as_slice(), expected.witness.as_slice());
    assert_eq!(unsafe { mi_decode_result_witness(r, w.as_mut_ptr(), n - 1) }, MiStatus::BufferTooSmall);

    unsafe { mi_decode_result_free(r) };
    unsafe { mi_decode_result_free(ptr::null_mut()) };
}

#[test]
fn null_handle_is_rejected() {
    let mut len = 0;
    assert_eq!(unsafe { mi_decode_result_len(ptr::null(), &mut len) }, MiStatus::NullPointer);
    assert!(last_error().contains("result"));
}
