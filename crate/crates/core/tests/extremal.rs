mod common;

use common::Ctx;
use tauberlab::extremal::{
    build_extremal, c1_threshold_scan, derivative_sup, eval_extremal, eval_extremal_laplace, make_params,
};
use tauberlab::numeric::linear_grid;
use tauberlab::suite::standard_pair;
use tauberlab::Complex64;

#[test]
fn log_tau_matches_product() {
    let p = make_params(10, 1.0, 2.0, 1.0, &standard_pair()).unwrap();
    let da = p.delta * p.a;
    let product: f64 = (0..10).map(|_| da).product::<f64>() / 10f64.sqrt();
    assert!((p.log_tau - product.ln()).abs() < 1e-12 * p.log_tau.abs());
    let want_a = 10.0 * 2.0 * (1f64.exp() + 10.0).ln();
    assert!((p.a - want_a).abs() < 1e-12 * want_a);
}

#[test]
fn closed_form_on_boundary() {
    // z on the boundary Re z = −1/M of Ω_M, Im z sweeping across the band
    let mut ctx = Ctx::new();
    let p = make_params(4, 1.0, 2.0, 1.0, &standard_pair()).unwrap();
    for dy in linear_grid(-3.0, 3.0, 61) {
        let d = Complex64::new(-0.5 + p.delta, dy);
        let v = p.cauchy_offset_log(d).unwrap();
        let r = ctx.cauchy_offset(&p, d);
        let got = Complex64::from_polar((v.ln_abs - p.ln_prefactor()).exp(), v.arg);
        assert!((got - r).norm() < 1e-10 * r.norm(), "dy = {}", dy);
    }
}

#[test]
fn laplace_against_atoms_at_band_centre() {
    let mut ctx = Ctx::new();
    let p = make_params(10, 1.0, 2.0, 1.0, &standard_pair()).unwrap();
    let t = 10.0 / p.delta;
    for n in [0, 1] {
        let v = if n == 0 { p.laplace_log(t) } else { p.laplace_deriv_log(t) }.unwrap();
        let (ln_abs, arg) = ctx.laplace(&p, t, n);
        assert!((v.ln_abs - p.ln_prefactor() - ln_abs).abs() < 1e-9);
        assert!((v.arg - arg).abs() < 1e-9 || ((v.arg - arg).abs() - std::f64::consts::TAU).abs() < 1e-9);
    }
}

#[test]
fn derivative_peaks_in_band() {
    let p = make_params(20, 1.0, 2.0, 1.0, &standard_pair()).unwrap();
    let (lo, hi) = p.t_band();
    let ts = linear_grid(0.0, 3.0 * p.a, 3001);
    let (best, at) = ts
        .iter()
        .map(|&t| (p.laplace_deriv_log(t).unwrap().ln_abs, t))
        .fold((f64::NEG_INFINITY, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    assert!(best.is_finite());
    assert!(at >= lo && at <= hi, "peak at {} outside [{}, {}]", at, lo, hi);
}

#[test]
fn one_term_reduces_to_measure() {
    let spec = standard_pair();
    let fs = build_extremal(&spec, 1.0, 2.0, 1.0, 1.0, 1).unwrap();
    let p = &fs.measures[0];
    for t in [5.0, 20.0, 40.0] {
        let a = eval_extremal(&fs, t).unwrap();
        let b = p.laplace_transform(t).unwrap() * fs.amplitude;
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }
    let z = Complex64::new(-0.1, p.r + 0.3);
    let a = eval_extremal_laplace(&fs, z).unwrap();
    let b = p.cauchy_transform(z).unwrap() * fs.amplitude;
    assert!((a - b).norm() <= 1e-9 * b.norm());
    let (sup, _) = derivative_sup(&fs, &linear_grid(0.0, 60.0, 200)).unwrap();
    assert!(sup.is_finite());
}

#[test]
fn schedule_ratios_and_checkpoints() {
    let fs = build_extremal(&standard_pair(), 1.0, 2.0, 1.0, 1.0, 4).unwrap();
    for w in fs.measures.windows(2) {
        assert!(w[1].k >= 4 * w[0].k);
        assert!(w[0].r_band().1 < w[1].r_band().0);
    }
    for (cp, p) in fs.checkpoints.iter().zip(&fs.measures) {
        assert_eq!(cp.t, p.k as f64 / p.delta);
    }
}

#[test]
fn threshold_scan_above_gamma0() {
    let spec = standard_pair();
    let p = make_params(20, 1.0, 2.0, 1.0, &spec).unwrap();
    let rep = c1_threshold_scan(&spec, p.gamma0, &[1.0], 1.0, 2.0, 3).unwrap();
    assert!(rep.rows.iter().all(|r| r.lhs > 0.0));
}

#[test]
fn four_term_derivative_is_bounded() {
    let fs = build_extremal(&standard_pair(), 1.0, 2.0, 1.0, 1.0, 4).unwrap();
    let horizon = fs.checkpoints.last().unwrap().t * 2.0;
    let (sup, _) = derivative_sup(&fs, &linear_grid(0.0, horizon, 4000)).unwrap();
    assert!(sup.is_finite());
}
