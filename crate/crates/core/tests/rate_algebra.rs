use tauberlab::numeric::{linear_grid, log_grid};
use tauberlab::rate::{check_submultiplicative, iterated_log_sequence, right_inverse, w_of, SubmultGrid};
use tauberlab::{EnvelopeSpec, InverseOptions, RateExpr};

#[test]
fn sampled_inverse_matches_closed_form() {
    let s = linear_grid(0.0, 20.0, 201);
    let v = s.iter().map(|x| 2.0 + x).collect();
    let f = RateExpr::sampled(s, v).unwrap();
    let tol = 1e-10;
    for t in [2.5, 7.3, 13.0, 21.9] {
        let inv = right_inverse(&f, t, InverseOptions::with_tol(tol)).unwrap();
        assert!((inv.value - (t - 2.0)).abs() <= 2.0 * tol * t, "t = {}", t);
    }
}

#[test]
fn log_shift_inverse() {
    // 2 + log(1+s) = 4 at s = e² − 1
    let f = RateExpr::log_shift(2.0, 1.0);
    let w = w_of(&f, 4.0, InverseOptions::with_tol(1e-12)).unwrap();
    let want = 2f64.exp() - 1.0;
    assert!((w.value - want).abs() < 1e-10 * want);
}

/// Smallest grid point with `f(s) ≥ t` on a dense grid, refined by
/// bisection between neighbours.
fn dense_inverse(f: &RateExpr, t: f64, s_max: f64) -> f64 {
    let grid = linear_grid(0.0, s_max, 200_001);
    let i = grid.iter().position(|&s| f.value(s) >= t).expect("t reached on the grid");
    let (mut lo, mut hi) = (grid[i - 1], grid[i]);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f.value(mid) >= t {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn envelope_against_dense_scan() {
    let m = RateExpr::power_shift(2.0, 1.0, 1.0);
    let spec = EnvelopeSpec::new(m.clone(), m).order(2);
    let mk = spec.mk_expr();
    for t in [10.0, 100.0, 1000.0] {
        let w = dense_inverse(&mk, t, 500.0);
        let env = spec.envelope(t, InverseOptions::with_tol(1e-13)).unwrap();
        let want = w.powi(-2);
        assert!((env - want).abs() < 1e-6 * want, "t = {}: {} vs {}", t, env, want);
    }
}

#[test]
fn iterated_log_is_monotone() {
    for n in 1..=3 {
        let mut prev = 0.0;
        for j in 1..=10_000u64 {
            let v = iterated_log_sequence(n, 0.5, j);
            assert!(v >= prev, "n = {}, j = {}", n, j);
            prev = v;
        }
    }
}

#[test]
fn submultiplicativity_cross_term() {
    let sq = RateExpr::exp(RateExpr::pow(RateExpr::identity(), 2.0));
    let rep = check_submultiplicative(&sq, &sq, 0.0, SubmultGrid::default()).unwrap();
    assert!(!rep.pass);
    let e = RateExpr::exp(RateExpr::identity());
    let rep = check_submultiplicative(&e, &e, 0.0, SubmultGrid::default()).unwrap();
    assert!(rep.pass);
    assert!((rep.observed - 1.0).abs() < 1e-9);
}

#[test]
fn envelope_is_nonincreasing() {
    let spec = EnvelopeSpec::new(RateExpr::log_shift(2.0, 1.0), RateExpr::power_shift(2.0, 1.0, 2.0));
    let mut prev = f64::INFINITY;
    for t in log_grid(1e-2, 1e4, 300) {
        let e = spec.envelope(t, InverseOptions::default()).unwrap();
        assert!(e <= prev * (1.0 + 1e-9));
        prev = e;
    }
}

#[test]
fn hypothesis_scan_is_grid_stable() {
    use tauberlab::rate::{check_hypotheses, check_k_aux};
    let spec = tauberlab::suite::standard_pair();
    let a = check_hypotheses(&spec, 1e4, 256).unwrap();
    let b = check_hypotheses(&spec, 1e4, 512).unwrap();
    for name in ["cond_i_worst_margin", "cond_ii_epsilon"] {
        let (x, y) = (a.value(name), b.value(name));
        assert!((x - y).abs() <= 0.01 * x.abs().max(y.abs()), "{}: {} vs {}", name, x, y);
    }
    let a = check_k_aux(&spec, 100.0, 200, InverseOptions::default()).unwrap();
    let b = check_k_aux(&spec, 100.0, 400, InverseOptions::default()).unwrap();
    assert!((a.observed - b.observed).abs() <= 0.01 * a.observed);
}
