//! One line per acceptance criterion. Exits non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::Ctx;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tauberlab::bridge::{self, HypothesisSide, Side};
use tauberlab::decomposition::{check_lemma21, convolve_direct, decompose, poisson_mass, scaled_kernel};
use tauberlab::extremal::{
    build_extremal, checkpoint_bounds, fhat_scan, make_params, roots_of_unity_closed, verify_lemma42, FhatGrid,
    Lemma42Grid, MeasureParams,
};
use tauberlab::mollifier::{check_derivative_bounds, BumpSpec, Mollifier};
use tauberlab::numeric::{binomial, log_grid, wrap_angle, LogComplex};
use tauberlab::rate::{check_k_aux, w_of};
use tauberlab::semigroup::{corollary_check, fit_m_k, orbit_norm, DiagonalSystem, FitWindow, TimeGrid};
use tauberlab::suite::{run_suite, standard_pair, SuiteConfig};
use tauberlab::{Complex64, EnvelopeSpec, InverseOptions, RateExpr, SampledSignal};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `|value/reference − 1|` for a log-form value against a reference sum,
/// after removing the log prefactor.
fn rel_log(v: LogComplex, ln_pre: f64, reference: (f64, f64)) -> f64 {
    let d = Complex64::new(v.ln_abs - ln_pre - reference.0, wrap_angle(v.arg - reference.1));
    (d.exp() - 1.0).norm()
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn roots_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut ctx = Ctx::new();
    let mut points = Vec::new();
    for k in 1..=50u32 {
        while points.iter().filter(|(kk, _)| *kk == k).count() < 100 {
            let z = Complex64::from_polar(rng.gen_range(0.0..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
            if (z.powu(k + 1) - 1.0).norm() > 1e-3 {
                points.push((k, z));
            }
        }
    }
    let start = Instant::now();
    let values: Vec<Complex64> = points.iter().map(|&(k, z)| roots_of_unity_closed(k, z)).collect();
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    for k in 1..=50u32 {
        let roots = ctx.roots(k);
        for ((_, z), v) in points.iter().zip(&values).filter(|((kk, _), _)| *kk == k) {
            let r = Ctx::roots_sum(&roots, *z);
            worst = worst.max((v - r).norm() / r.norm());
        }
    }
    outcome(
        worst < 1e-9 && within(elapsed, 1.0),
        format!("max rel err {:.2e} over {} points (< 1e-9), {:?}", worst, points.len(), elapsed),
    )
}

fn params(k: u32) -> MeasureParams {
    make_params(k, 1.0, 2.0, 1.0, &standard_pair()).expect("measure parameters")
}

fn evaluators() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ctx = Ctx::new();
    let mut worst = [0.0f64; 3];
    let mut elapsed = Duration::ZERO;
    for k in [2u32, 3, 5, 10, 15, 20] {
        let p = params(k);
        let pre = p.ln_prefactor();
        for _ in 0..40 {
            let d = Complex64::from_polar(rng.gen_range(0.3..3.0) / p.a, rng.gen_range(0.0..std::f64::consts::TAU));
            let s = Instant::now();
            let v = p.cauchy_offset_log(d).expect("cauchy");
            elapsed += s.elapsed();
            let r = ctx.cauchy_offset(&p, d);
            worst[0] = worst[0].max(rel_log(v, pre, (r.norm().ln(), r.arg())));
        }
        // the band, the factored-series range and the direct-sum range
        let t_max = 6.0 * (k as f64 + 1.0) * p.a;
        for _ in 0..40 {
            let t = t_max * rng.gen_range(0.0f64..1.0).powi(3) + 1e-3;
            let s = Instant::now();
            let l = p.laplace_log(t).expect("laplace");
            let ld = p.laplace_deriv_log(t).expect("laplace'");
            elapsed += s.elapsed();
            worst[1] = worst[1].max(rel_log(l, pre, ctx.laplace(&p, t, 0)));
            worst[2] = worst[2].max(rel_log(ld, pre, ctx.laplace(&p, t, 1)));
        }
    }
    let s = Instant::now();
    let mut tripped = 0;
    for k in [50u32, 100, 200, 500, 1000] {
        let p = params(k);
        let (lo, hi) = p.t_band();
        for t in log_grid(lo / 4.0, 4.0 * hi, 50) {
            for v in [p.laplace_log(t), p.laplace_deriv_log(t)] {
                if !v.map(|v| v.ln_abs.is_finite() || v.ln_abs == f64::NEG_INFINITY).unwrap_or(false) {
                    tripped += 1;
                }
            }
        }
        for dy in [-10.0, -2.0, 0.0, 1.0, 10.0] {
            if !p.cauchy_near(-0.5 / 2.0, dy).map(|v| v.ln_abs.is_finite()).unwrap_or(false) {
                tripped += 1;
            }
        }
    }
    elapsed += s.elapsed();
    let pass = worst.iter().all(|&w| w < 1e-8) && tripped == 0 && within(elapsed, 10.0);
    outcome(
        pass,
        format!(
            "rel err C {:.2e}, L {:.2e}, L' {:.2e} (< 1e-8); {} overflow trips for k <= 1000; {:?}",
            worst[0], worst[1], worst[2], tripped, elapsed
        ),
    )
}

fn lemma42() -> Outcome {
    let spec = standard_pair();
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [20u32, 40, 80] {
        let p = params(k);
        let a = verify_lemma42(&spec, &p, &Lemma42Grid::default()).expect("lemma 4.2 scan");
        let b = verify_lemma42(&spec, &p, &Lemma42Grid::default().doubled()).expect("lemma 4.2 scan");
        let mut worst = 0.0f64;
        for name in ["C41", "C42", "C43"] {
            let (x, y) = (a.value(name), b.value(name));
            pass &= x.is_finite() && y.is_finite();
            worst = worst.max(drift(x, y));
        }
        let c44 = a.value("c44");
        worst = worst.max(drift(c44, b.value("c44")));
        pass &= worst < 0.2 && c44 > 0.0;
        let mut line = format!("k={} drift {:.1e} c44 {:.3}", k, worst, c44);
        if k >= 60 {
            let off = a.value("eps41").max(b.value("eps41"));
            pass &= off < 1e-6;
            line += &format!(" off-band |Cmu| {:.1e}", off);
        }
        parts.push(line);
    }
    let elapsed = start.elapsed();
    pass &= within(elapsed, 60.0);
    outcome(pass, format!("{}; {:?}", parts.join("; "), elapsed))
}

fn extremal_checkpoints() -> Outcome {
    let spec = standard_pair();
    let start = Instant::now();
    let fs = build_extremal(&spec, 1.0, 2.0, 1.0, 1.0, 4).expect("extremal function");
    let cp = checkpoint_bounds(&fs).expect("checkpoints");
    let fh = fhat_scan(&spec, &fs, &FhatGrid::default()).expect("fhat scan");
    let elapsed = start.elapsed();
    let c = cp.value("c");
    let cm = fh.value("C_m");
    let pass = fs.len() == 4 && cp.pass && c > 0.0 && cm.is_finite() && within(elapsed, 120.0);
    outcome(
        pass,
        format!("{} terms, observed c {:.4}, sup |fhat| R/(M^1/2 K^g) {:.3e}; {:?}", fs.len(), c, cm, elapsed),
    )
}

fn rate_algebra() -> Outcome {
    let forms = [
        RateExpr::power_shift(2.0, 1.0, 1.0),
        RateExpr::power_shift(2.0, 3.0, 2.0),
        RateExpr::log_shift(2.0, 1.0),
        RateExpr::exp(RateExpr::power_shift(1.0, 1.0, 1.0)),
        RateExpr::compose(RateExpr::exp(RateExpr::identity()), RateExpr::power_shift(0.0, 1.0, 0.5)),
    ];
    let mut worst = 0.0f64;
    for f in &forms {
        // below f(1) the inverse is pinned to 1
        for s in log_grid(1.0, 100.0, 60) {
            let w = w_of(f, f.value(s), InverseOptions::with_tol(1e-14)).expect("inverse");
            worst = worst.max((w.value - s).abs() / s.max(1.0));
        }
    }
    let rep = check_k_aux(&standard_pair(), 100.0, 200, InverseOptions::default()).expect("k_aux");
    let d = rep.value("delta_hat");
    outcome(
        worst < 1e-8 && d >= 0.9,
        format!("round trip err {:.2e} (< 1e-8); delta_hat {:.4} on [2 log 3, 100] (>= 0.9)", worst, d),
    )
}

fn mollifier() -> Outcome {
    let start = Instant::now();
    let spec = BumpSpec::default();
    let m = Mollifier::build(&spec).expect("bump");
    let m2 = Mollifier::build(&spec.with_grid(2 * spec.grid_n)).expect("bump");
    let centre = m.psi.nearest_index(0.0).expect("grid contains 0");
    let unit = m.psi.values[centre].re == 1.0 && m.psi.t(centre) == 0.0;
    let contained = m.support <= 1.0
        && (0..m.psi.len()).all(|i| m.psi.t(i).abs() <= m.support || m.psi.values[i].re == 0.0);
    let a = check_derivative_bounds(&m, 6).expect("derivatives");
    let b = check_derivative_bounds(&m2, 6).expect("derivatives");
    let below = (0..=6).all(|j| a.sups[j] <= m.analytic_bound(j));
    let dc = drift(a.c1, b.c1);
    let elapsed = start.elapsed();
    outcome(
        unit && contained && below && dc < 0.05 && within(elapsed, 10.0),
        format!(
            "psi(0)=1 {}, support in [-{:.4}, {:.4}] {}, sups below bound {}, C1 {:.5} vs {:.5}; {:?}",
            unit, m.support, m.support, contained, below, a.c1, b.c1, elapsed
        ),
    )
}

/// `J₁`, `J₂` rebuilt from direct convolutions of the zero-extended signal.
fn reference_split(f: &SampledSignal, phi: &SampledSignal, r: f64, m: u32) -> (Vec<Complex64>, Vec<Complex64>) {
    let ker = scaled_kernel(phi, r, f.dt).expect("kernel");
    let pad = m as usize * ker.center;
    let zero = Complex64::new(0.0, 0.0);
    let mut cur = vec![zero; pad];
    cur.extend_from_slice(&f.values);
    cur.resize(f.len() + 2 * pad, zero);
    let mut j1 = f.values.clone();
    let mut j2 = vec![zero; f.len()];
    for j in 1..=m {
        cur = convolve_direct(&cur, &ker.values, ker.center, f.dt);
        let c = binomial(m, j) * if j % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..f.len() {
            j1[i] += cur[pad + i] * c;
            j2[i] -= cur[pad + i] * c;
        }
    }
    (j1, j2)
}

fn decomposition() -> Outcome {
    let moll = Mollifier::build(&BumpSpec::default()).expect("bump");
    let dt = 0.05;
    let phi = moll.phi_signal(220.0, dt);
    let signals = [
        SampledSignal::from_real_fn(0.0, dt, 2001, f64::sin),
        SampledSignal::from_fn(0.0, dt, 2001, |t| Complex64::new(0.0, 3.0 * t).exp() / (1.0 + t)),
        SampledSignal::from_real_fn(0.0, dt, 2001, |t| (-0.1 * t).exp() * (2.0 * t).cos()),
    ];
    let mut sum_err = 0.0f64;
    let mut ref_err = 0.0f64;
    for f in &signals {
        for (r, m) in [(1.0, 1u32), (2.0, 2)] {
            let d = decompose(f, &phi, r, m).expect("decompose");
            let (j1, j2) = reference_split(f, &phi, r, m);
            for i in 0..f.len() {
                sum_err = sum_err.max((d.j1.values[i] + d.j2.values[i] - f.values[i]).norm());
                ref_err = ref_err.max((d.j1.values[i] - j1[i]).norm()).max((d.j2.values[i] - j2[i]).norm());
                sum_err = sum_err.max((j1[i] + j2[i] - f.values[i]).norm());
            }
        }
    }
    let mut cs = Vec::new();
    for dt in [0.05, 0.025] {
        let phi = moll.phi_signal(220.0, dt);
        let f = SampledSignal::from_real_fn(0.0, dt, (500.0 / dt) as usize + 1, f64::sin);
        let fm = SampledSignal::from_real_fn(0.0, dt, (1500.0 / dt) as usize, f64::cos);
        let rep = check_lemma21(&f, Some(&fm), &phi, 1, &[1.0, 2.0, 4.0, 8.0], (5.0, 250.0), 200).expect("lemma21");
        cs.push(rep.observed);
    }
    let mass_err = log_grid(1e-3, 1e3, 25).into_iter().map(|y| (poisson_mass(y) - 1.0).abs()).fold(0.0, f64::max);
    let pass = sum_err < 1e-6 && ref_err < 1e-6 && cs.iter().all(|c| c.is_finite()) && drift(cs[0], cs[1]) < 0.1
        && mass_err < 1e-6;
    outcome(
        pass,
        format!(
            "J1+J2-f {:.1e}, vs direct {:.1e}; C {:.4} -> {:.4}; Poisson mass err {:.1e}",
            sum_err, ref_err, cs[0], cs[1], mass_err
        ),
    )
}

fn bridge_check() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * b.abs().max(1.0);
    let mut ok = true;
    let k2 = RateExpr::power_shift(2.0, 1.0, 1.0);
    let fourier = HypothesisSide::new(Side::Fourier, RateExpr::constant(2.0), k2.clone(), f64::INFINITY, 1, 1.0, 0.0)
        .expect("fourier side");
    let lap = bridge::fourier_to_laplace(&fourier, 0.5).expect("conversion");
    for s in [0.0, 1.0, 10.0, 1e3] {
        ok &= close(lap.m_rate.value(s), 4.0) && close(lap.k_rate.value(s), 2.0 * k2.value(s));
    }
    let (cf, cfp, p, m) = (1.5, 0.25, 2.0, 1u32);
    let h = HypothesisSide::new(Side::Laplace, RateExpr::constant(2.0), k2.clone(), p, m, cf, cfp).expect("laplace side");
    let f = bridge::laplace_to_fourier(&h).expect("conversion");
    for s in [0.0, 1.0, 10.0] {
        let want = k2.value(s + 0.5) + cf * 2f64.powf(2.0 - 1.0 / p) / (1.0 + s) + cfp;
        ok &= close(f.m_rate.value(s), 2.0) && close(f.k_rate.value(s), want);
    }
    let h = HypothesisSide::new(Side::Laplace, k2.clone(), k2.clone(), f64::INFINITY, 1, 0.0, 0.0).expect("laplace side");
    let f = bridge::laplace_to_fourier(&h).expect("conversion");
    for s in [0.0, 1.0, 10.0] {
        let k1 = k2.value(s);
        ok &= close(f.k_rate.value(s), k2.value(s + 1.0 / k1));
        ok &= close(f.m_rate.value(s), 2.0 + s + 1.0 / (2.0 + s));
    }
    let rep = bridge::theorem_equivalence_check(&standard_pair(), 1.0, 0.0, &Default::default()).expect("equivalence");
    let c = rep.value("c");
    outcome(ok && c > 0.0 && rep.pass, format!("plug-in examples {}, equivalence c {:.4}", ok, c))
}

fn semigroup() -> Outcome {
    let start = Instant::now();
    let sys = DiagonalSystem::log_spaced(1000, 0.1, 100.0, |x| -1.0 / (2.0 + x), |_| 1.0, |_| 1.0).expect("system");
    let (m, k) = fit_m_k(&sys, &FitWindow::default()).expect("fit");
    let spec = EnvelopeSpec::new(m, k);
    let x = vec![Complex64::new(1.0, 0.0); sys.len()];
    let rep = corollary_check(&sys, &x, &spec, &TimeGrid { horizon: 1e3, ..TimeGrid::default() }).expect("orbit");
    let elapsed = start.elapsed();
    let mut ctx = Ctx::new();
    let mut worst = 0.0f64;
    for i in [0usize, 137, 500, 999] {
        let one = DiagonalSystem::new(vec![sys.xi[i]], vec![sys.a[i]], vec![1.0], vec![1.0], 1.0).expect("mode");
        for t in [0.0, 1.0, 100.0, 1e3] {
            let closed = (sys.a[i] * t).exp() / (Complex64::new(1.0, 0.0) - sys.eigenvalue(i)).norm();
            let v = orbit_norm(&one, &[Complex64::new(1.0, 0.0)], 1, t).expect("orbit");
            worst = worst.max((v - closed).abs() / closed);
        }
    }
    for t in [0.0, 10.0, 1e3] {
        let r = ctx.orbit_norm(&sys, &x, 1, t);
        let v = orbit_norm(&sys, &x, 1, t).expect("orbit");
        worst = worst.max((v - r).abs() / r);
    }
    let (a, b) = (rep.value("weighted"), rep.value("weighted_doubled"));
    outcome(
        rep.pass && a.is_finite() && worst < 1e-12 && within(elapsed, 30.0),
        format!("weighted sup {:.4} -> {:.4} on doubling; closed-form err {:.1e}; {:?}", a, b, worst, elapsed),
    )
}

fn determinism() -> Outcome {
    let cfg = SuiteConfig::default();
    let a = run_suite(&cfg).expect("suite");
    let b = run_suite(&cfg).expect("suite");
    let dir_a = tempdir("a");
    let dir_b = tempdir("b");
    tauberlab::suite::write_suite(&a, &dir_a).expect("write");
    tauberlab::suite::write_suite(&b, &dir_b).expect("write");
    let mut names: Vec<_> = std::fs::read_dir(&dir_a).expect("dir").map(|e| e.expect("entry").file_name()).collect();
    names.sort();
    let same = names
        .iter()
        .all(|n| std::fs::read(dir_a.join(n)).ok() == std::fs::read(dir_b.join(n)).ok());
    let _ = std::fs::remove_dir_all(dir_a.parent().expect("parent"));
    outcome(same && a.pass, format!("{} files byte-identical {}, suite pass {}", names.len(), same, a.pass))
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("tauberlab-acceptance-{}", std::process::id())).join(tag);
    std::fs::create_dir_all(&d).expect("temp dir");
    d
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("roots-of-unity identity", roots_identity),
        ("extremal evaluators", evaluators),
        ("measure bounds suite", lemma42),
        ("extremal checkpoints", extremal_checkpoints),
        ("rate algebra", rate_algebra),
        ("mollifier", mollifier),
        ("decomposition", decomposition),
        ("bridge", bridge_check),
        ("semigroup", semigroup),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {:>2} {:<26} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{} criteria failed", failed);
        std::process::exit(1);
    }
}
