//! The full verification suite with a fixed seed: one CSV per check plus a
//! JSON summary, both byte-for-byte reproducible.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bridge::{theorem_equivalence_check, EquivalenceWindow};
use crate::decomposition::{decompose, poisson_mass};
use crate::error::Result;
use crate::extremal::{
    build_extremal, checkpoint_bounds, make_params, roots_of_unity_closed, roots_of_unity_sum, verify_lemma42,
    Lemma42Grid,
};
use crate::mollifier::{check_derivative_bounds, BumpSpec, Mollifier};
use crate::numeric::log_grid;
use crate::rate::{check_hypotheses, check_k_aux, EnvelopeSpec, InverseOptions, RateExpr};
use crate::report::{point, VerificationReport};
use crate::semigroup::{corollary_check, fit_m_k, DiagonalSystem, FitWindow, TimeGrid};
use crate::signal::SampledSignal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Modes in the random diagonal system.
    pub n_modes: usize,
    /// Orbit horizon for the semigroup check.
    pub horizon: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            n_modes: 1000,
            horizon: 1e3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOutput {
    /// File name to CSV contents.
    pub files: BTreeMap<String, String>,
    pub summary: serde_json::Value,
    pub pass: bool,
}

/// `M = 2`, `K(s) = 2 + s`.
pub fn standard_pair() -> EnvelopeSpec {
    EnvelopeSpec::new(RateExpr::constant(2.0), RateExpr::power_shift(2.0, 1.0, 1.0))
}

fn roots_check(rng: &mut ChaCha8Rng) -> VerificationReport {
    let mut rep = VerificationReport::new("roots_of_unity");
    let mut worst = (0.0f64, f64::NAN);
    for k in 1..=50u32 {
        let mut k_worst = 0.0f64;
        let mut count = 0;
        while count < 100 {
            // inside the unit disk the f64 atom sum is well conditioned; outside
            // it cancels down to (k+1)/z^{k+1} and needs extended precision
            let z = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
            if (z.powu(k + 1) - 1.0).norm() <= 1e-3 {
                continue;
            }
            count += 1;
            let a = roots_of_unity_sum(k, z);
            let b = roots_of_unity_closed(k, z);
            k_worst = k_worst.max((a - b).norm() / b.norm());
        }
        rep.row(format!("k={}", k), k as f64, k_worst, 1e-9, 1e-9 - k_worst, k_worst < 1e-9);
        if k_worst > worst.0 {
            worst = (k_worst, k as f64);
        }
    }
    rep.observe("max_rel_err", worst.0, point(worst.1), worst.0 < 1e-9);
    rep.observed = worst.0;
    rep.pass = worst.0 < 1e-9;
    rep
}

fn envelope_table(spec: &EnvelopeSpec) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("envelope");
    let opts = InverseOptions::default();
    let mut ts = vec![0.0];
    ts.extend(log_grid(0.1, 1e3, 64));
    for t in ts {
        let e = spec.envelope(t, opts)?;
        rep.row("envelope", t, e, spec.w_mk(t, opts)?, 0.0, e > 0.0 && e <= 1.0);
    }
    rep.pass = rep.rows.iter().all(|r| r.pass);
    Ok(rep)
}

fn decomposition_check(rng: &mut ChaCha8Rng, m: &Mollifier) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("decomposition");
    let dt = 0.05;
    let phi = m.phi_signal(60.0, dt);
    let amps: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.1..3.0), rng.gen_range(0.0..6.3)))
        .collect();
    let f = SampledSignal::from_real_fn(0.0, dt, 4001, |t| amps.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum());
    let mut worst = 0.0f64;
    for r in [1.0, 4.0] {
        let d = decompose(&f, &phi, r, 2)?;
        let res = f
            .values
            .iter()
            .zip(d.j1.values.iter().zip(&d.j2.values))
            .map(|(a, (b, c))| (a - b - c).norm())
            .fold(0.0, f64::max);
        rep.row("split_residual", r, res, 1e-6, 1e-6 - res, res < 1e-6);
        worst = worst.max(res);
    }
    let mut mass_err = 0.0f64;
    for y in log_grid(1e-3, 1e3, 13) {
        let e = (poisson_mass(y) - 1.0).abs();
        rep.row("poisson_mass", y, poisson_mass(y), 1.0, 1e-6 - e, e < 1e-6);
        mass_err = mass_err.max(e);
    }
    rep.observe("split_residual", worst, None, worst < 1e-6);
    rep.observe("poisson_mass_err", mass_err, None, mass_err < 1e-6);
    rep.pass = rep.rows.iter().all(|r| r.pass);
    rep.observed = worst;
    Ok(rep)
}

/// Random log-spaced frequencies with `a_n = −u_n/(2+ξ_n)`, `u_n ∈ [0.5, 1]`.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize) -> Result<DiagonalSystem> {
    let mut xi: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-1.0..2.0))).collect();
    xi.sort_by(f64::total_cmp);
    xi.dedup();
    let a = xi.iter().map(|x| -rng.gen_range(0.5..1.0) / (2.0 + x)).collect();
    let p1 = xi.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
    let p2 = vec![1.0; xi.len()];
    DiagonalSystem::new(xi, a, p1, p2, 1.0)
}

/// The generator behind every randomized check.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Runs every check. Contents depend only on `cfg`.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut rng = seeded_rng(cfg.seed);
    let spec = standard_pair();
    let mut reports: Vec<VerificationReport> = Vec::new();

    reports.push(check_hypotheses(&spec, 1e3, 128)?);
    reports.push(check_k_aux(&spec, 100.0, 128, InverseOptions::default())?);
    reports.push(envelope_table(&spec)?);

    let moll = Mollifier::build(&BumpSpec::default())?;
    reports.push(check_derivative_bounds(&moll, 6)?.report);
    reports.push(decomposition_check(&mut rng, &moll)?);

    reports.push(roots_check(&mut rng));
    for k in [20u32, 40] {
        let p = make_params(k, 1.0, 2.0, 1.0, &spec)?;
        reports.push(verify_lemma42(&spec, &p, &Lemma42Grid::default())?);
    }
    let fs = build_extremal(&spec, 1.0, 2.0, 1.0, 1.0, 4)?;
    reports.push(checkpoint_bounds(&fs)?);

    reports.push(theorem_equivalence_check(&spec, 1.0, 0.0, &EquivalenceWindow::default())?);

    let sys = random_system(&mut rng, cfg.n_modes)?;
    let (m, k) = fit_m_k(&sys, &FitWindow::default())?;
    let sg_spec = EnvelopeSpec::new(m, k);
    let x: Vec<Complex64> = (0..sys.len())
        .map(|_| Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let grid = TimeGrid {
        horizon: cfg.horizon,
        ..TimeGrid::default()
    };
    reports.push(corollary_check(&sys, &x, &sg_spec, &grid)?);

    let mut files = BTreeMap::new();
    let mut checks = Vec::new();
    for r in &reports {
        files.insert(format!("{}.csv", r.name), r.to_csv());
        checks.push(json!({
            "name": r.name,
            "pass": r.pass,
            "observed": r.observed,
            "observations": r.observations,
            "notes": r.notes,
        }));
    }
    let pass = reports.iter().all(|r| r.pass);
    let summary = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "pass": pass,
        "checks": checks,
    });
    Ok(SuiteOutput { files, summary, pass })
}

/// Writes every CSV and `summary.json` into `dir`.
pub fn write_suite(out: &SuiteOutput, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, body) in &out.files {
        std::fs::write(dir.join(name), body)?;
    }
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&out.summary)? + "\n")?;
    Ok(())
}
