use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lemma::{ln_band_scale, ln_band_scale_m};
use super::measure::{make_params, MeasureParams};
use crate::error::{Error, Result};
use crate::numeric::{linear_grid, log_grid, LogComplex};
use crate::rate::EnvelopeSpec;
use crate::report::{point, VerificationReport};

/// Smallest `k` tried for the first measure.
pub const DEFAULT_K1: u32 = 20;
/// Largest `k` the schedule will try before giving up.
pub const K_LIMIT: u32 = 1_000_000;

/// `f = amplitude·Σ_n Lμ_n`, together with its checkpoints `t_n = k_n/δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalFunctionSpec {
    pub eps0: f64,
    pub amplitude: f64,
    pub measures: Vec<MeasureParams>,
    pub checkpoints: Vec<Checkpoint>,
    /// Requested number of measures was reached.
    pub complete: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: f64,
    pub r: f64,
    pub eps: f64,
}

impl ExtremalFunctionSpec {
    pub fn len(&self) -> usize {
        self.measures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measures.is_empty()
    }

    pub fn with_amplitude(mut self, a: f64) -> Self {
        self.amplitude = a;
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn disjoint(lo: (f64, f64), hi: (f64, f64)) -> bool {
    lo.1 < hi.0
}

/// First `k ≥ k_min` for which `R` is defined and `R − 2δ > 0`.
fn first_measure(spec: &EnvelopeSpec, delta: f64, beta: f64, c1: f64, k_min: u32) -> Result<MeasureParams> {
    let mut k = k_min.max(1);
    loop {
        match make_params(k, delta, beta, c1, spec) {
            Ok(p) if p.r_band().0 > 0.0 => return Ok(p),
            Ok(_) | Err(Error::Domain(_)) if k < K_LIMIT => k = (k + 1).max(k + k / 8),
            Ok(_) => return Err(Error::Domain(format!("R stays below 2 delta up to k = {}", k))),
            Err(e) => return Err(e),
        }
    }
}

/// [`build_extremal_from`] starting at `k = 20`.
pub fn build_extremal(
    spec: &EnvelopeSpec,
    delta: f64,
    beta: f64,
    c1: f64,
    eps0: f64,
    n_max: usize,
) -> Result<ExtremalFunctionSpec> {
    build_extremal_from(spec, delta, beta, c1, eps0, n_max, DEFAULT_K1)
}

/// Chooses `k_1 < k_2 < …` with `k_{n+1} ≥ 4k_n`, raised one at a time until
/// both the `R`-bands and the `t`-bands are pairwise disjoint. Stops early,
/// keeping what was built, when `R` leaves double range.
pub fn build_extremal_from(
    spec: &EnvelopeSpec,
    delta: f64,
    beta: f64,
    c1: f64,
    eps0: f64,
    n_max: usize,
    k_min: u32,
) -> Result<ExtremalFunctionSpec> {
    if !(eps0 > 0.0) || n_max == 0 {
        return Err(Error::InvalidParameter("need eps0 > 0 and n_max >= 1".into()));
    }
    let mut diagnostics = Vec::new();
    let growth = (1..=6)
        .map(|i| 10f64.powi(i))
        .map(|s| spec.mk_rate(s) / (2.0 + s).ln())
        .collect::<Vec<_>>();
    if growth[5] < 2.0 * growth[0] {
        diagnostics.push(format!(
            "M_K(s)/log(2+s) grows from {:.3} to {:.3} on [10, 1e6]: not clearly unbounded",
            growth[0], growth[5]
        ));
    }
    let first = first_measure(spec, delta, beta, c1, k_min)?;
    if first.k != k_min {
        diagnostics.push(format!("reduced resolution: k_1 raised from {} to {}", k_min, first.k));
    }
    let mut measures = vec![first];
    let mut complete = true;
    while measures.len() < n_max {
        let prev = measures.last().unwrap();
        let mut k = prev.k.saturating_mul(4);
        let next = loop {
            if k > K_LIMIT {
                break None;
            }
            match make_params(k, delta, beta, c1, spec) {
                Ok(p) => {
                    if measures.iter().all(|q| disjoint(q.r_band(), p.r_band()) && disjoint(q.t_band(), p.t_band())) {
                        break Some(p);
                    }
                    k += 1;
                }
                Err(e) => {
                    diagnostics.push(format!("stopped at n = {}: k = {}: {}", measures.len() + 1, k, e));
                    break None;
                }
            }
        };
        match next {
            Some(p) => measures.push(p),
            None => {
                complete = false;
                break;
            }
        }
    }
    let checkpoints = measures
        .iter()
        .enumerate()
        .map(|(i, p)| Checkpoint {
            t: p.k as f64 / p.delta,
            r: p.r,
            eps: eps0 * 0.5f64.powi(i as i32 + 1),
        })
        .collect();
    Ok(ExtremalFunctionSpec {
        eps0,
        amplitude: 1.0,
        measures,
        checkpoints,
        complete,
        diagnostics,
    })
}

/// Sum of log-form complex numbers, returned in log form.
pub fn sum_log(terms: &[LogComplex]) -> LogComplex {
    let top = terms.iter().map(|t| t.ln_abs).fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return LogComplex::ZERO;
    }
    let s: Complex64 = terms
        .iter()
        .map(|t| Complex64::from_polar((t.ln_abs - top).exp(), t.arg))
        .sum();
    LogComplex::from_complex(s).scale_ln(top)
}

/// `f(t)` in log form.
pub fn eval_extremal_log(fspec: &ExtremalFunctionSpec, t: f64) -> Result<LogComplex> {
    let terms = fspec
        .measures
        .iter()
        .map(|p| p.laplace_log(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_log(&terms).scale_ln(fspec.amplitude.ln()))
}

/// `f(t) = amplitude·Σ Lμ_n(t)`.
pub fn eval_extremal(fspec: &ExtremalFunctionSpec, t: f64) -> Result<Complex64> {
    let terms = fspec
        .measures
        .iter()
        .map(|p| p.laplace_log(t))
        .collect::<Result<Vec<_>>>()?;
    let s = sum_log(&terms);
    s.to_complex()
        .map(|z| z * fspec.amplitude)
        .ok_or_else(|| Error::Overflow(format!("f({}) out of range", t)))
}

/// `f'(t)`.
pub fn eval_extremal_deriv(fspec: &ExtremalFunctionSpec, t: f64) -> Result<Complex64> {
    let terms = fspec
        .measures
        .iter()
        .map(|p| p.laplace_deriv_log(t))
        .collect::<Result<Vec<_>>>()?;
    sum_log(&terms)
        .to_complex()
        .map(|z| z * fspec.amplitude)
        .ok_or_else(|| Error::Overflow(format!("f'({}) out of range", t)))
}

/// `f̂(z) = amplitude·Σ Cμ_n(z)`.
pub fn eval_extremal_laplace(fspec: &ExtremalFunctionSpec, z: Complex64) -> Result<Complex64> {
    let terms = fspec
        .measures
        .iter()
        .map(|p| p.cauchy_transform_log(z))
        .collect::<Result<Vec<_>>>()?;
    sum_log(&terms)
        .to_complex()
        .map(|v| v * fspec.amplitude)
        .ok_or_else(|| Error::Overflow(format!("f^({}) out of range", z)))
}

/// `f̂(re + i(R_n + dy))` in log form, keeping `dy` exact for the n-th term.
pub fn laplace_near(fspec: &ExtremalFunctionSpec, n: usize, re: f64, dy: f64) -> Result<LogComplex> {
    let rn = fspec.measures[n].r;
    let terms = fspec
        .measures
        .iter()
        .map(|p| p.cauchy_near(re, (rn - p.r) + dy))
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_log(&terms).scale_ln(fspec.amplitude.ln()))
}

/// Per checkpoint: `R_n|f(t_n)|` against `c_n − ε₀Σ_{j≠n}2^{−j}` with
/// `c_n = R_n|amplitude·Lμ_n(t_n)|`. Observation `c` is the smallest
/// `R_n|f(t_n)|`; `cross` is the largest `R_n|Lμ_j(t_n)|/ε_j`, `j ≠ n`.
pub fn checkpoint_bounds(fspec: &ExtremalFunctionSpec) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("extremal_checkpoints");
    let amp = fspec.amplitude.abs();
    let mut c_min = (f64::INFINITY, f64::NAN);
    let mut cross = (0.0f64, f64::NAN);
    for (n, cp) in fspec.checkpoints.iter().enumerate() {
        let ln_r = cp.r.ln();
        let terms = fspec
            .measures
            .iter()
            .map(|p| p.laplace_log(cp.t))
            .collect::<Result<Vec<_>>>()?;
        let lhs = amp * sum_log(&terms).scale_ln(ln_r).abs();
        let own = fspec.measures[n].laplace_log(cp.t)?.scale_ln(ln_r).abs() * amp;
        let tail: f64 = fspec
            .checkpoints
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != n)
            .map(|(_, c)| c.eps)
            .sum();
        let rhs = own - amp * tail;
        for (j, p) in fspec.measures.iter().enumerate() {
            if j != n {
                let v = p.laplace_log(cp.t)?.scale_ln(ln_r).abs() / fspec.checkpoints[j].eps;
                if v > cross.0 {
                    cross = (v, cp.t);
                }
            }
        }
        rep.row(format!("checkpoint_{}", n + 1), cp.t, lhs, rhs, lhs - rhs, lhs >= rhs && lhs > 0.0);
        if lhs < c_min.0 {
            c_min = (lhs, cp.t);
        }
    }
    let all_rows = rep.rows.iter().all(|r| r.pass);
    rep.observe("c", c_min.0, point(c_min.1), c_min.0 > 0.0 && all_rows);
    rep.observe("cross", cross.0, point(cross.1), cross.0.is_finite());
    rep.observed = c_min.0;
    rep.worst_point = point(c_min.1);
    rep.pass = c_min.0 > 0.0 && all_rows;
    Ok(rep)
}

/// Sampling for [`fhat_scan`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FhatGrid {
    pub n_re: usize,
    pub n_im: usize,
    /// Points per gap between consecutive bands (log-spaced).
    pub n_gap: usize,
}

impl Default for FhatGrid {
    fn default() -> Self {
        FhatGrid {
            n_re: 9,
            n_im: 41,
            n_gap: 32,
        }
    }
}

/// Observation `C` is the sup of `|f̂(z)|·R_n/(M_K^{1/2}K^{γ/c₁})(|Im z|)`
/// over the bands, `C_m` the same with `M^{1/2}`; `off_band` is the sup of
/// `|f̂|` between bands.
pub fn fhat_scan(spec: &EnvelopeSpec, fspec: &ExtremalFunctionSpec, grid: &FhatGrid) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("extremal_fhat");
    let mut c = (0.0f64, f64::NAN);
    let mut cm = (0.0f64, f64::NAN);
    let mut off = (0.0f64, f64::NAN);
    let re_fracs = linear_grid(0.0, 1.0, grid.n_re);
    for (n, p) in fspec.measures.iter().enumerate() {
        let rhs_of = |y: f64| ln_band_scale(spec, p.gamma, p.c1, y);
        let rhs_m = |y: f64| ln_band_scale_m(spec, p.gamma, p.c1, y);
        for &dy in &linear_grid(-2.0 * p.delta, 2.0 * p.delta, grid.n_im) {
            let y = (p.r + dy).abs();
            let edge = 1.0 / spec.m_rate.value(y);
            for &f in &re_fracs {
                let z = laplace_near(fspec, n, -f * edge, dy)?.scale_ln(p.r.ln());
                let v = z.scale_ln(-rhs_of(y)).abs();
                if v > c.0 {
                    c = (v, p.r + dy);
                }
                let v = z.scale_ln(-rhs_m(y)).abs();
                if v > cm.0 {
                    cm = (v, p.r + dy);
                }
            }
        }
        let hi = fspec.measures.get(n + 1).map(|q| q.r_band().0);
        let lo = p.r_band().1;
        let gap = match hi {
            Some(h) if h > lo * 1.0001 => log_grid(lo * 1.0001, h / 1.0001, grid.n_gap),
            Some(_) => vec![],
            None => log_grid(lo * 1.0001, lo * 1e6, grid.n_gap),
        };
        for y in gap {
            let edge = 1.0 / spec.m_rate.value(y);
            for &f in &re_fracs {
                let v = laplace_near(fspec, n, -f * edge, y - p.r)?.abs();
                if v > off.0 {
                    off = (v, y);
                }
            }
        }
    }
    rep.observe("C", c.0, point(c.1), c.0.is_finite() && c.0 > 0.0);
    rep.observe("C_m", cm.0, point(cm.1), cm.0.is_finite());
    rep.observe("off_band", off.0, point(off.1), off.0.is_finite());
    rep.observed = c.0;
    rep.worst_point = point(c.1);
    rep.pass = rep.observations.iter().all(|o| o.pass);
    Ok(rep)
}

/// Largest `|f'(t)|` over `ts`.
pub fn derivative_sup(fspec: &ExtremalFunctionSpec, ts: &[f64]) -> Result<(f64, f64)> {
    let mut best = (0.0, f64::NAN);
    for &t in ts {
        let v = eval_extremal_deriv(fspec, t)?.norm();
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}

/// For each `c₁` builds the extremal function with `horizon` measures and
/// records `min_n M_K^{-1}(c₁t_n)|f(t_n)|` (row `lhs`) against the largest
/// value (row `rhs`). `margin` is `c₁ − γ₀`: positive means the regime
/// where the rate is expected to fail.
pub fn c1_threshold_scan(
    spec: &EnvelopeSpec,
    gamma0: f64,
    c1_list: &[f64],
    delta: f64,
    beta: f64,
    horizon: usize,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("c1_threshold");
    let mut worst = (f64::INFINITY, f64::NAN);
    for &c1 in c1_list {
        let fs = build_extremal(spec, delta, beta, c1, 1.0, horizon)?;
        let cb = checkpoint_bounds(&fs)?;
        let lo = cb.rows.iter().map(|r| r.lhs).fold(f64::INFINITY, f64::min);
        let hi = cb.rows.iter().map(|r| r.lhs).fold(0.0, f64::max);
        rep.row(format!("c1={}", c1), c1, lo, hi, c1 - gamma0, lo > 0.0);
        for d in fs.diagnostics.iter().filter(|d| d.starts_with("reduced")) {
            rep.note(format!("c1 = {}: {}", c1, d));
        }
        if !fs.complete {
            rep.note(format!("c1 = {}: only {} of {} checkpoints built", c1, fs.len(), horizon));
        }
        if c1 > gamma0 && lo < worst.0 {
            worst = (lo, c1);
        }
    }
    let pass = rep.rows.iter().all(|r| r.pass);
    rep.observe("lower_bound_above_gamma0", worst.0, point(worst.1), worst.0 > 0.0);
    rep.observed = worst.0;
    rep.worst_point = point(worst.1);
    rep.pass = pass;
    Ok(rep)
}
