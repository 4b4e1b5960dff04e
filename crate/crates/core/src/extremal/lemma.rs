use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::measure::MeasureParams;
use crate::error::Result;
use crate::numeric::{linear_grid, LogComplex};
use crate::rate::{EnvelopeSpec, InverseOptions};
use crate::report::{point, VerificationReport};

/// Solution of `1 − x = e^{−γx}` for `γ = 1.1`: above this value of
/// `1/(δM)` the in-band Cauchy constant grows geometrically in `k`.
pub const GAMMA_X_LIMIT: f64 = 0.1767;

/// Sampling of the `t` and `z` grids used by [`verify_lemma42`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma42Grid {
    /// Points on `[0, 3A]`.
    pub n_t: usize,
    /// Extra points inside the `t`-band.
    pub n_band: usize,
    /// Points across `Re z ∈ [−1/M, 0]`.
    pub n_re: usize,
    /// Points across `Im z` in the band.
    pub n_im: usize,
    /// Off-band heights are sampled at `R ± 2δ·2^i` for `i < n_off`.
    pub n_off: usize,
}

impl Default for Lemma42Grid {
    fn default() -> Self {
        Lemma42Grid {
            n_t: 400,
            n_band: 200,
            n_re: 9,
            n_im: 41,
            n_off: 24,
        }
    }
}

impl Lemma42Grid {
    pub fn doubled(&self) -> Self {
        Lemma42Grid {
            n_t: 2 * self.n_t,
            n_band: 2 * self.n_band,
            n_re: 2 * self.n_re - 1,
            n_im: 2 * self.n_im - 1,
            n_off: self.n_off,
        }
    }
}

fn ln_mk_inverse(spec: &EnvelopeSpec, t: f64) -> Option<f64> {
    let inv = spec
        .mk_expr()
        .right_inverse(t, InverseOptions { tol: 1e-10, cap: super::measure::R_CAP })
        .ok()?;
    if inv.saturated {
        None
    } else {
        Some(inv.value.max(1.0).ln())
    }
}

/// `ln(M_K^{1/2}K^{γ/c₁})(y)`, the normalisation reached by the proof of the
/// band estimate. It differs from `M^{1/2}K^{γ/c₁}` by `(log K)^{1/2}`.
pub fn ln_band_scale(spec: &EnvelopeSpec, gamma: f64, c1: f64, y: f64) -> f64 {
    0.5 * spec.mk_expr().ln_value(y) + gamma / c1 * spec.k_rate.ln_value(y)
}

/// `ln(M^{1/2}K^{γ/c₁})(y)`.
pub fn ln_band_scale_m(spec: &EnvelopeSpec, gamma: f64, c1: f64, y: f64) -> f64 {
    0.5 * spec.m_rate.ln_value(y) + gamma / c1 * spec.k_rate.ln_value(y)
}

/// Samples `t ∈ [0, 3A]` with extra density in the `t`-band.
pub fn t_points(p: &MeasureParams, grid: &Lemma42Grid) -> Vec<f64> {
    let (lo, hi) = p.t_band();
    let mut ts = linear_grid(0.0, 3.0 * p.a, grid.n_t);
    ts.extend(linear_grid(lo, hi, grid.n_band));
    ts.push(p.k as f64 / p.delta);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Checks the three transform bounds of the measure on sampled grids.
///
/// Observations: `c44 = R|Lμ(k/δ)|`, `C43`/`eps43` (in- and off-band
/// `|Lμ|·max(R, M_K^{-1}(c₁t))`), `eps43_far` (`t ≥ 2A`), `C42`/`eps42`
/// for `L'μ`, `C41`/`eps41` for `Cμ` normalised by
/// `M_K^{1/2}K^{γ/c₁}/R` (`C41_m` uses `M^{1/2}` instead), and `remark_y`
/// (that ratio at the left edge of `Ω_M` on `Im z = R`) with
/// `remark_y_min` (its minimum along the line).
pub fn verify_lemma42(spec: &EnvelopeSpec, p: &MeasureParams, grid: &Lemma42Grid) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new(format!("lemma42_k{}", p.k));
    let ln_r = p.r.ln();
    let (tb_lo, tb_hi) = p.t_band();
    let tk = p.k as f64 / p.delta;
    let c44 = p.laplace_log(tk)?.scale_ln(ln_r).abs();
    rep.observe("c44", c44, point(tk), c44 > 0.0);

    let mut c43 = (0.0, 0.0);
    let mut eps43 = (0.0, 0.0);
    let mut far = (0.0, f64::NAN);
    let mut skipped = 0usize;
    let mut c42 = (0.0, 0.0);
    let mut eps42 = (0.0, 0.0);
    for &t in &t_points(p, grid) {
        let lt = p.laplace_log(t)?;
        let dl = p.laplace_deriv_log(t)?.abs();
        let in_band = t >= tb_lo && t <= tb_hi;
        if in_band {
            let v = lt.scale_ln(ln_r).abs();
            if v > c43.0 {
                c43 = (v, t);
            }
            if dl > c42.0 {
                c42 = (dl, t);
            }
            continue;
        }
        if dl > eps42.0 {
            eps42 = (dl, t);
        }
        let ln_inv = match ln_mk_inverse(spec, p.c1 * t) {
            Some(x) => x.max(ln_r),
            None if t < tb_lo => ln_r,
            None => {
                skipped += 1;
                continue;
            }
        };
        let v = lt.scale_ln(ln_inv).abs();
        if v > eps43.0 {
            eps43 = (v, t);
        }
        if t >= 2.0 * p.a && (v > far.0 || far.1.is_nan()) {
            far = (v, t);
        }
    }
    let grows = spec.mk_rate(1e6) / (2e6f64).ln() > 2.0 * spec.mk_rate(10.0) / 12f64.ln();
    if !grows {
        rep.note("M_K(s)/log(2+s) does not grow on [10, 1e6]: eps43 off the band is not expected to be small");
    }
    rep.observe("C43", c43.0, point(c43.1), c43.0.is_finite());
    rep.observe("eps43", eps43.0, point(eps43.1), eps43.0.is_finite());
    rep.observe("eps43_far", far.0, point(far.1), far.0.is_finite());
    rep.observe("C42", c42.0, point(c42.1), c42.0.is_finite());
    rep.observe("eps42", eps42.0, point(eps42.1), eps42.0.is_finite());
    if skipped > 0 {
        rep.note(format!(
            "{} far-field t points skipped: M_K^-1(c1 t) beyond double range",
            skipped
        ));
    }

    // Cauchy transform on the closure of Ω_M near Im z = R.
    let mut c41 = (0.0, 0.0);
    let mut c41m = (0.0, 0.0);
    for &dy in &linear_grid(-2.0 * p.delta, 2.0 * p.delta, grid.n_im) {
        let y = p.r + dy;
        let edge = 1.0 / spec.m_rate.value(y.abs());
        let lr = ln_band_scale(spec, p.gamma, p.c1, y.abs());
        let lm = ln_band_scale_m(spec, p.gamma, p.c1, y.abs());
        for &f in &linear_grid(0.0, 1.0, grid.n_re) {
            let c = p.cauchy_near(-f * edge, dy)?.scale_ln(ln_r);
            let v = c.scale_ln(-lr).abs();
            if v > c41.0 {
                c41 = (v, y);
            }
            let v = c.scale_ln(-lm).abs();
            if v > c41m.0 {
                c41m = (v, y);
            }
        }
    }
    rep.observe("C41", c41.0, point(c41.1), c41.0.is_finite());
    rep.observe("C41_m", c41m.0, point(c41m.1), c41m.0.is_finite());
    let x = 1.0 / (p.delta * spec.m_rate.value(p.r));
    if x > GAMMA_X_LIMIT {
        rep.note(format!(
            "1/(delta M(R)) = {:.3} exceeds {}: C41 grows with k at this delta",
            x, GAMMA_X_LIMIT
        ));
    }

    let mut eps41 = (0.0, 0.0);
    for i in 0..grid.n_off {
        let off = 2.0 * p.delta * 2f64.powi(i as i32) * 1.0001;
        for dy in [off, -off] {
            let y = p.r + dy;
            if y < 0.0 {
                continue;
            }
            let edge = 1.0 / spec.m_rate.value(y);
            for &f in &linear_grid(0.0, 1.0, grid.n_re) {
                let v = p.cauchy_near(-f * edge, dy)?.abs();
                if v > eps41.0 {
                    eps41 = (v, y);
                }
            }
        }
    }
    rep.observe("eps41", eps41.0, point(eps41.1), eps41.0.is_finite());

    let edge = 1.0 / spec.m_rate.value(p.r);
    let lr = ln_band_scale(spec, p.gamma, p.c1, p.r);
    let mut line_min = f64::INFINITY;
    for &f in &linear_grid(0.0, 1.0, grid.n_re) {
        let v = p.cauchy_near(-f * edge, 0.0)?.scale_ln(ln_r - lr).abs();
        line_min = line_min.min(v);
    }
    let ry = p.cauchy_near(-edge, 0.0)?.scale_ln(ln_r - lr).abs();
    rep.observe("remark_y", ry, point(p.r), ry > 0.0);
    rep.observe("remark_y_min", line_min, point(p.r), line_min > 0.0);

    rep.observed = c44;
    rep.worst_point = point(tk);
    rep.pass = rep.observations.iter().all(|o| o.pass);
    Ok(rep)
}

/// `|Cμ|` at `Im z = R + dy` on the left edge of `Ω_M`, in log form.
pub fn cauchy_edge(spec: &EnvelopeSpec, p: &MeasureParams, dy: f64) -> Result<LogComplex> {
    let edge = 1.0 / spec.m_rate.value((p.r + dy).abs());
    p.cauchy_offset_log(Complex64::new(p.delta - edge, dy))
}
