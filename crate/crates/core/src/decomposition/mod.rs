//! The splitting `f = J₁ + J₂` with `J₁ = (δ−φ_R)^{*m}*f`, and the
//! estimates on each part: the Poisson majorant for `J₁`, the Carleson curve
//! integral, and the Fourier-side majorant for `J₂`.

mod convolve;
mod poisson;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use convolve::{convolve, convolve_direct, convolve_fft, DIRECT_LIMIT};
pub use poisson::{poisson_at, poisson_convolve, poisson_kernel, poisson_mass};

use crate::error::{Error, Result};
use crate::mollifier::{scale, BumpSpec};
use crate::numeric::{binomial, log_sum_exp};
use crate::rate::{EnvelopeSpec, InverseOptions};
use crate::report::VerificationReport;
use crate::signal::SampledSignal;

/// Kernels are cut where they fall below this fraction of their peak.
pub const KERNEL_CUTOFF: f64 = 1e-14;

/// `φ_R` sampled on a grid of step `dt`, centred at index `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledKernel {
    pub values: Vec<Complex64>,
    pub center: usize,
    pub dt: f64,
    /// Mass of `|φ|` dropped by the cut (before scaling; scale invariant).
    pub dropped_mass: f64,
}

impl ScaledKernel {
    pub fn half_width(&self) -> f64 {
        self.center as f64 * self.dt
    }
}

/// Cuts `phi` (sampled on a symmetric grid) where `|φ| < KERNEL_CUTOFF·peak`
/// and resamples `φ_R` onto step `dt`.
pub fn scaled_kernel(phi: &SampledSignal, r: f64, dt: f64) -> Result<ScaledKernel> {
    let peak = phi.sup_norm();
    if !(peak > 0.0) {
        return Err(Error::InvalidParameter("kernel is identically zero".into()));
    }
    let mut reach = 0.0f64;
    let mut dropped = 0.0;
    for (i, v) in phi.values.iter().enumerate() {
        let t = phi.t(i).abs();
        if v.norm() >= KERNEL_CUTOFF * peak {
            reach = reach.max(t);
        }
    }
    for (i, v) in phi.values.iter().enumerate() {
        if phi.t(i).abs() > reach {
            dropped += v.norm() * phi.dt;
        }
    }
    let k = ((reach / r) / dt).ceil() as usize;
    let sig = scale(phi, r, -(k as f64) * dt, dt, 2 * k + 1)?;
    Ok(ScaledKernel { values: sig.values, center: k, dt, dropped_mass: dropped })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompResult {
    pub j1: SampledSignal,
    pub j2: SampledSignal,
    pub r: f64,
    pub m: u32,
    /// Beyond this time the zero extension of `f` past its last sample
    /// contaminates `J₁`, `J₂`.
    pub valid_until: f64,
    pub dropped_mass: f64,
}

/// `φ_R^{*j} * f` for `j = 0..=m` on the grid of `f` (zero-extended on
/// both sides). Returns the powers and the kernel used.
fn convolution_powers(f: &SampledSignal, phi: &SampledSignal, r: f64, m: u32) -> Result<(Vec<Vec<Complex64>>, ScaledKernel)> {
    let ker = scaled_kernel(phi, r, f.dt)?;
    let pad = m as usize * ker.center;
    let n = f.len();
    let mut cur = vec![Complex64::new(0.0, 0.0); n + 2 * pad];
    cur[pad..pad + n].copy_from_slice(&f.values);
    let mut powers = vec![cur.clone()];
    for _ in 0..m {
        cur = convolve(&cur, &ker.values, ker.center, f.dt);
        powers.push(cur.clone());
    }
    let powers = powers.into_iter().map(|p| p[pad..pad + n].to_vec()).collect();
    Ok((powers, ker))
}

/// Splits `f` into `J₁ = Σ_{j=0}^m C(m,j)(−1)^j φ_R^{*j}*f` and
/// `J₂ = −Σ_{j=1}^m C(m,j)(−1)^j φ_R^{*j}*f` by repeated discrete
/// convolution. `f` is taken to vanish outside its samples.
pub fn decompose(f: &SampledSignal, phi: &SampledSignal, r: f64, m: u32) -> Result<DecompResult> {
    if m < 1 {
        return Err(Error::InvalidParameter("convolution power m must be at least 1".into()));
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("R must be positive, got {}", r)));
    }
    let (powers, ker) = convolution_powers(f, phi, r, m)?;
    let n = f.len();
    let mut j2 = vec![Complex64::new(0.0, 0.0); n];
    for (j, p) in powers.iter().enumerate().skip(1) {
        let c = -binomial(m, j as u32) * if j % 2 == 0 { 1.0 } else { -1.0 };
        for (acc, v) in j2.iter_mut().zip(p) {
            *acc += v * c;
        }
    }
    let j1: Vec<Complex64> = f.values.iter().zip(&j2).map(|(fv, b)| fv - b).collect();
    let mk = |values| SampledSignal { t0: f.t0, dt: f.dt, values, deriv_order: f.deriv_order };
    Ok(DecompResult {
        j1: mk(j1),
        j2: mk(j2),
        r,
        m,
        valid_until: f.t_end() - m as f64 * ker.half_width(),
        dropped_mass: ker.dropped_mass,
    })
}

/// `m`-th derivative by repeated central differences.
fn nth_derivative(f: &SampledSignal, m: u32) -> SampledSignal {
    (0..m).fold(f.clone(), |g, _| g.derivative())
}

/// Observed constant `C = sup R^m|J₁(t,R)| / (P_{1/R}*|f^{(m)}|)(t)` over
/// `R ∈ r_list` and grid points `t` in `window`. `fm` is `f^{(m)}` if known
/// (otherwise differenced from `f`). At most `max_points` points per `R`.
pub fn check_lemma21(
    f: &SampledSignal,
    fm: Option<&SampledSignal>,
    phi: &SampledSignal,
    m: u32,
    r_list: &[f64],
    window: (f64, f64),
    max_points: usize,
) -> Result<VerificationReport> {
    let owned;
    let fm = match fm {
        Some(g) => g,
        None => {
            owned = nth_derivative(f, m);
            &owned
        }
    };
    let absfm = fm.map(|z| Complex64::new(z.norm(), 0.0));
    let mut rep = VerificationReport::new("lemma21");
    let mut worst = (0.0f64, None);
    for &r in r_list {
        let d = decompose(f, phi, r, m)?;
        let idx: Vec<usize> = (0..f.len()).filter(|&i| f.t(i) >= window.0 && f.t(i) <= window.1).collect();
        let stride = idx.len().div_ceil(max_points.max(1)).max(1);
        for &i in idx.iter().step_by(stride) {
            let t = f.t(i);
            if t > d.valid_until {
                rep.skipped += 1;
                continue;
            }
            let maj = poisson_at(&absfm, 1.0 / r, t);
            let lhs = r.powi(m as i32) * d.j1.values[i].norm();
            if maj < 1e-30 {
                rep.skipped += 1;
                continue;
            }
            let ratio = lhs / maj;
            rep.row(&format!("R={}", r), t, lhs, maj, ratio, ratio.is_finite());
            if ratio > worst.0 {
                worst = (ratio, Some(t));
            }
        }
    }
    rep.observed = worst.0;
    rep.worst_point = worst.1;
    rep.pass = worst.0.is_finite() && !rep.rows.is_empty();
    rep.observe("C", worst.0, worst.1, rep.pass);
    Ok(rep)
}

/// Observed `sup_t R(t)^m |J₁(t, R(t))|` with `R(t) = w_{M_K}(c₁t)`, for the
/// times in `ts`. Times whose scale is not resolved by the grid of `f`
/// (`R·dt > 1`) are skipped.
pub fn final_j1_scan(
    f: &SampledSignal,
    phi: &SampledSignal,
    spec: &EnvelopeSpec,
    ts: &[f64],
    opts: InverseOptions,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("final_j1");
    let mut worst = (0.0f64, None);
    for &t in ts {
        let r = spec.w_mk(t, opts)?;
        let Some(i) = f.nearest_index(t) else {
            rep.skipped += 1;
            continue;
        };
        if r * f.dt > 1.0 {
            rep.skipped += 1;
            continue;
        }
        let d = decompose(f, phi, r, spec.order)?;
        if f.t(i) > d.valid_until {
            rep.skipped += 1;
            continue;
        }
        let v = r.powi(spec.order as i32) * d.j1.values[i].norm();
        rep.row("scaled_j1", f.t(i), v, r, v, v.is_finite());
        if v > worst.0 {
            worst = (v, Some(f.t(i)));
        }
    }
    rep.observed = worst.0;
    rep.worst_point = worst.1;
    rep.pass = worst.0.is_finite();
    rep.observe("sup_scaled_j1", worst.0, worst.1, rep.pass);
    Ok(rep)
}

/// Curve height `γ(t) = 1/w_{M_K}(c₁t)` for `t > 0`, `1` otherwise.
pub fn carleson_height(spec: &EnvelopeSpec, t: f64, opts: InverseOptions) -> Result<f64> {
    if t <= 0.0 {
        Ok(1.0)
    } else {
        Ok(1.0 / spec.w_mk(t, opts)?)
    }
}

/// `∫_Γ |P*g|^p ds / ‖g‖_p^p` along `Γ = {(t, γ(t))}` with arc-length
/// measure, integrated over the support of `g` widened by `margin` on each
/// side (at the grid step of `g`).
pub fn carleson_curve_check(
    g: &SampledSignal,
    spec: &EnvelopeSpec,
    p: f64,
    margin: f64,
    opts: InverseOptions,
) -> Result<VerificationReport> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must lie in (1, inf), got {}", p)));
    }
    let mut rep = VerificationReport::new("carleson_curve");
    let norm_p = g.lp_norm(p).powf(p);
    let absg = g.map(|z| Complex64::new(z.norm(), 0.0));
    let (lo, hi) = (g.t0 - margin, g.t_end() + margin);
    let n = ((hi - lo) / g.dt).round() as usize + 1;
    let ts: Vec<f64> = (0..n).map(|i| lo + g.dt * i as f64).collect();
    let ys: Vec<f64> = ts.iter().map(|&t| carleson_height(spec, t, opts)).collect::<Result<_>>()?;
    let mut integral = 0.0;
    for i in 0..n {
        let dy = if i == 0 {
            ys[1] - ys[0]
        } else if i == n - 1 {
            ys[n - 1] - ys[n - 2]
        } else {
            0.5 * (ys[i + 1] - ys[i - 1])
        };
        let ds = (g.dt * g.dt + dy * dy).sqrt();
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let v = poisson_at(&absg, ys[i], ts[i]).powf(p);
        integral += w * v * ds;
    }
    let ratio = if norm_p > 0.0 { integral / norm_p } else { 0.0 };
    if norm_p == 0.0 {
        rep.note("g vanishes; ratio reported as 0");
    }
    rep.row("curve_integral", p, integral, norm_p, ratio, ratio.is_finite());
    rep.observed = ratio;
    rep.pass = ratio.is_finite();
    rep.observe("integral", integral, None, integral.is_finite());
    rep.observe("ratio", ratio, None, rep.pass);
    Ok(rep)
}

/// Family version: the largest ratio over several test functions.
pub fn carleson_family_check(
    gs: &[SampledSignal],
    spec: &EnvelopeSpec,
    p: f64,
    margin: f64,
    opts: InverseOptions,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("carleson_family");
    let mut worst = (0.0f64, None);
    for (k, g) in gs.iter().enumerate() {
        let r = carleson_curve_check(g, spec, p, margin, opts)?;
        rep.row(&format!("g{}", k), k as f64, r.value("integral"), r.observed, r.observed, r.pass);
        if r.observed > worst.0 {
            worst = (r.observed, Some(k as f64));
        }
    }
    rep.observed = worst.0;
    rep.worst_point = worst.1;
    rep.pass = worst.0.is_finite();
    rep.observe("max_ratio", worst.0, worst.1, rep.pass);
    Ok(rep)
}

/// Constants of the `J₂` majorant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct J2Constants {
    pub c2: f64,
    pub c3: f64,
}

impl Default for J2Constants {
    fn default() -> Self {
        J2Constants { c2: 2.0, c3: 2.0 }
    }
}

/// The majorant `A·B` of `R^m|J₂|` at time `t`, in log form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct J2Bound {
    pub t: f64,
    pub r: f64,
    pub n: u64,
    pub ln_a: f64,
    pub ln_b: f64,
    /// Ratio of the geometric series defining `B`.
    pub q: f64,
    /// `N = 0`: the bound degenerates to `A = R^{m+1}K(R)`, `B = 1`.
    pub trivial: bool,
    /// `q ≤ 1/2`, in which case `B ≤ 2` must hold.
    pub geometric_regime: bool,
}

impl J2Bound {
    pub fn ln_ab(&self) -> f64 {
        self.ln_a + self.ln_b
    }
}

/// `A = R^{m+1}K(R)(C₂M(R)N/(et))^N`, `B = Σ_{j≤N} (C₃log(2+N)^{1+ε}/(RM(R)))^j`
/// with `R = w_{M_K}(c₁t)` and `N = ⌊t/(C₂M(R))⌋`; `ε` comes from the bump.
pub fn j2_fourier_bound(
    spec: &EnvelopeSpec,
    bump: &BumpSpec,
    consts: J2Constants,
    t: f64,
    opts: InverseOptions,
) -> Result<J2Bound> {
    let r = spec.w_mk(t, opts)?;
    let mr = spec.m_rate.value(r);
    let n = (t / (consts.c2 * mr)).floor().max(0.0) as u64;
    let nf = n as f64;
    let mut ln_a = (spec.order as f64 + 1.0) * r.ln() + spec.k_rate.ln_value(r);
    if n > 0 {
        ln_a += nf * (consts.c2 * mr * nf / (std::f64::consts::E * t)).ln();
    }
    let q = consts.c3 * (2.0 + nf).ln().powf(1.0 + bump.eps) / (r * mr);
    let ln_b = if n == 0 {
        0.0
    } else if (q - 1.0).abs() < 1e-12 {
        (nf + 1.0).ln()
    } else if q < 1.0 {
        ((1.0 - q.powf(nf + 1.0)) / (1.0 - q)).ln()
    } else {
        let terms: Vec<f64> = (0..=n.min(1_000_000)).map(|j| j as f64 * q.ln()).collect();
        log_sum_exp(&terms)
    };
    Ok(J2Bound { t, r, n, ln_a, ln_b, q, trivial: n == 0, geometric_regime: q <= 0.5 })
}

/// Scans [`j2_fourier_bound`] over `ts` for every `(C₂, C₃)` pair; rows carry
/// `ln(A·B)`. Observations: worst `B` in the geometric regime and the overall
/// drop of `ln(A·B)` across the scan.
pub fn j2_sensitivity(
    spec: &EnvelopeSpec,
    bump: &BumpSpec,
    c2s: &[f64],
    c3s: &[f64],
    ts: &[f64],
    opts: InverseOptions,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("j2_majorant");
    let mut worst_b = 0.0f64;
    let mut min_drop = f64::INFINITY;
    for &c2 in c2s {
        for &c3 in c3s {
            let consts = J2Constants { c2, c3 };
            let mut first = None;
            let mut last = 0.0;
            for &t in ts {
                let b = j2_fourier_bound(spec, bump, consts, t, opts)?;
                let ok = !b.geometric_regime || b.ln_b <= 2f64.ln() + 1e-12;
                if b.geometric_regime {
                    worst_b = worst_b.max(b.ln_b.exp());
                }
                rep.row(&format!("c2={},c3={}", c2, c3), t, b.ln_a, b.ln_b, b.ln_ab(), ok);
                first.get_or_insert(b.ln_ab());
                last = b.ln_ab();
            }
            if let Some(f) = first {
                min_drop = min_drop.min(f - last);
            }
        }
    }
    let b_ok = rep.rows.iter().all(|r| r.pass);
    rep.observe("worst_geometric_b", worst_b, None, b_ok);
    rep.observe("min_log_drop", min_drop, None, min_drop > 0.0);
    rep.observed = min_drop;
    rep.pass = b_ok && min_drop > 0.0;
    Ok(rep)
}

/// Smooth cutoff: 1 on `[0, t1/2]`, 0 on `[t1, ∞)`.
pub fn smooth_cutoff(t: f64, t1: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (h(t1 - t), h(t - 0.5 * t1));
    if a + b == 0.0 {
        if t < t1 {
            1.0
        } else {
            0.0
        }
    } else {
        a / (a + b)
    }
}

/// `f − g` with `g(t) = χ(t)·Σ_k jet[k] t^k/k!`, `χ` a smooth cutoff
/// supported in `[0, t1)`: the result has a vanishing jet at `0` when `jet`
/// holds `f(0), f'(0), …`.
pub fn subtract_initial_jet(f: &SampledSignal, jet: &[Complex64], t1: f64) -> Result<SampledSignal> {
    if !(t1 > 0.0) {
        return Err(Error::InvalidParameter(format!("cutoff t1 must be positive, got {}", t1)));
    }
    let mut out = f.clone();
    for (i, v) in out.values.iter_mut().enumerate() {
        let t = f.t(i);
        if t < 0.0 || t >= t1 {
            continue;
        }
        let mut poly = Complex64::new(0.0, 0.0);
        let mut term = 1.0;
        for (k, c) in jet.iter().enumerate() {
            if k > 0 {
                term *= t / k as f64;
            }
            poly += c * term;
        }
        *v -= poly * smooth_cutoff(t, t1);
    }
    Ok(out)
}
