//! The compactly supported bump `ψ` (an iterated convolution of boxes),
//! its inverse Fourier transform `φ`, and the rescalings `φ_R`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{binomial, ln_factorial};
use crate::rate::iterated_log_sequence;
use crate::report::VerificationReport;
use crate::signal::SampledSignal;

pub const DEFAULT_BOXES: usize = 64;
pub const DEFAULT_EPS: f64 = 0.5;
pub const DEFAULT_GRID: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub eps: f64,
    /// Box half-widths `a_1 > a_2 > …`.
    pub widths: Vec<f64>,
    /// Number of grid cells on `[-1, 1]`.
    pub grid_n: usize,
    /// Depth `n` of the iterated-log refinement of `A_j`, if used.
    #[serde(default)]
    pub iterated: Option<u32>,
}

impl Default for BumpSpec {
    fn default() -> Self {
        BumpSpec::new(DEFAULT_EPS, DEFAULT_BOXES, DEFAULT_GRID).expect("default bump spec is valid")
    }
}

/// `A'_j = j·log(2+j)^{1+ε}`, or its iterated-log refinement.
fn base_sequence(eps: f64, iterated: Option<u32>, j: u64) -> f64 {
    match iterated {
        None => j as f64 * (2.0 + j as f64).ln().powf(1.0 + eps),
        Some(n) => iterated_log_sequence(n, eps, j),
    }
}

impl BumpSpec {
    /// Default width schedule `a_j = c/A'_j` normalized to `Σ a_j = 1`.
    pub fn new(eps: f64, n_boxes: usize, grid_n: usize) -> Result<Self> {
        Self::schedule(eps, None, n_boxes, grid_n)
    }

    /// Width schedule built from the iterated-log sequence of depth `n`.
    pub fn iterated(n: u32, eps: f64, n_boxes: usize, grid_n: usize) -> Result<Self> {
        Self::schedule(eps, Some(n), n_boxes, grid_n)
    }

    fn schedule(eps: f64, iterated: Option<u32>, n_boxes: usize, grid_n: usize) -> Result<Self> {
        check_eps(eps)?;
        let inv: Vec<f64> = (1..=n_boxes as u64).map(|j| 1.0 / base_sequence(eps, iterated, j)).collect();
        let total: f64 = inv.iter().sum();
        let widths = inv.iter().map(|x| x / total).collect();
        let s = BumpSpec { eps, widths, grid_n, iterated };
        s.validate()?;
        Ok(s)
    }

    pub fn with_widths(eps: f64, widths: Vec<f64>, grid_n: usize) -> Result<Self> {
        let s = BumpSpec { eps, widths, grid_n, iterated: None };
        s.validate()?;
        Ok(s)
    }

    pub fn with_grid(&self, grid_n: usize) -> Self {
        BumpSpec { grid_n, ..self.clone() }
    }

    pub fn n_boxes(&self) -> usize {
        self.widths.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        if self.widths.is_empty() {
            return Err(Error::InvalidParameter("at least one box is required".into()));
        }
        if self.widths.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter("box half-widths must be positive".into()));
        }
        if self.widths.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidParameter("box half-widths must be strictly decreasing".into()));
        }
        let total: f64 = self.widths.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "box half-widths sum to {} > 1; the support would leave [-1, 1]",
                total
            )));
        }
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            return Err(Error::InvalidParameter("grid_n must be even and at least 8".into()));
        }
        Ok(())
    }

    /// `ln A_j` with `A_j = (A'_j)^j` and `A_0 = 1`.
    pub fn ln_a(&self, j: u32) -> f64 {
        if j == 0 {
            0.0
        } else {
            j as f64 * base_sequence(self.eps, self.iterated, j as u64).ln()
        }
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps == 0.0 {
        return Err(Error::InvalidParameter(
            "eps = 0 makes the bound class quasi-analytic: no nonzero compactly supported bump satisfies it".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {}", eps)));
    }
    Ok(())
}

/// A sampled bump together with the data needed for its derivative bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub spec: BumpSpec,
    /// `ψ` on `[-1, 1]`, real and even, `ψ(0) = 1`.
    pub psi: SampledSignal,
    /// `tail_j(0)/ψ_raw(0)` where `tail_j` is the convolution of boxes
    /// `j+1, …, n` and `ψ_raw` the convolution of all boxes.
    pub tail_peaks: Vec<f64>,
    pub support: f64,
}

/// Piecewise-cubic Hermite evaluation of the running integral `G` of `g`.
fn antiderivative_at(g: &[f64], big_g: &[f64], h: f64, y: f64) -> f64 {
    let n = g.len();
    let x = (y + 1.0) / h;
    if x <= 0.0 {
        return 0.0;
    }
    if x >= (n - 1) as f64 {
        return big_g[n - 1];
    }
    let c = x.floor() as usize;
    let u = x - c as f64;
    let (u2, u3) = (u * u, u * u * u);
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * big_g[c] + h10 * h * g[c] + h01 * big_g[c + 1] + h11 * h * g[c + 1]
}

/// Samples the `n`-fold box convolution on `[-1, 1]` and rescales it to
/// `ψ(0) = 1`. Boxes are applied from the narrowest up, recording the peak
/// of every partial product for the derivative bound.
pub fn build_psi(spec: &BumpSpec) -> Result<Mollifier> {
    spec.validate()?;
    let half = spec.grid_n / 2;
    let h = 1.0 / half as f64;
    let npts = spec.grid_n + 1;
    let xs: Vec<f64> = (0..npts).map(|i| (i as f64 - half as f64) * h).collect();
    let a = &spec.widths;
    let n = a.len();
    let mut peaks = vec![0.0; n];

    // Innermost one or two boxes in closed form.
    let mut support;
    let mut g: Vec<f64>;
    let mut next: isize;
    if n == 1 {
        let w = a[0];
        g = xs.iter().map(|x| if x.abs() <= w { 1.0 / (2.0 * w) } else { 0.0 }).collect();
        support = w;
        next = -1;
    } else {
        let (w, b) = (a[n - 2], a[n - 1]);
        let box_b = 1.0 / (2.0 * b);
        g = xs
            .iter()
            .map(|&x| {
                let overlap = ((x + b).min(w) - (x - b).max(-w)).max(0.0);
                overlap / (4.0 * w * b)
            })
            .collect();
        peaks[n - 1] = box_b;
        support = w + b;
        next = n as isize - 3;
    }
    peaks[(next + 1) as usize] = g[half];

    let mut big_g = vec![0.0; npts];
    while next >= 0 {
        let w = a[next as usize];
        for i in 1..npts {
            big_g[i] = big_g[i - 1] + 0.5 * h * (g[i - 1] + g[i]);
        }
        let mut out: Vec<f64> = xs
            .iter()
            .map(|&x| {
                (antiderivative_at(&g, &big_g, h, x + w) - antiderivative_at(&g, &big_g, h, x - w)) / (2.0 * w)
            })
            .collect();
        support += w;
        for (i, x) in xs.iter().enumerate() {
            if x.abs() > support {
                out[i] = 0.0;
            }
        }
        for i in 0..half {
            let s = 0.5 * (out[i] + out[npts - 1 - i]);
            out[i] = s;
            out[npts - 1 - i] = s;
        }
        g = out;
        peaks[next as usize] = g[half];
        next -= 1;
    }
    let full = g[half];
    if !(full > 0.0) {
        return Err(Error::Resolution("bump vanishes at 0 on this grid".into()));
    }
    let values: Vec<Complex64> = g
        .iter()
        .enumerate()
        .map(|(i, v)| Complex64::new(if i == half { 1.0 } else { (v / full).max(0.0) }, 0.0))
        .collect();
    let psi = SampledSignal::new(-1.0, h, values)?.with_deriv_order(n.saturating_sub(1) as u32);
    Ok(Mollifier {
        spec: spec.clone(),
        psi,
        tail_peaks: peaks.iter().map(|p| p / full).collect(),
        support,
    })
}

impl Mollifier {
    pub fn build(spec: &BumpSpec) -> Result<Self> {
        build_psi(spec)
    }

    /// `sup|ψ^{(j)}| ≤ Π_{i≤j} a_i^{-1} · tail_j(0)/ψ_raw(0)`: each
    /// differentiated box contributes a difference of two shifted copies.
    pub fn analytic_bound(&self, j: usize) -> f64 {
        if j >= self.spec.n_boxes() {
            return f64::INFINITY;
        }
        let prod: f64 = self.spec.widths[..j].iter().map(|a| 1.0 / a).product();
        prod * self.tail_peaks[j]
    }

    /// Real samples of `ψ`.
    pub fn psi_values(&self) -> Vec<f64> {
        self.psi.values.iter().map(|z| z.re).collect()
    }

    /// `φ(t)` by trapezoid quadrature over the support of `ψ`.
    pub fn phi_at(&self, t: f64) -> Complex64 {
        phi_point(&self.psi, t)
    }

    /// `φ` on the symmetric grid `t = -T, …, T` with step `dt` (`T` rounded
    /// up to a multiple of `dt`).
    pub fn phi_signal(&self, half_width: f64, dt: f64) -> SampledSignal {
        let k = (half_width / dt).ceil() as usize;
        phi_from_psi(&self.psi, -(k as f64) * dt, dt, 2 * k + 1)
    }
}

fn phi_point(psi: &SampledSignal, t: f64) -> Complex64 {
    let n = psi.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in psi.values.iter().enumerate() {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let s = psi.t(i);
        acc += v * Complex64::from_polar(w, s * t);
    }
    acc * psi.dt / (2.0 * std::f64::consts::PI)
}

/// `φ(t) = (1/2π)∫ e^{ist} ψ(s) ds` on the grid `t0 + i·dt`, `i < n`, by the
/// trapezoid rule over the samples of `ψ`.
pub fn phi_from_psi(psi: &SampledSignal, t0: f64, dt: f64, n: usize) -> SampledSignal {
    let m = psi.len();
    let h = psi.dt;
    let weights: Vec<Complex64> = psi
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * if i == 0 || i == m - 1 { 0.5 } else { 1.0 })
        .collect();
    let s0 = psi.t0;
    let values = (0..n)
        .map(|k| {
            let t = t0 + dt * k as f64;
            // e^{i s_j t} = e^{i s_0 t}·(e^{i h t})^j, reseeded every 256 steps.
            let step = Complex64::from_polar(1.0, h * t);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut rot = Complex64::new(1.0, 0.0);
            for (j, w) in weights.iter().enumerate() {
                if j % 256 == 0 {
                    rot = Complex64::from_polar(1.0, (s0 + h * j as f64) * t);
                }
                acc += w * rot;
                rot *= step;
            }
            acc * h / (2.0 * std::f64::consts::PI)
        })
        .collect();
    SampledSignal { t0, dt, values, deriv_order: u32::MAX }
}

/// `φ_R(t) = Rφ(Rt)` resampled onto the grid `t0 + i·dt`, `i < n`, then
/// rescaled so its trapezoid mass equals that of `φ`.
pub fn scale(phi: &SampledSignal, r: f64, t0: f64, dt: f64, n: usize) -> Result<SampledSignal> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("scale needs R > 0, got {}", r)));
    }
    let mut out = SampledSignal::from_fn(t0, dt, n, |t| phi.interpolate(r * t) * r);
    let (m0, m1) = (phi.integral(), out.integral());
    if m1.norm() > 1e-300 && m0.norm() > 1e-300 {
        let c = m0 / m1;
        out = out.map(|z| z * c);
    }
    out.deriv_order = phi.deriv_order;
    Ok(out)
}

/// Result of [`check_derivative_bounds`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBounds {
    /// Estimated `sup|ψ^{(j)}|`, `j = 0..=j_max`.
    pub sups: Vec<f64>,
    /// Smallest `C₁` with `sup|ψ^{(j)}| ≤ C₁^{j+1} A_j` for every tested `j`.
    pub c1: f64,
    pub report: VerificationReport,
}

/// Central difference of order `j` with step `s·h` at sample `i`; `s` even.
fn central_difference(v: &[f64], i: usize, j: usize, s: usize, h: f64) -> Option<f64> {
    let half = j * s / 2;
    if i < half || i + half >= v.len() {
        return None;
    }
    let mut acc = 0.0;
    for l in 0..=j {
        let c = binomial(j as u32, l as u32) * if l % 2 == 0 { 1.0 } else { -1.0 };
        acc += c * v[i + half - l * s];
    }
    Some(acc / (s as f64 * h).powi(j as i32))
}

/// Finite-difference step (in grid cells, even) for the `j`-th derivative.
fn fd_cells(spec: &BumpSpec, j: usize, h: f64) -> Result<usize> {
    let a = &spec.widths;
    let scale = a[(j + 1).min(a.len() - 1)];
    let cells = ((scale / 4.0) / h).floor() as usize & !1;
    if cells < 2 {
        return Err(Error::Resolution(format!(
            "derivative of order {} needs steps near {:.3e}, but the grid step is {:.3e}",
            j,
            scale / 4.0,
            h
        )));
    }
    Ok(cells)
}

/// Estimates `sup|ψ^{(j)}|` for `j ≤ j_max` by Richardson-extrapolated central
/// differences, reports the observed Denjoy–Carleman constant `C₁`, and
/// compares each estimate with [`Mollifier::analytic_bound`].
pub fn check_derivative_bounds(m: &Mollifier, j_max: usize) -> Result<DerivativeBounds> {
    let spec = &m.spec;
    if j_max + 1 >= spec.n_boxes() {
        return Err(Error::InvalidParameter(format!(
            "j_max = {} needs more than {} boxes for classical derivatives",
            j_max,
            j_max + 1
        )));
    }
    let v = m.psi_values();
    let h = m.psi.dt;
    let mut rep = VerificationReport::new("derivative_bounds");
    let mut sups = Vec::with_capacity(j_max + 1);
    let mut c1 = (0.0f64, None);
    for j in 0..=j_max {
        let (sup, at) = if j == 0 {
            let i = v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b });
            (v[i].abs(), m.psi.t(i))
        } else {
            let s = fd_cells(spec, j, h)?;
            let mut best = (0.0f64, 0.0);
            for i in 0..v.len() {
                let (Some(d1), Some(d2)) = (central_difference(&v, i, j, s, h), central_difference(&v, i, j, 2 * s, h))
                else {
                    continue;
                };
                let r = ((4.0 * d1 - d2) / 3.0).abs();
                if r > best.0 {
                    best = (r, m.psi.t(i));
                }
            }
            best
        };
        sups.push(sup);
        let bound = m.analytic_bound(j);
        let literal: f64 = spec.widths[..j].iter().map(|a| 1.0 / a).product();
        if sup > literal {
            rep.note(format!(
                "order {}: sup {:.4e} exceeds the bare product of inverse widths {:.4e}; the tail-peak factor is needed",
                j, sup, literal
            ));
        }
        rep.row(&format!("box_bound_j{}", j), at, sup, bound, bound - sup, sup <= bound);
        let c = ((sup.ln() - spec.ln_a(j as u32)) / (j + 1) as f64).exp();
        rep.row(&format!("dc_constant_j{}", j), at, sup, spec.ln_a(j as u32).exp(), c, c.is_finite());
        if c > c1.0 {
            c1 = (c, Some(j as f64));
        }
    }
    let box_ok = rep.rows.iter().filter(|r| r.name.starts_with("box_bound")).all(|r| r.pass);
    rep.observe("c1", c1.0, c1.1, c1.0.is_finite());
    rep.observe("box_bound_holds", if box_ok { 1.0 } else { 0.0 }, None, box_ok);
    rep.observed = c1.0;
    rep.worst_point = c1.1;
    rep.pass = c1.0.is_finite() && box_ok;
    Ok(DerivativeBounds { sups, c1: c1.0, report: rep })
}

/// Checks that `ψ^k` obeys the bound with `C₁^{j+1}` replaced by
/// `C₁^k (kC₁)^j`, for `k ≤ k_max`, `j ≤ j_max`.
pub fn check_power_bounds(m: &Mollifier, c1: f64, k_max: u32, j_max: usize) -> Result<VerificationReport> {
    let spec = &m.spec;
    let h = m.psi.dt;
    let base = m.psi_values();
    let mut rep = VerificationReport::new("power_bounds");
    let mut worst = (f64::INFINITY, None);
    for k in 1..=k_max {
        let v: Vec<f64> = base.iter().map(|x| x.powi(k as i32)).collect();
        for j in 0..=j_max {
            let sup = if j == 0 {
                v.iter().cloned().fold(0.0, f64::max)
            } else {
                let s = fd_cells(spec, j, h)?;
                (0..v.len())
                    .filter_map(|i| {
                        let d1 = central_difference(&v, i, j, s, h)?;
                        let d2 = central_difference(&v, i, j, 2 * s, h)?;
                        Some(((4.0 * d1 - d2) / 3.0).abs())
                    })
                    .fold(0.0, f64::max)
            };
            let ln_bound = k as f64 * c1.ln() + j as f64 * (k as f64 * c1).ln() + spec.ln_a(j as u32);
            let margin = ln_bound - sup.ln();
            rep.row(&format!("k{}_j{}", k, j), j as f64, sup, ln_bound.exp(), margin, margin >= 0.0);
            if margin < worst.0 {
                worst = (margin, Some(k as f64));
            }
        }
    }
    rep.observed = worst.0;
    rep.worst_point = worst.1;
    rep.pass = worst.0 >= 0.0;
    rep.observe("worst_log_margin", worst.0, worst.1, rep.pass);
    Ok(rep)
}

/// `ln` of the ratio `j!` vs `A_j` growth, exposed for the guide.
pub fn ln_a_over_factorial(spec: &BumpSpec, j: u32) -> f64 {
    spec.ln_a(j) - ln_factorial(j as u64)
}
