use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, ln_gamma, log_sum_exp, phase_of_product, KahanComplex, LogComplex};
use crate::rate::{observed_shift_ratio, EnvelopeSpec, InverseOptions};

/// Margin factor applied to the observed shift ratio `N(2δ)`.
pub const GAMMA_FACTOR: f64 = 1.1;
/// Inversion cap used for `R`; `R` grows like `exp(k)` for bounded `M`.
pub const R_CAP: f64 = 1e300;
/// `|A(z−w)|^{k+1}` within this relative distance of 1 switches the Cauchy
/// transform to compensated direct summation.
pub const LEMNISCATE_GUARD: f64 = 1e-6;

/// Parameters of the measure `μ = τR^{-m} Σ_j q^j δ_{w + q^j/A}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureParams {
    pub k: u32,
    pub delta: f64,
    pub beta: f64,
    pub c1: f64,
    pub m: u32,
    /// `δA = k·l(k)` with `l(t) = β log(e+t)`.
    pub a: f64,
    /// `ln τ = k ln(δA) − ½ ln k`.
    pub log_tau: f64,
    /// Largest `R` with `c₁k = δM_K(R)`.
    pub r: f64,
    pub w: Complex64,
    pub q: Complex64,
    /// Exponent used for `K` in the Cauchy-transform bound.
    pub gamma: f64,
    /// Observed local constant `sup_{s' ≤ 2δ} M(s+s')/M(s)`.
    pub gamma0: f64,
}

/// `l(t) = β log(e + t)`.
pub fn l_of(beta: f64, t: f64) -> f64 {
    beta * (std::f64::consts::E + t).ln()
}

/// `max(1, 2/M(0))`.
pub fn default_delta(spec: &EnvelopeSpec) -> f64 {
    (2.0 / spec.m_rate.value(0.0)).max(1.0)
}

/// [`default_delta`], raised when `M` stays small on `[0, 10⁶]` so that
/// `1/(δM) ≤ 0.1767`, where `1 − x ≥ e^{−1.1x}` still holds.
pub fn auto_delta(spec: &EnvelopeSpec) -> f64 {
    let m_far = spec.m_rate.value(1e6);
    default_delta(spec).max(1.0 / (super::GAMMA_X_LIMIT * m_far))
}

/// Computes every derived field of the measure. `γ = 1.1·N(2δ)` with
/// `N(2δ)` the observed shift ratio of `M` on `[0, 10⁶]`.
pub fn make_params(k: u32, delta: f64, beta: f64, c1: f64, spec: &EnvelopeSpec) -> Result<MeasureParams> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(beta >= 1.0) || !(c1 > 0.0) {
        return Err(Error::InvalidParameter(format!("need beta >= 1 and c1 > 0, got {} and {}", beta, c1)));
    }
    let m0 = spec.m_rate.value(0.0);
    if !(delta > 1.0 / m0) {
        return Err(Error::InvalidParameter(format!("delta = {} must exceed 1/M(0) = {}", delta, 1.0 / m0)));
    }
    let kf = k as f64;
    let a = kf * l_of(beta, kf) / delta;
    if !(delta - 1.0 / a > 0.0) {
        return Err(Error::InvalidParameter(format!("delta - 1/A = {} is not positive", delta - 1.0 / a)));
    }
    let log_tau = kf * (delta * a).ln() - 0.5 * kf.ln();
    let target = c1 * kf / delta;
    let mk = spec.mk_expr();
    let inv = mk
        .right_inverse(target, InverseOptions { tol: 1e-13, cap: R_CAP })
        .map_err(|_| Error::Domain(format!("R undefined: M_K(0) exceeds c1 k/delta = {}", target)))?;
    if inv.saturated {
        return Err(Error::Domain(format!(
            "R undefined: M_K stays below c1 k/delta = {} up to {:e}",
            target, R_CAP
        )));
    }
    let r = inv.value;
    let n2d = observed_shift_ratio(&spec.m_rate, 2.0 * delta, 0.0, 1e6, 256);
    let gamma0 = (0..=16)
        .map(|i| observed_shift_ratio(&spec.m_rate, 2.0 * delta * i as f64 / 16.0, 0.0, 1e6, 128))
        .fold(1.0, f64::max);
    Ok(MeasureParams {
        k,
        delta,
        beta,
        c1,
        m: spec.order,
        a,
        log_tau,
        r,
        w: Complex64::new(-delta, r),
        q: Complex64::from_polar(1.0, TAU / (kf + 1.0)),
        gamma: GAMMA_FACTOR * n2d,
        gamma0,
    })
}

fn root(k: u32, j: u32) -> Complex64 {
    let (s, c) = (TAU * j as f64 / (k as f64 + 1.0)).sin_cos();
    Complex64::new(c, s)
}

impl MeasureParams {
    /// `ln(τ/R^m)`.
    pub fn ln_prefactor(&self) -> f64 {
        self.log_tau - self.m as f64 * self.r.ln()
    }

    /// Atom positions relative to `w`: `q^j/A`.
    pub fn atom_offsets(&self) -> Vec<Complex64> {
        (0..=self.k).map(|j| root(self.k, j) / self.a).collect()
    }

    /// Band of `Im z` where the Cauchy transform is large.
    pub fn r_band(&self) -> (f64, f64) {
        (self.r - 2.0 * self.delta, self.r + 2.0 * self.delta)
    }

    /// Band of `t` where the Laplace transform is large.
    pub fn t_band(&self) -> (f64, f64) {
        let k = self.k as f64;
        (k / (2.0 * self.delta), 2.0 * k / self.delta)
    }

    /// `Cμ` at `z = w + d`, in log form. Taking the offset `d` directly keeps
    /// full precision when `Im z ≈ R` is large.
    pub fn cauchy_offset_log(&self, d: Complex64) -> Result<LogComplex> {
        let k1 = self.k as f64 + 1.0;
        let ln_u = self.a.ln() + d.norm().ln();
        let big_l = k1 * ln_u;
        let theta = k1 * d.arg();
        let ln_pre = self.ln_prefactor() + k1.ln() + self.a.ln();
        if big_l.abs() <= LEMNISCATE_GUARD {
            let u = d * self.a;
            let mut acc = KahanComplex::default();
            for j in 0..=self.k {
                let qj = root(self.k, j);
                let den = u - qj;
                if den.norm() == 0.0 {
                    return Err(Error::Pole(format!("z = w + {} coincides with atom {}", d, j)));
                }
                acc.add(qj / den);
            }
            let s = acc.value();
            // Σ q^j/(u − q^j) = (k+1)/(u^{k+1} − 1)
            return Ok(LogComplex::from_complex(s).scale_ln(ln_pre - k1.ln()));
        }
        let (ln_den, arg_den) = if big_l < 30.0 {
            let (s, c) = theta.sin_cos();
            let h = (0.5 * theta).sin();
            let den = Complex64::new(big_l.exp_m1() * c - 2.0 * h * h, big_l.exp() * s);
            if den.norm() == 0.0 {
                return Err(Error::Pole(format!("z = w + {} is an atom", d)));
            }
            (den.norm().ln(), den.arg())
        } else {
            let corr = Complex64::new(1.0, 0.0) - Complex64::from_polar((-big_l).exp(), -theta);
            (big_l + corr.norm().ln(), theta + corr.arg())
        };
        Ok(LogComplex::new(ln_pre - ln_den, -arg_den))
    }

    pub fn cauchy_transform_log(&self, z: Complex64) -> Result<LogComplex> {
        self.cauchy_offset_log(z - self.w)
    }

    /// `Cμ(z) = (τ/R^m)(k+1)A/((A(z−w))^{k+1} − 1)`.
    pub fn cauchy_transform(&self, z: Complex64) -> Result<Complex64> {
        materialize(self.cauchy_transform_log(z)?)
    }

    /// `Cμ` at `z = re + i(R + dy)`.
    pub fn cauchy_near(&self, re: f64, dy: f64) -> Result<LogComplex> {
        self.cauchy_offset_log(Complex64::new(re + self.delta, dy))
    }

    /// `ln` of the positive series `Σ_{n≥1} k!/(n(k+1)−1)!·x^{(n−1)(k+1)}`
    /// and of the same series weighted by `n(k+1)−1`.
    /// `ln` of the first neglected term of the factored series at `t`,
    /// relative to the series sum.
    pub fn series_truncation(&self, t: f64) -> f64 {
        let x = t / self.a;
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        let (sum, _, next) = self.series_full(x);
        next - sum
    }

    fn series(&self, x: f64) -> (f64, f64) {
        let (a, b, _) = self.series_full(x);
        (a, b)
    }

    fn series_full(&self, x: f64) -> (f64, f64, f64) {
        let k1 = self.k as f64 + 1.0;
        let lnk = ln_factorial(self.k as u64);
        let lx = x.ln();
        let mut plain = Vec::new();
        let mut weighted = Vec::new();
        let mut peak = f64::NEG_INFINITY;
        for n in 1..=2_000_000u64 {
            let nf = n as f64;
            let top = nf * k1 - 1.0;
            let ln_t = lnk - ln_gamma(top + 1.0) + (nf - 1.0) * k1 * lx;
            plain.push(ln_t);
            weighted.push(ln_t + top.ln());
            peak = peak.max(ln_t);
            if ln_t < peak - 40.0 && ln_t < plain[plain.len().saturating_sub(2)] {
                break;
            }
        }
        let n = plain.len() as f64 + 1.0;
        let next = lnk - ln_gamma(n * k1) + (n - 1.0) * k1 * lx;
        (log_sum_exp(&plain), log_sum_exp(&weighted), next)
    }

    fn direct_regime(&self, x: f64) -> bool {
        x > 4.0 * (self.k as f64 + 1.0)
    }

    /// `Lμ(t) = Σ μ_j e^{tζ_j}` in log form. Uses the factored series (all
    /// terms positive) unless `t/A` is large, where the atom sum has no
    /// cancellation.
    pub fn laplace_log(&self, t: f64) -> Result<LogComplex> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("Laplace transform needs t >= 0, got {}", t)));
        }
        if t == 0.0 {
            return Ok(LogComplex::ZERO);
        }
        let x = t / self.a;
        let phase = phase_of_product(t, self.r);
        if self.direct_regime(x) {
            let mut acc = KahanComplex::default();
            for j in 0..=self.k {
                let qj = root(self.k, j);
                acc.add(qj * ((qj - 1.0) * x).exp());
            }
            let s = LogComplex::from_complex(acc.value());
            return Ok(s.scale_ln(self.ln_prefactor() - self.delta * t + x).mul(LogComplex::new(0.0, phase)));
        }
        let kf = self.k as f64;
        let ln_i = -self.delta * t + (kf + 1.0).ln() + kf * x.ln() - ln_factorial(self.k as u64);
        let (ln_ii, _) = self.series(x);
        Ok(LogComplex::new(self.ln_prefactor() + ln_i + ln_ii, phase))
    }

    pub fn laplace_transform(&self, t: f64) -> Result<Complex64> {
        materialize(self.laplace_log(t)?)
    }

    /// `L'μ(t) = Σ μ_j ζ_j e^{tζ_j}` in log form.
    pub fn laplace_deriv_log(&self, t: f64) -> Result<LogComplex> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("Laplace transform needs t >= 0, got {}", t)));
        }
        if t == 0.0 {
            // Σ q^j ζ_j = w·Σ q^j + Σ q^{2j}/A, exactly 0 unless k = 1
            if self.k == 1 {
                return Ok(LogComplex::new(self.ln_prefactor() + (2.0 / self.a).ln(), 0.0));
            }
            return Ok(LogComplex::ZERO);
        }
        let x = t / self.a;
        if self.direct_regime(x) {
            let mut acc = KahanComplex::default();
            for j in 0..=self.k {
                let qj = root(self.k, j);
                acc.add(qj * (self.w + qj / self.a) * ((qj - 1.0) * x).exp());
            }
            let s = LogComplex::from_complex(acc.value());
            let phase = phase_of_product(t, self.r);
            return Ok(s.scale_ln(self.ln_prefactor() - self.delta * t + x).mul(LogComplex::new(0.0, phase)));
        }
        let kf = self.k as f64;
        let ln_i = -self.delta * t + (kf + 1.0).ln() + kf * x.ln() - ln_factorial(self.k as u64);
        let (ln_ii, ln_iiw) = self.series(x);
        // w·II + II'/t, scaled by 1/II
        let v = self.w + Complex64::new((ln_iiw - ln_ii - t.ln()).exp(), 0.0);
        let phase = phase_of_product(t, self.r);
        Ok(LogComplex::from_complex(v)
            .scale_ln(self.ln_prefactor() + ln_i + ln_ii)
            .mul(LogComplex::new(0.0, phase)))
    }

    pub fn laplace_deriv(&self, t: f64) -> Result<Complex64> {
        materialize(self.laplace_deriv_log(t)?)
    }
}

fn materialize(l: LogComplex) -> Result<Complex64> {
    l.to_complex()
        .ok_or_else(|| Error::Overflow(format!("magnitude e^{:.3e} exceeds double range", l.ln_abs)))
}

/// `Σ_{j=0}^k q^j/(z − q^j)` summed directly.
pub fn roots_of_unity_sum(k: u32, z: Complex64) -> Complex64 {
    (0..=k).map(|j| root(k, j)).map(|qj| qj / (z - qj)).sum()
}

/// `(k+1)/(z^{k+1} − 1)`.
pub fn roots_of_unity_closed(k: u32, z: Complex64) -> Complex64 {
    Complex64::new(k as f64 + 1.0, 0.0) / (z.powu(k + 1) - 1.0)
}
