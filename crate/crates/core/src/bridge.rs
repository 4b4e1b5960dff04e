//! Conversions between the two forms of the hypothesis: bounds on the
//! Laplace transform over `Ω_{M₁}`, and derivative bounds
//! `‖F^{(j)}(s)‖ ≤ j! K₂(|s|) M₂(|s|)^j` on the Fourier transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{linear_grid, log_grid};
use crate::rate::{EnvelopeSpec, InverseOptions, LpExponent, RateExpr};
use crate::report::{point, VerificationReport};
use crate::signal::SampledSignal;

/// Default validation window for converted rates.
pub const VALIDATION_WINDOW: f64 = 1e4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Laplace,
    Fourier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSide {
    pub side: Side,
    #[serde(rename = "M")]
    pub m_rate: RateExpr,
    #[serde(rename = "K")]
    pub k_rate: RateExpr,
    pub p: LpExponent,
    pub m: u32,
    /// Constant attached to `‖f^{(m)}‖_{L^p}`.
    pub c_f: f64,
    /// Constant attached to `f(0), …, f^{(m−1)}(0)`.
    pub c_f_prime: f64,
    /// Validation failures of converted rates.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl HypothesisSide {
    pub fn new(side: Side, m_rate: RateExpr, k_rate: RateExpr, p: f64, m: u32, c_f: f64, c_f_prime: f64) -> Result<Self> {
        if !(c_f >= 0.0 && c_f.is_finite() && c_f_prime >= 0.0 && c_f_prime.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "constants must be finite and nonnegative, got {} and {}",
                c_f, c_f_prime
            )));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p must be at least 1, got {}", p)));
        }
        m_rate.validate_on(VALIDATION_WINDOW)?;
        k_rate.validate_on(VALIDATION_WINDOW)?;
        Ok(HypothesisSide {
            side,
            m_rate,
            k_rate,
            p: LpExponent(p),
            m,
            c_f,
            c_f_prime,
            flags: Vec::new(),
        })
    }

    /// The Laplace-side hypothesis `‖f̂(z)‖ ≤ K(|Im z|)` on `Ω_M` of an envelope spec.
    pub fn laplace_from(spec: &EnvelopeSpec, c_f: f64, c_f_prime: f64) -> Result<Self> {
        Self::new(Side::Laplace, spec.m_rate.clone(), spec.k_rate.clone(), spec.p.0, spec.order, c_f, c_f_prime)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `C_f = ‖f^{(m)}‖_{L^p}` and `C'_f = Σ_{k<m} |f^{(k)}(0)|` from samples,
/// with derivatives taken by finite differences unless the signal already
/// carries them.
pub fn constants_from_signal(f: &SampledSignal, m: u32, p: f64) -> (f64, f64) {
    let mut d = f.clone();
    let mut at_zero = 0.0;
    for _ in 0..m {
        at_zero += d.values.first().map(|z| z.norm()).unwrap_or(0.0);
        d = d.derivative();
    }
    (d.lp_norm(p), at_zero)
}

fn check_rate(name: &str, r: &RateExpr, flags: &mut Vec<String>) {
    if let Err(e) = r.validate_on(VALIDATION_WINDOW) {
        flags.push(format!("{}: {}", name, e));
    }
}

/// `M₁ = M₂/(1−ε)`, `K₁ = K₂/ε`.
pub fn fourier_to_laplace(h: &HypothesisSide, eps: f64) -> Result<HypothesisSide> {
    if h.side != Side::Fourier {
        return Err(Error::InvalidParameter("expected a Fourier-side hypothesis".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {}", eps)));
    }
    let mut out = h.clone();
    out.side = Side::Laplace;
    out.m_rate = RateExpr::scale(1.0 / (1.0 - eps), h.m_rate.clone());
    out.k_rate = RateExpr::scale(1.0 / eps, h.k_rate.clone());
    out.flags.clear();
    Ok(out)
}

/// `s ↦ s + 1/M(s)`.
pub fn shifted_argument(m: &RateExpr) -> RateExpr {
    RateExpr::sum(vec![RateExpr::identity(), RateExpr::pow(m.clone(), -1.0)])
}

/// `M₂(s) = M₁(s + 1/M₁(s))` and
/// `K₂(s) = K₁(s + 1/M₁(s)) + C_f M₂(s)^{2−1/p}/(1+s)^m + C'_f`.
/// Rates that fail validation on `[0, 10⁴]` are flagged and still returned.
pub fn laplace_to_fourier(h: &HypothesisSide) -> Result<HypothesisSide> {
    if h.side != Side::Laplace {
        return Err(Error::InvalidParameter("expected a Laplace-side hypothesis".into()));
    }
    let shift = shifted_argument(&h.m_rate);
    let m2 = RateExpr::compose(h.m_rate.clone(), shift.clone());
    let mut terms = vec![RateExpr::compose(h.k_rate.clone(), shift)];
    if h.c_f > 0.0 {
        let inv_p = if h.p.is_infinite() { 0.0 } else { 1.0 / h.p.0 };
        terms.push(RateExpr::scale(
            h.c_f,
            RateExpr::product(vec![
                RateExpr::pow(m2.clone(), 2.0 - inv_p),
                RateExpr::pow(RateExpr::power_shift(1.0, 1.0, 1.0), -(h.m as f64)),
            ]),
        ));
    }
    if h.c_f_prime > 0.0 {
        terms.push(RateExpr::constant(h.c_f_prime));
    }
    let k2 = if terms.len() == 1 { terms.pop().unwrap() } else { RateExpr::sum(terms) };
    let mut flags = Vec::new();
    check_rate("M2", &m2, &mut flags);
    check_rate("K2", &k2, &mut flags);
    Ok(HypothesisSide {
        side: Side::Fourier,
        m_rate: m2,
        k_rate: k2,
        p: h.p,
        m: h.m,
        c_f: h.c_f,
        c_f_prime: h.c_f_prime,
        flags,
    })
}

/// `M₁` and `K₁` for each `ε` at each `s`: row `lhs = M₁(s)`, `rhs = K₁(s)`.
pub fn epsilon_table(h: &HypothesisSide, eps_list: &[f64], s_points: &[f64]) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("fourier_to_laplace_eps");
    for &eps in eps_list {
        let l = fourier_to_laplace(h, eps)?;
        for &s in s_points {
            let m1 = l.m_rate.value(s);
            let k1 = l.k_rate.value(s);
            rep.row(format!("eps={}", eps), s, m1, k1, k1 - m1, m1.is_finite() && k1.is_finite());
        }
    }
    rep.pass = rep.rows.iter().all(|r| r.pass);
    Ok(rep)
}

/// Sampling for [`theorem_equivalence_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceWindow {
    pub s_min: f64,
    pub s_max: f64,
    pub n_s: usize,
    pub n_t: usize,
}

impl Default for EquivalenceWindow {
    fn default() -> Self {
        EquivalenceWindow {
            s_min: 1.0,
            s_max: 1e3,
            n_s: 200,
            n_t: 200,
        }
    }
}

/// `(M(2s)log K(2s), M₂(s)log K₂(s))` with `(M₂, K₂)` from [`laplace_to_fourier`].
pub fn equivalence_sides(spec: &EnvelopeSpec, fourier: &HypothesisSide, s: f64) -> (f64, f64) {
    let f = EnvelopeSpec::new(fourier.m_rate.clone(), fourier.k_rate.clone());
    (spec.mk_rate(2.0 * s), f.mk_rate(s))
}

/// Rows `equiv_c`: `lhs = c·M₂(s)log K₂(s)`, `rhs = M(2s)log K(2s)` with the
/// largest `c` valid on the window (observation `c`). Rows `w_check`:
/// `lhs = w_{M_K}(ct)`, `rhs = 2w_{(M₂)_{K₂}}(t)`.
pub fn theorem_equivalence_check(
    spec: &EnvelopeSpec,
    c_f: f64,
    c_f_prime: f64,
    window: &EquivalenceWindow,
) -> Result<VerificationReport> {
    let lap = HypothesisSide::laplace_from(spec, c_f, c_f_prime)?;
    let four = laplace_to_fourier(&lap)?;
    let mut rep = VerificationReport::new("theorem_equivalence");
    for f in &four.flags {
        rep.note(f.clone());
    }
    let ss = log_grid(window.s_min, window.s_max, window.n_s);
    let sides: Vec<(f64, f64)> = ss.iter().map(|&s| equivalence_sides(spec, &four, s)).collect();
    let (c, c_at) = ss
        .iter()
        .zip(&sides)
        .map(|(&s, &(r, l))| (r / l, s))
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
    for (&s, &(r, l)) in ss.iter().zip(&sides) {
        rep.row("equiv_c", s, c * l, r, r - c * l, c * l <= r * (1.0 + 1e-12));
    }
    rep.observe("c", c, point(c_at), c > 0.0 && c.is_finite());

    let mk = spec.mk_expr();
    let mk2 = EnvelopeSpec::new(four.m_rate.clone(), four.k_rate.clone()).mk_expr();
    let opts = InverseOptions::default();
    let t_max = mk2.value(window.s_max);
    let mut ts = vec![0.0];
    ts.extend(linear_grid(0.0, t_max, window.n_t).into_iter().skip(1));
    let mut worst = (f64::INFINITY, f64::NAN);
    for t in ts {
        let lhs = mk.w(c * t, opts)?.value;
        let rhs = 2.0 * mk2.w(t, opts)?.value;
        let pass = lhs <= rhs * (1.0 + 1e-9);
        rep.row("w_check", t, lhs, rhs, rhs - lhs, pass);
        if rhs / lhs < worst.0 {
            worst = (rhs / lhs, t);
        }
    }
    let w_pass = rep.rows.iter().filter(|r| r.name == "w_check").all(|r| r.pass);
    rep.observe("w_ratio_min", worst.0, point(worst.1), w_pass);
    rep.observed = c;
    rep.worst_point = point(c_at);
    rep.pass = rep.rows.iter().all(|r| r.pass) && c > 0.0;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> RateExpr {
        RateExpr::constant(2.0)
    }

    #[test]
    fn plug_in_constant() {
        let k2 = RateExpr::power_shift(2.0, 1.0, 1.0);
        let h = HypothesisSide::new(Side::Fourier, two(), k2.clone(), f64::INFINITY, 1, 0.0, 0.0).unwrap();
        let l = fourier_to_laplace(&h, 0.5).unwrap();
        for s in [0.0, 1.0, 10.0] {
            assert_eq!(l.m_rate.value(s), 4.0);
            assert_eq!(l.k_rate.value(s), 2.0 * k2.value(s));
        }
        assert!(fourier_to_laplace(&h, 1.0).is_err());
        assert!(fourier_to_laplace(&h, 0.0).is_err());
        assert!(laplace_to_fourier(&h).is_err());
    }

    #[test]
    fn laplace_to_fourier_constant_m() {
        let k1 = RateExpr::power_shift(2.0, 1.0, 1.0);
        let h = HypothesisSide::new(Side::Laplace, two(), k1.clone(), f64::INFINITY, 1, 1.5, 0.25).unwrap();
        let f = laplace_to_fourier(&h).unwrap();
        // C_f·M₂²/(1+s) decreases, so K₂ is not monotone near 0
        assert_eq!(f.flags.len(), 1);
        assert!(f.flags[0].starts_with("K2"));
        for s in [0.0, 1.0, 10.0] {
            assert_eq!(f.m_rate.value(s), 2.0);
            let want = k1.value(s + 0.5) + 1.5 * 4.0 / (1.0 + s) + 0.25;
            assert!((f.k_rate.value(s) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn growing_m() {
        let m1 = RateExpr::power_shift(2.0, 1.0, 1.0);
        let h = HypothesisSide::new(Side::Laplace, m1.clone(), m1.clone(), 2.0, 1, 0.0, 0.0).unwrap();
        let f = laplace_to_fourier(&h).unwrap();
        for s in [0.0f64, 1.0, 10.0] {
            let want = 2.0 + s + 1.0 / (2.0 + s);
            assert!((f.m_rate.value(s) - want).abs() < 1e-13 * want);
            // with M₁ = K₁ and no constants, K₂(s) = K₁(s + 1/K₁(s))
            assert!((f.k_rate.value(s) - want).abs() < 1e-13 * want);
        }
    }

    #[test]
    fn equivalence_example() {
        let spec = EnvelopeSpec::new(two(), RateExpr::power_shift(2.0, 1.0, 1.0));
        let rep = theorem_equivalence_check(&spec, 1.0, 0.0, &EquivalenceWindow::default()).unwrap();
        assert!(rep.value("c") > 0.0);
        let t0 = rep.rows.iter().find(|r| r.name == "w_check").unwrap();
        assert_eq!(t0.grid_point, 0.0);
        assert!(t0.lhs >= 1.0 && t0.rhs >= 1.0 && t0.pass);
    }

    #[test]
    fn json_round_trip() {
        let h = HypothesisSide::new(Side::Laplace, two(), RateExpr::exp(RateExpr::power_shift(1.0, 1.0, 1.0)), 3.0, 2, 1.0, 0.5).unwrap();
        let back = HypothesisSide::from_json(&h.to_json().unwrap()).unwrap();
        assert_eq!(h, back);
    }
}
