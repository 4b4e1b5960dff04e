use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_grid_per_decade, log_sum_exp, POINTS_PER_DECADE};

/// A rate function `ℝ₊ → [2, ∞)` written as an expression tree.
///
/// Serialized as tagged JSON, e.g. `{"kind":"power_shift","c0":2,"a":1,"alpha":1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateExpr {
    Const { c: f64 },
    /// `c0 + a·s^alpha`
    PowerShift { c0: f64, a: f64, alpha: f64 },
    /// `c0 + a·log(1+s)`
    LogShift { c0: f64, a: f64 },
    Exp { inner: Box<RateExpr> },
    /// Natural logarithm of the inner value.
    Log { inner: Box<RateExpr> },
    Pow { inner: Box<RateExpr>, exponent: f64 },
    Sum { terms: Vec<RateExpr> },
    Product { factors: Vec<RateExpr> },
    /// `outer(inner(s))`
    Compose { outer: Box<RateExpr>, inner: Box<RateExpr> },
    Max { terms: Vec<RateExpr> },
    Scale { factor: f64, inner: Box<RateExpr> },
    /// Piecewise-linear interpolation of samples, constant beyond the last knot.
    Sampled { s: Vec<f64>, v: Vec<f64> },
}

/// Result of [`RateExpr::eval`]: overflow saturates to `f64::MAX` and is flagged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub saturated: bool,
}

impl RateExpr {
    pub fn constant(c: f64) -> Self {
        RateExpr::Const { c }
    }

    pub fn power_shift(c0: f64, a: f64, alpha: f64) -> Self {
        RateExpr::PowerShift { c0, a, alpha }
    }

    pub fn log_shift(c0: f64, a: f64) -> Self {
        RateExpr::LogShift { c0, a }
    }

    /// The identity `s ↦ s` (not itself a valid rate, but a useful building block).
    pub fn identity() -> Self {
        RateExpr::power_shift(0.0, 1.0, 1.0)
    }

    pub fn exp(inner: RateExpr) -> Self {
        RateExpr::Exp { inner: Box::new(inner) }
    }

    pub fn ln(inner: RateExpr) -> Self {
        RateExpr::Log { inner: Box::new(inner) }
    }

    pub fn pow(inner: RateExpr, exponent: f64) -> Self {
        RateExpr::Pow { inner: Box::new(inner), exponent }
    }

    pub fn sum(terms: Vec<RateExpr>) -> Self {
        RateExpr::Sum { terms }
    }

    pub fn product(factors: Vec<RateExpr>) -> Self {
        RateExpr::Product { factors }
    }

    pub fn compose(outer: RateExpr, inner: RateExpr) -> Self {
        RateExpr::Compose { outer: Box::new(outer), inner: Box::new(inner) }
    }

    pub fn max(terms: Vec<RateExpr>) -> Self {
        RateExpr::Max { terms }
    }

    pub fn scale(factor: f64, inner: RateExpr) -> Self {
        RateExpr::Scale { factor, inner: Box::new(inner) }
    }

    pub fn sampled(s: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if s.is_empty() || s.len() != v.len() {
            return Err(Error::InvalidRate("sampled rate needs equal, nonempty knot and value lists".into()));
        }
        if s[0] != 0.0 {
            return Err(Error::InvalidRate("sampled rate must start at s = 0".into()));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidRate("sampled knots must be strictly increasing".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidRate("sampled values must be finite".into()));
        }
        Ok(RateExpr::Sampled { s, v })
    }

    /// Raw double evaluation; may return `inf` on overflow.
    pub fn value(&self, s: f64) -> f64 {
        match self {
            RateExpr::Const { c } => *c,
            RateExpr::PowerShift { c0, a, alpha } => c0 + a * s.powf(*alpha),
            RateExpr::LogShift { c0, a } => c0 + a * s.ln_1p(),
            RateExpr::Exp { inner } => inner.value(s).exp(),
            RateExpr::Log { inner } => inner.ln_value(s),
            RateExpr::Pow { inner, exponent } => inner.value(s).powf(*exponent),
            RateExpr::Sum { terms } => terms.iter().map(|t| t.value(s)).sum(),
            RateExpr::Product { factors } => factors.iter().map(|t| t.value(s)).product(),
            RateExpr::Compose { outer, inner } => outer.value(inner.value(s)),
            RateExpr::Max { terms } => terms.iter().map(|t| t.value(s)).fold(f64::NEG_INFINITY, f64::max),
            RateExpr::Scale { factor, inner } => factor * inner.value(s),
            RateExpr::Sampled { s: knots, v } => interp_linear(knots, v, s),
        }
    }

    /// `ln f(s)`, evaluated in the log domain where the tree allows it so
    /// that nested exponentials stay finite.
    pub fn ln_value(&self, s: f64) -> f64 {
        match self {
            RateExpr::Exp { inner } => inner.value(s),
            RateExpr::Log { inner } => inner.ln_value(s).ln(),
            RateExpr::Pow { inner, exponent } => exponent * inner.ln_value(s),
            RateExpr::Sum { terms } => {
                let raw: Vec<f64> = terms.iter().map(|t| t.value(s)).collect();
                if raw.iter().all(|x| x.is_finite()) {
                    return raw.iter().sum::<f64>().ln();
                }
                if raw.iter().all(|x| *x > 0.0) {
                    let logs: Vec<f64> = terms.iter().map(|t| t.ln_value(s)).collect();
                    log_sum_exp(&logs)
                } else {
                    raw.iter().sum::<f64>().ln()
                }
            }
            RateExpr::Product { factors } => {
                let raw: Vec<f64> = factors.iter().map(|t| t.value(s)).collect();
                if raw.iter().all(|x| *x > 0.0) {
                    factors.iter().map(|t| t.ln_value(s)).sum()
                } else {
                    raw.iter().product::<f64>().ln()
                }
            }
            RateExpr::Compose { outer, inner } => outer.ln_value(inner.value(s)),
            RateExpr::Max { terms } => terms.iter().map(|t| t.ln_value(s)).fold(f64::NEG_INFINITY, f64::max),
            RateExpr::Scale { factor, inner } if *factor > 0.0 => factor.ln() + inner.ln_value(s),
            _ => self.value(s).ln(),
        }
    }

    /// Evaluation with overflow saturated to `f64::MAX` and flagged.
    pub fn eval(&self, s: f64) -> Evaluation {
        let v = self.value(s);
        if v.is_finite() {
            Evaluation { value: v, saturated: false }
        } else if v == f64::INFINITY || (v.is_nan() && self.ln_value(s) == f64::INFINITY) {
            Evaluation { value: f64::MAX, saturated: true }
        } else {
            Evaluation { value: v, saturated: true }
        }
    }

    /// Sign rules that guarantee monotonicity without sampling. `false`
    /// means "not decidable structurally", not "decreasing".
    pub fn structurally_nondecreasing(&self) -> bool {
        match self {
            RateExpr::Const { .. } => true,
            RateExpr::PowerShift { a, alpha, .. } => *a >= 0.0 && *alpha >= 0.0,
            RateExpr::LogShift { a, .. } => *a >= 0.0,
            RateExpr::Exp { inner } | RateExpr::Log { inner } => inner.structurally_nondecreasing(),
            RateExpr::Pow { inner, exponent } => *exponent >= 0.0 && inner.structurally_nondecreasing(),
            RateExpr::Sum { terms } | RateExpr::Max { terms } => terms.iter().all(|t| t.structurally_nondecreasing()),
            RateExpr::Product { factors } => factors.iter().all(|t| t.structurally_nondecreasing()),
            RateExpr::Compose { outer, inner } => {
                outer.structurally_nondecreasing() && inner.structurally_nondecreasing()
            }
            RateExpr::Scale { factor, inner } => *factor >= 0.0 && inner.structurally_nondecreasing(),
            RateExpr::Sampled { v, .. } => v.windows(2).all(|w| w[1] >= w[0]),
        }
    }

    /// Checks the rate invariants on `[0, s_max]`: `f(0) ≥ 2` finite, and
    /// non-decreasing on a log-spaced sweep.
    pub fn validate_on(&self, s_max: f64) -> Result<()> {
        let f0 = self.value(0.0);
        if !f0.is_finite() || f0 < 2.0 {
            return Err(Error::InvalidRate(format!("f(0) = {} but rates must satisfy f(0) >= 2", f0)));
        }
        let mut pts = vec![0.0];
        pts.extend(log_grid_per_decade(1e-6, s_max, POINTS_PER_DECADE / 4));
        let mut prev = f64::NEG_INFINITY;
        for &s in &pts {
            let v = self.ln_value(s);
            if v.is_nan() {
                return Err(Error::InvalidRate(format!("f({}) is not a number", s)));
            }
            if v < prev - 1e-12 * prev.abs().max(1.0) {
                return Err(Error::InvalidRate(format!("f decreases near s = {}", s)));
            }
            prev = v;
        }
        Ok(())
    }

    /// [`validate_on`](Self::validate_on) over the default window `[0, 10⁶]`.
    pub fn validate(&self) -> Result<()> {
        self.validate_on(1e6)
    }
}

fn interp_linear(s: &[f64], v: &[f64], x: f64) -> f64 {
    if x <= s[0] {
        return v[0];
    }
    let n = s.len();
    if x >= s[n - 1] {
        return v[n - 1];
    }
    let i = s.partition_point(|&k| k <= x) - 1;
    let w = (x - s[i]) / (s[i + 1] - s[i]);
    v[i] + w * (v[i + 1] - v[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(RateExpr::power_shift(2.0, 1.0, 1.0).value(5.0), 7.0);
        assert_eq!(RateExpr::constant(2.0).value(1e6), 2.0);
        let e = RateExpr::compose(RateExpr::exp(RateExpr::identity()), RateExpr::power_shift(0.0, 1.0, 0.5));
        assert_eq!(e.value(4.0), 2f64.exp());
    }

    #[test]
    fn json_format() {
        let f: RateExpr = serde_json::from_str(r#"{"kind":"power_shift","c0":2,"a":1,"alpha":1}"#).unwrap();
        assert_eq!(f, RateExpr::power_shift(2.0, 1.0, 1.0));
        let g: RateExpr = serde_json::from_str(r#"{"kind":"exp","inner":{"kind":"const","c":2}}"#).unwrap();
        assert_eq!(g.value(0.0), 2f64.exp());
        let back: RateExpr = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn overflow_saturates_with_flag() {
        let f = RateExpr::exp(RateExpr::exp(RateExpr::identity()));
        let e = f.eval(10.0);
        assert!(e.saturated);
        assert_eq!(e.value, f64::MAX);
        assert_eq!(f.ln_value(10.0), 10f64.exp());
        assert!(!f.eval(1.0).saturated);
    }

    #[test]
    fn validation() {
        assert!(RateExpr::constant(1.0).validate().is_err());
        assert!(RateExpr::power_shift(2.0, -1.0, 1.0).validate().is_err());
        assert!(RateExpr::log_shift(2.0, 1.0).validate().is_ok());
        let s = RateExpr::sampled(vec![0.0, 1.0, 2.0], vec![2.0, 3.0, 2.5]).unwrap();
        assert!(!s.structurally_nondecreasing());
        assert!(s.validate().is_err());
    }

    #[test]
    fn sampled_interpolates() {
        let s = RateExpr::sampled(vec![0.0, 10.0], vec![2.0, 12.0]).unwrap();
        assert!((s.value(5.3) - 7.3).abs() < 1e-15);
        assert_eq!(s.value(20.0), 12.0);
    }

    #[test]
    fn log_domain_products() {
        let f = RateExpr::product(vec![RateExpr::exp(RateExpr::power_shift(0.0, 1.0, 1.0)); 3]);
        assert!((f.ln_value(400.0) - 1200.0).abs() < 1e-9);
        let g = RateExpr::sum(vec![RateExpr::exp(RateExpr::identity()), RateExpr::exp(RateExpr::identity())]);
        assert!((g.ln_value(800.0) - (800.0 + 2f64.ln())).abs() < 1e-9);
    }
}
