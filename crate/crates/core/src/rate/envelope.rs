use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{InverseOptions, RateExpr};
use crate::error::{invalid, Result};

/// An exponent `p ∈ (1, ∞]`; serialized as a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpExponent(pub f64);

impl LpExponent {
    pub const INFINITY: LpExponent = LpExponent(f64::INFINITY);

    pub fn is_infinite(&self) -> bool {
        self.0.is_infinite()
    }

    /// Conjugate exponent `p/(p-1)`.
    pub fn conjugate(&self) -> f64 {
        if self.is_infinite() {
            1.0
        } else {
            self.0 / (self.0 - 1.0)
        }
    }
}

impl Serialize for LpExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LpExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(LpExponent(x)),
            Repr::Str(s) if s == "inf" || s == "infinity" => Ok(LpExponent::INFINITY),
            Repr::Str(s) => s.parse().map(LpExponent).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MkVariant {
    /// `M(s)·log K(s)`
    #[default]
    Standard,
    /// `M(s)·log((2+s)·M(s)·K(s))`
    General,
}

/// The data fixing a decay prediction: rates `M`, `K`, derivative order `m`,
/// exponent `p`, scaling `c₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    #[serde(rename = "M")]
    pub m_rate: RateExpr,
    #[serde(rename = "K")]
    pub k_rate: RateExpr,
    #[serde(rename = "m")]
    pub order: u32,
    pub p: LpExponent,
    pub c1: f64,
    #[serde(default)]
    pub variant: MkVariant,
}

impl EnvelopeSpec {
    /// `m = 1`, `p = ∞`, `c₁ = 1`, standard variant.
    pub fn new(m_rate: RateExpr, k_rate: RateExpr) -> Self {
        EnvelopeSpec {
            m_rate,
            k_rate,
            order: 1,
            p: LpExponent::INFINITY,
            c1: 1.0,
            variant: MkVariant::Standard,
        }
    }

    pub fn order(mut self, m: u32) -> Self {
        self.order = m;
        self
    }

    pub fn c1(mut self, c1: f64) -> Self {
        self.c1 = c1;
        self
    }

    pub fn p(mut self, p: f64) -> Self {
        self.p = LpExponent(p);
        self
    }

    pub fn variant(mut self, v: MkVariant) -> Self {
        self.variant = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0) || !self.c1.is_finite() {
            return Err(invalid(format!("c1 must be positive, got {}", self.c1)));
        }
        if self.order < 1 {
            return Err(invalid("derivative order m must be at least 1"));
        }
        if !(self.p.0 > 1.0) {
            return Err(invalid(format!("p must lie in (1, inf], got {}", self.p.0)));
        }
        self.m_rate.validate()?;
        self.k_rate.validate()?;
        Ok(())
    }

    /// `M_K` as an expression tree.
    pub fn mk_expr(&self) -> RateExpr {
        let arg = match self.variant {
            MkVariant::Standard => self.k_rate.clone(),
            MkVariant::General => RateExpr::product(vec![
                RateExpr::power_shift(2.0, 1.0, 1.0),
                self.m_rate.clone(),
                self.k_rate.clone(),
            ]),
        };
        RateExpr::product(vec![self.m_rate.clone(), RateExpr::ln(arg)])
    }

    pub fn mk_rate(&self, s: f64) -> f64 {
        self.mk_expr().value(s)
    }

    /// `w_{M_K}(c₁ t)`.
    pub fn w_mk(&self, t: f64, opts: InverseOptions) -> Result<f64> {
        Ok(self.mk_expr().w(self.c1 * t, opts)?.value)
    }

    /// The predicted decay `w_{M_K}(c₁ t)^{-m}`.
    pub fn envelope(&self, t: f64, opts: InverseOptions) -> Result<f64> {
        Ok(self.w_mk(t, opts)?.powi(-(self.order as i32)))
    }
}

pub fn mk_rate(spec: &EnvelopeSpec, s: f64) -> f64 {
    spec.mk_rate(s)
}

pub fn envelope(spec: &EnvelopeSpec, t: f64, opts: InverseOptions) -> Result<f64> {
    spec.envelope(t, opts)
}

/// Membership in `Ω_M = {0 > Re z > -1/M(|Im z|)}`.
pub fn omega_contains(m_rate: &RateExpr, z: Complex64) -> bool {
    z.re < 0.0 && z.re > -1.0 / m_rate.value(z.im.abs())
}

/// The refined mollifier sequence `j·L₁(j)⋯L_n(j)·L_{n+1}(j)^{1+ε}` with
/// `L_k(j) = log∘…∘log(1+k+j)` (`k` logs).
///
/// Iterates of order three and above are clamped below at 1: taken
/// literally they are negative or undefined for small `j`.
pub fn iterated_log_sequence(n: u32, eps: f64, j: u64) -> f64 {
    let l = |k: u32| -> f64 {
        let mut x = 1.0 + k as f64 + j as f64;
        for _ in 0..k {
            x = x.ln();
        }
        if k >= 3 {
            x.max(1.0)
        } else {
            x
        }
    };
    let mut a = j as f64;
    for k in 1..=n {
        a *= l(k);
    }
    a * l(n + 1).powf(1.0 + eps)
}
