use serde::{Deserialize, Serialize};

use super::RateExpr;
use crate::error::{Error, Result};

/// Controls for [`RateExpr::right_inverse`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseOptions {
    /// Bisection stops once the bracket is below `tol·max(1, s)`.
    pub tol: f64,
    /// Largest `s` searched; hitting it sets the saturation flag.
    pub cap: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions { tol: 1e-10, cap: 1e12 }
    }
}

impl InverseOptions {
    pub fn with_tol(tol: f64) -> Self {
        InverseOptions { tol, ..Default::default() }
    }

    pub fn with_cap(self, cap: f64) -> Self {
        InverseOptions { cap, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inverse {
    pub value: f64,
    pub saturated: bool,
}

impl RateExpr {
    /// `sup{s ≥ 0 : f(s) ≤ t}`, i.e. the supremum selection of `f⁻¹(t)`.
    pub fn right_inverse(&self, t: f64, opts: InverseOptions) -> Result<Inverse> {
        if !(opts.tol > 0.0) || !(opts.cap > 0.0) {
            return Err(Error::InvalidParameter("right_inverse needs tol > 0 and cap > 0".into()));
        }
        let f0 = self.value(0.0);
        if t.is_nan() || t < f0 {
            return Err(Error::Domain(format!("t = {} is below f(0) = {}", t, f0)));
        }
        self.bisect_inverse(t, opts)
    }

    /// Bracket and bisect assuming `f(1) ≤ t` or `f(0) ≤ t`.
    fn bisect_inverse(&self, t: f64, opts: InverseOptions) -> Result<Inverse> {
        // Grow the bracket geometrically from s = 1.
        let (mut lo, mut hi) = (0.0, 1.0f64.min(opts.cap));
        loop {
            if !(self.value(hi) <= t) {
                break;
            }
            lo = hi;
            if hi >= opts.cap {
                return Ok(Inverse { value: opts.cap, saturated: true });
            }
            hi = (hi * 2.0).min(opts.cap);
        }
        for _ in 0..4000 {
            if hi - lo <= opts.tol * lo.max(1.0) {
                break;
            }
            let mid = lo + 0.5 * (hi - lo);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Inverse { value: lo + 0.5 * (hi - lo), saturated: false })
    }

    /// `w_f(t)`: 1 below `f(1)`, the right inverse above.
    pub fn w(&self, t: f64, opts: InverseOptions) -> Result<Inverse> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("w needs t >= 0, got {}", t)));
        }
        if t < self.value(1.0) {
            return Ok(Inverse { value: 1.0, saturated: false });
        }
        if !(opts.tol > 0.0) || !(opts.cap > 0.0) {
            return Err(Error::InvalidParameter("w needs tol > 0 and cap > 0".into()));
        }
        // t ≥ f(1) here, so the bracket is valid even if f(0) > t
        let r = self.bisect_inverse(t, opts)?;
        Ok(Inverse { value: r.value.max(1.0), saturated: r.saturated })
    }
}

/// Free-function form of [`RateExpr::right_inverse`].
pub fn right_inverse(f: &RateExpr, t: f64, opts: InverseOptions) -> Result<Inverse> {
    f.right_inverse(t, opts)
}

/// Free-function form of [`RateExpr::w`].
pub fn w_of(f: &RateExpr, t: f64, opts: InverseOptions) -> Result<Inverse> {
    f.w(t, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_inverse() {
        let f = RateExpr::power_shift(2.0, 1.0, 2.0);
        let r = f.right_inverse(6.0, InverseOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        assert!(!r.saturated);
        assert!(f.right_inverse(1.0, InverseOptions::default()).is_err());
    }

    #[test]
    fn constant_saturates() {
        let r = RateExpr::constant(2.0).right_inverse(2.0, InverseOptions::default()).unwrap();
        assert!(r.saturated);
        assert_eq!(r.value, 1e12);
    }

    #[test]
    fn plateau_right_endpoint() {
        let f = RateExpr::sampled(vec![0.0, 1.0, 3.0, 4.0], vec![2.0, 5.0, 5.0, 9.0]).unwrap();
        let r = f.right_inverse(5.0, InverseOptions::default()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn w_branches() {
        let f = RateExpr::power_shift(2.0, 1.0, 2.0);
        let o = InverseOptions::default();
        assert_eq!(f.w(1.0, o).unwrap().value, 1.0);
        assert!((f.w(6.0, o).unwrap().value - 2.0).abs() < 1e-9);
        let g = RateExpr::log_shift(2.0, 1.0);
        let want = 2f64.exp() - 1.0;
        assert!((g.w(4.0, o).unwrap().value - want).abs() < 1e-9);
    }
}
