//! Small numerical helpers shared by the modules: grids, compensated sums,
//! log-domain arithmetic.

use num_complex::Complex64;

/// Default density of log-spaced scan grids.
pub const POINTS_PER_DECADE: usize = 64;

/// `n` points geometrically spaced from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "log_grid needs 0 < lo <= hi");
    if n <= 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

/// Log-spaced grid with a fixed number of points per decade.
pub fn log_grid_per_decade(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10().max(0.0);
    let n = ((decades * per_decade as f64).ceil() as usize + 1).max(2);
    log_grid(lo, hi, n)
}

/// `n` equally spaced points from `lo` to `hi`, both included.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    v[n - 1] = hi;
    v
}

/// `2π − fl(2π)`.
const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// `a·b mod 2π` in `(−π, π]`, accurate to a few ulps of `π` even when `a·b`
/// is far beyond `2π/ε`.
pub fn phase_of_product(a: f64, b: f64) -> f64 {
    let hi = a * b;
    if !hi.is_finite() {
        return f64::NAN;
    }
    let lo = a.mul_add(b, -hi);
    let n = (hi / std::f64::consts::TAU).round();
    let r = (-n).mul_add(std::f64::consts::TAU, hi);
    let r = (-n).mul_add(TAU_LO, r) + lo;
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else if r <= -std::f64::consts::PI {
        r + std::f64::consts::TAU
    } else {
        r
    }
}

/// Neumaier-compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = KahanSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// `ln(Σ exp(x_i))` without overflow. Returns `-inf` for an empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// `ln Γ(x)` for positive `x`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(n!)`, exact summation for small `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Relative difference with a floor on the denominator.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Complex number stored as `ln|z|` and `arg z`, for quantities far outside
/// double range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplex {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        ln_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn new(ln_abs: f64, arg: f64) -> Self {
        LogComplex {
            ln_abs,
            arg: wrap_angle(arg),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            return Self::ZERO;
        }
        LogComplex {
            ln_abs: z.norm().ln(),
            arg: z.arg(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn mul(self, o: LogComplex) -> LogComplex {
        LogComplex::new(self.ln_abs + o.ln_abs, self.arg + o.arg)
    }

    pub fn scale_ln(self, ln_factor: f64) -> LogComplex {
        LogComplex {
            ln_abs: self.ln_abs + ln_factor,
            arg: self.arg,
        }
    }

    /// Materialize as a double-precision complex, or `None` when `|z|`
    /// would overflow.
    pub fn to_complex(self) -> Option<Complex64> {
        if self.is_zero() {
            return Some(Complex64::new(0.0, 0.0));
        }
        if !(self.ln_abs < 709.0) {
            return None;
        }
        Some(Complex64::from_polar(self.ln_abs.exp(), self.arg))
    }

    /// `|z|` clamped into double range (overflow maps to `f64::MAX`).
    pub fn abs(self) -> f64 {
        if self.is_zero() {
            0.0
        } else if self.ln_abs >= 709.78 {
            f64::MAX
        } else {
            self.ln_abs.exp()
        }
    }
}

pub fn wrap_angle(x: f64) -> f64 {
    if !x.is_finite() {
        return 0.0;
    }
    let tau = std::f64::consts::TAU;
    let mut y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y -= tau;
    }
    y
}
