//! Uniformly sampled complex signals on a time grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::fmt_num;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<Complex64>,
    /// Number of derivatives of the underlying function that are known to
    /// exist (metadata only).
    #[serde(default)]
    pub deriv_order: u32,
}

impl SampledSignal {
    pub fn new(t0: f64, dt: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("bad grid t0 = {}, dt = {}", t0, dt)));
        }
        Ok(SampledSignal { t0, dt, values, deriv_order: 0 })
    }

    pub fn from_fn(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..n).map(|i| f(t0 + dt * i as f64)).collect();
        SampledSignal { t0, dt, values, deriv_order: 0 }
    }

    pub fn from_real_fn(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(t0, dt, n, |t| Complex64::new(f(t), 0.0))
    }

    pub fn with_deriv_order(mut self, k: u32) -> Self {
        self.deriv_order = k;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len().saturating_sub(1))
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.t(i)).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        SampledSignal { values: self.values.iter().map(|&z| f(z)).collect(), ..self.clone() }
    }

    /// Index of the sample nearest to `t`, if `t` lies on the grid range.
    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        if x < -0.5 || x > self.len() as f64 - 0.5 {
            return None;
        }
        Some(x.round().max(0.0) as usize)
    }

    /// Four-point Lagrange interpolation; zero outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Complex64 {
        let n = self.len();
        let x = (t - self.t0) / self.dt;
        if n == 0 || x < 0.0 || x > (n - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        if n < 4 {
            let i = (x.floor() as usize).min(n.saturating_sub(2));
            if n == 1 {
                return self.values[0];
            }
            let w = x - i as f64;
            return self.values[i] * (1.0 - w) + self.values[i + 1] * w;
        }
        let i = (x.floor() as usize).clamp(1, n - 3);
        let u = x - i as f64;
        let (a, b, c, d) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        let wa = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let wb = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let wc = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let wd = (u + 1.0) * u * (u - 1.0) / 6.0;
        a * wa + b * wb + c * wc + d * wd
    }

    /// Piecewise-linear interpolation; zero outside the sampled range.
    pub fn interpolate_linear(&self, t: f64) -> f64 {
        let n = self.len();
        let x = (t - self.t0) / self.dt;
        if n < 2 || x < 0.0 || x > (n - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(n - 2);
        let w = x - i as f64;
        self.values[i].re * (1.0 - w) + self.values[i + 1].re * w
    }

    /// Trapezoid rule for `∫ f dt`.
    pub fn integral(&self) -> Complex64 {
        let n = self.len();
        if n < 2 {
            return Complex64::new(0.0, 0.0);
        }
        let inner: Complex64 = self.values[1..n - 1].iter().sum();
        (inner + (self.values[0] + self.values[n - 1]) * 0.5) * self.dt
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖f‖_p` by the trapezoid rule; `p = ∞` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.sup_norm();
        }
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * z.norm().powf(p)
            })
            .sum();
        (s * self.dt).powf(1.0 / p)
    }

    /// Second-order central difference (one-sided at the ends).
    pub fn derivative(&self) -> Self {
        let n = self.len();
        let v = &self.values;
        let h = self.dt;
        let values = (0..n)
            .map(|i| {
                if n < 2 {
                    Complex64::new(0.0, 0.0)
                } else if i == 0 {
                    (v[1] - v[0]) / h
                } else if i == n - 1 {
                    (v[n - 1] - v[n - 2]) / h
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                }
            })
            .collect();
        SampledSignal { values, deriv_order: self.deriv_order.saturating_sub(1), ..self.clone() }
    }

    /// Columns `t, re, im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (i, z) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", fmt_num(self.t(i)), fmt_num(z.re), fmt_num(z.im)));
        }
        out
    }

    /// Reads `t, re, im` columns (`im` optional); the grid must be uniform.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64> {
                match rec.get(k) {
                    None => Ok(0.0),
                    Some(s) => s.trim().parse::<f64>().map_err(|e| Error::Format(format!("{}: {:?}", e, s))),
                }
            };
            ts.push(num(0)?);
            vs.push(Complex64::new(num(1)?, num(2)?));
        }
        if ts.len() < 2 {
            return Err(Error::Format("signal CSV needs at least two rows".into()));
        }
        let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        for (i, &t) in ts.iter().enumerate() {
            if (t - (ts[0] + dt * i as f64)).abs() > 1e-9 * dt.max(t.abs()) {
                return Err(Error::Format(format!("non-uniform grid at row {}", i)));
            }
        }
        SampledSignal::new(ts[0], dt, vs)
    }

    /// Little-endian binary: `t0: f64, dt: f64, n: u64`, then `n` pairs `re, im`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.len());
        out.extend_from_slice(&self.t0.to_le_bytes());
        out.extend_from_slice(&self.dt.to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for z in &self.values {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        let f = |k: usize| f64::from_le_bytes(b[k..k + 8].try_into().unwrap());
        if b.len() < 24 {
            return Err(Error::Format("binary signal shorter than its header".into()));
        }
        let n = u64::from_le_bytes(b[16..24].try_into().unwrap()) as usize;
        if b.len() != 24 + 16 * n {
            return Err(Error::Format(format!("binary signal of {} bytes does not hold {} samples", b.len(), n)));
        }
        let values = (0..n).map(|i| Complex64::new(f(24 + 16 * i), f(32 + 16 * i))).collect();
        SampledSignal::new(f(0), f(8), values)
    }

    /// Reads a `.csv` or binary file, chosen by extension.
    pub fn read(path: &std::path::Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "csv") {
            Self::from_csv(&std::fs::read_to_string(path)?)
        } else {
            Self::from_bytes(&std::fs::read(path)?)
        }
    }
}
