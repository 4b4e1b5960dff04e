use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// `P_y(t) = y / (π(t² + y²))`.
pub fn poisson_kernel(y: f64, t: f64) -> f64 {
    y / (PI * (t * t + y * y))
}

/// `(P_y * g)(t)` for the piecewise-linear interpolant of the real part of
/// `g` (zero outside its range), integrated in closed form cell by cell.
pub fn poisson_at(g: &SampledSignal, y: f64, t: f64) -> f64 {
    let n = g.len();
    if n < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut u_hi = t - g.t0;
    for i in 0..n - 1 {
        let u_lo = t - g.t(i + 1);
        let (g0, g1) = (g.values[i].re, g.values[i + 1].re);
        if g0 != 0.0 || g1 != 0.0 {
            let (a, b) = (u_hi / y, u_lo / y);
            let datan = if a * b > -1.0 { ((a - b) / (1.0 + a * b)).atan() } else { a.atan() - b.atan() };
            let slope = (g1 - g0) / g.dt;
            let alpha = g0 + slope * u_hi;
            let mut part = alpha * datan / PI;
            if slope != 0.0 {
                let dlog = ((u_hi - u_lo) * (u_hi + u_lo) / (u_lo * u_lo + y * y)).ln_1p();
                part -= slope * y / (2.0 * PI) * dlog;
            }
            acc += part;
        }
        u_hi = u_lo;
    }
    acc
}

/// `P_y * g` on the grid of `g`.
pub fn poisson_convolve(g: &SampledSignal, y: f64) -> Result<SampledSignal> {
    if !(y > 0.0) {
        return Err(Error::InvalidParameter(format!("Poisson height must be positive, got {}", y)));
    }
    Ok(SampledSignal::from_real_fn(g.t0, g.dt, g.len(), |t| poisson_at(g, y, t)))
}

/// `∫ P_y` over `[-10⁸·max(y,1), 10⁸·max(y,1)]` through the same quadrature
/// as [`poisson_at`].
pub fn poisson_mass(y: f64) -> f64 {
    let w = 1e8 * y.max(1.0);
    let n = 2001;
    let one = SampledSignal::from_real_fn(-w, 2.0 * w / (n - 1) as f64, n, |_| 1.0);
    poisson_at(&one, y, 0.0)
}
