//! Diagonal generators `A = diag(a_n + iξ_n)` with diagonal truncations
//! `P₁`, `P₂`: truncated resolvents, orbits, and the rate they predict.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_grid, KahanSum};
use crate::rate::{EnvelopeSpec, InverseOptions, RateExpr};
use crate::report::{point, VerificationReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSystem {
    pub xi: Vec<f64>,
    pub a: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub omega: f64,
    /// Allows `ω = 0` (invertible generator).
    #[serde(default)]
    pub invertible: bool,
}

impl DiagonalSystem {
    pub fn new(xi: Vec<f64>, a: Vec<f64>, p1: Vec<f64>, p2: Vec<f64>, omega: f64) -> Result<Self> {
        let s = DiagonalSystem {
            xi,
            a,
            p1,
            p2,
            omega,
            invertible: false,
        };
        s.validate()?;
        Ok(s)
    }

    /// Uses `ω = 0`, relying on `0` not being an eigenvalue.
    pub fn invertible(mut self) -> Result<Self> {
        self.invertible = true;
        self.omega = 0.0;
        self.validate()?;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        self.omega = omega;
        self.validate()?;
        Ok(self)
    }

    /// `n` modes with `ξ` log-spaced on `[xi_min, xi_max]` and abscissas and
    /// weights given as functions of `ξ`.
    pub fn log_spaced(
        n: usize,
        xi_min: f64,
        xi_max: f64,
        a: impl Fn(f64) -> f64,
        p1: impl Fn(f64) -> f64,
        p2: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let xi = log_grid(xi_min, xi_max, n);
        let av = xi.iter().map(|&x| a(x)).collect();
        let w1 = xi.iter().map(|&x| p1(x)).collect();
        let w2 = xi.iter().map(|&x| p2(x)).collect();
        Self::new(xi, av, w1, w2, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.xi.len();
        if n == 0 || self.a.len() != n || self.p1.len() != n || self.p2.len() != n {
            return Err(Error::InvalidParameter("mode arrays must be nonempty and of equal length".into()));
        }
        if self.xi[0] < 0.0 || self.xi.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("frequencies must be nonnegative and increasing".into()));
        }
        if self.a.iter().any(|&a| !(a < 0.0 && a.is_finite())) {
            return Err(Error::InvalidParameter("abscissas must be negative".into()));
        }
        if self.p1.iter().chain(&self.p2).any(|&w| !(0.0..=1.0).contains(&w)) {
            return Err(Error::InvalidParameter("weights must lie in [0, 1]".into()));
        }
        if self.invertible {
            if self.omega != 0.0 {
                return Err(Error::InvalidParameter("the invertible variant uses omega = 0".into()));
            }
        } else if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {}", self.omega)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    pub fn eigenvalue(&self, n: usize) -> Complex64 {
        Complex64::new(self.a[n], self.xi[n])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sys: DiagonalSystem = serde_json::from_str(s)?;
        sys.validate()?;
        Ok(sys)
    }
}

/// `‖P₂(z−A)^{-1}P₁‖ = max_n P₂(n)P₁(n)/|z − λ_n|`.
pub fn truncated_resolvent_norm(sys: &DiagonalSystem, z: Complex64) -> Result<f64> {
    let mut best = 0.0f64;
    for n in 0..sys.len() {
        let d = (z - sys.eigenvalue(n)).norm();
        if d == 0.0 {
            return Err(Error::Pole(format!("z = {} is the eigenvalue of mode {}", z, n)));
        }
        best = best.max(sys.p2[n] * sys.p1[n] / d);
    }
    Ok(best)
}

/// Largest `P₂P₁/|z − λ_n|` over `z = x + iy`, `x ∈ [−1/m, 0]`.
fn slice_sup(sys: &DiagonalSystem, y: f64, m: f64) -> f64 {
    let left = -1.0 / m;
    let mut best = 0.0f64;
    for n in 0..sys.len() {
        let w = sys.p2[n] * sys.p1[n];
        if w == 0.0 {
            continue;
        }
        let x = sys.a[n].clamp(left, 0.0);
        let d = Complex64::new(x - sys.a[n], y - sys.xi[n]).norm();
        best = best.max(if d == 0.0 { f64::INFINITY } else { w / d });
    }
    best
}

/// Parameters of [`fit_m_k`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub s_max: f64,
    /// Extra log-spaced heights besides the mode frequencies.
    pub n_grid: usize,
    /// `M(ξ_n) ≥ θ/|a_n|`; keeps eigenvalues a fixed fraction away from `Ω_M`.
    pub theta: f64,
    /// Modes within this distance above `s` already count at `s`.
    pub lookahead: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            s_max: 1e4,
            n_grid: 256,
            theta: 1.25,
            lookahead: 0.5,
        }
    }
}

fn knots(sys: &DiagonalSystem, win: &FitWindow) -> Vec<f64> {
    let mut s = vec![0.0, win.s_max];
    s.extend(log_grid(1e-3, win.s_max, win.n_grid));
    for &x in &sys.xi {
        for y in [x - win.lookahead, x, x + win.lookahead] {
            if y > 0.0 && y < win.s_max {
                s.push(y);
            }
        }
    }
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    s
}

/// Monotone sampled `(M, K)` for which `Ω_M` is free of spectrum and
/// `‖P₂(z−A)^{-1}P₁‖ ≤ K(|Im z|)` at the knots. `K` is raised to at least
/// `max(2+s, M(s))`.
pub fn fit_m_k(sys: &DiagonalSystem, win: &FitWindow) -> Result<(RateExpr, RateExpr)> {
    let s = knots(sys, win);
    let mut m = Vec::with_capacity(s.len());
    let mut j = 0;
    let mut cur = 2.0f64;
    for &x in &s {
        while j < sys.len() && sys.xi[j] <= x + win.lookahead {
            cur = cur.max(win.theta / -sys.a[j]);
            j += 1;
        }
        m.push(cur);
    }
    let sup: Vec<f64> = s.iter().zip(&m).map(|(&y, &mv)| slice_sup(sys, y, mv)).collect();
    let mut k = vec![2.0f64; s.len()];
    let mut run = 2.0f64;
    for i in 0..s.len() {
        run = run.max(sup[i]);
        if i + 1 < s.len() {
            run = run.max(sup[i + 1]);
        }
        k[i] = run;
    }
    let m = RateExpr::sampled(s.clone(), m)?;
    // enlarging K is free; this keeps K(s) ≥ max(s, M(s)) past the spectrum
    let k = RateExpr::max(vec![RateExpr::sampled(s, k)?, RateExpr::power_shift(2.0, 1.0, 1.0), m.clone()]);
    Ok((m, k))
}

/// `‖P₂T(t)(ω−A)^{-m}P₁x‖ = (Σ_n |P₂(n)|² e^{2a_n t} |ω−λ_n|^{−2m} |P₁(n)x_n|²)^{1/2}`.
pub fn orbit_norm(sys: &DiagonalSystem, x: &[Complex64], m: u32, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("orbit_norm needs t >= 0, got {}", t)));
    }
    if x.len() != sys.len() {
        return Err(Error::InvalidParameter(format!("{} coefficients for {} modes", x.len(), sys.len())));
    }
    let om = Complex64::new(sys.omega, 0.0);
    let lns: Vec<f64> = (0..sys.len())
        .filter_map(|n| {
            let c = sys.p2[n] * sys.p1[n] * x[n].norm();
            (c != 0.0).then(|| c.ln() + sys.a[n] * t - m as f64 * (om - sys.eigenvalue(n)).norm().ln())
        })
        .collect();
    let top = lns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    // factor out the largest term so that tiny norms do not underflow
    let mut acc = KahanSum::default();
    for ln in lns {
        acc.add((2.0 * (ln - top)).exp());
    }
    Ok(top.exp() * acc.value().sqrt())
}

/// Horizon and sampling for [`corollary_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub horizon: f64,
    pub n: usize,
    /// Allowed relative growth when the horizon is doubled.
    pub tol: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            horizon: 1e3,
            n: 2000,
            tol: 1e-3,
        }
    }
}

/// `(t, orbit, envelope, orbit/envelope)` on `n` points of `[0, horizon]`.
pub fn orbit_trace(
    sys: &DiagonalSystem,
    x: &[Complex64],
    spec: &EnvelopeSpec,
    horizon: f64,
    n: usize,
) -> Result<Vec<[f64; 4]>> {
    let opts = InverseOptions::default();
    (0..n)
        .map(|i| {
            let t = horizon * i as f64 / (n - 1).max(1) as f64;
            let o = orbit_norm(sys, x, spec.order, t)?;
            let e = spec.envelope(t, opts)?;
            Ok([t, o, e, o / e])
        })
        .collect()
}

pub fn orbit_trace_csv(rows: &[[f64; 4]]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "norm", "envelope", "ratio"])?;
    for r in rows {
        w.write_record(r.iter().map(|v| crate::report::fmt_num(*v)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

fn weighted_measure(trace: &[[f64; 4]], p: f64) -> (f64, f64) {
    if p.is_infinite() {
        return trace
            .iter()
            .map(|r| (r[3], r[0]))
            .fold((0.0, f64::NAN), |a, b| if b.0 > a.0 { b } else { a });
    }
    let mut acc = KahanSum::default();
    for w in trace.windows(2) {
        acc.add(0.5 * (w[1][0] - w[0][0]) * (w[0][3].powf(p) + w[1][3].powf(p)));
    }
    (acc.value().powf(1.0 / p), f64::NAN)
}

/// `sup_t w_{M_K}(c₁t)^m‖P₂T(t)(ω−A)^{-m}P₁x‖` (or its grid `Lᵖ` norm) on
/// the horizon and on twice the horizon; passes when finite and the doubled
/// horizon adds at most `tol` relative growth.
pub fn corollary_check(
    sys: &DiagonalSystem,
    x: &[Complex64],
    spec: &EnvelopeSpec,
    grid: &TimeGrid,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("corollary");
    let long = orbit_trace(sys, x, spec, 2.0 * grid.horizon, 2 * grid.n - 1)?;
    let short = &long[..grid.n];
    let (a, at) = weighted_measure(short, spec.p.0);
    let (b, bt) = weighted_measure(&long, spec.p.0);
    for r in short {
        rep.row("orbit", r[0], r[1], r[2], r[3], r[3].is_finite());
    }
    let pass = a.is_finite() && b.is_finite() && b <= a * (1.0 + grid.tol) + f64::MIN_POSITIVE;
    rep.observe("weighted", a, point(at), a.is_finite());
    rep.observe("weighted_doubled", b, point(bt), pass);
    rep.observed = a;
    rep.worst_point = point(at);
    rep.pass = pass;
    Ok(rep)
}

/// Inputs of the local-energy rate: `p_m(t) ≤ C/M̃^{-1}(c₁t)^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveRateInput {
    pub delta: f64,
    pub m_tilde: RateExpr,
    pub m: u32,
    pub c: f64,
    pub c1: f64,
}

impl WaveRateInput {
    /// `min M̃(s)/log(2+s)` over a log grid of `[0, s_max]`; must be positive.
    pub fn log_lower_bound(&self, s_max: f64) -> f64 {
        let mut pts = vec![0.0];
        pts.extend(log_grid(1e-3, s_max, 256));
        pts.iter()
            .map(|&s| self.m_tilde.value(s) / (2.0 + s).ln())
            .fold(f64::INFINITY, f64::min)
    }

    /// `M = max(2, 1/δ)` and `K = C·exp(C·M̃)`.
    pub fn routed_spec(&self) -> EnvelopeSpec {
        let k = RateExpr::scale(self.c, RateExpr::exp(RateExpr::scale(self.c, self.m_tilde.clone())));
        EnvelopeSpec::new(RateExpr::constant((1.0 / self.delta).max(2.0)), k)
            .order(self.m)
            .c1(self.c1)
    }
}

/// `C/w_{M̃}(c₁t)^m`.
pub fn wave_rate(inp: &WaveRateInput, t: f64, tol: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("wave_rate needs t >= 0, got {}", t)));
    }
    let w = inp.m_tilde.w(inp.c1 * t, InverseOptions::with_tol(tol))?;
    Ok(inp.c / w.value.powi(inp.m as i32))
}

/// At each `t`, `wave_rate(t)/(C·envelope(t))` for the routed `(M, K)`;
/// passes when the ratio stays at most 1.
pub fn wave_consistency(inp: &WaveRateInput, ts: &[f64]) -> Result<VerificationReport> {
    let spec = inp.routed_spec();
    let mut rep = VerificationReport::new("wave_rate");
    let opts = InverseOptions::default();
    let mut lo = f64::INFINITY;
    let mut hi = (0.0f64, f64::NAN);
    for &t in ts {
        let r = wave_rate(inp, t, 1e-10)?;
        let e = inp.c * spec.envelope(t, opts)?;
        let q = r / e;
        rep.row("rate_vs_envelope", t, r, e, e - r, q <= 1.0 + 1e-9);
        lo = lo.min(q);
        if q > hi.0 {
            hi = (q, t);
        }
    }
    rep.observe("ratio_min", lo, None, lo > 0.0);
    rep.observe("ratio_max", hi.0, point(hi.1), hi.0 <= 1.0 + 1e-9);
    let c = inp.log_lower_bound(1e6);
    rep.observe("log_lower_bound", c, None, c > 0.0);
    rep.observed = hi.0;
    rep.worst_point = point(hi.1);
    rep.pass = rep.observations.iter().all(|o| o.pass);
    Ok(rep)
}
