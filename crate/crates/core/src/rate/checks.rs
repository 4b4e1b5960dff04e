use serde::{Deserialize, Serialize};

use super::{EnvelopeSpec, InverseOptions, RateExpr};
use crate::error::{Error, Result};
use crate::numeric::log_grid;
use crate::report::VerificationReport;

/// Scans the two standing hypotheses on `(M, K)` over `s ∈ (1, s_max]`:
/// (i) `K(s) ≥ max(s, M(s))` and (ii) `log log K(s) ≤ (s M(s))^{1-ε}`.
///
/// Observations: `cond_i_worst_margin` (relative), `cond_ii_epsilon`.
/// The headline `observed` value is the ε of (ii).
pub fn check_hypotheses(spec: &EnvelopeSpec, s_max: f64, grid_n: usize) -> Result<VerificationReport> {
    if !(s_max > 1.0) || grid_n < 2 {
        return Err(Error::InvalidParameter("check_hypotheses needs s_max > 1 and grid_n >= 2".into()));
    }
    let (m, k) = (&spec.m_rate, &spec.k_rate);
    let mut rep = VerificationReport::new("hypotheses");
    let lmax = s_max.ln();
    let mut worst_i = (f64::INFINITY, None);
    let mut eps = (1.0f64, None);
    let mut saturated = false;
    let mut any_ii = false;
    for i in 1..=grid_n {
        let s = (lmax * i as f64 / grid_n as f64).exp();
        let s = if i == grid_n { s_max } else { s };
        let ke = k.eval(s);
        saturated |= ke.saturated;
        let mv = m.value(s);
        let need = s.max(mv);
        let margin = if ke.saturated { f64::INFINITY } else { (ke.value - need) / need };
        rep.row("cond_i", s, ke.value, need, margin, margin >= 0.0);
        if margin < worst_i.0 {
            worst_i = (margin, Some(s));
        }
        let lnk = k.ln_value(s);
        if lnk > std::f64::consts::E {
            any_ii = true;
            let lnlnk = lnk.ln();
            let e_pt = 1.0 - lnlnk.ln() / (s * mv).ln();
            rep.row("cond_ii", s, lnlnk, s * mv, e_pt, e_pt > 0.0 && !ke.saturated);
            if e_pt < eps.0 {
                eps = (e_pt, Some(s));
            }
        }
    }
    if saturated {
        rep.note("K leaves double range on the window; condition (ii) cannot be certified");
        eps = (eps.0.min(0.0), eps.1);
    }
    if !any_ii {
        rep.note("K stays below e^e on the window; condition (ii) holds trivially there");
    }
    let pass_i = worst_i.0 >= 0.0;
    let pass_ii = eps.0 > 0.0;
    rep.observe("cond_i_worst_margin", worst_i.0, worst_i.1, pass_i);
    rep.observe("cond_ii_epsilon", eps.0, eps.1, pass_ii);
    rep.observed = eps.0;
    rep.worst_point = eps.1;
    rep.pass = pass_i && pass_ii;
    Ok(rep)
}

/// Largest `δ̂` with `K(w_{M_K}(t)) ≥ t^δ̂` on a log grid over `[M_K(1), t_max]`.
pub fn check_k_aux(spec: &EnvelopeSpec, t_max: f64, grid_n: usize, opts: InverseOptions) -> Result<VerificationReport> {
    let mk = spec.mk_expr();
    let lo = mk.value(1.0);
    if !(t_max > lo) || grid_n < 2 {
        return Err(Error::Domain(format!("check_k_aux needs t_max > M_K(1) = {} and grid_n >= 2", lo)));
    }
    let mut rep = VerificationReport::new("k_aux");
    let mut best = (f64::INFINITY, None);
    for t in log_grid(lo, t_max, grid_n) {
        if t <= 1.0 {
            rep.skipped += 1;
            continue;
        }
        let w = mk.w(t, opts)?;
        if w.saturated {
            rep.skipped += 1;
            continue;
        }
        let lnk = spec.k_rate.ln_value(w.value);
        let d = lnk / t.ln();
        rep.row("k_of_w", t, lnk, t.ln(), d, d > 0.0);
        if d < best.0 {
            best = (d, Some(t));
        }
    }
    if rep.rows.is_empty() {
        rep.degenerate = true;
        rep.note("M_K is constant on the window: the scanned domain is empty");
        rep.observed = f64::INFINITY;
        rep.pass = true;
    } else {
        rep.observed = best.0;
        rep.worst_point = best.1;
        rep.pass = best.0 > 0.0;
    }
    rep.observe("delta_hat", rep.observed, rep.worst_point, rep.pass);
    Ok(rep)
}

/// Scan window for [`check_submultiplicative`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubmultGrid {
    pub s_max: f64,
    pub shift_max: f64,
    /// Shifts `s' ≤ s1` enter the local constant `γ₀`.
    pub s1: f64,
    pub n: usize,
    pub tol: f64,
}

impl Default for SubmultGrid {
    fn default() -> Self {
        SubmultGrid { s_max: 1e3, shift_max: 1e2, s1: 1.0, n: 64, tol: 1e-12 }
    }
}

fn scan_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut v = vec![lo];
    if hi > lo.max(1e-3) {
        v.extend(log_grid(lo.max(1e-3), hi, n));
    }
    v
}

/// Worst ratio `M(s+s')/(N(s')M(s))` over `s ≥ s0`, plus the local constant
/// `γ₀ = sup_{s' ≤ s1} M(s+s')/M(s)`.
pub fn check_submultiplicative(m: &RateExpr, n: &RateExpr, s0: f64, grid: SubmultGrid) -> Result<VerificationReport> {
    if !(s0 >= 0.0) || grid.n < 2 {
        return Err(Error::InvalidParameter("check_submultiplicative needs s0 >= 0 and n >= 2".into()));
    }
    let mut rep = VerificationReport::new("submultiplicative");
    let ss = scan_points(s0, grid.s_max.max(s0), grid.n);
    let mut shifts = scan_points(0.0, grid.shift_max, grid.n);
    if grid.s1 > 0.0 && grid.s1 <= grid.shift_max {
        shifts.push(grid.s1);
        shifts.sort_by(f64::total_cmp);
    }
    let mut worst = (f64::NEG_INFINITY, None);
    let mut gamma0 = (f64::NEG_INFINITY, None);
    for &s in &ss {
        let lm = m.ln_value(s);
        for &sp in &shifts {
            let l = m.ln_value(s + sp) - n.ln_value(sp) - lm;
            if l > worst.0 {
                worst = (l, Some(s));
            }
            if sp <= grid.s1 {
                let g = m.ln_value(s + sp) - lm;
                if g > gamma0.0 {
                    gamma0 = (g, Some(s));
                }
            }
        }
        rep.row("worst_over_shifts", s, worst.0.exp(), 1.0, 1.0 - worst.0.exp(), worst.0.exp() <= 1.0 + grid.tol);
    }
    let ratio = worst.0.exp();
    let pass = ratio <= 1.0 + grid.tol;
    rep.observe("worst_ratio", ratio, worst.1, pass);
    rep.observe("gamma0", gamma0.0.exp(), gamma0.1, gamma0.0.is_finite());
    rep.observed = ratio;
    rep.worst_point = worst.1;
    rep.pass = pass;
    Ok(rep)
}

/// Observed `sup_{s0 ≤ s ≤ s_max} M(s+shift)/M(s)`: the value a
/// submultiplicative majorant `N` must at least take at `shift`.
pub fn observed_shift_ratio(m: &RateExpr, shift: f64, s0: f64, s_max: f64, n: usize) -> f64 {
    scan_points(s0, s_max, n)
        .into_iter()
        .map(|s| m.ln_value(s + shift) - m.ln_value(s))
        .fold(f64::NEG_INFINITY, f64::max)
        .exp()
}
