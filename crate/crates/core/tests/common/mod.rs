//! Multiprecision reference sums shared by the integration tests.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use tauberlab::extremal::MeasureParams;
use tauberlab::semigroup::DiagonalSystem;
use tauberlab::Complex64;

/// Bits; the atom sums cancel to `x^k/k!` for small `t/A`.
pub const P: usize = 1024;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Ctx {
    cc: Consts,
}

#[derive(Clone)]
pub struct Big {
    re: BigFloat,
    im: BigFloat,
}

fn bf(x: f64) -> BigFloat {
    BigFloat::from_f64(x, P)
}

fn to_f64(x: &BigFloat) -> f64 {
    x.to_string().parse().unwrap_or(f64::NAN)
}

impl Big {
    pub fn new(z: Complex64) -> Self {
        Big { re: bf(z.re), im: bf(z.im) }
    }

    pub fn zero() -> Self {
        Big::new(Complex64::new(0.0, 0.0))
    }

    pub fn add(&self, o: &Big) -> Big {
        Big { re: self.re.add(&o.re, P, RM), im: self.im.add(&o.im, P, RM) }
    }

    pub fn sub(&self, o: &Big) -> Big {
        Big { re: self.re.sub(&o.re, P, RM), im: self.im.sub(&o.im, P, RM) }
    }

    pub fn mul(&self, o: &Big) -> Big {
        let re = self.re.mul(&o.re, P, RM).sub(&self.im.mul(&o.im, P, RM), P, RM);
        let im = self.re.mul(&o.im, P, RM).add(&self.im.mul(&o.re, P, RM), P, RM);
        Big { re, im }
    }

    pub fn div(&self, o: &Big) -> Big {
        let den = o.re.mul(&o.re, P, RM).add(&o.im.mul(&o.im, P, RM), P, RM);
        let num = self.mul(&Big { re: o.re.clone(), im: o.im.neg() });
        Big { re: num.re.div(&den, P, RM), im: num.im.div(&den, P, RM) }
    }

    pub fn scale(&self, x: &BigFloat) -> Big {
        Big { re: self.re.mul(x, P, RM), im: self.im.mul(x, P, RM) }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

impl Ctx {
    pub fn new() -> Self {
        Ctx { cc: Consts::new().expect("constants cache") }
    }

    /// `e^{iθ}` with `θ = 2πj/n` formed at full precision.
    pub fn root(&mut self, j: u32, n: u32) -> Big {
        let two_pi = self.cc.pi(P, RM).mul(&bf(2.0), P, RM);
        let th = two_pi.mul(&bf(j as f64), P, RM).div(&bf(n as f64), P, RM);
        Big { re: th.cos(P, RM, &mut self.cc), im: th.sin(P, RM, &mut self.cc) }
    }

    /// `e^{z}`.
    pub fn exp(&mut self, z: &Big) -> Big {
        let m = z.re.exp(P, RM, &mut self.cc);
        Big { re: m.mul(&z.im.cos(P, RM, &mut self.cc), P, RM), im: m.mul(&z.im.sin(P, RM, &mut self.cc), P, RM) }
    }

    /// The `k+1`-st roots of unity.
    pub fn roots(&mut self, k: u32) -> Vec<Big> {
        (0..=k).map(|j| self.root(j, k + 1)).collect()
    }

    /// `Σ_j q^j/(z − q^j)` over precomputed roots.
    pub fn roots_sum(roots: &[Big], z: Complex64) -> Complex64 {
        let z = Big::new(z);
        let mut acc = Big::zero();
        for q in roots {
            acc = acc.add(&q.div(&z.sub(q)));
        }
        acc.to_complex()
    }

    fn atoms(&mut self, p: &MeasureParams) -> Vec<(Big, Big)> {
        let inv_a = bf(1.0).div(&bf(p.a), P, RM);
        (0..=p.k)
            .map(|j| {
                let q = self.root(j, p.k + 1);
                let off = q.scale(&inv_a);
                (q, off)
            })
            .collect()
    }

    /// `Σ_j q^j/(d − q^j/A)`: the Cauchy transform at `w + d` without its prefactor.
    pub fn cauchy_offset(&mut self, p: &MeasureParams, d: Complex64) -> Complex64 {
        let d = Big::new(d);
        let mut acc = Big::zero();
        for (q, off) in self.atoms(p) {
            acc = acc.add(&q.div(&d.sub(&off)));
        }
        acc.to_complex()
    }

    /// `(ln|S|, arg S)` for `S = Σ_j q^j ζ_j^n e^{tζ_j}`, `ζ_j = w + q^j/A`,
    /// without the prefactor; `n ∈ {0, 1}`.
    pub fn laplace(&mut self, p: &MeasureParams, t: f64, n: u32) -> (f64, f64) {
        let tb = bf(t);
        let w = Big::new(p.w);
        let mut acc = Big::zero();
        for (q, off) in self.atoms(p) {
            let zeta = w.add(&off);
            let mut term = q.mul(&self.exp(&zeta.scale(&tb)));
            if n == 1 {
                term = term.mul(&zeta);
            }
            acc = acc.add(&term);
        }
        // rescale before leaving the multiprecision range of f64
        let mag = acc.re.mul(&acc.re, P, RM).add(&acc.im.mul(&acc.im, P, RM), P, RM);
        (0.5 * to_ln(&mag), big_arg(&acc))
    }

    /// Orbit norm `(Σ_n |P₂P₁x_n|² e^{2a_n t}|ω−λ_n|^{−2m})^{1/2}`.
    pub fn orbit_norm(&mut self, sys: &DiagonalSystem, x: &[Complex64], m: u32, t: f64) -> f64 {
        let mut acc = bf(0.0);
        for n in 0..sys.len() {
            let c = bf(sys.p2[n]).mul(&bf(sys.p1[n]), P, RM);
            let xx = Big::new(x[n]);
            let xn = xx.re.mul(&xx.re, P, RM).add(&xx.im.mul(&xx.im, P, RM), P, RM);
            let e = bf(2.0).mul(&bf(sys.a[n]), P, RM).mul(&bf(t), P, RM).exp(P, RM, &mut self.cc);
            let d = Big::new(Complex64::new(sys.omega - sys.a[n], -sys.xi[n]));
            let dn = d.re.mul(&d.re, P, RM).add(&d.im.mul(&d.im, P, RM), P, RM);
            let mut den = bf(1.0);
            for _ in 0..m {
                den = den.mul(&dn, P, RM);
            }
            let term = c.mul(&c, P, RM).mul(&xn, P, RM).mul(&e, P, RM).div(&den, P, RM);
            acc = acc.add(&term, P, RM);
        }
        to_f64(&acc).sqrt()
    }
}

/// `arg z` from the ratio of the parts, which stays in range when the parts do not.
fn big_arg(z: &Big) -> f64 {
    use std::f64::consts::{FRAC_PI_2, PI};
    if z.re.is_zero() {
        return if z.im.is_negative() { -FRAC_PI_2 } else { FRAC_PI_2 };
    }
    if z.re.abs_cmp(&z.im).unwrap_or(0) >= 0 {
        let a = to_f64(&z.im.div(&z.re, P, RM)).atan();
        match (z.re.is_negative(), z.im.is_negative()) {
            (false, _) => a,
            (true, false) => a + PI,
            (true, true) => a - PI,
        }
    } else {
        let a = to_f64(&z.re.div(&z.im, P, RM)).atan();
        if z.im.is_negative() {
            -FRAC_PI_2 - a
        } else {
            FRAC_PI_2 - a
        }
    }
}

/// `ln x` for positive `x` whose magnitude may fall outside f64.
fn to_ln(x: &BigFloat) -> f64 {
    let e = x.exponent().unwrap_or(0) as i32;
    let mut s = x.clone();
    s.set_exponent(0);
    let scaled = to_f64(&s);
    scaled.ln() + e as f64 * std::f64::consts::LN_2
}
