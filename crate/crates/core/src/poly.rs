//! Dense univariate polynomials of small degree, used for the exact piecewise
//! representations and their level-set computations.

pub const MAX_COEFFS: usize = 12;

/// Polynomial `c[0] + c[1] s + ... `, coefficient storage is fixed-size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Poly {
    c: [f64; MAX_COEFFS],
    len: usize,
}

impl Default for Poly {
    fn default() -> Self {
        Poly::zero()
    }
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: [0.0; MAX_COEFFS], len: 1 }
    }

    pub fn constant(v: f64) -> Self {
        let mut p = Poly::zero();
        p.c[0] = v;
        p
    }

    /// Panics if more than `MAX_COEFFS` coefficients are given.
    pub fn new(coeffs: &[f64]) -> Self {
        assert!(coeffs.len() <= MAX_COEFFS, "polynomial degree too large");
        let mut p = Poly::zero();
        p.c[..coeffs.len()].copy_from_slice(coeffs);
        p.len = coeffs.len().max(1);
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.len > 1 && self.c[self.len - 1] == 0.0 {
            self.len -= 1;
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..self.len]
    }

    pub fn degree(&self) -> usize {
        self.len - 1
    }

    pub fn is_constant(&self) -> bool {
        self.len == 1
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for k in (0..self.len).rev() {
            acc = acc * s + self.c[k];
        }
        acc
    }

    /// Value and first derivative in one Horner pass.
    #[inline]
    pub fn eval_d(&self, s: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for k in (0..self.len).rev() {
            d = d * s + v;
            v = v * s + self.c[k];
        }
        (v, d)
    }

    pub fn derivative(&self) -> Poly {
        if self.len == 1 {
            return Poly::zero();
        }
        let mut p = Poly::zero();
        for k in 1..self.len {
            p.c[k - 1] = self.c[k] * k as f64;
        }
        p.len = self.len - 1;
        p.trim();
        p
    }

    pub fn scale(&self, f: f64) -> Poly {
        let mut p = *self;
        for k in 0..p.len {
            p.c[k] *= f;
        }
        p.trim();
        p
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut p = Poly::zero();
        p.len = self.len.max(other.len);
        for k in 0..p.len {
            p.c[k] = self.c[k] + other.c[k];
        }
        p.trim();
        p
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn add_const(&self, v: f64) -> Poly {
        let mut p = *self;
        p.c[0] += v;
        p.trim();
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let len = self.len + other.len - 1;
        assert!(len <= MAX_COEFFS, "polynomial product degree too large");
        let mut p = Poly::zero();
        p.len = len;
        for i in 0..self.len {
            for j in 0..other.len {
                p.c[i + j] += self.c[i] * other.c[j];
            }
        }
        p.trim();
        p
    }

    /// `z -> P(a + b z)`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Poly {
        let lin = Poly::new(&[a, b]);
        let mut q = Poly::constant(self.c[self.len - 1]);
        for k in (0..self.len - 1).rev() {
            q = q.mul(&lin).add_const(self.c[k]);
        }
        q
    }

    /// Exact integral over `[lo, hi]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if self.len <= 1 {
            return self.c[0] * (hi - lo);
        }
        let mut a = 0.0;
        let mut b = 0.0;
        for k in (0..self.len).rev() {
            let c = self.c[k] / (k + 1) as f64;
            a = a * lo + c;
            b = b * hi + c;
        }
        b * hi - a * lo
    }

    /// Real roots strictly inside `(lo, hi)`, ascending. Roots of even
    /// multiplicity are found only when they hit a critical point exactly.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.roots_into(lo, hi, &mut out);
        out
    }

    /// Roots in `(lo, hi)` given the ascending critical points `crit` there.
    pub fn roots_with_critical(&self, lo: f64, hi: f64, crit: &[f64], out: &mut Vec<f64>) {
        let mut a = lo;
        let mut fa = self.eval(lo);
        for &b in crit.iter().chain(std::iter::once(&hi)) {
            let fb = self.eval(b);
            if fa == 0.0 && a > lo {
                out.push(a);
            } else if fa * fb < 0.0 {
                out.push(bracketed_root(|s| self.eval(s), a, b, fa, fb));
            }
            a = b;
            fa = fb;
        }
    }

    fn roots_into(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        match self.degree() {
            0 => {}
            1 => {
                let r = -self.c[0] / self.c[1];
                if r > lo && r < hi {
                    out.push(r);
                }
            }
            _ => {
                let crit = self.derivative().roots_in(lo, hi);
                let mut a = lo;
                let mut fa = self.eval(lo);
                for &b in crit.iter().chain(std::iter::once(&hi)) {
                    let fb = self.eval(b);
                    if fa == 0.0 && a > lo {
                        out.push(a);
                    } else if fa * fb < 0.0 {
                        out.push(bracketed_root(|s| self.eval(s), a, b, fa, fb));
                    }
                    a = b;
                    fa = fb;
                }
            }
        }
    }

    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.eval(lo).abs().max(self.eval(hi).abs());
        for r in self.derivative().roots_in(lo, hi) {
            m = m.max(self.eval(r).abs());
        }
        m
    }
}

/// Illinois regula falsi on a sign-changing bracket.
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    let mut side = 0i32;
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            b = c;
            fb = fc;
            side = 0;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// Solves `p(z) = target` for `z` in `[a, b]` where `p` is monotone on the
/// interval and `target` lies between `p(a)` and `p(b)`.
pub fn invert_monotone(p: &Poly, a: f64, b: f64, target: f64, guess: Option<f64>) -> f64 {
    if p.degree() == 1 {
        let c = p.coeffs();
        return ((target - c[0]) / c[1]).clamp(a, b);
    }
    let (mut lo, mut hi) = (a, b);
    let increasing = p.eval(b) >= p.eval(a);
    let mut z = match guess {
        Some(g) if g > a && g < b => g,
        _ => 0.5 * (a + b),
    };
    for _ in 0..100 {
        let (v, d) = p.eval_d(z);
        let r = v - target;
        if r == 0.0 {
            return z;
        }
        if (r > 0.0) == increasing {
            hi = z;
        } else {
            lo = z;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1e-300) {
            break;
        }
        let newton = z - r / d;
        let next = if d != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - z).abs() <= 1e-15 * (1.0 + z.abs()) {
            return next;
        }
        z = next;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_matches_direct_evaluation() {
        let p = Poly::new(&[0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
        let q = p.compose_affine(0.3, 0.25);
        for &z in &[0.0, 0.2, 0.7, 1.0] {
            assert!((q.eval(z) - p.eval(0.3 + 0.25 * z)).abs() < 1e-14);
        }
    }

    #[test]
    fn integral_and_derivative() {
        let p = Poly::new(&[1.0, -2.0, 3.0]);
        assert!((p.integral(0.0, 1.0) - (1.0 - 1.0 + 1.0)).abs() < 1e-15);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 6.0]);
        let (v, d) = p.eval_d(2.0);
        assert_eq!((v, d), (9.0, 10.0));
    }

    #[test]
    fn roots_of_product_of_linears() {
        // (s - 0.1)(s - 0.5)(s - 0.9)
        let p = Poly::new(&[-0.1, 1.0]).mul(&Poly::new(&[-0.5, 1.0])).mul(&Poly::new(&[-0.9, 1.0]));
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.1, 0.5, 0.9]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn inversion_on_monotone_piece() {
        let p = Poly::new(&[0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
        let z = invert_monotone(&p, 0.0, 1.0, 0.25, None);
        assert!((p.eval(z) - 0.25).abs() < 1e-14);
    }
}
