use crate::error::{invalid, Result};
use crate::poly::Poly;
use crate::quad;
use serde::{Deserialize, Serialize};

/// Classification of a single piece, used to route pairs of pieces to the
/// closed-form or the numerical branch of the distribution oracle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PieceShape {
    Const(f64),
    /// `u(x) = slope * x + intercept` in global coordinates.
    Linear { slope: f64, intercept: f64 },
    General,
}

/// Piecewise polynomial on the real line with constant extensions.
///
/// `polys[i]` lives on `[breaks[i], breaks[i+1]]` and is expressed in the
/// normalized variable `s = (x - breaks[i]) / (breaks[i+1] - breaks[i])`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PiecewisePoly1D {
    breaks: Vec<f64>,
    #[serde(with = "poly_serde")]
    polys: Vec<Poly>,
    left: f64,
    right: f64,
    continuous: bool,
}

mod poly_serde {
    use crate::poly::Poly;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &[Poly], s: S) -> Result<S::Ok, S::Error> {
        p.iter().map(|q| q.coeffs().to_vec()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Poly>, D::Error> {
        let v: Vec<Vec<f64>> = Vec::deserialize(d)?;
        Ok(v.iter().map(|c| Poly::new(c)).collect())
    }
}

const CONTINUITY_TOL: f64 = 1e-9;

impl PiecewisePoly1D {
    /// Continuous piecewise polynomial; the constants at `±∞` are the end values.
    pub fn new(breaks: Vec<f64>, polys: Vec<Poly>) -> Result<Self> {
        Self::check_shape(&breaks, &polys)?;
        let left = polys[0].eval(0.0);
        let right = polys[polys.len() - 1].eval(1.0);
        let scale = polys.iter().map(|p| p.max_abs_on(0.0, 1.0)).fold(1.0, f64::max);
        for i in 1..polys.len() {
            let jump = (polys[i].eval(0.0) - polys[i - 1].eval(1.0)).abs();
            if jump > CONTINUITY_TOL * scale {
                return invalid(format!("discontinuity of size {jump:e} at x = {}", breaks[i]));
            }
        }
        Ok(PiecewisePoly1D { breaks, polys, left, right, continuous: true })
    }

    /// Piecewise polynomial allowed to jump, including at the outer breakpoints.
    pub(crate) fn with_jumps(breaks: Vec<f64>, polys: Vec<Poly>, left: f64, right: f64) -> Result<Self> {
        Self::check_shape(&breaks, &polys)?;
        Ok(PiecewisePoly1D { breaks, polys, left, right, continuous: false })
    }

    pub fn constant(c: f64) -> Self {
        PiecewisePoly1D {
            breaks: vec![0.0, 1.0],
            polys: vec![Poly::constant(c)],
            left: c,
            right: c,
            continuous: true,
        }
    }

    fn check_shape(breaks: &[f64], polys: &[Poly]) -> Result<()> {
        if polys.is_empty() || breaks.len() != polys.len() + 1 {
            return invalid("need at least one piece and one more breakpoint than pieces");
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("breakpoints must be finite and strictly increasing");
        }
        Ok(())
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn num_pieces(&self) -> usize {
        self.polys.len()
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn is_continuous(&self) -> bool {
        self.continuous
    }

    /// `[first breakpoint, last breakpoint]`.
    pub fn span(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    pub fn piece(&self, i: usize) -> (f64, f64, &Poly) {
        (self.breaks[i], self.breaks[i + 1], &self.polys[i])
    }

    pub fn shape(&self, i: usize) -> PieceShape {
        let (lo, hi, p) = self.piece(i);
        match p.degree() {
            0 => PieceShape::Const(p.coeffs()[0]),
            1 => {
                let slope = p.coeffs()[1] / (hi - lo);
                PieceShape::Linear { slope, intercept: p.coeffs()[0] - slope * lo }
            }
            _ => PieceShape::General,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.span();
        if x < a {
            return self.left;
        }
        if x > b {
            return self.right;
        }
        let i = self.breaks.partition_point(|&t| t <= x).clamp(1, self.polys.len()) - 1;
        let (lo, hi, p) = self.piece(i);
        p.eval((x - lo) / (hi - lo))
    }

    pub fn is_constant(&self) -> bool {
        self.left == self.right && self.polys.iter().all(|p| p.is_constant() && p.coeffs()[0] == self.left)
    }

    /// Global Lipschitz constant; infinite if the function jumps.
    pub fn lipschitz(&self) -> f64 {
        if !self.continuous {
            return f64::INFINITY;
        }
        (0..self.num_pieces())
            .map(|i| {
                let (lo, hi, p) = self.piece(i);
                p.derivative().max_abs_on(0.0, 1.0) / (hi - lo)
            })
            .fold(0.0, f64::max)
    }

    /// `(min, max)` of the function over the real line.
    pub fn range(&self) -> (f64, f64) {
        let mut lo = self.left.min(self.right);
        let mut hi = self.left.max(self.right);
        for p in &self.polys {
            let mut pts = vec![0.0, 1.0];
            pts.extend(p.derivative().roots_in(0.0, 1.0));
            for s in pts {
                let v = p.eval(s);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    pub fn sup_abs(&self) -> f64 {
        let (a, b) = self.range();
        a.abs().max(b.abs())
    }

    /// Sum of increments over monotone segments plus jumps.
    pub fn total_variation(&self) -> f64 {
        let mut tv = (self.polys[0].eval(0.0) - self.left).abs();
        for (i, p) in self.polys.iter().enumerate() {
            let mut prev = 0.0;
            let mut pv = p.eval(0.0);
            for s in p.derivative().roots_in(0.0, 1.0).into_iter().chain(std::iter::once(1.0)) {
                let v = p.eval(s);
                tv += (v - pv).abs();
                pv = v;
                prev = s;
            }
            debug_assert_eq!(prev, 1.0);
            let next = if i + 1 < self.polys.len() { self.polys[i + 1].eval(0.0) } else { self.right };
            tv += (next - pv).abs();
        }
        tv
    }

    /// `∫|u|^p`; infinite when a tail constant is nonzero.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        if self.left != 0.0 || self.right != 0.0 {
            return f64::INFINITY;
        }
        (0..self.num_pieces())
            .map(|i| {
                let (lo, hi, q) = self.piece(i);
                (hi - lo) * integrate_abs_pow(q, p)
            })
            .sum()
    }

    /// `∫|u'|^p` over the pieces.
    pub fn grad_lp_norm_pow(&self, p: f64) -> f64 {
        (0..self.num_pieces())
            .map(|i| {
                let (lo, hi, q) = self.piece(i);
                let w = hi - lo;
                w * integrate_abs_pow(&q.derivative().scale(1.0 / w), p)
            })
            .sum()
    }

    /// Exact `∫_a^b u`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (s0, s1) = self.span();
        let mut total = 0.0;
        if a < s0 {
            total += self.left * (b.min(s0) - a);
        }
        if b > s1 {
            total += self.right * (b - a.max(s1));
        }
        let first = self.breaks.partition_point(|&t| t <= a).saturating_sub(1);
        for i in first..self.num_pieces() {
            let (lo, hi, p) = self.piece(i);
            if lo >= b {
                break;
            }
            let l = a.max(lo);
            let r = b.min(hi);
            if r > l {
                let w = hi - lo;
                total += w * p.integral((l - lo) / w, (r - lo) / w);
            }
        }
        total
    }

    /// `x -> u(a + b x)`, `b != 0`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Self {
        assert!(b != 0.0 && b.is_finite());
        let mut breaks: Vec<f64> = self.breaks.iter().map(|t| (t - a) / b).collect();
        let mut polys = self.polys.clone();
        let (mut left, mut right) = (self.left, self.right);
        if b < 0.0 {
            breaks.reverse();
            polys.reverse();
            for p in polys.iter_mut() {
                *p = p.compose_affine(1.0, -1.0);
            }
            std::mem::swap(&mut left, &mut right);
        }
        PiecewisePoly1D { breaks, polys, left, right, continuous: self.continuous }
    }

    pub fn scale_values(&self, c: f64) -> Self {
        PiecewisePoly1D {
            breaks: self.breaks.clone(),
            polys: self.polys.iter().map(|p| p.scale(c)).collect(),
            left: self.left * c,
            right: self.right * c,
            continuous: self.continuous,
        }
    }

    /// The polynomial of `self` restricted to `[l, r]`, in the local variable of `[l, r]`.
    /// `[l, r]` must not straddle a breakpoint.
    pub(crate) fn local_on(&self, l: f64, r: f64) -> Poly {
        let (s0, s1) = self.span();
        if r <= s0 {
            return Poly::constant(self.left);
        }
        if l >= s1 {
            return Poly::constant(self.right);
        }
        let mid = 0.5 * (l + r);
        let i = self.breaks.partition_point(|&t| t <= mid).clamp(1, self.polys.len()) - 1;
        let (lo, hi, p) = self.piece(i);
        let w = hi - lo;
        p.compose_affine((l - lo) / w, (r - l) / w)
    }

    /// Pointwise product on the merged breakpoints.
    pub fn mul(&self, other: &Self) -> Self {
        let mut bks: Vec<f64> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        bks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bks.dedup();
        let polys = bks
            .windows(2)
            .map(|w| self.local_on(w[0], w[1]).mul(&other.local_on(w[0], w[1])))
            .collect();
        PiecewisePoly1D {
            breaks: bks,
            polys,
            left: self.left * other.left,
            right: self.right * other.right,
            continuous: self.continuous && other.continuous,
        }
    }

    /// Merge neighbouring constant pieces with equal values and drop end pieces
    /// that only repeat the tail constants.
    pub fn simplify(&self) -> Self {
        let is_const = |p: &Poly, v: f64| p.is_constant() && p.coeffs()[0] == v;
        let mut first = 0;
        let mut last = self.num_pieces();
        while last - first > 1 && is_const(&self.polys[first], self.left) {
            first += 1;
        }
        while last - first > 1 && is_const(&self.polys[last - 1], self.right) {
            last -= 1;
        }
        let mut breaks = vec![self.breaks[first]];
        let mut polys: Vec<Poly> = Vec::new();
        for i in first..last {
            let (_, hi, p) = self.piece(i);
            if let Some(prev) = polys.last() {
                if prev.is_constant() && is_const(p, prev.coeffs()[0]) {
                    *breaks.last_mut().unwrap() = hi;
                    continue;
                }
            }
            polys.push(*p);
            breaks.push(hi);
        }
        PiecewisePoly1D { breaks, polys, left: self.left, right: self.right, continuous: self.continuous }
    }
}

/// `∫_0^1 |q(s)|^p ds`, split at the sign changes of `q`.
pub(crate) fn integrate_abs_pow(q: &Poly, p: f64) -> f64 {
    if q.is_constant() {
        return q.coeffs()[0].abs().powf(p);
    }
    let mut pts = vec![0.0];
    pts.extend(q.roots_in(0.0, 1.0));
    pts.push(1.0);
    let integer = p.fract() == 0.0 && p <= 4.0;
    pts.windows(2)
        .map(|w| {
            if integer {
                quad::gl(24, w[0], w[1], |s| q.eval(s).abs().powf(p))
            } else {
                // z = a + (b − a)(3t² − 2t³) flattens |q|^p at the roots.
                let len = w[1] - w[0];
                quad::gl_composite(24, 2, 0.0, 1.0, |t| {
                    let z = w[0] + len * t * t * (3.0 - 2.0 * t);
                    6.0 * len * t * (1.0 - t) * q.eval(z).abs().powf(p)
                })
            }
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hat() -> PiecewisePoly1D {
        PiecewisePoly1D::new(vec![-1.0, 0.0, 1.0], vec![Poly::new(&[0.0, 1.0]), Poly::new(&[1.0, -1.0])]).unwrap()
    }

    #[test]
    fn hat_norms() {
        let h = hat();
        assert_eq!(h.eval(0.5), 0.5);
        assert_eq!(h.eval(2.0), 0.0);
        assert!((h.lp_norm_pow(2.0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((h.grad_lp_norm_pow(1.0) - 2.0).abs() < 1e-14);
        assert!((h.total_variation() - 2.0).abs() < 1e-14);
        assert!((h.lipschitz() - 1.0).abs() < 1e-14);
        assert!((h.integral(-0.5, 0.5) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_jumps() {
        assert!(PiecewisePoly1D::new(vec![0.0, 1.0, 2.0], vec![Poly::constant(0.0), Poly::constant(1.0)]).is_err());
    }

    #[test]
    fn reflection_and_product() {
        let h = hat();
        let r = h.compose_affine(1.0, -1.0);
        for &x in &[-0.3, 0.2, 0.9, 1.7] {
            assert!((r.eval(x) - h.eval(1.0 - x)).abs() < 1e-15);
        }
        let sq = h.mul(&h);
        for &x in &[-0.3, 0.2, 0.9] {
            assert!((sq.eval(x) - h.eval(x).powi(2)).abs() < 1e-15);
        }
    }
}
