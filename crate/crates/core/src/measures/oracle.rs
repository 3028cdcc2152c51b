//! Deterministic survival curves for piecewise-polynomial functions on the line.
//!
//! For `h > 0` the pair of pieces containing `x` and `x + h` determines
//! `Δ_h u`. Pairs where `Δ_h u` does not depend on `x` (two constants, or two
//! linear pieces with equal slope) are integrated in closed form over all `h`.
//! The remaining pairs are integrated in `log h` with Gauss-Kronrod panels;
//! at each node the measure of `{x : |Δ_h u(x)| > λ h^b}` is computed exactly
//! from polynomial level sets. Beyond the span of the breakpoints the
//! remaining contribution is again exact.

use super::{isotonic_nonincreasing, CurveSource, DistributionCurve, MeasureSpec, QuotientSpec};
use crate::error::{invalid, Error, Result};
use crate::funcspace::{PieceShape, PiecewisePoly1D, TestFunction};
use crate::poly::{bracketed_root, invert_monotone, Poly};
use crate::quad;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleDomain {
    /// `x ∈ ℝ`, `h ∈ ℝ∖{0}`.
    FullLine,
    /// `x, x + h` in the span of the breakpoints and `h > 0` only.
    Span,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleConfig {
    pub panels_per_decade: usize,
    /// Recompute with twice the panels and fail if the change exceeds the bound.
    pub verify_refinement: bool,
    pub domain: OracleDomain,
    /// Discard `|h| < h_floor` exactly instead of bounding it.
    pub h_floor: Option<f64>,
    /// Relative size of the small-`h` mass left out when it cannot be excluded exactly.
    pub small_h_tolerance: f64,
    /// Panels are bisected until the error is below this fraction of μ.
    pub adapt_tolerance: f64,
    /// Maximum number of bisections per quadrature.
    pub adapt_budget: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            panels_per_decade: 4,
            verify_refinement: true,
            domain: OracleDomain::FullLine,
            h_floor: None,
            small_h_tolerance: 1e-7,
            adapt_tolerance: 1e-6,
            adapt_budget: 4000,
        }
    }
}

/// The integrand has kinks at λ-dependent steps, where the Kronrod-Gauss
/// difference is only of the same order as the Kronrod error.
const KRONROD_SAFETY: f64 = 4.0;

const ADAPT_ROUNDS: usize = 40;
const MAX_KINK_EDGES: usize = 4000;
const MAX_KINK_BREAKS: usize = 4;
const REFINEMENT_ROUNDS: usize = 3;
const LAMBDA_CHUNK: usize = 8;

/// `(a, b, integral per λ, error per λ)` over one `log h` panel.
type Panel = (f64, f64, Vec<f64>, Vec<f64>);

#[derive(Clone, Copy, Debug)]
struct Seg {
    lo: f64,
    hi: f64,
    poly: Poly,
    shape: PieceShape,
}

impl Seg {
    /// The piece on `[x0, x0 + len]` in the local variable of that interval.
    fn local(&self, x0: f64, len: f64) -> Poly {
        if self.poly.is_constant() {
            return self.poly;
        }
        let w = self.hi - self.lo;
        self.poly.compose_affine((x0 - self.lo) / w, len / w)
    }
}

fn plateau_pair(a: PieceShape, b: PieceShape) -> Option<(f64, f64)> {
    match (a, b) {
        (PieceShape::Const(ca), PieceShape::Const(cb)) => Some((0.0, cb - ca)),
        (PieceShape::Linear { slope: s1, intercept: e1 }, PieceShape::Linear { slope: s2, intercept: e2 })
            if (s1 - s2).abs() <= 1e-13 * s1.abs().max(s2.abs()) =>
        {
            Some((s1, e2 - e1))
        }
        _ => None,
    }
}

/// `∫_a^c h^{e−1} dh` with `0 ≤ a < c ≤ ∞`.
fn power_integral(e: f64, a: f64, c: f64) -> f64 {
    if c.is_infinite() {
        if e < 0.0 && a > 0.0 {
            a.powf(e) / -e
        } else {
            f64::INFINITY
        }
    } else if a == 0.0 {
        if e > 0.0 {
            c.powf(e) / e
        } else {
            f64::INFINITY
        }
    } else if e == 0.0 {
        (c / a).ln()
    } else {
        (c.powf(e) - a.powf(e)) / e
    }
}

/// Linear piece `α + β h` of an overlap-length function on `[ha, hb)`.
#[derive(Clone, Copy, Debug)]
struct LenSeg {
    ha: f64,
    hb: f64,
    alpha: f64,
    beta: f64,
}

#[derive(Clone, Debug)]
struct PlateauPair {
    s: f64,
    d: f64,
    segs: Vec<LenSeg>,
}

struct Oracle {
    segs: Vec<Seg>,
    his: Vec<f64>,
    gamma: f64,
    b: f64,
    span: (f64, f64),
    factor: f64,
    full: bool,
    left: f64,
    right: f64,
    osc: f64,
    lip: f64,
    has_regular: bool,
    plateau: Vec<PlateauPair>,
    breaks: Vec<f64>,
}

impl Oracle {
    fn new(pp: &PiecewisePoly1D, gamma: f64, b: f64, domain: OracleDomain) -> Self {
        let full = domain == OracleDomain::FullLine;
        let mut segs = Vec::with_capacity(pp.num_pieces() + 2);
        let span = pp.span();
        if full {
            segs.push(Seg {
                lo: f64::NEG_INFINITY,
                hi: span.0,
                poly: Poly::constant(pp.left()),
                shape: PieceShape::Const(pp.left()),
            });
        }
        for i in 0..pp.num_pieces() {
            let (lo, hi, p) = pp.piece(i);
            segs.push(Seg { lo, hi, poly: *p, shape: pp.shape(i) });
        }
        if full {
            segs.push(Seg {
                lo: span.1,
                hi: f64::INFINITY,
                poly: Poly::constant(pp.right()),
                shape: PieceShape::Const(pp.right()),
            });
        }
        let his = segs.iter().map(|s| s.hi).collect();
        let (mn, mx) = pp.range();
        let has_regular = (0..segs.len())
            .any(|i| (i..segs.len()).any(|k| plateau_pair(segs[i].shape, segs[k].shape).is_none()));
        let mut o = Oracle {
            segs,
            his,
            gamma,
            b,
            span,
            factor: if full { 2.0 } else { 1.0 },
            full,
            left: pp.left(),
            right: pp.right(),
            osc: mx - mn,
            lip: pp.lipschitz(),
            has_regular,
            plateau: Vec::new(),
            breaks: pp.breaks().to_vec(),
        };
        o.plateau = o.plateau_pairs();
        o
    }

    fn width(&self) -> f64 {
        self.span.1 - self.span.0
    }

    fn plateau_pairs(&self) -> Vec<PlateauPair> {
        let mut out = Vec::new();
        for i in 0..self.segs.len() {
            for k in i..self.segs.len() {
                let (si, sk) = (&self.segs[i], &self.segs[k]);
                let Some((s, d)) = plateau_pair(si.shape, sk.shape) else { continue };
                if s == 0.0 && d == 0.0 {
                    continue;
                }
                let len = |h: f64| si.hi.min(sk.hi - h) - si.lo.max(sk.lo - h);
                let mut pts: Vec<f64> = [0.0, sk.hi - si.hi, sk.lo - si.lo, sk.lo - si.hi, sk.hi - si.lo]
                    .into_iter()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .collect();
                pts.push(f64::INFINITY);
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                pts.dedup();
                let mut segs = Vec::new();
                for w in pts.windows(2) {
                    let (ha, hb) = (w[0], w[1]);
                    let probe = if hb.is_finite() { hb } else { ha + 1.0 };
                    let mid = 0.5 * (ha + probe);
                    if len(mid) <= 0.0 {
                        continue;
                    }
                    let (la, lb) = (len(ha), len(probe));
                    let beta = (lb - la) / (probe - ha);
                    let alpha = if ha == 0.0 { la } else { la - beta * ha };
                    segs.push(LenSeg { ha, hb, alpha, beta });
                }
                if !segs.is_empty() {
                    out.push(PlateauPair { s, d, segs });
                }
            }
        }
        out
    }

    /// `{h > 0 : |s h + d| > λ h^b}` as a union of intervals.
    fn superlevel(s: f64, d: f64, lam: f64, b: f64) -> Vec<(f64, f64)> {
        let inf = f64::INFINITY;
        if s == 0.0 {
            let a = d.abs();
            return if b > 0.0 {
                vec![(0.0, (a / lam).powf(1.0 / b))]
            } else if b < 0.0 {
                vec![((a / lam).powf(1.0 / b), inf)]
            } else if a > lam {
                vec![(0.0, inf)]
            } else {
                vec![]
            };
        }
        if d == 0.0 {
            let a = s.abs();
            return if b < 1.0 {
                vec![((lam / a).powf(1.0 / (1.0 - b)), inf)]
            } else if b > 1.0 {
                vec![(0.0, (a / lam).powf(1.0 / (b - 1.0)))]
            } else if a > lam {
                vec![(0.0, inf)]
            } else {
                vec![]
            };
        }
        // General case: split at the zero of s h + d and at the extrema of
        // ±(s h + d) − λ h^b; each piece is monotone with at most one root.
        let g = |h: f64| (s * h + d).abs() - lam * h.powf(b);
        let mut pts = vec![0.0];
        let h0 = -d / s;
        if h0 > 0.0 {
            pts.push(h0);
        }
        if b != 1.0 && b != 0.0 {
            for sig in [1.0, -1.0] {
                let r = sig * s / (lam * b);
                if r > 0.0 {
                    pts.push(r.powf(1.0 / (b - 1.0)));
                }
            }
        }
        pts.push(inf);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        // signs of g as h -> 0+ and h -> ∞
        let lim0 = if b > 0.0 { 1.0 } else if b < 0.0 { -1.0 } else { (d.abs() - lam).signum() };
        let lim_inf = g(1e300).signum();
        let mut roots = Vec::new();
        for w in pts.windows(2) {
            let (a, c) = (w[0], w[1]);
            let cc = if c.is_finite() {
                c
            } else {
                let mut x = (2.0 * a).max(1.0);
                while g(x).signum() != lim_inf && x < 1e300 {
                    x *= 2.0;
                }
                x
            };
            let aa = if a > 0.0 {
                a
            } else {
                let mut x = 0.5 * cc;
                while g(x).signum() != lim0 && x > 1e-300 {
                    x *= 0.1;
                }
                x
            };
            let (ga, gc) = (g(aa), g(cc));
            if ga * gc < 0.0 {
                roots.push(bracketed_root(g, aa, cc, ga, gc));
            }
        }
        let mut edges = vec![0.0];
        edges.extend(roots);
        edges.push(inf);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in edges.windows(2) {
            let mid = if w[1].is_finite() { 0.5 * (w[0] + w[1]) } else { 2.0 * w[0] + 1.0 };
            if g(mid) > 0.0 {
                match out.last_mut() {
                    Some(last) if last.1 == w[0] => last.1 = w[1],
                    _ => out.push((w[0], w[1])),
                }
            }
        }
        out
    }

    fn plateau_mu(&self, lam: f64, floor: f64) -> f64 {
        let mut total = 0.0;
        for pair in &self.plateau {
            for (p, q) in Self::superlevel(pair.s, pair.d, lam, self.b) {
                for seg in &pair.segs {
                    let a = seg.ha.max(p).max(floor);
                    let c = seg.hb.min(q);
                    if !(c > a) {
                        continue;
                    }
                    if seg.alpha != 0.0 {
                        total += seg.alpha * power_integral(self.gamma, a, c);
                    }
                    if seg.beta != 0.0 {
                        total += seg.beta * power_integral(self.gamma + 1.0, a, c);
                    }
                }
            }
        }
        self.factor * total
    }

    /// Level-set lengths of every non-plateau pair at step `h`:
    /// `m[l] = |{x : |Δ_h u(x)| > taus[l]}|` restricted to those pairs.
    fn regular_m(&self, h: f64, taus: &[f64], m: &mut [f64], diff: &mut [f64]) {
        m.iter_mut().for_each(|v| *v = 0.0);
        diff.iter_mut().for_each(|v| *v = 0.0);
        for si in &self.segs {
            let start = self.his.partition_point(|&hk| hk <= si.lo + h);
            for sk in &self.segs[start..] {
                if sk.lo >= si.hi + h {
                    break;
                }
                if plateau_pair(si.shape, sk.shape).is_some() {
                    continue;
                }
                let l = si.lo.max(sk.lo - h);
                let r = si.hi.min(sk.hi - h);
                if !(r > l) {
                    continue;
                }
                let len = r - l;
                let d = sk.local(l + h, len).sub(&si.local(l, len));
                accumulate_levels(&d, len, taus, m, diff);
            }
        }
        let mut run = 0.0;
        for (v, dv) in m.iter_mut().zip(diff.iter()) {
            run += dv;
            *v += run;
        }
    }

    fn breakpoint_gaps(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.breaks.len() > 48 {
            return Vec::new();
        }
        let mut gaps = Vec::new();
        for i in 0..self.breaks.len() {
            for k in i + 1..self.breaks.len() {
                let g = self.breaks[k] - self.breaks[i];
                if g > lo && g < hi {
                    gaps.push(g);
                }
            }
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        gaps.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
        gaps
    }

    fn value(&self, x: f64) -> f64 {
        let i = self.his.partition_point(|&hk| hk <= x).min(self.segs.len() - 1);
        let sg = &self.segs[i];
        if sg.poly.is_constant() {
            return sg.poly.eval(0.0);
        }
        sg.poly.eval(((x - sg.lo) / (sg.hi - sg.lo)).clamp(0.0, 1.0))
    }

    /// Steps `h` where `λ h^b` crosses `|Δ_h u|` at a breakpoint or its
    /// preimage. Level-set lengths have kinks there, which Gauss-Kronrod
    /// panels cannot see when they fall between the outermost nodes.
    fn kink_edges(&self, lambdas: &[f64], h_lo: f64, h_hi: f64) -> Vec<f64> {
        if self.breaks.len() > MAX_KINK_BREAKS {
            return Vec::new();
        }
        let (tlo, thi) = (h_lo.ln(), h_hi.ln());
        let steps = (((thi - tlo) / std::f64::consts::LN_10) * 64.0).ceil().max(2.0) as usize;
        let ts: Vec<f64> = (0..=steps).map(|k| tlo + (thi - tlo) * k as f64 / steps as f64).collect();
        let mut out = Vec::new();
        for &beta in &self.breaks {
            for side in [1.0, -1.0] {
                let phi = |t: f64| {
                    let h = t.exp();
                    (self.value(beta + side * h) - self.value(beta)).abs()
                };
                let vals: Vec<f64> = ts.iter().map(|&t| phi(t)).collect();
                for &lam in lambdas {
                    let psi = |t: f64, v: f64| v - lam * (self.b * t).exp();
                    for k in 0..steps {
                        let (pa, pb) = (psi(ts[k], vals[k]), psi(ts[k + 1], vals[k + 1]));
                        if (pa > 0.0) == (pb > 0.0) {
                            continue;
                        }
                        let (mut a, mut c, mut fa) = (ts[k], ts[k + 1], pa);
                        for _ in 0..60 {
                            let mid = 0.5 * (a + c);
                            let fm = psi(mid, phi(mid));
                            if (fm > 0.0) == (fa > 0.0) {
                                a = mid;
                                fa = fm;
                            } else {
                                c = mid;
                            }
                        }
                        out.push(0.5 * (a + c));
                        if out.len() >= MAX_KINK_EDGES {
                            return out;
                        }
                    }
                }
            }
        }
        out
    }

    /// One Gauss-Kronrod panel in `ln h`: Kronrod values and `|K − G|` per λ.
    fn panel(&self, lambdas: &[f64], ta: f64, tb: f64) -> (Vec<f64>, Vec<f64>) {
        let n = lambdas.len();
        let mut kr = vec![0.0; n];
        let mut ga = vec![0.0; n];
        let mut taus = vec![0.0; n];
        let mut m = vec![0.0; n];
        let mut diff = vec![0.0; n + 1];
        for (t, wk, wg) in quad::kronrod_nodes(ta, tb) {
            let h = t.exp();
            let hb = h.powf(self.b);
            for (tau, lam) in taus.iter_mut().zip(lambdas) {
                *tau = lam * hb;
            }
            self.regular_m(h, &taus, &mut m, &mut diff);
            let hg = h.powf(self.gamma);
            for l in 0..n {
                let f = hg * m[l];
                kr[l] += wk * f;
                ga[l] += wg * f;
            }
        }
        let err = kr.iter().zip(&ga).map(|(k, g)| KRONROD_SAFETY * (k - g).abs()).collect();
        (kr, err)
    }

    /// Quadrature of the non-plateau pairs over `h ∈ [h_lo, h_hi]`; returns
    /// the Kronrod value and the error estimate per λ. Panels that dominate
    /// the error of a poorly resolved λ are bisected.
    fn regular_quadrature(
        &self,
        lambdas: &[f64],
        h_lo: f64,
        h_hi: f64,
        per_decade: usize,
        cfg: &OracleConfig,
        exact: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let n = lambdas.len();
        if !self.has_regular || !(h_hi > h_lo) {
            return (vec![0.0; n], vec![0.0; n]);
        }
        let (tlo, thi) = (h_lo.ln(), h_hi.ln());
        let count = (((thi - tlo) / std::f64::consts::LN_10) * per_decade as f64).ceil().max(1.0) as usize;
        let mut edges: Vec<f64> = (0..=count).map(|k| tlo + (thi - tlo) * k as f64 / count as f64).collect();
        edges.extend(self.breakpoint_gaps(h_lo, h_hi).into_iter().map(f64::ln));
        edges.extend(self.kink_edges(lambdas, h_lo, h_hi).into_iter().filter(|t| *t > tlo && *t < thi));
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let mut panels: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = edges
            .par_windows(2)
            .map(|w| {
                let (k, e) = self.panel(lambdas, w[0], w[1]);
                (w[0], w[1], k, e)
            })
            .collect();
        let budget = cfg.adapt_budget;
        let mut spent = 0;
        for _ in 0..ADAPT_ROUNDS {
            let mut mu = vec![0.0; n];
            let mut err = vec![0.0; n];
            for (_, _, k, e) in &panels {
                for l in 0..n {
                    mu[l] += k[l];
                    err[l] += e[l];
                }
            }
            let bad: Vec<usize> = (0..n).filter(|&l| self.factor * err[l] > cfg.adapt_tolerance * (self.factor * mu[l] + exact[l]).abs()).collect();
            if bad.is_empty() || spent >= budget {
                break;
            }
            let worst: Vec<f64> = (0..n)
                .map(|l| panels.iter().map(|p| p.3[l]).fold(0.0, f64::max))
                .collect();
            let split: Vec<usize> = (0..panels.len())
                .filter(|&i| bad.iter().any(|&l| panels[i].3[l] >= 0.1 * worst[l] && panels[i].3[l] > 0.0))
                .take(budget - spent)
                .collect();
            if split.is_empty() {
                break;
            }
            spent += split.len();
            let halves: Vec<[Panel; 2]> = split
                .par_iter()
                .map(|&i| {
                    let (a, b) = (panels[i].0, panels[i].1);
                    let c = 0.5 * (a + b);
                    let (k1, e1) = self.panel(lambdas, a, c);
                    let (k2, e2) = self.panel(lambdas, c, b);
                    [(a, c, k1, e1), (c, b, k2, e2)]
                })
                .collect();
            let mut next = Vec::with_capacity(panels.len() + split.len());
            let mut it = split.iter().zip(halves).peekable();
            for (i, p) in panels.into_iter().enumerate() {
                if it.peek().map(|(j, _)| **j) == Some(i) {
                    let (_, [h1, h2]) = it.next().unwrap();
                    next.push(h1);
                    next.push(h2);
                } else {
                    next.push(p);
                }
            }
            panels = next;
        }
        let mut mu = vec![0.0; n];
        let mut err = vec![0.0; n];
        for (_, _, k, e) in &panels {
            for l in 0..n {
                mu[l] += self.factor * k[l];
                err[l] += self.factor * e[l];
            }
        }
        (mu, err)
    }

    /// Non-constant pieces together with their offsets from the two tail constants.
    fn tail_terms(&self) -> impl Iterator<Item = (&Seg, f64)> {
        self.segs
            .iter()
            .filter(|s| s.lo.is_finite() && s.hi.is_finite() && !s.poly.is_constant())
            .flat_map(move |s| [(s, self.left), (s, self.right)])
    }

    /// Exact non-plateau contribution of `h ≥ width`, where one of `x, x+h` is
    /// in each constant tail.
    fn regular_tail(&self, lam: f64, floor: f64) -> f64 {
        if !self.full || !self.has_regular {
            return 0.0;
        }
        let s_w = self.width().max(floor);
        let (g, b) = (self.gamma, self.b);
        let total = if b == 0.0 {
            let mut mt = 0.0;
            for (seg, c) in self.tail_terms() {
                mt += (seg.hi - seg.lo) * level_length(&seg.poly.add_const(-c), lam);
            }
            if mt == 0.0 {
                0.0
            } else {
                mt * power_integral(g, s_w, f64::INFINITY)
            }
        } else {
            let e = g / b;
            let kink = lam * s_w.powf(b);
            if b < 0.0 && e <= 0.0 {
                return f64::INFINITY;
            }
            let f = |v: f64| -> f64 {
                if b > 0.0 {
                    if v <= kink {
                        0.0
                    } else if e == 0.0 {
                        (v / kink).ln()
                    } else {
                        (v.powf(e) - kink.powf(e)) / e
                    }
                } else {
                    v.min(kink).powf(e) / e
                }
            };
            let mut acc = 0.0;
            for (seg, c) in self.tail_terms() {
                let q = seg.poly.add_const(-c);
                let mut pts = vec![0.0];
                pts.extend(q.roots_in(0.0, 1.0));
                pts.extend(q.add_const(-kink).roots_in(0.0, 1.0));
                pts.extend(q.add_const(kink).roots_in(0.0, 1.0));
                pts.push(1.0);
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let w = seg.hi - seg.lo;
                for iv in pts.windows(2) {
                    if iv[1] > iv[0] {
                        acc += w * quad::gl_composite(24, 2, iv[0], iv[1], |s| f(q.eval(s).abs()));
                    }
                }
            }
            acc * lam.powf(-e) / b.abs()
        };
        self.factor * total
    }

    /// Choice of the smallest `h` in the quadrature and the bound on what lies below.
    fn small_h_cutoff(&self, lambdas: &[f64], cfg: &OracleConfig) -> (f64, Vec<f64>) {
        let n = lambdas.len();
        let w = self.width();
        if let Some(f) = cfg.h_floor {
            return (f, vec![0.0; n]);
        }
        if !self.has_regular {
            return (w, vec![0.0; n]);
        }
        let (lmin, lmax) = (lambdas[0], lambdas[n - 1]);
        let (b, g, k, osc) = (self.b, self.gamma, self.lip, self.osc);
        let exact = if k.is_finite() && b < 1.0 {
            Some((lmin / k).powf(1.0 / (1.0 - b)))
        } else if b < 0.0 {
            Some((lmin / osc).powf(1.0 / -b))
        } else {
            None
        };
        if let Some(h) = exact {
            return (h.min(w), vec![0.0; n]);
        }
        let h_star = if k.is_finite() {
            if b > 1.0 {
                (k / lmax).powf(1.0 / (b - 1.0))
            } else {
                1e-3 * w
            }
        } else if b > 0.0 {
            (osc / lmax).powf(1.0 / b)
        } else {
            1e-3 * w
        };
        let h_lo = if g > 0.0 {
            (h_star * cfg.small_h_tolerance.powf(1.0 / g)).max(1e-300)
        } else {
            h_star
        }
        .min(1e-3 * w);
        // sup of min(osc, K h)/h^b over (0, h_lo]
        let qmax = if b > 1.0 {
            f64::INFINITY
        } else if b == 1.0 {
            k
        } else if b > 0.0 {
            f64::INFINITY
        } else {
            osc
        };
        let mass = if g > 0.0 {
            self.factor * (w * h_lo.powf(g) / g + h_lo.powf(g + 1.0) / (g + 1.0))
        } else {
            f64::INFINITY
        };
        let bounds = lambdas.iter().map(|&l| if qmax <= l { 0.0 } else { mass }).collect();
        (h_lo, bounds)
    }

    fn curve(&self, lambdas: &[f64], cfg: &OracleConfig, per_decade: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let floor = cfg.h_floor.unwrap_or(0.0);
        let (h_lo, lower) = self.small_h_cutoff(lambdas, cfg);
        let exact: Vec<f64> = lambdas
            .par_iter()
            .map(|&l| self.plateau_mu(l, floor) + self.regular_tail(l, floor))
            .collect();
        let (reg, err) = self.regular_quadrature(lambdas, h_lo, self.width(), per_decade, cfg, &exact);
        let mu = (0..lambdas.len()).map(|i| exact[i] + reg[i]).collect();
        (mu, err, lower)
    }
}

/// Length (in the unit variable) of `{s ∈ [0,1] : |q(s)| > tau}`.
fn level_length(q: &Poly, tau: f64) -> f64 {
    let mut m = [0.0];
    let mut diff = [0.0, 0.0];
    accumulate_levels(q, 1.0, &[tau], &mut m, &mut diff);
    m[0] + diff[0]
}

/// Adds `len · |{z ∈ [0,1] : |d(z)| > τ}|` for every `τ` in the ascending
/// list `taus`. Lengths that cover a whole monotone segment go through the
/// difference array `diff`; partial ones are added to `m` directly.
fn accumulate_levels(d: &Poly, len: f64, taus: &[f64], m: &mut [f64], diff: &mut [f64]) {
    let mut pts: Vec<f64> = Vec::with_capacity(12);
    pts.push(0.0);
    if !d.is_constant() {
        let crit = d.derivative().roots_in(0.0, 1.0);
        d.roots_with_critical(0.0, 1.0, &crit, &mut pts);
        pts.extend(crit);
    }
    pts.push(1.0);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in pts.windows(2) {
        let (za, zb) = (w[0], w[1]);
        if !(zb > za) {
            continue;
        }
        let sgn = d.eval(0.5 * (za + zb)).signum();
        if sgn == 0.0 {
            continue;
        }
        let va = (sgn * d.eval(za)).max(0.0);
        let vb = (sgn * d.eval(zb)).max(0.0);
        let (lo_v, hi_v) = if va <= vb { (va, vb) } else { (vb, va) };
        let seglen = (zb - za) * len;
        let i_lo = taus.partition_point(|&t| t < lo_v);
        let i_hi = taus.partition_point(|&t| t < hi_v);
        if i_lo > 0 {
            diff[0] += seglen;
            diff[i_lo] -= seglen;
        }
        let increasing = vb > va;
        let mut guess = None;
        for l in i_lo..i_hi {
            let z = invert_monotone(d, za, zb, sgn * taus[l], guess);
            guess = Some(z);
            m[l] += len * if increasing { zb - z } else { z - za };
        }
    }
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
        return invalid("lambda grid must be nonempty, positive and finite");
    }
    if lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("lambda grid must be strictly increasing");
    }
    Ok(())
}

/// Survival curve of `Q_b u` under `ν_γ` for a 1D piecewise-polynomial or indicator `u`.
pub fn oracle_distribution_1d(
    u: &TestFunction,
    m: &MeasureSpec,
    q: &QuotientSpec,
    lambdas: &[f64],
    cfg: &OracleConfig,
) -> Result<DistributionCurve> {
    if m.n != 1 || u.dim() != 1 {
        return invalid("the oracle is one-dimensional");
    }
    check_lambdas(lambdas)?;
    let pp = u
        .pieces()
        .ok_or_else(|| Error::Unsupported(format!("{} has no piecewise representation", u.id())))?;
    oracle_for_pieces(&pp, m.gamma, q.b, lambdas, cfg)
}

pub(crate) fn oracle_for_pieces(
    pp: &PiecewisePoly1D,
    gamma: f64,
    b: f64,
    lambdas: &[f64],
    cfg: &OracleConfig,
) -> Result<DistributionCurve> {
    let source = CurveSource::Oracle { config: cfg.clone() };
    if pp.is_constant() {
        return Ok(DistributionCurve::zero(lambdas.to_vec(), source));
    }
    let pp = pp.simplify();
    let oracle = Oracle::new(&pp, gamma, b, cfg.domain);
    // Panel layout, kink edges and the small-h cutoff all follow the λ range,
    // so distant levels are resolved separately.
    let parts = lambdas
        .par_chunks(LAMBDA_CHUNK)
        .map(|ls| oracle_chunk(&oracle, ls, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (mut mu, mut err, mut lower) = (Vec::new(), Vec::new(), Vec::new());
    for (m, e, l) in parts {
        mu.extend(m);
        err.extend(e);
        lower.extend(l);
    }
    let weights: Vec<f64> = err.iter().map(|e| 1.0 / (e * e + 1e-300)).collect();
    let raw_violations = mu.windows(2).zip(err.windows(2)).filter(|(m, e)| m[1] > m[0] + 3.0 * (e[0] + e[1])).count();
    let mu: Vec<f64> = isotonic_nonincreasing(&mu, &weights).into_iter().map(|v| v.max(0.0)).collect();
    Ok(DistributionCurve { lambda: lambdas.to_vec(), mu, stderr: err, truncation_bound: lower, raw_violations, source })
}

type Chunk = (Vec<f64>, Vec<f64>, Vec<f64>);

fn oracle_chunk(oracle: &Oracle, lambdas: &[f64], cfg: &OracleConfig) -> Result<Chunk> {
    let (mut mu, mut err, lower) = oracle.curve(lambdas, cfg, cfg.panels_per_decade);
    if cfg.verify_refinement && oracle.has_regular {
        // Doubling continues while consecutive resolutions disagree beyond
        // their combined bounds; a kink hiding near a panel edge shows up
        // only in such a comparison.
        let mut per_decade = cfg.panels_per_decade;
        for round in 1..=REFINEMENT_ROUNDS {
            per_decade *= 2;
            let (mu2, err2, _) = oracle.curve(lambdas, cfg, per_decade);
            let worst = (0..lambdas.len())
                .map(|i| {
                    let change = (mu2[i] - mu[i]).abs();
                    let allowed = err[i] + err2[i] + 1e-12 * mu[i].abs() + 1e-300;
                    (i, change, change / allowed)
                })
                .fold((0, 0.0, 0.0), |a, b| if b.2 > a.2 { b } else { a });
            if worst.2 <= 1.0 {
                for i in 0..lambdas.len() {
                    err[i] = err2[i].max((mu2[i] - mu[i]).abs());
                }
                mu = mu2;
                break;
            }
            if round == REFINEMENT_ROUNDS {
                let i = worst.0;
                return Err(Error::ResolutionFailure { lambda: lambdas[i], change: worst.1, bound: err[i] + err2[i] });
            }
            mu = mu2;
            err = err2;
        }
    }
    Ok((mu, err, lower))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdVerdict {
    Diverges,
    Converges,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdProbe {
    pub lambda: f64,
    pub r_min: Vec<f64>,
    /// `ν_0(E_{λ,1} ∩ {|h| ≥ r_min})` for each cutoff.
    pub values: Vec<f64>,
    pub verdict: ThresholdVerdict,
}

/// Monitors `ν_0(E_{λ,1}[u] ∩ {|h| ≥ r})` as `r ↓ 0`.
pub fn gamma_zero_threshold(u: &TestFunction, lambda_probe: f64, r_min_sequence: &[f64]) -> Result<ThresholdProbe> {
    if r_min_sequence.len() < 3 || r_min_sequence.windows(2).any(|w| !(w[1] < w[0]) || w[1] <= 0.0) {
        return invalid("r_min sequence must be positive, strictly decreasing, length >= 3");
    }
    if !(lambda_probe > 0.0) {
        return invalid("lambda must be positive");
    }
    let m = MeasureSpec::new(1, 0.0)?;
    let q = QuotientSpec::new(1.0);
    let mut values = Vec::with_capacity(r_min_sequence.len());
    for &r in r_min_sequence {
        let cfg = OracleConfig { h_floor: Some(r), verify_refinement: false, panels_per_decade: 6, ..Default::default() };
        values.push(oracle_distribution_1d(u, &m, &q, &[lambda_probe], &cfg)?.mu[0]);
    }
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-9 * scale;
    let incs: Vec<f64> = values
        .windows(2)
        .zip(r_min_sequence.windows(2))
        .map(|(v, r)| (v[1] - v[0]) / (r[0] / r[1]).log10())
        .collect();
    if incs.iter().any(|&d| d < -tol) {
        return Err(Error::Inconclusive(format!("non-monotone trend over r_min: {values:?}")));
    }
    let last = *incs.last().unwrap();
    let peak = incs.iter().copied().fold(0.0, f64::max);
    let verdict = if last <= tol || last <= 0.05 * peak {
        ThresholdVerdict::Converges
    } else if last >= 0.5 * peak {
        ThresholdVerdict::Diverges
    } else {
        return Err(Error::Inconclusive(format!("increments neither settle nor persist: {incs:?}")));
    };
    Ok(ThresholdProbe { lambda: lambda_probe, r_min: r_min_sequence.to_vec(), values, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{make_hat, make_indicator_interval};

    #[test]
    fn superlevel_general_case_matches_scan() {
        for &(s, d, lam, b) in &[(1.0, -0.5, 2.0, 2.0), (-2.0, 1.0, 0.5, 0.5), (1.0, 0.3, 1.0, -1.0), (0.7, -1.0, 0.3, 1.0)] {
            let set = Oracle::superlevel(s, d, lam, b);
            for k in 1..2000 {
                let h = 10f64.powf(-3.0 + 6.0 * k as f64 / 2000.0);
                let inside = set.iter().any(|&(a, c)| h > a && h < c);
                let g = (s * h + d).abs() - lam * h.powf(b);
                if g.abs() > 1e-9 {
                    assert_eq!(inside, g > 0.0, "s={s} d={d} lam={lam} b={b} h={h}");
                }
            }
        }
    }

    #[test]
    fn level_length_of_linear() {
        let q = Poly::new(&[-1.0, 2.0]);
        assert!((level_length(&q, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn indicator_small_h_closed_form() {
        // For λ large, only |h| < 1 contributes: ν_γ(E) = 4 δ^{γ+1}/(γ+1), δ = λ^{-1/(1+γ)}.
        let u = make_indicator_interval(0.0, 1.0).unwrap();
        let gamma = 1.0;
        let lam = [1e3];
        let c = oracle_distribution_1d(&u, &MeasureSpec::new(1, gamma).unwrap(), &QuotientSpec::new(2.0), &lam, &OracleConfig::default()).unwrap();
        let delta = 1e3f64.powf(-0.5);
        assert!((c.mu[0] - 4.0 * delta * delta / 2.0).abs() < 1e-12);
    }

    #[test]
    fn hat_threshold_flips() {
        let u = make_hat();
        let rs: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
        assert_eq!(gamma_zero_threshold(&u, 0.5, &rs).unwrap().verdict, ThresholdVerdict::Diverges);
        assert_eq!(gamma_zero_threshold(&u, 1.5, &rs).unwrap().verdict, ThresholdVerdict::Converges);
    }
}
