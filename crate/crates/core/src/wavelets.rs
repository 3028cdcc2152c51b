//! Haar coefficients on `[0,1)^n` and the weak-ℓ¹ / ℓ¹ sequence norms under
//! the counting weights `ν̃_γ({(e,I)}) = 2^{−j(γ+n)}`.

use crate::error::{invalid, Result};
use crate::funcspace::TestFunction;
use crate::quad;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Name of the dual pair used for every coefficient.
pub const WAVELET_PAIR: &str = "haar";

/// `(e, I)` with `I = 2^{−j}(k + [0,1)^n)`; bit `i` of `e` selects `ψ` in coordinate `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicIndex {
    pub e: u8,
    pub j: u32,
    pub k: [u64; 2],
}

impl DyadicIndex {
    pub fn side(&self) -> f64 {
        0.5f64.powi(self.j as i32)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientSequence {
    pub n: usize,
    pub max_level: u32,
    pub gamma: f64,
    pub entries: Vec<(DyadicIndex, f64)>,
    /// `u` is not constant zero outside `[0,1)^n`.
    pub leaks: bool,
}

impl CoefficientSequence {
    /// `ν̃_γ({(e, I)})`.
    pub fn weight(&self, j: u32) -> f64 {
        2f64.powf(-(j as f64) * (self.gamma + self.n as f64))
    }

    /// `|u^e_I| / ℓ(I)^{1+γ}`.
    pub fn normalized(&self, idx: &DyadicIndex, value: f64) -> f64 {
        value.abs() * 2f64.powf(idx.j as f64 * (1.0 + self.gamma))
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["e", "j", "k", "value"])?;
        for (idx, v) in &self.entries {
            let k = if self.n == 1 { idx.k[0].to_string() } else { format!("{}:{}", idx.k[0], idx.k[1]) };
            wr.write_record(&[idx.e.to_string(), idx.j.to_string(), k, format!("{v:e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn max_level(n: usize) -> u32 {
    if n == 1 {
        12
    } else {
        8
    }
}

fn leaks_1d(u: &TestFunction) -> bool {
    match u.pieces() {
        Some(pp) => {
            let (lo, hi) = pp.span();
            pp.left() != 0.0 || pp.right() != 0.0 || lo < 0.0 || hi > 1.0
        }
        None => u.support_box()[0].0 < 0.0 || u.support_box()[0].1 > 1.0,
    }
}

fn analyze_1d(u: &TestFunction, big_j: u32) -> Vec<(DyadicIndex, f64)> {
    let pp = u.pieces();
    let integral = |a: f64, b: f64| match &pp {
        Some(p) => p.integral(a, b),
        None => quad::gl(QUARTER_NODES, a, b, |x| u.eval(&[x])),
    };
    let levels: Vec<u32> = (0..=big_j).collect();
    let per_level: Vec<Vec<(DyadicIndex, f64)>> = levels
        .par_iter()
        .map(|&j| {
            let cells = 1u64 << j;
            let side = 0.5f64.powi(j as i32);
            (0..cells)
                .map(|k| {
                    let a = k as f64 * side;
                    let m = a + 0.5 * side;
                    let v = cells as f64 * (integral(a, m) - integral(m, a + side));
                    (DyadicIndex { e: 1, j, k: [k, 0] }, v)
                })
                .collect()
        })
        .collect();
    per_level.into_iter().flatten().collect()
}

const QUARTER_NODES: usize = 8;

fn analyze_2d(u: &TestFunction, big_j: u32) -> Vec<(DyadicIndex, f64)> {
    // Integrals over the cells of level J + 1, summed upwards.
    let fine = 1usize << (big_j + 1);
    let h = 1.0 / fine as f64;
    let mut sums: Vec<f64> = (0..fine * fine)
        .into_par_iter()
        .map(|c| {
            let (ix, iy) = (c % fine, c / fine);
            let (x0, y0) = (ix as f64 * h, iy as f64 * h);
            quad::gl(QUARTER_NODES, y0, y0 + h, |y| quad::gl(QUARTER_NODES, x0, x0 + h, |x| u.eval(&[x, y])))
        })
        .collect();
    let mut out = Vec::new();
    let mut side = fine;
    for j in (0..=big_j).rev() {
        let coarse = side / 2;
        let norm = 4f64.powi(j as i32);
        let mut next = vec![0.0; coarse * coarse];
        for ky in 0..coarse {
            for kx in 0..coarse {
                let q = |a: usize, b: usize| sums[(2 * ky + b) * side + 2 * kx + a];
                let (q00, q10, q01, q11) = (q(0, 0), q(1, 0), q(0, 1), q(1, 1));
                let k = [kx as u64, ky as u64];
                out.push((DyadicIndex { e: 1, j, k }, norm * ((q00 + q01) - (q10 + q11))));
                out.push((DyadicIndex { e: 2, j, k }, norm * ((q00 + q10) - (q01 + q11))));
                out.push((DyadicIndex { e: 3, j, k }, norm * ((q00 + q11) - (q10 + q01))));
                next[ky * coarse + kx] = (q00 + q11) + (q10 + q01);
            }
        }
        sums = next;
        side = coarse;
    }
    out.sort_by_key(|(i, _)| (i.j, i.k[1], i.k[0], i.e));
    out
}

/// Haar coefficients `u^e_I = ∫ u ψ̃^e_I` with `ψ̃^e_I = 2^{jn} ψ^e(2^j · − k)` for levels `0..=J`.
pub fn haar_analyze(u: &TestFunction, big_j: u32, gamma: f64) -> Result<CoefficientSequence> {
    let n = u.dim();
    if big_j > max_level(n) {
        return invalid(format!("J is limited to {} in dimension {n}", max_level(n)));
    }
    let (entries, leaks) = match n {
        1 => (analyze_1d(u, big_j), leaks_1d(u)),
        2 => {
            let leaks = u.constant_at_infinity() || u.support_box().iter().any(|&(lo, hi)| lo < 0.0 || hi > 1.0);
            (analyze_2d(u, big_j), leaks)
        }
        _ => return invalid("only n = 1 and n = 2 are supported"),
    };
    Ok(CoefficientSequence { n, max_level: big_j, gamma, entries, leaks })
}

/// `u` moved by an affine map so that its support box becomes `[a, b]^n`.
pub fn rescale_onto(u: &TestFunction, a: f64, b: f64) -> TestFunction {
    let bx = u.support_box();
    let lo = bx.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let hi = bx.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max);
    let scale = (hi - lo) / (b - a);
    u.transformed(lo - scale * a, scale)
}

/// Margin kept free on both sides by [`rescale_into_unit`].
pub const UNIT_MARGIN: f64 = 0.1;

/// [`rescale_onto`] `[m, 1 − m]` with `m = UNIT_MARGIN`, so jumps at the ends
/// of the support box stay inside the cube and off the dyadic grid.
pub fn rescale_into_unit(u: &TestFunction) -> TestFunction {
    rescale_onto(u, UNIT_MARGIN, 1.0 - UNIT_MARGIN)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LevelSum {
    pub j: u32,
    /// `Σ_{(e,I) at level j} ν̃_γ · |u^e_I| / ℓ(I)^{1+γ}`.
    pub l1: f64,
    pub nonzero: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sandwich {
    pub pair: String,
    pub gamma: f64,
    pub max_level: u32,
    pub weak_l1: f64,
    pub tv: f64,
    pub l1: f64,
    pub levels: Vec<LevelSum>,
}

/// `(sup_λ λ ν̃_γ{|u^e_I|/ℓ(I)^{1+γ} > λ}, tv, Σ ν̃_γ |u^e_I|/ℓ(I)^{1+γ})`.
pub fn cddd_sandwich(seq: &CoefficientSequence, gamma: f64, tv: f64) -> Result<Sandwich> {
    if (-1.0..=0.0).contains(&gamma) {
        return invalid("gamma must lie outside [-1, 0]");
    }
    if gamma != seq.gamma {
        return invalid("sequence was analyzed for a different gamma");
    }
    let mut pairs: Vec<(f64, f64)> = seq
        .entries
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(i, v)| (seq.normalized(i, *v), seq.weight(i.j)))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut weak: f64 = 0.0;
    let mut mass = 0.0;
    let mut i = 0;
    while i < pairs.len() {
        let v = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == v {
            mass += pairs[i].1;
            i += 1;
        }
        weak = weak.max(v * mass);
    }
    let mut levels: Vec<LevelSum> = (0..=seq.max_level).map(|j| LevelSum { j, l1: 0.0, nonzero: 0 }).collect();
    for (idx, v) in &seq.entries {
        if *v != 0.0 {
            let l = &mut levels[idx.j as usize];
            l.l1 += seq.weight(idx.j) * seq.normalized(idx, *v);
            l.nonzero += 1;
        }
    }
    let l1 = levels.iter().map(|l| l.l1).sum();
    Ok(Sandwich { pair: WAVELET_PAIR.to_string(), gamma, max_level: seq.max_level, weak_l1: weak, tv, l1, levels })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SandwichStability {
    pub function: String,
    pub gamma: f64,
    pub rows: Vec<Sandwich>,
    /// `max(weak/tv) / min(weak/tv) − 1` over the levels.
    pub spread: f64,
}

/// Weak-ℓ¹/TV ratios of `u` for every `J` in `levels`.
pub fn sandwich_stability(u: &TestFunction, gamma: f64, tv: f64, levels: &[u32]) -> Result<SandwichStability> {
    let top = levels.iter().copied().max().ok_or_else(|| crate::Error::InvalidArgument("no levels".into()))?;
    let full = haar_analyze(u, top, gamma)?;
    let rows = levels
        .iter()
        .map(|&big_j| {
            let seq = CoefficientSequence {
                entries: full.entries.iter().filter(|(i, _)| i.j <= big_j).cloned().collect(),
                max_level: big_j,
                ..full.clone()
            };
            cddd_sandwich(&seq, gamma, tv)
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.weak_l1 / r.tv).collect();
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SandwichStability { function: u.id().to_string(), gamma, rows, spread: hi / lo - 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{make_indicator_interval, PiecewisePoly1D, Profile, Smoothness};
    use crate::poly::Poly;

    fn ramp() -> TestFunction {
        let pieces = PiecewisePoly1D::new(vec![0.0, 1.0], vec![Poly::new(&[0.0, 1.0])]).unwrap();
        TestFunction::new("ramp", 1, Profile::Piecewise { pieces }, Smoothness::Lipschitz)
    }

    #[test]
    fn linear_function_coefficients() {
        let s = haar_analyze(&ramp(), 6, 1.0).unwrap();
        for (idx, v) in &s.entries {
            let want = -idx.side() / 4.0;
            assert!((v - want).abs() < 1e-15, "{idx:?} {v}");
        }
    }

    #[test]
    fn constant_has_zero_coefficients() {
        let pieces = PiecewisePoly1D::constant(3.7);
        let c = TestFunction::new("c", 1, Profile::Piecewise { pieces }, Smoothness::Lipschitz);
        let s = haar_analyze(&c, 8, 1.0).unwrap();
        assert!(s.entries.iter().all(|(_, v)| *v == 0.0));
        let w = cddd_sandwich(&s, 1.0, 0.0).unwrap();
        assert_eq!((w.weak_l1, w.l1), (0.0, 0.0));
    }

    #[test]
    fn half_indicator() {
        let u = make_indicator_interval(0.0, 0.5).unwrap();
        let s = haar_analyze(&u, 8, 1.0).unwrap();
        for (idx, v) in &s.entries {
            let want = if idx.j == 0 { 0.5 } else { 0.0 };
            assert!((v - want).abs() < 1e-15, "{idx:?} {v}");
        }
    }

    #[test]
    fn level_counts() {
        let s = haar_analyze(&ramp(), 5, 1.0).unwrap();
        for j in 0..=5 {
            assert_eq!(s.entries.iter().filter(|(i, _)| i.j == j).count(), 1 << j);
        }
    }
}
