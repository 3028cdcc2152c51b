//! Quadrature rules shared by the oracle and the norm computations.

#![allow(clippy::excessive_precision)]

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use rayon::prelude::*;
use std::sync::OnceLock;

fn rule(n: usize) -> &'static [(f64, f64)] {
    static R8: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R16: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    static R24: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    let cell = match n {
        8 => &R8,
        16 => &R16,
        24 => &R24,
        _ => panic!("no cached Gauss-Legendre rule of order {n}"),
    };
    cell.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(n).unwrap())
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`; `n` is one of 8, 16, 24.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    rule(n)
}

pub fn gl<F: FnMut(f64) -> f64>(n: usize, a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    rule(n).iter().map(|&(x, w)| w * f(m + c * x)).sum::<f64>() * c
}

/// Composite Gauss-Legendre with `panels` equal panels.
pub fn gl_composite<F: FnMut(f64) -> f64>(n: usize, panels: usize, a: f64, b: f64, mut f: F) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels).map(|k| gl(n, a + k as f64 * w, a + (k + 1) as f64 * w, &mut f)).sum()
}


/// Kronrod abscissae of the 7-15 pair on `[0, 1]`, descending (QUADPACK).
pub const XGK15: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
pub const WGK15: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
/// Gauss weights for the nodes `XGK15[1], XGK15[3], XGK15[5], XGK15[7]`.
pub const WG7: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// The 15 Kronrod nodes on `[a, b]` with Kronrod and Gauss weights (Gauss
/// weight 0 for the Kronrod-only nodes), already scaled by the half width.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut out = [(0.0, 0.0, 0.0); 15];
    let mut idx = 0;
    for k in 0..7 {
        let wg = if k % 2 == 1 { WG7[k / 2] } else { 0.0 };
        out[idx] = (m - c * XGK15[k], c * WGK15[k], c * wg);
        out[idx + 1] = (m + c * XGK15[k], c * WGK15[k], c * wg);
        idx += 2;
    }
    out[14] = (m, c * WGK15[7], c * WG7[3]);
    out
}

/// `∫_a^b f(h) dh` for `0 < a < b < ∞` with 7-15 Gauss-Kronrod panels
/// uniform in `ln h` (`per_decade` per decade) and extra panel edges at
/// `edges`. Returns the Kronrod value and the summed `|K − G|`.
pub fn gk_log<F: Fn(f64) -> f64 + Sync>(a: f64, b: f64, per_decade: usize, edges: &[f64], f: F) -> (f64, f64) {
    assert!(a > 0.0 && b > a && b.is_finite());
    let decades = (b / a).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut pts: Vec<f64> = (0..=n).map(|k| a * (b / a).powf(k as f64 / n as f64)).collect();
    pts.extend(edges.iter().copied().filter(|&e| e > a && e < b));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs());
    let parts: Vec<(f64, f64)> = pts
        .par_windows(2)
        .map(|w| {
            let (la, lb) = (w[0].ln(), w[1].ln());
            let (mut k, mut g) = (0.0, 0.0);
            for (t, wk, wg) in kronrod_nodes(la, lb) {
                let h = t.exp();
                let v = f(h) * h;
                k += wk * v;
                g += wg * v;
            }
            (k, (k - g).abs())
        })
        .collect();
    parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_pair_integrates_polynomials() {
        let nodes = kronrod_nodes(0.0, 2.0);
        let (k, g): (f64, f64) = nodes
            .iter()
            .fold((0.0, 0.0), |(k, g), &(x, wk, wg)| (k + wk * x.powi(6), g + wg * x.powi(6)));
        let exact = 2f64.powi(7) / 7.0;
        assert!((k - exact).abs() < 1e-12);
        assert!((g - exact).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_exact_for_low_degree() {
        let v = gl(8, -1.0, 3.0, |x| x.powi(9) - 2.0 * x);
        let exact = (3f64.powi(10) - 1.0) / 10.0 - (9.0 - 1.0);
        assert!((v - exact).abs() < 1e-9 * exact.abs());
    }
}
