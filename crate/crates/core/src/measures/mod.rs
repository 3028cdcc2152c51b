//! The measures `ν_γ = |h|^{γ−n} dx dh`, difference quotients and survival
//! curves `λ ↦ ν_γ(E_{λ,b}[u])`.

mod compare;
mod montecarlo;
mod oracle;

pub use compare::{compare_curves, oracle_equivalence, CurveComparison, NodeComparison, MC_SIGMAS};

pub use montecarlo::{estimate_distribution, Orientation, SamplingPlan};
pub use oracle::{gamma_zero_threshold, oracle_distribution_1d, OracleConfig, OracleDomain, ThresholdVerdict};

use crate::error::{invalid, Result};
use crate::funcspace::TestFunction;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub n: usize,
    pub gamma: f64,
}

impl MeasureSpec {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return invalid(format!("dimension {n} not supported"));
        }
        if !gamma.is_finite() {
            return invalid("gamma must be finite");
        }
        Ok(MeasureSpec { n, gamma })
    }

    /// `|h|^{γ−n}`.
    pub fn weight(&self, h_norm: f64) -> f64 {
        h_norm.powf(self.gamma - self.n as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub b: f64,
}

impl QuotientSpec {
    pub fn new(b: f64) -> Self {
        QuotientSpec { b }
    }

    /// `b = 1 + γ/p`.
    pub fn sobolev(gamma: f64, p: f64) -> Self {
        QuotientSpec { b: 1.0 + gamma / p }
    }

    /// `b = γ/p`.
    pub fn lebesgue(gamma: f64, p: f64) -> Self {
        QuotientSpec { b: gamma / p }
    }

    /// `b = s + γ/p`.
    pub fn fractional(s: f64, gamma: f64, p: f64) -> Self {
        QuotientSpec { b: s + gamma / p }
    }
}

/// `|u(x+h) − u(x)| / |h|^b`.
pub fn diff_quotient(u: &TestFunction, x: &[f64], h: &[f64], b: f64) -> Result<f64> {
    let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return invalid("h must be nonzero");
    }
    if x.len() != u.dim() || h.len() != u.dim() {
        return invalid("point and step must match the dimension");
    }
    let mut y = [0.0; 2];
    for i in 0..x.len() {
        y[i] = x[i] + h[i];
    }
    Ok((u.eval(&y[..x.len()]) - u.eval(x)).abs() / norm.powf(b))
}

/// Log-spaced grid with `per_decade` points per decade, endpoints included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade > 0);
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round().max(1.0) as usize;
    (0..=n).map(|k| lo * 10f64.powf(decades * k as f64 / n as f64)).collect()
}

/// Default grid `[1e-3, 1e6]` with 16 points per decade.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(1e-3, 1e6, 16)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CurveSource {
    MonteCarlo { plan: SamplingPlan },
    Oracle { config: OracleConfig },
    Exact { description: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    /// Monte Carlo standard error, or the discretization bound for quadrature curves.
    pub stderr: Vec<f64>,
    /// Bound on the mass discarded outside the sampled range of `|h|`.
    pub truncation_bound: Vec<f64>,
    /// Number of raw non-monotone steps beyond 3 standard errors.
    pub raw_violations: usize,
    pub source: CurveSource,
}

impl DistributionCurve {
    /// Curve from exact values; no error bars.
    pub fn exact(lambda: Vec<f64>, mu: Vec<f64>, description: impl Into<String>) -> Self {
        let n = lambda.len();
        DistributionCurve {
            lambda,
            mu,
            stderr: vec![0.0; n],
            truncation_bound: vec![0.0; n],
            raw_violations: 0,
            source: CurveSource::Exact { description: description.into() },
        }
    }

    pub fn zero(lambda: Vec<f64>, source: CurveSource) -> Self {
        let n = lambda.len();
        DistributionCurve {
            lambda,
            mu: vec![0.0; n],
            stderr: vec![0.0; n],
            truncation_bound: vec![0.0; n],
            raw_violations: 0,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// Total error bar per node: standard error plus truncation bound.
    pub fn error(&self, i: usize) -> f64 {
        self.stderr[i] + self.truncation_bound[i]
    }

    /// Scales `mu` and error bars by `c`, as for the measure `c ν`.
    pub fn scale_mass(&mut self, c: f64) {
        for i in 0..self.len() {
            self.mu[i] *= c;
            self.stderr[i] *= c;
            self.truncation_bound[i] *= c;
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["lambda", "mu", "stderr", "truncation_bound"])?;
        for i in 0..self.len() {
            wr.write_record(&[
                format!("{:e}", self.lambda[i]),
                format!("{:e}", self.mu[i]),
                format!("{:e}", self.stderr[i]),
                format!("{:e}", self.truncation_bound[i]),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Weighted pool-adjacent-violators fit of a nonincreasing sequence.
pub fn isotonic_nonincreasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (i, &v) in y.iter().enumerate() {
        let wi = if w[i] > 0.0 && w[i].is_finite() { w[i] } else { 1.0 };
        blocks.push((v, wi, 1));
        while blocks.len() > 1 {
            let (v2, w2, n2) = blocks[blocks.len() - 1];
            let (v1, w1, n1) = blocks[blocks.len() - 2];
            if v1 >= v2 {
                break;
            }
            blocks.pop();
            let wsum = w1 + w2;
            *blocks.last_mut().unwrap() = ((v1 * w1 + v2 * w2) / wsum, wsum, n1 + n2);
        }
    }
    blocks.into_iter().flat_map(|(v, _, n)| std::iter::repeat_n(v, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{make_hat, make_indicator_interval};

    #[test]
    fn quotient_examples() {
        let hat = make_hat();
        assert_eq!(diff_quotient(&hat, &[0.0], &[1.0], 2.0).unwrap(), 1.0);
        let ind = make_indicator_interval(0.0, 1.0).unwrap();
        assert!((diff_quotient(&ind, &[-0.1], &[0.2], 2.0).unwrap() - 25.0).abs() < 1e-12);
        assert!(diff_quotient(&hat, &[0.0], &[0.0], 1.0).is_err());
    }

    #[test]
    fn isotonic_pools_violations() {
        let y = [3.0, 1.0, 2.0, 0.5];
        let fit = isotonic_nonincreasing(&y, &[1.0; 4]);
        assert_eq!(fit, vec![3.0, 1.5, 1.5, 0.5]);
    }

    #[test]
    fn grid_has_sixteen_per_decade() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 9 * 16 + 1);
        assert!((g[16] / g[0] - 10.0).abs() < 1e-9);
    }
}
