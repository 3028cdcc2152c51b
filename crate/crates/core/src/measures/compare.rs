use super::{estimate_distribution, oracle_distribution_1d, DistributionCurve, MeasureSpec, OracleConfig, QuotientSpec, SamplingPlan};
use crate::error::{invalid, Result};
use crate::funcspace::TestFunction;
use serde::{Deserialize, Serialize};

/// Multiple of the Monte Carlo standard error counted as certified.
pub const MC_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NodeComparison {
    pub lambda: f64,
    pub monte_carlo: f64,
    pub oracle: f64,
    pub difference: f64,
    /// `MC_SIGMAS · stderr + truncation` of the sampled curve plus the oracle bound.
    pub bound: f64,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurveComparison {
    pub function: String,
    pub gamma: f64,
    pub b: f64,
    pub nodes: Vec<NodeComparison>,
    pub all_agree: bool,
}

/// Node-by-node agreement of a sampled curve with a quadrature curve.
pub fn compare_curves(sampled: &DistributionCurve, oracle: &DistributionCurve) -> Result<Vec<NodeComparison>> {
    if sampled.lambda != oracle.lambda {
        return invalid("curves must share the lambda grid");
    }
    Ok((0..sampled.len())
        .map(|i| {
            let difference = (sampled.mu[i] - oracle.mu[i]).abs();
            let bound = MC_SIGMAS * sampled.stderr[i] + sampled.truncation_bound[i] + oracle.error(i);
            NodeComparison {
                lambda: sampled.lambda[i],
                monte_carlo: sampled.mu[i],
                oracle: oracle.mu[i],
                difference,
                bound,
                agree: difference <= bound,
            }
        })
        .collect())
}

/// Monte Carlo against the 1D oracle for `Q_b u` under `ν_γ`.
pub fn oracle_equivalence(u: &TestFunction, gamma: f64, b: f64, lambdas: &[f64], seed: u64) -> Result<CurveComparison> {
    let m = MeasureSpec::new(1, gamma)?;
    let q = QuotientSpec::new(b);
    let plan = SamplingPlan::covering(u, &m, &q, lambdas, seed);
    let sampled = estimate_distribution(u, &m, &q, &plan, lambdas)?;
    let oracle = oracle_distribution_1d(u, &m, &q, lambdas, &OracleConfig::default())?;
    let nodes = compare_curves(&sampled, &oracle)?;
    let all_agree = nodes.iter().all(|n| n.agree);
    Ok(CurveComparison { function: u.id().to_string(), gamma, b, nodes, all_agree })
}
