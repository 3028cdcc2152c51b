//! Interpolation inequalities between `Ẇ^{t,q}` and `BV`, checked through
//! survival curves of difference quotients.

use crate::counterexamples::InterpolationParams;
use crate::error::{invalid, Result};
use crate::funcspace::{total_variation, TestFunction};
use crate::measures::{diff_quotient, log_grid, oracle_distribution_1d, DistributionCurve, MeasureSpec, OracleConfig, QuotientSpec};
use crate::norms::{fractional_seminorm, layer_cake_norm, lorentz_norm, weak_norm, LorentzSpec, NormValue, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HolderBound {
    /// `‖F‖_{L^p}`.
    pub lhs: f64,
    pub lhs_error: f64,
    pub lq: f64,
    pub weak_l1: f64,
    /// `2^{1/p} (p/(p−1))^θ`.
    pub constant: f64,
    /// `constant · ‖F‖_{L^q}^{1−θ} [F]_{L^{1,∞}}^θ`.
    pub rhs: f64,
    pub holds: bool,
}

/// The split at the level `λ` balancing `λ^{p−q}‖F‖_q^q` against
/// `p λ^{p−1}[F]_{1,∞}/(p−1)` gives `‖F‖_p^p ≤ 2 (p/(p−1))^{pθ} ‖F‖_q^{q(p−1)/(q−1)} [F]_{1,∞}^{pθ}`.
pub fn holder_constant(p: f64, theta: f64) -> f64 {
    2f64.powf(1.0 / p) * (p / (p - 1.0)).powf(theta)
}

/// `(‖F‖_{L^p}, C ‖F‖_{L^q}^{1−θ} [F]_{L^{1,∞}}^θ)` from the survival curve of `F`,
/// with `1/p = (1−θ)/q + θ`.
pub fn lorentz_holder_bound(curve: &DistributionCurve, p: f64, q: f64, theta: f64) -> Result<HolderBound> {
    if !(theta > 0.0 && theta < 1.0) || !(q > 1.0) {
        return invalid("need 0 < theta < 1 and q > 1");
    }
    if ((1.0 - theta) / q + theta - 1.0 / p).abs() > 1e-12 {
        return invalid("p, q and theta must satisfy 1/p = (1 - theta)/q + theta");
    }
    let constant = holder_constant(p, theta);
    if curve.mu.iter().all(|&m| m == 0.0) {
        return Ok(HolderBound { lhs: 0.0, lhs_error: 0.0, lq: 0.0, weak_l1: 0.0, constant, rhs: 0.0, holds: true });
    }
    let lp = layer_cake_norm(curve, p)?;
    let lq = layer_cake_norm(curve, q)?;
    let weak = weak_norm(curve, 1.0);
    let rhs = if lq.is_finite() { constant * lq.value.powf(1.0 - theta) * weak.value.powf(theta) } else { f64::INFINITY };
    let (lhs, lhs_error) = if lp.is_finite() { (lp.value, lp.error) } else { (f64::INFINITY, 0.0) };
    Ok(HolderBound { lhs, lhs_error, lq: lq.value, weak_l1: weak.value, constant, rhs, holds: lhs - lhs_error <= rhs })
}

fn default_lambdas() -> Vec<f64> {
    log_grid(1e-6, 1e6, 6)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GnReport {
    pub function: String,
    pub params: InterpolationParams,
    /// `‖u‖_{Ẇ^{s,p}}`.
    pub lhs: f64,
    pub lhs_error: f64,
    /// `‖u‖_{Ẇ^{t,q}}`.
    pub wtq: f64,
    pub tv: f64,
    /// `lhs / (‖u‖_{Ẇ^{t,q}}^{1−θ} TV^θ)`.
    pub ratio: f64,
    /// `[𝒬_{1+γ₀} u]_{L^{1,∞}(ν_{γ₀})}`.
    pub weak_l1: f64,
    pub weak_over_tv: f64,
    /// The split applied to `F = 𝒬_{1+γ₀} u` on `ν_{γ₀}`.
    pub holder: HolderBound,
}

/// Gagliardo-Nirenberg ratio for `t < 1/q`, with the chain through
/// `F = 𝒬_{1+γ₀} u` on `ν_{γ₀}`.
pub fn gn_inequality_check(u: &TestFunction, t: f64, q: f64, theta: f64) -> Result<GnReport> {
    let params = InterpolationParams::new(t, q, theta)?;
    if !(t < 1.0 / q) {
        return invalid("the inequality needs t < 1/q");
    }
    if u.dim() != 1 {
        return invalid("only functions on the line are supported");
    }
    let lhs = fractional_seminorm(u, params.s, params.p)?;
    let wtq = fractional_seminorm(u, t, q)?;
    let tv = total_variation(u);
    let m = MeasureSpec::new(1, params.gamma0)?;
    let cfg = OracleConfig { adapt_tolerance: 1e-4, ..Default::default() };
    let curve = oracle_distribution_1d(u, &m, &QuotientSpec::new(1.0 + params.gamma0), &default_lambdas(), &cfg)?;
    let weak = weak_norm(&curve, 1.0).value;
    let holder = lorentz_holder_bound(&curve, params.p, q, theta)?;
    let ratio = lhs.norm() / (wtq.norm().powf(1.0 - theta) * tv.powf(theta));
    Ok(GnReport {
        function: u.id().to_string(),
        params,
        lhs: lhs.norm(),
        lhs_error: lhs.error / (params.p * lhs.pow.powf(1.0 - 1.0 / params.p)),
        wtq: wtq.norm(),
        tv,
        ratio,
        weak_l1: weak,
        weak_over_tv: weak / tv,
        holder,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FactorizationCheck {
    pub samples: usize,
    /// Largest relative error among samples with `Δ_h u ≠ 0`.
    pub max_relative_error: f64,
}

/// `𝒬_{s+γ/p} u = (𝒬_{t+γ/q} u)^{1−θ} (𝒬_{1+γ} u)^θ` at random `(x, h)`.
pub fn factorization_check(u: &TestFunction, params: &InterpolationParams, gamma: f64, samples: usize, seed: u64) -> Result<FactorizationCheck> {
    if u.dim() != 1 {
        return invalid("only functions on the line are supported");
    }
    let (lo, hi) = u.support_box()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = lo - 0.5 + (hi - lo + 1.0) * rng.random::<f64>();
        let mut h = 10f64.powf(rng.random_range(-4.0..1.0));
        if rng.random::<bool>() {
            h = -h;
        }
        let whole = diff_quotient(u, &[x], &[h], params.b(gamma))?;
        if whole == 0.0 {
            continue;
        }
        let a = diff_quotient(u, &[x], &[h], params.t + gamma / params.q)?;
        let c = diff_quotient(u, &[x], &[h], 1.0 + gamma)?;
        let prod = a.powf(1.0 - params.theta) * c.powf(params.theta);
        worst = worst.max((prod - whole).abs() / whole);
    }
    Ok(FactorizationCheck { samples, max_relative_error: worst })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LorentzInterpolationReport {
    pub function: String,
    pub params: InterpolationParams,
    pub gamma: f64,
    pub r: f64,
    pub factorization: FactorizationCheck,
    /// `[𝒬_{s+γ/p} u]_{L^{p,r}(ν_γ)}`.
    pub lhs: NormValue,
    pub wtq: f64,
    pub tv: f64,
    /// `‖u‖_{Ẇ^{t,q}}^{1−θ} ‖u‖_{BV}^θ`.
    pub rhs: f64,
    /// `lhs / rhs`.
    pub constant: f64,
}

/// Lorentz interpolation at `r = q/(1−θ)` for `t ≥ 1/q` and `γ ∉ [−1, 0]`.
pub fn lorentz_interpolation_check(u: &TestFunction, t: f64, q: f64, theta: f64, gamma: f64, oracle: &OracleConfig) -> Result<LorentzInterpolationReport> {
    let params = InterpolationParams::new(t, q, theta)?;
    if t < 1.0 / q {
        return invalid("the inequality needs t >= 1/q");
    }
    if (-1.0..=0.0).contains(&gamma) {
        return invalid("gamma must lie outside [-1, 0]");
    }
    let r = params.critical_r();
    let factorization = factorization_check(u, &params, gamma, 2000, 7)?;
    let curve = oracle_distribution_1d(u, &MeasureSpec::new(1, gamma)?, &QuotientSpec::new(params.b(gamma)), &log_grid(1e-4, 1e9, 4), oracle)?;
    let lhs = lorentz_norm(&curve, &LorentzSpec::new(params.p, r)?)?;
    let wtq = fractional_seminorm(u, t, q)?.norm();
    let tv = total_variation(u);
    let rhs = wtq.powf(1.0 - theta) * tv.powf(theta);
    let constant = if lhs.verdict == Verdict::Finite { lhs.value / rhs } else { f64::INFINITY };
    Ok(LorentzInterpolationReport { function: u.id().to_string(), params, gamma, r, factorization, lhs, wtq, tv, rhs, constant })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantStability {
    pub reports: Vec<LorentzInterpolationReport>,
    pub mean: f64,
    /// `max_j |C_j / mean − 1|`.
    pub max_deviation: f64,
}

/// [`lorentz_interpolation_check`] over the Cantor family `g_j`.
pub fn lorentz_interpolation_family(params: &InterpolationParams, js: &[u32], gamma: f64, oracle: &OracleConfig) -> Result<ConstantStability> {
    let Some(eps) = params.eps else {
        return invalid("the Cantor family needs t > 1/q");
    };
    let reports = js
        .par_iter()
        .map(|&j| {
            let g = crate::funcspace::make_cantor_g(j, eps)?;
            lorentz_interpolation_check(&g, params.t, params.q, params.theta, gamma, oracle)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = reports.iter().map(|r| r.constant).sum::<f64>() / reports.len() as f64;
    let max_deviation = reports.iter().map(|r| (r.constant / mean - 1.0).abs()).fold(0.0, f64::max);
    Ok(ConstantStability { reports, mean, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::make_hat;
    use crate::measures::DistributionCurve;

    #[test]
    fn flat_curve_against_explicit_constant() {
        let a = 0.3;
        let mut lambda = log_grid(1e-6, 1.0, 40);
        lambda.push(1.0 + 1e-12);
        let mut mu = vec![a; lambda.len() - 1];
        mu.push(0.0);
        let c = DistributionCurve::exact(lambda, mu, "flat");
        let (q, theta) = (2.0, 0.5);
        let p = 1.0 / ((1.0 - theta) / q + theta);
        let b = lorentz_holder_bound(&c, p, q, theta).unwrap();
        assert!((b.lhs - a.powf(1.0 / p)).abs() < 1e-6, "{b:?}");
        assert!((b.rhs / b.lhs - holder_constant(p, theta)).abs() < 1e-5);
        assert!(b.holds);
    }

    #[test]
    fn zero_curve() {
        let c = DistributionCurve::exact(vec![1.0, 2.0], vec![0.0, 0.0], "zero");
        let b = lorentz_holder_bound(&c, 4.0 / 3.0, 2.0, 0.5).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
    }

    #[test]
    fn rejects_mismatched_exponents() {
        let c = DistributionCurve::exact(vec![1.0, 2.0], vec![1.0, 0.0], "x");
        assert!(lorentz_holder_bound(&c, 1.5, 2.0, 0.5).is_err());
    }

    #[test]
    fn factorization_on_hat() {
        let params = InterpolationParams::new(0.75, 2.0, 0.5).unwrap();
        let f = factorization_check(&make_hat(), &params, 2.0, 500, 1).unwrap();
        assert!(f.max_relative_error < 1e-12, "{f:?}");
    }
}
