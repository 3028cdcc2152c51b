//! Weak-L^p and Lorentz quasi-norms of survival curves, layer-cake L^p
//! norms, fractional Sobolev seminorms and the lifting identity
//! `‖f‖_{L^p} = [f(x)/y^{1/p}]_{L^{p,∞}}`.

mod seminorm;
mod tao;

pub use seminorm::{fractional_seminorm, seminorm_via_curve, SeminormValue};
pub use tao::{lifted_curve, marginal_curve, marginal_measure, tao_identity_check, TaoCheck};

use crate::error::{invalid, Error, Result};
use crate::measures::DistributionCurve;
use serde::{Deserialize, Serialize};

/// Tail exponents of `λ^r μ^{r/p}` within this margin of zero count as divergent.
pub const DIVERGENCE_MARGIN: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LorentzR {
    Finite(f64),
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzSpec {
    pub p: f64,
    pub r: LorentzR,
}

impl LorentzSpec {
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return invalid(format!("p must lie in [1, ∞), got {p}"));
        }
        let r = if r.is_infinite() && r > 0.0 {
            LorentzR::Infinity
        } else if r >= 1.0 {
            LorentzR::Finite(r)
        } else {
            return invalid(format!("r must lie in [1, ∞], got {r}"));
        };
        Ok(LorentzSpec { p, r })
    }

    pub fn weak(p: f64) -> Result<Self> {
        Self::new(p, f64::INFINITY)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Finite,
    Divergent,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeakNorm {
    pub value: f64,
    pub error: f64,
    pub lambda_at_max: f64,
    /// The maximum sits on the first or last node and strictly beats the interior.
    pub endpoint_attained: bool,
}

/// `max_i λ_i μ_i^{1/p}` over the grid.
pub fn weak_norm(curve: &DistributionCurve, p: f64) -> WeakNorm {
    let n = curve.len();
    let vals: Vec<f64> = (0..n).map(|i| curve.lambda[i] * curve.mu[i].max(0.0).powf(1.0 / p)).collect();
    let mut best = 0;
    for i in 1..n {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    if n == 0 || vals[best] == 0.0 {
        return WeakNorm { value: 0.0, error: 0.0, lambda_at_max: f64::NAN, endpoint_attained: false };
    }
    let interior = if n > 2 { vals[1..n - 1].iter().copied().fold(0.0, f64::max) } else { 0.0 };
    let endpoint_attained = (best == 0 || best == n - 1) && vals[best] > interior * (1.0 + 1e-9);
    let upper = curve.lambda[best] * (curve.mu[best] + curve.error(best)).powf(1.0 / p);
    WeakNorm { value: vals[best], error: upper - vals[best], lambda_at_max: curve.lambda[best], endpoint_attained }
}

/// `weak_norm` that rejects a maximum on the boundary of the sampled window.
pub fn weak_norm_strict(curve: &DistributionCurve, p: f64) -> Result<WeakNorm> {
    let w = weak_norm(curve, p);
    if w.endpoint_attained {
        return Err(Error::EndpointAttained { lambda: w.lambda_at_max });
    }
    Ok(w)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub error: f64,
    pub verdict: Verdict,
    /// Fitted exponents of the integrand `λ^r μ^{r/p}` over the first and last decade.
    pub low_exponent: f64,
    pub high_exponent: f64,
    /// Share of the integral supplied by the extrapolated tails.
    pub tail_fraction: f64,
}

impl NormValue {
    fn divergent(low_exponent: f64, high_exponent: f64) -> Self {
        NormValue {
            value: f64::INFINITY,
            error: 0.0,
            verdict: Verdict::Divergent,
            low_exponent,
            high_exponent,
            tail_fraction: 1.0,
        }
    }

    fn zero() -> Self {
        NormValue { value: 0.0, error: 0.0, verdict: Verdict::Finite, low_exponent: 0.0, high_exponent: 0.0, tail_fraction: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.verdict == Verdict::Finite
    }

    /// True when more than a tenth of the integral comes from extrapolation.
    pub fn endpoint_limited(&self) -> bool {
        self.tail_fraction > 0.1
    }
}

/// Least-squares slope of `ln w` against `ln λ` over `idx`.
fn loglog_slope(lambda: &[f64], w: &[f64], idx: &[usize]) -> f64 {
    let pts: Vec<(f64, f64)> = idx.iter().filter(|&&i| w[i] > 0.0).map(|&i| (lambda[i].ln(), w[i].ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn window(lambda: &[f64], from_end: bool, decades: f64) -> Vec<usize> {
    let n = lambda.len();
    if from_end {
        let lim = lambda[n - 1] / 10f64.powf(decades);
        (0..n).filter(|&i| lambda[i] >= lim * (1.0 - 1e-12)).collect()
    } else {
        let lim = lambda[0] * 10f64.powf(decades);
        (0..n).filter(|&i| lambda[i] <= lim * (1.0 + 1e-12)).collect()
    }
}

struct Integrated {
    body: f64,
    low: f64,
    high: f64,
    tail_err: f64,
    low_exp: f64,
    high_exp: f64,
    divergent: bool,
}

/// `∫_0^∞ w(λ) dλ/λ` for node values `w`, interpolating `w` as a power law
/// between nodes and extending it by the power laws fitted to the first and
/// last decade.
fn dlog_body(lambda: &[f64], w: &[f64], idx: &[usize]) -> f64 {
    let mut body = 0.0;
    for k in idx.windows(2) {
        let (i, j) = (k[0], k[1]);
        let dt = (lambda[j] / lambda[i]).ln();
        let (a, b) = (w[i], w[j]);
        body += if a <= 0.0 || b <= 0.0 {
            0.5 * dt * (a + b)
        } else if ((a / b) - 1.0).abs() < 1e-12 {
            dt * a
        } else {
            dt * (b - a) / (b / a).ln()
        };
    }
    body
}

fn integrate_dlog(lambda: &[f64], w: &[f64]) -> Integrated {
    let n = lambda.len();
    let body = dlog_body(lambda, w, &(0..n).collect::<Vec<_>>());
    let mut out = Integrated { body, low: 0.0, high: 0.0, tail_err: 0.0, low_exp: 0.0, high_exp: 0.0, divergent: false };
    if w[n - 1] > 0.0 {
        let c = loglog_slope(lambda, w, &window(lambda, true, 1.0));
        let c_half = loglog_slope(lambda, w, &window(lambda, true, 0.5));
        out.high_exp = c;
        if !(c < -DIVERGENCE_MARGIN) {
            out.divergent = true;
        } else {
            out.high = w[n - 1] / -c;
            if c_half < -DIVERGENCE_MARGIN {
                out.tail_err += (w[n - 1] / -c_half - out.high).abs();
            } else {
                out.tail_err += out.high;
            }
        }
    }
    if w[0] > 0.0 {
        let c = loglog_slope(lambda, w, &window(lambda, false, 1.0));
        let c_half = loglog_slope(lambda, w, &window(lambda, false, 0.5));
        out.low_exp = c;
        if !(c > DIVERGENCE_MARGIN) {
            out.divergent = true;
        } else {
            out.low = w[0] / c;
            if c_half > DIVERGENCE_MARGIN {
                out.tail_err += (w[0] / c_half - out.low).abs();
            } else {
                out.tail_err += out.low;
            }
        }
    }
    out
}

fn check_curve(curve: &DistributionCurve) -> Result<()> {
    if curve.len() < 2 {
        return invalid("curve needs at least two nodes");
    }
    if curve.mu.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return invalid("curve values must be finite and nonnegative");
    }
    Ok(())
}

/// Integrand nodes `λ^r μ^{r/p}` for a shifted copy of the curve.
fn lorentz_nodes(curve: &DistributionCurve, p: f64, r: f64, shift: f64) -> Vec<f64> {
    (0..curve.len())
        .map(|i| {
            let m = (curve.mu[i] + shift * curve.error(i)).max(0.0);
            curve.lambda[i].powf(r) * m.powf(r / p)
        })
        .collect()
}

fn finish(curve: &DistributionCurve, p: f64, r: f64, prefactor: f64) -> NormValue {
    let main = integrate_dlog(&curve.lambda, &lorentz_nodes(curve, p, r, 0.0));
    if main.divergent {
        return NormValue::divergent(main.low_exp, main.high_exp);
    }
    let total = main.body + main.low + main.high;
    if total == 0.0 {
        return NormValue::zero();
    }
    let hi = integrate_dlog(&curve.lambda, &lorentz_nodes(curve, p, r, 1.0));
    let lo = integrate_dlog(&curve.lambda, &lorentz_nodes(curve, p, r, -1.0));
    let band = |x: &Integrated| if x.divergent { f64::NAN } else { x.body + x.low + x.high };
    let mut stat = 0.5 * (band(&hi) - band(&lo)).abs();
    if !stat.is_finite() {
        stat = total;
    }
    let err_j = stat + main.tail_err;
    let value = (prefactor * total).powf(1.0 / r);
    NormValue {
        value,
        error: value * err_j / (r * total),
        verdict: Verdict::Finite,
        low_exponent: main.low_exp,
        high_exponent: main.high_exp,
        tail_fraction: (main.low + main.high) / total,
    }
}

/// `(r ∫_0^∞ λ^r μ(λ)^{r/p} dλ/λ)^{1/r}`; the weak quasi-norm when `r = ∞`.
pub fn lorentz_norm(curve: &DistributionCurve, spec: &LorentzSpec) -> Result<NormValue> {
    check_curve(curve)?;
    match spec.r {
        LorentzR::Infinity => {
            let w = weak_norm(curve, spec.p);
            Ok(NormValue {
                value: w.value,
                error: w.error,
                verdict: Verdict::Finite,
                low_exponent: f64::NAN,
                high_exponent: f64::NAN,
                tail_fraction: if w.endpoint_attained { 1.0 } else { 0.0 },
            })
        }
        LorentzR::Finite(r) => Ok(finish(curve, spec.p, r, r)),
    }
}

/// `(p ∫_0^∞ λ^{p−1} μ(λ) dλ)^{1/p}` by the trapezoid rule in `λ^p`, with
/// the discretization error estimated against the rule on every other node.
pub fn layer_cake_norm(curve: &DistributionCurve, p: f64) -> Result<NormValue> {
    check_curve(curve)?;
    let (lam, mu) = (&curve.lambda, &curve.mu);
    let n = curve.len();
    // p ∫ λ^p μ dλ/λ with μ interpolated as a power law between nodes.
    let w: Vec<f64> = (0..n).map(|i| lam[i].powf(p) * mu[i]).collect();
    let rule = |step: usize| -> f64 {
        let idx: Vec<usize> = (0..n).step_by(step).chain(if !(n - 1).is_multiple_of(step) { Some(n - 1) } else { None }).collect();
        p * dlog_body(lam, &w, &idx)
    };
    let body = rule(1);
    let bracket = if n > 2 { (body - rule(2)).abs() } else { 0.0 };
    let ext = integrate_dlog(lam, &w);
    if ext.divergent {
        return Ok(NormValue::divergent(ext.low_exp, ext.high_exp));
    }
    let tails = p * (ext.low + ext.high);
    let total = body + tails;
    if total == 0.0 {
        return Ok(NormValue::zero());
    }
    let stat: f64 = (0..n - 1)
        .map(|i| 0.5 * (curve.error(i) + curve.error(i + 1)) * (lam[i + 1].powf(p) - lam[i].powf(p)))
        .sum();
    let err_j = bracket + stat + p * ext.tail_err;
    let value = total.powf(1.0 / p);
    Ok(NormValue {
        value,
        error: value * err_j / (p * total),
        verdict: Verdict::Finite,
        low_exponent: ext.low_exp,
        high_exponent: ext.high_exp,
        tail_fraction: tails / total,
    })
}

/// One row of a norm table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormRow {
    pub function: String,
    pub gamma: f64,
    pub b: f64,
    pub p: f64,
    /// `None` for the weak quasi-norm.
    pub r: Option<f64>,
    pub value: f64,
    pub error: f64,
    pub verdict: Verdict,
}

pub fn write_norm_table<W: std::io::Write>(rows: &[NormRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["function", "gamma", "b", "p", "r", "value", "error", "verdict"])?;
    for row in rows {
        wr.write_record(&[
            row.function.clone(),
            format!("{}", row.gamma),
            format!("{}", row.b),
            format!("{}", row.p),
            row.r.map_or_else(|| "inf".to_string(), |r| format!("{r}")),
            format!("{:e}", row.value),
            format!("{:e}", row.error),
            match row.verdict {
                Verdict::Finite => "finite".to_string(),
                Verdict::Divergent => "divergent".to_string(),
            },
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::log_grid;

    fn power_curve(p: f64, lo: f64, hi: f64) -> DistributionCurve {
        let lam = log_grid(lo, hi, 16);
        let mu = lam.iter().map(|l| l.powf(-p)).collect();
        DistributionCurve::exact(lam, mu, "λ^-p")
    }

    #[test]
    fn weak_norm_of_prototype_is_one() {
        for p in [1.0, 1.5, 3.0] {
            let w = weak_norm(&power_curve(p, 1e-2, 1e3), p);
            assert!((w.value - 1.0).abs() < 1e-12);
            assert!(!w.endpoint_attained);
        }
    }

    #[test]
    fn zero_curve_has_zero_norms() {
        let c = DistributionCurve::exact(log_grid(1e-2, 1e2, 4), vec![0.0; 17], "zero");
        assert_eq!(weak_norm(&c, 2.0).value, 0.0);
        let v = lorentz_norm(&c, &LorentzSpec::new(2.0, 3.0).unwrap()).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn endpoint_maximum_is_flagged() {
        let lam = log_grid(1.0, 100.0, 8);
        let mu = lam.iter().map(|l| 1.0 / l.sqrt()).collect();
        let c = DistributionCurve::exact(lam, mu, "λ^-1/2");
        assert!(weak_norm(&c, 1.0).endpoint_attained);
        assert!(matches!(weak_norm_strict(&c, 1.0), Err(Error::EndpointAttained { .. })));
    }

    #[test]
    fn truncated_power_law_matches_hand_integral() {
        // μ = λ^{-p} on [1, 10] and 0 elsewhere: r ∫_1^10 λ^{r−1} λ^{-r} dλ = r ln 10.
        let (p, r) = (2.0, 3.0);
        let mut lam = vec![1.0 - 1e-12];
        lam.extend(log_grid(1.0, 10.0, 50));
        lam.push(10.0 * (1.0 + 1e-12));
        let mu: Vec<f64> = lam
            .iter()
            .enumerate()
            .map(|(i, l)| if i == 0 || i == lam.len() - 1 { 0.0 } else { l.powf(-p) })
            .collect();
        let c = DistributionCurve::exact(lam, mu, "truncated");
        let v = lorentz_norm(&c, &LorentzSpec::new(p, r).unwrap()).unwrap();
        let want = (r * 10f64.ln()).powf(1.0 / r);
        assert!((v.value - want).abs() < 1e-9 * want, "{} vs {want}", v.value);
    }

    #[test]
    fn lorentz_r_equals_p_matches_layer_cake_for_exponential_tail() {
        // μ(λ) = e^{-λ}: ∫ p λ^{p−1} e^{-λ} = Γ(p+1).
        let lam = log_grid(1e-6, 60.0, 32);
        let mu: Vec<f64> = lam.iter().map(|l| (-l).exp()).collect();
        let c = DistributionCurve::exact(lam, mu, "exp");
        for p in [1.0, 2.0, 3.0] {
            let want = crate::constants::gamma(p + 1.0).powf(1.0 / p);
            let lz = lorentz_norm(&c, &LorentzSpec::new(p, p).unwrap()).unwrap();
            let lc = layer_cake_norm(&c, p).unwrap();
            assert!((lz.value - want).abs() < 2e-3 * want, "p={p} lorentz {} want {want}", lz.value);
            assert!((lc.value - want).abs() <= lc.error, "p={p} layer {} ± {} want {want}", lc.value, lc.error);
            assert!(lc.error < 5e-3 * want);
        }
    }

    #[test]
    fn divergent_tail_is_a_verdict() {
        let c = power_curve(1.0, 1e-2, 1e4);
        let v = lorentz_norm(&c, &LorentzSpec::new(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(v.verdict, Verdict::Divergent);
    }
}
