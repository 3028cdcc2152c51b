//! Growth of the Cantor-type family `g_j` and of the boundary family under
//! the norms that enter the interpolation inequality with Lorentz exponent `r`.

use crate::error::{invalid, Result};
use crate::funcspace::{make_boundary_g, make_cantor_g, total_variation, TestFunction};
use crate::measures::{log_grid, oracle_distribution_1d, DistributionCurve, MeasureSpec, OracleConfig, OracleDomain, QuotientSpec};
use crate::norms::{fractional_seminorm, lorentz_norm, LorentzSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `(t, q, θ)` together with the derived `p, s, γ₀, α, ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationParams {
    pub t: f64,
    pub q: f64,
    pub theta: f64,
    pub p: f64,
    pub s: f64,
    pub gamma0: f64,
    pub alpha: f64,
    /// `2^{−1/α}`, present when `α > 0`.
    pub eps: Option<f64>,
}

impl InterpolationParams {
    pub fn new(t: f64, q: f64, theta: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) || !(q > 1.0 && q.is_finite()) || !(theta > 0.0 && theta < 1.0) {
            return invalid("need 0 < t < 1, 1 < q < inf, 0 < theta < 1");
        }
        let p = 1.0 / ((1.0 - theta) / q + theta);
        let s = (1.0 - theta) * t + theta;
        let gamma0 = -(1.0 - t) / (1.0 - 1.0 / q);
        let alpha = 1.0 + gamma0;
        let eps = (alpha > 0.0).then(|| 2f64.powf(-1.0 / alpha));
        Ok(InterpolationParams { t, q, theta, p, s, gamma0, alpha, eps })
    }

    /// Quotient exponent `s + γ/p`.
    pub fn b(&self, gamma: f64) -> f64 {
        self.s + gamma / self.p
    }

    /// `(1−θ)(t + γ/q) + θ(1 + γ)`, equal to [`Self::b`] for every `γ`.
    pub fn b_interpolated(&self, gamma: f64) -> f64 {
        (1.0 - self.theta) * (self.t + gamma / self.q) + self.theta * (1.0 + gamma)
    }

    /// `B = ε^{−(γ−γ₀)}`.
    pub fn staircase_base(&self, gamma: f64) -> Option<f64> {
        self.eps.map(|e| e.powf(-(gamma - self.gamma0)))
    }

    /// The critical Lorentz exponent `q/(1−θ)`.
    pub fn critical_r(&self) -> f64 {
        self.q / (1.0 - self.theta)
    }
}

/// Fit of `y_j = a + c·j^κ`; `κ` is the growth exponent of `y`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ExponentFit {
    pub kappa: f64,
    pub offset: f64,
    pub coefficient: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
    /// Least-squares slope of `ln y` against `ln j`, without an offset.
    pub loglog_slope: f64,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    (icpt, slope, (rss / m).sqrt())
}

/// Growth exponent of positive data `ys` over `js`, with a free offset that
/// absorbs the `j`-independent part of the quantity.
pub fn exponent_fit(js: &[f64], ys: &[f64]) -> Result<ExponentFit> {
    if js.len() < 4 || js.len() != ys.len() || js.iter().any(|j| !(*j > 0.0)) || ys.iter().any(|y| !(*y > 0.0)) {
        return invalid("exponent fit needs at least four positive points");
    }
    let lj: Vec<f64> = js.iter().map(|j| j.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let loglog_slope = linear_fit(&lj, &ly).1;
    let rms_at = |k: f64| {
        let x: Vec<f64> = js.iter().map(|j| j.powf(k)).collect();
        linear_fit(&x, ys).2
    };
    let (mut lo, mut hi) = (0.02, 4.0);
    let mut best = (lo, f64::INFINITY);
    let steps = 400;
    for i in 0..=steps {
        let k = lo + (hi - lo) * i as f64 / steps as f64;
        let r = rms_at(k);
        if r < best.1 {
            best = (k, r);
        }
    }
    let h = (hi - lo) / steps as f64;
    lo = (best.0 - h).max(lo);
    hi = (best.0 + h).min(hi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if rms_at(a) < rms_at(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let x: Vec<f64> = js.iter().map(|j| j.powf(kappa)).collect();
    let (offset, coefficient, rms) = linear_fit(&x, ys);
    Ok(ExponentFit { kappa, offset, coefficient, rms, loglog_slope })
}

/// Curve settings for the growth tables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub lambdas: Vec<f64>,
    pub oracle: OracleConfig,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        GrowthConfig {
            lambdas: log_grid(1e-4, 1e9, 4),
            oracle: OracleConfig { adapt_tolerance: 1e-3, adapt_budget: 200, ..Default::default() },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthRow {
    pub j: u32,
    pub tv: f64,
    /// `‖g_j‖_{Ẇ^{t,q}}^q`.
    pub seminorm_pow: f64,
    pub seminorm_error: f64,
    /// `[𝒬_b g_j]_{L^{p,r}(ν_γ)}`.
    pub lorentz: f64,
    pub lorentz_error: f64,
    pub endpoint_limited: bool,
    /// `ln` of the ratio to the previous row, zero in the first row.
    pub log_increment_seminorm: f64,
    pub log_increment_lorentz: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthTable {
    pub family: String,
    pub gamma: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub rows: Vec<GrowthRow>,
    /// Exponent of `‖g_j‖^q`, predicted 1.
    pub seminorm_fit: ExponentFit,
    /// Fit of `[𝒬 g_j]^r`; the Lorentz exponent is `κ/r`, predicted `1/r`.
    pub lorentz_fit: ExponentFit,
    pub seminorm_exponent: f64,
    pub lorentz_exponent: f64,
}

impl GrowthTable {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "family",
            "j",
            "tv",
            "seminorm_pow",
            "seminorm_error",
            "lorentz",
            "lorentz_error",
            "endpoint_limited",
            "log_increment_seminorm",
            "log_increment_lorentz",
        ])?;
        for r in &self.rows {
            wr.write_record(&[
                self.family.clone(),
                r.j.to_string(),
                format!("{:e}", r.tv),
                format!("{:e}", r.seminorm_pow),
                format!("{:e}", r.seminorm_error),
                format!("{:e}", r.lorentz),
                format!("{:e}", r.lorentz_error),
                r.endpoint_limited.to_string(),
                format!("{:e}", r.log_increment_seminorm),
                format!("{:e}", r.log_increment_lorentz),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn table_for(
    family: &str,
    make: &(dyn Fn(u32) -> Result<TestFunction> + Sync),
    js: &[u32],
    t: f64,
    q: f64,
    gamma: f64,
    b: f64,
    p: f64,
    r: f64,
    cfg: &GrowthConfig,
) -> Result<GrowthTable> {
    if js.len() < 4 {
        return invalid("growth fits need at least four values of j");
    }
    let spec = LorentzSpec::new(p, r)?;
    let m = MeasureSpec::new(1, gamma)?;
    let qs = QuotientSpec::new(b);
    let mut rows = js
        .par_iter()
        .map(|&j| {
            let g = make(j)?;
            let sn = fractional_seminorm(&g, t, q)?;
            let curve = oracle_distribution_1d(&g, &m, &qs, &cfg.lambdas, &cfg.oracle)?;
            let lz = lorentz_norm(&curve, &spec)?;
            Ok(GrowthRow {
                j,
                tv: total_variation(&g),
                seminorm_pow: sn.pow,
                seminorm_error: sn.error,
                lorentz: lz.value,
                lorentz_error: lz.error,
                endpoint_limited: lz.endpoint_limited(),
                log_increment_seminorm: 0.0,
                log_increment_lorentz: 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 1..rows.len() {
        rows[i].log_increment_seminorm = (rows[i].seminorm_pow / rows[i - 1].seminorm_pow).ln();
        rows[i].log_increment_lorentz = (rows[i].lorentz / rows[i - 1].lorentz).ln();
    }
    let jf: Vec<f64> = js.iter().map(|&j| j as f64).collect();
    let seminorm_fit = exponent_fit(&jf, &rows.iter().map(|r| r.seminorm_pow).collect::<Vec<_>>())?;
    let lorentz_fit = exponent_fit(&jf, &rows.iter().map(|row| row.lorentz.powf(r)).collect::<Vec<_>>())?;
    Ok(GrowthTable {
        family: family.to_string(),
        gamma,
        b,
        p,
        q,
        r,
        rows,
        seminorm_exponent: seminorm_fit.kappa,
        lorentz_exponent: lorentz_fit.kappa / r,
        seminorm_fit,
        lorentz_fit,
    })
}

/// Rows `j ∈ js` for the Cantor family at `ε = 2^{−1/α}`.
pub fn growth_table(params: &InterpolationParams, js: &[u32], gamma: f64, r: f64, cfg: &GrowthConfig) -> Result<GrowthTable> {
    let Some(eps) = params.eps else {
        return invalid("the Cantor family needs t > 1/q");
    };
    if (gamma - params.gamma0).abs() < 1e-12 {
        return invalid("gamma must differ from gamma0");
    }
    if js.iter().any(|&j| j > 10) {
        return invalid("j is limited to 10");
    }
    table_for(
        &format!("cantor:eps={eps}"),
        &|j| make_cantor_g(j, eps),
        js,
        params.t,
        params.q,
        gamma,
        params.b(gamma),
        params.p,
        r,
        cfg,
    )
}

/// Boundary family `g_0(2^j x) g_0(2^j(2−x))` with `b = (1+γ)/p` and the
/// seminorm taken at `t = 1/q`.
pub fn boundary_family_blowup(js: &[u32], gamma: f64, p: f64, q: f64, r: f64, cfg: &GrowthConfig) -> Result<GrowthTable> {
    if (-1.0..=0.0).contains(&gamma) {
        return invalid("gamma must lie outside [-1, 0]");
    }
    table_for("boundary", &|j| Ok(make_boundary_g(j)), js, 1.0 / q, q, gamma, (1.0 + gamma) / p, p, r, cfg)
}

/// `A_{m,λ}` on the unit square for the Cantor family.
pub fn staircase_curve(params: &InterpolationParams, m: u32, gamma: f64, lambdas: &[f64], oracle: &OracleConfig) -> Result<DistributionCurve> {
    let Some(eps) = params.eps else {
        return invalid("the Cantor family needs t > 1/q");
    };
    let cfg = OracleConfig { domain: OracleDomain::Span, ..oracle.clone() };
    let g = make_cantor_g(m, eps)?;
    oracle_distribution_1d(&g, &MeasureSpec::new(1, gamma)?, &QuotientSpec::new(params.b(gamma)), lambdas, &cfg)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaircaseStep {
    /// Level `m = j − ℓ + 1` on the left of the inequality.
    pub level: u32,
    pub lambda: f64,
    pub lhs: f64,
    /// `B^{−1} A_{m−1, λ B^{−1/p}}`.
    pub rhs: f64,
    pub error: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaircaseReport {
    pub j: u32,
    pub gamma: f64,
    pub base: f64,
    pub steps: Vec<StaircaseStep>,
    /// `(m, A_{m,1/2})` for `m = 0..=j`.
    pub anchors: Vec<(u32, f64)>,
    pub violations: usize,
}

/// Checks `A_{m,λ} ≥ B^{−1} A_{m−1,λB^{−1/p}}` for `m = 1..=j` on `lambdas`.
pub fn staircase_check(params: &InterpolationParams, j: u32, gamma: f64, lambdas: &[f64], oracle: &OracleConfig) -> Result<StaircaseReport> {
    let base = params.staircase_base(gamma).ok_or_else(|| crate::Error::InvalidArgument("the Cantor family needs t > 1/q".into()))?;
    if j == 0 {
        return invalid("j must be at least 1");
    }
    let shifted: Vec<f64> = lambdas.iter().map(|l| l * base.powf(-1.0 / params.p)).collect();
    let levels: Vec<u32> = (0..=j).collect();
    let direct = levels
        .par_iter()
        .map(|&m| staircase_curve(params, m, gamma, lambdas, oracle))
        .collect::<Result<Vec<_>>>()?;
    let moved = levels[..j as usize]
        .par_iter()
        .map(|&m| staircase_curve(params, m, gamma, &shifted, oracle))
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::new();
    for m in 1..=j as usize {
        for (i, &lam) in lambdas.iter().enumerate() {
            let lhs = direct[m].mu[i];
            let rhs = moved[m - 1].mu[i] / base;
            let error = direct[m].error(i) + moved[m - 1].error(i) / base;
            steps.push(StaircaseStep { level: m as u32, lambda: lam, lhs, rhs, error, holds: lhs + error >= rhs });
        }
    }
    let anchors = levels
        .par_iter()
        .map(|&m| Ok((m, staircase_curve(params, m, gamma, &[0.5], oracle)?.mu[0])))
        .collect::<Result<Vec<_>>>()?;
    let violations = steps.iter().filter(|s| !s.holds).count();
    Ok(StaircaseReport { j, gamma, base, steps, anchors, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_parameters() {
        let a = InterpolationParams::new(0.75, 2.0, 0.5).unwrap();
        assert!((a.p - 4.0 / 3.0).abs() < 1e-14);
        assert!((a.s - 0.875).abs() < 1e-14);
        assert!((a.gamma0 + 0.5).abs() < 1e-14);
        assert!((a.alpha - 0.5).abs() < 1e-14);
        let eps = a.eps.unwrap();
        assert!((eps - 0.25).abs() < 1e-15);
        assert!((2.0 * eps.powf(a.alpha) - 1.0).abs() < 1e-15);
        assert!((a.staircase_base(1.0).unwrap() - 8.0).abs() < 1e-12);
        assert!((a.b(1.0) - 1.625).abs() < 1e-14);
        assert!((a.critical_r() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn gamma0_sign_follows_t_against_one_over_q() {
        assert!(InterpolationParams::new(0.25, 2.0, 0.5).unwrap().gamma0 < -1.0);
        let mid = InterpolationParams::new(0.75, 2.0, 0.5).unwrap().gamma0;
        assert!(mid > -1.0 && mid < 0.0);
        assert!(InterpolationParams::new(0.25, 2.0, 0.5).unwrap().eps.is_none());
    }

    #[test]
    fn exponent_fit_recovers_offset_power() {
        let js: Vec<f64> = (2..=8).map(f64::from).collect();
        let ys: Vec<f64> = js.iter().map(|j| 5.0 + 2.0 * j.powf(0.7)).collect();
        let f = exponent_fit(&js, &ys).unwrap();
        assert!((f.kappa - 0.7).abs() < 1e-6, "{f:?}");
        assert!((f.offset - 5.0).abs() < 1e-5);
        let lin: Vec<f64> = js.iter().map(|j| 3.0 * j).collect();
        assert!((exponent_fit(&js, &lin).unwrap().loglog_slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn staircase_at_gamma0_has_unit_base() {
        let a = InterpolationParams::new(0.75, 2.0, 0.5).unwrap();
        assert_eq!(a.staircase_base(a.gamma0).unwrap(), 1.0);
    }
}
