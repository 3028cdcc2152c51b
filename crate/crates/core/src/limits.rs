//! Limits of `λ^p ν_γ(E_{λ,b}[u])` as `λ → ∞` or `λ → 0⁺`, and the
//! `s → 1⁻` and `s → 0⁺` limits of fractional seminorms.

use crate::constants::{k_constant, sphere_area};
use crate::error::{invalid, Error, Result};
use crate::funcspace::{grad_lp_norm_pow, lp_norm_pow, make_cantor_g, total_variation, Smoothness, TestFunction};
use crate::measures::{
    estimate_distribution, log_grid, oracle_distribution_1d, DistributionCurve, MeasureSpec, OracleConfig, QuotientSpec,
    SamplingPlan,
};
use crate::norms::{fractional_seminorm, weak_norm, Verdict, WeakNorm};
use serde::{Deserialize, Serialize};

/// Slope gate for reporting a plateau as converged.
pub const SLOPE_GATE: f64 = 0.05;
/// Number of grid points averaged at the end of the window.
pub const PLATEAU_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    LambdaToInfinity,
    LambdaToZero,
    SToOne,
    SToZero,
}

impl Direction {
    pub fn label(&self) -> &'static str {
        match self {
            Direction::LambdaToInfinity => "lambda->inf",
            Direction::LambdaToZero => "lambda->0+",
            Direction::SToOne => "s->1-",
            Direction::SToZero => "s->0+",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub direction: Direction,
    pub value: f64,
    pub error: f64,
    /// Range of λ (or s) used for the estimate.
    pub window: (f64, f64),
    /// Log-log slope of `λ^p μ(λ)` over the window; for s-limits the relative
    /// change between the last two extrapolants.
    pub slope_diagnostic: f64,
    pub converged: bool,
    /// `(λ, λ^p μ(λ))` or `(s, weighted seminorm)` pairs behind the estimate.
    pub samples: Vec<(f64, f64)>,
}

impl LimitEstimate {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged(format!(
                "{} diagnostic {:.3} over window [{:e}, {:e}]",
                self.direction.label(),
                self.slope_diagnostic,
                self.window.0,
                self.window.1
            )))
        }
    }
}

/// How survival curves are produced.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Engine {
    Oracle { config: OracleConfig },
    MonteCarlo { seed: u64, samples_per_shell: usize },
}

impl Engine {
    /// The quadrature oracle in 1D, Monte Carlo otherwise.
    pub fn auto(u: &TestFunction, seed: u64) -> Self {
        if u.dim() == 1 && u.pieces().is_some() {
            Engine::Oracle { config: OracleConfig::default() }
        } else {
            Engine::MonteCarlo { seed, samples_per_shell: 40_000 }
        }
    }

    pub fn curve(&self, u: &TestFunction, m: &MeasureSpec, q: &QuotientSpec, lambdas: &[f64]) -> Result<DistributionCurve> {
        match self {
            Engine::Oracle { config } => oracle_distribution_1d(u, m, q, lambdas, config),
            Engine::MonteCarlo { seed, samples_per_shell } => {
                let mut plan = SamplingPlan::covering(u, m, q, lambdas, *seed);
                plan.samples_per_shell = *samples_per_shell;
                estimate_distribution(u, m, q, &plan, lambdas)
            }
        }
    }
}

/// Default λ window for a limit in the given direction.
pub fn default_window(direction: Direction) -> Vec<f64> {
    match direction {
        Direction::LambdaToZero => log_grid(1e-12, 1e-3, 8),
        _ => log_grid(1e2, 1e8, 8),
    }
}

fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0.ln()).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0.ln() - mx) * (p.1.ln() - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
    sxy / sxx
}

/// Plateau of `λ^p μ(λ)` over the last `PLATEAU_POINTS` nodes in `direction`.
pub fn plateau(curve: &DistributionCurve, p: f64, direction: Direction) -> Result<LimitEstimate> {
    let n = curve.len();
    if n < PLATEAU_POINTS {
        return invalid(format!("need at least {PLATEAU_POINTS} nodes"));
    }
    let idx: Vec<usize> = match direction {
        Direction::LambdaToInfinity => (n - PLATEAU_POINTS..n).collect(),
        Direction::LambdaToZero => (0..PLATEAU_POINTS).collect(),
        _ => return invalid("plateaus are taken in λ"),
    };
    let vals: Vec<(f64, f64, f64)> = idx
        .iter()
        .map(|&i| {
            let s = curve.lambda[i].powf(p);
            (curve.lambda[i], s * curve.mu[i], s * curve.error(i))
        })
        .collect();
    let window = (vals[0].0, vals[vals.len() - 1].0);
    let samples: Vec<(f64, f64)> = vals.iter().map(|v| (v.0, v.1)).collect();
    if vals.iter().all(|v| v.1 == 0.0) {
        return Ok(LimitEstimate { direction, value: 0.0, error: 0.0, window, slope_diagnostic: 0.0, converged: true, samples });
    }
    if vals.iter().any(|v| v.1 <= 0.0) {
        return Ok(LimitEstimate {
            direction,
            value: f64::NAN,
            error: f64::INFINITY,
            window,
            slope_diagnostic: f64::NAN,
            converged: false,
            samples,
        });
    }
    let exact = vals.iter().any(|v| v.2 == 0.0);
    let weights: Vec<f64> = vals.iter().map(|v| if exact { 1.0 } else { 1.0 / (v.2 * v.2) }).collect();
    let wsum: f64 = weights.iter().sum();
    let value = vals.iter().zip(&weights).map(|(v, w)| v.1 * w).sum::<f64>() / wsum;
    let stat = if exact { 0.0 } else { 1.0 / wsum.sqrt() };
    let spread = vals.iter().map(|v| (v.1 - value).abs()).fold(0.0, f64::max);
    let slope = loglog_slope(&samples);
    Ok(LimitEstimate {
        direction,
        value,
        error: stat + spread,
        window,
        slope_diagnostic: slope,
        converged: slope.abs() < SLOPE_GATE,
        samples,
    })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma == 0.0 || !gamma.is_finite() {
        return invalid("gamma must be finite and nonzero");
    }
    Ok(())
}

/// Value of a limit together with the formula it is compared with.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitCheck {
    pub function: String,
    /// Which limiting formula the prediction comes from.
    pub formula: String,
    pub gamma: f64,
    pub p: f64,
    pub estimate: LimitEstimate,
    pub predicted: f64,
    /// Constants entering the prediction, e.g. `k(1,1)=2; |grad u|_1^1=2`.
    pub constants: String,
}

impl LimitCheck {
    pub fn ratio(&self) -> f64 {
        self.estimate.value / self.predicted
    }

    pub fn within(&self, rel: f64) -> bool {
        self.estimate.converged && (self.ratio() - 1.0).abs() <= rel
    }
}

/// `λ^p ν_γ(E_{λ,1+γ/p}[u])` as `λ → ∞` for `γ > 0` and `λ → 0⁺` for `γ < 0`,
/// against `k(p,n) ‖∇u‖_p^p / |γ|`.
pub fn sobolev_limit(u: &TestFunction, gamma: f64, p: f64, engine: &Engine, lambdas: Option<&[f64]>) -> Result<LimitCheck> {
    check_gamma(gamma)?;
    let direction = if gamma > 0.0 { Direction::LambdaToInfinity } else { Direction::LambdaToZero };
    let grid = lambdas.map(|l| l.to_vec()).unwrap_or_else(|| default_window(direction));
    let m = MeasureSpec::new(u.dim(), gamma)?;
    let q = QuotientSpec::sobolev(gamma, p);
    let curve = engine.curve(u, &m, &q, &grid)?;
    let estimate = plateau(&curve, p, direction)?;
    let k = k_constant(p, u.dim());
    let g = grad_lp_norm_pow(u, p);
    Ok(LimitCheck {
        function: u.id().to_string(),
        formula: "k(p,n)/|gamma| * |grad u|_p^p".into(),
        gamma,
        p,
        estimate,
        predicted: k * g / gamma.abs(),
        constants: format!("k({p},{})={k}; |grad u|_{p}^{p}={g}", u.dim()),
    })
}

/// Indicator limit with `p = 1`, compared with `k(1,n) TV / |γ+1|`.
pub fn indicator_anomaly(u: &TestFunction, gamma: f64, engine: &Engine, lambdas: Option<&[f64]>) -> Result<LimitCheck> {
    check_gamma(gamma)?;
    if u.smoothness() != Smoothness::Indicator {
        return invalid("indicator_anomaly needs an indicator");
    }
    if (-1.0..=0.0).contains(&gamma) {
        return invalid("gamma must lie outside [-1, 0]");
    }
    let direction = if gamma > 0.0 { Direction::LambdaToInfinity } else { Direction::LambdaToZero };
    let grid = lambdas.map(|l| l.to_vec()).unwrap_or_else(|| default_window(direction));
    let m = MeasureSpec::new(u.dim(), gamma)?;
    let q = QuotientSpec::sobolev(gamma, 1.0);
    let curve = engine.curve(u, &m, &q, &grid)?;
    let estimate = plateau(&curve, 1.0, direction)?;
    let k = k_constant(1.0, u.dim());
    let tv = total_variation(u);
    Ok(LimitCheck {
        function: u.id().to_string(),
        formula: "k(1,n)/|gamma+1| * TV".into(),
        gamma,
        p: 1.0,
        estimate,
        predicted: k * tv / (gamma + 1.0).abs(),
        constants: format!("k(1,{})={k}; TV={tv}", u.dim()),
    })
}

/// `λ^p ν_γ(E_{λ,γ/p}[u])` as `λ → 0⁺` for `γ > 0` and `λ → ∞` for `γ < 0`,
/// against `2σ_{n−1} ‖u‖_p^p / |γ|`.
pub fn lp_limit(u: &TestFunction, gamma: f64, p: f64, engine: &Engine, lambdas: Option<&[f64]>) -> Result<LimitCheck> {
    check_gamma(gamma)?;
    let direction = if gamma > 0.0 { Direction::LambdaToZero } else { Direction::LambdaToInfinity };
    let grid = lambdas.map(|l| l.to_vec()).unwrap_or_else(|| default_window(direction));
    let m = MeasureSpec::new(u.dim(), gamma)?;
    let q = QuotientSpec::lebesgue(gamma, p);
    let curve = engine.curve(u, &m, &q, &grid)?;
    let estimate = plateau(&curve, p, direction)?;
    let sigma = sphere_area(u.dim());
    let lp = lp_norm_pow(u, p);
    Ok(LimitCheck {
        function: u.id().to_string(),
        formula: "2 sigma_{n-1}/|gamma| * |u|_p^p".into(),
        gamma,
        p,
        estimate,
        predicted: 2.0 * sigma * lp / gamma.abs(),
        constants: format!("sigma_{}={sigma}; |u|_{p}^{p}={lp}", u.dim() - 1),
    })
}

/// Polynomial extrapolation to `x = 0` through `(x_i, y_i)` (Neville).
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut t = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            t[i] = (xs[i + k] * t[i] - xs[i] * t[i + 1]) / (xs[i + k] - xs[i]);
        }
    }
    t[0]
}

pub const BBM_S: [f64; 4] = [0.9, 0.95, 0.975, 0.99];
pub const MSH_S: [f64; 4] = [0.1, 0.05, 0.025, 0.01];

/// Relative disagreement allowed between successive extrapolants.
pub const EXTRAPOLATION_TOLERANCE: f64 = 0.01;

fn s_limit(u: &TestFunction, p: f64, to_one: bool) -> Result<LimitEstimate> {
    let ss = if to_one { BBM_S } else { MSH_S };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut err: f64 = 0.0;
    for &s in &ss {
        let v = fractional_seminorm(u, s, p)?;
        if v.verdict != Verdict::Finite {
            return Err(Error::NotConverged(format!("seminorm diverges at s = {s}")));
        }
        let x = if to_one { 1.0 - s } else { s };
        xs.push(x);
        ys.push(x * v.pow);
        err = err.max(x * v.error);
    }
    let lin = neville_at_zero(&xs[2..], &ys[2..]);
    let quad = neville_at_zero(&xs[1..], &ys[1..]);
    let value = neville_at_zero(&xs, &ys);
    let change = if value != 0.0 { (value - quad).abs().max((quad - lin).abs()) / value.abs() } else { 0.0 };
    Ok(LimitEstimate {
        direction: if to_one { Direction::SToOne } else { Direction::SToZero },
        value,
        error: (value - quad).abs() + 8.0 * err,
        window: (ss[0].min(ss[3]), ss[0].max(ss[3])),
        slope_diagnostic: change,
        converged: change <= EXTRAPOLATION_TOLERANCE,
        samples: ss.iter().copied().zip(ys).collect(),
    })
}

/// `(1−s) ‖u‖_{Ẇ^{s,p}}^p` as `s → 1⁻`, against `k(p,n) ‖∇u‖_p^p / p`.
pub fn bbm_limit(u: &TestFunction, p: f64) -> Result<LimitCheck> {
    let estimate = s_limit(u, p, true)?;
    let k = k_constant(p, u.dim());
    let g = grad_lp_norm_pow(u, p);
    Ok(LimitCheck {
        function: u.id().to_string(),
        formula: "k(p,n)/p * |grad u|_p^p".into(),
        gamma: f64::NAN,
        p,
        estimate,
        predicted: k * g / p,
        constants: format!("k({p},{})={k}; |grad u|_{p}^{p}={g}", u.dim()),
    })
}

/// `s ‖u‖_{Ẇ^{s,p}}^p` as `s → 0⁺`, against `2σ_{n−1} ‖u‖_p^p / p`.
pub fn msh_limit(u: &TestFunction, p: f64) -> Result<LimitCheck> {
    let estimate = s_limit(u, p, false)?;
    let sigma = sphere_area(u.dim());
    let lp = lp_norm_pow(u, p);
    Ok(LimitCheck {
        function: u.id().to_string(),
        formula: "2 sigma_{n-1}/p * |u|_p^p".into(),
        gamma: f64::NAN,
        p,
        estimate,
        predicted: 2.0 * sigma * lp / p,
        constants: format!("sigma_{}={sigma}; |u|_{p}^{p}={lp}", u.dim() - 1),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub j: u32,
    pub weak: WeakNorm,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiminfProbe {
    /// λ → 0⁺ plateau against `k(1,n) ‖∇u‖_1 / |γ|` for the given `u`.
    pub plateau: LimitCheck,
    /// Weak quasi-norms `sup_λ λ ν_γ(E_{λ,1+γ})` along `g_j`.
    pub growth: Vec<GrowthPoint>,
}

/// For `γ ∈ [−1, 0)`: the `λ → 0⁺` plateau of `u` and the weak quasi-norms
/// along the Cantor family `g_j` with the given `eps`.
pub fn liminf_lowerbound_probe(
    u: &TestFunction,
    gamma: f64,
    js: &[u32],
    eps: f64,
    engine: &Engine,
) -> Result<LiminfProbe> {
    if !(-1.0..0.0).contains(&gamma) {
        return invalid("gamma must lie in [-1, 0)");
    }
    let plateau = sobolev_limit(u, gamma, 1.0, engine, None)?;
    let m = MeasureSpec::new(1, gamma)?;
    let q = QuotientSpec::sobolev(gamma, 1.0);
    let grid = log_grid(1e-4, 1e8, 8);
    let mut growth = Vec::new();
    for &j in js {
        let g = make_cantor_g(j, eps)?;
        let curve = Engine::Oracle { config: OracleConfig::default() }.curve(&g, &m, &q, &grid)?;
        growth.push(GrowthPoint { j, weak: weak_norm(&curve, 1.0) });
    }
    Ok(LiminfProbe { plateau, growth })
}

/// Long-format rows `(function, formula, γ, p, direction, plateau, predicted, ratio, verdict)`.
pub fn write_limit_table<W: std::io::Write>(rows: &[LimitCheck], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "function",
        "formula",
        "gamma",
        "p",
        "direction",
        "plateau",
        "error",
        "slope",
        "predicted",
        "ratio",
        "verdict",
        "constants",
    ])?;
    for r in rows {
        wr.write_record(&[
            r.function.clone(),
            r.formula.clone(),
            format!("{}", r.gamma),
            format!("{}", r.p),
            r.estimate.direction.label().to_string(),
            format!("{:.10e}", r.estimate.value),
            format!("{:.3e}", r.estimate.error),
            format!("{:.4}", r.estimate.slope_diagnostic),
            format!("{:.10e}", r.predicted),
            format!("{:.6}", r.ratio()),
            if r.estimate.converged { "converged" } else { "not-converged" }.to_string(),
            r.constants.clone(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neville_recovers_polynomials() {
        let xs = [0.1, 0.05, 0.025, 0.01];
        let ys: Vec<f64> = xs.iter().map(|x| 4.0 - 3.0 * x + 2.0 * x * x - x * x * x).collect();
        assert!((neville_at_zero(&xs, &ys) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn flat_curve_plateau_is_exact() {
        let lam = log_grid(1.0, 1e3, 8);
        let mu = lam.iter().map(|l| 4.0 / l).collect();
        let c = DistributionCurve::exact(lam, mu, "4/λ");
        for d in [Direction::LambdaToInfinity, Direction::LambdaToZero] {
            let e = plateau(&c, 1.0, d).unwrap();
            assert!(e.converged && (e.value - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sloped_curve_is_not_converged() {
        let lam = log_grid(1.0, 1e3, 8);
        let mu = lam.iter().map(|l| l.powf(-0.8)).collect();
        let c = DistributionCurve::exact(lam, mu, "λ^-0.8");
        let e = plateau(&c, 1.0, Direction::LambdaToInfinity).unwrap();
        assert!(!e.converged);
        assert!(e.require_converged().is_err());
    }
}
