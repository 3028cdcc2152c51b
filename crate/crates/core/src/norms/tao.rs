use super::{layer_cake_norm, lorentz_norm, weak_norm, LorentzSpec, NormValue};
use crate::error::{invalid, Error, Result};
use crate::funcspace::{lp_norm_pow, PiecewisePoly1D, Profile, TestFunction};
use crate::measures::{log_grid, DistributionCurve};
use crate::quad;
use serde::{Deserialize, Serialize};

/// `|{x : |f(x)| > s}|` for a 1D piecewise polynomial.
fn pieces_measure(pp: &PiecewisePoly1D, s: f64) -> f64 {
    if pp.left().abs() > s || pp.right().abs() > s {
        return f64::INFINITY;
    }
    let mut total = 0.0;
    for i in 0..pp.num_pieces() {
        let (lo, hi, q) = pp.piece(i);
        if q.max_abs_on(0.0, 1.0) <= s {
            continue;
        }
        let mut cuts = vec![0.0];
        cuts.extend(q.add_const(-s).roots_in(0.0, 1.0));
        cuts.extend(q.add_const(s).roots_in(0.0, 1.0));
        cuts.push(1.0);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in cuts.windows(2) {
            if w[1] > w[0] && q.eval(0.5 * (w[0] + w[1])).abs() > s {
                total += (w[1] - w[0]) * (hi - lo);
            }
        }
    }
    total
}

/// `|{x : |u(x)| > s}|` for `s > 0`.
pub fn marginal_measure(u: &TestFunction, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return invalid("level must be positive");
    }
    if let Some(pp) = u.pieces() {
        return Ok(pieces_measure(&pp, s));
    }
    let amp = u.amplitude().abs();
    let (_, scale) = u.argument_map();
    let sigma = s / amp;
    let jac = scale.abs().powi(u.dim() as i32);
    let base = match u.profile() {
        Profile::Bump { radius } => {
            if sigma >= 1.0 {
                0.0
            } else {
                // exp(1 − 1/(1 − t²)) > σ  ⟺  t² < 1 − 1/(1 − ln σ).
                let t = (1.0 - 1.0 / (1.0 - sigma.ln())).sqrt();
                if u.dim() == 1 {
                    2.0 * radius * t
                } else {
                    std::f64::consts::PI * (radius * t).powi(2)
                }
            }
        }
        Profile::Disc { radius } => {
            if sigma >= 1.0 {
                0.0
            } else {
                std::f64::consts::PI * radius * radius
            }
        }
        Profile::Product { first, second } => {
            // The slice measure vanishes where |first| ≤ σ·sup|second|, and has
            // square-root endpoints; integrate only over {|first| > σ / sup|second|}.
            let level = sigma / second.sup_abs();
            let mut total = 0.0;
            for i in 0..first.num_pieces() {
                let (lo, hi, q) = first.piece(i);
                if q.max_abs_on(0.0, 1.0) <= level {
                    continue;
                }
                let mut cuts = vec![0.0, 1.0];
                cuts.extend(q.add_const(-level).roots_in(0.0, 1.0));
                cuts.extend(q.add_const(level).roots_in(0.0, 1.0));
                cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for w in cuts.windows(2) {
                    if w[1] > w[0] && q.eval(0.5 * (w[0] + w[1])).abs() > level {
                        let slice = |z: f64| pieces_measure(second, sigma / q.eval(z).abs());
                        total += quadrature::double_exponential::integrate(slice, w[0], w[1], 1e-10).integral * (hi - lo);
                    }
                }
            }
            total
        }
        _ => return Err(Error::Unsupported(format!("no level sets for {}", u.id()))),
    };
    Ok(base / jac)
}

/// Exact survival curve `λ ↦ |{|u| > λ}|` on the given grid.
pub fn marginal_curve(u: &TestFunction, lambdas: &[f64]) -> Result<DistributionCurve> {
    let mu = lambdas.iter().map(|&l| marginal_measure(u, l)).collect::<Result<Vec<_>>>()?;
    Ok(DistributionCurve::exact(lambdas.to_vec(), mu, format!("level sets of {}", u.id())))
}

/// Survival curve of `F(x, y) = f(x)/y^{1/p}` on `ℝ^n × (0, ∞)`, by
/// integrating the measure of the slice `{x : |f(x)| > λ y^{1/p}}` over `y`.
pub fn lifted_curve(f: &TestFunction, p: f64, lambdas: &[f64]) -> Result<DistributionCurve> {
    let m = f.sup_bound();
    let mut mu = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        if m == 0.0 {
            mu.push(0.0);
            continue;
        }
        // Slices are empty once λ y^{1/p} ≥ M; substitute y = Y v^2 to
        // soften the endpoint behavior at y = 0.
        let y_max = (m / lam).powf(p);
        let mut err = None;
        let v = quad::gl_composite(16, 128, 0.0, 1.0, |v| {
            let y = y_max * v * v;
            if y == 0.0 {
                return 0.0;
            }
            match marginal_measure(f, lam * y.powf(1.0 / p)) {
                Ok(x) => 2.0 * y_max * v * x,
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        mu.push(v);
    }
    Ok(DistributionCurve::exact(lambdas.to_vec(), mu, format!("lift of {} at p = {p}", f.id())))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaoCheck {
    pub p: f64,
    /// `‖f‖_{L^p}` from closed forms or reference quadrature.
    pub strong: f64,
    /// Weak quasi-norm of the lifted function.
    pub weak: f64,
    /// `L^{p,p}` quasi-norm of the level-set curve of `f`.
    pub lorentz_marginal: NormValue,
    /// Layer-cake norm of the same curve.
    pub layer_cake_marginal: NormValue,
}

/// `(‖f‖_{L^p}, [f(x)/y^{1/p}]_{L^{p,∞}})` with the Lorentz and layer-cake
/// evaluations of `‖f‖_{L^p}` on the level-set curve of `f`.
pub fn tao_identity_check(f: &TestFunction, p: f64) -> Result<TaoCheck> {
    if !(p >= 1.0) {
        return invalid("p must be at least 1");
    }
    let strong = lp_norm_pow(f, p).powf(1.0 / p);
    if !strong.is_finite() {
        return invalid(format!("{} is not in L^{p}", f.id()));
    }
    let lifted = lifted_curve(f, p, &log_grid(1e-2, 1e2, 8))?;
    let weak = weak_norm(&lifted, p).value;
    let m = f.sup_bound();
    if m == 0.0 {
        let z = layer_cake_norm(&DistributionCurve::exact(vec![1.0, 2.0], vec![0.0, 0.0], "zero"), p)?;
        return Ok(TaoCheck { p, strong, weak, lorentz_marginal: z, layer_cake_marginal: z });
    }
    let grid = log_grid(1e-6 * m, m, 64);
    let marginal = marginal_curve(f, &grid)?;
    let lorentz_marginal = lorentz_norm(&marginal, &LorentzSpec::new(p, p)?)?;
    let layer_cake_marginal = layer_cake_norm(&marginal, p)?;
    Ok(TaoCheck { p, strong, weak, lorentz_marginal, layer_cake_marginal })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{make_hat, make_indicator_interval};

    #[test]
    fn indicator_lift_is_one_over_lambda() {
        let u = make_indicator_interval(0.0, 1.0).unwrap();
        let c = lifted_curve(&u, 1.0, &[0.5, 2.0, 7.0]).unwrap();
        for i in 0..3 {
            assert!((c.mu[i] * c.lambda[i] - 1.0).abs() < 1e-12);
        }
        let t = tao_identity_check(&u, 1.0).unwrap();
        assert!((t.strong - 1.0).abs() < 1e-14 && (t.weak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hat_level_sets() {
        let u = make_hat();
        assert!((marginal_measure(&u, 0.25).unwrap() - 1.5).abs() < 1e-14);
        assert_eq!(marginal_measure(&u, 1.0).unwrap(), 0.0);
        let t = tao_identity_check(&u, 2.0).unwrap();
        let want = (2.0f64 / 3.0).sqrt();
        assert!((t.strong - want).abs() < 1e-14);
        assert!((t.weak - want).abs() < 1e-10 * want, "{}", t.weak);
    }

    #[test]
    fn zero_function_gives_zeros() {
        let t = tao_identity_check(&make_hat().scaled(0.0), 1.0).unwrap();
        assert_eq!((t.strong, t.weak), (0.0, 0.0));
    }
}
