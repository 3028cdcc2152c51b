//! Corpus of test functions with exact or quadrature reference quantities.

mod corpus;
pub(crate) mod piecewise;

pub use corpus::{
    bump_profile, bump_profile_d, cantor_pieces, cutoff, lift_to_dim, make_boundary_g, make_cantor_bump,
    make_cantor_g, make_disc_indicator, make_hat, make_indicator_interval, make_smooth_bump, make_smooth_bump_2d,
    smoothstep, Profile, Smoothness, TestFunction,
};
pub use piecewise::{PieceShape, PiecewisePoly1D};

use crate::error::{Error, Result};
use crate::quad;

/// Resolve a corpus identifier such as `hat`, `indicator:0,1`,
/// `cantor:j=6,eps=0.25`, `boundary:j=3`, `disc:1`, `bump2d` or `lift:<id>`.
pub fn from_id(id: &str) -> Result<TestFunction> {
    let (head, args) = match id.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (id, None),
    };
    let unknown = || Error::UnknownFunction(id.to_string());
    let nums = |a: &str| -> Result<Vec<f64>> {
        a.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| unknown())).collect()
    };
    let kv = |a: &str, key: &str| -> Result<Option<f64>> {
        for part in a.split(',') {
            if let Some((k, v)) = part.split_once('=') {
                if k.trim() == key {
                    return v.trim().parse::<f64>().map(Some).map_err(|_| unknown());
                }
            }
        }
        Ok(None)
    };
    let level = |a: Option<&str>| -> Result<u32> {
        let j = a.map(|a| kv(a, "j")).transpose()?.flatten().ok_or_else(unknown)?;
        if j < 0.0 || j.fract() != 0.0 || j > 16.0 {
            return Err(unknown());
        }
        Ok(j as u32)
    };
    let u = match head {
        "hat" if args.is_none() => make_hat(),
        "bump" if args.is_none() => make_smooth_bump(),
        "bump2d" if args.is_none() => make_smooth_bump_2d(),
        "indicator" => {
            let v = args.map(nums).transpose()?.unwrap_or_else(|| vec![0.0, 1.0]);
            if v.len() != 2 {
                return Err(unknown());
            }
            make_indicator_interval(v[0], v[1])?
        }
        "disc" => {
            let v = args.map(nums).transpose()?.unwrap_or_else(|| vec![1.0]);
            if v.len() != 1 {
                return Err(unknown());
            }
            make_disc_indicator(v[0])?
        }
        "cantor" | "cantor-bump" => {
            let j = level(args)?;
            let eps = args.map(|a| kv(a, "eps")).transpose()?.flatten().unwrap_or(0.25);
            if head == "cantor" {
                make_cantor_g(j, eps)?
            } else {
                make_cantor_bump(j, eps)?
            }
        }
        "boundary" => make_boundary_g(level(args)?),
        "lift" => lift_to_dim(&from_id(args.ok_or_else(unknown)?)?, 2)?,
        _ => return Err(unknown()),
    };
    Ok(u.with_id(id))
}

/// `‖u‖_{L^p}^p`, exact when available, quadrature otherwise.
pub fn lp_norm_pow(u: &TestFunction, p: f64) -> f64 {
    if let Some(v) = u.exact_lp_norm(p) {
        return v.powf(p);
    }
    if u.constant_at_infinity() {
        return f64::INFINITY;
    }
    let base = match u.profile() {
        Profile::Bump { radius } => {
            if u.dim() == 1 {
                radius * tanh_sinh(|t| bump_profile(t).powf(p), -1.0, 1.0)
            } else {
                2.0 * std::f64::consts::PI
                    * radius
                    * radius
                    * tanh_sinh(|t| bump_profile(t).powf(p) * t, 0.0, 1.0)
            }
        }
        Profile::Product { first, second } => first.lp_norm_pow(p) * second.lp_norm_pow(p),
        _ => unreachable!("closed forms cover the remaining profiles"),
    };
    let (_, scale) = u.argument_map();
    u.amplitude().abs().powf(p) * base / scale.powi(u.dim() as i32)
}

/// `‖∇u‖_{L^p}^p`; infinite for indicators.
pub fn grad_lp_norm_pow(u: &TestFunction, p: f64) -> f64 {
    if let Some(v) = u.exact_grad_lp_norm(p) {
        return v.powf(p);
    }
    let base = match u.profile() {
        Profile::Bump { radius } => {
            if u.dim() == 1 {
                radius.powf(1.0 - p) * 2.0 * tanh_sinh(|t| bump_profile_d(t).abs().powf(p), 0.0, 1.0)
            } else {
                2.0 * std::f64::consts::PI
                    * radius.powf(2.0 - p)
                    * tanh_sinh(|t| bump_profile_d(t).abs().powf(p) * t, 0.0, 1.0)
            }
        }
        Profile::Product { first, second } => product_grad_pow(first, second, p),
        _ => return f64::INFINITY,
    };
    let (_, scale) = u.argument_map();
    u.amplitude().abs().powf(p) * scale.powf(p) * base / scale.powi(u.dim() as i32)
}

/// `‖∇u‖_M`.
pub fn total_variation(u: &TestFunction) -> f64 {
    u.exact_tv().unwrap_or_else(|| grad_lp_norm_pow(u, 1.0))
}

fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, 1e-14).integral
}

/// `∫∫ |∇(A(x) B(y))|^p` by tensor Gauss-Legendre over piece rectangles.
fn product_grad_pow(a: &PiecewisePoly1D, b: &PiecewisePoly1D, p: f64) -> f64 {
    let nodes = |f: &PiecewisePoly1D| -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for i in 0..f.num_pieces() {
            let (lo, hi, q) = f.piece(i);
            let w = hi - lo;
            let dq = q.derivative();
            for &(x, wt) in quad::gauss_legendre(16) {
                let s = 0.5 * (x + 1.0);
                out.push((q.eval(s), dq.eval(s) / w, 0.5 * wt * w));
            }
        }
        out
    };
    let na = nodes(a);
    let nb = nodes(b);
    let mut total = 0.0;
    for &(va, da, wa) in &na {
        let mut row = 0.0;
        for &(vb, db, wb) in &nb {
            row += wb * (da * vb).hypot(va * db).powf(p);
        }
        total += wa * row;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ["hat", "indicator:0,1", "cantor:j=3,eps=0.25", "boundary:j=2", "disc:1", "bump", "bump2d", "lift:cantor:j=2,eps=0.25", "cantor-bump:j=2,eps=0.25"] {
            let u = from_id(id).unwrap();
            assert_eq!(u.id(), id);
        }
        assert!(from_id("nope").is_err());
        assert!(from_id("cantor:j=2,eps=0.7").is_err());
    }

    #[test]
    fn product_gradient_of_separable_linear() {
        // A = B = hat: ∫∫ |∇(A B)| computed by the tensor rule vs a fine midpoint sum.
        let h = make_hat().pieces().unwrap();
        let v = product_grad_pow(&h, &h, 2.0);
        // ∫∫ (A'B)² + (AB')² = 2 ‖A'‖² ‖B‖² = 2 · 2 · 2/3
        assert!((v - 8.0 / 3.0).abs() < 1e-12);
    }
}
