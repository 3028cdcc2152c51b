use super::piecewise::PiecewisePoly1D;
use crate::error::{invalid, Result};
use crate::poly::Poly;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    SmoothCompact,
    Lipschitz,
    PiecewiseLinear,
    Indicator,
    CantorApproximant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Profile {
    /// Continuous piecewise polynomial on the line.
    Piecewise { pieces: PiecewisePoly1D },
    /// `1_[a,b]`.
    Interval { a: f64, b: f64 },
    /// `exp(1 - 1/(1 - |x|²/r²))` inside the ball of radius `r`, in dimension 1 or 2.
    Bump { radius: f64 },
    /// Indicator of the disc of radius `r` in the plane.
    Disc { radius: f64 },
    /// `A(x1) B(x2)` in the plane.
    Product { first: PiecewisePoly1D, second: PiecewisePoly1D },
}

/// Evaluable corpus member: `x -> amplitude * profile(offset + scale * x)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestFunction {
    id: String,
    dim: usize,
    profile: Profile,
    smoothness: Smoothness,
    amplitude: f64,
    offset: f64,
    scale: f64,
}

/// Quintic smoothstep `6s⁵ − 15s⁴ + 10s³` on `[0, 1]`.
pub fn smoothstep() -> Poly {
    Poly::new(&[0.0, 0.0, 0.0, 10.0, -15.0, 6.0])
}

pub fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Derivative of `bump_profile`.
pub fn bump_profile_d(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        let d = 1.0 - t * t;
        -2.0 * t / (d * d) * bump_profile(t)
    }
}

impl TestFunction {
    pub fn new(id: impl Into<String>, dim: usize, profile: Profile, smoothness: Smoothness) -> Self {
        TestFunction { id: id.into(), dim, profile, smoothness, amplitude: 1.0, offset: 0.0, scale: 1.0 }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `(offset, scale)` of the argument map `x -> offset + scale * x`.
    pub fn argument_map(&self) -> (f64, f64) {
        (self.offset, self.scale)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// `c * u`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut v = self.clone();
        v.amplitude *= c;
        v.id = format!("{}*{}", self.id, c);
        v
    }

    /// `u(t x)`, `t > 0`.
    pub fn dilated(&self, t: f64) -> Self {
        self.transformed(0.0, t)
    }

    /// `x -> u(offset + scale * x)` applied to every coordinate, `scale > 0`.
    pub fn transformed(&self, offset: f64, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite());
        let mut v = self.clone();
        v.offset = self.offset + self.scale * offset;
        v.scale = self.scale * scale;
        v.id = format!("{}@{},{}", self.id, offset, scale);
        v
    }

    #[inline]
    fn arg(&self, x: f64) -> f64 {
        self.offset + self.scale * x
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let v = match &self.profile {
            Profile::Piecewise { pieces } => pieces.eval(self.arg(x[0])),
            Profile::Interval { a, b } => {
                let y = self.arg(x[0]);
                if y >= *a && y <= *b {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Bump { radius } => {
                let r2: f64 = x.iter().map(|&xi| self.arg(xi).powi(2)).sum();
                if r2 >= radius * radius {
                    0.0
                } else {
                    bump_profile(r2.sqrt() / radius)
                }
            }
            Profile::Disc { radius } => {
                let r2: f64 = x.iter().map(|&xi| self.arg(xi).powi(2)).sum();
                if r2 <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Product { first, second } => first.eval(self.arg(x[0])) * second.eval(self.arg(x[1])),
        };
        self.amplitude * v
    }

    /// Exact 1D piecewise representation (jumps allowed for indicators).
    pub fn pieces(&self) -> Option<PiecewisePoly1D> {
        let base = match &self.profile {
            Profile::Piecewise { pieces } => pieces.clone(),
            Profile::Interval { a, b } => {
                PiecewisePoly1D::with_jumps(vec![*a, *b], vec![Poly::constant(1.0)], 0.0, 0.0).ok()?
            }
            _ => return None,
        };
        Some(base.compose_affine(self.offset, self.scale).scale_values(self.amplitude))
    }

    /// Box `[lo, hi]` per coordinate outside which `u` is constant.
    pub fn support_box(&self) -> Vec<(f64, f64)> {
        let base: Vec<(f64, f64)> = match &self.profile {
            Profile::Piecewise { pieces } => vec![pieces.span()],
            Profile::Interval { a, b } => vec![(*a, *b)],
            Profile::Bump { radius } => vec![(-radius, *radius); self.dim],
            Profile::Disc { radius } => vec![(-radius, *radius); 2],
            Profile::Product { first, second } => vec![first.span(), second.span()],
        };
        base.into_iter()
            .map(|(lo, hi)| ((lo - self.offset) / self.scale, (hi - self.offset) / self.scale))
            .collect()
    }

    /// `R` with `u` constant outside the ball of radius `R`.
    pub fn support_radius(&self) -> f64 {
        self.support_box()
            .iter()
            .map(|&(lo, hi)| lo.abs().max(hi.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// True when the tail constants differ from zero (monotone profiles such as `g_j`).
    pub fn constant_at_infinity(&self) -> bool {
        match &self.profile {
            Profile::Piecewise { pieces } => pieces.left() != 0.0 || pieces.right() != 0.0,
            _ => false,
        }
    }

    pub fn sup_bound(&self) -> f64 {
        let m = match &self.profile {
            Profile::Piecewise { pieces } => pieces.sup_abs(),
            Profile::Product { first, second } => first.sup_abs() * second.sup_abs(),
            _ => 1.0,
        };
        self.amplitude.abs() * m
    }

    /// `(min, max)` of `u`.
    pub fn range(&self) -> (f64, f64) {
        let (lo, hi) = match &self.profile {
            Profile::Piecewise { pieces } => pieces.range(),
            Profile::Product { first, second } => {
                let (a0, a1) = first.range();
                let (b0, b1) = second.range();
                let c = [a0 * b0, a0 * b1, a1 * b0, a1 * b1];
                (c.iter().copied().fold(f64::INFINITY, f64::min), c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            }
            _ => (0.0, 1.0),
        };
        if self.amplitude >= 0.0 {
            (self.amplitude * lo, self.amplitude * hi)
        } else {
            (self.amplitude * hi, self.amplitude * lo)
        }
    }

    /// Lipschitz constant when finite.
    pub fn lipschitz(&self) -> Option<f64> {
        let base = match &self.profile {
            Profile::Piecewise { pieces } => pieces.lipschitz(),
            Profile::Interval { .. } | Profile::Disc { .. } => return None,
            Profile::Bump { radius } => {
                let m = (0..=20000).map(|k| bump_profile_d(k as f64 / 20000.0).abs()).fold(0.0, f64::max);
                1.001 * m / radius
            }
            Profile::Product { first, second } => {
                let (la, lb) = (first.lipschitz(), second.lipschitz());
                (la * second.sup_abs()).hypot(lb * first.sup_abs())
            }
        };
        Some(self.amplitude.abs() * self.scale * base)
    }

    pub fn is_constant(&self) -> bool {
        if self.amplitude == 0.0 {
            return true;
        }
        match &self.profile {
            Profile::Piecewise { pieces } => pieces.is_constant(),
            Profile::Product { first, second } => {
                let zero = |f: &PiecewisePoly1D| f.is_constant() && f.left() == 0.0;
                zero(first) || zero(second) || (first.is_constant() && second.is_constant())
            }
            _ => false,
        }
    }

    fn jacobian(&self) -> f64 {
        self.scale.powi(self.dim as i32)
    }

    /// `‖u‖_{L^p}` when known in closed form.
    pub fn exact_lp_norm(&self, p: f64) -> Option<f64> {
        let base = match &self.profile {
            Profile::Piecewise { pieces } => pieces.lp_norm_pow(p),
            Profile::Interval { a, b } => b - a,
            Profile::Disc { radius } => std::f64::consts::PI * radius * radius,
            _ => return None,
        };
        if !base.is_finite() {
            return None;
        }
        Some(self.amplitude.abs() * (base / self.jacobian()).powf(1.0 / p))
    }

    /// `‖∇u‖_{L^p}` when known in closed form (absent for indicators).
    pub fn exact_grad_lp_norm(&self, p: f64) -> Option<f64> {
        let base = match &self.profile {
            Profile::Piecewise { pieces } => pieces.grad_lp_norm_pow(p),
            _ => return None,
        };
        Some(self.amplitude.abs() * self.scale * (base / self.jacobian()).powf(1.0 / p))
    }

    /// Total variation `‖∇u‖_M` when known in closed form.
    pub fn exact_tv(&self) -> Option<f64> {
        let base = match &self.profile {
            Profile::Piecewise { pieces } => pieces.total_variation(),
            Profile::Interval { .. } => 2.0,
            // unimodal with peak 1
            Profile::Bump { .. } if self.dim == 1 => 2.0,
            Profile::Disc { radius } => 2.0 * std::f64::consts::PI * radius,
            _ => return None,
        };
        Some(self.amplitude.abs() * self.scale * base / self.jacobian())
    }
}

pub fn make_hat() -> TestFunction {
    let pieces = PiecewisePoly1D::new(vec![-1.0, 0.0, 1.0], vec![Poly::new(&[0.0, 1.0]), Poly::new(&[1.0, -1.0])])
        .expect("hat is continuous");
    TestFunction::new("hat", 1, Profile::Piecewise { pieces }, Smoothness::PiecewiseLinear)
}

pub fn make_indicator_interval(a: f64, b: f64) -> Result<TestFunction> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return invalid(format!("indicator needs a < b, got [{a}, {b}]"));
    }
    Ok(TestFunction::new(format!("indicator:{a},{b}"), 1, Profile::Interval { a, b }, Smoothness::Indicator))
}

pub fn make_disc_indicator(radius: f64) -> Result<TestFunction> {
    if !(radius > 0.0) {
        return invalid("disc radius must be positive");
    }
    Ok(TestFunction::new(format!("disc:{radius}"), 2, Profile::Disc { radius }, Smoothness::Indicator))
}

/// `exp(1 − 1/(1 − x²))` on `(−1, 1)`.
pub fn make_smooth_bump() -> TestFunction {
    TestFunction::new("bump", 1, Profile::Bump { radius: 1.0 }, Smoothness::SmoothCompact)
}

/// Radial version of `make_smooth_bump` in the plane.
pub fn make_smooth_bump_2d() -> TestFunction {
    TestFunction::new("bump2d", 2, Profile::Bump { radius: 1.0 }, Smoothness::SmoothCompact)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 0.5) {
        return invalid(format!("eps must lie in (0, 1/2), got {eps}"));
    }
    Ok(())
}

/// Pieces of `g_j` on `[0, 1]`.
pub fn cantor_pieces(j: u32, eps: f64) -> Result<PiecewisePoly1D> {
    check_eps(eps)?;
    let mut breaks = vec![0.0, 1.0];
    let mut polys = vec![smoothstep()];
    for _ in 0..j {
        let mut nb = Vec::with_capacity(2 * breaks.len() + 1);
        let mut np = Vec::with_capacity(2 * polys.len() + 1);
        nb.extend(breaks.iter().map(|t| eps * t));
        np.extend(polys.iter().map(|p| p.scale(0.5)));
        np.push(Poly::constant(0.5));
        nb.extend(breaks.iter().map(|t| 1.0 - eps + eps * t));
        np.extend(polys.iter().map(|p| p.scale(0.5).add_const(0.5)));
        breaks = nb;
        polys = np;
    }
    PiecewisePoly1D::new(breaks, polys)
}

/// Cantor-type approximant `g_j`: nondecreasing, 0 left of 0, 1 right of 1.
pub fn make_cantor_g(j: u32, eps: f64) -> Result<TestFunction> {
    let pieces = cantor_pieces(j, eps)?;
    Ok(TestFunction::new(
        format!("cantor:j={j},eps={eps}"),
        1,
        Profile::Piecewise { pieces },
        Smoothness::CantorApproximant,
    ))
}

/// Compactly supported variant `g_j(x) g_j(2 − x)` on `[0, 2]`.
pub fn make_cantor_bump(j: u32, eps: f64) -> Result<TestFunction> {
    let g = cantor_pieces(j, eps)?;
    let mirrored = g.compose_affine(2.0, -1.0);
    let pieces = g.mul(&mirrored).simplify();
    Ok(TestFunction::new(
        format!("cantor-bump:j={j},eps={eps}"),
        1,
        Profile::Piecewise { pieces },
        Smoothness::CantorApproximant,
    ))
}

/// `g_0(2^j x) g_0(2^j (2 − x))`, supported in `[0, 2]`.
pub fn make_boundary_g(j: u32) -> TestFunction {
    let w = 0.5f64.powi(j as i32);
    let rise = smoothstep();
    let fall = smoothstep().compose_affine(1.0, -1.0);
    let (breaks, polys) = if j == 0 {
        (vec![0.0, 1.0, 2.0], vec![rise, fall])
    } else {
        (vec![0.0, w, 2.0 - w, 2.0], vec![rise, Poly::constant(1.0), fall])
    };
    let pieces = PiecewisePoly1D::new(breaks, polys).expect("boundary profile is continuous");
    TestFunction::new(format!("boundary:j={j}"), 1, Profile::Piecewise { pieces }, Smoothness::CantorApproximant)
}

/// Plateau cutoff: 0 left of −1, 1 on `[−1/2, 3/2]`, 0 right of 2.
pub fn cutoff() -> PiecewisePoly1D {
    PiecewisePoly1D::new(
        vec![-1.0, -0.5, 1.5, 2.0],
        vec![smoothstep(), Poly::constant(1.0), smoothstep().compose_affine(1.0, -1.0)],
    )
    .expect("cutoff is continuous")
}

/// `u(x) = g(x1) η(x1) η(x2)` in the plane.
pub fn lift_to_dim(g: &TestFunction, n: usize) -> Result<TestFunction> {
    if n < 2 {
        return invalid("lift needs n >= 2");
    }
    if n > 2 {
        return invalid("only the plane is supported");
    }
    let gp = match (g.dim(), g.pieces()) {
        (1, Some(p)) if p.is_continuous() => p,
        _ => return invalid("lift needs a continuous piecewise-polynomial profile in 1D"),
    };
    let eta = cutoff();
    let first = gp.mul(&eta).simplify();
    Ok(TestFunction::new(
        format!("lift:{}", g.id()),
        n,
        Profile::Product { first, second: eta },
        g.smoothness(),
    ))
}
