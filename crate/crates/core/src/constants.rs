//! Sphere constants `σ_{n−1}` and `k(p, n) = ∫_{S^{n−1}} |e·ω|^p dω`.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, 9 terms) with reflection.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Surface area `σ_{n−1} = 2π^{n/2}/Γ(n/2)` of the unit sphere in `ℝ^n`.
pub fn sphere_area(n: usize) -> f64 {
    assert!(n >= 1);
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// `k(p, n) = 2π^{(n−1)/2} Γ((p+1)/2) / Γ((n+p)/2)`.
pub fn k_constant(p: f64, n: usize) -> f64 {
    assert!(n >= 1 && p >= 0.0);
    2.0 * PI.powf((n as f64 - 1.0) / 2.0) * gamma((p + 1.0) / 2.0) / gamma((n as f64 + p) / 2.0)
}

fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, 1e-15).integral
}

/// `σ_{n−1}` by iterated polar-angle quadrature, independent of the Gamma function.
pub fn sphere_area_quadrature(n: usize) -> f64 {
    assert!(n >= 1);
    let mut sigma = 2.0;
    for m in 1..n {
        let e = (m - 1) as i32;
        sigma *= 2.0 * tanh_sinh(|phi: f64| phi.sin().powi(e), 0.0, PI / 2.0);
    }
    sigma
}

/// `k(p, n)` as `σ_{n−2} ∫_0^π |cos φ|^p sin^{n−2} φ dφ`, split at `π/2`.
pub fn k_constant_quadrature(p: f64, n: usize) -> f64 {
    if n == 1 {
        return 2.0;
    }
    let e = (n - 2) as i32;
    let half = tanh_sinh(|phi: f64| phi.cos().abs().powf(p) * phi.sin().powi(e), 0.0, PI / 2.0);
    sphere_area_quadrature(n - 1) * 2.0 * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(1.5) - 0.5 * PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-12);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn k_examples() {
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert!((k_constant(p, 1) - 2.0).abs() < 1e-12);
        }
        for n in 1..6 {
            assert!((k_constant(2.0, n) - sphere_area(n) / n as f64).abs() < 1e-12);
            assert!((k_constant(0.0, n) - sphere_area(n)).abs() < 1e-12);
        }
        assert!((k_constant(1.0, 2) - 4.0).abs() < 1e-12);
    }
}
