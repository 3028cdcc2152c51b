//! Oracle curves against values computed independently from the hand-derived
//! level-set length of the hat (tools/oracles/hat_survival.py, 30 digits),
//! and hat seminorms from tools/oracles/hat_seminorm.py.

#![allow(clippy::excessive_precision)]

use dqlab::funcspace::make_hat;
use dqlab::measures::{log_grid, oracle_distribution_1d, MeasureSpec, OracleConfig, QuotientSpec};
use dqlab::norms::{fractional_seminorm, seminorm_via_curve};

const HAT: &[(f64, f64, f64, f64)] = &[
(1.0, 2.0, 1.000000e-02, 49.385127825612522),
(1.0, 2.0, 5.000000e-01, 4.7555790743238746),
(1.0, 2.0, 3.000000e+00, 1.2222222222222222),
(1.0, 2.0, 8.000000e+00, 0.484375),
(1.0, 2.0, 1.000000e+02, 0.0399),
(1.0, 2.0, 1.000000e+04, 0.00039999),
(0.5, 1.5, 1.000000e-02, 48.196038424053807),
(0.5, 1.5, 5.000000e-01, 8.8181507641730017),
(0.5, 1.5, 3.000000e+00, 2.6049382716049383),
(0.5, 1.5, 8.000000e+00, 0.99674479166666666),
(0.5, 1.5, 1.000000e+02, 0.079998333333333333),
(0.5, 1.5, 1.000000e+04, 0.00079999999833333333),
(-1.0, -1.0, 1.000000e-02, 44.98895827092877),
(-1.0, -1.0, 5.000000e-01, 6.5911742987852761),
(-1.0, -1.0, 3.000000e+00, 1.3333333333333333),
(-1.0, -1.0, 8.000000e+00, 0.5),
(-1.0, -1.0, 1.000000e+02, 0.04),
(-1.0, -1.0, 1.000000e+04, 0.0004),
(-2.0, -1.0, 1.000000e-02, 199.49916352594993),
(-2.0, -1.0, 5.000000e-01, 3.4477152501692066),
(-2.0, -1.0, 3.000000e+00, 0.14814814814814815),
(-2.0, -1.0, 8.000000e+00, 0.020833333333333333),
(-2.0, -1.0, 1.000000e+02, 0.00013333333333333333),
(-2.0, -1.0, 1.000000e+04, 1.3333333333333333e-8),
(2.0, 1.0, 1.000000e-02, 13330.719210534914),
(2.0, 1.0, 5.000000e-01, 4.1481481481481481),
(2.0, 1.0, 3.000000e+00, 0.0),
(2.0, 1.0, 8.000000e+00, 0.0),
(2.0, 1.0, 1.000000e+02, 0.0),
(2.0, 1.0, 1.000000e+04, 0.0),
];

#[test]
fn hat_oracle_matches_reference_values() {
    let u = make_hat();
    for chunk in HAT.chunks(6) {
        let (gamma, b) = (chunk[0].0, chunk[0].1);
        let lambdas: Vec<f64> = chunk.iter().map(|c| c.2).collect();
        let curve = oracle_distribution_1d(
            &u,
            &MeasureSpec::new(1, gamma).unwrap(),
            &QuotientSpec::new(b),
            &lambdas,
            &OracleConfig::default(),
        )
        .unwrap();
        for (i, c) in chunk.iter().enumerate() {
            let got = curve.mu[i];
            let dev = (got - c.3).abs();
            assert!(dev <= curve.error(i) + 1e-10 * c.3.abs() + 1e-15, "gamma={gamma} b={b} lambda={}: |{got} - {}| vs bound {}", c.2, c.3, curve.error(i));
            assert!(dev <= 1e-3 * c.3.abs() + 1e-15, "gamma={gamma} b={b} lambda={}", c.2);
        }
    }
}

/// `(s, p, ‖hat‖_{Ẇ^{s,p}}^p)`.
const HAT_SEMINORM: &[(f64, f64, f64)] = &[
    (0.5, 1.0, 15.084944665313014),
    (0.3, 2.0, 6.3394426740653624),
    (0.9, 1.0, 43.303978284294682),
    (0.75, 1.5, 12.18885598919217),
];

#[test]
fn hat_seminorm_matches_reference_values() {
    let u = make_hat();
    for &(s, p, want) in HAT_SEMINORM {
        let v = fractional_seminorm(&u, s, p).unwrap();
        let dev = (v.pow - want).abs();
        assert!(dev <= v.error + 1e-12 * want, "s={s} p={p}: {} vs {want}, bound {}", v.pow, v.error);
        assert!(dev <= 1e-6 * want, "s={s} p={p}: {} vs {want}", v.pow);
    }
}

#[test]
fn seminorm_paths_agree() {
    let u = make_hat();
    let lam = log_grid(1e-6, 1e9, 12);
    for &(s, p, want) in &HAT_SEMINORM[..2] {
        for gamma in [-0.5, 1.0, 2.0] {
            let v = seminorm_via_curve(&u, s, p, gamma, &lam, &OracleConfig::default()).unwrap();
            let dev = (v.pow - want).abs();
            assert!(dev <= v.error && dev <= 0.01 * want, "s={s} p={p} gamma={gamma}: {} vs {want}, bound {}", v.pow, v.error);
        }
    }
}
