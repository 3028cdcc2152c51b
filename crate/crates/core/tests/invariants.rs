//! Structural identities checked on random parameters.

use dqlab::funcspace::{from_id, make_cantor_g, make_hat, total_variation};
use dqlab::interpolation::gn_inequality_check;
use dqlab::measures::{
    estimate_distribution, log_grid, oracle_distribution_1d, MeasureSpec, OracleConfig, Orientation, QuotientSpec, SamplingPlan,
    MC_SIGMAS,
};
use dqlab::norms::{fractional_seminorm, lorentz_norm, seminorm_via_curve, weak_norm, LorentzSpec};
use dqlab::wavelets::{cddd_sandwich, haar_analyze, rescale_into_unit};
use proptest::prelude::*;

fn curve(u: &dqlab::funcspace::TestFunction, gamma: f64, b: f64, lambdas: &[f64]) -> dqlab::measures::DistributionCurve {
    oracle_distribution_1d(u, &MeasureSpec::new(1, gamma).unwrap(), &QuotientSpec::new(b), lambdas, &OracleConfig::default()).unwrap()
}

fn close(a: f64, b: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + 1e-9 * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    // u_t(x) = u(tx): μ_{u_t}(λ) = t^{−1−γ} μ_u(λ t^{−b}).
    #[test]
    fn dilation_covariance(t in 0.3f64..3.0, gamma in prop_oneof![0.3f64..2.5, -3.0f64..-1.2], b in 0.5f64..2.0, lam in 0.1f64..10.0) {
        let u = make_hat();
        let ut = u.dilated(t);
        let lhs = curve(&ut, gamma, b, &[lam]);
        let rhs = curve(&u, gamma, b, &[lam * t.powf(-b)]);
        let scale = t.powf(-1.0 - gamma);
        let err = lhs.error(0) + scale * rhs.error(0);
        prop_assert!(close(lhs.mu[0], scale * rhs.mu[0], err), "{} vs {}", lhs.mu[0], scale * rhs.mu[0]);
    }

    // μ_{cu}(λ) = μ_u(λ/c).
    #[test]
    fn homogeneity(c in prop_oneof![Just(0.5f64), Just(3.0f64), 0.2f64..5.0], gamma in 0.3f64..2.0, lam in 0.1f64..10.0) {
        let u = make_hat();
        let lhs = curve(&u.scaled(c), gamma, 1.0 + gamma, &[lam]);
        let rhs = curve(&u, gamma, 1.0 + gamma, &[lam / c]);
        prop_assert!(close(lhs.mu[0], rhs.mu[0], lhs.error(0) + rhs.error(0)));
    }

    #[test]
    fn cantor_g_is_monotone_from_0_to_1(j in 0u32..7, x in -0.5f64..1.5, dx in 0.0f64..0.5) {
        let g = make_cantor_g(j, 0.25).unwrap();
        let (a, b) = (g.eval(&[x]), g.eval(&[x + dx]));
        prop_assert!(a <= b + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn compact_corpus_vanishes_outside_support(id in prop::sample::select(vec!["hat", "bump", "indicator:0,1", "cantor-bump:j=3", "boundary:j=2"]), d in 0.0f64..5.0) {
        let u = from_id(id).unwrap();
        let (lo, hi) = u.support_box()[0];
        prop_assert_eq!(u.eval(&[hi + d + 1e-12]), 0.0);
        prop_assert_eq!(u.eval(&[lo - d - 1e-12]), 0.0);
    }

    // [f]_{p,∞} ≤ (r/p)^{1/r} [f]_{p,r} on any curve. Below b = 1 + γ/p the
    // hat's curve has finite Lorentz norm.
    #[test]
    fn weak_is_dominated_by_lorentz(gamma in 0.3f64..2.0, p in 1.0f64..3.0, r in 1.0f64..6.0) {
        let b = 1.0 + 0.5 * gamma / p;
        let c = curve(&make_hat(), gamma, b, &log_grid(1e-4, 1e6, 4));
        let w = weak_norm(&c, p);
        let l = lorentz_norm(&c, &LorentzSpec::new(p, r).unwrap()).unwrap();
        prop_assert!(l.is_finite());
        prop_assert!(w.value <= (r / p).powf(1.0 / r) * (l.value + l.error) * (1.0 + 1e-9), "weak {} lorentz {}", w.value, l.value);
    }

    // Haar coefficients and the weak-ℓ¹ quantity are linear in u.
    #[test]
    fn haar_is_linear_under_scaling(c in 0.1f64..10.0, gamma in prop_oneof![0.5f64..2.0, -3.0f64..-1.5]) {
        let v = rescale_into_unit(&make_hat());
        let a = haar_analyze(&v, 7, gamma).unwrap();
        let b = haar_analyze(&v.scaled(c), 7, gamma).unwrap();
        prop_assert_eq!(a.entries.len(), b.entries.len());
        for ((ia, xa), (ib, xb)) in a.entries.iter().zip(&b.entries) {
            prop_assert_eq!(ia, ib);
            prop_assert!(close(c * xa, *xb, 1e-14));
        }
        let tv = total_variation(&v);
        let sa = cddd_sandwich(&a, gamma, tv).unwrap();
        let sb = cddd_sandwich(&b, gamma, c * tv).unwrap();
        prop_assert!(close(c * sa.weak_l1, sb.weak_l1, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 4, ..ProptestConfig::default() })]

    // Both sides of the Gagliardo-Nirenberg ratio are 1-homogeneous.
    #[test]
    fn gn_ratio_is_scale_invariant(c in prop_oneof![Just(0.5f64), Just(3.0f64)]) {
        let u = make_hat();
        let a = gn_inequality_check(&u, 0.25, 2.0, 0.5).unwrap();
        let b = gn_inequality_check(&u.scaled(c), 0.25, 2.0, 0.5).unwrap();
        prop_assert!((a.ratio / b.ratio - 1.0).abs() <= 1e-3, "{} vs {}", a.ratio, b.ratio);
        prop_assert!((b.weak_l1 / (c * a.weak_l1) - 1.0).abs() <= 1e-3);
    }

    // ‖Q_{s+γ/p} u‖_{L^p(ν_γ)} does not depend on γ.
    #[test]
    fn gamma_reweighting(s in 0.2f64..0.8, gamma in prop_oneof![0.5f64..2.0, -3.0f64..-1.5]) {
        let u = make_hat();
        let cfg = OracleConfig { adapt_tolerance: 1e-5, ..Default::default() };
        let direct = fractional_seminorm(&u, s, 1.0).unwrap();
        let via = seminorm_via_curve(&u, s, 1.0, gamma, &log_grid(1e-6, 1e8, 6), &cfg).unwrap();
        let tol = 3.0 * (direct.error + via.error) + 1e-3 * direct.pow;
        prop_assert!((direct.pow - via.pow).abs() <= tol, "direct {} via {} (tol {tol})", direct.pow, via.pow);
    }
}

#[test]
fn total_variation_matches_fine_grid_sums() {
    for id in ["hat", "bump", "cantor:j=3", "cantor-bump:j=2", "boundary:j=1"] {
        let u = from_id(id).unwrap();
        let (lo, hi) = u.support_box()[0];
        let n = 200_000;
        let xs: Vec<f64> = (0..=n).map(|i| lo - 0.1 + (hi - lo + 0.2) * i as f64 / n as f64).collect();
        let sum: f64 = xs.windows(2).map(|w| (u.eval(&[w[1]]) - u.eval(&[w[0]])).abs()).sum();
        let tv = total_variation(&u);
        assert!(sum <= tv * (1.0 + 1e-12), "{id}: grid {sum} > tv {tv}");
        assert!(sum >= tv * (1.0 - 1e-3), "{id}: grid {sum} << tv {tv}");
    }
}

// Drawing only h > 0 or only h < 0 targets the same measure in 1D.
#[test]
fn monte_carlo_orientations_agree() {
    let u = make_hat();
    let m = MeasureSpec::new(1, 1.0).unwrap();
    let q = QuotientSpec::new(2.0);
    let lambdas = log_grid(0.1, 10.0, 2);
    let mut curves = Vec::new();
    for (k, o) in [Orientation::Positive, Orientation::Negative, Orientation::Symmetric].into_iter().enumerate() {
        let mut plan = SamplingPlan::covering(&u, &m, &q, &lambdas, 40 + k as u64);
        plan.orientation = o;
        curves.push(estimate_distribution(&u, &m, &q, &plan, &lambdas).unwrap());
    }
    for (i, lam) in lambdas.iter().enumerate() {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let (ca, cb) = (&curves[a], &curves[b]);
            let bound = MC_SIGMAS * (ca.stderr[i] + cb.stderr[i]) + ca.truncation_bound[i] + cb.truncation_bound[i];
            assert!((ca.mu[i] - cb.mu[i]).abs() <= bound, "lambda {lam}");
        }
    }
}
