//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use dqlab::constants::{k_constant, k_constant_quadrature, sphere_area};
use dqlab::counterexamples::{growth_table, staircase_check, GrowthConfig, InterpolationParams};
use dqlab::funcspace::{
    from_id, make_cantor_g, make_hat, make_indicator_interval, make_boundary_g, total_variation, TestFunction,
};
use dqlab::interpolation::lorentz_interpolation_family;
use dqlab::limits::{bbm_limit, indicator_anomaly, lp_limit, msh_limit, sobolev_limit, Engine};
use dqlab::measures::{
    gamma_zero_threshold, log_grid, oracle_distribution_1d, oracle_equivalence, MeasureSpec, OracleConfig, QuotientSpec,
    ThresholdVerdict,
};
use dqlab::norms::tao_identity_check;
use dqlab::wavelets::{rescale_into_unit, sandwich_stability};
use std::time::Instant;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn constants() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for p in [1.0, 1.5, 2.0, 3.0] {
            worst = worst.max(rel(k_constant(p, n), k_constant_quadrature(p, n)));
        }
    }
    let pi = std::f64::consts::PI;
    let sig = [(1, 2.0), (2, 2.0 * pi), (3, 4.0 * pi)]
        .iter()
        .map(|&(n, want)| (sphere_area(n) - want).abs() / want)
        .fold(0.0, f64::max);
    Ok((worst <= 1e-10 && sig <= 1e-12, format!("k rel dev {worst:.2e}, sigma rel dev {sig:.2e}")))
}

fn sobolev_limits() -> Outcome {
    let u = make_hat();
    let engine = Engine::auto(&u, 1);
    let mut ok = true;
    let mut parts = Vec::new();
    for gamma in [0.5, 1.0, 2.0, -2.0, -3.0] {
        let c = sobolev_limit(&u, gamma, 1.0, &engine, None).map_err(e)?;
        let want = 4.0 / gamma.abs();
        ok &= c.estimate.converged && rel(c.predicted, want) < 1e-12 && rel(c.estimate.value, want) <= 0.02;
        parts.push(format!("γ={gamma}: {:.5}/{want:.5}", c.estimate.value));
    }
    Ok((ok, parts.join(", ")))
}

fn indicator() -> Outcome {
    let u = make_indicator_interval(0.0, 1.0).map_err(e)?;
    let engine = Engine::auto(&u, 1);
    let mut ok = true;
    let mut parts = Vec::new();
    for (gamma, want) in [(1.0, 2.0), (2.0, 4.0 / 3.0)] {
        let c = indicator_anomaly(&u, gamma, &engine, None).map_err(e)?;
        let v = c.estimate.value;
        let anomaly = v / (4.0 / gamma);
        let expected = gamma / (gamma + 1.0);
        ok &= c.estimate.converged && rel(v, want) <= 0.02 && rel(anomaly, expected) <= 0.03;
        parts.push(format!("γ={gamma}: plateau {v:.5}/{want:.5}, ratio to 4/γ {anomaly:.4}/{expected:.4}"));
    }
    Ok((ok, parts.join("; ")))
}

fn lebesgue_limits() -> Outcome {
    let u = make_hat();
    let lambdas = [5.0, 8.0, 20.0, 100.0];
    let curve = oracle_distribution_1d(
        &u,
        &MeasureSpec::new(1, -1.0).map_err(e)?,
        &QuotientSpec::lebesgue(-1.0, 1.0),
        &lambdas,
        &OracleConfig::default(),
    )
    .map_err(e)?;
    let products: Vec<f64> = (0..4).map(|i| lambdas[i] * curve.mu[i]).collect();
    let mut ok = products.iter().all(|v| rel(*v, 4.0) <= 0.01);
    let c = lp_limit(&u, 2.0, 2.0, &Engine::auto(&u, 1), None).map_err(e)?;
    ok &= c.estimate.converged && rel(c.estimate.value, 4.0 / 3.0) <= 0.02;
    Ok((ok, format!("γ=-1: λμ = {products:.6?}; γ=2, p=2: {:.5}/1.33333", c.estimate.value)))
}

fn bbm_msh() -> Outcome {
    let u = make_hat();
    let b = bbm_limit(&u, 1.0).map_err(e)?;
    let m = msh_limit(&u, 1.0).map_err(e)?;
    let ok = rel(b.estimate.value, 4.0) <= 0.02 && rel(m.estimate.value, 4.0) <= 0.02;
    Ok((ok, format!("(1-s)|u|^p -> {:.5}, s|u|^p -> {:.5}", b.estimate.value, m.estimate.value)))
}

fn lorentz_consistency() -> Outcome {
    let corpus = ["hat", "bump", "indicator:0,1", "disc:1", "bump2d", "cantor-bump:j=3", "boundary:j=2", "lift:hat"];
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for id in corpus {
        let f = from_id(id).map_err(e)?;
        for p in [1.0, 2.0] {
            let t = tao_identity_check(&f, p).map_err(e)?;
            let d_weak = rel(t.weak, t.strong);
            let d_lor = rel(t.lorentz_marginal.value, t.layer_cake_marginal.value);
            worst = (worst.0.max(d_weak), worst.1.max(d_lor));
            if d_weak > 0.01 || d_lor > 0.01 {
                ok = false;
                eprintln!("  {id} p={p}: weak {} strong {} lorentz {} layer cake {}", t.weak, t.strong, t.lorentz_marginal.value, t.layer_cake_marginal.value);
            }
        }
    }
    Ok((ok, format!("{} functions x p in {{1,2}}: max weak/strong dev {:.2e}, max lorentz/layer-cake dev {:.2e}", corpus.len(), worst.0, worst.1)))
}

fn oracle_equivalence_suite() -> Outcome {
    let cases: Vec<(TestFunction, f64, f64, Vec<f64>)> = vec![
        (make_hat(), 1.0, 2.0, log_grid(0.1, 10.0, 2)),
        (make_hat(), -2.0, -1.0, log_grid(0.1, 10.0, 2)),
        (make_hat(), 0.5, 0.75, log_grid(0.01, 0.9, 2)),
        (make_indicator_interval(0.0, 1.0).map_err(e)?, 1.0, 2.0, log_grid(0.1, 10.0, 2)),
        (make_cantor_g(2, 0.25).map_err(e)?, 1.0, 1.625, log_grid(0.1, 10.0, 2)),
        (make_boundary_g(1), 1.0, 1.0, log_grid(0.1, 5.0, 2)),
    ];
    let mut ok = true;
    let mut nodes = 0;
    let mut worst: f64 = 0.0;
    for (k, (u, gamma, b, lambdas)) in cases.iter().enumerate() {
        let c = oracle_equivalence(u, *gamma, *b, lambdas, 100 + k as u64).map_err(e)?;
        ok &= c.all_agree;
        for n in &c.nodes {
            nodes += 1;
            if n.bound > 0.0 {
                worst = worst.max(n.difference / n.bound);
            }
        }
    }
    Ok((ok, format!("{} combinations, {nodes} nodes, max |MC - oracle| / bound = {worst:.3}", cases.len())))
}

fn counterexample_growth() -> Outcome {
    let params = InterpolationParams::new(0.75, 2.0, 0.5).map_err(e)?;
    let js: Vec<u32> = (2..=8).collect();
    let table = growth_table(&params, &js, 1.0, 2.0, &GrowthConfig::default()).map_err(e)?;
    let tv_dev = table.rows.iter().map(|r| (r.tv - 1.0).abs()).fold(0.0, f64::max);
    let report = staircase_check(&params, 5, 1.0, &log_grid(0.5, 200.0, 2), &GrowthConfig::default().oracle).map_err(e)?;
    let ok = (table.seminorm_exponent - 1.0).abs() <= 0.15
        && (table.lorentz_exponent - 0.5).abs() <= 0.15
        && tv_dev <= 1e-6
        && report.violations == 0;
    let anchors: Vec<String> = report.anchors.iter().map(|(m, a)| format!("{m}:{a:.3}")).collect();
    Ok((
        ok,
        format!(
            "seminorm^q exponent {:.4}, Lorentz exponent {:.4}, max |TV-1| {tv_dev:.1e}, staircase {} checks / {} violations, A_(m,1/2) [{}]",
            table.seminorm_exponent,
            table.lorentz_exponent,
            report.steps.len(),
            report.violations,
            anchors.join(" ")
        ),
    ))
}

fn lorentz_interpolation() -> Outcome {
    let params = InterpolationParams::new(0.75, 2.0, 0.5).map_err(e)?;
    let fam = lorentz_interpolation_family(&params, &[2, 3, 4, 5, 6], 1.0, &GrowthConfig::default().oracle).map_err(e)?;
    let fact = fam.reports.iter().map(|r| r.factorization.max_relative_error).fold(0.0, f64::max);
    let cs: Vec<String> = fam.reports.iter().map(|r| format!("{:.4}", r.constant)).collect();
    let ok = fact <= 1e-12 && fam.max_deviation <= 0.2;
    Ok((ok, format!("factorization rel err {fact:.1e}; C_j = [{}], max deviation {:.3}", cs.join(" "), fam.max_deviation)))
}

fn cddd() -> Outcome {
    let funcs = [(make_hat(), "hat"), (make_cantor_g(4, 0.25).map_err(e)?, "g_4"), (make_indicator_interval(0.0, 1.0).map_err(e)?, "indicator")];
    let mut ok = true;
    let mut parts = Vec::new();
    for (u, name) in &funcs {
        let v = rescale_into_unit(u);
        let tv = total_variation(&v);
        for gamma in [0.5, 1.0, 2.0] {
            let s = sandwich_stability(&v, gamma, tv, &[8, 9, 10, 11, 12]).map_err(e)?;
            ok &= s.spread <= 0.10;
            parts.push(format!("{name}/γ={gamma}: {:.3}", s.spread));
        }
    }
    Ok((ok, format!("weak-l1/TV spread over J=8..12: {}", parts.join(", "))))
}

fn threshold() -> Outcome {
    let u = make_hat();
    let rs: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
    let below = gamma_zero_threshold(&u, 0.5, &rs).map_err(e)?.verdict;
    let above = gamma_zero_threshold(&u, 1.5, &rs).map_err(e)?.verdict;
    Ok((
        below == ThresholdVerdict::Diverges && above == ThresholdVerdict::Converges,
        format!("λ=0.5: {below:?}, λ=1.5: {above:?}"),
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("constants k(p,n) and sigma", constants),
        ("Sobolev plateau for the hat", sobolev_limits),
        ("indicator anomaly", indicator),
        ("Lebesgue plateau and exact gamma=-1 curve", lebesgue_limits),
        ("BBM and MSh limits", bbm_msh),
        ("Lorentz consistency on lifts", lorentz_consistency),
        ("Monte Carlo against oracle", oracle_equivalence_suite),
        ("counterexample growth and staircase", counterexample_growth),
        ("Lorentz interpolation constant", lorentz_interpolation),
        ("Haar sandwich stability", cddd),
        ("gamma = 0 threshold", threshold),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(msg) => (false, format!("error: {msg}")),
        };
        if !pass {
            failures += 1;
        }
        println!("{} criterion {} ({name}): {detail} [{:.1?}]", if pass { "PASS" } else { "FAIL" }, i + 1, t.elapsed());
    }
    if failures > 0 {
        eprintln!("{failures} criteria failed");
        std::process::exit(1);
    }
}
