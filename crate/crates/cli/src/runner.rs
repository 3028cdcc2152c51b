use crate::config::{DistributionMode, EngineKind, Experiment, InterpMode, LimitFormula};
use dqlab::constants::{k_constant, k_constant_quadrature, sphere_area, sphere_area_quadrature};
use dqlab::counterexamples::{boundary_family_blowup, growth_table, staircase_check, GrowthConfig, InterpolationParams};
use dqlab::funcspace::{from_id, total_variation, TestFunction};
use dqlab::interpolation::{gn_inequality_check, lorentz_interpolation_family, lorentz_interpolation_check};
use dqlab::limits::{bbm_limit, indicator_anomaly, lp_limit, msh_limit, sobolev_limit, write_limit_table, Engine, LimitCheck};
use dqlab::measures::{
    gamma_zero_threshold, oracle_equivalence, MeasureSpec, OracleConfig, QuotientSpec, ThresholdVerdict, MC_SIGMAS,
};
use dqlab::norms::{lorentz_norm, weak_norm_strict, write_norm_table, LorentzSpec, NormRow};
use dqlab::wavelets::{rescale_into_unit, sandwich_stability};
use dqlab::Error;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// One line of `summary.json` / `summary.csv`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub kind: String,
    pub item: String,
    pub quantity: String,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub predicted: Option<f64>,
    pub tolerance: Option<f64>,
    /// Formula behind `predicted`.
    pub formula: String,
    pub constants: String,
    /// `None` for rows that only report a value.
    pub pass: Option<bool>,
    /// `ok`, or the error class when the computation stopped.
    pub status: String,
}

impl SummaryRow {
    fn new(exp: &Experiment, item: impl Into<String>, quantity: impl Into<String>) -> Self {
        SummaryRow {
            experiment: exp.name().to_string(),
            kind: exp.kind().to_string(),
            item: item.into(),
            quantity: quantity.into(),
            value: None,
            error: None,
            predicted: None,
            tolerance: None,
            formula: String::new(),
            constants: String::new(),
            pass: None,
            status: "ok".into(),
        }
    }

    fn value(mut self, v: f64) -> Self {
        self.value = Some(v).filter(|v| v.is_finite());
        self
    }

    fn error(mut self, e: f64) -> Self {
        self.error = Some(e).filter(|e| e.is_finite());
        self
    }

    fn formula(mut self, f: impl Into<String>) -> Self {
        self.formula = f.into();
        self
    }

    fn constants(mut self, c: impl Into<String>) -> Self {
        self.constants = c.into();
        self
    }

    /// Relative check `|value/predicted − 1| ≤ tol`.
    fn relative(mut self, predicted: f64, tol: f64) -> Self {
        self.predicted = Some(predicted);
        self.tolerance = Some(tol);
        self.pass = Some(self.value.is_some_and(|v| (v / predicted - 1.0).abs() <= tol));
        self
    }

    /// Check `value ≤ bound`.
    fn at_most(mut self, bound: f64) -> Self {
        self.tolerance = Some(bound);
        self.pass = Some(self.value.is_some_and(|v| v <= bound));
        self
    }

    fn verdict(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }
}

pub fn status_label(e: &Error) -> &'static str {
    match e {
        Error::NotConverged(_) => "not-converged",
        Error::ResolutionFailure { .. } => "resolution-failure",
        Error::InconclusiveTruncation { .. } => "inconclusive-truncation",
        Error::Inconclusive(_) => "inconclusive",
        Error::EndpointAttained { .. } => "endpoint-attained",
        Error::UnknownFunction(_) => "unknown-function",
        Error::Unsupported(_) => "unsupported",
        _ => "invalid",
    }
}

pub struct Context {
    pub seed: u64,
    pub tolerance_scale: f64,
    pub out_dir: PathBuf,
}

impl Context {
    fn tol(&self, t: f64) -> f64 {
        t * self.tolerance_scale
    }

    fn file(&self, exp: &Experiment, name: &str) -> dqlab::Result<BufWriter<File>> {
        let dir = self.out_dir.join(exp.name());
        std::fs::create_dir_all(&dir)?;
        Ok(BufWriter::new(File::create(dir.join(name))?))
    }
}

fn engine(kind: EngineKind, u: &TestFunction, seed: u64) -> Engine {
    match kind {
        EngineKind::Auto => Engine::auto(u, seed),
        EngineKind::Oracle => Engine::Oracle { config: OracleConfig::default() },
        EngineKind::MonteCarlo => Engine::MonteCarlo { seed, samples_per_shell: 40_000 },
    }
}

fn slug(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

fn limit_row(exp: &Experiment, c: &LimitCheck, tol: f64) -> SummaryRow {
    let item = if c.gamma.is_finite() { format!("{} gamma={} p={}", c.function, c.gamma, c.p) } else { format!("{} p={}", c.function, c.p) };
    let mut row = SummaryRow::new(exp, item, format!("limit {}", c.estimate.direction.label()))
        .value(c.estimate.value)
        .error(c.estimate.error)
        .formula(&c.formula)
        .constants(&c.constants)
        .relative(c.predicted, tol);
    if !c.estimate.converged {
        row.pass = Some(false);
        row.status = "not-converged".into();
    }
    row
}

/// Runs one experiment. Errors abort the experiment and are returned with the rows made so far.
pub fn run(exp: &Experiment, ctx: &Context) -> (Vec<SummaryRow>, Option<Error>) {
    let mut rows = Vec::new();
    let res = run_into(exp, ctx, &mut rows);
    (rows, res.err())
}

fn run_into(exp: &Experiment, ctx: &Context, rows: &mut Vec<SummaryRow>) -> dqlab::Result<()> {
    match exp {
        Experiment::Constants { dims, ps, tolerance, .. } => {
            let tol = ctx.tol(*tolerance);
            for &n in dims {
                if n == 0 {
                    return Err(Error::InvalidArgument("dimension must be positive".into()));
                }
                rows.push(
                    SummaryRow::new(exp, format!("n={n}"), "sigma")
                        .value(sphere_area(n))
                        .formula("2 pi^(n/2) / Gamma(n/2)")
                        .constants("reference: iterated polar quadrature")
                        .relative(sphere_area_quadrature(n), tol),
                );
                for &p in ps {
                    if !(p >= 0.0) {
                        return Err(Error::InvalidArgument(format!("p must be nonnegative, got {p}")));
                    }
                    rows.push(
                        SummaryRow::new(exp, format!("p={p} n={n}"), "k")
                            .value(k_constant(p, n))
                            .formula("2 pi^((n-1)/2) Gamma((p+1)/2) / Gamma((n+p)/2)")
                            .constants("reference: sigma_(n-2) * int |cos|^p sin^(n-2)")
                            .relative(k_constant_quadrature(p, n), tol),
                    );
                }
            }
        }
        Experiment::Norms { functions, gamma, b, p, r, lambdas, engine: kind, .. } => {
            let spec = match r {
                Some(r) => LorentzSpec::new(*p, *r)?,
                None => LorentzSpec::weak(*p)?,
            };
            let mut table = Vec::new();
            for id in functions {
                let u = from_id(id)?;
                let curve = engine(*kind, &u, ctx.seed).curve(&u, &MeasureSpec::new(u.dim(), *gamma)?, &QuotientSpec::new(*b), &lambdas.points())?;
                curve.write_csv(ctx.file(exp, &format!("curve_{}.csv", slug(id)))?)?;
                let (value, error, verdict) = match r {
                    None => {
                        let w = weak_norm_strict(&curve, *p)?;
                        (w.value, w.error, dqlab::norms::Verdict::Finite)
                    }
                    Some(_) => {
                        let v = lorentz_norm(&curve, &spec)?;
                        (v.value, v.error, v.verdict)
                    }
                };
                table.push(NormRow { function: id.clone(), gamma: *gamma, b: *b, p: *p, r: *r, value, error, verdict });
                let quantity = if r.is_some() { "lorentz" } else { "weak" };
                rows.push(
                    SummaryRow::new(exp, format!("{id} gamma={gamma} b={b}"), quantity)
                        .value(value)
                        .error(error)
                        .formula(match r {
                            Some(r) => format!("(p int (lambda mu^(1/p))^{r} dlambda/lambda)^(1/{r}), p={p}"),
                            None => format!("max lambda mu^(1/{p})"),
                        }),
                );
            }
            write_norm_table(&table, ctx.file(exp, "norms.csv")?)?;
        }
        Experiment::Distribution { function, gamma, b, lambdas, mode, engine: kind, .. } => {
            let u = from_id(function)?;
            let grid = lambdas.points();
            match mode {
                DistributionMode::Curve => {
                    let curve = engine(*kind, &u, ctx.seed).curve(&u, &MeasureSpec::new(u.dim(), *gamma)?, &QuotientSpec::new(*b), &grid)?;
                    curve.write_csv(ctx.file(exp, "curve.csv")?)?;
                    for i in 0..curve.len() {
                        rows.push(
                            SummaryRow::new(exp, format!("{function} lambda={:e}", curve.lambda[i]), "mu")
                                .value(curve.mu[i])
                                .error(curve.error(i)),
                        );
                    }
                }
                DistributionMode::Compare => {
                    let c = oracle_equivalence(&u, *gamma, *b, &grid, ctx.seed)?;
                    let mut w = csv::Writer::from_writer(ctx.file(exp, "comparison.csv")?);
                    for n in &c.nodes {
                        w.serialize(n).map_err(Error::from)?;
                        let mut row = SummaryRow::new(exp, format!("{function} lambda={:e}", n.lambda), "|mc - oracle|")
                            .value(n.difference)
                            .formula(format!("{MC_SIGMAS} stderr + truncation + oracle bound"))
                            .constants(format!("mc={:e}; oracle={:e}", n.monte_carlo, n.oracle))
                            .at_most(n.bound);
                        row.pass = Some(n.agree);
                        rows.push(row);
                    }
                    w.flush()?;
                }
            }
        }
        Experiment::Limits { formula, functions, gammas, p, lambdas, tolerance, .. } => {
            let tol = ctx.tol(*tolerance);
            let mut checks = Vec::new();
            for id in functions {
                let u = from_id(id)?;
                let eng = Engine::auto(&u, ctx.seed);
                match formula {
                    LimitFormula::Sobolev => {
                        for &g in gammas {
                            let c = sobolev_limit(&u, g, *p, &eng, None)?;
                            rows.push(limit_row(exp, &c, tol));
                            checks.push(c);
                        }
                    }
                    LimitFormula::Lebesgue => {
                        for &g in gammas {
                            let c = lp_limit(&u, g, *p, &eng, None)?;
                            rows.push(limit_row(exp, &c, tol));
                            checks.push(c);
                        }
                    }
                    LimitFormula::Indicator => {
                        for &g in gammas {
                            let c = indicator_anomaly(&u, g, &eng, None)?;
                            rows.push(limit_row(exp, &c, tol));
                            let smooth = dqlab::constants::k_constant(1.0, u.dim()) * total_variation(&u) / g.abs();
                            rows.push(
                                SummaryRow::new(exp, format!("{id} gamma={g}"), "plateau / smooth prediction")
                                    .value(c.estimate.value / smooth)
                                    .formula("|gamma| / |gamma + 1|")
                                    .constants(format!("smooth prediction k(1,n) TV/|gamma| = {smooth}"))
                                    .relative(g.abs() / (g + 1.0).abs(), ctx.tol(1.5 * tolerance)),
                            );
                            checks.push(c);
                        }
                    }
                    LimitFormula::Threshold => {
                        let rs: Vec<f64> = (1..=6).map(|k| 10f64.powi(-k)).collect();
                        let lip = u.lipschitz();
                        for &lam in lambdas {
                            let probe = gamma_zero_threshold(&u, lam, &rs)?;
                            let label = match probe.verdict {
                                ThresholdVerdict::Diverges => "diverges",
                                ThresholdVerdict::Converges => "converges",
                            };
                            let mut row = SummaryRow::new(exp, format!("{id} lambda={lam}"), format!("nu_0 tail {label}"))
                                .value(*probe.values.last().unwrap_or(&f64::NAN))
                                .formula("diverges iff lambda < ess sup |u'|");
                            if let Some(l) = lip {
                                row = row.constants(format!("Lip(u)={l}"));
                                if lam != l {
                                    let expect = if lam < l { ThresholdVerdict::Diverges } else { ThresholdVerdict::Converges };
                                    row = row.verdict(probe.verdict == expect);
                                }
                            }
                            rows.push(row);
                        }
                    }
                }
            }
            if !checks.is_empty() {
                write_limit_table(&checks, ctx.file(exp, "limits.csv")?)?;
            }
        }
        Experiment::Bbm { functions, p, tolerance, .. } => {
            let tol = ctx.tol(*tolerance);
            let mut checks = Vec::new();
            for id in functions {
                let u = from_id(id)?;
                for c in [bbm_limit(&u, *p)?, msh_limit(&u, *p)?] {
                    rows.push(limit_row(exp, &c, tol));
                    checks.push(c);
                }
            }
            write_limit_table(&checks, ctx.file(exp, "limits.csv")?)?;
        }
        Experiment::Counterexample { t, q, theta, js, gamma, r, staircase_j, staircase_lambdas, exponent_tolerance, boundary, .. } => {
            let params = InterpolationParams::new(*t, *q, *theta)?;
            let cfg = GrowthConfig::default();
            let tol = ctx.tol(*exponent_tolerance);
            let table = growth_table(&params, js, *gamma, *r, &cfg)?;
            table.write_csv(ctx.file(exp, "growth.csv")?)?;
            let consts = format!("t={t}; q={q}; theta={theta}; p={}; s={}; b={}", params.p, params.s, table.b);
            let mut row = SummaryRow::new(exp, "cantor g_j", "seminorm^q growth exponent")
                .value(table.seminorm_exponent)
                .formula("|g_j|^q ~ a + c j^kappa, kappa = 1")
                .constants(&consts);
            row.predicted = Some(1.0);
            rows.push(row.at_most_abs(1.0, tol));
            let mut row = SummaryRow::new(exp, "cantor g_j", "lorentz growth exponent")
                .value(table.lorentz_exponent)
                .formula(format!("[Q g_j]^r ~ a + c j^kappa, exponent kappa/r = 1/{r}"))
                .constants(&consts);
            row.predicted = Some(1.0 / r);
            rows.push(row.at_most_abs(1.0 / r, tol));
            let tv_dev = table.rows.iter().map(|r| (r.tv - 1.0).abs()).fold(0.0, f64::max);
            rows.push(SummaryRow::new(exp, "cantor g_j", "max |TV - 1|").value(tv_dev).formula("TV(g_j) = 1").at_most(1e-6));
            let report = staircase_check(&params, *staircase_j, *gamma, &staircase_lambdas.points(), &cfg.oracle)?;
            let mut w = csv::Writer::from_writer(ctx.file(exp, "staircase.csv")?);
            for s in &report.steps {
                w.serialize(s).map_err(Error::from)?;
            }
            w.flush()?;
            let anchors: Vec<String> = report.anchors.iter().map(|(m, a)| format!("A({m},1/2)={a:e}")).collect();
            rows.push(
                SummaryRow::new(exp, format!("staircase j={staircase_j}"), "violations")
                    .value(report.violations as f64)
                    .formula("A(m,lambda) >= B^-1 A(m-1, lambda B^(-1/p))")
                    .constants(format!("B={}; {}", report.base, anchors.join("; ")))
                    .at_most(0.0),
            );
            if let Some(bc) = boundary {
                let bt = boundary_family_blowup(&bc.js, bc.gamma, bc.p, *q, bc.r, &cfg)?;
                bt.write_csv(ctx.file(exp, "boundary.csv")?)?;
                rows.push(
                    SummaryRow::new(exp, "boundary family", "lorentz growth exponent")
                        .value(bt.lorentz_exponent)
                        .formula("t = 1/q, b = (1+gamma)/p")
                        .constants(format!("gamma={}; p={}; r={}", bc.gamma, bc.p, bc.r)),
                );
            }
        }
        Experiment::Interp { mode, functions, t, q, theta, gamma, cantor_js, stability_tolerance, .. } => match mode {
            InterpMode::Gn => {
                let mut reports = Vec::new();
                for id in functions {
                    let g = gn_inequality_check(&from_id(id)?, *t, *q, *theta)?;
                    rows.push(
                        SummaryRow::new(exp, id.clone(), "|u|_W(s,p) / (|u|_W(t,q)^(1-theta) TV^theta)")
                            .value(g.ratio)
                            .error(g.lhs_error)
                            .constants(format!("p={}; s={}", g.params.p, g.params.s)),
                    );
                    rows.push(
                        SummaryRow::new(exp, id.clone(), "|F|_p - C |F|_q^(1-theta) [F]_(1,inf)^theta")
                            .value(g.holder.lhs - g.holder.rhs)
                            .error(g.holder.lhs_error)
                            .formula("C = 2^(1/p) (p/(p-1))^theta")
                            .constants(format!("C={}; lhs={}; rhs={}", g.holder.constant, g.holder.lhs, g.holder.rhs))
                            .verdict(g.holder.holds),
                    );
                    reports.push(g);
                }
                serde_json::to_writer_pretty(ctx.file(exp, "gn.json")?, &reports)?;
            }
            InterpMode::Lorentz => {
                let gamma = gamma.ok_or_else(|| Error::InvalidArgument("the lorentz mode needs gamma".into()))?;
                let oracle = GrowthConfig::default().oracle;
                let mut reports = Vec::new();
                for id in functions {
                    let r = lorentz_interpolation_check(&from_id(id)?, *t, *q, *theta, gamma, &oracle)?;
                    rows.push(interpolation_row(exp, &r));
                    rows.push(factorization_row(exp, &r));
                    reports.push(r);
                }
                if !cantor_js.is_empty() {
                    let params = InterpolationParams::new(*t, *q, *theta)?;
                    let fam = lorentz_interpolation_family(&params, cantor_js, gamma, &oracle)?;
                    for r in &fam.reports {
                        rows.push(interpolation_row(exp, r));
                        rows.push(factorization_row(exp, r));
                    }
                    rows.push(
                        SummaryRow::new(exp, "cantor g_j", "max |C_j/mean - 1|")
                            .value(fam.max_deviation)
                            .constants(format!("mean C = {}", fam.mean))
                            .at_most(ctx.tol(*stability_tolerance)),
                    );
                    reports.extend(fam.reports);
                }
                serde_json::to_writer_pretty(ctx.file(exp, "lorentz.json")?, &reports)?;
            }
        },
        Experiment::Wavelet { functions, gammas, levels, tolerance, .. } => {
            let tol = ctx.tol(*tolerance);
            let mut w = csv::Writer::from_writer(ctx.file(exp, "sandwich.csv")?);
            w.write_record(["function", "gamma", "max_level", "weak_l1", "tv", "l1"]).map_err(Error::from)?;
            for id in functions {
                let u = from_id(id)?;
                let v = rescale_into_unit(&u);
                let tv = total_variation(&v);
                for &g in gammas {
                    let s = sandwich_stability(&v, g, tv, levels)?;
                    for r in &s.rows {
                        w.write_record([
                            id.clone(),
                            format!("{g}"),
                            format!("{}", r.max_level),
                            format!("{:e}", r.weak_l1),
                            format!("{:e}", r.tv),
                            format!("{:e}", r.l1),
                        ])
                        .map_err(Error::from)?;
                    }
                    rows.push(
                        SummaryRow::new(exp, format!("{id} gamma={g}"), "weak-l1/TV spread")
                            .value(s.spread)
                            .formula("max/min - 1 of weak-l1/TV over the levels")
                            .constants(format!("pair=haar; levels={levels:?}"))
                            .at_most(tol),
                    );
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn interpolation_row(exp: &Experiment, r: &dqlab::interpolation::LorentzInterpolationReport) -> SummaryRow {
    SummaryRow::new(exp, format!("{} gamma={}", r.function, r.gamma), "C = lhs / rhs")
        .value(r.constant)
        .error(r.lhs.error / r.rhs)
        .formula("[Q u]_L(p,r) / (|u|_W(t,q)^(1-theta) |u|_BV^theta), r = q/(1-theta)")
        .constants(format!("p={}; r={}; lhs={}; rhs={}", r.params.p, r.r, r.lhs.value, r.rhs))
}

fn factorization_row(exp: &Experiment, r: &dqlab::interpolation::LorentzInterpolationReport) -> SummaryRow {
    SummaryRow::new(exp, format!("{} gamma={}", r.function, r.gamma), "factorization rel err")
        .value(r.factorization.max_relative_error)
        .formula("Q_(s+gamma/p) = Q_(t+gamma/q)^(1-theta) Q_(1+gamma)^theta")
        .constants(format!("samples={}", r.factorization.samples))
        .at_most(1e-12)
}

impl SummaryRow {
    /// Check `|value − target| ≤ tol`.
    fn at_most_abs(mut self, target: f64, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self.pass = Some(self.value.is_some_and(|v| (v - target).abs() <= tol));
        self
    }
}

pub fn write_summary(rows: &[SummaryRow], seed: u64, dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let doc = serde_json::json!({ "schema_version": crate::config::SCHEMA_VERSION, "seed": seed, "rows": rows });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    std::fs::write(dir.join("summary.json"), text)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.write_record([
        "experiment", "kind", "item", "quantity", "value", "error", "predicted", "tolerance", "formula", "constants", "pass", "status",
    ])?;
    let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.kind.clone(),
            r.item.clone(),
            r.quantity.clone(),
            opt(r.value),
            opt(r.error),
            opt(r.predicted),
            opt(r.tolerance),
            r.formula.clone(),
            r.constants.clone(),
            r.pass.map(|p| if p { "true" } else { "false" }.to_string()).unwrap_or_default(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
