use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level configuration file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    pub experiments: Vec<Experiment>,
}

/// Log-spaced λ grid.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub per_decade: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        dqlab::measures::log_grid(self.lo, self.hi, self.per_decade)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Auto,
    Oracle,
    MonteCarlo,
}

fn auto() -> EngineKind {
    EngineKind::Auto
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitFormula {
    Sobolev,
    Indicator,
    Lebesgue,
    Threshold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionMode {
    Curve,
    Compare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpMode {
    Gn,
    Lorentz,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Constants {
        name: String,
        dims: Vec<usize>,
        ps: Vec<f64>,
        tolerance: f64,
    },
    Norms {
        name: String,
        functions: Vec<String>,
        gamma: f64,
        b: f64,
        p: f64,
        /// Lorentz second exponent; absent for the weak quasi-norm.
        #[serde(default)]
        r: Option<f64>,
        lambdas: Grid,
        #[serde(default = "auto")]
        engine: EngineKind,
    },
    Distribution {
        name: String,
        function: String,
        gamma: f64,
        b: f64,
        lambdas: Grid,
        mode: DistributionMode,
        #[serde(default = "auto")]
        engine: EngineKind,
    },
    Limits {
        name: String,
        formula: LimitFormula,
        functions: Vec<String>,
        #[serde(default)]
        gammas: Vec<f64>,
        #[serde(default = "one")]
        p: f64,
        /// Probes for the threshold formula.
        #[serde(default)]
        lambdas: Vec<f64>,
        tolerance: f64,
    },
    Bbm {
        name: String,
        functions: Vec<String>,
        p: f64,
        tolerance: f64,
    },
    Counterexample {
        name: String,
        t: f64,
        q: f64,
        theta: f64,
        js: Vec<u32>,
        gamma: f64,
        r: f64,
        staircase_j: u32,
        staircase_lambdas: Grid,
        exponent_tolerance: f64,
        #[serde(default)]
        boundary: Option<BoundaryConfig>,
    },
    Interp {
        name: String,
        mode: InterpMode,
        functions: Vec<String>,
        t: f64,
        q: f64,
        theta: f64,
        #[serde(default)]
        gamma: Option<f64>,
        /// Cantor levels for the constant-stability check of the lorentz mode.
        #[serde(default)]
        cantor_js: Vec<u32>,
        /// Bound on `max |C_j/mean − 1|` over `cantor_js`.
        #[serde(default)]
        stability_tolerance: f64,
    },
    Wavelet {
        name: String,
        functions: Vec<String>,
        gammas: Vec<f64>,
        levels: Vec<u32>,
        tolerance: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub js: Vec<u32>,
    pub gamma: f64,
    pub p: f64,
    pub r: f64,
}

fn one() -> f64 {
    1.0
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::Constants { name, .. }
            | Experiment::Norms { name, .. }
            | Experiment::Distribution { name, .. }
            | Experiment::Limits { name, .. }
            | Experiment::Bbm { name, .. }
            | Experiment::Counterexample { name, .. }
            | Experiment::Interp { name, .. }
            | Experiment::Wavelet { name, .. } => name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Constants { .. } => "constants",
            Experiment::Norms { .. } => "norms",
            Experiment::Distribution { .. } => "distribution",
            Experiment::Limits { .. } => "limits",
            Experiment::Bbm { .. } => "bbm",
            Experiment::Counterexample { .. } => "counterexample",
            Experiment::Interp { .. } => "interp",
            Experiment::Wavelet { .. } => "wavelet",
        }
    }
}

/// Built-in experiments of one kind, matching the acceptance settings.
pub fn defaults(kind: &str) -> Vec<Experiment> {
    let grid = |lo, hi, per_decade| Grid { lo, hi, per_decade };
    match kind {
        "constants" => vec![Experiment::Constants {
            name: "constants".into(),
            dims: vec![1, 2, 3],
            ps: vec![1.0, 1.5, 2.0, 3.0],
            tolerance: 1e-10,
        }],
        "norms" => vec![Experiment::Norms {
            name: "weak-hat".into(),
            functions: vec!["hat".into(), "indicator:0,1".into()],
            gamma: 1.0,
            b: 1.5,
            p: 1.0,
            r: None,
            lambdas: grid(1e-2, 1e4, 8),
            engine: EngineKind::Auto,
        }],
        "distribution" => vec![Experiment::Distribution {
            name: "hat-compare".into(),
            function: "hat".into(),
            gamma: 1.0,
            b: 2.0,
            lambdas: grid(0.1, 10.0, 2),
            mode: DistributionMode::Compare,
            engine: EngineKind::Auto,
        }],
        "limits" => vec![
            Experiment::Limits {
                name: "sobolev-hat".into(),
                formula: LimitFormula::Sobolev,
                functions: vec!["hat".into()],
                gammas: vec![0.5, 1.0, 2.0, -2.0, -3.0],
                p: 1.0,
                lambdas: vec![],
                tolerance: 0.02,
            },
            Experiment::Limits {
                name: "indicator-anomaly".into(),
                formula: LimitFormula::Indicator,
                functions: vec!["indicator:0,1".into()],
                gammas: vec![1.0, 2.0],
                p: 1.0,
                lambdas: vec![],
                tolerance: 0.02,
            },
            Experiment::Limits {
                name: "lebesgue-hat".into(),
                formula: LimitFormula::Lebesgue,
                functions: vec!["hat".into()],
                gammas: vec![2.0],
                p: 2.0,
                lambdas: vec![],
                tolerance: 0.02,
            },
            Experiment::Limits {
                name: "threshold-hat".into(),
                formula: LimitFormula::Threshold,
                functions: vec!["hat".into()],
                gammas: vec![],
                p: 1.0,
                lambdas: vec![0.5, 1.5],
                tolerance: 0.0,
            },
        ],
        "bbm" => vec![Experiment::Bbm { name: "bbm-hat".into(), functions: vec!["hat".into()], p: 1.0, tolerance: 0.02 }],
        "counterexample" => vec![Experiment::Counterexample {
            name: "cantor-growth".into(),
            t: 0.75,
            q: 2.0,
            theta: 0.5,
            js: (2..=8).collect(),
            gamma: 1.0,
            r: 2.0,
            staircase_j: 5,
            staircase_lambdas: grid(0.5, 200.0, 2),
            exponent_tolerance: 0.15,
            boundary: None,
        }],
        "interp" => vec![
            Experiment::Interp {
                name: "gn".into(),
                mode: InterpMode::Gn,
                functions: vec!["hat".into(), "cantor-bump:j=2".into(), "cantor-bump:j=4".into()],
                t: 0.25,
                q: 2.0,
                theta: 0.5,
                gamma: None,
                cantor_js: vec![],
                stability_tolerance: 0.0,
            },
            Experiment::Interp {
                name: "lorentz-interpolation".into(),
                mode: InterpMode::Lorentz,
                functions: vec!["hat".into()],
                t: 0.75,
                q: 2.0,
                theta: 0.5,
                gamma: Some(1.0),
                cantor_js: vec![2, 3, 4, 5, 6],
                stability_tolerance: 0.2,
            },
        ],
        "wavelet" => vec![Experiment::Wavelet {
            name: "haar-sandwich".into(),
            functions: vec!["hat".into(), "cantor:j=4".into(), "indicator:0,1".into()],
            gammas: vec![0.5, 1.0, 2.0],
            levels: vec![8, 9, 10, 11, 12],
            tolerance: 0.1,
        }],
        _ => vec![],
    }
}
