//! Experiment configuration: a TOML file parsed strictly (unknown keys and
//! sections are errors).
//!
//! ```toml
//! [problem]
//! kind = "taylor-benchmark"
//!
//! [method]
//! kind = "misc-surrogate-profit"
//! budget = 5e5
//! seed = 0
//! ```
//!
//! Every other section is optional; see the field docs for defaults.

use std::fmt;
use std::path::PathBuf;

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use mfuq_core::metrics::MonteCarloProtocol;
use mfuq_core::misc::{level_to_knots, AdaptOptions, ProfitKind, StoppingCriteria};
use mfuq_core::model::{FidelityModel, FnFamily, NoiseKind, NoiseSpec, ParamDomain, DEFAULT_COST_BASE};
use mfuq_core::srbf::{CenterMode, PsoConfig, Solver, SrbfConfig, SrbfOptions, SrbfStop};
use serde::{Deserialize, Serialize};

/// Bumped whenever a default or a key changes meaning.
pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) if self.field.is_empty() => write!(f, "config error at line {l}: {}", self.message),
            Some(l) => write!(f, "config error at line {l} ({}): {}", self.field, self.message),
            None if self.field.is_empty() => write!(f, "config error: {}", self.message),
            None => write!(f, "config error ({}): {}", self.field, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub method: MethodConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub misc: MiscSection,
    #[serde(default)]
    pub srbf: SrbfSection,
    #[serde(default)]
    pub reference: ReferenceSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Six Taylor fidelities of `sin(exp(y1 + y2) / 5)` on `[0, 1]²`.
    TaylorBenchmark {
        #[serde(default = "default_cost_base")]
        cost_base: f64,
    },
    /// One expression per fidelity, lowest first, in the variables
    /// `y1, y2, ...`; functions are evalexpr's (`math::sin`, `math::exp`, ...).
    #[serde(alias = "expression")]
    UserDefinedExpression {
        bounds: Vec<[f64; 2]>,
        levels: Vec<String>,
        #[serde(default = "default_cost_base")]
        cost_base: f64,
    },
}

fn default_cost_base() -> f64 {
    DEFAULT_COST_BASE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    MiscQuadratureProfit,
    MiscSurrogateProfit,
    Srbf,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MiscQuadratureProfit => "misc-quadrature-profit",
            Self::MiscSurrogateProfit => "misc-surrogate-profit",
            Self::Srbf => "srbf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub kind: MethodKind,
    /// Stop once the accumulated model cost exceeds this.
    pub budget: f64,
    /// Master seed: testing sets, error points, Monte Carlo, τ samples.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKindConfig {
    #[default]
    MultiplicativeUniform,
    AdditiveGaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// `amplitudes[α-1]`; missing levels are noiseless.
    pub amplitudes: Vec<f64>,
    #[serde(default)]
    pub kind: NoiseKindConfig,
    /// Defaults to the master seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MiscSection {
    /// Testing set size for the surrogate profit.
    pub testing_points: usize,
    pub max_beta: usize,
    /// Also record Monte Carlo moments of the surrogate (`records_mc.csv`).
    pub mc_moments: bool,
    /// Monte Carlo moments on every `mc_every`-th iteration and the last.
    pub mc_every: usize,
}

impl Default for MiscSection {
    fn default() -> Self {
        Self {
            testing_points: 10_000,
            max_beta: 8,
            mc_moments: true,
            mc_every: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    #[default]
    Auto,
    Interpolation,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SolverConfig {
    #[default]
    Qr,
    NormalEquations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SrbfSection {
    /// Points per iteration (`p`).
    pub batch: usize,
    pub theta: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub loocv_taus: usize,
    pub mode: ModeConfig,
    pub solver: SolverConfig,
    pub pso: PsoSection,
}

impl Default for SrbfSection {
    fn default() -> Self {
        let c = SrbfConfig::default();
        Self {
            batch: 1,
            theta: c.theta,
            tau_min: c.tau_min,
            tau_max: c.tau_max,
            loocv_taus: c.loocv_taus,
            mode: ModeConfig::Auto,
            solver: SolverConfig::Qr,
            pso: PsoSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsoSection {
    pub particle_factor: usize,
    pub screening: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub velocity_clamp: f64,
    pub polish: bool,
}

impl Default for PsoSection {
    fn default() -> Self {
        let p = PsoConfig::default();
        Self {
            particle_factor: p.particle_factor,
            screening: p.screening,
            iterations: p.iterations,
            inertia: p.inertia,
            cognitive: p.cognitive,
            social: p.social,
            velocity_clamp: p.velocity_clamp,
            polish: p.polish,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReferenceSection {
    /// CC points per dimension.
    pub order: usize,
    /// Defaults to the highest fidelity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

impl Default for ReferenceSection {
    fn default() -> Self {
        Self { order: 33, level: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsSection {
    /// Points for the discrete errors and the KS statistic.
    pub error_points: usize,
    pub mc_repetitions: usize,
    pub mc_samples: usize,
    /// CC points per dimension for the SRBF moments.
    pub srbf_quadrature_order: usize,
}

impl Default for MetricsSection {
    fn default() -> Self {
        Self {
            error_points: 10_000,
            mc_repetitions: 10,
            mc_samples: 10_000,
            srbf_quadrature_order: 33,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Line of `key` inside `[section]` (1-based), by a plain scan of the text.
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[') {
            current = h.trim_end_matches(']').trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn is_cc_order(order: usize) -> bool {
    (1..=20).any(|b| level_to_knots(b) == order)
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml(source: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(source).map_err(|e| {
            let start = e.span().map_or(0, |s| s.start);
            let message = e.message().trim().to_string();
            let mut line = e.span().map(|_| source[..start].matches('\n').count() + 1);
            let mut field = String::new();
            // Errors inside internally tagged tables span the whole table;
            // point at the offending key instead.
            if let Some(name) = message.strip_prefix("unknown field `").and_then(|r| r.split('`').next()) {
                let first = line.unwrap_or(1);
                if let Some(i) = source.lines().enumerate().skip(first - 1).find_map(|(i, l)| {
                    let rest = l.trim().strip_prefix(name)?;
                    rest.trim_start().starts_with('=').then_some(i)
                }) {
                    line = Some(i + 1);
                    field = name.to_string();
                }
            }
            ConfigError { line, field, message }
        })?;
        cfg.validate_with(Some(source))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with(None)
    }

    fn validate_with(&self, source: Option<&str>) -> Result<(), ConfigError> {
        let fail = |section: &str, key: &str, message: String| ConfigError {
            line: source.and_then(|s| locate(s, section, key)),
            field: if key.is_empty() { section.to_string() } else { format!("{section}.{key}") },
            message,
        };
        let m = &self.method;
        if !(m.budget.is_finite() && m.budget > 0.0) {
            return Err(fail("method", "budget", format!("must be a positive number, got {}", m.budget)));
        }
        let (cost_base, levels) = match &self.problem {
            ProblemConfig::TaylorBenchmark { cost_base } => (*cost_base, 6),
            ProblemConfig::UserDefinedExpression { bounds, levels, cost_base } => {
                if levels.is_empty() {
                    return Err(fail("problem", "levels", "needs at least one expression".into()));
                }
                if bounds.is_empty() {
                    return Err(fail("problem", "bounds", "needs at least one dimension".into()));
                }
                if let Some((n, b)) = bounds.iter().enumerate().find(|(_, b)| !(b[0].is_finite() && b[1].is_finite() && b[0] < b[1])) {
                    return Err(fail("problem", "bounds", format!("dimension {} has bounds {b:?}", n + 1)));
                }
                (*cost_base, levels.len())
            }
        };
        if !(cost_base.is_finite() && cost_base > 0.0) {
            return Err(fail("problem", "cost_base", format!("must be positive, got {cost_base}")));
        }
        if let Some(n) = &self.noise {
            if n.amplitudes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                return Err(fail("noise", "amplitudes", "amplitudes must be finite and >= 0".into()));
            }
            if n.amplitudes.len() > levels {
                return Err(fail("noise", "amplitudes", format!("{} amplitudes for {levels} levels", n.amplitudes.len())));
            }
        }
        let r = &self.reference;
        if !is_cc_order(r.order) {
            return Err(fail("reference", "order", format!("{} is not a nested CC point count (1, 3, 5, 9, 17, 33, ...)", r.order)));
        }
        if let Some(l) = r.level {
            if l == 0 || l > levels {
                return Err(fail("reference", "level", format!("must be in 1..={levels}, got {l}")));
            }
        }
        let x = &self.metrics;
        if x.error_points == 0 || x.mc_repetitions == 0 || x.mc_samples < 4 {
            return Err(fail("metrics", "", "error_points and mc_repetitions must be positive and mc_samples at least 4".into()));
        }
        if !is_cc_order(x.srbf_quadrature_order) {
            return Err(fail("metrics", "srbf_quadrature_order", format!("{} is not a nested CC point count", x.srbf_quadrature_order)));
        }
        if self.misc.max_beta == 0 || self.misc.max_beta > 20 {
            return Err(fail("misc", "max_beta", format!("must be in 1..=20, got {}", self.misc.max_beta)));
        }
        if self.misc.mc_every == 0 {
            return Err(fail("misc", "mc_every", "must be positive".into()));
        }
        if self.method.kind == MethodKind::MiscSurrogateProfit && self.misc.testing_points == 0 {
            return Err(fail("misc", "testing_points", "must be positive for the surrogate profit".into()));
        }
        let s = &self.srbf;
        if s.batch == 0 {
            return Err(fail("srbf", "batch", "must be at least 1".into()));
        }
        self.srbf_config()
            .validate()
            .map_err(|e| fail("srbf", "", e.to_string()))?;
        let p = &s.pso;
        if p.particle_factor == 0 || !(p.inertia.is_finite() && p.cognitive.is_finite() && p.social.is_finite()) || !(p.velocity_clamp > 0.0) {
            return Err(fail("srbf.pso", "", "particle_factor and velocity_clamp must be positive and the coefficients finite".into()));
        }
        if let ProblemConfig::UserDefinedExpression { levels, bounds, .. } = &self.problem {
            let ex = Expressions::compile(levels, bounds.len()).map_err(|(i, e)| fail("problem", "levels", format!("expression {}: {e}", i + 1)))?;
            let center: Vec<f64> = bounds.iter().map(|b| 0.5 * (b[0] + b[1])).collect();
            for i in 0..levels.len() {
                ex.eval(i + 1, &center).map_err(|e| fail("problem", "levels", format!("expression {} at the domain center: {e}", i + 1)))?;
            }
        }
        Ok(())
    }

    pub fn levels(&self) -> usize {
        match &self.problem {
            ProblemConfig::TaylorBenchmark { .. } => 6,
            ProblemConfig::UserDefinedExpression { levels, .. } => levels.len(),
        }
    }

    pub fn reference_level(&self) -> usize {
        self.reference.level.unwrap_or_else(|| self.levels())
    }

    pub fn noise_spec(&self) -> Option<NoiseSpec> {
        self.noise.as_ref().map(|n| NoiseSpec {
            amplitudes: n.amplitudes.clone(),
            seed: n.seed.unwrap_or(self.method.seed),
            kind: match n.kind {
                NoiseKindConfig::MultiplicativeUniform => NoiseKind::MultiplicativeUniform,
                NoiseKindConfig::AdditiveGaussian => NoiseKind::AdditiveGaussian,
            },
        })
    }

    /// A fresh model (empty cache) with noise attached.
    pub fn build_model(&self) -> mfuq_core::Result<FidelityModel> {
        let model = match &self.problem {
            ProblemConfig::TaylorBenchmark { cost_base } => FidelityModel::taylor_benchmark().with_cost_base(*cost_base)?,
            ProblemConfig::UserDefinedExpression { bounds, levels, cost_base } => {
                let domain = ParamDomain::new(bounds.iter().map(|b| (b[0], b[1])).collect())?;
                let ex = Expressions::compile(levels, bounds.len())
                    .map_err(|(i, e)| mfuq_core::Error::Argument(format!("expression {}: {e}", i + 1)))?;
                let n = levels.len();
                FidelityModel::new(domain, FnFamily::new(n, move |a: usize, y: &[f64]| ex.eval(a, y).unwrap_or(f64::NAN)))
                    .with_cost_base(*cost_base)?
            }
        };
        match self.noise_spec() {
            Some(n) => model.with_noise(n),
            None => Ok(model),
        }
    }

    pub fn adapt_options(&self) -> AdaptOptions {
        AdaptOptions {
            profit: match self.method.kind {
                MethodKind::MiscQuadratureProfit => ProfitKind::Quadrature,
                _ => ProfitKind::Surrogate,
            },
            stop: StoppingCriteria {
                max_cost: Some(self.method.budget),
                max_iterations: self.method.max_iterations,
                min_profit: None,
            },
            testing_points: self.misc.testing_points,
            seed: self.method.seed,
            max_beta: self.misc.max_beta,
        }
    }

    pub fn srbf_config(&self) -> SrbfConfig {
        let s = &self.srbf;
        SrbfConfig {
            tau_min: s.tau_min,
            tau_max: s.tau_max,
            theta: s.theta,
            loocv_taus: s.loocv_taus,
            solver: match s.solver {
                SolverConfig::Qr => Solver::Qr,
                SolverConfig::NormalEquations => Solver::NormalEquations,
            },
        }
    }

    pub fn srbf_options(&self) -> SrbfOptions {
        let s = &self.srbf;
        let p = &s.pso;
        SrbfOptions {
            batch: s.batch,
            mode: match s.mode {
                ModeConfig::Auto => CenterMode::Auto,
                ModeConfig::Interpolation => CenterMode::Interpolation,
                ModeConfig::Regression => CenterMode::Regression,
            },
            config: self.srbf_config(),
            pso: PsoConfig {
                particle_factor: p.particle_factor,
                screening: p.screening,
                iterations: p.iterations,
                inertia: p.inertia,
                cognitive: p.cognitive,
                social: p.social,
                velocity_clamp: p.velocity_clamp,
                polish: p.polish,
            },
            seed: self.method.seed,
            stop: SrbfStop {
                max_cost: Some(self.method.budget),
                max_iterations: self.method.max_iterations,
            },
        }
    }

    pub fn monte_carlo(&self) -> MonteCarloProtocol {
        MonteCarloProtocol {
            repetitions: self.metrics.mc_repetitions,
            samples: self.metrics.mc_samples,
            seed: self.method.seed,
        }
    }
}

/// Compiled fidelity expressions.
struct Expressions {
    trees: Vec<Node<DefaultNumericTypes>>,
    names: Vec<String>,
}

impl Expressions {
    fn compile(levels: &[String], dim: usize) -> Result<Self, (usize, String)> {
        let trees = levels
            .iter()
            .enumerate()
            .map(|(i, s)| build_operator_tree(s).map_err(|e| (i, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            trees,
            names: (1..=dim).map(|n| format!("y{n}")).collect(),
        })
    }

    fn eval(&self, level: usize, y: &[f64]) -> Result<f64, String> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (name, v) in self.names.iter().zip(y) {
            ctx.set_value(name.clone(), Value::Float(*v)).map_err(|e| e.to_string())?;
        }
        self.trees[level - 1].eval_number_with_context(&ctx).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\nkind = \"taylor-benchmark\"\n\n[method]\nkind = \"srbf\"\nbudget = 1e6\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.method.seed, 0);
        assert_eq!(c.srbf.theta, 1000);
        assert_eq!(c.reference.order, 33);
        assert_eq!(c.reference_level(), 6);
        assert_eq!(c.output.dir, PathBuf::from("out"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let e = ExperimentConfig::from_toml(&format!("{MINIMAL}bugdet = 3\n")).unwrap_err();
        assert_eq!(e.line, Some(7));
        assert!(e.message.contains("bugdet"), "{e}");
        let e = ExperimentConfig::from_toml(&format!("{MINIMAL}\n[srbf]\nthetta = 3\n")).unwrap_err();
        assert_eq!(e.line, Some(9));
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let e = ExperimentConfig::from_toml(&MINIMAL.replace("1e6", "-1")).unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(6), "method.budget"));
        let e = ExperimentConfig::from_toml(&format!("{MINIMAL}\n[reference]\norder = 10\n")).unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(9), "reference.order"));
    }

    #[test]
    fn expressions_evaluate() {
        let src = "[problem]\nkind = \"user-defined-expression\"\nbounds = [[0.0, 2.0]]\nlevels = [\"y1\", \"math::sin(y1) + y1^2\"]\n\n[method]\nkind = \"misc-surrogate-profit\"\nbudget = 100\n";
        let c = ExperimentConfig::from_toml(src).unwrap();
        let mut m = c.build_model().unwrap();
        assert_eq!(m.evaluate(1, &[1.5]).unwrap(), 1.5);
        assert!((m.evaluate(2, &[1.5]).unwrap() - (1.5f64.sin() + 2.25)).abs() < 1e-15);
        assert_eq!(m.cost(2).unwrap(), 8.0);

        let bad = src.replace("y1^2", "y3");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (Some(4), "problem.levels"));
    }
}
