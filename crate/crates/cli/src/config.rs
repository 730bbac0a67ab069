//! Experiment configuration: a single JSON document with unknown fields
//! rejected, validated into runnable model/constraint/initial-state bundles.

use serde::Deserialize;
use std::f64::consts::PI;

use loja_lab::energy::{
    allen_cahn_model, constraint_hessian_example, graph_area_model, integral_constraint,
    lambda_profile, mass_constraint, revolution_model, revolution_volume_constraint,
    ConstraintModel, CoordinateEnergy, EnergyModel, FreeConstraint, LambdaRule, NamedScalar,
    SphereConstraint,
};
use loja_lab::flow::FlowOptions;
use loja_lab::geometry::{build_chart, retract};
use loja_lab::numerics::Grid1D;

/// A configuration problem: the message names the offending field; the CLI
/// maps it to exit code 64.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Revolution,
    GraphArea,
    AllenCahn,
    SeqQuad,
    ConstraintHessianExample,
    Sphere,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum ConstraintConfig {
    Mass {
        #[serde(default)]
        target: f64,
    },
    Volume {
        nu: f64,
    },
    Integral {
        g: String,
        #[serde(default)]
        target: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqConfig {
    pub n: usize,
    pub lambda_rule: LambdaRuleConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRuleConfig {
    Geometric,
    InverseSquare,
}

impl From<LambdaRuleConfig> for LambdaRule {
    fn from(value: LambdaRuleConfig) -> Self {
        match value {
            LambdaRuleConfig::Geometric => LambdaRule::Geometric,
            LambdaRuleConfig::InverseSquare => LambdaRule::InverseSquare,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    pub dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum InitialConfig {
    Zero,
    Constant { value: f64 },
    Sine { amplitude: f64, mode: usize },
    Tangent { amplitude: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub dt_max: f64,
    #[serde(default = "default_cfl")]
    pub cfl_coeff: f64,
    #[serde(default = "default_tol_pgrad")]
    pub tol_pgrad: f64,
    pub t_max: f64,
    #[serde(default = "default_retract_every")]
    pub retract_every: usize,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_cfl() -> f64 {
    0.2
}

fn default_tol_pgrad() -> f64 {
    1e-8
}

fn default_retract_every() -> usize {
    1
}

fn default_record_every() -> usize {
    10
}

impl FlowConfig {
    pub fn to_options(&self) -> FlowOptions {
        FlowOptions {
            dt_max: self.dt_max,
            cfl_coeff: self.cfl_coeff,
            tol_pgrad: self.tol_pgrad,
            t_max: self.t_max,
            retract_every: self.retract_every,
            record_every: self.record_every,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub radius: f64,
    pub count: usize,
    pub seed: Option<u64>,
    #[serde(default)]
    pub theta_grid: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub lambda_rule: LambdaRuleConfig,
    pub theta: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    #[serde(default)]
    pub emit_svg: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub constraint: Option<ConstraintConfig>,
    #[serde(default)]
    pub seq: Option<SeqConfig>,
    #[serde(default)]
    pub sphere: Option<SphereConfig>,
    #[serde(default)]
    pub initial: Option<InitialConfig>,
    #[serde(default)]
    pub flow: Option<FlowConfig>,
    #[serde(default)]
    pub analysis: Option<AnalysisConfig>,
    #[serde(default)]
    pub counterexample: Option<SweepConfig>,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn flow_options(&self) -> Result<FlowOptions, ConfigError> {
        match &self.flow {
            Some(f) => Ok(f.to_options()),
            None => invalid("flow: section required for this command"),
        }
    }

    pub fn analysis(&self) -> Result<&AnalysisConfig, ConfigError> {
        match &self.analysis {
            Some(a) => Ok(a),
            None => invalid("analysis: section required for this command"),
        }
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        match self.analysis.as_ref().and_then(|a| a.seed) {
            Some(s) => Ok(s),
            None => invalid("analysis.seed: required whenever sampling is requested"),
        }
    }

    pub fn sweep(&self) -> Result<&SweepConfig, ConfigError> {
        let sweep = match &self.counterexample {
            Some(s) => s,
            None => return invalid("counterexample: section required for this command"),
        };
        if sweep.ns.is_empty() {
            return invalid("counterexample.ns: must not be empty");
        }
        Ok(sweep)
    }

    fn grid(&self) -> Result<Grid1D, ConfigError> {
        let g = match &self.grid {
            Some(g) => g,
            None => return invalid("grid: section required for this model"),
        };
        Grid1D::new(g.a, g.b, g.n).map_err(|e| ConfigError(format!("grid: {e}")))
    }

    fn seq(&self) -> Result<&SeqConfig, ConfigError> {
        match &self.seq {
            Some(s) if s.n >= 1 => Ok(s),
            Some(_) => invalid("seq.n: must be at least 1"),
            None => invalid("seq: section required for this model"),
        }
    }

    fn grid_constraint(&self, grid: Grid1D) -> Result<Box<dyn ConstraintModel>, ConfigError> {
        let c = match &self.constraint {
            Some(c) => c,
            None => return invalid("constraint: section required for this model"),
        };
        Ok(match c {
            ConstraintConfig::Mass { target } => Box::new(mass_constraint(grid, *target)),
            ConstraintConfig::Volume { nu } => Box::new(revolution_volume_constraint(grid, *nu)),
            ConstraintConfig::Integral { g, target } => {
                let named = match g.as_str() {
                    "identity" => NamedScalar::Identity,
                    "square" => NamedScalar::Square,
                    "constant" => NamedScalar::Constant,
                    other => {
                        return invalid(format!(
                            "constraint.g: unknown function '{other}' (identity, square, constant)"
                        ))
                    }
                };
                Box::new(integral_constraint(grid, Box::new(named), *target))
            }
        })
    }

    /// Build the model pair plus the canonical chart base point (before
    /// retraction).
    pub fn build_problem(&self) -> Result<Problem, ConfigError> {
        let (energy, constraint, base): (Box<dyn EnergyModel>, Box<dyn ConstraintModel>, Vec<f64>) =
            match self.model {
                ModelKind::Revolution => {
                    let grid = self.grid()?;
                    (
                        Box::new(revolution_model(grid)),
                        self.grid_constraint(grid)?,
                        vec![0.0; grid.n()],
                    )
                }
                ModelKind::GraphArea => {
                    let grid = self.grid()?;
                    (
                        Box::new(graph_area_model(grid)),
                        self.grid_constraint(grid)?,
                        vec![0.0; grid.n()],
                    )
                }
                ModelKind::AllenCahn => {
                    let grid = self.grid()?;
                    (
                        Box::new(allen_cahn_model(grid)),
                        self.grid_constraint(grid)?,
                        vec![0.0; grid.n()],
                    )
                }
                ModelKind::SeqQuad => {
                    if self.constraint.is_some() {
                        return invalid(
                            "constraint: seq_quad is unconstrained; remove the section",
                        );
                    }
                    let seq = self.seq()?;
                    let model = loja_lab::energy::SeqQuadModel::new(seq.n, seq.lambda_rule.into());
                    let free = FreeConstraint::for_model(&model);
                    (Box::new(model), Box::new(free), vec![0.0; seq.n])
                }
                ModelKind::ConstraintHessianExample => {
                    if self.constraint.is_some() {
                        return invalid(
                            "constraint: constraint_hessian_example carries its own constraint",
                        );
                    }
                    let seq = self.seq()?;
                    let lambda = lambda_profile(seq.lambda_rule.into(), seq.n);
                    let (e, g) = constraint_hessian_example(lambda)
                        .map_err(|e| ConfigError(format!("seq: {e}")))?;
                    (Box::new(e), Box::new(g), vec![0.0; seq.n + 1])
                }
                ModelKind::Sphere => {
                    if self.constraint.is_some() {
                        return invalid("constraint: sphere carries its own constraint");
                    }
                    let dim = self.sphere.as_ref().map_or(3, |s| s.dim);
                    let g = SphereConstraint::new(dim)
                        .map_err(|e| ConfigError(format!("sphere.dim: {e}")))?;
                    let e = CoordinateEnergy::new(dim, dim - 1)
                        .map_err(|e| ConfigError(format!("sphere.dim: {e}")))?;
                    let mut pole = vec![0.0; dim];
                    pole[dim - 1] = 1.0;
                    (Box::new(e), Box::new(g), pole)
                }
            };
        Ok(Problem {
            energy,
            constraint,
            base,
            grid: self.grid.as_ref().map(|_| self.grid()).transpose()?,
        })
    }

    /// Initial state for flow-driven commands; defaults to the model's base
    /// point when the section is absent.
    pub fn build_initial(&self, problem: &Problem) -> Result<Vec<f64>, ConfigError> {
        let spec = match &self.initial {
            Some(i) => i,
            None => return Ok(problem.base.clone()),
        };
        let dim = problem.energy.space().dim;
        match spec {
            InitialConfig::Zero => Ok(problem.base.clone()),
            InitialConfig::Constant { value } => {
                if !value.is_finite() {
                    return invalid("initial.value: must be finite");
                }
                Ok(problem.base.iter().map(|b| b + value).collect())
            }
            InitialConfig::Sine { amplitude, mode } => {
                let grid = match problem.grid {
                    Some(g) => g,
                    None => return invalid("initial.kind = sine needs a grid model"),
                };
                if *mode == 0 {
                    return invalid("initial.mode: must be at least 1");
                }
                let len = grid.b() - grid.a();
                let k = *mode as f64;
                let a = grid.a();
                let amp = *amplitude;
                Ok(grid
                    .field_from_fn(|x| amp * (k * PI * (x - a) / len).sin())
                    .into_values())
            }
            InitialConfig::Tangent { amplitude } => {
                let seed = self.seed()?;
                let retracted = retract(problem.constraint.as_ref(), &problem.base)
                    .map_err(|e| ConfigError(format!("initial: retraction of base point: {e}")))?;
                let chart = build_chart(problem.constraint.as_ref(), &retracted)
                    .map_err(|e| ConfigError(format!("initial: chart at base point: {e}")))?;
                let d = chart.dim_v0();
                use rand::Rng;
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x7461_6e67);
                let mut dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm == 0.0 {
                    return invalid("initial: degenerate tangent direction");
                }
                for x in dir.iter_mut() {
                    *x *= amplitude / norm;
                }
                let u = chart.embed(&dir, &vec![0.0; chart.dim_v1()]);
                debug_assert_eq!(u.len(), dim);
                Ok(u)
            }
        }
    }
}

/// Runnable bundle assembled from a validated config.
pub struct Problem {
    pub energy: Box<dyn EnergyModel>,
    pub constraint: Box<dyn ConstraintModel>,
    /// Canonical chart base point (not yet retracted).
    pub base: Vec<f64>,
    pub grid: Option<Grid1D>,
}
