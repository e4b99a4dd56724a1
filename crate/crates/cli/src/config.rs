//! Scenario configuration: one JSON object per run.
//!
//! Common keys (`scenario`, `output_dir`, `tolerances`) are read first; the
//! remaining keys must match the named scenario's parameter struct exactly.

use std::path::PathBuf;

use cartan_orbits_core::bgg::Grid;
use cartan_orbits_core::model::{DatumJson, ModelKind, Tolerances};
use cartan_orbits_core::tractor::{MetricSpec, ScalarField, StructureKind};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Overrides of the classifier tolerances.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub zero_tol: Option<f64>,
    pub ambiguity_factor: Option<f64>,
    pub ray_tol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.zero_tol {
            t.zero_tol = v;
        }
        if let Some(v) = self.ambiguity_factor {
            t.ambiguity_factor = v;
        }
        if let Some(v) = self.ray_tol {
            t.ray_tol = v;
        }
        t
    }
}

/// Model family as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Projective,
    Conformal,
    ComplexProjective,
    Cr,
}

impl ModelName {
    /// For projective and complex projective models `signature` is that of
    /// the reducing form, so the model dimension is `p + q - 1`; for
    /// conformal and CR models it is the signature of the model itself.
    pub fn kind(&self, signature: (usize, usize)) -> Result<ModelKind, CliError> {
        let (p, q) = signature;
        match self {
            ModelName::Projective | ModelName::ComplexProjective if p + q < 2 => {
                Err(CliError::Config(format!("signature ({p},{q}) is too small for a {self:?} model")))
            }
            ModelName::Projective => Ok(ModelKind::Projective { n: p + q - 1 }),
            ModelName::ComplexProjective => Ok(ModelKind::ComplexProjective { n: p + q - 1 }),
            ModelName::Conformal => Ok(ModelKind::Conformal { p, q }),
            ModelName::Cr => Ok(ModelKind::Cr { p, q }),
        }
    }
}

/// A reduction datum: a named builtin or an explicit payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatumChoice {
    /// `"positive"`, `"negative"` or `"null"` tractor vectors on conformal
    /// and CR models.
    Builtin(String),
    Explicit(DatumJson),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOrbits {
    pub model: ModelName,
    pub signature: (usize, usize),
    pub datum: Option<DatumChoice>,
    pub samples: usize,
    #[serde(default = "default_per_label")]
    pub per_label: usize,
    pub seed: Option<u64>,
    /// Expected number of distinct orbit labels.
    pub expected_count: Option<usize>,
}

fn default_per_label() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowIdentity {
    pub model: ModelName,
    pub signature: (usize, usize),
    pub datum: Option<DatumChoice>,
    pub samples: usize,
    pub seed: Option<u64>,
    #[serde(default = "default_flow_tol")]
    pub tolerance: f64,
}

fn default_flow_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizerDims {
    /// Conformal signatures for the positive and null tractor cases.
    #[serde(default = "default_conformal_signatures")]
    pub conformal: Vec<(usize, usize)>,
    /// CR signatures for the negative tractor case.
    #[serde(default = "default_cr_signatures")]
    pub cr: Vec<(usize, usize)>,
    #[serde(default = "default_true")]
    pub three_form: bool,
}

fn default_conformal_signatures() -> Vec<(usize, usize)> {
    vec![(2, 1), (1, 1), (2, 2), (3, 0)]
}

fn default_cr_signatures() -> Vec<(usize, usize)> {
    vec![(0, 1), (1, 1), (1, 2)]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Form {
    Split,
    Compact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct G2Stabilizer {
    #[serde(default = "default_g2_form")]
    pub form: G2Form,
    /// Explicit 3-form terms on R^7 such as `"123"` or `"-257"`; overrides `form`.
    pub terms: Option<Vec<String>>,
}

fn default_g2_form() -> G2Form {
    G2Form::Split
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeffermanTransitivity {
    #[serde(default = "default_fefferman_signature")]
    pub signature: (usize, usize),
    #[serde(default = "default_rays")]
    pub samples: usize,
    pub seed: Option<u64>,
}

fn default_fefferman_signature() -> (usize, usize) {
    (1, 1)
}

fn default_rays() -> usize {
    10_000
}

/// Scale `σ` for the flat almost-Einstein scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaChoice {
    /// `"poincare"` for `(1-|x|^2)/2`, `"sphere"` for `(1+|x|^2)/2`,
    /// `"hyperplane"` for `x^1`.
    Builtin(String),
    Explicit(ScalarField),
}

/// Expected outcome; unset fields fall back to the builtin's known values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EinsteinExpectation {
    pub h: Option<f64>,
    pub lambda: Option<f64>,
    /// `"empty"`, `"hypersurface"` or `"isolated"`.
    pub zero_set: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlmostEinsteinFlat {
    pub sigma: SigmaChoice,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub grid: Option<Grid>,
    #[serde(default)]
    pub expected: EinsteinExpectation,
}

fn default_dim() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlmostEinsteinNull {
    /// Flat signature; `σ = g(x, x)/2`.
    pub signature: (usize, usize),
    pub grid: Option<Grid>,
}

/// Chart metric: `"round_sphere"`, `"hyperbolic"`, `"flat"` or an explicit spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChartChoice {
    Builtin(String),
    Explicit(MetricSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectiveMetric {
    pub chart: ChartChoice,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub grid: Option<Grid>,
    #[serde(default = "default_loops")]
    pub loops: usize,
    pub seed: Option<u64>,
}

fn default_loops() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrCodim2 {
    #[serde(default = "default_cr_signature")]
    pub signature: (usize, usize),
    #[serde(default = "default_cr_samples")]
    pub samples: usize,
    #[serde(default = "default_cr_per_label")]
    pub per_label: usize,
    pub seed: Option<u64>,
}

fn default_cr_signature() -> (usize, usize) {
    (0, 1)
}

fn default_cr_samples() -> usize {
    400
}

fn default_cr_per_label() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyPerturbed {
    /// Defaults to a seeded bump perturbation of flat R^3.
    pub chart: Option<MetricSpec>,
    #[serde(default = "default_structure")]
    pub structure: StructureKind,
    #[serde(default = "default_holonomy_loops")]
    pub loops: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    pub seed: Option<u64>,
    /// Expected holonomy dimension; defaults to the full structure algebra.
    pub expected_dim: Option<usize>,
}

fn default_structure() -> StructureKind {
    StructureKind::Conformal
}

fn default_holonomy_loops() -> usize {
    12
}

fn default_radius() -> f64 {
    0.8
}

/// Parameters of one builtin scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ScenarioParams {
    ModelOrbits(ModelOrbits),
    FlowIdentity(FlowIdentity),
    StabilizerDims(StabilizerDims),
    G2Stabilizer(G2Stabilizer),
    FeffermanTransitivity(FeffermanTransitivity),
    AlmostEinsteinFlat(AlmostEinsteinFlat),
    AlmostEinsteinNull(AlmostEinsteinNull),
    ProjectiveMetric(ProjectiveMetric),
    CrCodim2(CrCodim2),
    HolonomyPerturbed(HolonomyPerturbed),
}

impl ScenarioParams {
    pub fn seed(&self) -> Option<u64> {
        match self {
            ScenarioParams::ModelOrbits(c) => c.seed,
            ScenarioParams::FlowIdentity(c) => c.seed,
            ScenarioParams::FeffermanTransitivity(c) => c.seed,
            ScenarioParams::ProjectiveMetric(c) => c.seed,
            ScenarioParams::CrCodim2(c) => c.seed,
            ScenarioParams::HolonomyPerturbed(c) => c.seed,
            _ => None,
        }
    }

    /// Whether the scenario draws random samples and so needs a seed.
    pub fn is_sampling(&self) -> bool {
        matches!(
            self,
            ScenarioParams::ModelOrbits(_)
                | ScenarioParams::FlowIdentity(_)
                | ScenarioParams::FeffermanTransitivity(_)
                | ScenarioParams::ProjectiveMetric(_)
                | ScenarioParams::CrCodim2(_)
                | ScenarioParams::HolonomyPerturbed(_)
        )
    }

    fn set_seed(&mut self, seed: u64) {
        match self {
            ScenarioParams::ModelOrbits(c) => c.seed = Some(seed),
            ScenarioParams::FlowIdentity(c) => c.seed = Some(seed),
            ScenarioParams::FeffermanTransitivity(c) => c.seed = Some(seed),
            ScenarioParams::ProjectiveMetric(c) => c.seed = Some(seed),
            ScenarioParams::CrCodim2(c) => c.seed = Some(seed),
            ScenarioParams::HolonomyPerturbed(c) => c.seed = Some(seed),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub output_dir: Option<PathBuf>,
    pub tolerances: ToleranceOverrides,
    #[serde(flatten)]
    pub params: ScenarioParams,
}

fn take<T: for<'de> Deserialize<'de>>(rest: Map<String, Value>, scenario: &str) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(rest)).map_err(|e| CliError::Config(format!("{scenario}: {e}")))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        let Value::Object(mut rest) = value else {
            return Err(CliError::Config("config must be a JSON object".into()));
        };
        let scenario = match rest.remove("scenario") {
            Some(Value::String(s)) => s,
            Some(_) => return Err(CliError::Config("`scenario` must be a string".into())),
            None => return Err(CliError::Config("missing `scenario`".into())),
        };
        let output_dir = match rest.remove("output_dir") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(PathBuf::from(s)),
            Some(_) => return Err(CliError::Config("`output_dir` must be a string".into())),
        };
        let tolerances = match rest.remove("tolerances") {
            None => ToleranceOverrides::default(),
            Some(v) => serde_json::from_value(v).map_err(|e| CliError::Config(format!("tolerances: {e}")))?,
        };
        let s = scenario.as_str();
        let params = match s {
            "model-orbits" => ScenarioParams::ModelOrbits(take(rest, s)?),
            "flow-identity" => ScenarioParams::FlowIdentity(take(rest, s)?),
            "stabilizer-dims" => ScenarioParams::StabilizerDims(take(rest, s)?),
            "g2-stabilizer" => ScenarioParams::G2Stabilizer(take(rest, s)?),
            "fefferman-transitivity" => ScenarioParams::FeffermanTransitivity(take(rest, s)?),
            "almost-einstein-flat" => ScenarioParams::AlmostEinsteinFlat(take(rest, s)?),
            "almost-einstein-null" => ScenarioParams::AlmostEinsteinNull(take(rest, s)?),
            "projective-metric" => ScenarioParams::ProjectiveMetric(take(rest, s)?),
            "cr-codim2" => ScenarioParams::CrCodim2(take(rest, s)?),
            "holonomy-perturbed" => ScenarioParams::HolonomyPerturbed(take(rest, s)?),
            other => return Err(CliError::Config(format!("unknown scenario `{other}`"))),
        };
        Ok(ScenarioConfig { scenario, output_dir, tolerances, params })
    }

    /// Applies a command-line seed and checks that sampling scenarios have one.
    pub fn resolve_seed(&mut self, cli_seed: Option<u64>) -> Result<(), CliError> {
        if let Some(seed) = cli_seed {
            self.params.set_seed(seed);
        }
        if self.params.is_sampling() && self.params.seed().is_none() {
            return Err(CliError::Config(format!("scenario `{}` samples randomly and needs a `seed`", self.scenario)));
        }
        Ok(())
    }
}
