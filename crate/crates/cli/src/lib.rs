//! Scenario runner behind the `cartan-orbits` binary.

pub mod config;
pub mod report;
pub mod scenarios;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cartan_orbits_core::lie::{stabilizer_of, AlgebraTag, BasisDump};
use cartan_orbits_core::model::DatumJson;
use cartan_orbits_core::{HermitianForm, ReductionDatum, Representation, SymmetricForm};
use serde::Deserialize;

pub use config::{ScenarioConfig, ScenarioParams};
pub use report::{Check, RunReport};
use scenarios::ScenarioOutput;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] cartan_orbits_core::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 2 for usage and config errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// The builtin catalog, alphabetized.
pub const SCENARIOS: [(&str, &str); 10] = [
    ("almost-einstein-flat", "almost Einstein scales on flat charts"),
    ("almost-einstein-null", "almost Einstein scales, null case"),
    ("cr-codim2", "CR structures from a negative tractor, codimension-two zero locus"),
    ("fefferman-transitivity", "Fefferman spaces, orthogonal complex structure"),
    ("flow-identity", "P-types along the model flow"),
    ("g2-stabilizer", "generic 3-forms in dimension 7"),
    ("holonomy-perturbed", "holonomy of flat and perturbed charts"),
    ("model-orbits", "orbit decompositions of homogeneous models"),
    ("projective-metric", "projective structures with a parallel tractor metric"),
    ("stabilizer-dims", "stabilizer algebras of tractor data"),
];

pub fn list_scenarios() -> Vec<String> {
    SCENARIOS.iter().map(|(name, topic)| format!("{name} → {topic}")).collect()
}

fn dispatch(config: &ScenarioConfig) -> Result<ScenarioOutput, CliError> {
    let tol = config.tolerances.apply();
    match &config.params {
        ScenarioParams::ModelOrbits(c) => scenarios::model_orbits(c, &tol),
        ScenarioParams::FlowIdentity(c) => scenarios::flow_identity(c),
        ScenarioParams::StabilizerDims(c) => scenarios::stabilizer_dims(c),
        ScenarioParams::G2Stabilizer(c) => scenarios::g2_stabilizer(c),
        ScenarioParams::FeffermanTransitivity(c) => scenarios::fefferman_transitivity(c, &tol),
        ScenarioParams::AlmostEinsteinFlat(c) => scenarios::almost_einstein_flat(c, &tol),
        ScenarioParams::AlmostEinsteinNull(c) => scenarios::almost_einstein_null(c, &tol),
        ScenarioParams::ProjectiveMetric(c) => scenarios::projective_metric(c, &tol),
        ScenarioParams::CrCodim2(c) => scenarios::cr_codim2(c, &tol),
        ScenarioParams::HolonomyPerturbed(c) => scenarios::holonomy_perturbed(c),
    }
}

/// Runs a scenario without writing anything.
pub fn evaluate(config: &ScenarioConfig) -> Result<(RunReport, Vec<scenarios::Table>), CliError> {
    let start = Instant::now();
    let out = dispatch(config)?;
    let passed = out.checks.iter().all(|c| c.passed);
    let report = RunReport {
        scenario: config.scenario.clone(),
        config: serde_json::to_value(config).map_err(cartan_orbits_core::Error::from)?,
        checks: out.checks,
        passed,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        artifacts: vec![],
        details: out.details,
    };
    Ok((report, out.tables))
}

/// Runs a scenario and writes `<scenario>.json` plus its CSV tables into
/// `out_dir` (or the config's `output_dir`, or the working directory).
pub fn run_scenario(config: &ScenarioConfig, out_dir: Option<&Path>) -> Result<RunReport, CliError> {
    let dir: PathBuf = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    let (mut report, tables) = evaluate(config)?;
    for t in &tables {
        let path = dir.join(format!("{}{}.csv", config.scenario, t.suffix));
        fs::write(&path, &t.csv)?;
        report.artifacts.push(path);
    }
    let json_path = dir.join(format!("{}.json", config.scenario));
    report.artifacts.push(json_path.clone());
    let text = serde_json::to_string_pretty(&report).map_err(cartan_orbits_core::Error::from)?;
    fs::write(&json_path, text)?;
    Ok(report)
}

/// Input of `verify-stabilizer`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizerRequest {
    /// `gl(n)`, `sl(n)`, `sl(n,C)`, `so(p,q)`, `u(p,q)` or `su(p,q)`.
    pub algebra: String,
    /// `vector`, `symmetric_bilinear`, `three_form`, `adjoint`, `ray` or `complex_line`.
    pub representation: String,
    pub datum: DatumJson,
}

pub fn parse_algebra(name: &str) -> Result<AlgebraTag, CliError> {
    let bad = || CliError::Config(format!("unknown algebra `{name}`"));
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    let (head, rest) = compact.split_once('(').ok_or_else(bad)?;
    let args: Vec<&str> = rest.strip_suffix(')').ok_or_else(bad)?.split(',').collect();
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    Ok(match (head, args.as_slice()) {
        ("gl", [n]) => AlgebraTag::GeneralLinear(num(n)?),
        ("sl", [n]) => AlgebraTag::SpecialLinear(num(n)?),
        ("sl", [n, "C"]) => AlgebraTag::SpecialLinearComplex(num(n)?),
        ("so", [p, q]) => AlgebraTag::Orthogonal(SymmetricForm::standard(num(p)?, num(q)?)),
        ("u", [p, q]) => AlgebraTag::Unitary(HermitianForm::standard(num(p)?, num(q)?)),
        ("su", [p, q]) => AlgebraTag::SpecialUnitary(HermitianForm::standard(num(p)?, num(q)?)),
        _ => return Err(bad()),
    })
}

pub fn verify_stabilizer(req: &StabilizerRequest) -> Result<BasisDump, CliError> {
    let tag = parse_algebra(&req.algebra)?;
    let rep = Representation::parse(&req.representation)
        .ok_or_else(|| CliError::Config(format!("unknown representation `{}`", req.representation)))?;
    let datum = ReductionDatum::try_from(&req.datum)?;
    let v = datum.flat();
    let size = tag.size();
    let expected = match rep {
        Representation::Vector | Representation::Ray | Representation::ComplexLine => size,
        Representation::SymmetricBilinear | Representation::Adjoint => size * size,
        Representation::ThreeForm => size * (size - 1) * (size - 2) / 6,
    };
    if v.len() != expected {
        return Err(CliError::Config(format!(
            "datum has {} components, {} needs {expected}",
            v.len(),
            req.representation
        )));
    }
    Ok(stabilizer_of(&tag.basis(), &rep, &v).dump())
}
