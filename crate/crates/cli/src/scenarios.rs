//! The builtin scenarios. Each returns its checks, a JSON details block and
//! CSV tables; writing them out is the runner's job.

use std::collections::BTreeMap;

use cartan_orbits_core::bgg::{
    curved_orbit_decompose, einstein_verify, projective_metric_scenario, Grid, ParallelSection, SectionField,
    EINSTEIN_MARGIN, PATH_TOL,
};
use cartan_orbits_core::forms::{Form, HermitianForm, SymmetricForm};
use cartan_orbits_core::lie::three_form::{compact_g2_form, split_g2_form, ThreeForm};
use cartan_orbits_core::lie::{general_linear, intersect_algebras, orthogonal, stabilizer_of, AlgebraElement, GroupElement};
use cartan_orbits_core::model::{
    flow_identity_check, orbit_decompose_grid, orbit_dimension, p_type, random_algebra_element, random_group_element,
    sample_uniform, Label, ModelKind, Sampler, Tolerances,
};
use cartan_orbits_core::report::{StrataReport, StratumGeometry};
use cartan_orbits_core::tractor::{
    holonomy_algebra, normality_residual, sample_directions, ChartGeometry, LoopFamily, MetricSpec, Monomial,
    ScalarField, StructureKind, TractorConnection,
};
use cartan_orbits_core::{HomogeneousModel, ReductionDatum, Representation};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::*;
use crate::report::Check;
use crate::CliError;

/// A CSV table; written as `<scenario><suffix>.csv`.
#[derive(Debug, Clone)]
pub struct Table {
    pub suffix: String,
    pub csv: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub checks: Vec<Check>,
    pub details: Value,
    pub tables: Vec<Table>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn strata_table(report: &StrataReport, suffix: &str) -> Result<Table, CliError> {
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    Ok(Table { suffix: suffix.into(), csv })
}

fn simple_table(header: &[&str], rows: Vec<Vec<String>>, suffix: &str) -> Result<Table, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(cartan_orbits_core::Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(cartan_orbits_core::Error::from)?;
    }
    let csv = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Table { suffix: suffix.into(), csv })
}

fn seed_of(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Config("missing seed".into()))
}

fn unit(m: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(m);
    v[i] = 1.0;
    v
}

/// Positive, negative and null tractor vectors in standard coordinates.
fn builtin_vector(kind: ModelKind, name: &str) -> Result<DVector<f64>, CliError> {
    let (m, neg) = match kind {
        ModelKind::Conformal { p, q } => (p + q + 2, p + q + 1),
        // real parts of the complex coordinates come first
        ModelKind::Cr { p, q } => (2 * (p + q + 2), p + q + 1),
        _ => return Err(CliError::Config(format!("builtin datum `{name}` needs a conformal or CR model"))),
    };
    match name {
        "positive" => Ok(unit(m, 0)),
        "negative" => Ok(unit(m, neg)),
        "null" => Ok(unit(m, 0) + unit(m, neg)),
        other => Err(CliError::Config(format!("unknown builtin datum `{other}`"))),
    }
}

/// Model and reduction datum of a config; forms default to the standard
/// form of the given signature, tractor vectors to positive (conformal) or
/// negative (CR).
pub fn model_and_datum(
    model: ModelName,
    signature: (usize, usize),
    datum: &Option<DatumChoice>,
) -> Result<(HomogeneousModel, ReductionDatum), CliError> {
    let kind = model.kind(signature)?;
    let hm = HomogeneousModel::new(kind)?;
    let (p, q) = signature;
    let d = match (datum, model) {
        (Some(DatumChoice::Explicit(j)), _) => ReductionDatum::try_from(j)?,
        (Some(DatumChoice::Builtin(name)), _) => ReductionDatum::Vector(builtin_vector(kind, name)?),
        (None, ModelName::Projective) => ReductionDatum::SymmetricForm(SymmetricForm::standard(p, q)),
        (None, ModelName::ComplexProjective) => ReductionDatum::HermitianForm(HermitianForm::standard(p, q)),
        (None, ModelName::Conformal) => ReductionDatum::Vector(builtin_vector(kind, "positive")?),
        (None, ModelName::Cr) => ReductionDatum::Vector(builtin_vector(kind, "negative")?),
    };
    d.validate(&hm)?;
    Ok((hm, d))
}

fn strata_details(report: &StrataReport) -> Value {
    json!({ "scenario": report.scenario, "summary": report.summary, "samples": report.samples.len() })
}

pub fn model_orbits(c: &ModelOrbits, tol: &Tolerances) -> Result<ScenarioOutput, CliError> {
    let (m, d) = model_and_datum(c.model, c.signature, &c.datum)?;
    let seed = seed_of(c.seed)?;
    let r = orbit_decompose_grid(&m, &d, &Sampler::Stratified { per_label: c.per_label }, c.samples, seed, tol)?;
    let mut checks = vec![
        Check::holds("observed labels equal model orbits", r.labels_match()),
        Check::holds("zero loci monotone", r.summary.monotone_zero_loci),
    ];
    if let Some(n) = c.expected_count {
        checks.push(Check::count("orbit count", r.summary.observed_labels.len(), n));
    }
    Ok(ScenarioOutput { checks, details: strata_details(&r), tables: vec![strata_table(&r, "")?] })
}

pub fn flow_identity(c: &FlowIdentity) -> Result<ScenarioOutput, CliError> {
    let (m, d) = model_and_datum(c.model, c.signature, &c.datum)?;
    let seed = seed_of(c.seed)?;
    let h = d.stabilizer(&m);
    let tag = m.tag().clone();
    let residuals: Vec<f64> = (0..c.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i as u64);
            let u = GroupElement::unchecked(random_group_element(&h, 1.0, &mut rng), tag.clone());
            let mut x = random_algebra_element(&m.g_minus, 1.0, &mut rng);
            let norm = x.norm();
            if norm > 1.0 {
                x /= norm;
            }
            flow_identity_check(&m, &d, &u, &AlgebraElement::unchecked(x, tag.clone()))
        })
        .collect::<Result<_, _>>()?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    let rows = residuals.iter().enumerate().map(|(i, r)| vec![i.to_string(), r.to_string()]).collect();
    Ok(ScenarioOutput {
        checks: vec![Check::below("max flow identity residual", worst, c.tolerance)],
        details: json!({ "model": m.kind, "datum": d.variant_name(), "samples": c.samples, "max_residual": worst }),
        tables: vec![simple_table(&["index", "residual"], rows, "")?],
    })
}

fn so_dim(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

pub fn stabilizer_dims(c: &StabilizerDims) -> Result<ScenarioOutput, CliError> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut record = |case: String, m: &HomogeneousModel, d: &ReductionDatum, expected: usize| {
        let h = d.stabilizer(m);
        let closure = h.closure_residual();
        checks.push(Check::count(format!("{case} dimension"), h.dim(), expected));
        checks.push(Check::below(format!("{case} closure residual"), closure, 1e-8));
        rows.push(vec![case, h.tag.name(), expected.to_string(), h.dim().to_string(), closure.to_string()]);
    };
    for &(p, q) in &c.conformal {
        let kind = ModelKind::Conformal { p, q };
        let m = HomogeneousModel::new(kind)?;
        let n = p + q;
        let pos = ReductionDatum::Vector(builtin_vector(kind, "positive")?);
        record(format!("conformal ({p},{q}) positive"), &m, &pos, so_dim(n + 1));
        let null = ReductionDatum::Vector(builtin_vector(kind, "null")?);
        record(format!("conformal ({p},{q}) null"), &m, &null, so_dim(n) + n);
    }
    for &(p, q) in &c.cr {
        let kind = ModelKind::Cr { p, q };
        let m = HomogeneousModel::new(kind)?;
        let neg = ReductionDatum::Vector(builtin_vector(kind, "negative")?);
        let k = p + q + 1;
        record(format!("cr ({p},{q}) negative"), &m, &neg, k * k - 1);
    }
    if c.three_form {
        let m = HomogeneousModel::conformal(2, 3)?;
        record("conformal (2,3) split 3-form".into(), &m, &ReductionDatum::ThreeForm(split_g2_form()), 14);
    }
    let details = json!({ "cases": rows.len() });
    let table = simple_table(&["case", "algebra", "expected_dim", "dim", "closure_residual"], rows, "")?;
    Ok(ScenarioOutput { checks, details, tables: vec![table] })
}

pub fn g2_stabilizer(c: &G2Stabilizer) -> Result<ScenarioOutput, CliError> {
    let phi = match (&c.terms, c.form) {
        (Some(t), _) => ThreeForm::parse_terms(7, t)?,
        (None, G2Form::Split) => split_g2_form(),
        (None, G2Form::Compact) => compact_g2_form(),
    };
    let full = stabilizer_of(&general_linear(7), &Representation::ThreeForm, &phi.coeffs);
    let mut checks = vec![
        Check::count("gl(7) stabilizer dimension", full.dim(), 14),
        Check::below("gl(7) stabilizer closure residual", full.closure_residual(), 1e-8),
    ];
    let mut details = json!({ "gl7": full.dump() });
    if let Ok(metric) = phi.induced_metric() {
        let form = SymmetricForm::with_tolerance(metric, 1e-9)?;
        let sig = form.signature();
        let inside = intersect_algebras(&full, &orthogonal(&form))?;
        checks.push(Check::count("stabilizer preserves the induced metric", inside.dim(), full.dim()));
        details["induced_signature"] = json!(sig);
    }
    Ok(ScenarioOutput { checks, details, tables: vec![] })
}

/// Orthogonal complex structure rotating consecutive coordinate pairs.
fn standard_complex_structure(p: usize, q: usize) -> Result<DMatrix<f64>, CliError> {
    if p.is_multiple_of(2) || q.is_multiple_of(2) {
        return Err(CliError::Config(format!("signature ({p},{q}) needs p and q odd for a pairwise complex structure")));
    }
    let m = p + q + 2;
    let mut j = DMatrix::zeros(m, m);
    for k in (0..m).step_by(2) {
        j[(k + 1, k)] = 1.0;
        j[(k, k + 1)] = -1.0;
    }
    Ok(j)
}

pub fn fefferman_transitivity(c: &FeffermanTransitivity, tol: &Tolerances) -> Result<ScenarioOutput, CliError> {
    let (p, q) = c.signature;
    let m = HomogeneousModel::conformal(p, q)?;
    let d = ReductionDatum::ComplexStructure(standard_complex_structure(p, q)?);
    d.validate(&m)?;
    let seed = seed_of(c.seed)?;
    let labels: Vec<Label> = (0..c.samples)
        .into_par_iter()
        .map(|i| {
            let x = sample_uniform(&m, &mut rng_for(seed, i as u64));
            p_type(&m, &d, &x, tol).map(|l| l.label)
        })
        .collect::<Result<_, _>>()?;
    let exceptions = labels.iter().filter(|l| **l != Label::Single).count();
    let mut rng = rng_for(seed, u64::MAX);
    let probes = 10;
    let full_orbits = (0..probes)
        .map(|_| orbit_dimension(&m, &d, &sample_uniform(&m, &mut rng)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|dim| *dim == m.dim())
        .count();
    let rows = labels.iter().enumerate().map(|(i, l)| vec![i.to_string(), l.as_str().to_string()]).collect();
    Ok(ScenarioOutput {
        checks: vec![
            Check::count("rays not of the single P-type", exceptions, 0),
            Check::count("probe points with an open orbit", full_orbits, probes),
        ],
        details: json!({ "signature": [p, q], "samples": c.samples, "exceptions": exceptions }),
        tables: vec![simple_table(&["index", "label"], rows, "")?],
    })
}

fn quadratic(n: usize, c0: f64, signs: &[f64]) -> ScalarField {
    let mut terms = vec![Monomial { coeff: c0, powers: vec![0; n] }];
    for (i, s) in signs.iter().enumerate() {
        let mut powers = vec![0; n];
        powers[i] = 2;
        terms.push(Monomial { coeff: 0.5 * s, powers });
    }
    ScalarField::Polynomial { terms }
}

/// Builtin scales with their known `h(s, s)`, Einstein constant and zero set.
fn builtin_sigma(name: &str, n: usize) -> Result<(ScalarField, EinsteinExpectation), CliError> {
    let k = n as f64 - 1.0;
    let e = |h: f64, lambda: f64, z: &str| EinsteinExpectation { h: Some(h), lambda: Some(lambda), zero_set: Some(z.into()) };
    Ok(match name {
        "poincare" => (quadratic(n, 0.5, &vec![-1.0; n]), e(1.0, -k, "hypersurface")),
        "sphere" => (quadratic(n, 0.5, &vec![1.0; n]), e(-1.0, k, "empty")),
        "hyperplane" => {
            let mut powers = vec![0; n];
            powers[0] = 1;
            (ScalarField::Polynomial { terms: vec![Monomial { coeff: 1.0, powers }] }, e(1.0, -k, "hypersurface"))
        }
        other => return Err(CliError::Config(format!("unknown builtin sigma `{other}`"))),
    })
}

/// Shared body of the two almost-Einstein scenarios: decomposes the grid by
/// the parallel section through `D σ`, fills per-sample Einstein residuals
/// away from the zero set. Returns `h(s, s)`, the report, `λ` and the worst
/// residual.
fn almost_einstein(
    chart: &ChartGeometry,
    sigma: &ScalarField,
    lambda: Option<f64>,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<(f64, StrataReport, f64, f64), CliError> {
    let conn = TractorConnection::new(chart.clone());
    let n = chart.dim();
    let s = ParallelSection::from_density(conn, grid.center(), sigma)?;
    let h = s.g_type().ok_or_else(|| CliError::Config("scale needs a conformal chart".into()))?;
    let lambda = lambda.unwrap_or(-h * (n as f64 - 1.0));
    let mut report = curved_orbit_decompose(SectionField::Tractor(&s), grid, tol)?;
    let residuals: Vec<Option<f64>> = report
        .samples
        .par_iter()
        .map(|r| {
            if r.diagnostics.value.abs() < EINSTEIN_MARGIN {
                return Ok(None);
            }
            einstein_verify(chart, &s, lambda, std::slice::from_ref(&r.coords), EINSTEIN_MARGIN).map(Some)
        })
        .collect::<Result<_, _>>()?;
    let mut worst = 0.0f64;
    for (r, e) in report.samples.iter_mut().zip(residuals) {
        r.diagnostics.einstein_residual = e;
        worst = worst.max(e.unwrap_or(0.0));
    }
    Ok((h, report, lambda, worst))
}

fn invariant_drift(report: &StrataReport, h: f64) -> f64 {
    report.samples.iter().filter_map(|r| r.diagnostics.invariant).fold(0.0f64, |a, v| a.max((v - h).abs()))
}

/// Geometry of the measure-zero strata observed in a report.
fn zero_geometry(report: &StrataReport) -> BTreeMap<String, StratumGeometry> {
    report
        .summary
        .geometry
        .iter()
        .filter(|(l, _)| matches!(l.as_str(), "ZERO" | "HYPERSURFACE" | "ISOLATED_PLUS" | "ISOLATED_MINUS"))
        .map(|(l, g)| (l.clone(), *g))
        .collect()
}

fn zero_set_matches(report: &StrataReport, expected: &str) -> Result<bool, CliError> {
    let geo = zero_geometry(report);
    Ok(match expected {
        "empty" => geo.is_empty(),
        "hypersurface" => !geo.is_empty() && geo.values().all(|g| *g == StratumGeometry::Hypersurface),
        "isolated" => !geo.is_empty() && geo.values().all(|g| *g == StratumGeometry::Isolated),
        other => return Err(CliError::Config(format!("unknown zero set `{other}`"))),
    })
}

pub fn almost_einstein_flat(c: &AlmostEinsteinFlat, tol: &Tolerances) -> Result<ScenarioOutput, CliError> {
    let n = c.dim;
    let (sigma, builtin) = match &c.sigma {
        SigmaChoice::Builtin(name) => builtin_sigma(name, n)?,
        SigmaChoice::Explicit(f) => (f.clone(), EinsteinExpectation::default()),
    };
    let expected = EinsteinExpectation {
        h: c.expected.h.or(builtin.h),
        lambda: c.expected.lambda.or(builtin.lambda),
        zero_set: c.expected.zero_set.clone().or(builtin.zero_set),
    };
    let grid = c.grid.clone().unwrap_or_else(|| Grid::cube(n, 2.0, 9));
    let chart = ChartGeometry::new(MetricSpec::flat(n, 0), StructureKind::Conformal)?;
    let (h, report, lambda, worst) = almost_einstein(&chart, &sigma, expected.lambda, &grid, tol)?;
    let mut checks = Vec::new();
    if let Some(eh) = expected.h {
        checks.push(Check::within("h(s,s)", h, eh, 1e-8));
    }
    checks.push(Check::below("h(s,s) drift over the grid", invariant_drift(&report, h), PATH_TOL));
    checks.push(Check::below("Einstein residual", worst, 1e-6));
    if h.abs() > 1e-8 {
        checks.push(Check::holds("sign(lambda) = -sign(h(s,s))", lambda.signum() == -h.signum()));
    }
    if let Some(z) = &expected.zero_set {
        checks.push(Check::holds(format!("zero set is {z}"), zero_set_matches(&report, z)?));
    }
    let zero_distance = |f: &dyn Fn(&[f64]) -> f64| {
        report.samples.iter().filter(|r| r.label == "ZERO").map(|r| f(&r.coords).abs()).fold(0.0f64, f64::max)
    };
    match &c.sigma {
        SigmaChoice::Builtin(s) if s == "poincare" => {
            let d = zero_distance(&|x| x.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0);
            checks.push(Check::below("zero set distance from the unit sphere", d, 1e-8));
        }
        SigmaChoice::Builtin(s) if s == "hyperplane" => {
            let d = zero_distance(&|x| x[0]);
            checks.push(Check::below("zero set distance from the hyperplane x0 = 0", d, 1e-8));
        }
        _ => {}
    }
    checks.push(Check::holds("zero loci monotone", report.summary.monotone_zero_loci));
    let details = json!({
        "h": h,
        "lambda": lambda,
        "einstein_residual": worst,
        "zero_geometry": zero_geometry(&report),
        "strata": strata_details(&report),
    });
    Ok(ScenarioOutput { checks, details, tables: vec![strata_table(&report, "")?] })
}

pub fn almost_einstein_null(c: &AlmostEinsteinNull, tol: &Tolerances) -> Result<ScenarioOutput, CliError> {
    let (p, q) = c.signature;
    let n = p + q;
    let mut signs = vec![1.0; p];
    signs.extend(vec![-1.0; q]);
    let sigma = quadratic(n, 0.0, &signs);
    let grid = c.grid.clone().unwrap_or_else(|| Grid::cube(n, 1.0, if n <= 2 { 21 } else { 9 }));
    let chart = ChartGeometry::new(MetricSpec::flat(p, q), StructureKind::Conformal)?;
    let (h, report, lambda, worst) = almost_einstein(&chart, &sigma, Some(0.0), &grid, tol)?;
    let geo = zero_geometry(&report);
    let isolated = geo.iter().any(|(l, g)| l.starts_with("ISOLATED") && *g == StratumGeometry::Isolated);
    let mut checks = vec![
        Check::within("h(s,s)", h, 0.0, 1e-8),
        Check::below("h(s,s) drift over the grid", invariant_drift(&report, h), PATH_TOL),
        Check::below("Ricci-flat residual", worst, 1e-6),
        Check::holds("isolated zero stratum present", isolated),
        Check::holds("zero loci monotone", report.summary.monotone_zero_loci),
    ];
    if p > 0 && q > 0 {
        let cone = geo.get("HYPERSURFACE") == Some(&StratumGeometry::Hypersurface);
        checks.push(Check::holds("hypersurface zero stratum present", cone));
    }
    let details = json!({
        "h": h,
        "lambda": lambda,
        "einstein_residual": worst,
        "zero_geometry": geo,
        "strata": strata_details(&report),
    });
    Ok(ScenarioOutput { checks, details, tables: vec![strata_table(&report, "")?] })
}

pub fn projective_metric(c: &ProjectiveMetric, tol: &Tolerances) -> Result<ScenarioOutput, CliError> {
    let n = c.dim;
    let (metric, half) = match &c.chart {
        ChartChoice::Builtin(name) => match name.as_str() {
            "round_sphere" => (MetricSpec::round_sphere(n), 1.0),
            "hyperbolic" => (MetricSpec::poincare_ball(n), 0.4),
            "flat" => (MetricSpec::flat(n, 0), 1.0),
            other => return Err(CliError::Config(format!("unknown builtin chart `{other}`"))),
        },
        ChartChoice::Explicit(m) => {
            let half = m.default_domain().iter().map(|(a, b)| 0.5 * (b - a)).fold(f64::INFINITY, f64::min);
            (m.clone(), 0.5 * half)
        }
    };
    let chart = ChartGeometry::new(metric, StructureKind::Projective)?;
    let grid = c.grid.clone().unwrap_or_else(|| Grid::cube(chart.dim(), half, 5));
    let seed = seed_of(c.seed)?;
    let r = projective_metric_scenario(&chart, &grid, c.loops, seed, tol)?;
    let lambda = r.einstein_constant;
    let mut checks = vec![Check::below("Einstein residual of the chart metric", r.einstein_residual, 1e-5)];
    let mut tables = vec![];
    if lambda.abs() < 1e-9 {
        checks.push(Check::at_least("parallel metric family dimension", r.parallel_metric_dim as f64, 2.0));
    } else {
        let sig = r.signature.expect("metric found for nonzero Einstein constant");
        let expected_negative = if lambda > 0.0 { 0 } else { 1 };
        checks.push(Check::count("negative directions of the parallel tractor metric", sig.negative, expected_negative));
        checks.push(Check::count("null directions of the parallel tractor metric", sig.null, 0));
        checks.push(Check::below("parallel family residual", r.kernel_residual.unwrap_or(f64::INFINITY), 1e-6));
        checks.push(Check::below("transport residual", r.transport_residual.unwrap_or(f64::INFINITY), 1e-7));
        if let Some(strata) = &r.strata {
            checks.push(Check::count("open orbits met by the chart", strata.summary.observed_labels.len(), 1));
            tables.push(strata_table(strata, "")?);
        }
    }
    let mut details = serde_json::to_value(&r).map_err(cartan_orbits_core::Error::from)?;
    if let Some(s) = details.get_mut("strata") {
        if let Some(strata) = &r.strata {
            *s = strata_details(strata);
        }
    }
    Ok(ScenarioOutput { checks, details, tables })
}

pub fn cr_codim2(c: &CrCodim2, tol: &Tolerances) -> Result<ScenarioOutput, CliError> {
    let (m, d) = model_and_datum(ModelName::Cr, c.signature, &Some(DatumChoice::Builtin("negative".into())))?;
    let seed = seed_of(c.seed)?;
    let r = orbit_decompose_grid(&m, &d, &Sampler::Stratified { per_label: c.per_label }, c.samples, seed, tol)?;
    let zero: Vec<_> = r.samples.iter().filter(|s| s.label == "ZERO").collect();
    let rank_two = zero.iter().filter(|s| s.diagnostics.jacobian_rank == Some(2)).count();
    let checks = vec![
        Check::holds("observed labels equal model orbits", r.labels_match()),
        Check::count("orbit count", r.summary.observed_labels.len(), 2),
        Check::count("zero samples with two independent constraints", rank_two, zero.len()),
        Check::holds("zero stratum has codimension two", r.summary.geometry.get("ZERO") == Some(&StratumGeometry::Codimension2)),
    ];
    Ok(ScenarioOutput { checks, details: strata_details(&r), tables: vec![strata_table(&r, "")?] })
}

fn default_bump() -> MetricSpec {
    MetricSpec::bump(MetricSpec::flat(3, 0), 0.3, vec![0.1, -0.2, 0.15], 0.8, 17)
}

pub fn holonomy_perturbed(c: &HolonomyPerturbed) -> Result<ScenarioOutput, CliError> {
    let metric = c.chart.clone().unwrap_or_else(default_bump);
    let chart = ChartGeometry::new(metric, c.structure)?;
    let n = chart.dim();
    let conn = TractorConnection::new(chart);
    let seed = seed_of(c.seed)?;
    let base = vec![0.0; n];
    let family = LoopFamily::seeded(&conn, &base, c.loops, c.radius, seed);
    let hol = holonomy_algebra(&conn, &base, &family, 2 * c.loops.max(1), 1e-6)?;
    let full = match c.structure {
        StructureKind::Conformal => so_dim(n + 2),
        StructureKind::Projective => (n + 1) * (n + 1),
    };
    let expected = c.expected_dim.unwrap_or(full);
    let normality = normality_residual(&conn, &base, &sample_directions(n, 8, seed))?;
    let checks = vec![
        Check::count("holonomy algebra dimension", hol.basis.dim(), expected),
        Check::below("holonomy closure residual", hol.closure_residual, 1e-8),
        Check::below("normality residual", normality, 1e-4),
    ];
    let rows = hol
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let log_norm = s.log.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            vec![i.to_string(), log_norm.to_string(), s.metric_residual.map(|v| v.to_string()).unwrap_or_default()]
        })
        .collect();
    let details = json!({
        "dimension": hol.basis.dim(),
        "full_algebra_dimension": full,
        "max_log_norm": hol.max_log_norm,
        "max_curvature_norm": hol.max_curvature_norm,
        "closure_residual": hol.closure_residual,
        "normality_residual": normality,
    });
    Ok(ScenarioOutput { checks, details, tables: vec![simple_table(&["loop", "log_norm", "metric_residual"], rows, "")?] })
}
