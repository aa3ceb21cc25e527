//! Scenario files, run records and CSV series.
//!
//! A scenario names a mode, its input, optional parameters and the
//! quadrature configuration:
//!
//! ```json
//! {"mode": "exponents", "input": {"n": 4, "lengths": [2, 2]}}
//! {"mode": "verify-holder",
//!  "input": {"n": 3, "lengths": [2], "function": {"kind": "extremal", "gamma": 0.25, "trunc": 0.01}},
//!  "quad": {"samples": 200000, "seed": 7}}
//! ```
//!
//! Validation errors carry a path into the JSON document, e.g.
//! `input.edges[0]: i<j required`.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::enumerate::{canonical_classes, enumerate_symmetries, DEFAULT_CAP};
use crate::error::Error;
use crate::exponents::{
    identity_sweep, per_function_exponents, BalancedType, ExponentReport, IdentityCheck,
};
use crate::extremal::{
    default_eps_grid, default_r_grid, local_growth_experiment, norm_boundary_scan, sharpness_experiment,
    DivergenceReport, GrowthFunction, GrowthReport,
};
use crate::functions::{random_bounded_family, FunctionSpec, SymmetricFunction};
use crate::quadrature::{holder_verify, Integrand, QuadConfig, VerificationRecord};
use crate::sampling::{derive_seed, RNG_ALGORITHM};
use crate::multi_index::{MAX_DIM, MIN_DIM};
use crate::symmetry::{EdgeSet, Symmetry};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Decompose,
    Exponents,
    Enumerate,
    Identities,
    VerifyHolder,
    VerifySharpness,
    VerifyLocal,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Decompose => "decompose",
            Mode::Exponents => "exponents",
            Mode::Enumerate => "enumerate",
            Mode::Identities => "identities",
            Mode::VerifyHolder => "verify-holder",
            Mode::VerifySharpness => "verify-sharpness",
            Mode::VerifyLocal => "verify-local",
        }
    }
}

/// Mode-dependent input. Edges are 1-based pairs `[i, j]` with `i < j`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Input {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// A single edge set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(i64, i64)>>,
    /// A family of edge sets sharing `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<Vec<(i64, i64)>>>,
    /// Block lengths of a balanced type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<usize>>,
    /// One function per symmetry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<FunctionSpec>>,
    /// One function shape applied to every symmetry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Per-function exponents for `verify-holder`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_function: Option<GrowthFunction>,
    /// List canonical classes in `enumerate`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub classes: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    #[serde(default)]
    pub input: Input,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub quad: QuadConfig,
}

/// A problem with a scenario, located by a path into its JSON.
#[derive(Clone, Debug, PartialEq)]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl InputError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for InputError {}

#[derive(Debug)]
pub enum RunError {
    Input(InputError),
    Compute(Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Input(e) => write!(f, "input error: {e}"),
            RunError::Compute(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<InputError> for RunError {
    fn from(e: InputError) -> Self {
        RunError::Input(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Compute(e)
    }
}

/// Parses a scenario, reporting the JSON path of the first type error.
pub fn parse_scenario(text: &str) -> Result<Scenario, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        InputError::new(path, e.into_inner().to_string())
    })
}

/// Payload of a run, tagged by kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Decomposition { symmetry: Symmetry, lengths: Vec<usize> },
    Exponents { report: ExponentReport },
    Enumeration { label: String, count: u64, members: Vec<Symmetry>, classes: Option<Vec<Vec<Symmetry>>> },
    Identities { checks: Vec<IdentityCheck>, all_pass: bool },
    Holder { label: String, record: VerificationRecord },
    Divergence { report: DivergenceReport },
    Growth { report: GrowthReport },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: Scenario,
    pub version: String,
    pub rng_algorithm: String,
    pub wall_time_secs: f64,
    pub passed: bool,
    pub result: Payload,
}

impl RunRecord {
    /// 0 on pass, 2 on a failed verification.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

fn check_dim_at(path: &str, n: Option<usize>) -> Result<usize, InputError> {
    let n = n.ok_or_else(|| InputError::new(format!("{path}.n"), "required"))?;
    if !(MIN_DIM..=MAX_DIM).contains(&n) {
        return Err(InputError::new(format!("{path}.n"), format!("must lie in [{MIN_DIM}, {MAX_DIM}]")));
    }
    Ok(n)
}

fn edge_set_at(path: &str, n: usize, edges: &[(i64, i64)]) -> Result<EdgeSet, InputError> {
    let mut pairs = Vec::with_capacity(edges.len());
    for (k, &(i, j)) in edges.iter().enumerate() {
        let at = format!("{path}[{k}]");
        if i >= j {
            return Err(InputError::new(at, "i<j required"));
        }
        if i < 1 || j > n as i64 {
            return Err(InputError::new(at, format!("indices must lie in 1..={n}")));
        }
        pairs.push((i as usize, j as usize));
    }
    EdgeSet::from_pairs(n, &pairs).map_err(|e| InputError::new(path, e.to_string()))
}

fn symmetry_at(path: &str, n: usize, edges: &[(i64, i64)]) -> Result<Symmetry, InputError> {
    edge_set_at(path, n, edges)?.decompose().map_err(|e| InputError::new(path, e.to_string()))
}

fn balanced_type(input: &Input) -> Result<Option<BalancedType>, InputError> {
    let Some(lengths) = &input.lengths else { return Ok(None) };
    let n = check_dim_at("input", input.n)?;
    BalancedType::new(n, lengths.clone()).map(Some).map_err(|e| InputError::new("input.lengths", e.to_string()))
}

/// The family named by `input`: an explicit list or a full balanced family.
fn family(input: &Input, cap: u64) -> Result<(String, Vec<Symmetry>), RunError> {
    if let Some(t) = balanced_type(input)? {
        return Ok((t.label(), enumerate_symmetries(&t, cap)?));
    }
    let Some(fams) = &input.families else {
        return Err(InputError::new("input", "either lengths or families is required").into());
    };
    let n = check_dim_at("input", input.n)?;
    if fams.is_empty() {
        return Err(InputError::new("input.families", "must not be empty").into());
    }
    let syms = fams
        .iter()
        .enumerate()
        .map(|(j, e)| symmetry_at(&format!("input.families[{j}]"), n, e))
        .collect::<Result<Vec<_>, _>>()?;
    let first = syms[0].lengths();
    let shape = if syms.iter().all(|s| s.lengths() == first) {
        format!("{first:?}").replace(['[', ' '], "").replace(']', "")
    } else {
        "mixed".to_string()
    };
    Ok((format!("n={n}:({shape})"), syms))
}

fn check_grid_at(path: &str, grid: &[f64], decreasing: bool) -> Result<(), InputError> {
    if grid.len() < 4 {
        return Err(InputError::new(path, "at least 4 points required"));
    }
    if let Some(k) = grid.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(InputError::new(format!("{path}[{k}]"), "must be positive and finite"));
    }
    if let Some(k) = grid.windows(2).position(|w| if decreasing { w[1] >= w[0] } else { w[1] <= w[0] }) {
        let dir = if decreasing { "decreasing" } else { "increasing" };
        return Err(InputError::new(format!("{path}[{}]", k + 1), format!("grid must be strictly {dir}")));
    }
    Ok(())
}

fn positive_at(path: &str, v: Option<f64>, min: f64) -> Result<Option<f64>, InputError> {
    match v {
        Some(x) if !(x.is_finite() && x >= min && x > 0.0) => {
            Err(InputError::new(path, format!("must be finite and >= {min}")))
        }
        _ => Ok(v),
    }
}

fn validate(s: &Scenario) -> Result<(), InputError> {
    s.quad.validate().map_err(|e| InputError::new("quad", e.to_string()))?;
    positive_at("params.p", s.params.p, 1.0)?;
    positive_at("params.gamma", s.params.gamma, 0.0)?;
    positive_at("params.eta", s.params.eta, 0.0)?;
    if let Some(es) = &s.params.exponents {
        for (k, &p) in es.iter().enumerate() {
            positive_at(&format!("params.exponents[{k}]"), Some(p), 1.0)?;
        }
    }
    if let Some(g) = &s.params.eps_grid {
        check_grid_at("params.eps_grid", g, true)?;
        if g.iter().any(|&e| e >= 0.5) {
            return Err(InputError::new("params.eps_grid", "values must lie in (0, 1/2)"));
        }
    }
    if let Some(g) = &s.params.r_grid {
        check_grid_at("params.r_grid", g, false)?;
    }
    let needs = |field: &str, present: bool| -> Result<(), InputError> {
        if present {
            Ok(())
        } else {
            Err(InputError::new(format!("input.{field}"), format!("required for mode {}", s.mode.name())))
        }
    };
    let i = &s.input;
    match s.mode {
        Mode::Decompose => needs("edges", i.edges.is_some()),
        Mode::Enumerate => needs("lengths", i.lengths.is_some()),
        Mode::Identities => match i.max_n {
            Some(m) if !(MIN_DIM..=MAX_DIM).contains(&m) => {
                Err(InputError::new("input.max_n", format!("must lie in [{MIN_DIM}, {MAX_DIM}]")))
            }
            _ => Ok(()),
        },
        Mode::Exponents | Mode::VerifyHolder | Mode::VerifyLocal => {
            needs("lengths", i.lengths.is_some() || i.families.is_some())
        }
        Mode::VerifySharpness => {
            if i.edges.is_some() {
                if s.params.gamma.is_none() {
                    return Err(InputError::new("params.gamma", "required for a norm scan"));
                }
            } else {
                needs("lengths", i.lengths.is_some())?;
            }
            if s.params.p.is_none() {
                return Err(InputError::new("params.p", "required"));
            }
            Ok(())
        }
    }
}

/// Validates and executes a scenario.
pub fn run(scenario: &Scenario) -> Result<RunRecord, RunError> {
    validate(scenario)?;
    let start = Instant::now();
    let (result, passed) = dispatch(scenario)?;
    Ok(RunRecord {
        scenario: scenario.clone(),
        version: TOOL_VERSION.to_string(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        wall_time_secs: start.elapsed().as_secs_f64(),
        passed,
        result,
    })
}

fn dispatch(s: &Scenario) -> Result<(Payload, bool), RunError> {
    let input = &s.input;
    let cap = s.params.cap.unwrap_or(DEFAULT_CAP);
    match s.mode {
        Mode::Decompose => {
            let n = check_dim_at("input", input.n)?;
            let sym = symmetry_at("input.edges", n, input.edges.as_deref().unwrap_or_default())?;
            let lengths = sym.lengths();
            Ok((Payload::Decomposition { symmetry: sym, lengths }, true))
        }
        Mode::Exponents => {
            let report = match balanced_type(input)? {
                Some(t) => ExponentReport::for_balanced(&t)?,
                None => ExponentReport::for_family(&family(input, cap)?.1)?,
            };
            Ok((Payload::Exponents { report }, true))
        }
        Mode::Enumerate => {
            let t = balanced_type(input)?.expect("validated");
            let members = enumerate_symmetries(&t, cap)?;
            let classes = s.params.classes.then(|| canonical_classes(&members));
            let count = members.len() as u64;
            Ok((Payload::Enumeration { label: t.label(), count, members, classes }, true))
        }
        Mode::Identities => {
            let checks = identity_sweep(input.max_n.unwrap_or(10))?;
            let all_pass = checks.iter().all(IdentityCheck::all_pass);
            Ok((Payload::Identities { checks, all_pass }, all_pass))
        }
        Mode::VerifyHolder => {
            let (label, fams) = family(input, cap)?;
            let specs = function_specs(input, &fams, s.quad.seed)?;
            let fs = specs
                .iter()
                .zip(&fams)
                .enumerate()
                .map(|(j, (spec, sym))| {
                    SymmetricFunction::new(spec, sym)
                        .map_err(|e| InputError::new(format!("input.functions[{j}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&dyn Integrand> = fs.iter().map(|f| f as &dyn Integrand).collect();
            let ps = match &s.params.exponents {
                Some(ps) if ps.len() != fams.len() => {
                    return Err(InputError::new(
                        "params.exponents",
                        format!("expected {} exponents, got {}", fams.len(), ps.len()),
                    )
                    .into())
                }
                Some(ps) => ps.clone(),
                None => match s.params.p {
                    Some(p) => vec![p; fams.len()],
                    None => per_function_exponents(&fams)?.into_iter().map(|p| p as f64).collect(),
                },
            };
            let record = holder_verify(&fams, &refs, &ps, &s.quad)?;
            let passed = record.pass;
            Ok((Payload::Holder { label, record }, passed))
        }
        Mode::VerifySharpness => {
            let grid = s.params.eps_grid.clone().unwrap_or_else(default_eps_grid);
            let p = s.params.p.expect("validated");
            let report = if let Some(edges) = &input.edges {
                let n = check_dim_at("input", input.n)?;
                let sym = symmetry_at("input.edges", n, edges)?;
                norm_boundary_scan(&sym, s.params.gamma.expect("validated"), p, &grid, &s.quad)?
            } else {
                let t = balanced_type(input)?.expect("validated");
                sharpness_experiment(&t, p, s.params.gamma, &grid, &s.quad)?
            };
            let passed = report.passed;
            Ok((Payload::Divergence { report }, passed))
        }
        Mode::VerifyLocal => {
            let (_, fams) = family(input, cap)?;
            let grid = s.params.r_grid.clone().unwrap_or_else(default_r_grid);
            let report = local_growth_experiment(
                &fams,
                None,
                s.params.eta.unwrap_or(0.1),
                s.params.growth_function.unwrap_or_default(),
                &grid,
                &s.quad,
            )?;
            let passed = report.passed;
            Ok((Payload::Growth { report }, passed))
        }
    }
}

fn function_specs(input: &Input, fams: &[Symmetry], seed: u64) -> Result<Vec<FunctionSpec>, InputError> {
    match (&input.functions, &input.function) {
        (Some(_), Some(_)) => Err(InputError::new("input", "give either function or functions, not both")),
        (Some(list), None) if list.len() != fams.len() => Err(InputError::new(
            "input.functions",
            format!("expected {} functions, got {}", fams.len(), list.len()),
        )),
        (Some(list), None) => Ok(list.clone()),
        (None, Some(one)) => Ok(vec![one.clone(); fams.len()]),
        (None, None) => Ok(random_bounded_family(fams, derive_seed(seed, 0xF00D))),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes the series of `records` as CSV. All records must share a schema.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(out);
    let header: &[&str] = match records.first().map(|r| &r.result) {
        None => return Err("no records to write".into()),
        Some(Payload::Divergence { .. }) => &["eps", "lhs", "lhs_stderr", "pass"],
        Some(Payload::Growth { .. }) => &["R", "lhs", "lhs_stderr"],
        Some(Payload::Holder { .. }) => &["type", "p", "lhs", "rhs", "margin", "pass"],
        Some(_) => return Err("record has no series data".into()),
    };
    w.write_record(header)?;
    for rec in records {
        match (&rec.result, header[0]) {
            (Payload::Divergence { report }, "eps") => {
                for ((e, est), holds) in report.eps_grid.iter().zip(&report.lhs).zip(&report.holds) {
                    let pass = holds.map(|b| b.to_string()).unwrap_or_default();
                    w.write_record([num(*e), num(est.value), num(est.stderr), pass])?;
                }
            }
            (Payload::Growth { report }, "R") => {
                for (r, est) in report.r_grid.iter().zip(&report.lhs) {
                    w.write_record([num(*r), num(est.value), num(est.stderr)])?;
                }
            }
            (Payload::Holder { label, record }, "type") => {
                let mut ps: Vec<String> = record.exponents.iter().map(|p| num(*p)).collect();
                ps.dedup();
                w.write_record([
                    label.clone(),
                    ps.join(" "),
                    num(record.lhs.value),
                    num(record.rhs),
                    num(record.margin),
                    record.pass.to_string(),
                ])?;
            }
            _ => return Err("records have different series schemas".into()),
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(record: &RunRecord, path: &Path) -> Result<(), Box<dyn std::error::Error>> {
    emit_csv_many(std::slice::from_ref(record), path)
}

pub fn emit_csv_many(records: &[RunRecord], path: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file))
}

/// Short human-readable summary of a record.
pub fn summary(rec: &RunRecord) -> String {
    let verdict = if rec.passed { "PASS" } else { "FAIL" };
    match &rec.result {
        Payload::Decomposition { symmetry, lengths } => {
            format!("symmetry {symmetry:?} with block lengths {lengths:?}")
        }
        Payload::Exponents { report } => {
            let mut s = format!(
                "p = {}, functions = {}, delta = {}",
                report.p_uniform, report.j_count, report.delta
            );
            if !report.per_function_collapsed {
                let per: Vec<String> = report.p_per_function.iter().map(|c| c.to_string()).collect();
                s += &format!(", per function = [{}]", per.join(", "));
            }
            if let Some(o) = &report.overcount {
                s += &format!(", overcount = {o}");
            }
            s
        }
        Payload::Enumeration { label, count, members, classes } => {
            let mut lines = vec![format!("{label}: {count} symmetries")];
            lines.extend(members.iter().map(|m| format!("  {m:?}")));
            if let Some(c) = classes {
                lines.push(format!("{} classes of size {}", c.len(), c.first().map_or(0, Vec::len)));
            }
            lines.join("\n")
        }
        Payload::Identities { checks, all_pass } => {
            let failed: Vec<&str> = checks.iter().filter(|c| !c.all_pass()).map(|c| c.label.as_str()).collect();
            format!("{} types checked, all pass: {all_pass}, failures: {failed:?}", checks.len())
        }
        Payload::Holder { label, record } => format!(
            "{verdict} {label}: lhs {:.6} ± {:.2e}, rhs {:.6}, margin {:.6}",
            record.lhs.value, record.lhs.stderr, record.rhs, record.margin
        ),
        Payload::Divergence { report } => format!(
            "{verdict} {}: gamma {}, p {}, slope {:.4} ± {:.4}, expected {:?}, observed {:?}",
            report.label, report.gamma, report.p, report.slope, report.slope_stderr, report.expected, report.observed
        ),
        Payload::Growth { report } => format!(
            "{verdict} slope {:.4} ± {:.4} against delta {} (eta-corrected {:.4})",
            report.fitted_slope,
            report.slope_stderr,
            report.delta_target,
            report.eta_prediction
        ),
    }
}

impl Payload {
    pub fn as_exponents(&self) -> Option<&ExponentReport> {
        match self {
            Payload::Exponents { report } => Some(report),
            _ => None,
        }
    }
}
