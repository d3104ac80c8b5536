//! JSON problem files.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "A": { "kind": "l1-subdifferential", "params": { "weight": 0.5 } },
//!   "B": { "kind": "quadratic-gradient",
//!          "params": { "matrix": [[2, 0], [0, 1]], "offset": [-1, 0] },
//!          "beta": 0.5 },
//!   "C": { "kind": "normal-cone-box", "params": { "lo": [0, 0], "hi": [1, 1] } },
//!   "solution_hint": { "x_star": [0.25, 0], "c_element": [0, 0] }
//! }
//! ```
//!
//! Matrices are arrays of rows. A declared `beta` replaces the computed one
//! after passing a sampled cocoercivity check; `"inf"` declares the zero
//! operator's infinite constant.

use std::fs;
use std::path::Path;

use fbb_core::linalg::{matrix_from_rows, matrix_to_rows};
use fbb_core::operators::{certify_cocoercive, Beta, CocoerciveKind, CocoerciveOp, MaxMonotoneOp, MonotoneKind};
use fbb_core::problems::{InclusionProblem, SolutionHint};
use fbb_core::{Matrix, Point};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// Samples drawn when re-validating a declared β.
pub const BETA_CHECK_SAMPLES: usize = 1000;

pub const MONOTONE_KINDS: &str = "zero, l1-subdifferential, normal-cone-box, normal-cone-affine, \
     normal-cone-singleton, quadratic-gradient-as-monotone, affine-monotone";
pub const COCOERCIVE_KINDS: &str = "zero, scaled-identity, quadratic-gradient, huber-gradient";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: OperatorSpec,
    #[serde(rename = "B")]
    pub b: ForwardSpec,
    #[serde(rename = "C")]
    pub c: OperatorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_hint: Option<HintSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Value(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HintSpec {
    pub x_star: Vec<f64>,
    pub c_element: Vec<f64>,
}

/// Reads and validates a problem file. `seed` drives the β re-check.
pub fn load(path: &Path, seed: u64) -> CliResult<InclusionProblem> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, seed).map_err(|e| match e {
        CliError::Parse { message, .. } => CliError::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

pub fn save(path: &Path, problem: &InclusionProblem) -> CliResult<()> {
    fs::write(path, emit(problem)).map_err(|e| CliError::io(path, e))
}

pub fn parse(text: &str, seed: u64) -> CliResult<InclusionProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| parse_error(e.to_string()))?;
    file.into_problem(seed)
}

/// Pretty-printed JSON with a trailing newline.
pub fn emit(problem: &InclusionProblem) -> String {
    let mut s = serde_json::to_string_pretty(&ProblemFile::from_problem(problem)).expect("problem files serialize");
    s.push('\n');
    s
}

fn parse_error(message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: "<input>".into(),
        message: message.into(),
    }
}

impl ProblemFile {
    pub fn from_problem(problem: &InclusionProblem) -> Self {
        let beta = match problem.beta() {
            Beta::Finite(b) => BetaSpec::Value(b),
            Beta::Infinite => BetaSpec::Text("inf".into()),
        };
        ProblemFile {
            dim: problem.dim(),
            a: monotone_spec(problem.a().kind()),
            b: ForwardSpec {
                kind: problem.b().kind().name().to_string(),
                params: cocoercive_params(problem.b().kind()),
                beta: Some(beta),
            },
            c: monotone_spec(problem.c().kind()),
            solution_hint: problem.solution_hint().map(|h| HintSpec {
                x_star: h.x_star.to_vec(),
                c_element: h.c_element.to_vec(),
            }),
        }
    }

    pub fn into_problem(self, seed: u64) -> CliResult<InclusionProblem> {
        let dim = self.dim;
        if dim == 0 {
            return Err(parse_error("dim must be >= 1"));
        }
        let a = build_monotone("A", &self.a, dim)?;
        let b = build_cocoercive(&self.b, dim, seed)?;
        let c = build_monotone("C", &self.c, dim)?;
        let problem = InclusionProblem::new(a, b, c).map_err(|e| parse_error(e.to_string()))?;
        match self.solution_hint {
            None => Ok(problem),
            Some(h) => {
                let hint = SolutionHint {
                    x_star: point(h.x_star, "solution_hint.x_star", dim)?,
                    c_element: point(h.c_element, "solution_hint.c_element", dim)?,
                };
                problem.with_hint(hint).map_err(|e| parse_error(format!("solution_hint rejected: {e}")))
            }
        }
    }
}

fn monotone_spec(kind: &MonotoneKind) -> OperatorSpec {
    let params = match kind {
        MonotoneKind::Zero => json!({}),
        MonotoneKind::L1 { weight } => json!({ "weight": weight }),
        MonotoneKind::NormalConeBox { lo, hi } => json!({ "lo": lo, "hi": hi }),
        MonotoneKind::NormalConeAffine { matrix, rhs } => json!({ "matrix": rows(matrix), "rhs": rhs.as_slice() }),
        MonotoneKind::NormalConeSingleton { point } => json!({ "point": point.as_slice() }),
        MonotoneKind::QuadraticGradient { matrix, offset } | MonotoneKind::AffineMonotone { matrix, offset } => {
            json!({ "matrix": rows(matrix), "offset": offset.as_slice() })
        }
    };
    OperatorSpec {
        kind: kind.name().to_string(),
        params: into_map(params),
    }
}

fn cocoercive_params(kind: &CocoerciveKind) -> Map<String, Value> {
    into_map(match kind {
        CocoerciveKind::Zero => json!({}),
        CocoerciveKind::ScaledIdentity { scale } => json!({ "scale": scale }),
        CocoerciveKind::QuadraticGradient { matrix, offset } => json!({ "matrix": rows(matrix), "offset": offset.as_slice() }),
        CocoerciveKind::HuberGradient { delta } => json!({ "delta": delta }),
    })
}

fn into_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => unreachable!("params are objects"),
    }
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    matrix_to_rows(m)
}

/// Typed access to a `params` object; rejects unknown keys.
struct Params<'a> {
    slot: &'static str,
    map: &'a Map<String, Value>,
}

impl<'a> Params<'a> {
    fn new(slot: &'static str, map: &'a Map<String, Value>, allowed: &[&str]) -> CliResult<Self> {
        if let Some(extra) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(parse_error(format!("{slot}.params: unexpected key `{extra}`")));
        }
        Ok(Params { slot, map })
    }

    fn get(&self, key: &str) -> CliResult<&'a Value> {
        self.map
            .get(key)
            .ok_or_else(|| parse_error(format!("{}.params: missing `{key}`", self.slot)))
    }

    fn number(&self, key: &str) -> CliResult<f64> {
        self.get(key)?
            .as_f64()
            .ok_or_else(|| parse_error(format!("{}.params.{key}: expected a number", self.slot)))
    }

    fn vector(&self, key: &str) -> CliResult<Vec<f64>> {
        numbers(self.get(key)?).ok_or_else(|| parse_error(format!("{}.params.{key}: expected an array of numbers", self.slot)))
    }

    fn matrix(&self, key: &str) -> CliResult<Matrix> {
        let bad = || parse_error(format!("{}.params.{key}: expected an array of equal-length rows", self.slot));
        let rows = self
            .get(key)?
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(numbers)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(bad)?;
        matrix_from_rows(&rows).map_err(|_| bad())
    }
}

fn numbers(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(Value::as_f64).collect()
}

fn point(v: Vec<f64>, what: &str, dim: usize) -> CliResult<Point> {
    if v.len() != dim {
        return Err(parse_error(format!("{what}: expected {dim} entries, got {}", v.len())));
    }
    Point::new(v).map_err(|e| parse_error(format!("{what}: {e}")))
}

fn check_dim(slot: &str, got: usize, dim: usize) -> CliResult<()> {
    if got != dim {
        return Err(parse_error(format!("{slot}: operator dimension {got} does not match dim {dim}")));
    }
    Ok(())
}

fn build_monotone(slot: &'static str, spec: &OperatorSpec, dim: usize) -> CliResult<MaxMonotoneOp> {
    let invalid = |e: fbb_core::Error| parse_error(format!("{slot}: {e}"));
    let op = match spec.kind.as_str() {
        "zero" => {
            Params::new(slot, &spec.params, &[])?;
            MaxMonotoneOp::zero(dim)
        }
        "l1-subdifferential" => {
            let p = Params::new(slot, &spec.params, &["weight"])?;
            MaxMonotoneOp::l1(dim, p.number("weight")?)
        }
        "normal-cone-box" => {
            let p = Params::new(slot, &spec.params, &["lo", "hi"])?;
            MaxMonotoneOp::normal_cone_box(p.vector("lo")?, p.vector("hi")?)
        }
        "normal-cone-affine" => {
            let p = Params::new(slot, &spec.params, &["matrix", "rhs"])?;
            MaxMonotoneOp::normal_cone_affine(p.matrix("matrix")?, DVector::from_vec(p.vector("rhs")?))
        }
        "normal-cone-singleton" => {
            let p = Params::new(slot, &spec.params, &["point"])?;
            let pt = Point::new(p.vector("point")?).map_err(invalid)?;
            MaxMonotoneOp::normal_cone_singleton(pt)
        }
        "quadratic-gradient-as-monotone" => {
            let p = Params::new(slot, &spec.params, &["matrix", "offset"])?;
            MaxMonotoneOp::quadratic_gradient(p.matrix("matrix")?, DVector::from_vec(p.vector("offset")?))
        }
        "affine-monotone" => {
            let p = Params::new(slot, &spec.params, &["matrix", "offset"])?;
            MaxMonotoneOp::affine_monotone(p.matrix("matrix")?, DVector::from_vec(p.vector("offset")?))
        }
        other => {
            return Err(CliError::UnknownKind {
                slot,
                kind: other.to_string(),
                expected: MONOTONE_KINDS,
            })
        }
    }
    .map_err(invalid)?;
    check_dim(slot, op.dim(), dim)?;
    Ok(op)
}

fn build_cocoercive(spec: &ForwardSpec, dim: usize, seed: u64) -> CliResult<CocoerciveOp> {
    let slot = "B";
    let invalid = |e: fbb_core::Error| parse_error(format!("{slot}: {e}"));
    let op = match spec.kind.as_str() {
        "zero" => {
            Params::new(slot, &spec.params, &[])?;
            CocoerciveOp::zero(dim)
        }
        "scaled-identity" => {
            let p = Params::new(slot, &spec.params, &["scale"])?;
            CocoerciveOp::scaled_identity(dim, p.number("scale")?)
        }
        "quadratic-gradient" => {
            let p = Params::new(slot, &spec.params, &["matrix", "offset"])?;
            CocoerciveOp::quadratic_gradient(p.matrix("matrix")?, DVector::from_vec(p.vector("offset")?))
        }
        "huber-gradient" => {
            let p = Params::new(slot, &spec.params, &["delta"])?;
            CocoerciveOp::huber_gradient(dim, p.number("delta")?)
        }
        other => {
            return Err(CliError::UnknownKind {
                slot,
                kind: other.to_string(),
                expected: COCOERCIVE_KINDS,
            })
        }
    }
    .map_err(invalid)?;
    check_dim(slot, op.dim(), dim)?;
    let Some(declared) = &spec.beta else {
        return Ok(op);
    };
    let beta = match declared {
        BetaSpec::Value(b) => Beta::Finite(*b),
        BetaSpec::Text(t) if t == "inf" => Beta::Infinite,
        BetaSpec::Text(t) => return Err(parse_error(format!("B.beta: expected a number or \"inf\", got \"{t}\""))),
    };
    let op = op.with_declared_beta(beta).map_err(invalid)?;
    let report = certify_cocoercive(&op, BETA_CHECK_SAMPLES, seed).map_err(invalid)?;
    if !report.passed {
        return Err(CliError::BetaRejected {
            declared: beta.finite().unwrap_or(f64::INFINITY),
            violation: report.max_violation,
        });
    }
    Ok(op)
}
