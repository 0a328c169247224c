//! JSON encoding of systems, matrices, vectors and results.
//!
//! Rational functions are strings such as `"1/(2*x)"`; integers may also be
//! given as JSON numbers. Objects are emitted with sorted keys.

use serde_json::{json, Map, Value};

use crate::arith::{parse_rat, MatQ, MatRF, Matrix, Rat, RatFn};
use crate::constr::Construction;
use crate::diffsys::DiffSystem;
use crate::error::{Error, Result};
use crate::katz::{Annihilation, Eigenring, StabilityReport, SubspaceCriterion};
use crate::reduction::{
    InvariantCheck, LieBasis, LineCheck, LineStatus, ReducedReport, ReductionCertificate,
};
use crate::series::SeriesMat;
use crate::solutions::SolutionSpace;

pub const DEFAULT_VAR: &str = "x";

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("invalid JSON: {e}")))
}

pub fn ratfn_from_json(v: &Value, var: &str) -> Result<RatFn> {
    match v {
        Value::String(s) => RatFn::parse(s, var),
        Value::Number(n) if n.is_i64() => Ok(RatFn::constant(Rat::from_integer(
            n.as_i64().expect("checked").into(),
        ))),
        other => Err(parse_err(format!(
            "expected a rational function string, got {other}"
        ))),
    }
}

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::String(s) => parse_rat(s),
        Value::Number(n) if n.is_i64() => {
            Ok(Rat::from_integer(n.as_i64().expect("checked").into()))
        }
        other => Err(parse_err(format!(
            "expected a rational number, got {other}"
        ))),
    }
}

/// Unwraps `{key: …}` envelopes so bare arrays and wrapped ones both work.
fn unwrap_field<'a>(v: &'a Value, keys: &[&str]) -> &'a Value {
    match v {
        Value::Object(m) => keys.iter().find_map(|k| m.get(*k)).unwrap_or(v),
        _ => v,
    }
}

pub fn var_of(v: &Value) -> Option<&str> {
    v.get("var").and_then(Value::as_str)
}

pub fn vector_from_json(v: &Value, var: &str) -> Result<Vec<RatFn>> {
    let v = unwrap_field(v, &["vector", "v"]);
    v.as_array()
        .ok_or_else(|| parse_err("expected an array for a vector"))?
        .iter()
        .map(|e| ratfn_from_json(e, var))
        .collect()
}

pub fn matrix_from_json(v: &Value, var: &str) -> Result<MatRF> {
    let v = unwrap_field(v, &["A", "P", "N", "matrix"]);
    let rows = v
        .as_array()
        .ok_or_else(|| parse_err("expected an array of rows for a matrix"))?;
    let rows = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| parse_err("matrix row is not an array"))?
                .iter()
                .map(|e| ratfn_from_json(e, var))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(parse_err("empty matrix"));
    }
    Matrix::from_rows(rows)
}

pub fn constant_matrix_from_json(v: &Value, var: &str) -> Result<MatQ> {
    matrix_from_json(v, var)?
        .as_constant()
        .ok_or_else(|| Error::InvalidInput("expected a constant matrix".into()))
}

pub fn system_from_json(v: &Value) -> Result<DiffSystem> {
    let var = var_of(v).unwrap_or(DEFAULT_VAR);
    let a = matrix_from_json(v, var)?;
    if let Some(n) = v.get("n") {
        let n = n
            .as_u64()
            .ok_or_else(|| parse_err("field n must be a nonnegative integer"))?
            as usize;
        if a.rows() != n || a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.rows().max(a.cols()),
            });
        }
    }
    DiffSystem::new(var, a)
}

fn list_of(v: &Value, keys: &[&str]) -> Result<Vec<Value>> {
    unwrap_field(v, keys)
        .as_array()
        .cloned()
        .ok_or_else(|| parse_err("expected a list"))
}

pub fn matrices_from_json(v: &Value, var: &str) -> Result<Vec<MatRF>> {
    list_of(v, &["basis", "generators", "elements"])?
        .iter()
        .map(|m| matrix_from_json(m, var))
        .collect()
}

/// A list of constant matrices; `n` is taken from the first matrix or from
/// `default_n` when the list is empty.
pub fn lie_basis_from_json(v: &Value, var: &str, default_n: usize) -> Result<LieBasis> {
    let gens = list_of(v, &["basis", "generators"])?
        .iter()
        .map(|m| constant_matrix_from_json(m, var))
        .collect::<Result<Vec<_>>>()?;
    let n = gens.first().map_or(default_n, MatQ::rows);
    LieBasis::new(n, gens)
}

/// `[{"constr": "...", "vector": [...]}, …]`.
pub fn tagged_vectors_from_json(v: &Value, var: &str) -> Result<Vec<(Construction, Vec<RatFn>)>> {
    list_of(v, &["lines", "invariants"])?
        .iter()
        .map(|item| {
            let c = item
                .get("constr")
                .and_then(Value::as_str)
                .ok_or_else(|| parse_err("entry is missing a \"constr\" string"))?
                .parse::<Construction>()?;
            let vec = item
                .get("vector")
                .ok_or_else(|| parse_err("entry is missing a \"vector\""))?;
            Ok((c, vector_from_json(vec, var)?))
        })
        .collect()
}

/// A list of constant vectors.
pub fn rat_vectors_from_json(v: &Value) -> Result<Vec<Vec<Rat>>> {
    list_of(v, &["subspace", "vectors"])?
        .iter()
        .map(|w| {
            w.as_array()
                .ok_or_else(|| parse_err("expected an array for a vector"))?
                .iter()
                .map(rat_from_json)
                .collect()
        })
        .collect()
}

pub fn ratfn_to_json(f: &RatFn, var: &str) -> Value {
    Value::String(f.display(var))
}

pub fn rat_to_json(r: &Rat) -> Value {
    Value::String(r.to_string())
}

pub fn vector_to_json(v: &[RatFn], var: &str) -> Value {
    Value::Array(v.iter().map(|e| ratfn_to_json(e, var)).collect())
}

pub fn rat_vector_to_json(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_to_json).collect())
}

pub fn matrix_to_json(m: &MatRF, var: &str) -> Value {
    Value::Array(m.to_rows().iter().map(|r| vector_to_json(r, var)).collect())
}

pub fn rat_matrix_to_json(m: &MatQ) -> Value {
    Value::Array(m.to_rows().iter().map(|r| rat_vector_to_json(r)).collect())
}

pub fn system_to_json(sys: &DiffSystem) -> Value {
    json!({
        "var": sys.var(),
        "n": sys.dim(),
        "A": matrix_to_json(sys.matrix(), sys.var()),
    })
}

pub fn solution_space_to_json(s: &SolutionSpace, var: &str) -> Value {
    json!({
        "dim": s.rank(),
        "basis": s.basis.iter().map(|v| vector_to_json(v, var)).collect::<Vec<_>>(),
        "denominator": s.denominator.display(var),
        "num_deg_cap": s.num_deg_cap,
        "complete": s.complete,
    })
}

pub fn eigenring_to_json(e: &Eigenring, var: &str) -> Value {
    json!({
        "dim": e.dim(),
        "matrices": e.matrices.iter().map(|m| matrix_to_json(m, var)).collect::<Vec<_>>(),
        "constant_elements": e.constant_elements().iter().map(rat_matrix_to_json).collect::<Vec<_>>(),
        "denominator": e.space.denominator.display(var),
        "num_deg_cap": e.space.num_deg_cap,
        "complete": e.space.complete,
    })
}

pub fn series_to_json(s: &SeriesMat) -> Value {
    json!({
        "x0": rat_to_json(&s.x0),
        "order": s.order,
        "coeffs": s.coeffs.iter().map(rat_matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn series_from_json(v: &Value) -> Result<SeriesMat> {
    let x0 = rat_from_json(v.get("x0").ok_or_else(|| parse_err("missing x0"))?)?;
    let order = v
        .get("order")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err("missing order"))? as usize;
    let coeffs = list_of(
        v.get("coeffs").ok_or_else(|| parse_err("missing coeffs"))?,
        &[],
    )?
    .iter()
    .map(|m| constant_matrix_from_json(m, DEFAULT_VAR))
    .collect::<Result<Vec<_>>>()?;
    if coeffs.len() != order {
        return Err(parse_err("number of coefficients differs from order"));
    }
    Ok(SeriesMat { x0, order, coeffs })
}

pub fn lie_basis_to_json(b: &LieBasis) -> Value {
    Value::Array(b.generators().iter().map(rat_matrix_to_json).collect())
}

fn line_to_json(l: &LineCheck, var: &str) -> Value {
    let mut m = Map::new();
    m.insert("constr".into(), json!(l.construction.to_string()));
    m.insert("vector".into(), vector_to_json(&l.vector, var));
    match &l.status {
        Ok(LineStatus::Constant { scale, vector }) => {
            m.insert("status".into(), json!("constant"));
            m.insert("scale".into(), ratfn_to_json(scale, var));
            m.insert("constant_vector".into(), rat_vector_to_json(vector));
        }
        Ok(LineStatus::NonConstant { i, j, ratio }) => {
            m.insert("status".into(), json!("non_constant"));
            m.insert(
                "witness".into(),
                json!({
                    "message": "line has non-constant ratio",
                    "numerator_index": j,
                    "denominator_index": i,
                    "ratio": ratfn_to_json(ratio, var),
                }),
            );
        }
        Ok(LineStatus::NotStable) => {
            m.insert("status".into(), json!("not_stable"));
        }
        Err(e) => {
            m.insert("status".into(), json!("error"));
            m.insert("error".into(), error_to_json(e));
        }
    }
    Value::Object(m)
}

fn invariant_check_to_json(c: &InvariantCheck, var: &str) -> Value {
    let mut m = Map::new();
    m.insert("constr".into(), json!(c.construction.to_string()));
    m.insert("rank".into(), json!(c.rank));
    m.insert("complete".into(), json!(c.complete));
    if let Some(w) = &c.witness {
        m.insert("non_constant_witness".into(), vector_to_json(w, var));
    }
    if let Some(e) = &c.error {
        m.insert("error".into(), error_to_json(e));
    }
    Value::Object(m)
}

pub fn reduced_report_to_json(r: &ReducedReport, var: &str) -> Value {
    json!({
        "reduced": r.verdict(),
        "wei_norman_ok": r.wei_norman_ok,
        "coefficients": r.coefficients.as_ref().map(|c| vector_to_json(c, var)),
        "bracket_closed": r.bracket_closed,
        "lines_constant": r.lines_constant,
        "lines": r.lines.iter().map(|l| line_to_json(l, var)).collect::<Vec<_>>(),
        "invariants_constant": r.invariants_constant,
        "invariants": r.invariants.iter().map(|c| invariant_check_to_json(c, var)).collect::<Vec<_>>(),
        "caveats": r.caveats,
    })
}

pub fn certificate_to_json(c: &ReductionCertificate) -> Value {
    json!({
        "m": c.m,
        "var": c.var,
        "P": matrix_to_json(&c.p, &c.var),
        "B": matrix_to_json(&c.b, &c.var),
        "basis": lie_basis_to_json(&c.basis),
        "coefficients": vector_to_json(&c.coefficients, &c.var),
    })
}

pub fn stability_to_json(r: &StabilityReport, var: &str) -> Value {
    json!({
        "stable": r.stable,
        "elements": r.elements.iter().map(|e| json!({
            "image": matrix_to_json(&e.image, var),
            "coordinates": e.coordinates.as_ref().map(|c| vector_to_json(c, var)),
        })).collect::<Vec<_>>(),
    })
}

pub fn annihilation_to_json(a: &[Annihilation], var: &str) -> Value {
    json!({
        "all_annihilated": a.iter().all(Annihilation::annihilated),
        "pairs": a.iter().map(|p| json!({
            "generator": p.generator,
            "invariant": p.invariant,
            "annihilated": p.annihilated(),
            "image": vector_to_json(&p.image, var),
        })).collect::<Vec<_>>(),
    })
}

pub fn subspace_criterion_to_json(s: &SubspaceCriterion) -> Value {
    json!({
        "generator_stable": s.generator_stable,
        "failing_generator": s.failing_generator,
        "nabla_stable": s.nabla_stable,
        "consistent": s.consistent(),
    })
}

pub fn error_to_json(e: &Error) -> Value {
    json!({ "reason": e.reason(), "message": e.to_string() })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
