//! JSON documents for matrices, models and certificates.
//!
//! Output is canonical: object keys are sorted, exact entries are `"p/q"` strings and float
//! entries are JSON numbers. Every document carries `document` and `format_version` fields.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::certifier::{Certificate, Evidence, SearchLog, SpernerWitness, Verdict};
use crate::cope::{CopeMatrix, Measurement};
use crate::error::{CopeError, Result};
use crate::matrix::{Matrix, RatMatrix, ScalarMatrix};
use crate::model::{ModelFactorization, ModelKind};
use crate::polytope::SpanSimplexPolytope;
use crate::scalar::{format_rational, parse_rational, Backend, Rational, Scalar, DEFAULT_EPS};

pub const FORMAT_VERSION: &str = "1";

fn parse_err(field: &str, what: impl std::fmt::Display) -> CopeError {
    CopeError::Parse(format!("field `{field}`: {what}"))
}

fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn parse_text(text: &[u8]) -> Result<Value> {
    let s = std::str::from_utf8(text).map_err(|e| CopeError::Parse(format!("input is not UTF-8: {e}")))?;
    Ok(serde_json::from_str(s)?)
}

// ---------------------------------------------------------------------------
// Field helpers

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| parse_err(&join(path, key), "missing"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| parse_err(path, "expected a string"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| parse_err(path, "expected a nonnegative integer"))
}

fn usize_list(v: &Value, path: &str) -> Result<Vec<usize>> {
    as_array(v, path)?.iter().enumerate().map(|(i, x)| as_usize(x, &format!("{path}[{i}]"))).collect()
}

fn string_list(v: &Value, path: &str) -> Result<Vec<String>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| as_str(x, &format!("{path}[{i}]")).map(str::to_string))
        .collect()
}

fn expect_document(v: &Value, name: &str) -> Result<()> {
    let doc = as_str(field(v, "document", "")?, "document")?;
    if doc != name {
        return Err(parse_err("document", format!("expected `{name}`, found `{doc}`")));
    }
    let version = as_str(field(v, "format_version", "")?, "format_version")?;
    if version != FORMAT_VERSION {
        return Err(parse_err("format_version", format!("unsupported version `{version}`")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Entries and backends

fn scalar_value(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(r) => Value::String(format_rational(r)),
        Scalar::Float(x) => json!(x),
    }
}

fn rational_value(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

fn parse_scalar(v: &Value, backend: Backend, path: &str) -> Result<Scalar> {
    let exact = match v {
        Value::String(s) => Some(parse_rational(s).map_err(|e| parse_err(path, e))?),
        Value::Number(n) if backend.is_exact() => match n.as_i64() {
            Some(i) => Some(Rational::from_integer(i.into())),
            None => return Err(parse_err(path, "exact entries must be integers or \"p/q\" strings")),
        },
        Value::Number(n) => return Ok(Scalar::Float(n.as_f64().expect("JSON numbers are finite"))),
        _ => return Err(parse_err(path, "expected a number or a \"p/q\" string")),
    };
    let s = Scalar::Exact(exact.expect("set above"));
    Ok(backend.convert(&s))
}

fn parse_rational_value(v: &Value, path: &str) -> Result<Rational> {
    match parse_scalar(v, Backend::Exact, path)? {
        Scalar::Exact(r) => Ok(r),
        Scalar::Float(_) => unreachable!("exact backend"),
    }
}

fn matrix_value(m: &ScalarMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(scalar_value).collect())).collect())
}

fn rat_matrix_value(m: &RatMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(rational_value).collect())).collect())
}

/// Parses a list of rows; `cols` fixes the width for matrices that may have no rows.
fn parse_matrix(v: &Value, backend: Backend, path: &str, cols: Option<usize>) -> Result<ScalarMatrix> {
    let rows = as_array(v, path)?;
    let mut data = Vec::new();
    let mut width = cols;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let row = as_array(row, &rp)?;
        match width {
            Some(w) if w != row.len() => {
                return Err(parse_err(&rp, format!("row has {} entries, expected {w}", row.len())));
            }
            _ => width = Some(row.len()),
        }
        for (j, x) in row.iter().enumerate() {
            data.push(parse_scalar(x, backend, &format!("{rp}[{j}]"))?);
        }
    }
    Ok(Matrix::from_vec(rows.len(), width.unwrap_or(0), data))
}

fn parse_rat_matrix(v: &Value, path: &str, cols: Option<usize>) -> Result<RatMatrix> {
    let m = parse_matrix(v, Backend::Exact, path, cols)?;
    Ok(m.to_rational().expect("exact backend"))
}

fn backend_fields(obj: &mut Map<String, Value>, backend: Backend) {
    obj.insert("backend".into(), json!(backend.name()));
    if let Backend::Float { eps } = backend {
        obj.insert("eps".into(), json!(eps));
    }
}

fn parse_backend(v: &Value, path: &str) -> Result<Backend> {
    let name = as_str(field(v, "backend", path)?, &join(path, "backend"))?;
    match name {
        "rational" => Ok(Backend::Exact),
        "float" => {
            let eps = match v.get("eps") {
                Some(e) => e.as_f64().ok_or_else(|| parse_err(&join(path, "eps"), "expected a number"))?,
                None => DEFAULT_EPS,
            };
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(parse_err(&join(path, "eps"), "must be a finite nonnegative number"));
            }
            Ok(Backend::Float { eps })
        }
        other => Err(parse_err(&join(path, "backend"), format!("unknown backend `{other}`"))),
    }
}

// ---------------------------------------------------------------------------
// COPE matrices

pub fn cope_value(c: &CopeMatrix) -> Value {
    let mut obj = Map::new();
    obj.insert("document".into(), json!("cope"));
    obj.insert("format_version".into(), json!(FORMAT_VERSION));
    backend_fields(&mut obj, c.backend());
    obj.insert("preparations".into(), json!(c.preparations()));
    obj.insert(
        "measurements".into(),
        Value::Array(c.measurements().iter().map(|m| json!({"name": m.name, "outcomes": m.outcomes})).collect()),
    );
    obj.insert("blocks".into(), Value::Array(c.blocks().iter().map(matrix_value).collect()));
    Value::Object(obj)
}

pub fn emit_cope(c: &CopeMatrix) -> String {
    to_text(&cope_value(c))
}

pub fn cope_from_value(v: &Value, path: &str) -> Result<CopeMatrix> {
    let backend = parse_backend(v, path)?;
    let preparations = string_list(field(v, "preparations", path)?, &join(path, "preparations"))?;
    let mpath = join(path, "measurements");
    let mut measurements = Vec::new();
    for (j, m) in as_array(field(v, "measurements", path)?, &mpath)?.iter().enumerate() {
        let p = format!("{mpath}[{j}]");
        let name = as_str(field(m, "name", &p)?, &join(&p, "name"))?.to_string();
        let outcomes = string_list(field(m, "outcomes", &p)?, &join(&p, "outcomes"))?;
        measurements.push(Measurement { name, outcomes });
    }
    let bpath = join(path, "blocks");
    let blocks = as_array(field(v, "blocks", path)?, &bpath)?;
    if blocks.len() != measurements.len() {
        return Err(parse_err(
            &bpath,
            format!("{} blocks for {} measurements", blocks.len(), measurements.len()),
        ));
    }
    let mut parsed = Vec::new();
    for (j, b) in blocks.iter().enumerate() {
        let p = format!("{bpath}[{j}]");
        let m = parse_matrix(b, backend, &p, Some(preparations.len()))?;
        if m.rows() != measurements[j].len() {
            return Err(parse_err(
                &p,
                format!("{} rows for {} outcomes of `{}`", m.rows(), measurements[j].len(), measurements[j].name),
            ));
        }
        parsed.push(m);
    }
    let data = if parsed.is_empty() { Matrix::zeros(0, preparations.len()) } else { Matrix::vstack(&parsed) };
    CopeMatrix::try_new(data, measurements, preparations, backend)
}

/// Parses and validates a matrix document.
pub fn parse_cope(text: &[u8]) -> Result<CopeMatrix> {
    let v = parse_text(text)?;
    expect_document(&v, "cope")?;
    cope_from_value(&v, "")
}

// ---------------------------------------------------------------------------
// Models

pub fn model_value(m: &ModelFactorization) -> Value {
    let mut obj = Map::new();
    obj.insert("document".into(), json!("model"));
    obj.insert("format_version".into(), json!(FORMAT_VERSION));
    backend_fields(&mut obj, m.backend);
    obj.insert("kind".into(), json!(m.kind.name()));
    obj.insert("inner_dim".into(), json!(m.inner_dim()));
    obj.insert("block_sizes".into(), json!(m.block_sizes));
    obj.insert("effects".into(), matrix_value(&m.effects));
    obj.insert("states".into(), matrix_value(&m.states));
    obj.insert("unit".into(), Value::Array(m.unit.iter().map(scalar_value).collect()));
    Value::Object(obj)
}

pub fn emit_model(m: &ModelFactorization) -> String {
    to_text(&model_value(m))
}

pub fn model_from_value(v: &Value, path: &str) -> Result<ModelFactorization> {
    let backend = parse_backend(v, path)?;
    let kind_name = as_str(field(v, "kind", path)?, &join(path, "kind"))?;
    let kind = ModelKind::from_name(kind_name)
        .ok_or_else(|| parse_err(&join(path, "kind"), format!("unknown model kind `{kind_name}`")))?;
    let inner_dim = as_usize(field(v, "inner_dim", path)?, &join(path, "inner_dim"))?;
    let block_sizes = usize_list(field(v, "block_sizes", path)?, &join(path, "block_sizes"))?;
    let effects = parse_matrix(field(v, "effects", path)?, backend, &join(path, "effects"), Some(inner_dim))?;
    let states = parse_matrix(field(v, "states", path)?, backend, &join(path, "states"), None)?;
    if states.rows() != inner_dim {
        return Err(parse_err(&join(path, "states"), format!("{} rows, expected inner_dim {inner_dim}", states.rows())));
    }
    let upath = join(path, "unit");
    let unit: Vec<Scalar> = as_array(field(v, "unit", path)?, &upath)?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_scalar(x, backend, &format!("{upath}[{i}]")))
        .collect::<Result<_>>()?;
    if unit.len() != inner_dim {
        return Err(parse_err(&upath, format!("{} entries, expected inner_dim {inner_dim}", unit.len())));
    }
    let mut m = ModelFactorization::new(effects, states, block_sizes, kind, backend)?;
    m.unit = unit;
    Ok(m)
}

pub fn parse_model(text: &[u8]) -> Result<ModelFactorization> {
    let v = parse_text(text)?;
    expect_document(&v, "model")?;
    model_from_value(&v, "")
}

// ---------------------------------------------------------------------------
// Certificates

fn serde_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn evidence_value(e: &Evidence) -> Value {
    match e {
        Evidence::EnmfModel(m) => json!({ "model": model_value(m) }),
        Evidence::VertexForcing { polytope, forced_rank } => json!({
            "forced_rank": forced_rank,
            "ambient_dim": polytope.ambient_dim,
            "basis": rat_matrix_value(&polytope.basis),
            "vertices": Value::Array(
                polytope.vertices.iter().map(|v| Value::Array(v.iter().map(rational_value).collect())).collect()
            ),
        }),
        Evidence::SpernerSeparation { witness, rank } => json!({ "witness": serde_value(witness), "rank": rank }),
        Evidence::ExhaustiveAbsence(log) => json!({ "log": serde_value(log) }),
        Evidence::None => json!({}),
    }
}

pub fn certificate_value(cert: &Certificate) -> Value {
    json!({
        "document": "certificate",
        "format_version": FORMAT_VERSION,
        "verdict": cert.verdict.name(),
        "evidence_kind": cert.evidence.kind(),
        "evidence": evidence_value(&cert.evidence),
        "rank": cert.rank,
        "searched_k_range": cert.searched_k_range.map(|(a, b)| vec![a, b]),
        "matrix": cope_value(&cert.matrix),
        "notes": cert.notes,
        "wall_time_ms": cert.wall_time_ms,
    })
}

pub fn emit_certificate(cert: &Certificate) -> String {
    to_text(&certificate_value(cert))
}

fn parse_evidence(kind: &str, v: &Value) -> Result<Evidence> {
    let path = "evidence";
    Ok(match kind {
        "EnmfModel" => Evidence::EnmfModel(model_from_value(field(v, "model", path)?, "evidence.model")?),
        "VertexForcing" => {
            let ambient_dim = as_usize(field(v, "ambient_dim", path)?, "evidence.ambient_dim")?;
            let basis = parse_rat_matrix(field(v, "basis", path)?, "evidence.basis", None)?;
            let vpath = "evidence.vertices";
            let vertices = as_array(field(v, "vertices", path)?, vpath)?
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let rp = format!("{vpath}[{i}]");
                    as_array(row, &rp)?
                        .iter()
                        .enumerate()
                        .map(|(k, x)| parse_rational_value(x, &format!("{rp}[{k}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let forced_rank = as_usize(field(v, "forced_rank", path)?, "evidence.forced_rank")?;
            Evidence::VertexForcing { polytope: SpanSimplexPolytope { ambient_dim, basis, vertices }, forced_rank }
        }
        "SpernerSeparation" => {
            let witness: SpernerWitness = serde_json::from_value(field(v, "witness", path)?.clone())
                .map_err(|e| parse_err("evidence.witness", e))?;
            let rank = as_usize(field(v, "rank", path)?, "evidence.rank")?;
            Evidence::SpernerSeparation { witness, rank }
        }
        "ExhaustiveAbsence" => {
            let log: SearchLog =
                serde_json::from_value(field(v, "log", path)?.clone()).map_err(|e| parse_err("evidence.log", e))?;
            Evidence::ExhaustiveAbsence(log)
        }
        "None" => Evidence::None,
        other => return Err(parse_err("evidence_kind", format!("unknown evidence kind `{other}`"))),
    })
}

/// Parses a certificate and re-checks its evidence against the embedded matrix.
pub fn parse_certificate(text: &[u8]) -> Result<Certificate> {
    let v = parse_text(text)?;
    expect_document(&v, "certificate")?;
    let verdict = match as_str(field(&v, "verdict", "")?, "verdict")? {
        "Noncontextual" => Verdict::Noncontextual,
        "Contextual" => Verdict::Contextual,
        "Undetermined" => Verdict::Undetermined,
        other => return Err(parse_err("verdict", format!("unknown verdict `{other}`"))),
    };
    let kind = as_str(field(&v, "evidence_kind", "")?, "evidence_kind")?;
    let evidence = parse_evidence(kind, field(&v, "evidence", "")?)?;
    let rank = as_usize(field(&v, "rank", "")?, "rank")?;
    let searched_k_range = match field(&v, "searched_k_range", "")? {
        Value::Null => None,
        other => match usize_list(other, "searched_k_range")?.as_slice() {
            [a, b] => Some((*a, *b)),
            _ => return Err(parse_err("searched_k_range", "expected [low, high]")),
        },
    };
    let matrix = cope_from_value(field(&v, "matrix", "")?, "matrix")?;
    let notes = string_list(field(&v, "notes", "")?, "notes")?;
    let wall_time_ms = field(&v, "wall_time_ms", "")?
        .as_u64()
        .ok_or_else(|| parse_err("wall_time_ms", "expected a nonnegative integer"))?;
    let cert = Certificate { verdict, evidence, rank, searched_k_range, matrix, notes, wall_time_ms };
    cert.check()?;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theories::{boxworld, spekkens};

    #[test]
    fn spekkens_entries_are_strings() {
        let text = emit_cope(&spekkens());
        assert!(text.contains("\"1/2\""));
        assert!(text.contains("\"0\""));
        assert_eq!(parse_cope(text.as_bytes()).unwrap(), spekkens());
    }

    #[test]
    fn keys_are_sorted() {
        let text = emit_cope(&boxworld());
        let b = text.find("\"backend\"").unwrap();
        let p = text.find("\"preparations\"").unwrap();
        assert!(b < p);
    }

    #[test]
    fn bad_column_sum_is_reported() {
        let text = r#"{"document":"cope","format_version":"1","backend":"rational",
            "preparations":["a","b"],"measurements":[{"name":"M","outcomes":["1","2"]}],
            "blocks":[[["1","1"],["0","1"]]]}"#;
        let err = parse_cope(text.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("column 1"), "{err}");
    }
}
