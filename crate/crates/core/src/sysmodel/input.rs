use serde_json::{Map, Value};

use super::{NetworkTopology, NetworkedSystem, NodeDynamics};
use crate::error::{Error, Result};
use crate::multirate::{MultiRateKind, MultiRateSpec};
use crate::numkernel::{CMatrix, Tolerance, C64};

const TOP_KEYS: &[&str] = &["A", "B", "C", "H", "W", "delta", "h", "multirate", "tolerance"];
const MULTIRATE_KEYS: &[&str] = &["kind", "l"];
const TOLERANCE_KEYS: &[&str] = &["rank_rel", "eig_cluster", "chain_residual"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Report unknown keys as warnings instead of failing.
    pub lenient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Single(NetworkedSystem),
    MultiRate(MultiRateSpec),
}

impl Model {
    pub fn base(&self) -> &NetworkedSystem {
        match self {
            Model::Single(sys) => sys,
            Model::MultiRate(spec) => &spec.base,
        }
    }
}

/// A parsed input file.
#[derive(Debug, Clone, PartialEq)]
pub struct InputDocument {
    pub model: Model,
    pub tolerance: Option<Tolerance>,
    pub warnings: Vec<String>,
}

/// Strict parse of a system description.
pub fn parse_system(text: &[u8]) -> Result<InputDocument> {
    parse_document(text, ParseOptions::default())
}

pub fn parse_document(text: &[u8], opts: ParseOptions) -> Result<InputDocument> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Parse(format!("input is not UTF-8: {e}")))?;
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| Error::validation("$", "document must be a JSON object"))?;
    let mut warnings = Vec::new();
    check_keys(obj, TOP_KEYS, "", opts, &mut warnings)?;

    let a = matrix(required(obj, "A")?, "A")?;
    let n = a.nrows();
    let b = matrix(required(obj, "B")?, "B")?;
    let c = match obj.get("C") {
        Some(v) => matrix(v, "C")?,
        None => CMatrix::identity(n, n),
    };
    let coupling = match obj.get("H") {
        Some(v) => matrix(v, "H")?,
        None => CMatrix::identity(n, c.nrows()),
    };
    let w = matrix(required(obj, "W")?, "W")?;
    let delta = match obj.get("delta") {
        Some(v) => delta(v)?,
        None => vec![1; w.nrows()],
    };
    let h = required(obj, "h")?
        .as_f64()
        .ok_or_else(|| Error::validation("h", "must be a number"))?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::validation("h", "sampling period must be positive"));
    }
    let node = NodeDynamics::new(a, b, c, coupling)?;
    let topo = NetworkTopology::new(w, delta)?;
    let base = NetworkedSystem::new(node, topo, h)?;

    let model = match obj.get("multirate") {
        None => Model::Single(base),
        Some(v) => Model::MultiRate(multirate(v, base, opts, &mut warnings)?),
    };
    let tolerance = match obj.get("tolerance") {
        None => None,
        Some(v) => Some(tolerance(v, opts, &mut warnings)?),
    };
    Ok(InputDocument {
        model,
        tolerance,
        warnings,
    })
}

fn check_keys(
    obj: &Map<String, Value>,
    allowed: &[&str],
    prefix: &str,
    opts: ParseOptions,
    warnings: &mut Vec<String>,
) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let path = format!("{prefix}{key}");
            if opts.lenient {
                warnings.push(format!("ignoring unknown key {path}"));
            } else {
                return Err(Error::validation(path, "unknown key"));
            }
        }
    }
    Ok(())
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::validation(key, "missing required field"))
}

fn matrix(v: &Value, path: &str) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::validation(path, "must be an array of rows"))?;
    if rows.is_empty() {
        return Err(Error::validation(path, "must not be empty"));
    }
    let mut data: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::validation(format!("{path}[{i}]"), "must be an array of numbers"))?;
        let mut out = Vec::with_capacity(row.len());
        for (j, x) in row.iter().enumerate() {
            let x = x
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::validation(format!("{path}[{i}][{j}]"), "must be a finite number"))?;
            out.push(x);
        }
        data.push(out);
    }
    let cols = data[0].len();
    if cols == 0 {
        return Err(Error::validation(format!("{path}[0]"), "rows must not be empty"));
    }
    if let Some(i) = data.iter().position(|r| r.len() != cols) {
        return Err(Error::validation(format!("{path}[{i}]"), format!("expected {cols} entries")));
    }
    Ok(CMatrix::from_fn(data.len(), cols, |i, j| C64::new(data[i][j], 0.0)))
}

fn delta(v: &Value) -> Result<Vec<u8>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::validation("delta", "must be an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| match x.as_u64() {
            Some(0) => Ok(0),
            Some(1) => Ok(1),
            _ => Err(Error::validation(format!("delta[{i}]"), "must be 0 or 1")),
        })
        .collect()
}

fn multirate(
    v: &Value,
    base: NetworkedSystem,
    opts: ParseOptions,
    warnings: &mut Vec<String>,
) -> Result<MultiRateSpec> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::validation("multirate", "must be an object"))?;
    check_keys(obj, MULTIRATE_KEYS, "multirate.", opts, warnings)?;
    let kind = match obj.get("kind").and_then(Value::as_str) {
        Some("TMS") => MultiRateKind::Tms,
        Some("CMS") => MultiRateKind::Cms,
        _ => return Err(Error::validation("multirate.kind", "must be \"TMS\" or \"CMS\"")),
    };
    let l = obj
        .get("l")
        .and_then(Value::as_u64)
        .filter(|&l| l >= 1)
        .ok_or_else(|| Error::validation("multirate.l", "must be an integer >= 1"))?;
    Ok(MultiRateSpec {
        base,
        kind,
        l: l as usize,
    })
}

fn tolerance(v: &Value, opts: ParseOptions, warnings: &mut Vec<String>) -> Result<Tolerance> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::validation("tolerance", "must be an object"))?;
    check_keys(obj, TOLERANCE_KEYS, "tolerance.", opts, warnings)?;
    let mut tol = Tolerance::default();
    for (key, slot) in [
        ("rank_rel", &mut tol.rank_rel),
        ("eig_cluster", &mut tol.eig_cluster),
        ("chain_residual", &mut tol.chain_residual),
    ] {
        if let Some(x) = obj.get(key) {
            *slot = x
                .as_f64()
                .ok_or_else(|| Error::validation(format!("tolerance.{key}"), "must be a number"))?;
        }
    }
    tol.validate()
        .map_err(|e| Error::validation("tolerance", e.to_string()))?;
    Ok(tol)
}

fn matrix_value(m: &CMatrix) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|z| Value::from(z.re)).collect()))
            .collect(),
    )
}

/// Inverse of [`parse_document`] (warnings are not serialized).
pub fn serialize_document(doc: &InputDocument) -> String {
    let sys = doc.model.base();
    let mut obj = Map::new();
    obj.insert("A".into(), matrix_value(&sys.node.a));
    obj.insert("B".into(), matrix_value(&sys.node.b));
    obj.insert("C".into(), matrix_value(&sys.node.c));
    obj.insert("H".into(), matrix_value(&sys.node.coupling));
    obj.insert("W".into(), matrix_value(&sys.topo.w));
    obj.insert("delta".into(), Value::from(sys.topo.delta.clone()));
    obj.insert("h".into(), Value::from(sys.h));
    if let Model::MultiRate(spec) = &doc.model {
        let kind = match spec.kind {
            MultiRateKind::Tms => "TMS",
            MultiRateKind::Cms => "CMS",
        };
        obj.insert(
            "multirate".into(),
            serde_json::json!({ "kind": kind, "l": spec.l }),
        );
    }
    if let Some(tol) = &doc.tolerance {
        obj.insert("tolerance".into(), serde_json::to_value(tol).expect("tolerance serializes"));
    }
    serde_json::to_string_pretty(&Value::Object(obj)).expect("document serializes")
}
