//! Text and JSON rendering helpers.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use polyrep::vertex::VertexLabel;
use polyrep::GameType;

/// Compact decimal for reports: integers verbatim, otherwise six decimals
/// with trailing zeros removed.
pub fn num(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        return format!("{}", v as i64);
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn vector(v: &DVector<f64>) -> String {
    format!("[{}]", v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", "))
}

pub fn matrix(m: &DMatrix<f64>, indent: &str) -> String {
    let cells: Vec<Vec<String>> = m.row_iter().map(|r| r.iter().map(|x| num(*x)).collect()).collect();
    let width = cells.iter().flatten().map(|c| c.len()).max().unwrap_or(1);
    cells
        .iter()
        .map(|r| format!("{indent}{}", r.iter().map(|c| format!("{c:>width$}")).collect::<Vec<_>>().join(" ")))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn strategies(s: &[usize]) -> String {
    s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn labels(vs: &[VertexLabel]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn vector_json(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

pub fn matrix_json(m: &DMatrix<f64>) -> Value {
    json!(m.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

pub fn type_json(ty: &GameType) -> Value {
    json!(ty.groups())
}

pub fn one_based(s: &[usize]) -> Value {
    json!(s.iter().map(|i| i + 1).collect::<Vec<_>>())
}
