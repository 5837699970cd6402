//! JSON model and field files.
//!
//! Model file:
//!
//! ```json
//! {"kind": "potts", "q": 3, "k": 2, "beta": "1", "J": "1"}
//! {"kind": "generic", "q": 2, "k": 2, "beta": 1, "lambda": [["0", "2/3"], ["2/3", "0"]]}
//! {"kind": "markov", "q": 2, "k": 2, "P": [["1/2", "1/2"], ["1/4", "3/4"]]}
//! ```
//!
//! Strings are exact rationals `"p"` or `"p/q"`. JSON integers are exact as
//! well; other numbers are floats. A table is exact when every entry is, and
//! mixing rational strings with floats is an error. Markov models always have
//! `β = 1`; `beta` may be omitted or given as 1.
//!
//! Field file: `{"": [..], "a1": [..], "a1a2": [..]}`, vertex word to the
//! `q − 1` coordinates of `h′_x`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::model::{LambdaModel, LambdaTable, Provenance, StochasticMatrix, STOCHASTIC_ROW_TOLERANCE};
use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::topology::{Ball, Vertex, Word};

const MODEL_KEYS: [&str; 7] = ["kind", "q", "k", "beta", "lambda", "J", "P"];

fn scalar_of(v: &Value, path: &str, errs: &mut Vec<String>) -> Option<Scalar> {
    match v {
        Value::String(s) => match parse_rational(s) {
            Ok(r) => Some(Scalar::Exact(r)),
            Err(e) => {
                errs.push(format!("{path}: {e}"));
                None
            }
        },
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(Scalar::integer(i))
            } else if let Some(u) = n.as_u64() {
                Some(Scalar::Exact(BigRational::from_integer(u.into())))
            } else {
                match n.as_f64() {
                    Some(x) if x.is_finite() => Some(Scalar::Float(x)),
                    _ => {
                        errs.push(format!("{path}: number is not finite"));
                        None
                    }
                }
            }
        }
        _ => {
            errs.push(format!("{path}: expected a rational string or a number"));
            None
        }
    }
}

fn count_of(obj: &Map<String, Value>, key: &str, errs: &mut Vec<String>) -> Option<usize> {
    match obj.get(key) {
        None => {
            errs.push(format!("{key}: missing"));
            None
        }
        Some(v) => match v.as_u64() {
            Some(n) => Some(n as usize),
            None => {
                errs.push(format!("{key}: expected a non-negative integer"));
                None
            }
        },
    }
}

enum Table {
    Exact(Vec<Vec<BigRational>>),
    Float(Vec<Vec<f64>>),
}

fn table_of(v: &Value, name: &str, q: Option<usize>, errs: &mut Vec<String>) -> Option<Table> {
    let Some(rows) = v.as_array() else {
        errs.push(format!("{name}: expected an array of rows"));
        return None;
    };
    let before = errs.len();
    if let Some(q) = q {
        if rows.len() != q {
            errs.push(format!("{name}: expected {q} rows, found {}", rows.len()));
        }
    }
    let mut cells = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let Some(row) = row.as_array() else {
            errs.push(format!("{name}[{i}]: expected an array"));
            continue;
        };
        if let Some(q) = q {
            if row.len() != q {
                errs.push(format!("{name}[{i}]: expected {q} entries, found {}", row.len()));
            }
        }
        cells.push(
            row.iter().enumerate().map(|(j, x)| (x.is_string(), scalar_of(x, &format!("{name}[{i}][{j}]"), errs))).collect::<Vec<_>>(),
        );
    }
    if errs.len() > before {
        return None;
    }
    let all_exact = cells.iter().flatten().all(|(_, s)| s.as_ref().is_some_and(Scalar::is_exact));
    if all_exact {
        return Some(Table::Exact(
            cells.into_iter().map(|r| r.into_iter().map(|(_, s)| s.unwrap().as_rational().unwrap().clone()).collect()).collect(),
        ));
    }
    if cells.iter().flatten().any(|(is_string, _)| *is_string) {
        errs.push(format!("{name}: {}", Error::MixedTable));
        return None;
    }
    Some(Table::Float(cells.into_iter().map(|r| r.into_iter().map(|(_, s)| s.unwrap().to_f64()).collect()).collect()))
}

fn check_rows(p: &Table, errs: &mut Vec<String>) {
    match p {
        Table::Exact(rows) => {
            for (i, r) in rows.iter().enumerate() {
                let sum: BigRational = r.iter().sum();
                if sum != BigRational::from_integer(1.into()) {
                    errs.push(format!("P: row {i} sums to {}, expected 1", format_rational(&sum)));
                }
            }
        }
        Table::Float(rows) => {
            for (i, r) in rows.iter().enumerate() {
                let sum: f64 = r.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_ROW_TOLERANCE {
                    errs.push(format!("P: row {i} sums to {sum}, expected 1"));
                }
            }
        }
    }
}

/// Parses and validates a model, reporting every problem found.
pub fn parse_model(text: &str) -> Result<LambdaModel> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Schema(vec![format!("not valid JSON: {e}")]))?;
    model_from_value(&value)
}

pub fn model_from_value(value: &Value) -> Result<LambdaModel> {
    let Some(obj) = value.as_object() else {
        return Err(Error::Schema(vec!["expected a JSON object".into()]));
    };
    let mut errs = Vec::new();
    for key in obj.keys() {
        if !MODEL_KEYS.contains(&key.as_str()) {
            errs.push(format!("{key}: unknown field"));
        }
    }
    let kind = match obj.get("kind").and_then(Value::as_str) {
        Some(k @ ("generic" | "potts" | "markov")) => Some(k),
        Some(other) => {
            errs.push(format!("kind: unknown kind {other:?}, expected generic, potts or markov"));
            None
        }
        None => {
            errs.push("kind: missing or not a string".into());
            None
        }
    };
    let q = count_of(obj, "q", &mut errs);
    let k = count_of(obj, "k", &mut errs);
    let beta = match (kind, obj.get("beta")) {
        (Some("markov"), None) => Some(Scalar::integer(1)),
        (_, None) => {
            errs.push("beta: missing".into());
            None
        }
        (_, Some(v)) => scalar_of(v, "beta", &mut errs),
    };
    if kind == Some("markov") {
        if let Some(b) = &beta {
            if b.to_f64() != 1.0 {
                errs.push(format!("beta: markov models have beta = 1, found {b}"));
            }
        }
    }
    let (payload, others): (&str, &[&str]) = match kind {
        Some("generic") => ("lambda", &["J", "P"]),
        Some("potts") => ("J", &["lambda", "P"]),
        Some("markov") => ("P", &["lambda", "J"]),
        _ => ("", &[]),
    };
    for other in others {
        if obj.contains_key(*other) {
            errs.push(format!("{other}: not allowed for kind {}", kind.unwrap_or_default()));
        }
    }
    let payload_value = if payload.is_empty() {
        None
    } else {
        let v = obj.get(payload);
        if v.is_none() {
            errs.push(format!("{payload}: missing"));
        }
        v
    };

    let model = match (kind, payload_value) {
        (Some("potts"), Some(v)) => scalar_of(v, "J", &mut errs).map(|j| (j, None)),
        (Some(_), Some(v)) => table_of(v, payload, q, &mut errs).map(|t| (Scalar::integer(0), Some(t))),
        _ => None,
    };
    if let (Some("markov"), Some((_, Some(t)))) = (kind, &model) {
        check_rows(t, &mut errs);
    }
    if !errs.is_empty() {
        return Err(Error::Schema(errs));
    }
    let (q, k, beta) = (q.unwrap(), k.unwrap(), beta.unwrap());
    let (j, table) = model.expect("payload parsed");
    let built = match (kind.unwrap(), table) {
        ("potts", _) => LambdaModel::potts(q, j, beta, k),
        ("generic", Some(Table::Exact(rows))) => LambdaModel::generic(q, k, beta, LambdaTable::exact_rows(rows)),
        ("generic", Some(Table::Float(rows))) => LambdaModel::generic(q, k, beta, LambdaTable::float_rows(rows)),
        ("markov", Some(Table::Exact(rows))) => LambdaModel::markov(StochasticMatrix::Exact(rows), k),
        ("markov", Some(Table::Float(rows))) => LambdaModel::markov(StochasticMatrix::Float(rows), k),
        _ => unreachable!("kind and payload checked above"),
    };
    built.map_err(|e| Error::Schema(vec![e.to_string()]))
}

fn scalar_value(s: &Scalar) -> Value {
    match s {
        Scalar::Exact(r) => Value::String(format_rational(r)),
        Scalar::Float(x) => Value::Number(Number::from_f64(*x).expect("finite")),
    }
}

fn rows_value(q: usize, cells: impl Iterator<Item = Value>) -> Value {
    let cells: Vec<Value> = cells.collect();
    Value::Array(cells.chunks(q).map(|r| Value::Array(r.to_vec())).collect())
}

/// Canonical JSON form; parsing it gives back an equal model.
pub fn model_to_value(model: &LambdaModel) -> Value {
    let q = model.q();
    let mut obj = Map::new();
    let kind = match model.provenance() {
        Provenance::Generic => "generic",
        Provenance::Potts { .. } => "potts",
        Provenance::Markov { .. } => "markov",
    };
    obj.insert("kind".into(), kind.into());
    obj.insert("q".into(), q.into());
    obj.insert("k".into(), model.k().into());
    obj.insert("beta".into(), scalar_value(model.beta()));
    match model.provenance() {
        Provenance::Potts { j } => {
            obj.insert("J".into(), scalar_value(j));
        }
        Provenance::Markov { p } => {
            let cells: Vec<Value> = match p {
                StochasticMatrix::Exact(rows) => rows.iter().flatten().map(|x| Value::String(format_rational(x))).collect(),
                StochasticMatrix::Float(rows) => {
                    rows.iter().flatten().map(|x| Value::Number(Number::from_f64(*x).expect("finite"))).collect()
                }
            };
            obj.insert("P".into(), rows_value(q, cells.into_iter()));
        }
        Provenance::Generic => {
            let cells: Vec<Value> = match model.table() {
                LambdaTable::Exact(v) => v.iter().map(|x| Value::String(format_rational(x))).collect(),
                LambdaTable::Float(v) => v.iter().map(|x| Value::Number(Number::from_f64(*x).expect("finite"))).collect(),
                LambdaTable::NegLog(_) => unreachable!("negative-log tables are markov"),
            };
            obj.insert("lambda".into(), rows_value(q, cells.into_iter()));
        }
    }
    Value::Object(obj)
}

pub fn model_to_string(model: &LambdaModel) -> String {
    serde_json::to_string_pretty(&model_to_value(model)).expect("serializable")
}

/// Reads a field file against `ball`, checking words, membership and
/// dimension; every problem is reported.
pub fn parse_field_file(text: &str, ball: &Ball, dim: usize) -> Result<BTreeMap<Vertex, Vec<f64>>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Schema(vec![format!("not valid JSON: {e}")]))?;
    let Some(obj) = value.as_object() else {
        return Err(Error::Schema(vec!["field file: expected a JSON object".into()]));
    };
    let mut errs = Vec::new();
    let mut out = BTreeMap::new();
    for (key, v) in obj {
        let vertex = match key.parse::<Word>() {
            Ok(w) => match ball.vertex_of_word(&w) {
                Some(x) => Some(x),
                None => {
                    errs.push(format!("{key:?}: not a reduced word of length ≤ {} over a1..a{}", ball.radius(), ball.k() + 1));
                    None
                }
            },
            Err(e) => {
                errs.push(format!("{key:?}: {e}"));
                None
            }
        };
        let coords: Option<Vec<f64>> = v.as_array().and_then(|a| a.iter().map(Value::as_f64).collect());
        match coords {
            Some(c) if c.len() != dim => errs.push(format!("{key:?}: expected {dim} coordinates, found {}", c.len())),
            Some(c) => {
                if let Some(x) = vertex {
                    out.insert(x, c);
                }
            }
            None => errs.push(format!("{key:?}: expected an array of numbers")),
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(Error::Schema(errs))
    }
}

/// Field file for every vertex of the assignment's ball.
pub fn field_file_value(fields: &crate::fields::FieldAssignment) -> Value {
    let ball = fields.ball();
    let obj: Map<String, Value> = ball
        .vertices()
        .map(|x| {
            let coords = fields.get(x).iter().map(|h| Value::Number(Number::from_f64(*h).expect("finite"))).collect();
            (ball.word(x).expect("in ball").to_string(), Value::Array(coords))
        })
        .collect();
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn errors(text: &str) -> Vec<String> {
        match parse_model(text) {
            Err(Error::Schema(e)) => e,
            other => panic!("expected schema errors, got {other:?}"),
        }
    }

    #[test]
    fn potts_round_trip() {
        let text = r#"{"kind": "potts", "q": 3, "k": 2, "beta": "1", "J": "1"}"#;
        let m = parse_model(text).unwrap();
        assert!(m.is_exact());
        let again = parse_model(&model_to_string(&m)).unwrap();
        assert_eq!(m, again);
        assert_eq!(model_to_string(&m), model_to_string(&again));

        let float = parse_model(r#"{"kind": "potts", "q": 2, "k": 1, "beta": 0.1, "J": 0.30000000000000004}"#).unwrap();
        assert_eq!(parse_model(&model_to_string(&float)).unwrap(), float);
    }

    #[test]
    fn generic_rational_strings_are_exact() {
        let m = parse_model(r#"{"kind": "generic", "q": 2, "k": 2, "beta": 1, "lambda": [["0", "2/3"], ["2/3", "-5"]]}"#)
            .unwrap();
        assert!(m.is_exact());
        assert_eq!(m.exact_lambda().unwrap()[1], rational(2, 3));
        assert_eq!(parse_model(&model_to_string(&m)).unwrap(), m);

        let f = parse_model(r#"{"kind": "generic", "q": 2, "k": 2, "beta": 1, "lambda": [[0, 0.5], [1, 0]]}"#).unwrap();
        assert_eq!(f.table().kind(), "float");
        assert_eq!(parse_model(&model_to_string(&f)).unwrap(), f);
    }

    #[test]
    fn markov_round_trip_and_row_sums() {
        let m = parse_model(r#"{"kind": "markov", "q": 2, "k": 2, "P": [["1/2", "1/2"], ["1/4", "3/4"]]}"#).unwrap();
        assert_eq!(m.table().kind(), "negative-log-rational");
        assert_eq!(parse_model(&model_to_string(&m)).unwrap(), m);

        let e = errors(r#"{"kind": "markov", "q": 2, "k": 2, "P": [[0.5, 0.49], [0.25, 0.75]]}"#);
        assert_eq!(e.len(), 1);
        assert!(e[0].contains("row 0") && e[0].contains("0.99"), "{e:?}");
        let e = errors(r#"{"kind": "markov", "q": 2, "k": 2, "beta": 2, "P": [["1/2", "1/3"], ["1/4", "1/4"]]}"#);
        assert_eq!(e.len(), 3, "{e:?}");
    }

    #[test]
    fn all_errors_in_one_pass() {
        let e = errors(r#"{"kind": "generic", "q": 2, "beta": "x", "lambda": [["0", "1/0"], [1]], "extra": 1}"#);
        assert!(e.iter().any(|m| m.starts_with("extra")));
        assert!(e.iter().any(|m| m.starts_with("k:")));
        assert!(e.iter().any(|m| m.starts_with("beta:")));
        assert!(e.iter().any(|m| m.starts_with("lambda[0][1]")));
        assert!(e.iter().any(|m| m.starts_with("lambda[1]")));
        assert!(e.len() >= 5);

        let e = errors(r#"{"kind": "generic", "q": 2, "k": 2, "beta": 1, "lambda": [["0", 0.5], ["1", "0"]]}"#);
        assert_eq!(e, vec![format!("lambda: {}", Error::MixedTable)]);
        assert!(errors(r#"{"kind": "ising"}"#).iter().any(|m| m.contains("unknown kind")));
        assert!(errors("[1]").len() == 1);
        assert!(errors("not json").len() == 1);
        let e = errors(r#"{"kind": "potts", "q": 1, "k": 2, "beta": 1, "J": 1}"#);
        assert!(e[0].contains("q must be at least 2"));
    }

    #[test]
    fn field_files() {
        let ball = Ball::new(2, 1).unwrap();
        let map = parse_field_file(r#"{"": [0.5], "a2": [1.0], "a3": [-2]}"#, &ball, 1).unwrap();
        assert_eq!(map[&Vertex(0)], vec![0.5]);
        assert_eq!(map[&Vertex(2)], vec![1.0]);
        assert_eq!(map[&Vertex(3)], vec![-2.0]);

        let bad = parse_field_file(r#"{"a1a2": [0.5], "b": [1], "a1": [1, 2], "a2": "x"}"#, &ball, 1).unwrap_err();
        let Error::Schema(e) = bad else { panic!() };
        assert_eq!(e.len(), 4, "{e:?}");

        let fields = crate::fields::FieldAssignment::constant(&ball, &[0.25]).unwrap();
        let text = serde_json::to_string(&field_file_value(&fields)).unwrap();
        let back = parse_field_file(&text, &ball, 1).unwrap();
        assert_eq!(back.len(), ball.len());
        assert!(back.values().all(|h| h == &vec![0.25]));
    }
}
