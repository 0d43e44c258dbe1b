//! JSON interchange for function descriptions and logarithmic functions.
//!
//! Syntax errors carry the line and column reported by the JSON reader.
//! Semantic errors (a bad place, a missing class) point at the offending
//! string literal when it can be found in the source text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::classes::{class_count, ClassIndex};
use crate::error::ParseError;
use crate::field::{FieldModel, LogFunction, LogKind, Place, Valuation};
use crate::function::{InvariantFunction, Value, ValueSet, Window};
use crate::lattice::{ScalarDomain, Vector};
use crate::padic::{Padic, DEFAULT_PRECISION};

/// Largest table a description may ask for.
const MAX_CLASSES: u64 = 1 << 20;
/// Largest window `(2M+1)^n` a description may ask for.
const MAX_WINDOW: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum DomainSpec {
    #[serde(rename = "Z")]
    Integer { rank: usize },
    #[serde(rename = "Fq")]
    PrimeField { q: u64, rank: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Table,
    Depthk,
}

/// The ring values are read in. Labels are the default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RingSpec {
    Labels {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
    Zmod {
        modulus: u64,
    },
    Zp {
        p: u64,
        precision: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuesSpec {
    pub kind: TableKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingSpec>,
    pub entries: Vec<(Vector, Json)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    #[serde(rename = "box")]
    pub bound: i64,
    pub depth: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub domain: DomainSpec,
    pub values: ValuesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
}

/// Line and column (1-based) of the first occurrence of `needle` in `text`.
fn locate(text: &str, needle: &str) -> Option<(usize, usize)> {
    let offset = text.find(needle)?;
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().unwrap().chars().count() + 1;
    Some((line, column))
}

/// Attaches the position of `literal` (as a JSON string) to `message`.
fn error_near(text: &str, literal: &str, message: String) -> ParseError {
    match locate(text, &format!("\"{literal}\"")) {
        Some((l, c)) => ParseError::at(message, l, c),
        None => ParseError::invalid(message),
    }
}

fn entry_error(text: &str, i: usize, class: &[i64], message: String) -> ParseError {
    let compact = serde_json::to_string(class).unwrap();
    let message = format!("entries[{i}]: {message}");
    // Entries are usually written on one line each; fall back to no position.
    match text.match_indices('[').find(|(o, _)| text[o + 1..].trim_start().replace(' ', "").starts_with(&compact)) {
        Some((offset, _)) => {
            let before = &text[..offset];
            ParseError::at(message, before.matches('\n').count() + 1, before.rsplit('\n').next().unwrap().chars().count() + 1)
        }
        None => ParseError::invalid(message),
    }
}

fn read_value(ring: &RingSpec, raw: &Json) -> Result<Value, String> {
    match ring {
        RingSpec::Labels { .. } => match raw {
            Json::String(s) => Ok(Value::Label(s.clone())),
            Json::Number(n) => Ok(Value::Label(n.to_string())),
            other => Err(format!("expected a label, got {other}")),
        },
        RingSpec::Zmod { modulus } => match raw.as_u64() {
            Some(r) if r < *modulus => Ok(Value::Residue(r)),
            _ => Err(format!("expected an integer in [0, {modulus}), got {raw}")),
        },
        RingSpec::Zp { p, precision } => match raw {
            Json::String(s) => {
                let x = Padic::from_digit_string(*p, s).map_err(|e| e.message)?;
                if x.precision() != *precision {
                    return Err(format!("digit string {s:?} has {} digits, expected {precision}", x.precision()));
                }
                Ok(Value::Padic(x))
            }
            Json::Number(n) => {
                n.as_i64().map(|v| Value::Padic(Padic::from_i64(*p, *precision, v))).ok_or_else(|| format!("{n} is not an integer"))
            }
            other => Err(format!("expected a digit string, got {other}")),
        },
    }
}

fn value_set_of(ring: &RingSpec, values: &[Value]) -> Result<ValueSet, String> {
    Ok(match ring {
        RingSpec::Labels { labels: Some(labels) } => {
            if let Some(Value::Label(l)) = values.iter().find(|v| !matches!(v, Value::Label(l) if labels.contains(l))) {
                return Err(format!("label {l:?} is not among the declared labels"));
            }
            ValueSet::Finite(labels.clone())
        }
        RingSpec::Labels { labels: None } => {
            let mut labels: Vec<String> = values.iter().map(Value::to_string).collect();
            labels.sort();
            labels.dedup();
            ValueSet::Finite(labels)
        }
        RingSpec::Zmod { modulus } => ValueSet::Residue(*modulus),
        RingSpec::Zp { p, precision } => ValueSet::Padic { p: *p, precision: *precision },
    })
}

fn check_rank(rank: usize) -> Result<(), ParseError> {
    if !(1..=6).contains(&rank) {
        return Err(ParseError::invalid(format!("rank must be between 1 and 6, got {rank}")));
    }
    Ok(())
}

/// Parses a function description.
pub fn parse_function(text: &str) -> Result<InvariantFunction, ParseError> {
    let file: FunctionFile = serde_json::from_str(text)?;
    let ring = file.values.ring.clone().unwrap_or(RingSpec::Labels { labels: None });
    if let RingSpec::Zp { p, precision } = ring {
        Padic::check_params(p, precision)?;
    }
    if let RingSpec::Zmod { modulus: 0 } = ring {
        return Err(ParseError::invalid("modulus must be positive"));
    }
    let (q, rank, p, k) = match (&file.domain, file.values.kind) {
        (DomainSpec::PrimeField { q, rank }, TableKind::Table) => {
            ScalarDomain::prime_field(*q)?;
            (Some(*q), *rank, *q, 1)
        }
        (DomainSpec::Integer { rank }, TableKind::Depthk) => {
            let (Some(p), Some(k)) = (file.values.p, file.values.k) else {
                return Err(ParseError::invalid("depthk values need \"p\" and \"k\""));
            };
            ScalarDomain::prime_field(p)?;
            if k == 0 {
                return Err(ParseError::invalid("depth k must be at least 1"));
            }
            (None, *rank, p, k)
        }
        (DomainSpec::PrimeField { .. }, TableKind::Depthk) => return Err(ParseError::invalid("Fq domains take \"table\" values")),
        (DomainSpec::Integer { .. }, TableKind::Table) => return Err(ParseError::invalid("Z domains take \"depthk\" values")),
    };
    check_rank(rank)?;
    let too_big = k.checked_mul(rank as u32).and_then(|e| (p as u128).checked_pow(e)).is_none_or(|n| n > MAX_CLASSES as u128);
    if too_big || class_count(rank, p, k) > MAX_CLASSES {
        return Err(ParseError::invalid(format!("rank {rank} at modulus {p}^{k} has too many classes")));
    }
    let index = ClassIndex::get(rank, p, k);
    let mut slots: Vec<Option<Value>> = vec![None; index.len()];
    for (i, (class, raw)) in file.values.entries.iter().enumerate() {
        if class.len() != rank {
            return Err(entry_error(text, i, class, format!("class has {} coordinates, expected {rank}", class.len())));
        }
        let slot = match q {
            Some(_) => index.class_of_residue(class),
            None if class.contains(&i64::MIN) => None,
            None => index.class_of(class),
        };
        let Some(slot) = slot else {
            return Err(entry_error(text, i, class, "class is zero".into()));
        };
        let value = read_value(&ring, raw).map_err(|m| entry_error(text, i, class, m))?;
        match &slots[slot] {
            Some(prev) if *prev != value => {
                return Err(entry_error(text, i, class, format!("conflicts with an earlier entry of value {prev}")));
            }
            _ => slots[slot] = Some(value),
        }
    }
    let values = slots
        .into_iter()
        .zip(index.representatives())
        .map(|(v, rep)| v.ok_or_else(|| ParseError::invalid(format!("class {rep:?} has no entry"))))
        .collect::<Result<Vec<_>, _>>()?;
    let value_set = value_set_of(&ring, &values).map_err(ParseError::invalid)?;
    let built = match q {
        Some(q) => InvariantFunction::from_points(q, rank, value_set, |v| values[index.class_of_residue(v).unwrap()].clone()),
        None => {
            let window = match file.window {
                Some(w) => {
                    if w.bound < 1 || (2 * w.bound as u128 + 1).checked_pow(rank as u32).is_none_or(|n| n > MAX_WINDOW) {
                        return Err(ParseError::invalid(format!("window box {} is out of range for rank {rank}", w.bound)));
                    }
                    if w.depth != k {
                        return Err(ParseError::invalid(format!("window depth {} differs from table depth {k}", w.depth)));
                    }
                    Window::new(w.bound, k)
                }
                None => Window::new(default_box(rank), k),
            };
            InvariantFunction::depth_k(rank, p, k, value_set, values, window)
        }
    };
    built.map_err(|e| ParseError::invalid(e.to_string()))
}

/// The default box: the largest radius keeping the window under 10^4 vectors.
pub fn default_box(rank: usize) -> i64 {
    (1..=8).rev().find(|m: &i64| ((2 * m + 1) as u64).pow(rank as u32) <= 10_000).unwrap_or(1)
}

/// The description of a full table or depth-k function.
pub fn describe_function(f: &InvariantFunction) -> Result<FunctionFile, ParseError> {
    let ring = match f.value_set() {
        ValueSet::Finite(labels) => RingSpec::Labels { labels: Some(labels.clone()) },
        ValueSet::Residue(m) => RingSpec::Zmod { modulus: *m },
        ValueSet::Padic { p, precision } => RingSpec::Zp { p: *p, precision: *precision },
    };
    let to_json = |v: &Value| serde_json::to_value(v).unwrap();
    let rank = f.rank();
    match f.lattice().domain {
        ScalarDomain::PrimeField(q) => {
            let index = ClassIndex::get(rank, q, 1);
            let entries = index.representatives().iter().map(|r| (r.clone(), to_json(f.value_of(f.eval_index(r))))).collect();
            Ok(FunctionFile {
                domain: DomainSpec::PrimeField { q, rank },
                values: ValuesSpec { kind: TableKind::Table, p: None, k: None, ring: Some(ring), entries },
                window: None,
            })
        }
        ScalarDomain::Integer => {
            let (p, k) = f.depth_params().ok_or_else(|| ParseError::invalid("only depth-k functions can be described"))?;
            let entries = f.table_entries().unwrap().into_iter().map(|(r, v)| (r, to_json(&v))).collect();
            Ok(FunctionFile {
                domain: DomainSpec::Integer { rank },
                values: ValuesSpec { kind: TableKind::Depthk, p: Some(p), k: Some(k), ring: Some(ring), entries },
                window: Some(WindowSpec { bound: f.window().bound, depth: k }),
            })
        }
    }
}

pub fn write_function(f: &InvariantFunction) -> Result<String, ParseError> {
    Ok(serde_json::to_string_pretty(&describe_function(f)?).unwrap())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CharacterSpec {
    pub on_generators: Vec<i64>,
    pub valuation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    Places(Vec<(String, i64)>),
    Character { character: CharacterSpec },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogFunctionFile {
    pub model: FieldModel,
    pub weights: WeightsSpec,
    pub p: u64,
    #[serde(default = "default_precision")]
    pub precision: u32,
}

fn default_precision() -> u32 {
    DEFAULT_PRECISION
}

/// Parses a logarithmic function description.
pub fn parse_log_function(text: &str) -> Result<LogFunction, ParseError> {
    let file: LogFunctionFile = serde_json::from_str(text)?;
    file.model.check().map_err(into_parse)?;
    Padic::check_params(file.p, file.precision)?;
    let q = file.model.q();
    match &file.weights {
        WeightsSpec::Places(ws) => {
            let mut merged: BTreeMap<Place, i64> = BTreeMap::new();
            for (place, w) in ws {
                let pl = Place::parse(q, place).map_err(|e| error_near(text, place, into_parse(e).message))?;
                *merged.entry(pl).or_default() += w;
            }
            LogFunction::place_weights(file.model, file.p, file.precision, merged.into_iter().collect()).map_err(into_parse)
        }
        WeightsSpec::Character { character } => {
            let v = &character.valuation;
            let valuation = Valuation::parse(file.model, v).map_err(|e| error_near(text, v, into_parse(e).message))?;
            LogFunction::character(file.model, file.p, file.precision, valuation, &character.on_generators).map_err(into_parse)
        }
    }
}

/// The description of a place-weight or character function.
pub fn describe_log_function(f: &LogFunction) -> Result<LogFunctionFile, ParseError> {
    let weights = match &f.kind {
        LogKind::PlaceWeights(ws) => WeightsSpec::Places(ws.iter().map(|(pl, w)| (pl.to_string(), w.signed())).collect()),
        LogKind::Character { valuation, on_generators } => WeightsSpec::Character {
            character: CharacterSpec { on_generators: on_generators.iter().map(Padic::signed).collect(), valuation: valuation.to_string() },
        },
        LogKind::Linear(_) => return Err(ParseError::invalid("linear combinations have no file form")),
    };
    Ok(LogFunctionFile { model: f.model, weights, p: f.p, precision: f.precision })
}

pub fn write_log_function(f: &LogFunction) -> Result<String, ParseError> {
    Ok(serde_json::to_string_pretty(&describe_log_function(f)?).unwrap())
}

fn into_parse(e: crate::error::Error) -> ParseError {
    match e {
        crate::error::Error::Parse(p) => p,
        other => ParseError::invalid(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FANO: &str = r#"{
  "domain": {"kind": "Fq", "q": 2, "rank": 3},
  "values": {"kind": "table", "entries": [
    [[0,0,1], "a"], [[0,1,0], "a"], [[0,1,1], "b"], [[1,0,0], "a"],
    [[1,0,1], "b"], [[1,1,0], "b"], [[1,1,1], "b"]
  ]}
}"#;

    #[test]
    fn table_round_trip() {
        let f = parse_function(FANO).unwrap();
        assert_eq!(f.rank(), 3);
        assert_eq!(f.evaluate(&[1, 1, 1]).unwrap(), Value::Label("b".into()));
        let again = parse_function(&write_function(&f).unwrap()).unwrap();
        assert_eq!(f.table_entries(), again.table_entries());
    }

    #[test]
    fn depthk_round_trip_and_scaling() {
        let text = r#"{"domain":{"kind":"Z","rank":2},
            "values":{"kind":"depthk","p":2,"k":1,"ring":{"kind":"zmod","modulus":2},
                      "entries":[[[0,1],0],[[1,0],1],[[3,3],1]]},
            "window":{"box":3,"depth":1}}"#;
        let f = parse_function(text).unwrap();
        assert_eq!(f.evaluate(&[2, 3]).unwrap(), Value::Residue(0));
        assert_eq!(f.window(), Window::new(3, 1));
        let again = parse_function(&write_function(&f).unwrap()).unwrap();
        assert_eq!(f.table_entries(), again.table_entries());
    }

    #[test]
    fn diagnostics_carry_positions() {
        let truncated = &FANO[..60];
        let e = parse_function(truncated).unwrap_err();
        assert!(e.line.is_some() && e.column.is_some(), "{e}");

        let missing = FANO.replace(r#"[[1,1,1], "b"]"#, r#"[[1,1,1], 7]"#).replace(r#", [[1,1,0], "b"]"#, "");
        let e = parse_function(&missing).unwrap_err();
        assert!(e.message.contains("[1, 1, 0]"), "{e}");

        let conflict = FANO.replace(r#"[[1,1,1], "b"]"#, r#"[[1,1,1], "b"], [[1,1,1], "a"]"#);
        let e = parse_function(&conflict).unwrap_err();
        assert_eq!((e.line, e.column), (Some(5), Some(37)), "{e}");
    }

    #[test]
    fn rejects_bad_domains() {
        for bad in [
            r#"{"domain":{"kind":"Fq","q":4,"rank":2},"values":{"kind":"table","entries":[]}}"#,
            r#"{"domain":{"kind":"Fq","q":3,"rank":0},"values":{"kind":"table","entries":[]}}"#,
            r#"{"domain":{"kind":"Z","rank":2},"values":{"kind":"table","entries":[]}}"#,
            r#"{"domain":{"kind":"Z","rank":2},"values":{"kind":"depthk","p":2,"entries":[]}}"#,
            r#"{"domain":{"kind":"Z","rank":6},"values":{"kind":"depthk","p":7,"k":9,"entries":[]}}"#,
            r#"{"domain":{"kind":"Fq","q":2,"rank":1},"values":{"kind":"table","entries":[[[1],"a"]]},"extra":1}"#,
        ] {
            assert!(parse_function(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn log_function_files() {
        let weights = r#"{"model":{"kind":"univariate","q":3},"weights":[["t",1],["t+1",-2]],"p":3,"precision":8}"#;
        let f = parse_log_function(weights).unwrap();
        assert!(matches!(&f.kind, LogKind::PlaceWeights(ws) if ws.len() == 2));
        assert_eq!(parse_log_function(&write_log_function(&f).unwrap()).unwrap(), f);

        let lex = r#"{"model":{"kind":"bivariate","q":3},"weights":{"character":{"onGenerators":[1,5],"valuation":"lex"}},"p":3}"#;
        let g = parse_log_function(lex).unwrap();
        assert_eq!(g.precision, DEFAULT_PRECISION);
        assert_eq!(parse_log_function(&write_log_function(&g).unwrap()).unwrap(), g);

        let bad = "{\"model\":{\"kind\":\"univariate\",\"q\":3},\n\"weights\":[[\"t^2+2\",1]],\"p\":3}";
        let e = parse_log_function(bad).unwrap_err();
        assert_eq!((e.line, e.column), (Some(2), Some(13)), "{e}");
        assert!(parse_log_function(&lex.replace("[1,5]", "[1]")).is_err());
    }
}
