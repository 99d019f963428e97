//! JSON documents exchanged by the command-line front end.
//!
//! A configuration document looks like
//!
//! ```json
//! {"n": 2, "points": [[0, 0, 0], ["1/2", 1, 0]], "seed": 42}
//! ```
//!
//! Integers and `"p/q"` strings are exact; any JSON number with a fraction
//! or exponent switches the whole configuration to floating point.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::lorentz::Vector;
use crate::mappings::PointConfig;
use crate::normalizer::Witness;
use crate::scalar::{format_rational, parse_rational, Rational};

/// One coordinate as written in a document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarLit {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub n: usize,
    pub points: Vec<Vec<ScalarLit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Target value for fiber sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

/// A parsed configuration in the scalar regime its literals call for.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedConfig {
    Exact(PointConfig<Rational>),
    Float(PointConfig<f64>),
}

impl ParsedConfig {
    pub fn is_exact(&self) -> bool {
        matches!(self, ParsedConfig::Exact(_))
    }

    pub fn n(&self) -> usize {
        match self {
            ParsedConfig::Exact(c) => c.n(),
            ParsedConfig::Float(c) => c.n(),
        }
    }
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parses the points; with `force_exact`, floating literals are an error.
    pub fn parse(&self, force_exact: bool) -> Result<ParsedConfig> {
        for (i, p) in self.points.iter().enumerate() {
            if p.len() != self.n + 1 {
                return Err(Error::InvalidConfig(format!(
                    "point {i} has {} coordinates, expected n + 1 = {}",
                    p.len(),
                    self.n + 1
                )));
            }
        }
        let any_float = self.points.iter().flatten().any(|s| matches!(s, ScalarLit::Float(_)));
        if any_float && force_exact {
            return Err(Error::Parse("exact mode requested but the input has floating-point coordinates".into()));
        }
        if any_float {
            let points = self
                .points
                .iter()
                .map(|p| Vector::new(p.iter().map(lit_to_f64).collect::<Result<_>>()?))
                .collect::<Result<_>>()?;
            Ok(ParsedConfig::Float(PointConfig::new(self.n, points)?))
        } else {
            let points = self
                .points
                .iter()
                .map(|p| Vector::new(p.iter().map(lit_to_rational).collect::<Result<_>>()?))
                .collect::<Result<_>>()?;
            Ok(ParsedConfig::Exact(PointConfig::new(self.n, points)?))
        }
    }

    /// Document for an exact configuration, coordinates as `"p/q"` strings
    /// where not integral.
    pub fn from_exact(config: &PointConfig<Rational>) -> Self {
        let points = config
            .points()
            .iter()
            .map(|p| {
                p.coords()
                    .iter()
                    .map(|q| match format_rational(q).parse::<i64>() {
                        Ok(i) => ScalarLit::Int(i),
                        Err(_) => ScalarLit::Text(format_rational(q)),
                    })
                    .collect()
            })
            .collect();
        Self::bare(config.n(), points)
    }

    pub fn from_float(config: &PointConfig<f64>) -> Self {
        let points =
            config.points().iter().map(|p| p.coords().iter().map(|v| ScalarLit::Float(*v)).collect()).collect();
        Self::bare(config.n(), points)
    }

    fn bare(n: usize, points: Vec<Vec<ScalarLit>>) -> Self {
        ConfigDocument { n, points, seed: None, tol: None, samples: None, y: None, count: None }
    }
}

fn lit_to_rational(s: &ScalarLit) -> Result<Rational> {
    match s {
        ScalarLit::Int(i) => Ok(Rational::from_integer((*i).into())),
        ScalarLit::Text(t) => parse_rational(t),
        ScalarLit::Float(f) => Err(Error::Parse(format!("{f} is not an exact literal"))),
    }
}

fn lit_to_f64(s: &ScalarLit) -> Result<f64> {
    match s {
        ScalarLit::Int(i) => Ok(*i as f64),
        ScalarLit::Float(f) => Ok(*f),
        ScalarLit::Text(t) => {
            let q = parse_rational(t)?;
            Ok(crate::scalar::Scalar::as_f64(&q))
        }
    }
}

/// Witness file: the configuration it was built for plus the witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDocument {
    pub config: ConfigDocument,
    pub witness: Witness<f64>,
}

impl WitnessDocument {
    /// Accepts either a full document or a bare witness.
    pub fn from_json(text: &str) -> Result<(Option<ConfigDocument>, Witness<f64>)> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if value.get("witness").is_some() {
            let doc: WitnessDocument = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
            Ok((Some(doc.config), doc.witness))
        } else {
            let w: Witness<f64> = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
            Ok((None, w))
        }
    }
}

/// `%.12g`.
pub fn format_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Serializes with sorted keys and floats at 12 significant digits.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, Digits::G12, &mut out);
    out
}

/// Pretty variant of [`canonical_json`], two-space indent, scalar arrays on
/// one line.
pub fn canonical_json_pretty(value: &Value) -> String {
    let mut out = String::new();
    write_pretty(value, 0, Digits::G12, &mut out);
    out
}

/// Same layout as [`canonical_json_pretty`] with floats written to round-trip.
pub fn full_precision_json_pretty(value: &Value) -> String {
    let mut out = String::new();
    write_pretty(value, 0, Digits::Full, &mut out);
    out
}

#[derive(Clone, Copy)]
enum Digits {
    G12,
    Full,
}

fn write_number(n: &serde_json::Number, digits: Digits, out: &mut String) {
    if n.is_i64() || n.is_u64() || matches!(digits, Digits::Full) {
        out.push_str(&n.to_string());
    } else {
        let f = n.as_f64().expect("json number");
        let s = format_g12(f);
        // keep the output valid JSON
        if f.is_finite() {
            out.push_str(&s);
        } else {
            out.push_str(&format!("\"{s}\""));
        }
    }
}

fn write_canonical(value: &Value, digits: Digits, out: &mut String) {
    match value {
        Value::Number(n) => write_number(n, digits, out),
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(v, digits, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push(':');
                write_canonical(&map[*k], digits, out);
            }
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn write_pretty(value: &Value, depth: usize, digits: Digits, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match value {
        Value::Array(items) if !items.is_empty() => {
            if items.iter().all(|v| !v.is_object() && !v.is_array()) {
                write_canonical(value, digits, out);
                return;
            }
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_pretty(v, depth + 1, digits, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_pretty(&map[*k], depth + 1, digits, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        other => write_canonical(other, digits, out),
    }
}
