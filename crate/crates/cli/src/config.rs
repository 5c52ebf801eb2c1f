//! Flat key-value experiment configuration.
//!
//! A config file is a TOML table of scalars and numeric arrays:
//!
//! ```toml
//! subcommand = "blowup"
//! f = "pow(s,2)"
//! y0 = 1.0
//! ```
//!
//! Keys are checked against the subcommand schema; unknown keys are
//! rejected. The output directory (`out`) is not part of the hashed
//! configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Bool,
    Int,
    Float,
    Str,
    Floats,
}

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    /// Textual default; `None` marks a required key.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

#[derive(Debug, Clone, Copy)]
pub struct Schema {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [KeySpec],
}

impl Schema {
    pub fn key(&self, name: &str) -> Option<&KeySpec> {
        self.keys.iter().find(|k| k.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Floats(Vec<f64>),
}

impl Value {
    /// Parses the command-line / default spelling of a value.
    pub fn parse(kind: Kind, text: &str) -> Result<Value, String> {
        let float = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
        match kind {
            Kind::Bool => text.parse::<bool>().map(Value::Bool).map_err(|_| format!("'{text}' is not true/false")),
            Kind::Int => text.trim().parse::<i64>().map(Value::Int).map_err(|_| format!("'{text}' is not an integer")),
            Kind::Float => float(text).map(Value::Float),
            Kind::Str => Ok(Value::Str(text.to_string())),
            Kind::Floats => {
                if text.trim().is_empty() {
                    return Ok(Value::Floats(vec![]));
                }
                text.split(',').map(float).collect::<Result<Vec<_>, _>>().map(Value::Floats)
            }
        }
    }

    fn from_toml(kind: Kind, v: &toml::Value) -> Result<Value, String> {
        let num = |v: &toml::Value| match v {
            toml::Value::Float(x) => Some(*x),
            toml::Value::Integer(i) => Some(*i as f64),
            _ => None,
        };
        match (kind, v) {
            (Kind::Bool, toml::Value::Boolean(b)) => Ok(Value::Bool(*b)),
            (Kind::Int, toml::Value::Integer(i)) => Ok(Value::Int(*i)),
            (Kind::Float, v) if num(v).is_some() => Ok(Value::Float(num(v).unwrap())),
            (Kind::Str, toml::Value::String(s)) => Ok(Value::Str(s.clone())),
            (Kind::Floats, toml::Value::Array(a)) => {
                a.iter().map(|x| num(x).ok_or("array entries must be numbers".to_string())).collect::<Result<_, _>>().map(Value::Floats)
            }
            (kind, v) => Err(format!("expected {kind:?}, found {}", v.type_str())),
        }
    }

    fn to_toml(&self) -> toml::Value {
        match self {
            Value::Bool(b) => toml::Value::Boolean(*b),
            Value::Int(i) => toml::Value::Integer(*i),
            Value::Float(x) => toml::Value::Float(*x),
            Value::Str(s) => toml::Value::String(s.clone()),
            Value::Floats(v) => toml::Value::Array(v.iter().map(|x| toml::Value::Float(*x)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub params: BTreeMap<String, Value>,
    pub out: Option<PathBuf>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    /// Defaults of `schema`, then `file` entries, then `overrides`
    /// (command-line spellings). Errors on unknown keys and on missing
    /// required keys.
    pub fn resolve(schema: &Schema, file: Option<&str>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut params = BTreeMap::new();
        for k in schema.keys {
            if let Some(d) = k.default {
                params.insert(k.name.to_string(), Value::parse(k.kind, d).expect("valid default"));
            }
        }
        let mut out = None;
        if let Some(text) = file {
            let table: toml::Table = text.parse().map_err(|e| config_err(format!("config is not valid TOML: {e}")))?;
            for (key, v) in &table {
                match key.as_str() {
                    "subcommand" => {
                        if v.as_str() != Some(schema.name) {
                            return Err(config_err(format!("config is for subcommand {v}, not '{}'", schema.name)));
                        }
                    }
                    "out" => {
                        let s = v.as_str().ok_or_else(|| config_err("'out' must be a string"))?;
                        out = Some(PathBuf::from(s));
                    }
                    _ => {
                        let spec =
                            schema.key(key).ok_or_else(|| config_err(format!("unknown key '{key}' for subcommand '{}'", schema.name)))?;
                        let value = Value::from_toml(spec.kind, v).map_err(|e| config_err(format!("key '{key}': {e}")))?;
                        params.insert(key.clone(), value);
                    }
                }
            }
        }
        for (key, text) in overrides {
            let spec = schema.key(key).ok_or_else(|| config_err(format!("unknown key '{key}' for subcommand '{}'", schema.name)))?;
            let value = Value::parse(spec.kind, text).map_err(|e| config_err(format!("key '{key}': {e}")))?;
            params.insert(key.clone(), value);
        }
        if let Some(k) = schema.keys.iter().find(|k| !params.contains_key(k.name)) {
            return Err(config_err(format!("missing required key '{}'", k.name)));
        }
        Ok(Self { subcommand: schema.name.to_string(), params, out })
    }

    /// Parses a complete config file (which must name its subcommand).
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text.parse().map_err(|e| config_err(format!("config is not valid TOML: {e}")))?;
        let name = table.get("subcommand").and_then(|v| v.as_str()).ok_or_else(|| config_err("config lacks a 'subcommand' string"))?;
        let schema = crate::schema::find(name).ok_or_else(|| config_err(format!("unknown subcommand '{name}'")))?;
        Self::resolve(schema, Some(text), &[])
    }

    fn table(&self, with_out: bool) -> toml::Table {
        let mut t = toml::Table::new();
        t.insert("subcommand".into(), toml::Value::String(self.subcommand.clone()));
        for (k, v) in &self.params {
            t.insert(k.clone(), v.to_toml());
        }
        if with_out {
            if let Some(o) = &self.out {
                t.insert("out".into(), toml::Value::String(o.display().to_string()));
            }
        }
        t
    }

    /// Complete textual form, including `out` when set.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.table(true)).expect("flat table serializes")
    }

    /// Canonical form hashed into artifacts (without `out`).
    pub fn canonical(&self) -> String {
        toml::to_string(&self.table(false)).expect("flat table serializes")
    }

    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Hashed part as JSON, for embedding.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.table(false)).expect("flat table converts")
    }

    fn get(&self, key: &str) -> &Value {
        self.params.get(key).unwrap_or_else(|| panic!("schema key '{key}' missing"))
    }

    pub fn f64(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(x) => *x,
            Value::Int(i) => *i as f64,
            v => panic!("key '{key}' is {v:?}"),
        }
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.get(key) {
            Value::Int(i) => *i,
            v => panic!("key '{key}' is {v:?}"),
        }
    }

    pub fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Str(s) => s,
            v => panic!("key '{key}' is {v:?}"),
        }
    }

    pub fn bool(&self, key: &str) -> bool {
        match self.get(key) {
            Value::Bool(b) => *b,
            v => panic!("key '{key}' is {v:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> &[f64] {
        match self.get(key) {
            Value::Floats(v) => v,
            v => panic!("key '{key}' is {v:?}"),
        }
    }

    /// Nonnegative integer parameter.
    pub fn count(&self, key: &str) -> Result<usize, CliError> {
        usize::try_from(self.int(key)).map_err(|_| config_err(format!("key '{key}' must be nonnegative")))
    }

    /// Positive `u32` parameter.
    pub fn dim(&self, key: &str) -> Result<u32, CliError> {
        u32::try_from(self.int(key)).ok().filter(|&n| n > 0).ok_or_else(|| config_err(format!("key '{key}' must be a positive integer")))
    }
}
