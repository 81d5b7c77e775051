use std::fs;
use std::str::FromStr;

use ptflat_core::dsl::{self, LatticeDocument};
use ptflat_core::{Boundary, GainLossProfile, LatticeKind, UnitCellSpec};
use serde_json::{Map, Value};

use crate::args::BoundaryArg;
use crate::CliError;

/// A resolved `--lattice` argument.
#[derive(Debug, Clone)]
pub struct Lattice {
    /// What the user passed: a built-in name or a file path.
    pub source: String,
    /// Set for the built-in lattices only.
    pub kind: Option<LatticeKind>,
    pub cell: UnitCellSpec,
    pub profile: GainLossProfile,
}

impl Lattice {
    pub fn from_document(source: &str, kind: Option<LatticeKind>, doc: LatticeDocument) -> Self {
        Lattice {
            source: source.to_string(),
            kind,
            cell: doc.cell,
            profile: doc.profile,
        }
    }
}

/// Built-in name, or else a path to a `.lat` file.
pub fn load_lattice(arg: &str) -> Result<Lattice, CliError> {
    if let Ok(kind) = LatticeKind::from_str(arg) {
        return Ok(Lattice::from_document(arg, Some(kind), LatticeDocument::builtin(kind)));
    }
    let text = fs::read_to_string(arg).map_err(|e| {
        CliError::Config(format!(
            "`{arg}` is neither a built-in lattice (lieb, kagome, stub) nor a readable file: {e}"
        ))
    })?;
    let doc = dsl::parse(&text).map_err(|e| CliError::Config(format!("{arg}:{e}")))?;
    Ok(Lattice::from_document(arg, None, doc))
}

pub fn boundary(b: BoundaryArg) -> Boundary {
    match b {
        BoundaryArg::Open => Boundary::Open,
        BoundaryArg::Periodic => Boundary::Periodic,
    }
}

/// The resolved settings of one run, echoed into every output file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    entries: Map<String, Value>,
}

impl RunConfig {
    pub fn new(command: &str) -> Self {
        let mut entries = Map::new();
        entries.insert("command".into(), Value::from(command));
        RunConfig { entries }
    }

    pub fn set(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.entries.insert(key.into(), value.into());
        self
    }

    pub fn set_f64(self, key: &str, value: f64) -> Self {
        let v = crate::output::float_value(value);
        self.set(key, v)
    }

    /// `key=value` pairs in key order, `command` first.
    pub fn echo(&self) -> String {
        let mut parts = Vec::with_capacity(self.entries.len());
        if let Some(c) = self.entries.get("command") {
            parts.push(format!("command={}", plain(c)));
        }
        for (k, v) in &self.entries {
            if k != "command" {
                parts.push(format!("{k}={}", plain(v)));
            }
        }
        parts.join(" ")
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.entries.clone())
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

pub fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Config(msg()))
    }
}

pub fn check_rho(rho: f64) -> Result<(), CliError> {
    require(rho.is_finite() && rho >= 0.0, || {
        format!("--rho must be finite and non-negative, got {rho}")
    })
}

pub fn check_cells(cells: usize) -> Result<(), CliError> {
    require(cells >= 2, || format!("--cells must be at least 2, got {cells}"))
}
