use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use scenrisk::format::fmt_sig;
use scenrisk::RiskError;
use serde_json::{json, Map, Value};

use crate::Globals;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAP: u8 = 3;
pub const EXIT_DATA: u8 = 4;
pub const EXIT_ALIGNMENT: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Risk(RiskError),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Risk(e) => match e {
                RiskError::InvalidInput(_) | RiskError::NotFound(_) => EXIT_USAGE,
                RiskError::CapExceeded { .. } => EXIT_CAP,
                RiskError::Alignment(_) => EXIT_ALIGNMENT,
                RiskError::AxiomViolation(_)
                | RiskError::DegenerateDenominator(_)
                | RiskError::InsufficientData { .. }
                | RiskError::Parse(_)
                | RiskError::DuplicateDate { .. }
                | RiskError::NonPositivePrice { .. }
                | RiskError::Io(_) => EXIT_DATA,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let code = self.exit_code();
        match self {
            CliError::Usage(msg) => json!({"error": "Usage", "message": msg, "exit_code": code}),
            CliError::Risk(e) => {
                let mut v = json!({"error": e.kind(), "message": e.to_string(), "exit_code": code});
                match e {
                    RiskError::InsufficientData { earliest_feasible, .. } => {
                        v["earliest_feasible"] = json!(earliest_feasible.map(|d| d.to_string()));
                    }
                    RiskError::CapExceeded { what, size, cap } => {
                        v["size"] = json!(size);
                        v["cap"] = json!(cap);
                        v["advice"] = json!(format!(
                            "{what} is limited to {cap}; coarsen the outcome space \
                             (fewer outcomes or merged cells) or skip this check with --checks"
                        ));
                    }
                    RiskError::DuplicateDate { source_name, date } => {
                        v["source"] = json!(source_name);
                        v["date"] = json!(date.to_string());
                    }
                    RiskError::NonPositivePrice { source_name, row, date, price } => {
                        v["source"] = json!(source_name);
                        v["row"] = json!(row);
                        v["date"] = json!(date.to_string());
                        v["price"] = json!(price);
                    }
                    _ => {}
                }
                v
            }
        }
    }

    pub fn report(&self) -> ExitCode {
        let text = serde_json::to_string_pretty(&self.to_json()).expect("error JSON serializes");
        eprintln!("{text}");
        ExitCode::from(self.exit_code())
    }
}

/// `command`, `version` and `seed` fields that open every JSON report.
pub fn header(command: &str, g: &Globals) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(scenrisk::VERSION));
    m.insert("seed".into(), json!(g.seed));
    m
}

pub fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(RiskError::from)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).map_err(RiskError::from)?;
            out.flush().map_err(RiskError::from)?;
        }
    }
    Ok(())
}

pub fn emit_json(g: &Globals, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("report JSON serializes");
    text.push('\n');
    emit(g.output.as_deref(), text.as_bytes())
}

/// Two-column CSV of scalar results.
pub fn key_value_csv(header: [&str; 2], rows: &[(String, f64)]) -> String {
    let mut s = format!("{},{}\n", header[0], header[1]);
    for (k, v) in rows {
        s.push_str(&format!("{k},{}\n", fmt_sig(*v)));
    }
    s
}
