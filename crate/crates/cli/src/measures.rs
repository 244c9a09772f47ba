use std::io::Read;
use std::path::PathBuf;

use clap::ValueEnum;
use scenrisk::{EmpiricalDistribution, RiskError, ScenarioBundle, ScenarioDistributions};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::pick_path;
use crate::output::{emit, emit_json, header, key_value_csv, CliError};
use crate::{Format, Globals};

/// Slack on each link of `aes <= mes <= imes <= rmes`.
pub const CHAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Var,
    Es,
    Mes,
    Mvar,
    Aes,
    Imes,
    Rmes,
}

impl Measure {
    const ALL: [Measure; 7] = [
        Measure::Var,
        Measure::Es,
        Measure::Mes,
        Measure::Mvar,
        Measure::Aes,
        Measure::Imes,
        Measure::Rmes,
    ];

    /// Report key; VaR and ES are taken under the reference probability.
    fn key(self) -> &'static str {
        match self {
            Measure::Var => "var_P",
            Measure::Es => "es_P",
            Measure::Mes => "mes",
            Measure::Mvar => "mvar",
            Measure::Aes => "aes",
            Measure::Imes => "imes",
            Measure::Rmes => "rmes",
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scenario bundle or list of scenario distributions (JSON); `-` reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Confidence level in (0, 1).
    #[arg(long)]
    p: Option<f64>,
    /// Measures to report; all when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    which: Vec<Measure>,
    /// Bundle variable; the bundle default when omitted.
    #[arg(long)]
    variable: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuresSection {
    pub input: Option<PathBuf>,
    pub p: Option<f64>,
    pub which: Option<Vec<Measure>>,
    pub variable: Option<String>,
}

pub enum Input {
    Bundle(Box<ScenarioBundle>),
    Distributions(ScenarioDistributions),
}

impl Input {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let v: Value = serde_json::from_str(text).map_err(|e| RiskError::Parse(format!("measures input: {e}")))?;
        let parse_err = |e: serde_json::Error| RiskError::Parse(format!("measures input: {e}"));
        if v.is_array() {
            Ok(Input::Distributions(serde_json::from_value(v).map_err(parse_err)?))
        } else {
            let b: ScenarioBundle = serde_json::from_value(v).map_err(parse_err)?;
            b.validate()?;
            Ok(Input::Bundle(Box::new(b)))
        }
    }

    /// Per-scenario laws and the law under the reference probability.
    fn laws(&self, variable: Option<&str>) -> Result<(ScenarioDistributions, EmpiricalDistribution, Option<String>), CliError> {
        match self {
            Input::Bundle(b) => {
                let name = b.variable_name(variable)?.to_string();
                Ok((b.distributions(Some(&name))?, b.base_law(Some(&name))?, Some(name)))
            }
            Input::Distributions(sd) => {
                if variable.is_some() {
                    return Err(CliError::usage("--variable needs a scenario bundle input"));
                }
                Ok((sd.clone(), equal_mixture(sd)?, None))
            }
        }
    }
}

/// Equal-weight mixture of the scenario laws.
fn equal_mixture(sd: &ScenarioDistributions) -> scenrisk::Result<EmpiricalDistribution> {
    let n = sd.len() as f64;
    let (mut values, mut weights) = (Vec::new(), Vec::new());
    for law in sd.laws() {
        values.extend_from_slice(law.values());
        weights.extend(law.weights().iter().map(|w| w / n));
    }
    EmpiricalDistribution::from_samples(&values, Some(&weights))
}

pub struct Report {
    pub variable: Option<String>,
    pub scenarios: Vec<String>,
    pub values: Vec<(Measure, f64)>,
    pub chain_ok: Option<bool>,
}

pub fn compute(input: &Input, p: f64, which: &[Measure], variable: Option<&str>) -> Result<Report, CliError> {
    let (sd, base, variable) = input.laws(variable)?;
    let mut which = which.to_vec();
    if which.is_empty() {
        which = Measure::ALL.to_vec();
    }
    which.sort();
    which.dedup();
    let mut values = Vec::with_capacity(which.len());
    for m in &which {
        let v = match m {
            Measure::Var => base.var(p)?,
            Measure::Es => base.es(p)?,
            Measure::Mes => sd.mes(p)?,
            Measure::Mvar => sd.mvar(p)?,
            Measure::Aes => sd.aes(p, None)?,
            Measure::Imes => sd.imes(p)?,
            Measure::Rmes => sd.rmes(p)?,
        };
        values.push((*m, v));
    }
    let get = |m: Measure| values.iter().find(|(k, _)| *k == m).map(|(_, v)| *v);
    let chain = [Measure::Aes, Measure::Mes, Measure::Imes, Measure::Rmes].map(get);
    let chain_ok = match chain {
        [Some(a), Some(b), Some(c), Some(d)] => {
            Some(a <= b + CHAIN_TOL && b <= c + CHAIN_TOL && c <= d + CHAIN_TOL)
        }
        _ => None,
    };
    Ok(Report {
        variable,
        scenarios: sd.entries().iter().map(|e| e.name.clone()).collect(),
        values,
        chain_ok,
    })
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(RiskError::from)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path).map_err(RiskError::from)?)
    }
}

pub fn run(a: Args, g: &Globals) -> Result<(), CliError> {
    let sec = g.config.as_ref().and_then(|c| c.measures.clone()).unwrap_or_default();
    let path = pick_path(a.input, g.config.as_ref(), |c| c.measures.as_ref().and_then(|m| m.input.clone()))
        .ok_or_else(|| CliError::usage("measures needs --input"))?;
    let p = a.p.or(sec.p).unwrap_or(0.9);
    let which = if a.which.is_empty() { sec.which.unwrap_or_default() } else { a.which };
    let variable = a.variable.or(sec.variable);
    let input = Input::parse(&read_input(&path)?)?;
    let r = compute(&input, p, &which, variable.as_deref())?;
    match g.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut m = header("measures", g);
            m.insert("p".into(), json!(p));
            m.insert("variable".into(), json!(r.variable));
            m.insert("scenarios".into(), json!(r.scenarios));
            for (k, v) in &r.values {
                m.insert(k.key().into(), json!(v));
            }
            if let Some(ok) = r.chain_ok {
                m.insert("chain_ok".into(), json!(ok));
            }
            emit_json(g, &Value::Object(m))
        }
        Format::Csv => {
            let rows: Vec<(String, f64)> = r.values.iter().map(|(k, v)| (k.key().to_string(), *v)).collect();
            emit(g.output.as_deref(), key_value_csv(["measure", "value"], &rows).as_bytes())
        }
    }
}
