use std::path::PathBuf;

use clap::ValueEnum;
use scenrisk::axioms::{
    atomized_reversed_densities, check_componentwise, check_standard, check_submodular,
    comonotonic_additivity_probe, psi_two_s_minus_t, Verdict, DEFAULT_GRID_K,
};
use scenrisk::choquet::{choquet_integral, distorted_set_function, DistortionSpec, PsiFamily, SetFunction};
use scenrisk::{OutcomeTable, RiskError, ScenarioBundle, ScenarioSet};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::config::pick_path;
use crate::output::{emit, emit_json, header, to_value, CliError};
use crate::{Format, Globals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Family {
    MvarType,
    ImesType,
    MinvarType,
    AesType,
    /// `psi(s, t) = 2s - t`.
    TwoSMinusT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Componentwise,
    Standard,
    Submodular,
    Comonotonic,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Distortion as JSON: `{"arity": n, "family": ..., ...}`.
    #[arg(long, conflicts_with = "family")]
    psi: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Scenario set or scenario bundle JSON.
    #[arg(long, conflicts_with = "atomized")]
    scenarios: Option<PathBuf>,
    /// Two reversed-density scenarios on `2 * CELLS` equal cells.
    #[arg(long)]
    atomized: Option<usize>,
    /// Set function as JSON `{"size": m, "values": [...]}` indexed by bitmask.
    #[arg(long)]
    set_function: Option<PathBuf>,
    #[arg(long)]
    grid_k: Option<usize>,
    /// Random comonotonic pairs for the additivity probe.
    #[arg(long)]
    trials: Option<usize>,
    /// Checks to run; every applicable one when omitted.
    #[arg(long, value_enum, value_delimiter = ',')]
    checks: Vec<Check>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct PsiInput {
    pub arity: usize,
    #[serde(flatten)]
    pub family: PsiFamily,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsSection {
    pub psi: Option<PsiInput>,
    pub scenarios: Option<PathBuf>,
    pub atomized: Option<usize>,
    pub set_function: Option<PathBuf>,
    pub grid_k: Option<usize>,
    pub trials: Option<usize>,
    pub checks: Option<Vec<Check>>,
}

#[derive(Deserialize)]
struct SetFunctionTable {
    size: usize,
    values: Vec<f64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(RiskError::from)?;
    Ok(serde_json::from_str(&text).map_err(|e| RiskError::Parse(format!("{what} {}: {e}", path.display())))?)
}

fn family_psi(f: Family, arity: Option<usize>, p: Option<f64>) -> Result<DistortionSpec, CliError> {
    let need_p = || p.ok_or_else(|| CliError::usage("this family needs --p"));
    let n = || arity.ok_or_else(|| CliError::usage("this family needs --arity"));
    Ok(match f {
        Family::MvarType => DistortionSpec::mvar_type(n()?, need_p()?)?,
        Family::ImesType => DistortionSpec::imes_type(n()?, need_p()?)?,
        Family::MinvarType => DistortionSpec::minvar_type(n()?)?,
        Family::AesType => DistortionSpec::aes_type(n()?, need_p()?, None)?,
        Family::TwoSMinusT => psi_two_s_minus_t(),
    })
}

fn load_scenarios(path: &PathBuf) -> Result<(ScenarioSet, Option<OutcomeTable>), CliError> {
    let v: Value = read_json(path, "scenarios")?;
    let parse = |e: serde_json::Error| RiskError::Parse(format!("scenarios {}: {e}", path.display()));
    if v.get("table").is_some() {
        let b: ScenarioBundle = serde_json::from_value(v).map_err(parse)?;
        b.validate()?;
        Ok((b.scenarios, Some(b.table)))
    } else {
        Ok((serde_json::from_value(v).map_err(parse)?, None))
    }
}

fn verdict_json(v: &Verdict) -> Value {
    to_value(v)
}

pub fn run(a: Args, g: &Globals) -> Result<(), CliError> {
    let cfg = g.config.as_ref();
    let sec = cfg.and_then(|c| c.axioms.clone()).unwrap_or_default();
    let psi = match (&a.psi, a.family) {
        (Some(path), _) => {
            let input: PsiInput = read_json(path, "psi")?;
            Some(DistortionSpec::from_family(input.arity, input.family)?)
        }
        (None, Some(f)) => Some(family_psi(f, a.arity, a.p)?),
        (None, None) => sec
            .psi
            .clone()
            .map(|i| DistortionSpec::from_family(i.arity, i.family))
            .transpose()?,
    };
    let scen_path = pick_path(a.scenarios, cfg, |c| c.axioms.as_ref().and_then(|s| s.scenarios.clone()));
    let atomized = a.atomized.or(sec.atomized);
    let scenarios = match (scen_path, atomized) {
        (Some(p), None) => Some(load_scenarios(&p)?),
        (None, Some(cells)) => Some((atomized_reversed_densities(cells)?, None)),
        (None, None) => None,
        (Some(_), Some(_)) => return Err(CliError::usage("give either scenarios or atomized, not both")),
    };
    let sf_path = pick_path(a.set_function, cfg, |c| c.axioms.as_ref().and_then(|s| s.set_function.clone()));
    let set_function = match (&sf_path, &psi, &scenarios) {
        (Some(p), _, _) => {
            let t: SetFunctionTable = read_json(p, "set function")?;
            Some(SetFunction::from_table(t.size, t.values)?)
        }
        (None, Some(psi), Some((s, _))) => Some(distorted_set_function(psi, s)?),
        _ => None,
    };
    if psi.is_none() && set_function.is_none() {
        return Err(CliError::usage("axioms needs a distortion (--psi or --family) or a set function"));
    }
    let grid_k = a.grid_k.or(sec.grid_k).unwrap_or(DEFAULT_GRID_K);
    let trials = a.trials.or(sec.trials).unwrap_or(200);
    let table = scenarios.as_ref().and_then(|(_, t)| t.clone());
    let mut checks = if a.checks.is_empty() { sec.checks.clone().unwrap_or_default() } else { a.checks };
    if checks.is_empty() {
        if psi.is_some() {
            checks.push(Check::Componentwise);
        }
        if set_function.is_some() {
            checks.extend([Check::Standard, Check::Submodular]);
            if table.is_some() {
                checks.push(Check::Comonotonic);
            }
        }
    }
    checks.sort();
    checks.dedup();

    let mut m = header("axioms", g);
    if let Some(psi) = &psi {
        m.insert("psi".into(), json!(format!("{psi:?}")));
    }
    if let Some((s, _)) = &scenarios {
        m.insert("outcomes".into(), json!(s.outcome_count()));
        m.insert("mutually_singular".into(), json!(s.mutually_singular()));
    }
    let mut rows: Vec<(String, bool)> = Vec::new();
    let need_sf = || set_function.as_ref().ok_or_else(|| CliError::usage("this check needs a set function or a distortion with scenarios"));
    for c in checks {
        match c {
            Check::Componentwise => {
                let psi = psi.as_ref().ok_or_else(|| CliError::usage("componentwise check needs a distortion"))?;
                let r = check_componentwise(psi, grid_k)?;
                m.insert("psi_increasing".into(), json!(r.increasing.holds));
                m.insert("psi_concave".into(), json!(r.concave.holds));
                m.insert("psi_submodular".into(), json!(r.submodular.holds));
                rows.extend([
                    ("psi_increasing".into(), r.increasing.holds),
                    ("psi_concave".into(), r.concave.holds),
                    ("psi_submodular".into(), r.submodular.holds),
                ]);
                m.insert("componentwise".into(), to_value(&r));
            }
            Check::Standard => {
                let v = check_standard(need_sf()?)?;
                m.insert("set_function_increasing".into(), json!(v.holds));
                rows.push(("set_function_increasing".into(), v.holds));
                m.insert("standard".into(), verdict_json(&v));
            }
            Check::Submodular => {
                let v = check_submodular(need_sf()?)?;
                m.insert("set_function_submodular".into(), json!(v.holds));
                rows.push(("set_function_submodular".into(), v.holds));
                m.insert("submodular".into(), verdict_json(&v));
            }
            Check::Comonotonic => {
                let sf = need_sf()?;
                let t = table
                    .as_ref()
                    .ok_or_else(|| CliError::usage("comonotonic check needs a scenario bundle with an outcome table"))?;
                let measure = |x: &[f64]| choquet_integral(x, sf, false).unwrap_or(f64::NAN);
                let v = comonotonic_additivity_probe(&measure, t, trials, g.seed)?;
                m.insert("comonotonic_additive".into(), json!(v.holds));
                rows.push(("comonotonic_additive".into(), v.holds));
                m.insert("comonotonic".into(), verdict_json(&v));
            }
        }
    }
    match g.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(g, &Value::Object(m)),
        Format::Csv => {
            let mut s = String::from("check,holds\n");
            for (k, v) in rows {
                s.push_str(&format!("{k},{v}\n"));
            }
            emit(g.output.as_deref(), s.as_bytes())
        }
    }
}
