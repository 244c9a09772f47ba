use std::path::PathBuf;

use chrono::{Days, NaiveDate};
use scenrisk::market::{
    economic_scenarios, load_csv, load_series_csv, log_linear_detrend, negative_returns,
    write_assignment_csv,
};
use scenrisk::{RiskError, ScenarioBundle};
use serde::Deserialize;
use serde_json::Value;

use crate::config::{date_column, pick_path, value_column};
use crate::output::{emit, emit_json, header, to_value, CliError};
use crate::{Format, Globals};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Target price CSV; its negative returns are the scenario losses.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Volatility index level CSV.
    #[arg(long)]
    vix: Option<PathBuf>,
    /// Equity index price CSV, log-linearly detrended.
    #[arg(long)]
    index: Option<PathBuf>,
    /// Window length `w`, even.
    #[arg(long)]
    window: Option<usize>,
    /// The window is the `w` target days strictly before this date; the day
    /// after the last target return by default.
    #[arg(long)]
    t0: Option<NaiveDate>,
    /// Where to write the per-day regime labels as CSV.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long)]
    date_column: Option<String>,
    /// Value column shared by all three files.
    #[arg(long)]
    value_column: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenariosSection {
    pub target: Option<PathBuf>,
    pub vix: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub window: Option<usize>,
    pub t0: Option<NaiveDate>,
    pub assignment: Option<PathBuf>,
    pub date_column: Option<String>,
    pub value_column: Option<String>,
}

pub fn run(a: Args, g: &Globals) -> Result<(), CliError> {
    let cfg = g.config.as_ref();
    let sec = cfg.and_then(|c| c.scenarios.clone()).unwrap_or_default();
    let path = |flag: Option<PathBuf>, get: fn(&ScenariosSection) -> Option<PathBuf>, what: &str| {
        pick_path(flag, cfg, |c| c.scenarios.as_ref().and_then(get))
            .ok_or_else(|| CliError::usage(format!("scenarios needs --{what}")))
    };
    let target = path(a.target, |s| s.target.clone(), "target")?;
    let vix = path(a.vix, |s| s.vix.clone(), "vix")?;
    let index = path(a.index, |s| s.index.clone(), "index")?;
    let assignment = pick_path(a.assignment, cfg, |c| c.scenarios.as_ref().and_then(|s| s.assignment.clone()));
    let w = a.window.or(sec.window).ok_or_else(|| CliError::usage("scenarios needs --window"))?;
    let dcol = a.date_column.or(sec.date_column).unwrap_or_else(date_column);
    let vcol = a.value_column.or(sec.value_column).unwrap_or_else(value_column);

    let x = negative_returns(&load_csv(&target, &dcol, &vcol)?)?;
    let v = load_series_csv(&vix, &dcol, &vcol)?;
    let r = log_linear_detrend(&load_csv(&index, &dcol, &vcol)?)?;
    let t0 = match a.t0.or(sec.t0) {
        Some(d) => d,
        None => {
            let last = *x.dates().last().ok_or_else(|| RiskError::invalid("target has no returns"))?;
            last.checked_add_days(Days::new(1)).ok_or_else(|| RiskError::invalid("date overflow"))?
        }
    };
    let es = economic_scenarios(&x, &v, &r, t0, w)?;
    if let Some(p) = &assignment {
        let f = std::fs::File::create(p).map_err(RiskError::from)?;
        write_assignment_csv(f, &es.assignment)?;
    }
    match g.format.unwrap_or(Format::Json) {
        Format::Json => {
            let bundle = ScenarioBundle::from(es);
            let mut m = header("scenarios", g);
            m.insert("t0".into(), Value::String(t0.to_string()));
            m.insert("window".into(), w.into());
            if let Value::Object(fields) = to_value(&bundle) {
                m.extend(fields);
            }
            emit_json(g, &Value::Object(m))
        }
        Format::Csv => {
            let mut buf = Vec::new();
            write_assignment_csv(&mut buf, &es.assignment)?;
            emit(g.output.as_deref(), &buf)
        }
    }
}
