use std::path::PathBuf;

use chrono::NaiveDate;
use scenrisk::basel::{imcc, rolling_series, write_rolling_csv, PortfolioPanel};
use scenrisk::RiskError;
use serde_json::{json, Value};

use crate::output::{emit, emit_json, header, key_value_csv, to_value, CliError};
use crate::{Format, Globals};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory holding `<factor>.csv`; overrides `[data].dir`.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Single IMCC report on this date; the last panel date by default.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    as_of: Option<NaiveDate>,
    /// Rolling ES/MES series from this date.
    #[arg(long, requires = "to")]
    from: Option<NaiveDate>,
    #[arg(long, requires = "from")]
    to: Option<NaiveDate>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

pub fn run(a: Args, g: &Globals) -> Result<(), CliError> {
    let c = g.config.as_ref().ok_or_else(|| CliError::usage("basel needs --config with [data] and [basel] sections"))?;
    let data = c.data.as_ref().ok_or_else(|| CliError::usage("config has no [data] section"))?;
    let mut cfg = c.basel.clone().unwrap_or_default();
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(l) = a.lambda {
        cfg.lambda = l;
    }
    let dir = a.data_dir.unwrap_or_else(|| c.resolve(&data.dir));
    let (panel, dropped) =
        PortfolioPanel::from_csv_dir(&dir, &data.factors, &data.units, &data.date_column, &data.value_column)?;
    if let (Some(from), Some(to)) = (a.from, a.to) {
        let rows = rolling_series(&panel, &cfg, from, to)?;
        return match g.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                let mut buf = Vec::new();
                write_rolling_csv(&mut buf, &rows)?;
                emit(g.output.as_deref(), &buf)
            }
            Format::Json => {
                let mut m = header("basel", g);
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|r| match &r.values {
                        Ok(v) => {
                            let mut o = to_value(v);
                            o["date"] = json!(r.date.to_string());
                            o
                        }
                        Err(e) => json!({"date": r.date.to_string(), "error": e}),
                    })
                    .collect();
                m.insert("rows".into(), Value::Array(rows));
                emit_json(g, &Value::Object(m))
            }
        };
    }
    let as_of = match a.as_of {
        Some(d) => d,
        None => *panel.dates().last().ok_or_else(|| RiskError::invalid("empty panel"))?,
    };
    let r = imcc(&panel, &cfg, as_of)?;
    match g.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut m = header("basel", g);
            if let Value::Object(fields) = to_value(&r) {
                m.extend(fields);
            }
            m.insert("factors".into(), json!(panel.factor_names()));
            m.insert("dropped_days".into(), to_value(&dropped));
            emit_json(g, &Value::Object(m))
        }
        Format::Csv => {
            let c = &r.components;
            let mut rows = vec![
                ("imcc".to_string(), r.imcc),
                ("es_tilde".into(), c.es_tilde),
                ("es_c".into(), c.es_c),
                ("es_rs".into(), c.es_rs),
                ("theta".into(), c.theta),
            ];
            rows.extend(c.per_class.iter().map(|k| (format!("class:{}", k.name), k.es_tilde)));
            emit(g.output.as_deref(), key_value_csv(["quantity", "value"], &rows).as_bytes())
        }
    }
}
