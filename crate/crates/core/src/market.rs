//! Price ingestion, returns, detrending and scenario construction from
//! market data.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::basel::PortfolioPanel;
use crate::error::{Result, RiskError};
use crate::format::fmt_sig;
use crate::measure::{OutcomeTable, Scenario, ScenarioSet};

pub const DATE_FORMAT: &str = "%Y-%m-%d";

/// A named series on strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatedSeries {
    name: String,
    dates: Vec<NaiveDate>,
    values: Vec<f64>,
}

impl DatedSeries {
    /// Sorts by date; duplicate dates and non-finite values are rejected.
    pub fn new(name: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if dates.len() != values.len() {
            return Err(RiskError::invalid(format!(
                "{name}: {} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(RiskError::invalid(format!("{name}: non-finite value {v}")));
        }
        let mut rows: Vec<(NaiveDate, f64)> = dates.into_iter().zip(values).collect();
        rows.sort_by_key(|r| r.0);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(RiskError::DuplicateDate {
                source_name: name,
                date: w[0].0,
            });
        }
        let (dates, values) = rows.into_iter().unzip();
        Ok(DatedSeries { name, dates, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.dates.binary_search(&date).ok().map(|i| self.values[i])
    }
}

/// A [`DatedSeries`] of strictly positive prices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceSeries(DatedSeries);

impl PriceSeries {
    pub fn new(name: impl Into<String>, dates: Vec<NaiveDate>, prices: Vec<f64>) -> Result<Self> {
        let s = DatedSeries::new(name, dates, prices)?;
        if let Some(i) = s.values.iter().position(|p| *p <= 0.0) {
            return Err(RiskError::NonPositivePrice {
                source_name: s.name.clone(),
                row: i + 1,
                date: s.dates[i],
                price: s.values[i],
            });
        }
        Ok(PriceSeries(s))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.0.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.0.values
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_series(&self) -> &DatedSeries {
        &self.0
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FORMAT).ok()
}

/// Reads `(date, value)` rows from CSV with a header. Rows are returned in
/// file order with their 1-based data-row numbers.
fn read_rows<R: Read>(
    reader: R,
    source: &str,
    date_column: &str,
    value_column: &str,
) -> Result<Vec<(usize, NaiveDate, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| RiskError::Parse(format!("{source}: {e}")))?
        .clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            RiskError::Parse(format!("{source}: column {name:?} not found in header"))
        })
    };
    let dc = col(date_column)?;
    let vc = col(value_column)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| RiskError::Parse(format!("{source}: row {row}: {e}")))?;
        let ds = rec.get(dc).unwrap_or("");
        let vs = rec.get(vc).unwrap_or("");
        let date = parse_date(ds)
            .ok_or_else(|| RiskError::Parse(format!("{source}: row {row}: bad date {ds:?}")))?;
        let value: f64 = vs
            .parse()
            .map_err(|_| RiskError::Parse(format!("{source}: row {row}: bad number {vs:?}")))?;
        if !value.is_finite() {
            return Err(RiskError::Parse(format!("{source}: row {row}: non-finite {vs:?}")));
        }
        rows.push((row, date, value));
    }
    Ok(rows)
}

/// Parses a price CSV. Rows may come in any order; the result is sorted.
pub fn read_price_csv<R: Read>(
    reader: R,
    name: &str,
    date_column: &str,
    value_column: &str,
) -> Result<PriceSeries> {
    let rows = read_rows(reader, name, date_column, value_column)?;
    let mut seen = HashSet::new();
    for &(row, date, price) in &rows {
        if !seen.insert(date) {
            return Err(RiskError::DuplicateDate {
                source_name: name.to_string(),
                date,
            });
        }
        if price <= 0.0 {
            return Err(RiskError::NonPositivePrice {
                source_name: name.to_string(),
                row,
                date,
                price,
            });
        }
    }
    let (dates, prices) = rows.into_iter().map(|(_, d, p)| (d, p)).unzip();
    PriceSeries::new(name, dates, prices)
}

/// Series name taken from the file stem.
pub fn load_csv(path: &Path, date_column: &str, value_column: &str) -> Result<PriceSeries> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let file = std::fs::File::open(path)?;
    read_price_csv(file, &name, date_column, value_column)
}

/// Like [`load_csv`] but accepts any finite value (returns, index levels
/// that may be negative, residuals).
pub fn load_series_csv(path: &Path, date_column: &str, value_column: &str) -> Result<DatedSeries> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let file = std::fs::File::open(path)?;
    let rows = read_rows(file, &name, date_column, value_column)?;
    let (dates, values) = rows.into_iter().map(|(_, d, v)| (d, v)).unzip();
    DatedSeries::new(name, dates, values)
}

/// Writes `date,value` rows at 10 significant digits.
pub fn write_series_csv<W: Write>(
    writer: W,
    series: &DatedSeries,
    date_column: &str,
    value_column: &str,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| RiskError::Io(std::io::Error::other(e));
    w.write_record([date_column, value_column]).map_err(io)?;
    for (d, v) in series.dates.iter().zip(&series.values) {
        w.write_record([d.format(DATE_FORMAT).to_string(), fmt_sig(*v)])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, series: &DatedSeries, date_column: &str, value_column: &str) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_series_csv(file, series, date_column, value_column)
}

/// `X_t = -(P_t / P_{t-1} - 1)`, dated at `t`; losses are positive. Computed
/// as `(P_{t-1} - P_t) / P_{t-1}`, whose subtraction is exact for nearby
/// prices.
pub fn negative_returns(s: &PriceSeries) -> Result<DatedSeries> {
    let p = s.prices();
    if p.len() < 2 {
        return Err(RiskError::invalid(format!(
            "{}: need at least two prices for a return",
            s.name()
        )));
    }
    let values = p.windows(2).map(|w| (w[0] - w[1]) / w[0]).collect();
    DatedSeries::new(s.name(), s.dates()[1..].to_vec(), values)
}

/// Residuals `log P_t - (a + b t)` of the least-squares fit of log price on
/// the day index `t = 0, 1, ...`.
pub fn log_linear_detrend(s: &PriceSeries) -> Result<DatedSeries> {
    let n = s.len();
    if n < 2 {
        return Err(RiskError::invalid(format!(
            "{}: need at least two prices to fit a trend",
            s.name()
        )));
    }
    let y: Vec<f64> = s.prices().iter().map(|p| p.ln()).collect();
    let nf = n as f64;
    let t_mean = (nf - 1.0) / 2.0;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (t, yt) in y.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (yt - y_mean);
        sxx += dt * dt;
    }
    let b = sxy / sxx;
    let residuals = y
        .iter()
        .enumerate()
        .map(|(t, yt)| (yt - y_mean) - b * (t as f64 - t_mean))
        .collect();
    DatedSeries::new(format!("{}_residual", s.name()), s.dates().to_vec(), residuals)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedDays {
    pub series: String,
    pub dates: Vec<NaiveDate>,
}

/// Series restricted to their common dates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aligned {
    pub dates: Vec<NaiveDate>,
    pub names: Vec<String>,
    /// `values[k][day]` for series `k`.
    pub values: Vec<Vec<f64>>,
    pub dropped: Vec<DroppedDays>,
}

/// Inner join on dates; days missing from any series are dropped and
/// reported per series.
pub fn align(series: &[&DatedSeries]) -> Result<Aligned> {
    if series.is_empty() {
        return Err(RiskError::invalid("nothing to align"));
    }
    let mut common: Vec<NaiveDate> = series[0].dates.clone();
    for s in &series[1..] {
        common.retain(|d| s.dates.binary_search(d).is_ok());
    }
    if common.is_empty() {
        return Err(RiskError::Alignment(format!(
            "series {} share no dates",
            series.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    let mut values = Vec::with_capacity(series.len());
    let mut dropped = Vec::new();
    for s in series {
        values.push(common.iter().map(|d| s.get(*d).unwrap()).collect());
        let lost: Vec<NaiveDate> = s
            .dates
            .iter()
            .filter(|d| common.binary_search(d).is_err())
            .copied()
            .collect();
        if !lost.is_empty() {
            dropped.push(DroppedDays {
                series: s.name.clone(),
                dates: lost,
            });
        }
    }
    Ok(Aligned {
        dates: common,
        names: series.iter().map(|s| s.name.clone()).collect(),
        values,
        dropped,
    })
}

/// Per-day regime labels of an economic-scenario window.
///
/// Labels: 1 high volatility / good economy, 2 high / bad, 3 low / good,
/// 4 low / bad. Good means the upper half of the detrended index residuals
/// within the volatility half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioAssignment {
    pub dates: Vec<NaiveDate>,
    pub labels: Vec<u8>,
    pub vix_median: f64,
    pub residual_median_high: f64,
    pub residual_median_low: f64,
}

impl ScenarioAssignment {
    pub fn group_sizes(&self) -> [usize; 4] {
        let mut sizes = [0; 4];
        for &l in &self.labels {
            sizes[(l - 1) as usize] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EconomicScenarios {
    pub table: OutcomeTable,
    pub scenarios: ScenarioSet,
    pub assignment: ScenarioAssignment,
}

pub const REGIME_NAMES: [&str; 4] = ["Q1", "Q2", "Q3", "Q4"];

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Positions of `idx` ranked by `(key, date)`: ties keep chronological order.
fn rank_by(idx: &[usize], key: &[f64]) -> Vec<usize> {
    let mut r = idx.to_vec();
    r.sort_by(|&a, &b| key[a].total_cmp(&key[b]).then(a.cmp(&b)));
    r
}

/// Splits the `w` target days before `t0` into four regimes: a median split
/// of VIX, then a median split of the index residuals within each half.
/// Days are ranked by `(value, date)` and cut at positions `w/2` and
/// `floor(h/2)` within a half of size `h`, so ties never unbalance groups.
///
/// The VIX and residual series must have a value on every window day.
pub fn economic_scenarios(
    target: &DatedSeries,
    vix: &DatedSeries,
    residuals: &DatedSeries,
    t0: NaiveDate,
    w: usize,
) -> Result<EconomicScenarios> {
    if w < 4 || !w.is_multiple_of(2) {
        return Err(RiskError::invalid(format!("window length must be even and >= 4, got {w}")));
    }
    let end = target.dates.partition_point(|d| *d < t0);
    if end < w {
        return Err(RiskError::InsufficientData {
            message: format!(
                "{} has {end} days before {t0}, window needs {w}",
                target.name
            ),
            earliest_feasible: target.dates.get(w).copied(),
        });
    }
    let days = &target.dates[end - w..end];
    let x = target.values[end - w..end].to_vec();
    let lookup = |s: &DatedSeries| -> Result<Vec<f64>> {
        let missing: Vec<String> = days
            .iter()
            .filter(|d| s.get(**d).is_none())
            .map(|d| d.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(RiskError::Alignment(format!(
                "{} has no value on {} window day(s) of {}: {}",
                s.name,
                missing.len(),
                target.name,
                missing.join(", ")
            )));
        }
        Ok(days.iter().map(|d| s.get(*d).unwrap()).collect())
    };
    let v = lookup(vix)?;
    let r = lookup(residuals)?;

    let all: Vec<usize> = (0..w).collect();
    let by_vix = rank_by(&all, &v);
    let (low, high) = by_vix.split_at(w / 2);
    let mut labels = vec![0u8; w];
    for (half, good, bad) in [(high, 1u8, 2u8), (low, 3, 4)] {
        let ranked = rank_by(half, &r);
        let cut = half.len() / 2;
        for (pos, &day) in ranked.iter().enumerate() {
            labels[day] = if pos < cut { bad } else { good };
        }
    }

    let table = OutcomeTable::new(w)?.with_variable(target.name.clone(), x)?;
    let scenarios = ScenarioSet::new(
        (1..=4u8)
            .map(|label| {
                let members: Vec<usize> = (0..w).filter(|&i| labels[i] == label).collect();
                let mass = 1.0 / members.len() as f64;
                let mut weights = vec![0.0; w];
                for i in members {
                    weights[i] = mass;
                }
                Scenario {
                    name: REGIME_NAMES[(label - 1) as usize].to_string(),
                    weights,
                }
            })
            .collect(),
    )?;
    let assignment = ScenarioAssignment {
        dates: days.to_vec(),
        labels,
        vix_median: median(v.clone()),
        residual_median_high: median(high.iter().map(|&i| r[i]).collect()),
        residual_median_low: median(low.iter().map(|&i| r[i]).collect()),
    };
    Ok(EconomicScenarios {
        table,
        scenarios,
        assignment,
    })
}

/// Writes `date,label` rows.
pub fn write_assignment_csv<W: Write>(writer: W, a: &ScenarioAssignment) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| RiskError::Io(std::io::Error::other(e));
    w.write_record(["date", "label"]).map_err(io)?;
    for (d, l) in a.dates.iter().zip(&a.labels) {
        w.write_record([d.format(DATE_FORMAT).to_string(), l.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Historical windows as scenarios over pooled outcomes.
#[derive(Debug, Clone, Serialize)]
pub struct RollingScenarios {
    /// One outcome per historical day, oldest first; per-factor returns plus
    /// the portfolio loss at the as-of exposures under `"portfolio"`.
    pub table: OutcomeTable,
    pub scenarios: ScenarioSet,
    pub dates: Vec<NaiveDate>,
}

/// `count` scenarios, scenario `j` (named `W{j}`) uniform over window
/// `j = 1, ..., count`, the `window_len` days ending `j` days before
/// `as_of`. Overlapping windows share outcomes.
pub fn rolling_scenarios(
    panel: &PortfolioPanel,
    as_of: NaiveDate,
    window_len: usize,
    count: usize,
) -> Result<RollingScenarios> {
    if window_len == 0 || count == 0 {
        return Err(RiskError::invalid("window length and count must be positive"));
    }
    let t = panel.index_of(as_of)?;
    let need = window_len + count - 1;
    if t < need {
        return Err(RiskError::InsufficientData {
            message: format!("{as_of}: {t} days of history, {count} windows of {window_len} need {need}"),
            earliest_feasible: panel.dates().get(need).copied(),
        });
    }
    let start = t - need;
    let m = need;
    let mut table = OutcomeTable::new(m)?;
    for (k, name) in panel.factor_names().iter().enumerate() {
        table.add_variable(name.clone(), (start..t).map(|s| panel.returns()[s][k]).collect())?;
    }
    let all: Vec<usize> = (0..panel.factor_names().len()).collect();
    let losses = panel.losses(&all, panel.exposures_at(t));
    table.add_variable("portfolio", losses[start..t].to_vec())?;
    let mass = 1.0 / window_len as f64;
    let scenarios = (1..=count)
        .map(|j| {
            // window j holds rows t-j-w+1 ..= t-j, i.e. local offsets below
            let lo = t - j + 1 - window_len - start;
            let mut weights = vec![0.0; m];
            weights[lo..lo + window_len].iter_mut().for_each(|x| *x = mass);
            Scenario {
                name: format!("W{j}"),
                weights,
            }
        })
        .collect();
    Ok(RollingScenarios {
        table,
        scenarios: ScenarioSet::new(scenarios)?,
        dates: panel.dates()[start..t].to_vec(),
    })
}
