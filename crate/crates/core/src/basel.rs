//! Internal-model capital charge from historical portfolio windows: stress
//! ratio, stressed ES over rolling windows, the risk-class sum and the
//! blended charge, plus rolling ES / MES series.
//!
//! Row `t` of a [`PortfolioPanel`] holds the negative returns `X_t` and the
//! exposures `alpha_i P_{t-1}` known at the start of that day. For an as-of
//! row `t` the current window is rows `t-w .. t-1` and window `j` is rows
//! `t-j-w+1 ..= t-j`, so window 1 is the current window. Historical returns
//! are revalued at the as-of exposures.
//!
//! The stress ratio uses the current window for both numerator and
//! denominator.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::format::fmt_sig;
use crate::market::{align, load_csv, DroppedDays, PriceSeries, DATE_FORMAT};
use crate::measure::{check_level, es_sorted_uniform, EmpiricalDistribution};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PortfolioPanel {
    dates: Vec<NaiveDate>,
    factor_names: Vec<String>,
    returns: Vec<Vec<f64>>,
    exposures: Vec<Vec<f64>>,
}

impl PortfolioPanel {
    /// `returns[day][factor]` and `exposures[day][factor]` on strictly
    /// increasing dates.
    pub fn new(
        dates: Vec<NaiveDate>,
        factor_names: Vec<String>,
        returns: Vec<Vec<f64>>,
        exposures: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = factor_names.len();
        if k == 0 {
            return Err(RiskError::invalid("panel needs at least one factor"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = factor_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(RiskError::invalid(format!("duplicate factor name {dup}")));
        }
        if returns.len() != dates.len() || exposures.len() != dates.len() {
            return Err(RiskError::invalid(format!(
                "{} dates, {} return rows, {} exposure rows",
                dates.len(),
                returns.len(),
                exposures.len()
            )));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(RiskError::invalid(format!(
                "panel dates must increase strictly: {} then {}",
                w[0], w[1]
            )));
        }
        for (t, (r, e)) in returns.iter().zip(&exposures).enumerate() {
            if r.len() != k || e.len() != k {
                return Err(RiskError::invalid(format!("row {t} is not {k} factors wide")));
            }
            if r.iter().chain(e).any(|v| !v.is_finite()) {
                return Err(RiskError::invalid(format!("row {t} has non-finite entries")));
            }
        }
        Ok(PortfolioPanel {
            dates,
            factor_names,
            returns,
            exposures,
        })
    }

    /// Inner-joins the price series on dates, then computes negative returns
    /// and exposures `units_i * P_{t-1}^i`. Also returns the dropped days.
    pub fn from_prices(series: &[PriceSeries], units: &[f64]) -> Result<(Self, Vec<DroppedDays>)> {
        if series.len() != units.len() {
            return Err(RiskError::invalid(format!(
                "{} price series but {} holdings",
                series.len(),
                units.len()
            )));
        }
        let refs: Vec<_> = series.iter().map(|s| s.as_series()).collect();
        let al = align(&refs)?;
        let n = al.dates.len();
        if n < 2 {
            return Err(RiskError::invalid("need at least two common dates"));
        }
        let k = series.len();
        let mut returns = Vec::with_capacity(n - 1);
        let mut exposures = Vec::with_capacity(n - 1);
        for t in 1..n {
            returns.push((0..k).map(|i| (al.values[i][t - 1] - al.values[i][t]) / al.values[i][t - 1]).collect());
            exposures.push((0..k).map(|i| units[i] * al.values[i][t - 1]).collect());
        }
        let panel = Self::new(al.dates[1..].to_vec(), al.names, returns, exposures)?;
        Ok((panel, al.dropped))
    }

    /// Loads `<dir>/<factor>.csv` for every factor, then [`from_prices`](Self::from_prices).
    pub fn from_csv_dir(
        dir: &Path,
        factors: &[String],
        units: &[f64],
        date_column: &str,
        value_column: &str,
    ) -> Result<(Self, Vec<DroppedDays>)> {
        let series = factors
            .iter()
            .map(|f| load_csv(&dir.join(format!("{f}.csv")), date_column, value_column))
            .collect::<Result<Vec<_>>>()?;
        Self::from_prices(&series, units)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn factor_names(&self) -> &[String] {
        &self.factor_names
    }

    pub fn returns(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn exposures(&self) -> &[Vec<f64>] {
        &self.exposures
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn index_of(&self, date: NaiveDate) -> Result<usize> {
        self.dates
            .binary_search(&date)
            .map_err(|_| RiskError::NotFound(format!("date {date} is not a panel date")))
    }

    pub fn exposures_at(&self, t: usize) -> &[f64] {
        &self.exposures[t]
    }

    pub fn factor_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|n| {
                self.factor_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| RiskError::NotFound(format!("factor {n}")))
            })
            .collect()
    }

    /// `sum_{i in factors} X_s^i e_i` for every row `s`.
    pub fn losses(&self, factors: &[usize], exposure: &[f64]) -> Vec<f64> {
        self.returns
            .iter()
            .map(|r| factors.iter().map(|&i| r[i] * exposure[i]).sum())
            .collect()
    }

    /// Same panel with every exposure multiplied by `k`.
    pub fn scale_exposures(&self, k: f64) -> Result<Self> {
        let exposures = self
            .exposures
            .iter()
            .map(|e| e.iter().map(|x| x * k).collect())
            .collect();
        Self::new(
            self.dates.clone(),
            self.factor_names.clone(),
            self.returns.clone(),
            exposures,
        )
    }

    /// Uniform law of the portfolio loss over the rows dated `from..=to`.
    /// With `exposure = None` each day is valued at its own exposures.
    pub fn portfolio_loss_series(
        &self,
        factors: &[String],
        from: NaiveDate,
        to: NaiveDate,
        exposure: Option<&[f64]>,
    ) -> Result<EmpiricalDistribution> {
        if factors.is_empty() {
            return Err(RiskError::invalid("factor subset is empty"));
        }
        let idx = self.factor_indices(factors)?;
        let lo = self.dates.partition_point(|d| *d < from);
        let hi = self.dates.partition_point(|d| *d <= to);
        if lo >= hi {
            return Err(RiskError::invalid(format!("no panel dates in {from} ..= {to}")));
        }
        let samples: Vec<f64> = (lo..hi)
            .map(|s| {
                let e = exposure.unwrap_or(&self.exposures[s]);
                idx.iter().map(|&i| self.returns[s][i] * e[i]).sum()
            })
            .collect();
        EmpiricalDistribution::from_samples(&samples, None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskClass {
    pub name: String,
    pub factors: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    #[default]
    Daily,
    /// Recomputed on the first panel date of each ISO week.
    Weekly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselConfig {
    pub p: f64,
    pub lambda: f64,
    pub current_window: usize,
    pub lookback_windows: usize,
    /// All factors when absent.
    pub reduced_set: Option<Vec<String>>,
    /// One class holding every factor when empty.
    pub risk_classes: Vec<RiskClass>,
    pub theta_cap: f64,
    pub theta_mode: ThetaMode,
    /// Exposures held fixed instead of the as-of row's.
    pub frozen_exposures: Option<BTreeMap<String, f64>>,
}

impl Default for BaselConfig {
    fn default() -> Self {
        BaselConfig {
            p: 0.975,
            lambda: 0.5,
            current_window: 250,
            lookback_windows: 2251,
            reduced_set: None,
            risk_classes: Vec::new(),
            theta_cap: 4.0 / 3.0,
            theta_mode: ThetaMode::Daily,
            frozen_exposures: None,
        }
    }
}

struct Resolved {
    all: Vec<usize>,
    reduced: Vec<usize>,
    classes: Vec<(String, Vec<usize>)>,
    frozen: Option<Vec<f64>>,
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

impl BaselConfig {
    fn resolve(&self, panel: &PortfolioPanel) -> Result<Resolved> {
        check_level(self.p, false, "confidence level p")?;
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(RiskError::invalid(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if self.current_window == 0 || self.lookback_windows == 0 {
            return Err(RiskError::invalid("window length and lookback count must be positive"));
        }
        if !(self.theta_cap > 0.0) {
            return Err(RiskError::invalid("theta_cap must be positive"));
        }
        let k = panel.factor_names.len();
        let all: Vec<usize> = (0..k).collect();
        let reduced = match &self.reduced_set {
            None => all.clone(),
            Some(names) => {
                if names.is_empty() {
                    return Err(RiskError::invalid("reduced_set is empty"));
                }
                let idx = sorted(panel.factor_indices(names)?);
                if idx.windows(2).any(|w| w[0] == w[1]) {
                    return Err(RiskError::invalid("reduced_set lists a factor twice"));
                }
                idx
            }
        };
        let classes = if self.risk_classes.is_empty() {
            vec![("all".to_string(), all.clone())]
        } else {
            let mut owner = vec![None; k];
            let mut out = Vec::new();
            for c in &self.risk_classes {
                if c.factors.is_empty() {
                    return Err(RiskError::invalid(format!("risk class {} is empty", c.name)));
                }
                let idx = sorted(panel.factor_indices(&c.factors)?);
                for &i in &idx {
                    if let Some(prev) = owner[i].replace(c.name.clone()) {
                        return Err(RiskError::invalid(format!(
                            "factor {} is in risk classes {prev} and {}",
                            panel.factor_names[i], c.name
                        )));
                    }
                }
                out.push((c.name.clone(), idx));
            }
            if let Some(i) = owner.iter().position(|o| o.is_none()) {
                return Err(RiskError::invalid(format!(
                    "factor {} is in no risk class",
                    panel.factor_names[i]
                )));
            }
            out
        };
        let frozen = match &self.frozen_exposures {
            None => None,
            Some(map) => Some(
                panel
                    .factor_names
                    .iter()
                    .map(|n| {
                        map.get(n).copied().filter(|v| v.is_finite()).ok_or_else(|| {
                            RiskError::invalid(format!("frozen_exposures lacks a finite value for {n}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(Resolved {
            all,
            reduced,
            classes,
            frozen,
        })
    }

    /// Earliest as-of row with a full lookback.
    pub fn required_history(&self) -> usize {
        self.lookback_windows + self.current_window - 1
    }
}

/// Dates of one historical window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WindowRange {
    /// `j`: 1 is the current window.
    pub offset: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaResult {
    pub theta: f64,
    pub es_full: f64,
    pub es_reduced: f64,
    pub cap_violation: bool,
    /// Date whose current window produced the ratio.
    pub computed_on: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressedEs {
    pub es_rs: f64,
    pub argmax_window: WindowRange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StressAdjustedEs {
    pub es_tilde: f64,
    pub es_rs: f64,
    pub theta: ThetaResult,
    pub argmax_window: WindowRange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassResult {
    pub name: String,
    pub factors: Vec<String>,
    pub es_tilde: f64,
    pub es_rs: f64,
    pub theta: f64,
    pub argmax_window: WindowRange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceAdjustedEs {
    pub es_c: f64,
    pub per_class: Vec<ClassResult>,
    /// Whether the class sum is at least the whole-portfolio stressed ES.
    pub es_c_dominates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImccComponents {
    pub es_tilde: f64,
    pub es_c: f64,
    pub es_rs: f64,
    pub theta: f64,
    pub theta_cap_violation: bool,
    pub argmax_window: WindowRange,
    pub per_class: Vec<ClassResult>,
    pub es_c_dominates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImccReport {
    pub as_of: NaiveDate,
    pub imcc: f64,
    pub lambda: f64,
    pub p: f64,
    pub components: ImccComponents,
}

struct Ctx<'a> {
    panel: &'a PortfolioPanel,
    cfg: &'a BaselConfig,
    res: Resolved,
    t: usize,
}

impl<'a> Ctx<'a> {
    fn new(panel: &'a PortfolioPanel, cfg: &'a BaselConfig, as_of: NaiveDate) -> Result<Self> {
        let res = cfg.resolve(panel)?;
        let t = panel.index_of(as_of)?;
        Ok(Ctx { panel, cfg, res, t })
    }

    fn exposure(&self, t: usize) -> &[f64] {
        self.res.frozen.as_deref().unwrap_or(&self.panel.exposures[t])
    }

    fn window(&self, j: usize) -> WindowRange {
        let w = self.cfg.current_window;
        WindowRange {
            offset: j,
            start: self.panel.dates[self.t + 1 - j - w],
            end: self.panel.dates[self.t - j],
        }
    }

    fn require(&self, t: usize, rows: usize) -> Result<()> {
        if t < rows {
            return Err(RiskError::InsufficientData {
                message: format!(
                    "{} has {t} earlier panel rows, {rows} are needed",
                    self.panel.dates[t]
                ),
                earliest_feasible: self.panel.dates.get(rows).copied(),
            });
        }
        Ok(())
    }

    fn current_es(&self, t: usize, factors: &[usize]) -> Result<f64> {
        let w = self.cfg.current_window;
        self.require(t, w)?;
        let losses = self.panel.losses(factors, self.exposure(t));
        let mut win = losses[t - w..t].to_vec();
        win.sort_by(f64::total_cmp);
        es_sorted_uniform(&win, self.cfg.p)
    }

    fn theta_row(&self) -> usize {
        match self.cfg.theta_mode {
            ThetaMode::Daily => self.t,
            ThetaMode::Weekly => {
                let week = self.panel.dates[self.t].iso_week();
                let mut s = self.t;
                while s > 0 && self.panel.dates[s - 1].iso_week() == week {
                    s -= 1;
                }
                s
            }
        }
    }

    fn theta_for(&self, full: &[usize], reduced: &[usize]) -> Result<ThetaResult> {
        let s = self.theta_row();
        let es_full = self.current_es(s, full)?;
        let (theta, es_reduced) = if full == reduced {
            (1.0, es_full)
        } else {
            let es_r = self.current_es(s, reduced)?;
            if !(es_r > 0.0) {
                return Err(RiskError::DegenerateDenominator(format!(
                    "reduced-set ES is {es_r} on {}",
                    self.panel.dates[s]
                )));
            }
            ((es_full / es_r).max(1.0), es_r)
        };
        Ok(ThetaResult {
            theta,
            es_full,
            es_reduced,
            cap_violation: theta >= self.cfg.theta_cap,
            computed_on: self.panel.dates[s],
        })
    }

    /// Maximum window ES over `j = 1..=N`; ties go to the earliest window.
    fn scan(&self, factors: &[usize]) -> Result<StressedEs> {
        let w = self.cfg.current_window;
        let n = self.cfg.lookback_windows;
        self.require(self.t, self.cfg.required_history())?;
        let losses = self.panel.losses(factors, self.exposure(self.t));
        let t = self.t;
        let es: Vec<f64> = (1..=n)
            .into_par_iter()
            .map(|j| {
                let mut win = losses[t - j + 1 - w..=t - j].to_vec();
                win.sort_by(f64::total_cmp);
                es_sorted_uniform(&win, self.cfg.p)
            })
            .collect::<Result<_>>()?;
        let mut best = n;
        for j in (1..n).rev() {
            if es[j - 1] > es[best - 1] {
                best = j;
            }
        }
        Ok(StressedEs {
            es_rs: es[best - 1],
            argmax_window: self.window(best),
        })
    }

    fn stress_adjusted(&self, full: &[usize], reduced: &[usize]) -> Result<StressAdjustedEs> {
        let theta = self.theta_for(full, reduced)?;
        let s = self.scan(reduced)?;
        Ok(StressAdjustedEs {
            es_tilde: s.es_rs * theta.theta,
            es_rs: s.es_rs,
            theta,
            argmax_window: s.argmax_window,
        })
    }

    fn dependence_adjusted(&self, es_tilde: f64) -> Result<DependenceAdjustedEs> {
        let mut per_class = Vec::with_capacity(self.res.classes.len());
        for (name, members) in &self.res.classes {
            let reduced: Vec<usize> = members
                .iter()
                .copied()
                .filter(|i| self.res.reduced.contains(i))
                .collect();
            if reduced.is_empty() {
                return Err(RiskError::invalid(format!(
                    "risk class {name} has no factor in the reduced set"
                )));
            }
            let r = self.stress_adjusted(members, &reduced)?;
            per_class.push(ClassResult {
                name: name.clone(),
                factors: members.iter().map(|&i| self.panel.factor_names[i].clone()).collect(),
                es_tilde: r.es_tilde,
                es_rs: r.es_rs,
                theta: r.theta.theta,
                argmax_window: r.argmax_window,
            });
        }
        let es_c = per_class.iter().map(|c| c.es_tilde).sum::<f64>();
        Ok(DependenceAdjustedEs {
            es_c,
            es_c_dominates: es_c >= es_tilde,
            per_class,
        })
    }
}

/// `max{ES_F / ES_R, 1}` over the current window, with the cap flag.
pub fn theta(panel: &PortfolioPanel, cfg: &BaselConfig, as_of: NaiveDate) -> Result<ThetaResult> {
    let c = Ctx::new(panel, cfg, as_of)?;
    c.theta_for(&c.res.all, &c.res.reduced)
}

/// Maximum reduced-set window ES over the lookback windows.
pub fn stressed_es(panel: &PortfolioPanel, cfg: &BaselConfig, as_of: NaiveDate) -> Result<StressedEs> {
    let c = Ctx::new(panel, cfg, as_of)?;
    c.scan(&c.res.reduced)
}

/// `ES_{R,S} * theta`.
pub fn stress_adjusted_es(
    panel: &PortfolioPanel,
    cfg: &BaselConfig,
    as_of: NaiveDate,
) -> Result<StressAdjustedEs> {
    let c = Ctx::new(panel, cfg, as_of)?;
    c.stress_adjusted(&c.res.all, &c.res.reduced)
}

/// Sum over risk classes of the stress-adjusted ES of each class
/// sub-portfolio; a class uses its own factors as the full set and their
/// intersection with the reduced set as its reduced set.
pub fn dependence_adjusted_es(
    panel: &PortfolioPanel,
    cfg: &BaselConfig,
    as_of: NaiveDate,
) -> Result<DependenceAdjustedEs> {
    let c = Ctx::new(panel, cfg, as_of)?;
    let whole = c.stress_adjusted(&c.res.all, &c.res.reduced)?;
    c.dependence_adjusted(whole.es_tilde)
}

/// `lambda * es_tilde + (1 - lambda) * es_c` with its components.
pub fn imcc(panel: &PortfolioPanel, cfg: &BaselConfig, as_of: NaiveDate) -> Result<ImccReport> {
    let c = Ctx::new(panel, cfg, as_of)?;
    let whole = c.stress_adjusted(&c.res.all, &c.res.reduced)?;
    let dep = c.dependence_adjusted(whole.es_tilde)?;
    let lambda = cfg.lambda;
    Ok(ImccReport {
        as_of,
        imcc: lambda * whole.es_tilde + (1.0 - lambda) * dep.es_c,
        lambda,
        p: cfg.p,
        components: ImccComponents {
            es_tilde: whole.es_tilde,
            es_c: dep.es_c,
            es_rs: whole.es_rs,
            theta: whole.theta.theta,
            theta_cap_violation: whole.theta.cap_violation,
            argmax_window: whole.argmax_window,
            per_class: dep.per_class,
            es_c_dominates: dep.es_c_dominates,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RollingValues {
    pub es: f64,
    pub mes: f64,
    pub pct_es: f64,
    pub pct_mes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RollingRow {
    pub date: NaiveDate,
    pub values: std::result::Result<RollingValues, String>,
}

/// Full-portfolio current-window ES and MES over the lookback windows for
/// every panel date in `from..=to`; the percentage columns divide by the
/// portfolio value `sum_i alpha_i P_{t-1}^i`. Failures are reported per row.
pub fn rolling_series(
    panel: &PortfolioPanel,
    cfg: &BaselConfig,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<Vec<RollingRow>> {
    cfg.resolve(panel)?;
    let lo = panel.dates.partition_point(|d| *d < from);
    let hi = panel.dates.partition_point(|d| *d <= to);
    if lo >= hi {
        return Err(RiskError::invalid(format!("no panel dates in {from} ..= {to}")));
    }
    Ok((lo..hi)
        .into_par_iter()
        .map(|t| {
            let date = panel.dates[t];
            let values = rolling_at(panel, cfg, date).map_err(|e| e.to_string());
            RollingRow { date, values }
        })
        .collect())
}

fn rolling_at(panel: &PortfolioPanel, cfg: &BaselConfig, as_of: NaiveDate) -> Result<RollingValues> {
    let c = Ctx::new(panel, cfg, as_of)?;
    let all = &c.res.all;
    let mes = c.scan(all)?.es_rs;
    let es = c.current_es(c.t, all)?;
    let value: f64 = c.exposure(c.t).iter().sum();
    if value == 0.0 {
        return Err(RiskError::DegenerateDenominator(format!("portfolio value is 0 on {as_of}")));
    }
    Ok(RollingValues {
        es,
        mes,
        pct_es: es / value,
        pct_mes: mes / value,
    })
}

/// `date,es,mes,pct_es,pct_mes` at 10 significant digits. Rows that failed
/// keep their date and leave the value cells empty.
pub fn write_rolling_csv<W: Write>(writer: W, rows: &[RollingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| RiskError::Io(std::io::Error::other(e));
    w.write_record(["date", "es", "mes", "pct_es", "pct_mes"]).map_err(io)?;
    for r in rows {
        let d = r.date.format(DATE_FORMAT).to_string();
        match &r.values {
            Ok(v) => w
                .write_record([d, fmt_sig(v.es), fmt_sig(v.mes), fmt_sig(v.pct_es), fmt_sig(v.pct_mes)])
                .map_err(io)?,
            Err(_) => w
                .write_record([d, String::new(), String::new(), String::new(), String::new()])
                .map_err(io)?,
        }
    }
    w.flush()?;
    Ok(())
}
