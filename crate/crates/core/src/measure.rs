//! Finite probability spaces, empirical laws and single-scenario VaR / ES.
//!
//! An [`EmpiricalDistribution`] is a finite atomic law with strictly
//! increasing support. Quantiles are the left-continuous generalized inverse
//! `F^-1(t) = inf{x : F(x) >= t}` and ES is the exact integral of that step
//! function over `(p, 1]`, so there is no interpolation between atoms.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};

/// Tolerance on probability vectors summing to one.
pub const WEIGHT_TOL: f64 = 1e-12;
/// Atoms with normalized mass below this are dropped.
pub const MASS_DROP: f64 = 1e-15;
/// Slack used when comparing a probability level against cumulative weights.
pub(crate) const LEVEL_TOL: f64 = 1e-12;

pub(crate) fn check_level(t: f64, allow_one: bool, what: &str) -> Result<()> {
    let ok = t > 0.0 && (t < 1.0 || (allow_one && t == 1.0));
    if ok {
        Ok(())
    } else if allow_one {
        Err(RiskError::invalid(format!("{what} must lie in (0, 1], got {t}")))
    } else {
        Err(RiskError::invalid(format!("{what} must lie in (0, 1), got {t}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDistribution {
    values: Vec<f64>,
    weights: Vec<f64>,
}

/// Sorted support values with positive probability weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution", into = "RawDistribution")]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TryFrom<RawDistribution> for EmpiricalDistribution {
    type Error = RiskError;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        EmpiricalDistribution::new(raw.values, raw.weights)
    }
}

impl From<EmpiricalDistribution> for RawDistribution {
    fn from(d: EmpiricalDistribution) -> Self {
        RawDistribution {
            values: d.values,
            weights: d.weights,
        }
    }
}

impl EmpiricalDistribution {
    /// Builds a law from explicit atoms whose weights already sum to one
    /// (within [`WEIGHT_TOL`]). Duplicate values are merged.
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(RiskError::invalid(format!(
                "{} values but {} weights",
                values.len(),
                weights.len()
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(RiskError::invalid(format!(
                "weights sum to {total}, expected 1 within {WEIGHT_TOL}"
            )));
        }
        Self::from_samples(&values, Some(&weights))
    }

    /// Empirical law of `samples`, uniform unless `weights` are given. Weights
    /// are normalized internally, so any non-negative vector with positive
    /// sum is accepted.
    pub fn from_samples(samples: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        if samples.is_empty() {
            return Err(RiskError::invalid("no samples"));
        }
        if let Some(w) = weights {
            if w.len() != samples.len() {
                return Err(RiskError::invalid(format!(
                    "{} samples but {} weights",
                    samples.len(),
                    w.len()
                )));
            }
        }
        let mut pairs = Vec::with_capacity(samples.len());
        for (i, &x) in samples.iter().enumerate() {
            if !x.is_finite() {
                return Err(RiskError::invalid(format!("sample {i} is not finite")));
            }
            let w = weights.map_or(1.0, |w| w[i]);
            if !w.is_finite() || w < 0.0 {
                return Err(RiskError::invalid(format!(
                    "weight {i} must be finite and non-negative, got {w}"
                )));
            }
            if w > 0.0 {
                // +0.0 folds a negative zero into the positive one
                pairs.push((x + 0.0, w));
            }
        }
        Self::from_raw_pairs(pairs)
    }

    /// Core constructor: `pairs` hold raw non-negative masses.
    pub(crate) fn from_raw_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if pairs.is_empty() || !(total > 0.0) {
            return Err(RiskError::invalid("weights have zero total mass"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (x, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += w,
                _ => merged.push((x, w)),
            }
        }
        merged.retain(|&(_, w)| w / total >= MASS_DROP);
        let total: f64 = merged.iter().map(|p| p.1).sum();

        let mut values = Vec::with_capacity(merged.len());
        let mut weights = Vec::with_capacity(merged.len());
        let mut cumulative = Vec::with_capacity(merged.len());
        let mut running = 0.0;
        for (x, w) in merged {
            running += w;
            values.push(x);
            weights.push(w / total);
            cumulative.push(running / total);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(EmpiricalDistribution {
            values,
            weights,
            cumulative,
        })
    }

    pub fn point_mass(c: f64) -> Self {
        EmpiricalDistribution {
            values: vec![c + 0.0],
            weights: vec![1.0],
            cumulative: vec![1.0],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// `F(x) = P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    pub(crate) fn quantile_unchecked(&self, t: f64) -> f64 {
        let idx = self.cumulative.partition_point(|&c| c < t - LEVEL_TOL);
        self.values[idx.min(self.values.len() - 1)]
    }

    /// Left-continuous generalized inverse at level `t` in (0, 1].
    pub fn quantile(&self, t: f64) -> Result<f64> {
        check_level(t, true, "quantile level")?;
        Ok(self.quantile_unchecked(t))
    }

    /// Value-at-Risk at level `p`; identical to [`quantile`](Self::quantile).
    pub fn var(&self, p: f64) -> Result<f64> {
        check_level(p, true, "VaR level")?;
        Ok(self.quantile_unchecked(p))
    }

    /// Expected Shortfall at level `p`: the average of the quantile function
    /// over `(p, 1]`. `p = 1` returns the maximum of the support.
    pub fn es(&self, p: f64) -> Result<f64> {
        check_level(p, true, "ES level")?;
        if p == 1.0 {
            return Ok(self.max());
        }
        Ok(integrate_max_quantile(&[self], p))
    }

    /// Pointwise increasing affine image `scale * X + shift` (scale > 0).
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !shift.is_finite() {
            return Err(RiskError::invalid(format!(
                "affine map needs finite scale > 0 and finite shift, got ({scale}, {shift})"
            )));
        }
        let values: Vec<f64> = self.values.iter().map(|v| scale * v + shift).collect();
        Self::from_samples(&values, Some(&self.weights))
    }
}

/// Sorted, de-duplicated cumulative levels of all laws strictly inside
/// `(p, 1)`, terminated by 1.
pub(crate) fn tail_breakpoints(dists: &[&EmpiricalDistribution], p: f64) -> Vec<f64> {
    let mut breaks: Vec<f64> = dists
        .iter()
        .flat_map(|d| d.cumulative.iter().copied())
        .filter(|&c| c > p + LEVEL_TOL && c < 1.0 - LEVEL_TOL)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|later, kept| *later - *kept <= LEVEL_TOL);
    breaks.push(1.0);
    breaks
}

/// `1/(1-p) * int_p^1 max_i F_i^-1(q) dq`, exact for step quantile functions.
/// With a single law this is that law's ES.
pub(crate) fn integrate_max_quantile(dists: &[&EmpiricalDistribution], p: f64) -> f64 {
    let top_at = |q: f64| {
        dists
            .iter()
            .map(|d| d.quantile_unchecked(q))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let breaks = tail_breakpoints(dists, p);
    if breaks.len() == 1 {
        // tail inside one step: the average is that step's value, exactly
        return top_at(1.0);
    }
    let mut lo = p;
    let mut acc = 0.0;
    for hi in breaks {
        acc += (hi - lo) * top_at(hi);
        lo = hi;
    }
    acc / (1.0 - p)
}

/// ES of the uniform law on already-sorted (ascending) samples. Same value as
/// building an [`EmpiricalDistribution`] first, without the allocation.
pub fn es_sorted_uniform(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(RiskError::invalid("no samples"));
    }
    check_level(p, true, "ES level")?;
    let n = sorted.len();
    if p == 1.0 {
        return Ok(sorted[n - 1]);
    }
    let nf = n as f64;
    if (n - 1) as f64 / nf <= p + LEVEL_TOL {
        return Ok(sorted[n - 1]);
    }
    let mut acc = 0.0;
    for j in (1..=n).rev() {
        let hi = if j == n { 1.0 } else { j as f64 / nf };
        if hi <= p + LEVEL_TOL {
            break;
        }
        let lo = ((j - 1) as f64 / nf).max(p);
        acc += (hi - lo) * sorted[j - 1];
    }
    Ok(acc / (1.0 - p))
}

/// A named risk variable: one loss value per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawOutcomeTable {
    outcome_count: usize,
    #[serde(default)]
    variables: Vec<Variable>,
}

/// A finite outcome space with one loss value per outcome per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOutcomeTable")]
pub struct OutcomeTable {
    outcome_count: usize,
    variables: Vec<Variable>,
}

impl TryFrom<RawOutcomeTable> for OutcomeTable {
    type Error = RiskError;

    fn try_from(raw: RawOutcomeTable) -> Result<Self> {
        let mut t = OutcomeTable::new(raw.outcome_count)?;
        for v in raw.variables {
            t.add_variable(v.name, v.values)?;
        }
        Ok(t)
    }
}

impl OutcomeTable {
    pub fn new(outcome_count: usize) -> Result<Self> {
        if outcome_count == 0 {
            return Err(RiskError::invalid("outcome table needs at least one outcome"));
        }
        Ok(OutcomeTable {
            outcome_count,
            variables: Vec::new(),
        })
    }

    pub fn add_variable(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.outcome_count {
            return Err(RiskError::invalid(format!(
                "variable {name} has {} values, table has {} outcomes",
                values.len(),
                self.outcome_count
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RiskError::invalid(format!("variable {name} has non-finite values")));
        }
        if self.variables.iter().any(|v| v.name == name) {
            return Err(RiskError::invalid(format!("duplicate variable name {name}")));
        }
        self.variables.push(Variable { name, values });
        Ok(())
    }

    pub fn with_variable(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        self.add_variable(name, values)?;
        Ok(self)
    }

    pub fn outcome_count(&self) -> usize {
        self.outcome_count
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Result<&[f64]> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.values.as_slice())
            .ok_or_else(|| RiskError::NotFound(format!("variable {name}")))
    }
}

/// One scenario: a probability weight vector over the shared outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawScenarioSet {
    scenarios: Vec<Scenario>,
}

/// Ordered, named scenarios over one outcome index. Order is significant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenarioSet")]
pub struct ScenarioSet {
    scenarios: Vec<Scenario>,
    mutually_singular: bool,
}

impl TryFrom<RawScenarioSet> for ScenarioSet {
    type Error = RiskError;

    fn try_from(raw: RawScenarioSet) -> Result<Self> {
        ScenarioSet::new(raw.scenarios)
    }
}

impl ScenarioSet {
    pub fn new(scenarios: Vec<Scenario>) -> Result<Self> {
        let Some(first) = scenarios.first() else {
            return Err(RiskError::invalid("scenario set is empty"));
        };
        let m = first.weights.len();
        if m == 0 {
            return Err(RiskError::invalid("scenario weight vectors are empty"));
        }
        let mut names = HashSet::new();
        for s in &scenarios {
            if !names.insert(s.name.clone()) {
                return Err(RiskError::invalid(format!("duplicate scenario name {}", s.name)));
            }
            if s.weights.len() != m {
                return Err(RiskError::invalid(format!(
                    "scenario {} has {} weights, expected {m}",
                    s.name,
                    s.weights.len()
                )));
            }
            if s.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(RiskError::invalid(format!(
                    "scenario {} has negative or non-finite weights",
                    s.name
                )));
            }
            let total: f64 = s.weights.iter().sum();
            if (total - 1.0).abs() > WEIGHT_TOL {
                return Err(RiskError::invalid(format!(
                    "scenario {} weights sum to {total}",
                    s.name
                )));
            }
        }
        let mut set = ScenarioSet {
            scenarios,
            mutually_singular: false,
        };
        set.mutually_singular = check_mutually_singular(&set);
        Ok(set)
    }

    /// Scenarios uniform on the given groups of outcome indices.
    pub fn uniform_groups(
        outcome_count: usize,
        groups: &[(String, Vec<usize>)],
    ) -> Result<Self> {
        let mut scenarios = Vec::with_capacity(groups.len());
        for (name, members) in groups {
            if members.is_empty() {
                return Err(RiskError::invalid(format!("scenario {name} has no outcomes")));
            }
            let mut weights = vec![0.0; outcome_count];
            let w = 1.0 / members.len() as f64;
            for &i in members {
                if i >= outcome_count {
                    return Err(RiskError::invalid(format!(
                        "outcome {i} out of range for {outcome_count} outcomes"
                    )));
                }
                weights[i] += w;
            }
            scenarios.push(Scenario {
                name: name.clone(),
                weights,
            });
        }
        Self::new(scenarios)
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn outcome_count(&self) -> usize {
        self.scenarios[0].weights.len()
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn mutually_singular(&self) -> bool {
        self.mutually_singular
    }

    pub fn scenario(&self, name: &str) -> Result<&Scenario> {
        self.scenarios
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| RiskError::NotFound(format!("scenario {name}")))
    }
}

/// True iff the supports of distinct scenarios are pairwise disjoint and no two
/// weight vectors coincide.
pub fn check_mutually_singular(s: &ScenarioSet) -> bool {
    let m = s.outcome_count();
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for (i, sc) in s.scenarios.iter().enumerate() {
        for (w, slot) in sc.weights.iter().zip(owner.iter_mut()) {
            if *w > 0.0 {
                if slot.is_some() {
                    return false;
                }
                *slot = Some(i);
            }
        }
    }
    // disjoint non-empty supports already force the vectors to differ
    true
}

/// Law of `variable` under `scenario`; zero-weight outcomes are dropped.
pub fn scenario_distribution(
    table: &OutcomeTable,
    scenarios: &ScenarioSet,
    variable: &str,
    scenario: &str,
) -> Result<EmpiricalDistribution> {
    let values = table.variable(variable)?;
    let sc = scenarios.scenario(scenario)?;
    law_under(values, &sc.weights)
}

pub(crate) fn law_under(values: &[f64], weights: &[f64]) -> Result<EmpiricalDistribution> {
    if values.len() != weights.len() {
        return Err(RiskError::invalid(format!(
            "{} outcomes in variable but {} scenario weights",
            values.len(),
            weights.len()
        )));
    }
    EmpiricalDistribution::from_samples(values, Some(weights))
}
