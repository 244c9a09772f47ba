//! Scenario-based VaR/ES family over a finite collection of scenario laws.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::measure::{
    check_level, integrate_max_quantile, law_under, tail_breakpoints, EmpiricalDistribution,
    OutcomeTable, ScenarioSet, MASS_DROP, WEIGHT_TOL,
};

/// One named scenario law of a risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDistribution {
    pub name: String,
    #[serde(flatten)]
    pub distribution: EmpiricalDistribution,
}

/// The per-scenario laws `F_{X,Q_1}, ..., F_{X,Q_n}` of one risk, in scenario
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<NamedDistribution>", into = "Vec<NamedDistribution>")]
pub struct ScenarioDistributions {
    entries: Vec<NamedDistribution>,
}

impl TryFrom<Vec<NamedDistribution>> for ScenarioDistributions {
    type Error = RiskError;

    fn try_from(entries: Vec<NamedDistribution>) -> Result<Self> {
        ScenarioDistributions::new(entries)
    }
}

impl From<ScenarioDistributions> for Vec<NamedDistribution> {
    fn from(sd: ScenarioDistributions) -> Self {
        sd.entries
    }
}

impl ScenarioDistributions {
    pub fn new(entries: Vec<NamedDistribution>) -> Result<Self> {
        if entries.is_empty() {
            return Err(RiskError::invalid("no scenario distributions"));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.name.as_str()) {
                return Err(RiskError::invalid(format!("duplicate scenario name {}", e.name)));
            }
        }
        Ok(ScenarioDistributions { entries })
    }

    /// Unnamed laws get names `Q1, Q2, ...`.
    pub fn from_laws(laws: Vec<EmpiricalDistribution>) -> Result<Self> {
        Self::new(
            laws.into_iter()
                .enumerate()
                .map(|(i, distribution)| NamedDistribution {
                    name: format!("Q{}", i + 1),
                    distribution,
                })
                .collect(),
        )
    }

    /// Laws of `variable` under every scenario of `scenarios`.
    pub fn from_table(
        table: &OutcomeTable,
        scenarios: &ScenarioSet,
        variable: &str,
    ) -> Result<Self> {
        Self::from_losses(table.variable(variable)?, scenarios)
    }

    /// Laws of a raw loss vector under every scenario.
    pub fn from_losses(losses: &[f64], scenarios: &ScenarioSet) -> Result<Self> {
        let entries = scenarios
            .scenarios()
            .iter()
            .map(|s| {
                Ok(NamedDistribution {
                    name: s.name.clone(),
                    distribution: law_under(losses, &s.weights)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[NamedDistribution] {
        &self.entries
    }

    pub fn laws(&self) -> Vec<&EmpiricalDistribution> {
        self.entries.iter().map(|e| &e.distribution).collect()
    }

    /// Every law transformed by the same increasing affine map.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                Ok(NamedDistribution {
                    name: e.name.clone(),
                    distribution: e.distribution.affine(scale, shift)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// Per-scenario ES values in scenario order.
    pub fn es_values(&self, p: f64) -> Result<Vec<f64>> {
        check_level(p, false, "ES level")?;
        self.entries.iter().map(|e| e.distribution.es(p)).collect()
    }

    /// `MES_p = max_i ES_p^{Q_i}`.
    pub fn mes(&self, p: f64) -> Result<f64> {
        Ok(max_in_order(&self.es_values(p)?))
    }

    /// `MVaR_p = max_i VaR_p^{Q_i}`.
    pub fn mvar(&self, p: f64) -> Result<f64> {
        check_level(p, false, "VaR level")?;
        let vars = self
            .entries
            .iter()
            .map(|e| e.distribution.var(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(max_in_order(&vars))
    }

    /// Weighted average of per-scenario ES; uniform weights when `None`.
    pub fn aes(&self, p: f64, weights: Option<&[f64]>) -> Result<f64> {
        let es = self.es_values(p)?;
        match weights {
            None => Ok(es.iter().sum::<f64>() / es.len() as f64),
            Some(w) => {
                check_simplex(w, es.len())?;
                Ok(es.iter().zip(w).map(|(e, a)| e * a).sum())
            }
        }
    }

    /// `iMES_p`: ES-style integral of the pointwise maximum of the scenario
    /// quantile functions, integrated exactly over the union of all
    /// cumulative breakpoints.
    pub fn imes(&self, p: f64) -> Result<f64> {
        check_level(p, false, "iMES level")?;
        Ok(integrate_max_quantile(&self.laws(), p))
    }

    /// Law of `max_i F_i^-1(U)` for a single uniform `U`.
    pub fn max_quantile_law(&self) -> Result<EmpiricalDistribution> {
        let laws = self.laws();
        let mut pairs = Vec::new();
        let mut lo = 0.0;
        for hi in tail_breakpoints(&laws, 0.0) {
            let top = laws
                .iter()
                .map(|d| d.quantile_unchecked(hi))
                .fold(f64::NEG_INFINITY, f64::max);
            pairs.push((top, hi - lo));
            lo = hi;
        }
        EmpiricalDistribution::from_raw_pairs(pairs)
    }

    /// iMES through the ES of the max-quantile law; an independent route to
    /// [`imes`](Self::imes).
    pub fn imes_via_max_quantile(&self, p: f64) -> Result<f64> {
        check_level(p, false, "iMES level")?;
        self.max_quantile_law()?.es(p)
    }

    /// Law of `max_i X_i` with independent `X_i ~ F_i`, built from the product
    /// of the CDFs on the union of the supports.
    pub fn independent_max_law(&self) -> Result<EmpiricalDistribution> {
        max_law_of(&self.laws())
    }

    /// `rMES_p`: ES of the maximum of independent copies, one per scenario.
    pub fn rmes(&self, p: f64) -> Result<f64> {
        check_level(p, false, "rMES level")?;
        self.independent_max_law()?.es(p)
    }
}

fn max_in_order(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn check_simplex(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(RiskError::invalid(format!(
            "weight vector has length {}, expected {n}",
            w.len()
        )));
    }
    if w.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(RiskError::invalid("weights must be finite and non-negative"));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(RiskError::invalid(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

pub(crate) fn max_law_of(laws: &[&EmpiricalDistribution]) -> Result<EmpiricalDistribution> {
    let mut support: Vec<f64> = laws.iter().flat_map(|d| d.values().iter().copied()).collect();
    support.sort_by(f64::total_cmp);
    support.dedup();
    let mut pairs = Vec::with_capacity(support.len());
    let mut prev = 0.0;
    for x in support {
        let f: f64 = laws.iter().map(|d| d.cdf(x)).product();
        let mass = f - prev;
        if mass >= MASS_DROP {
            pairs.push((x, mass));
        }
        prev = f;
    }
    EmpiricalDistribution::from_raw_pairs(pairs)
}

/// `E[max(X_1..X_n)]` or its ES at level `p` for `n` iid copies of `d`.
/// `p = 0` is the pure expectation; `p` in (0, 1) is rMES over `n` copies.
pub fn minvar(d: &EmpiricalDistribution, n: usize, p: f64) -> Result<f64> {
    if n < 1 {
        return Err(RiskError::invalid("minvar needs n >= 1 copies"));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(RiskError::invalid(format!("minvar level must lie in [0, 1), got {p}")));
    }
    let mut pairs = Vec::with_capacity(d.len());
    let mut prev = 0.0;
    for (&x, &c) in d.values().iter().zip(d.cumulative()) {
        let f = c.powi(n as i32);
        if f - prev >= MASS_DROP {
            pairs.push((x, f - prev));
        }
        prev = f;
    }
    let law = EmpiricalDistribution::from_raw_pairs(pairs)?;
    if p == 0.0 {
        Ok(law.mean())
    } else {
        law.es(p)
    }
}

/// Outcome of checking `MVaR >= VaR^P` and `iMES >= ES^P` on a partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub mvar: f64,
    pub var_base: f64,
    pub imes: f64,
    pub es_base: f64,
    pub mvar_dominates: bool,
    pub imes_dominates: bool,
}

/// Checks the conditional-scenario dominance inequalities for scenarios that
/// are the `base`-conditionals on disjoint events covering the base support.
pub fn conditional_dominance_check(
    table: &OutcomeTable,
    partition: &ScenarioSet,
    base: &[f64],
    variable: &str,
    p: f64,
) -> Result<DominanceReport> {
    check_level(p, false, "level")?;
    verify_conditional_partition(partition, base)?;
    let x = table.variable(variable)?;
    let sd = ScenarioDistributions::from_losses(x, partition)?;
    let base_law = law_under(x, base)?;
    let mvar = sd.mvar(p)?;
    let imes = sd.imes(p)?;
    let var_base = base_law.var(p)?;
    let es_base = base_law.es(p)?;
    Ok(DominanceReport {
        mvar,
        var_base,
        imes,
        es_base,
        mvar_dominates: mvar >= var_base,
        imes_dominates: imes >= es_base,
    })
}

fn verify_conditional_partition(partition: &ScenarioSet, base: &[f64]) -> Result<()> {
    let m = partition.outcome_count();
    if base.len() != m {
        return Err(RiskError::invalid(format!(
            "base has {} weights, scenarios have {m}",
            base.len()
        )));
    }
    let total: f64 = base.iter().sum();
    if base.iter().any(|w| !w.is_finite() || *w < 0.0) || (total - 1.0).abs() > WEIGHT_TOL {
        return Err(RiskError::invalid("base is not a probability vector"));
    }
    if !partition.mutually_singular() {
        return Err(RiskError::invalid("partition scenarios overlap"));
    }
    let mut covered = vec![false; m];
    for s in partition.scenarios() {
        let cell_mass: f64 = s
            .weights
            .iter()
            .zip(base)
            .filter(|(q, _)| **q > 0.0)
            .map(|(_, b)| b)
            .sum();
        if !(cell_mass > 0.0) {
            return Err(RiskError::invalid(format!(
                "scenario {} lives on a base-null event",
                s.name
            )));
        }
        for (i, (&q, &b)) in s.weights.iter().zip(base).enumerate() {
            if q > 0.0 {
                covered[i] = true;
                if (q - b / cell_mass).abs() > 1e-9 {
                    return Err(RiskError::invalid(format!(
                        "scenario {} is not the base conditional on its support (outcome {i})",
                        s.name
                    )));
                }
            }
        }
    }
    if let Some(i) = (0..m).find(|&i| base[i] > 0.0 && !covered[i]) {
        return Err(RiskError::invalid(format!(
            "partition does not cover base outcome {i}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(values: &[f64], weights: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(values.to_vec(), weights.to_vec()).unwrap()
    }

    fn split() -> ScenarioDistributions {
        ScenarioDistributions::from_laws(vec![
            EmpiricalDistribution::point_mass(1.0),
            law(&[0.0, 2.0], &[0.75, 0.25]),
        ])
        .unwrap()
    }

    #[test]
    fn split_family_values() {
        let sd = split();
        assert_eq!(sd.mes(0.5).unwrap(), 1.0);
        assert_eq!(sd.mvar(0.5).unwrap(), 1.0);
        assert_eq!(sd.aes(0.5, None).unwrap(), 1.0);
        assert_eq!(sd.imes(0.5).unwrap(), 1.5);
        assert_eq!(sd.imes_via_max_quantile(0.5).unwrap(), 1.5);
        assert_eq!(sd.rmes(0.5).unwrap(), 1.5);
        let max_law = sd.independent_max_law().unwrap();
        assert_eq!(max_law.values(), &[1.0, 2.0]);
        assert_eq!(max_law.weights(), &[0.75, 0.25]);
    }

    #[test]
    fn max_semantics_and_weights() {
        let sd = ScenarioDistributions::from_laws(vec![
            EmpiricalDistribution::point_mass(0.3),
            EmpiricalDistribution::point_mass(0.9),
            EmpiricalDistribution::point_mass(0.5),
        ])
        .unwrap();
        assert_eq!(sd.mes(0.9).unwrap(), 0.9);

        let two = ScenarioDistributions::from_laws(vec![
            EmpiricalDistribution::point_mass(1.0),
            EmpiricalDistribution::point_mass(3.0),
        ])
        .unwrap();
        assert_eq!(two.aes(0.5, Some(&[0.25, 0.75])).unwrap(), 2.5);
        assert_eq!(two.aes(0.5, Some(&[0.0, 1.0])).unwrap(), 3.0);
        assert!(two.aes(0.5, Some(&[0.5, 0.6])).is_err());
        assert!(two.aes(0.5, Some(&[1.0])).is_err());
    }

    #[test]
    fn single_scenario_collapses() {
        let d = law(&[-1.0, 0.5, 2.0, 4.0], &[0.1, 0.4, 0.3, 0.2]);
        let sd = ScenarioDistributions::from_laws(vec![d.clone()]).unwrap();
        for p in [0.1, 0.5, 0.9] {
            let es = d.es(p).unwrap();
            assert_eq!(sd.mes(p).unwrap(), es);
            assert_eq!(sd.aes(p, None).unwrap(), es);
            assert_eq!(sd.imes(p).unwrap(), es);
            assert!((sd.rmes(p).unwrap() - es).abs() < 1e-12);
            assert_eq!(sd.mvar(p).unwrap(), d.var(p).unwrap());
        }
    }

    #[test]
    fn identical_scenarios() {
        let d = law(&[0.0, 1.0, 5.0], &[0.5, 0.3, 0.2]);
        let sd = ScenarioDistributions::from_laws(vec![d.clone(), d.clone()]).unwrap();
        assert_eq!(sd.imes(0.6).unwrap(), d.es(0.6).unwrap());
        assert_eq!(sd.mvar(0.6).unwrap(), d.var(0.6).unwrap());
    }

    #[test]
    fn iid_uniform_pair_max_mean() {
        let d = law(&[0.0, 1.0], &[0.5, 0.5]);
        let sd = ScenarioDistributions::from_laws(vec![d.clone(), d.clone()]).unwrap();
        assert!((sd.rmes(0.001).unwrap() - 0.75).abs() < 1e-3);
        assert_eq!(minvar(&d, 2, 0.0).unwrap(), 0.75);
        assert_eq!(minvar(&d, 1, 0.0).unwrap(), d.mean());
        assert_eq!(minvar(&EmpiricalDistribution::point_mass(2.0), 7, 0.0).unwrap(), 2.0);
        assert_eq!(minvar(&EmpiricalDistribution::point_mass(2.0), 3, 0.4).unwrap(), 2.0);
        assert!(minvar(&d, 0, 0.0).is_err());
        assert!((minvar(&d, 2, 0.3).unwrap() - sd.rmes(0.3).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_levels() {
        let sd = split();
        assert!(sd.mes(0.0).is_err());
        assert!(sd.imes(1.0).is_err());
        assert!(sd.rmes(-0.5).is_err());
        assert!(ScenarioDistributions::new(vec![]).is_err());
    }

    fn split_table() -> (OutcomeTable, ScenarioSet, Vec<f64>) {
        let t = OutcomeTable::new(8)
            .unwrap()
            .with_variable("X", vec![1., 1., 1., 1., 0., 0., 0., 2.])
            .unwrap();
        let s = ScenarioSet::uniform_groups(
            8,
            &[("Q1".into(), (0..4).collect()), ("Q2".into(), (4..8).collect())],
        )
        .unwrap();
        (t, s, vec![0.125; 8])
    }

    #[test]
    fn dominance_on_split_example() {
        let (t, s, base) = split_table();
        let r = conditional_dominance_check(&t, &s, &base, "X", 0.5).unwrap();
        assert_eq!(r.mvar, 1.0);
        assert_eq!(r.var_base, 1.0);
        assert_eq!(r.imes, 1.5);
        assert_eq!(r.es_base, 1.25);
        assert!(r.mvar_dominates && r.imes_dominates);
    }

    #[test]
    fn dominance_single_cell_is_equality() {
        let (t, _, base) = split_table();
        let s = ScenarioSet::uniform_groups(8, &[("P".into(), (0..8).collect())]).unwrap();
        let r = conditional_dominance_check(&t, &s, &base, "X", 0.5).unwrap();
        assert_eq!(r.mvar, r.var_base);
        assert_eq!(r.imes, r.es_base);
    }

    #[test]
    fn dominance_rejects_non_conditionals() {
        let (t, _, base) = split_table();
        let lopsided = ScenarioSet::new(vec![
            crate::measure::Scenario {
                name: "A".into(),
                weights: vec![0.7, 0.1, 0.1, 0.1, 0., 0., 0., 0.],
            },
            crate::measure::Scenario {
                name: "B".into(),
                weights: vec![0., 0., 0., 0., 0.25, 0.25, 0.25, 0.25],
            },
        ])
        .unwrap();
        assert!(conditional_dominance_check(&t, &lopsided, &base, "X", 0.5).is_err());
        let partial =
            ScenarioSet::uniform_groups(8, &[("A".into(), (0..4).collect())]).unwrap();
        assert!(conditional_dominance_check(&t, &partial, &base, "X", 0.5).is_err());
    }
}
