//! Self-contained scenario inputs: an outcome table, its scenarios and
//! optionally the base probability and regime assignment they came from.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::market::{EconomicScenarios, ScenarioAssignment};
use crate::measure::{law_under, OutcomeTable, ScenarioSet, WEIGHT_TOL};
use crate::scenario::ScenarioDistributions;
use crate::EmpiricalDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBundle {
    pub table: OutcomeTable,
    pub scenarios: ScenarioSet,
    /// Variable measured by default; the first table variable when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    /// Reference probability `P`; the equal-weight mixture of the scenarios
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<ScenarioAssignment>,
}

impl ScenarioBundle {
    pub fn new(table: OutcomeTable, scenarios: ScenarioSet) -> Result<Self> {
        let b = ScenarioBundle {
            table,
            scenarios,
            variable: None,
            base: None,
            assignment: None,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.table.outcome_count();
        if self.scenarios.outcome_count() != m {
            return Err(RiskError::invalid(format!(
                "table has {m} outcomes, scenarios have {}",
                self.scenarios.outcome_count()
            )));
        }
        if self.table.variables().is_empty() {
            return Err(RiskError::invalid("bundle table has no variables"));
        }
        if let Some(v) = &self.variable {
            self.table.variable(v)?;
        }
        if let Some(b) = &self.base {
            let total: f64 = b.iter().sum();
            if b.len() != m
                || b.iter().any(|w| !w.is_finite() || *w < 0.0)
                || (total - 1.0).abs() > WEIGHT_TOL
            {
                return Err(RiskError::invalid("bundle base is not a probability vector on the outcomes"));
            }
        }
        Ok(())
    }

    /// The named variable, else the default one.
    pub fn variable_name<'a>(&'a self, name: Option<&'a str>) -> Result<&'a str> {
        let name = name
            .or(self.variable.as_deref())
            .unwrap_or(&self.table.variables()[0].name);
        self.table.variable(name)?;
        Ok(name)
    }

    pub fn base_weights(&self) -> Vec<f64> {
        if let Some(b) = &self.base {
            return b.clone();
        }
        let n = self.scenarios.len() as f64;
        let mut w = vec![0.0; self.table.outcome_count()];
        for s in self.scenarios.scenarios() {
            for (acc, q) in w.iter_mut().zip(&s.weights) {
                *acc += q / n;
            }
        }
        w
    }

    pub fn distributions(&self, variable: Option<&str>) -> Result<ScenarioDistributions> {
        let name = self.variable_name(variable)?;
        ScenarioDistributions::from_table(&self.table, &self.scenarios, name)
    }

    /// Law of the variable under the base probability.
    pub fn base_law(&self, variable: Option<&str>) -> Result<EmpiricalDistribution> {
        let name = self.variable_name(variable)?;
        law_under(self.table.variable(name)?, &self.base_weights())
    }
}

impl From<EconomicScenarios> for ScenarioBundle {
    fn from(e: EconomicScenarios) -> Self {
        let m = e.table.outcome_count();
        let variable = e.table.variables().first().map(|v| v.name.clone());
        ScenarioBundle {
            table: e.table,
            scenarios: e.scenarios,
            variable,
            base: Some(vec![1.0 / m as f64; m]),
            assignment: Some(e.assignment),
        }
    }
}
