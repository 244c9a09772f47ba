//! Set functions on finite outcome spaces, distortion functions
//! `psi: [0,1]^n -> [0,1]` and the Choquet integral.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::measure::{ScenarioSet, WEIGHT_TOL};

/// Largest space that may be held as a dense table of `2^m` values.
pub const TABLE_CAP: usize = 20;

pub type PsiFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type SetFn = Arc<dyn Fn(&[bool]) -> f64 + Send + Sync>;

/// Serializable analytic families of distortion functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PsiFamily {
    /// `1 - 1{x_1, ..., x_n <= 1 - p}`.
    MvarType { p: f64 },
    /// `min{max(x) / (1 - p), 1}`.
    ImesType { p: f64 },
    /// `1 - prod(1 - x_i)`.
    MinvarType,
    /// `sum a_i min{x_i, 1 - p} / (1 - p)`; uniform `a` if omitted.
    AesType {
        p: f64,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
    /// Single-scenario `g` tabulated on `{0, 1/k, ..., 1}`, linear in between.
    SingleG { grid: Vec<f64> },
    /// `sum c_i x_i`.
    Linear { coefficients: Vec<f64> },
}

#[derive(Clone)]
enum PsiKind {
    Family(PsiFamily),
    Custom { label: String, f: PsiFn },
}

/// A distortion function of arity `n` evaluated on per-scenario probabilities.
#[derive(Clone)]
pub struct DistortionSpec {
    arity: usize,
    kind: PsiKind,
}

impl fmt::Debug for DistortionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PsiKind::Family(fam) => write!(f, "DistortionSpec({}, {fam:?})", self.arity),
            PsiKind::Custom { label, .. } => {
                write!(f, "DistortionSpec({}, custom {label})", self.arity)
            }
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(RiskError::invalid(format!("distortion level must lie in (0, 1), got {p}")))
    }
}

impl DistortionSpec {
    /// Validates parameters and the endpoint conditions `psi(0) = 0`,
    /// `psi(1) = 1`.
    pub fn from_family(arity: usize, family: PsiFamily) -> Result<Self> {
        if arity == 0 {
            return Err(RiskError::invalid("distortion arity must be positive"));
        }
        match &family {
            PsiFamily::MvarType { p } | PsiFamily::ImesType { p } => check_p(*p)?,
            PsiFamily::MinvarType => {}
            PsiFamily::AesType { p, weights } => {
                check_p(*p)?;
                if let Some(w) = weights {
                    crate::scenario::check_simplex(w, arity)?;
                }
            }
            PsiFamily::SingleG { grid } => {
                if arity != 1 {
                    return Err(RiskError::invalid("single_g distortion has arity 1"));
                }
                if grid.len() < 2 || grid.iter().any(|g| !g.is_finite()) {
                    return Err(RiskError::invalid("single_g needs at least two finite grid values"));
                }
            }
            PsiFamily::Linear { coefficients } => {
                if coefficients.len() != arity {
                    return Err(RiskError::invalid(format!(
                        "linear distortion has {} coefficients, arity is {arity}",
                        coefficients.len()
                    )));
                }
            }
        }
        let spec = DistortionSpec {
            arity,
            kind: PsiKind::Family(family),
        };
        spec.check_endpoints()?;
        if matches!(&spec.kind, PsiKind::Family(PsiFamily::SingleG { .. })) {
            let (lo, hi) = spec.range_on_grid(20);
            if lo < -WEIGHT_TOL || hi > 1.0 + WEIGHT_TOL {
                return Err(RiskError::invalid("single_g leaves [0, 1]"));
            }
        }
        Ok(spec)
    }

    pub fn mvar_type(arity: usize, p: f64) -> Result<Self> {
        Self::from_family(arity, PsiFamily::MvarType { p })
    }

    pub fn imes_type(arity: usize, p: f64) -> Result<Self> {
        Self::from_family(arity, PsiFamily::ImesType { p })
    }

    pub fn minvar_type(arity: usize) -> Result<Self> {
        Self::from_family(arity, PsiFamily::MinvarType)
    }

    pub fn aes_type(arity: usize, p: f64, weights: Option<Vec<f64>>) -> Result<Self> {
        Self::from_family(arity, PsiFamily::AesType { p, weights })
    }

    pub fn single_g(grid: Vec<f64>) -> Result<Self> {
        Self::from_family(1, PsiFamily::SingleG { grid })
    }

    /// The ES distortion `g(t) = min{t, 1-p} / (1-p)`, evaluated exactly.
    pub fn es_distortion(p: f64) -> Result<Self> {
        check_p(p)?;
        Self::custom(1, format!("es({p})"), move |x| x[0].min(1.0 - p) / (1.0 - p))
    }

    /// Arbitrary callable. Only the endpoints are validated; use
    /// [`range_on_grid`](Self::range_on_grid) to inspect the range.
    pub fn custom(
        arity: usize,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(RiskError::invalid("distortion arity must be positive"));
        }
        let spec = DistortionSpec {
            arity,
            kind: PsiKind::Custom {
                label: label.into(),
                f: Arc::new(f),
            },
        };
        spec.check_endpoints()?;
        Ok(spec)
    }

    fn check_endpoints(&self) -> Result<()> {
        let zero = self.eval(&vec![0.0; self.arity]);
        let one = self.eval(&vec![1.0; self.arity]);
        if zero.abs() > WEIGHT_TOL || (one - 1.0).abs() > WEIGHT_TOL {
            return Err(RiskError::invalid(format!(
                "distortion must satisfy psi(0) = 0 and psi(1) = 1, got {zero} and {one}"
            )));
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn family(&self) -> Option<&PsiFamily> {
        match &self.kind {
            PsiKind::Family(f) => Some(f),
            PsiKind::Custom { .. } => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        match &self.kind {
            PsiKind::Custom { f, .. } => f(x),
            PsiKind::Family(fam) => match fam {
                PsiFamily::MvarType { p } => {
                    if x.iter().all(|&xi| xi <= 1.0 - p) {
                        0.0
                    } else {
                        1.0
                    }
                }
                PsiFamily::ImesType { p } => {
                    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    (m / (1.0 - p)).min(1.0)
                }
                PsiFamily::MinvarType => 1.0 - x.iter().map(|xi| 1.0 - xi).product::<f64>(),
                PsiFamily::AesType { p, weights } => {
                    let n = x.len() as f64;
                    let s: f64 = match weights {
                        Some(a) => x.iter().zip(a).map(|(xi, ai)| ai * xi.min(1.0 - p)).sum(),
                        None => x.iter().map(|xi| xi.min(1.0 - p) / n).sum(),
                    };
                    s / (1.0 - p)
                }
                PsiFamily::SingleG { grid } => interpolate(grid, x[0]),
                PsiFamily::Linear { coefficients } => {
                    coefficients.iter().zip(x).map(|(c, xi)| c * xi).sum()
                }
            },
        }
    }

    /// Minimum and maximum of psi over the grid `{0, 1/k, ..., 1}^n`.
    pub fn range_on_grid(&self, k: usize) -> (f64, f64) {
        let k = k.max(1);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for_each_grid_point(self.arity, k, |x| {
            let v = self.eval(x);
            lo = lo.min(v);
            hi = hi.max(v);
        });
        (lo, hi)
    }
}

fn interpolate(grid: &[f64], t: f64) -> f64 {
    let k = grid.len() - 1;
    let pos = t.clamp(0.0, 1.0) * k as f64;
    let j = (pos.floor() as usize).min(k - 1);
    let frac = pos - j as f64;
    if frac == 0.0 {
        grid[j]
    } else {
        grid[j] + frac * (grid[j + 1] - grid[j])
    }
}

/// Visits every point of `{0, 1/k, ..., 1}^n` in mixed-radix order (first
/// coordinate fastest).
pub(crate) fn for_each_grid_point(n: usize, k: usize, mut f: impl FnMut(&[f64])) {
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    loop {
        f(&x);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            idx[d] += 1;
            if idx[d] <= k {
                x[d] = idx[d] as f64 / k as f64;
                break;
            }
            idx[d] = 0;
            x[d] = 0.0;
            d += 1;
        }
    }
}

#[derive(Clone)]
enum SetKind {
    Table(Vec<f64>),
    Measure(Vec<f64>),
    Distorted { psi: DistortionSpec, weights: Vec<Vec<f64>> },
    Custom(SetFn),
}

/// A real-valued function on the subsets of `{0, ..., m-1}`.
#[derive(Clone)]
pub struct SetFunction {
    size: usize,
    kind: SetKind,
}

impl fmt::Debug for SetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            SetKind::Table(_) => "table",
            SetKind::Measure(_) => "measure",
            SetKind::Distorted { .. } => "distorted",
            SetKind::Custom(_) => "custom",
        };
        write!(f, "SetFunction({kind}, m = {})", self.size)
    }
}

pub(crate) fn mask_members(mask: usize, m: usize) -> Vec<bool> {
    (0..m).map(|i| mask >> i & 1 == 1).collect()
}

pub(crate) fn mask_to_indices(mask: usize, m: usize) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}

impl SetFunction {
    /// Dense table indexed by bitmask (bit `i` set means outcome `i` is in).
    pub fn from_table(size: usize, values: Vec<f64>) -> Result<Self> {
        if size > TABLE_CAP {
            return Err(RiskError::CapExceeded {
                what: "set function table",
                size,
                cap: TABLE_CAP,
            });
        }
        if values.len() != 1 << size {
            return Err(RiskError::invalid(format!(
                "table for m = {size} needs {} values, got {}",
                1usize << size,
                values.len()
            )));
        }
        Ok(SetFunction {
            size,
            kind: SetKind::Table(values),
        })
    }

    /// An additive set function given by point masses.
    pub fn measure(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(RiskError::invalid("measure over an empty space"));
        }
        Ok(SetFunction {
            size: weights.len(),
            kind: SetKind::Measure(weights),
        })
    }

    pub fn custom(size: usize, f: impl Fn(&[bool]) -> f64 + Send + Sync + 'static) -> Self {
        SetFunction {
            size,
            kind: SetKind::Custom(Arc::new(f)),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `c(A)` for the membership vector `members` of length `m`.
    pub fn value(&self, members: &[bool]) -> f64 {
        debug_assert_eq!(members.len(), self.size);
        match &self.kind {
            SetKind::Table(t) => {
                let mask = members
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (i, &b)| acc | (usize::from(b) << i));
                t[mask]
            }
            SetKind::Measure(w) => members.iter().zip(w).filter(|(b, _)| **b).map(|(_, w)| w).sum(),
            SetKind::Distorted { psi, weights } => {
                let probs: Vec<f64> = weights
                    .iter()
                    .map(|q| members.iter().zip(q).filter(|(b, _)| **b).map(|(_, w)| w).sum())
                    .collect();
                psi.eval(&probs)
            }
            SetKind::Custom(f) => f(members),
        }
    }

    pub fn value_of_mask(&self, mask: usize) -> f64 {
        match &self.kind {
            SetKind::Table(t) => t[mask],
            _ => self.value(&mask_members(mask, self.size)),
        }
    }

    /// All `2^m` values indexed by bitmask.
    pub fn tabulate(&self) -> Result<Vec<f64>> {
        if self.size > TABLE_CAP {
            return Err(RiskError::CapExceeded {
                what: "set function table",
                size: self.size,
                cap: TABLE_CAP,
            });
        }
        if let SetKind::Table(t) = &self.kind {
            return Ok(t.clone());
        }
        use rayon::prelude::*;
        Ok((0..1usize << self.size)
            .into_par_iter()
            .map(|mask| self.value_of_mask(mask))
            .collect())
    }
}

/// The capacity `A -> psi(Q_1(A), ..., Q_n(A))`.
pub fn distorted_set_function(psi: &DistortionSpec, scenarios: &ScenarioSet) -> Result<SetFunction> {
    if psi.arity() != scenarios.len() {
        return Err(RiskError::invalid(format!(
            "distortion arity {} does not match {} scenarios",
            psi.arity(),
            scenarios.len()
        )));
    }
    Ok(SetFunction {
        size: scenarios.outcome_count(),
        kind: SetKind::Distorted {
            psi: psi.clone(),
            weights: scenarios.scenarios().iter().map(|s| s.weights.clone()).collect(),
        },
    })
}

/// Choquet integral of the loss vector `x` against a standard set function:
/// with distinct values `v_1 > ... > v_K`,
/// `v_K + sum_{k<K} (v_k - v_{k+1}) c({x >= v_k})`.
///
/// With `verify` the capacity is checked to be standard first (brute force,
/// so only for small spaces).
pub fn choquet_integral(x: &[f64], c: &SetFunction, verify: bool) -> Result<f64> {
    if x.len() != c.size() {
        return Err(RiskError::invalid(format!(
            "loss vector has {} outcomes, set function has {}",
            x.len(),
            c.size()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RiskError::invalid("loss vector has non-finite entries"));
    }
    if verify {
        let verdict = crate::axioms::check_standard(c)?;
        if !verdict.holds {
            return Err(RiskError::AxiomViolation(format!(
                "set function is not standard: {:?}",
                verdict.counterexample
            )));
        }
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut members = vec![false; x.len()];
    let mut acc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let v = x[order[i]];
        while i < order.len() && x[order[i]] == v {
            members[order[i]] = true;
            i += 1;
        }
        if i == order.len() {
            acc += v;
        } else {
            let next = x[order[i]];
            acc += (v - next) * c.value(&members);
        }
    }
    Ok(acc)
}
