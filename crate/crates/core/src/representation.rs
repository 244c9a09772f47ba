//! Evaluation of integral representations of scenario-based risk measures:
//! `rho_psi(X) = int max_i VaR_{u_i}^{Q_i}(X) d psibar(u)`, mixtures of
//! per-scenario ES and suprema of such mixtures.
//!
//! AES is reachable through [`es_mixture_eval`] only. Its `psibar` is not a
//! distribution function, so there is no [`PsiBarSpec`] for it.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::choquet::DistortionSpec;
use crate::error::{Result, RiskError};
use crate::measure::{check_level, EmpiricalDistribution, ScenarioSet, WEIGHT_TOL};
use crate::scenario::{check_simplex, ScenarioDistributions};

/// Monte Carlo samples per RNG stream.
pub const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMass {
    pub point: Vec<f64>,
    pub mass: f64,
}

/// Fills `u` with one draw from a user distribution on `(0, 1]^n`.
pub type SampleFn = Arc<dyn Fn(&mut ChaCha8Rng, &mut [f64]) + Send + Sync>;

/// Seeded samplers for [`PsiBarSpec::CustomSampler`].
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "sampler", rename_all = "snake_case")]
pub enum Sampler {
    /// Independent uniform margins.
    ProductUniform,
    /// `(U, ..., U)` with `U` uniform on `(p, 1]`.
    DiagonalUniform { p: f64 },
    /// Independent margins `U_i^(1 / a_i)`, a product of power laws.
    ProductPower { exponents: Vec<f64> },
    #[serde(skip)]
    Custom { label: String, draw: SampleFn },
}

impl fmt::Debug for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::ProductUniform => write!(f, "ProductUniform"),
            Sampler::DiagonalUniform { p } => write!(f, "DiagonalUniform {{ p: {p} }}"),
            Sampler::ProductPower { exponents } => write!(f, "ProductPower({exponents:?})"),
            Sampler::Custom { label, .. } => write!(f, "Custom({label})"),
        }
    }
}

impl Sampler {
    pub fn custom(
        label: impl Into<String>,
        draw: impl Fn(&mut ChaCha8Rng, &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Sampler::Custom {
            label: label.into(),
            draw: Arc::new(draw),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            Sampler::DiagonalUniform { p } => check_level(*p, false, "diagonal level"),
            Sampler::ProductPower { exponents } => {
                if exponents.len() != n {
                    return Err(RiskError::invalid(format!(
                        "{} exponents for {n} scenarios",
                        exponents.len()
                    )));
                }
                if exponents.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
                    return Err(RiskError::invalid("exponents must be finite and positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    // Uniform draws are taken as 1 - [0, 1) so they land in (0, 1].
    fn draw(&self, rng: &mut ChaCha8Rng, u: &mut [f64]) {
        match self {
            Sampler::ProductUniform => u.iter_mut().for_each(|x| *x = 1.0 - rng.gen::<f64>()),
            Sampler::DiagonalUniform { p } => {
                let v = 1.0 - rng.gen::<f64>() * (1.0 - p);
                u.iter_mut().for_each(|x| *x = v);
            }
            Sampler::ProductPower { exponents } => {
                for (x, a) in u.iter_mut().zip(exponents) {
                    *x = (1.0 - rng.gen::<f64>()).powf(1.0 / a);
                }
            }
            Sampler::Custom { draw, .. } => draw(rng, u),
        }
    }
}

/// The distribution function `psibar` on `[0, 1]^n` in a representation,
/// related to the distortion by `psibar(u) = 1 - psi(1 - u)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PsiBarSpec {
    PointMasses { atoms: Vec<PointMass> },
    /// Uniform on the diagonal segment from `(p, ..., p)` to `(1, ..., 1)`.
    DiagonalUniform { p: f64 },
    /// Independent uniform margins.
    ProductUniform,
    CustomSampler {
        #[serde(flatten)]
        sampler: Sampler,
    },
}

impl PsiBarSpec {
    pub fn point_mass(point: Vec<f64>) -> Self {
        PsiBarSpec::PointMasses {
            atoms: vec![PointMass { point, mass: 1.0 }],
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            PsiBarSpec::PointMasses { atoms } => {
                if atoms.is_empty() {
                    return Err(RiskError::invalid("point_masses needs at least one atom"));
                }
                let mut total = 0.0;
                for a in atoms {
                    if a.point.len() != n {
                        return Err(RiskError::invalid(format!(
                            "point of dimension {} for {n} scenarios",
                            a.point.len()
                        )));
                    }
                    if a.point.iter().any(|u| !(0.0..=1.0).contains(u)) {
                        return Err(RiskError::invalid("points must lie in [0, 1]^n"));
                    }
                    if a.point.iter().all(|u| *u == 0.0) {
                        return Err(RiskError::invalid("an atom at the origin carries no quantile"));
                    }
                    if !(a.mass > 0.0) || !a.mass.is_finite() {
                        return Err(RiskError::invalid("point masses must be positive"));
                    }
                    total += a.mass;
                }
                if (total - 1.0).abs() > WEIGHT_TOL {
                    return Err(RiskError::invalid(format!("masses sum to {total}, expected 1")));
                }
                Ok(())
            }
            PsiBarSpec::DiagonalUniform { p } => check_level(*p, false, "diagonal level"),
            PsiBarSpec::ProductUniform => Ok(()),
            PsiBarSpec::CustomSampler { sampler } => sampler.validate(n),
        }
    }

    /// The distortion `psi(x) = 1 - psibar(1 - x)` of a point-mass spec:
    /// `sum_j mass_j 1{x_i > 1 - a_ji for some i with a_ji > 0}`.
    pub fn induced_distortion(&self, arity: usize) -> Result<DistortionSpec> {
        let atoms = match self {
            PsiBarSpec::PointMasses { atoms } => atoms.clone(),
            _ => {
                return Err(RiskError::invalid(
                    "induced distortion is only built for point_masses",
                ))
            }
        };
        self.validate(arity)?;
        DistortionSpec::custom(arity, "point_masses", move |x| {
            atoms
                .iter()
                .filter(|a| {
                    a.point
                        .iter()
                        .zip(x)
                        .any(|(&u, &xi)| u > 0.0 && xi > 1.0 - u)
                })
                .map(|a| a.mass)
                .sum()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub value: f64,
    /// Zero for exact methods.
    pub std_error: f64,
    pub method: Method,
    pub samples: usize,
}

impl RhoEstimate {
    fn exact(value: f64) -> Self {
        RhoEstimate {
            value,
            std_error: 0.0,
            method: Method::Exact,
            samples: 0,
        }
    }
}

/// `max_i VaR_{u_i}^{Q_i}`; a zero coordinate drops that scenario.
fn max_quantile_at(laws: &[&EmpiricalDistribution], u: &[f64]) -> f64 {
    laws.iter()
        .zip(u)
        .filter(|(_, &ui)| ui > 0.0)
        .map(|(d, &ui)| d.quantile_unchecked(ui))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `E[max_i X_i]` for independent `X_i ~ F_i`, by the tail formula
/// `x_0 + sum_k (x_{k+1} - x_k) (1 - prod_i F_i(x_k))` over the merged support.
fn product_uniform_exact(laws: &[&EmpiricalDistribution]) -> f64 {
    let mut support: Vec<f64> = laws.iter().flat_map(|d| d.values().iter().copied()).collect();
    support.sort_by(f64::total_cmp);
    support.dedup();
    let mut acc = support[0];
    for w in support.windows(2) {
        let f: f64 = laws.iter().map(|d| d.cdf(w[0])).product();
        acc += (w[1] - w[0]) * (1.0 - f);
    }
    acc
}

/// Evaluates the representation `int max_i VaR_{u_i}^{Q_i} d psibar(u)`.
///
/// Point masses, the diagonal and the product of uniforms are exact. A
/// custom sampler needs `mc_samples` and returns a Monte Carlo mean with its
/// standard error; samples are drawn in chunks of [`MC_CHUNK`], chunk `c`
/// from its own ChaCha8 stream, so the result does not depend on the
/// number of worker threads.
pub fn rho_psi(
    sd: &ScenarioDistributions,
    psibar: &PsiBarSpec,
    mc_samples: Option<usize>,
    seed: u64,
) -> Result<RhoEstimate> {
    let n = sd.len();
    psibar.validate(n)?;
    let laws = sd.laws();
    match psibar {
        PsiBarSpec::PointMasses { atoms } => Ok(RhoEstimate::exact(
            atoms
                .iter()
                .map(|a| a.mass * max_quantile_at(&laws, &a.point))
                .sum(),
        )),
        PsiBarSpec::DiagonalUniform { p } => {
            Ok(RhoEstimate::exact(sd.imes_via_max_quantile(*p)?))
        }
        PsiBarSpec::ProductUniform => Ok(RhoEstimate::exact(product_uniform_exact(&laws))),
        PsiBarSpec::CustomSampler { sampler } => {
            let samples = mc_samples
                .ok_or_else(|| RiskError::invalid("custom_sampler needs mc_samples"))?;
            if samples < 2 {
                return Err(RiskError::invalid("mc_samples must be at least 2"));
            }
            Ok(monte_carlo(&laws, sampler, samples, seed))
        }
    }
}

fn monte_carlo(
    laws: &[&EmpiricalDistribution],
    sampler: &Sampler,
    samples: usize,
    seed: u64,
) -> RhoEstimate {
    let chunks = samples.div_ceil(MC_CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut u = vec![0.0; laws.len()];
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                sampler.draw(&mut rng, &mut u);
                let v = max_quantile_at(laws, &u);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let nf = samples as f64;
    let mean = s / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    RhoEstimate {
        value: mean,
        std_error: (var / nf).sqrt(),
        method: Method::MonteCarlo,
        samples,
    }
}

/// Mixing laws `h` of an [`EsMixture`], as `(p, mass)` atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MixingLaws {
    /// One law used for every scenario.
    Shared(Vec<(f64, f64)>),
    PerScenario(Vec<Vec<(f64, f64)>>),
}

/// `sum_i w_i int ES_p^{Q_i} dh_i(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsMixture {
    pub w: Vec<f64>,
    pub h: MixingLaws,
}

impl EsMixture {
    /// Every scenario uses the point mass at `p`.
    pub fn point(w: Vec<f64>, p: f64) -> Self {
        EsMixture {
            w,
            h: MixingLaws::Shared(vec![(p, 1.0)]),
        }
    }

    fn law(&self, i: usize) -> &[(f64, f64)] {
        match &self.h {
            MixingLaws::Shared(h) => h,
            MixingLaws::PerScenario(hs) => &hs[i],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_simplex(&self.w, n)?;
        let laws: Vec<&[(f64, f64)]> = match &self.h {
            MixingLaws::Shared(h) => vec![h],
            MixingLaws::PerScenario(hs) => {
                if hs.len() != n {
                    return Err(RiskError::invalid(format!(
                        "{} mixing laws for {n} scenarios",
                        hs.len()
                    )));
                }
                hs.iter().map(|h| h.as_slice()).collect()
            }
        };
        for h in laws {
            if h.is_empty() {
                return Err(RiskError::invalid("mixing law has no atoms"));
            }
            let mut total = 0.0;
            for &(p, mass) in h {
                if p == 0.0 {
                    return Err(RiskError::invalid("mixing atom at p = 0: ES is undefined there"));
                }
                check_level(p, true, "mixing atom")?;
                if !(mass >= 0.0) || !mass.is_finite() {
                    return Err(RiskError::invalid("mixing masses must be non-negative"));
                }
                total += mass;
            }
            if (total - 1.0).abs() > WEIGHT_TOL {
                return Err(RiskError::invalid(format!(
                    "mixing law masses sum to {total}, expected 1"
                )));
            }
        }
        Ok(())
    }
}

/// Exact value of an ES mixture; an atom at `p = 1` contributes the maximum.
pub fn es_mixture_eval(sd: &ScenarioDistributions, mix: &EsMixture) -> Result<f64> {
    mix.validate(sd.len())?;
    let mut acc = 0.0;
    for (i, (d, &wi)) in sd.laws().into_iter().zip(&mix.w).enumerate() {
        if wi == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for &(p, mass) in mix.law(i) {
            inner += mass * d.es(p)?;
        }
        acc += wi * inner;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupResult {
    pub value: f64,
    /// Index of the first mixture attaining the maximum.
    pub argmax: usize,
}

/// Maximum of [`es_mixture_eval`] over `mixes`; ties go to the lowest index.
pub fn sup_mixture_eval(sd: &ScenarioDistributions, mixes: &[EsMixture]) -> Result<SupResult> {
    if mixes.is_empty() {
        return Err(RiskError::invalid("sup over an empty list of mixtures"));
    }
    let values = mixes
        .par_iter()
        .map(|m| es_mixture_eval(sd, m))
        .collect::<Result<Vec<_>>>()?;
    let mut best = SupResult {
        value: values[0],
        argmax: 0,
    };
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.value {
            best = SupResult { value: v, argmax: i };
        }
    }
    Ok(best)
}

/// What to do when a representation check meets scenarios that are not
/// mutually singular.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityPolicy {
    #[default]
    Warn,
    Fail,
    Ignore,
}

/// `Ok(Some(warning))` under [`SingularityPolicy::Warn`] when the scenarios
/// overlap, an error under `Fail`.
pub fn singularity_gate(set: &ScenarioSet, policy: SingularityPolicy) -> Result<Option<String>> {
    if set.mutually_singular() || policy == SingularityPolicy::Ignore {
        return Ok(None);
    }
    let msg = "scenarios are not mutually singular; representation results assume disjoint supports";
    match policy {
        SingularityPolicy::Fail => Err(RiskError::invalid(msg)),
        _ => Ok(Some(msg.to_string())),
    }
}
