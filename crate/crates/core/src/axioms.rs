//! Brute-force verification of capacity and distortion axioms, plus seeded
//! probes for comonotonic additivity and coherence of arbitrary risk measures.
//!
//! Set-function checks are exhaustive over the subset lattice and therefore
//! capped ([`STANDARD_CAP`], [`SUBMODULAR_CAP`]). Distortion checks run on the
//! grid `{0, 1/k, ..., 1}^n`; their verdicts are grid-certified only.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::choquet::{mask_to_indices, DistortionSpec, PsiFamily, SetFunction};
use crate::error::{Result, RiskError};
use crate::measure::{OutcomeTable, Scenario, ScenarioSet};

pub const STANDARD_CAP: usize = 12;
pub const SUBMODULAR_CAP: usize = 10;
/// Slack for floating-point noise in axiom inequalities.
pub const CHECK_TOL: f64 = 1e-12;
/// Gap above which a probe reports a violation.
pub const PROBE_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_K: usize = 20;
/// Budget on quadruples enumerated by the two-point criterion.
const TWO_POINT_BUDGET: f64 = 5e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness_sets: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness_points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl Verdict {
    pub fn pass() -> Self {
        Verdict {
            holds: true,
            counterexample: None,
        }
    }

    pub fn fail(c: Counterexample) -> Self {
        Verdict {
            holds: false,
            counterexample: Some(c),
        }
    }

    fn from_option(c: Option<Counterexample>) -> Self {
        c.map_or_else(Verdict::pass, Verdict::fail)
    }
}

fn sets_counterexample(kind: &str, m: usize, masks: &[usize], values: Vec<f64>) -> Counterexample {
    Counterexample {
        kind: kind.to_string(),
        witness_sets: masks.iter().map(|&s| mask_to_indices(s, m)).collect(),
        witness_points: Vec::new(),
        values,
    }
}

fn cap(what: &'static str, size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(RiskError::CapExceeded { what, size, cap })
    } else {
        Ok(())
    }
}

/// `c(empty) = 0`, `c(Omega) = 1` and monotone. Monotonicity is checked on
/// every single-element deletion `B \ {i} -> B`, which covers all inclusions.
/// The first monotonicity violation is reported before endpoint failures.
pub fn check_standard(c: &SetFunction) -> Result<Verdict> {
    let m = c.size();
    cap("space size for check_standard", m, STANDARD_CAP)?;
    let t = c.tabulate()?;
    let full = (1usize << m) - 1;
    let mono = (1..=full).into_par_iter().find_map_first(|b| {
        (0..m).filter(|i| b >> i & 1 == 1).find_map(|i| {
            let a = b ^ (1 << i);
            (t[a] > t[b] + CHECK_TOL)
                .then(|| sets_counterexample("monotonicity", m, &[a, b], vec![t[a], t[b]]))
        })
    });
    if let Some(cx) = mono {
        return Ok(Verdict::fail(cx));
    }
    if t[0].abs() > CHECK_TOL {
        return Ok(Verdict::fail(sets_counterexample("empty_set", m, &[0], vec![t[0]])));
    }
    if (t[full] - 1.0).abs() > CHECK_TOL {
        return Ok(Verdict::fail(sets_counterexample("full_set", m, &[full], vec![t[full]])));
    }
    Ok(Verdict::pass())
}

/// Exhaustive `c(A u B) + c(A n B) <= c(A) + c(B)` over all incomparable pairs.
pub fn check_submodular(c: &SetFunction) -> Result<Verdict> {
    let m = c.size();
    cap("space size for check_submodular", m, SUBMODULAR_CAP)?;
    let t = c.tabulate()?;
    let n = 1usize << m;
    let found = (0..n).into_par_iter().find_map_first(|a| {
        (a + 1..n).find_map(|b| {
            let meet = a & b;
            if meet == a || meet == b {
                return None;
            }
            let join = a | b;
            let lhs = t[join] + t[meet];
            let rhs = t[a] + t[b];
            (lhs > rhs + CHECK_TOL).then(|| {
                sets_counterexample(
                    "submodularity",
                    m,
                    &[a, b],
                    vec![t[join], t[meet], t[a], t[b]],
                )
            })
        })
    });
    Ok(Verdict::from_option(found))
}

/// Grid verdicts for the componentwise properties of a distortion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentwiseReport {
    pub grid_k: usize,
    pub two_point_grid_k: usize,
    pub certification: &'static str,
    pub increasing: Verdict,
    pub concave: Verdict,
    pub submodular: Verdict,
    pub two_point: Verdict,
}

struct Grid {
    n: usize,
    k: usize,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl Grid {
    fn new(psi: &DistortionSpec, k: usize) -> Self {
        let n = psi.arity();
        let mut strides = Vec::with_capacity(n);
        let mut s = 1;
        for _ in 0..n {
            strides.push(s);
            s *= k + 1;
        }
        let values = (0..s)
            .into_par_iter()
            .map(|idx| psi.eval(&Self::point_of(idx, n, k)))
            .collect();
        Grid {
            n,
            k,
            strides,
            values,
        }
    }

    fn coords(idx: usize, n: usize, k: usize) -> Vec<usize> {
        let mut rest = idx;
        (0..n)
            .map(|_| {
                let c = rest % (k + 1);
                rest /= k + 1;
                c
            })
            .collect()
    }

    fn point_of(idx: usize, n: usize, k: usize) -> Vec<f64> {
        Self::coords(idx, n, k)
            .into_iter()
            .map(|c| c as f64 / k as f64)
            .collect()
    }

    fn point(&self, idx: usize) -> Vec<f64> {
        Self::point_of(idx, self.n, self.k)
    }

    fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    fn points_counterexample(&self, kind: &str, idxs: &[usize]) -> Counterexample {
        Counterexample {
            kind: kind.to_string(),
            witness_sets: Vec::new(),
            witness_points: idxs.iter().map(|&i| self.point(i)).collect(),
            values: idxs.iter().map(|&i| self.values[i]).collect(),
        }
    }
}

fn two_point_resolution(n: usize, k: usize) -> usize {
    let per_dim = |k: usize| ((k + 1) * (k + 2) * (k + 3) / 6) as f64;
    let mut kk = k;
    while kk > 1 && per_dim(kk).powi(n as i32) > TWO_POINT_BUDGET {
        kk -= 1;
    }
    kk
}

/// Componentwise increasing / concave, submodular and the two-point
/// criterion (`f(x) + f(y) >= f(w) + f(z)` for `w <= x, y <= z`,
/// `w + z = x + y`) on the grid `{0, 1/k, ..., 1}^n`. The two-point check
/// enumerates quadruples, so it runs on a coarser grid in high dimension.
pub fn check_componentwise(psi: &DistortionSpec, grid_k: usize) -> Result<ComponentwiseReport> {
    if grid_k < 2 {
        return Err(RiskError::invalid("grid resolution must be at least 2"));
    }
    let g = Grid::new(psi, grid_k);
    let n = g.n;
    let k = g.k;
    let total = g.values.len();
    let v = &g.values;

    let increasing = (0..total).into_par_iter().find_map_first(|idx| {
        let c = Grid::coords(idx, n, k);
        (0..n).find_map(|d| {
            if c[d] == k {
                return None;
            }
            let up = idx + g.strides[d];
            (v[up] < v[idx] - CHECK_TOL)
                .then(|| g.points_counterexample("componentwise_increasing", &[idx, up]))
        })
    });

    let concave = (0..total).into_par_iter().find_map_first(|idx| {
        let c = Grid::coords(idx, n, k);
        (0..n).find_map(|d| {
            if c[d] == 0 || c[d] == k {
                return None;
            }
            let s = g.strides[d];
            (v[idx - s] + v[idx + s] > 2.0 * v[idx] + CHECK_TOL).then(|| {
                g.points_counterexample("componentwise_concave", &[idx - s, idx, idx + s])
            })
        })
    });

    let submodular = (0..total).into_par_iter().find_map_first(|idx| {
        let c = Grid::coords(idx, n, k);
        for d in 0..n {
            for e in d + 1..n {
                if c[d] == k || c[e] == k {
                    continue;
                }
                let (sd, se) = (g.strides[d], g.strides[e]);
                if v[idx + sd + se] + v[idx] > v[idx + sd] + v[idx + se] + CHECK_TOL {
                    return Some(g.points_counterexample(
                        "submodular",
                        &[idx + sd, idx + se, idx + sd + se, idx],
                    ));
                }
            }
        }
        None
    });

    let k2 = two_point_resolution(n, grid_k);
    let g2 = if k2 == grid_k { None } else { Some(Grid::new(psi, k2)) };
    let g2 = g2.as_ref().unwrap_or(&g);
    let two_point = two_point_check(g2);

    Ok(ComponentwiseReport {
        grid_k,
        two_point_grid_k: k2,
        certification: "grid-certified",
        increasing: Verdict::from_option(increasing),
        concave: Verdict::from_option(concave),
        submodular: Verdict::from_option(submodular),
        two_point: Verdict::from_option(two_point),
    })
}

fn two_point_check(g: &Grid) -> Option<Counterexample> {
    let n = g.n;
    let k = g.k;
    let total = g.values.len();
    (0..total).into_par_iter().find_map_first(|wi| {
        let w = Grid::coords(wi, n, k);
        // z ranges over the box [w, k]^n, x over [w, z]; y = w + z - x
        let mut z = w.clone();
        loop {
            let zi = g.index(&z);
            let target = g.values[wi] + g.values[zi];
            let mut x = w.clone();
            loop {
                let y: Vec<usize> = (0..n).map(|d| w[d] + z[d] - x[d]).collect();
                let xi = g.index(&x);
                let yi = g.index(&y);
                if g.values[xi] + g.values[yi] < target - CHECK_TOL {
                    return Some(g.points_counterexample("two_point", &[wi, xi, yi, zi]));
                }
                if !advance_box(&mut x, &w, &z) {
                    break;
                }
            }
            let top = vec![k; n];
            if !advance_box(&mut z, &w, &top) {
                break;
            }
        }
        None
    })
}

fn advance_box(x: &mut [usize], lo: &[usize], hi: &[usize]) -> bool {
    for d in 0..x.len() {
        if x[d] < hi[d] {
            x[d] += 1;
            return true;
        }
        x[d] = lo[d];
    }
    false
}

/// Two variables are comonotonic iff no pair of outcomes orders them oppositely.
pub fn is_comonotonic(x: &[f64], y: &[f64]) -> bool {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));
    idx.windows(2).all(|w| y[w[0]] <= y[w[1]])
}

fn random_step(rng: &mut ChaCha8Rng, support: &[f64]) -> impl Fn(f64) -> f64 {
    let steps = rng.gen_range(1..=4);
    let mut cuts: Vec<(f64, f64)> = (0..steps)
        .map(|_| (*support.choose(rng).unwrap(), rng.gen_range(0.05..2.0)))
        .collect();
    cuts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let slope = if rng.gen_bool(0.5) { rng.gen_range(0.0..1.5) } else { 0.0 };
    let shift = rng.gen_range(-1.0..1.0);
    move |z: f64| {
        shift + slope * z + cuts.iter().filter(|(t, _)| z >= *t).map(|(_, h)| h).sum::<f64>()
    }
}

fn additivity_gap(
    measure: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    y: &[f64],
) -> Option<Counterexample> {
    let sum: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    let (rs, rx, ry) = (measure(&sum), measure(x), measure(y));
    ((rs - rx - ry).abs() > PROBE_TOL).then(|| Counterexample {
        kind: "comonotonic_additivity".into(),
        witness_sets: Vec::new(),
        witness_points: vec![x.to_vec(), y.to_vec()],
        values: vec![rs, rx, ry],
    })
}

/// Probes `rho(X + Y) = rho(X) + rho(Y)` on comonotonic pairs: first on every
/// comonotonic pair of table variables, then on `trials` seeded pairs
/// `(f(Z), g(Z))` with `Z` a table variable and `f, g` random increasing step
/// functions (`g` is the identity on half of the trials). The verdict is
/// probabilistic when it passes.
pub fn comonotonic_additivity_probe(
    measure: &dyn Fn(&[f64]) -> f64,
    table: &OutcomeTable,
    trials: usize,
    seed: u64,
) -> Result<Verdict> {
    let vars = table.variables();
    if vars.is_empty() {
        return Err(RiskError::invalid("outcome table has no variables to probe"));
    }
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i + 1..] {
            if is_comonotonic(&a.values, &b.values) {
                if let Some(cx) = additivity_gap(measure, &a.values, &b.values) {
                    return Ok(Verdict::fail(cx));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let z = &vars[rng.gen_range(0..vars.len())].values;
        let f = random_step(&mut rng, z);
        let x: Vec<f64> = z.iter().map(|&v| f(v)).collect();
        let y: Vec<f64> = if rng.gen_bool(0.5) {
            z.clone()
        } else {
            let g = random_step(&mut rng, z);
            z.iter().map(|&v| g(v)).collect()
        };
        if let Some(cx) = additivity_gap(measure, &x, &y) {
            return Ok(Verdict::fail(cx));
        }
    }
    Ok(Verdict::pass())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceReport {
    pub subadditive: Verdict,
    pub monotone: Verdict,
    pub cash_invariant: Verdict,
    pub positively_homogeneous: Verdict,
}

impl CoherenceReport {
    pub fn coherent(&self) -> bool {
        self.subadditive.holds
            && self.monotone.holds
            && self.cash_invariant.holds
            && self.positively_homogeneous.holds
    }
}

/// Random loss vector drawn from a mix of shapes: continuous, small-integer
/// (many ties), sparse jumps and heavy tails.
pub fn random_losses(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    match rng.gen_range(0..4) {
        0 => (0..m).map(|_| rng.gen_range(-3.0..3.0)).collect(),
        1 => (0..m).map(|_| rng.gen_range(-2..=3) as f64).collect(),
        2 => {
            let rate = rng.gen_range(0.02..0.3);
            (0..m)
                .map(|_| if rng.gen_bool(rate) { rng.gen_range(1.0..5.0) } else { 0.0 })
                .collect()
        }
        _ => (0..m)
            .map(|_| {
                let u: f64 = rng.gen_range(1e-6..1.0);
                -u.ln() * rng.gen_range(0.5..2.0)
            })
            .collect(),
    }
}

fn point_cx(kind: &str, points: Vec<Vec<f64>>, values: Vec<f64>) -> Counterexample {
    Counterexample {
        kind: kind.into(),
        witness_sets: Vec::new(),
        witness_points: points,
        values,
    }
}

/// Seeded probes of the four coherence axioms on random loss vectors over
/// `outcome_count` outcomes.
pub fn coherence_probe(
    measure: &dyn Fn(&[f64]) -> f64,
    outcome_count: usize,
    trials: usize,
    seed: u64,
) -> CoherenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sub = None;
    let mut mono = None;
    let mut cash = None;
    let mut homo = None;
    let tol = |scale: f64| PROBE_TOL * scale.abs().max(1.0);
    for _ in 0..trials {
        let x = random_losses(&mut rng, outcome_count);
        let y = random_losses(&mut rng, outcome_count);
        let rx = measure(&x);
        let ry = measure(&y);

        if sub.is_none() {
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let rs = measure(&s);
            if rs > rx + ry + tol(rx.abs() + ry.abs()) {
                sub = Some(point_cx("subadditivity", vec![x.clone(), y.clone()], vec![rs, rx, ry]));
            }
        }
        if mono.is_none() {
            let bigger: Vec<f64> = x
                .iter()
                .map(|a| if rng.gen_bool(0.5) { a + rng.gen_range(0.0..2.0) } else { *a })
                .collect();
            let rb = measure(&bigger);
            if rx > rb + tol(rx) {
                mono = Some(point_cx("monotonicity", vec![x.clone(), bigger], vec![rx, rb]));
            }
        }
        if cash.is_none() {
            let c = rng.gen_range(-5.0..5.0);
            let shifted: Vec<f64> = x.iter().map(|a| a + c).collect();
            let rc = measure(&shifted);
            if (rc - rx - c).abs() > tol(rx.abs() + c.abs()) {
                cash = Some(point_cx("cash_invariance", vec![x.clone(), vec![c]], vec![rc, rx]));
            }
        }
        if homo.is_none() {
            let lambda = rng.gen_range(0.1..5.0);
            let scaled: Vec<f64> = x.iter().map(|a| a * lambda).collect();
            let rl = measure(&scaled);
            if (rl - lambda * rx).abs() > tol(lambda * rx) {
                homo = Some(point_cx(
                    "positive_homogeneity",
                    vec![x.clone(), vec![lambda]],
                    vec![rl, rx],
                ));
            }
        }
    }
    CoherenceReport {
        subadditive: Verdict::from_option(sub),
        monotone: Verdict::from_option(mono),
        cash_invariant: Verdict::from_option(cash),
        positively_homogeneous: Verdict::from_option(homo),
    }
}

/// Two scenarios on `[0, 1]` with densities `2/3 (1 + 1{t >= 1/2})` and
/// `2/3 (1 + 1{t < 1/2})`, atomized into `2 * cells_per_half` equal cells.
/// Their density ratio stays within `[1/2, 2]`.
pub fn atomized_reversed_densities(cells_per_half: usize) -> Result<ScenarioSet> {
    if cells_per_half == 0 {
        return Err(RiskError::invalid("need at least one cell per half"));
    }
    let j = cells_per_half as f64;
    let low = 1.0 / (3.0 * j);
    let high = 2.0 / (3.0 * j);
    let q1: Vec<f64> = (0..2 * cells_per_half)
        .map(|c| if c < cells_per_half { low } else { high })
        .collect();
    let q2: Vec<f64> = q1.iter().rev().copied().collect();
    ScenarioSet::new(vec![
        Scenario { name: "Q1".into(), weights: q1 },
        Scenario { name: "Q2".into(), weights: q2 },
    ])
}

/// `psi(s, t) = 2s - t`: not componentwise increasing, yet increasing along
/// the range of [`atomized_reversed_densities`].
pub fn psi_two_s_minus_t() -> DistortionSpec {
    DistortionSpec::from_family(
        2,
        PsiFamily::Linear {
            coefficients: vec![2.0, -1.0],
        },
    )
    .expect("2s - t satisfies the endpoint conditions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choquet::distorted_set_function;

    #[test]
    fn probability_measure_is_standard_and_modular() {
        let c = SetFunction::measure(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(check_standard(&c).unwrap().holds);
        assert!(check_submodular(&c).unwrap().holds);
    }

    #[test]
    fn negative_cardinality_fails_first_on_empty_vs_singleton() {
        let c = SetFunction::custom(3, |m| -(m.iter().filter(|b| **b).count() as f64));
        let v = check_standard(&c).unwrap();
        assert!(!v.holds);
        let cx = v.counterexample.unwrap();
        assert_eq!(cx.kind, "monotonicity");
        assert_eq!(cx.witness_sets, vec![vec![], vec![0]]);
    }

    #[test]
    fn caps_are_enforced() {
        let c = SetFunction::measure(vec![1.0 / 13.0; 13]).unwrap();
        assert!(matches!(check_standard(&c), Err(RiskError::CapExceeded { .. })));
        let c = SetFunction::measure(vec![1.0 / 11.0; 11]).unwrap();
        assert!(matches!(check_submodular(&c), Err(RiskError::CapExceeded { .. })));
    }

    #[test]
    fn reversed_densities_make_2s_minus_t_standard() {
        let s = atomized_reversed_densities(2).unwrap();
        assert_eq!(s.scenarios()[0].weights, vec![1. / 6., 1. / 6., 1. / 3., 1. / 3.]);
        let psi = psi_two_s_minus_t();
        let c = distorted_set_function(&psi, &s).unwrap();
        assert!(check_standard(&c).unwrap().holds);
        let r = check_componentwise(&psi, DEFAULT_GRID_K).unwrap();
        assert!(!r.increasing.holds);
    }

    #[test]
    fn var_distortion_capacity_is_not_submodular() {
        // g(t) = 1{t > 1 - p} under a uniform law on 6 atoms
        let p = 0.6;
        let s = ScenarioSet::uniform_groups(6, &[("Q".into(), (0..6).collect())]).unwrap();
        let g = DistortionSpec::mvar_type(1, p).unwrap();
        let c = distorted_set_function(&g, &s).unwrap();
        let v = check_submodular(&c).unwrap();
        assert!(!v.holds);
        assert_eq!(v.counterexample.unwrap().witness_sets.len(), 2);
    }

    #[test]
    fn componentwise_verdicts_for_named_families() {
        let aes = check_componentwise(&DistortionSpec::aes_type(2, 0.7, None).unwrap(), 20).unwrap();
        assert!(aes.increasing.holds && aes.concave.holds && aes.submodular.holds);
        assert!(aes.two_point.holds);
        let imes = check_componentwise(&DistortionSpec::imes_type(2, 0.5).unwrap(), 20).unwrap();
        assert!(imes.increasing.holds);
        assert!(!imes.concave.holds);
        assert!(imes.concave.counterexample.is_some());
        assert!(!imes.two_point.holds);
        let minvar = check_componentwise(&DistortionSpec::minvar_type(3).unwrap(), 10).unwrap();
        assert!(minvar.concave.holds && minvar.submodular.holds && minvar.two_point.holds);
        assert!(minvar.two_point_grid_k < 10);
    }

    #[test]
    fn comonotonicity_detection() {
        assert!(is_comonotonic(&[1.0, 2.0, 2.0, 3.0], &[0.0, 1.0, 5.0, 5.0]));
        assert!(!is_comonotonic(&[1.0, 2.0], &[1.0, 0.0]));
        assert!(is_comonotonic(&[1.0, 1.0], &[1.0, 0.0]));
    }

    #[test]
    fn linear_expectation_passes_probes() {
        let w = vec![0.2, 0.3, 0.1, 0.4];
        let w2 = w.clone();
        let e = move |x: &[f64]| x.iter().zip(&w2).map(|(a, b)| a * b).sum::<f64>();
        let t = OutcomeTable::new(4)
            .unwrap()
            .with_variable("Z", vec![0.5, -1.0, 2.0, 0.0])
            .unwrap();
        assert!(comonotonic_additivity_probe(&e, &t, 200, 7).unwrap().holds);
        assert!(coherence_probe(&e, 4, 200, 7).coherent());
    }
}
