//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use scenrisk::{EmpiricalDistribution, OutcomeTable, Scenario, ScenarioDistributions, ScenarioSet};

pub const LEVELS: [f64; 3] = [0.5, 0.9, 0.975];

/// Random finite law: integer-valued supports give ties and shared atoms.
pub fn random_law(rng: &mut ChaCha8Rng, max_support: usize) -> EmpiricalDistribution {
    let k = rng.gen_range(1..=max_support);
    let integer = rng.gen_bool(0.5);
    let values: Vec<f64> = (0..k)
        .map(|_| {
            if integer {
                rng.gen_range(-5..=5) as f64
            } else {
                rng.gen_range(-3.0..3.0)
            }
        })
        .collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
    EmpiricalDistribution::from_samples(&values, Some(&weights)).unwrap()
}

pub fn random_sd(rng: &mut ChaCha8Rng, n: usize, max_support: usize) -> ScenarioDistributions {
    ScenarioDistributions::from_laws((0..n).map(|_| random_law(rng, max_support)).collect()).unwrap()
}

/// Table of `m` outcomes with one continuous and one tied variable, and `n`
/// scenarios with random (overlapping) weights.
pub fn random_table(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (OutcomeTable, ScenarioSet) {
    let t = OutcomeTable::new(m)
        .unwrap()
        .with_variable("Z", (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .unwrap()
        .with_variable("K", (0..m).map(|_| rng.gen_range(0..4) as f64).collect())
        .unwrap();
    let scenarios = (0..n)
        .map(|i| {
            let raw: Vec<f64> = (0..m)
                .map(|_| if rng.gen_bool(0.7) { rng.gen_range(0.0..1.0) } else { 0.0 })
                .collect();
            let mut raw = raw;
            if raw.iter().all(|w| *w == 0.0) {
                raw[0] = 1.0;
            }
            let total: f64 = raw.iter().sum();
            Scenario {
                name: format!("Q{}", i + 1),
                weights: raw.iter().map(|w| w / total).collect(),
            }
        })
        .collect();
    (t, ScenarioSet::new(scenarios).unwrap())
}

/// ES of a weighted sample by summing the largest outcomes until the tail
/// mass `1 - p` is used up.
pub fn es_tail_sum(values: &[f64], weights: &[f64], p: f64) -> f64 {
    let total: f64 = weights.iter().sum();
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut left = 1.0 - p;
    let mut acc = 0.0;
    for i in idx {
        if left <= 0.0 {
            break;
        }
        let take = (weights[i] / total).min(left);
        acc += take * values[i];
        left -= take;
    }
    acc / (1.0 - p)
}

/// Left-continuous quantile by linear scan.
pub fn quantile_scan(d: &EmpiricalDistribution, u: f64) -> f64 {
    let mut c = 0.0;
    for (v, w) in d.values().iter().zip(d.weights()) {
        c += w;
        if c >= u - 1e-12 {
            return *v;
        }
    }
    *d.values().last().unwrap()
}

/// `1/(1-p) int_p^1 max_i q_i(u) du`, integrating a step function whose
/// breakpoints are gathered here independently of the library.
pub fn imes_oracle(laws: &[&EmpiricalDistribution], p: f64) -> f64 {
    let mut cuts = vec![p, 1.0];
    for d in laws {
        let mut c = 0.0;
        for w in d.weights() {
            c += w;
            if c > p && c < 1.0 {
                cuts.push(c);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut acc = 0.0;
    for win in cuts.windows(2) {
        let (a, b) = (win[0], win[1]);
        if b - a <= 1e-12 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let top = laws.iter().map(|d| quantile_scan(d, mid)).fold(f64::NEG_INFINITY, f64::max);
        acc += (b - a) * top;
    }
    acc / (1.0 - p)
}

/// Law of the maximum of independent copies by enumerating every tuple of
/// atoms; returns `(value, mass)` pairs.
pub fn max_law_enumerated(laws: &[&EmpiricalDistribution]) -> (Vec<f64>, Vec<f64>) {
    let mut vals = vec![f64::NEG_INFINITY];
    let mut mass = vec![1.0];
    for d in laws {
        let mut nv = Vec::new();
        let mut nm = Vec::new();
        for (v0, m0) in vals.iter().zip(&mass) {
            for (v, w) in d.values().iter().zip(d.weights()) {
                nv.push(v0.max(*v));
                nm.push(m0 * w);
            }
        }
        vals = nv;
        mass = nm;
    }
    (vals, mass)
}

/// Example B.2: `X` is 1 on a four-outcome block `Q1` and `{0, 0, 0, 2}` on
/// the block `Q2`, with `P` the uniform mixture.
pub fn split_table() -> (OutcomeTable, ScenarioSet) {
    let t = OutcomeTable::new(8)
        .unwrap()
        .with_variable("X", vec![1., 1., 1., 1., 0., 0., 0., 2.])
        .unwrap();
    let s = ScenarioSet::uniform_groups(
        8,
        &[("Q1".into(), (0..4).collect()), ("Q2".into(), (4..8).collect())],
    )
    .unwrap();
    (t, s)
}

pub fn fixture_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[derive(serde::Deserialize)]
pub struct DataSection {
    pub dir: String,
    pub factors: Vec<String>,
    pub units: Vec<f64>,
    pub date_column: String,
    pub value_column: String,
}

#[derive(serde::Deserialize)]
pub struct FixtureConfig {
    pub data: DataSection,
    pub basel: scenrisk::basel::BaselConfig,
}

/// The bundled synthetic price panel, its config and the frozen reference
/// values written by `scripts/basel_fixture.py oracle`.
pub fn basel_fixture() -> (scenrisk::basel::PortfolioPanel, scenrisk::basel::BaselConfig, serde_json::Value) {
    let root = fixture_path("basel");
    let cfg: FixtureConfig = scenrisk::config::load_config(&root.join("config.toml")).unwrap();
    let (panel, dropped) = scenrisk::basel::PortfolioPanel::from_csv_dir(
        &root.join(&cfg.data.dir),
        &cfg.data.factors,
        &cfg.data.units,
        &cfg.data.date_column,
        &cfg.data.value_column,
    )
    .unwrap();
    assert!(dropped.is_empty());
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("golden.json")).unwrap()).unwrap();
    (panel, cfg.basel, golden)
}

/// Parses a decimal string from the reference file.
pub fn golden_number(v: &serde_json::Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}
