//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines print in order; exits non-zero on failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use scenrisk::axioms::{
    atomized_reversed_densities, check_componentwise, check_standard, check_submodular,
    coherence_probe, comonotonic_additivity_probe, psi_two_s_minus_t,
};
use scenrisk::basel::{imcc, rolling_series, stressed_es, theta};
use scenrisk::choquet::{choquet_integral, distorted_set_function, DistortionSpec};
use scenrisk::format::fmt_sig;
use scenrisk::market::{
    economic_scenarios, load_csv, log_linear_detrend, negative_returns, write_csv, DatedSeries,
    PriceSeries,
};
use scenrisk::measure::scenario_distribution;
use scenrisk::representation::{
    es_mixture_eval, rho_psi, EsMixture, MixingLaws, PsiBarSpec, Sampler,
};
use scenrisk::scenario::conditional_dominance_check;
use scenrisk::{EmpiricalDistribution, OutcomeTable, ScenarioDistributions, ScenarioSet};

const EXACT_TOL: f64 = 1e-12;
const CHAIN_SLACK: f64 = 1e-9;
const STRICT_GAP: f64 = 1e-6;
const HOMOGENEITY_TOL: f64 = 1e-9;
const DETREND_TOL: f64 = 1e-8;
const EXPONENTIAL_TOL: f64 = 1e-10;
const MC_SAMPLES: usize = 100_000;
const MC_SE_MULTIPLE: f64 = 4.0;
const MC_PASS_SHARE: f64 = 0.95;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_ms: u128) -> bool {
    elapsed.as_millis() < limit_ms
}

fn c1_mes_below_es() -> Outcome {
    let (t, s) = split_table();
    let x = t.variable("X").unwrap();
    let base = vec![1.0 / 8.0; 8];
    let sd = ScenarioDistributions::from_table(&t, &s, "X").unwrap();
    let law = EmpiricalDistribution::from_samples(x, Some(&base)).unwrap();
    let start = Instant::now();
    let es = law.es(0.5).unwrap();
    let mes = sd.mes(0.5).unwrap();
    let elapsed = start.elapsed();
    let pass = (es - 1.25).abs() <= EXACT_TOL
        && (mes - 1.0).abs() <= EXACT_TOL
        && mes < es
        && elapsed < Duration::from_millis(1);
    outcome(pass, format!("ES_P = {es}, MES = {mes}, {:?}", elapsed))
}

fn c2_ordering_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=5);
        let sd = random_sd(&mut rng, n, 60);
        let p = LEVELS[rng.gen_range(0..3)];
        let aes = sd.aes(p, None).unwrap();
        let mes = sd.mes(p).unwrap();
        let imes = sd.imes(p).unwrap();
        let rmes = sd.rmes(p).unwrap();
        worst = worst.min(mes - aes).min(imes - mes).min(rmes - imes);
    }
    let elapsed = start.elapsed();
    outcome(
        worst >= -CHAIN_SLACK && within(elapsed, 5000),
        format!("min slack {worst:.3e} over 1000 instances, {elapsed:?}"),
    )
}

fn c3_single_scenario_collapse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let sd = random_sd(&mut rng, 1, 60);
        let p = if rng.gen_bool(0.5) { LEVELS[rng.gen_range(0..3)] } else { rng.gen_range(0.01..0.99) };
        let es = sd.laws()[0].es(p).unwrap();
        for v in [sd.aes(p, None), sd.mes(p), sd.imes(p), sd.rmes(p)] {
            worst = worst.max((v.unwrap() - es).abs());
        }
    }
    outcome(worst <= EXACT_TOL, format!("max deviation {worst:.3e} over 200 instances"))
}

fn measure_on<'a>(
    set: &'a ScenarioSet,
    p: f64,
    f: impl Fn(&ScenarioDistributions, f64) -> f64 + 'a,
) -> impl Fn(&[f64]) -> f64 + 'a {
    move |x: &[f64]| f(&ScenarioDistributions::from_losses(x, set).unwrap(), p)
}

fn c4_comonotonic_additivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (table, set) = random_table(&mut rng, 30, 3);
    let p = 0.9;
    let mut failures = Vec::new();
    let mvar = measure_on(&set, p, |sd, p| sd.mvar(p).unwrap());
    let imes = measure_on(&set, p, |sd, p| sd.imes(p).unwrap());
    let rmes = measure_on(&set, p, |sd, p| sd.rmes(p).unwrap());
    let aes = measure_on(&set, p, |sd, p| sd.aes(p, None).unwrap());
    let probes: [(&str, &dyn Fn(&[f64]) -> f64); 4] =
        [("mvar", &mvar), ("imes", &imes), ("rmes", &rmes), ("aes", &aes)];
    for (name, m) in probes {
        let v = comonotonic_additivity_probe(m, &table, 500, 40).unwrap();
        if !v.holds {
            failures.push(format!("{name}: {:?}", v.counterexample));
        }
    }

    #[derive(serde::Deserialize)]
    struct Fixture {
        p: f64,
        table: OutcomeTable,
        scenarios: ScenarioSet,
    }
    let fx: Fixture = serde_json::from_str(
        &std::fs::read_to_string(fixture_path("mes_comonotonic.json")).unwrap(),
    )
    .unwrap();
    let mes = measure_on(&fx.scenarios, fx.p, |sd, p| sd.mes(p).unwrap());
    let v = comonotonic_additivity_probe(&mes, &fx.table, 0, 0).unwrap();
    let gap = v
        .counterexample
        .as_ref()
        .map(|c| (c.values[1] + c.values[2] - c.values[0]).abs())
        .unwrap_or(0.0);
    let mes_ok = !v.holds && gap > STRICT_GAP;
    outcome(
        failures.is_empty() && mes_ok,
        format!("additive probes failing: {failures:?}; MES fixture gap {gap}"),
    )
}

fn random_mixture(rng: &mut ChaCha8Rng, n: usize) -> EsMixture {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let w: Vec<f64> = raw.iter().map(|a| a / total).collect();
    let laws = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let masses: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let s: f64 = masses.iter().sum();
            masses
                .iter()
                .map(|m| (rng.gen_range(0.05..=1.0), m / s))
                .collect()
        })
        .collect();
    EsMixture {
        w,
        h: MixingLaws::PerScenario(laws),
    }
}

fn c5_coherence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = 24;
    let (_, set) = random_table(&mut rng, m, 3);
    let p = 0.9;
    let mut failures = Vec::new();
    let mes = measure_on(&set, p, |sd, p| sd.mes(p).unwrap());
    let aes = measure_on(&set, p, |sd, p| sd.aes(p, None).unwrap());
    let rmes = measure_on(&set, p, |sd, p| sd.rmes(p).unwrap());
    let coherent: [(&str, &dyn Fn(&[f64]) -> f64); 3] = [("mes", &mes), ("aes", &aes), ("rmes", &rmes)];
    for (name, f) in coherent {
        let r = coherence_probe(f, m, 500, 50);
        if !r.coherent() {
            failures.push(name.to_string());
        }
    }
    for k in 0..5 {
        let mix = random_mixture(&mut rng, set.len());
        let f = |x: &[f64]| es_mixture_eval(&ScenarioDistributions::from_losses(x, &set).unwrap(), &mix).unwrap();
        if !coherence_probe(&f, m, 500, 60 + k).coherent() {
            failures.push(format!("mixture {k}"));
        }
    }
    // VaR is not subadditive: some seeded instance must expose it
    let mut mvar_seed = None;
    for seed in 0..20u64 {
        let mut r = ChaCha8Rng::seed_from_u64(500 + seed);
        let (_, s) = random_table(&mut r, m, 2);
        let mvar = measure_on(&s, p, |sd, p| sd.mvar(p).unwrap());
        if !coherence_probe(&mvar, m, 500, seed).subadditive.holds {
            mvar_seed = Some(seed);
            break;
        }
    }
    outcome(
        failures.is_empty() && mvar_seed.is_some(),
        format!("non-coherent: {failures:?}; MVaR subadditivity violation at seed {mvar_seed:?}"),
    )
}

fn c6_representation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let sd = random_sd(&mut rng, n, 20);
        let p = rng.gen_range(0.05..0.99);
        let point = rho_psi(&sd, &PsiBarSpec::point_mass(vec![p; n]), None, 0).unwrap().value;
        let diag = rho_psi(&sd, &PsiBarSpec::DiagonalUniform { p }, None, 0).unwrap().value;
        let prod = rho_psi(&sd, &PsiBarSpec::ProductUniform, None, 0).unwrap().value;
        worst = worst
            .max((point - sd.mvar(p).unwrap()).abs())
            .max((diag - sd.imes(p).unwrap()).abs())
            .max((prod - sd.independent_max_law().unwrap().mean()).abs());
    }
    let mut inside = 0;
    let spec = PsiBarSpec::CustomSampler {
        sampler: Sampler::ProductUniform,
    };
    for i in 0..100u64 {
        let n = rng.gen_range(1..=4);
        let sd = random_sd(&mut rng, n, 20);
        let exact = rho_psi(&sd, &PsiBarSpec::ProductUniform, None, 0).unwrap().value;
        let mc = rho_psi(&sd, &spec, Some(MC_SAMPLES), 1000 + i).unwrap();
        if (exact - mc.value).abs() <= MC_SE_MULTIPLE * mc.std_error + EXACT_TOL {
            inside += 1;
        }
    }
    let share = inside as f64 / 100.0;
    outcome(
        worst <= EXACT_TOL && share >= MC_PASS_SHARE,
        format!("exact paths max deviation {worst:.3e}; MC within 4 SE on {inside}/100"),
    )
}

fn c7_choquet() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_es: f64 = 0.0;
    for _ in 0..200 {
        let m = rng.gen_range(1..=12);
        let (t, s) = random_table(&mut rng, m, 1);
        let var = if rng.gen_bool(0.5) { "Z" } else { "K" };
        let p = rng.gen_range(0.01..0.99);
        let c = distorted_set_function(&DistortionSpec::es_distortion(p).unwrap(), &s).unwrap();
        let ch = choquet_integral(t.variable(var).unwrap(), &c, true).unwrap();
        let es = scenario_distribution(&t, &s, var, "Q1").unwrap().es(p).unwrap();
        worst_es = worst_es.max((ch - es).abs());
    }
    let mut worst_aes: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(2..=12);
        let (t, s) = random_table(&mut rng, m, n);
        let p = rng.gen_range(0.01..0.99);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let a: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let psi = DistortionSpec::aes_type(n, p, Some(a.clone())).unwrap();
        let c = distorted_set_function(&psi, &s).unwrap();
        let x = t.variable("Z").unwrap();
        let ch = choquet_integral(x, &c, false).unwrap();
        let direct = ScenarioDistributions::from_losses(x, &s).unwrap().aes(p, Some(&a)).unwrap();
        worst_aes = worst_aes.max((ch - direct).abs());
    }
    outcome(
        worst_es <= EXACT_TOL && worst_aes <= EXACT_TOL,
        format!("ES distortion max deviation {worst_es:.3e}; AES distortion {worst_aes:.3e}"),
    )
}

fn c8_axiom_checkers() -> Outcome {
    let aes = check_componentwise(&DistortionSpec::aes_type(2, 0.8, None).unwrap(), 20).unwrap();
    let aes_ok = aes.increasing.holds && aes.concave.holds && aes.submodular.holds;
    let imes = check_componentwise(&DistortionSpec::imes_type(2, 0.8).unwrap(), 20).unwrap();
    let imes_ok = imes.increasing.holds
        && !imes.concave.holds
        && imes
            .concave
            .counterexample
            .as_ref()
            .is_some_and(|c| !c.witness_points.is_empty());
    let psi = psi_two_s_minus_t();
    let lin = check_componentwise(&psi, 20).unwrap();
    let set = atomized_reversed_densities(2).unwrap();
    let standard = check_standard(&distorted_set_function(&psi, &set).unwrap()).unwrap();
    outcome(
        aes_ok && imes_ok && !lin.increasing.holds && standard.holds,
        format!(
            "aes all three: {aes_ok}; imes increasing, concavity witness: {imes_ok}; \
             2s-t increasing: {}; atomized set function standard: {}",
            lin.increasing.holds, standard.holds
        ),
    )
}

/// Random distortion from families that do and do not meet the criterion.
fn random_family(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DistortionSpec {
    // levels kept off the grid {j/k} so threshold families have no ties
    let mut p = rng.gen_range(0.05..0.95);
    while (p * k as f64 - (p * k as f64).round()).abs() < 1e-3 {
        p = rng.gen_range(0.05..0.95);
    }
    let a: Vec<f64> = {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|x| x / s).collect()
    };
    match rng.gen_range(0..6) {
        0 => DistortionSpec::aes_type(n, p, Some(a)).unwrap(),
        1 => DistortionSpec::imes_type(n, p).unwrap(),
        2 => DistortionSpec::minvar_type(n).unwrap(),
        3 => DistortionSpec::mvar_type(n, p).unwrap(),
        4 => {
            let gamma = rng.gen_range(0.3..2.5);
            DistortionSpec::custom(n, "power", move |x| {
                x.iter().zip(&a).map(|(xi, ai)| ai * xi).sum::<f64>().powf(gamma)
            })
            .unwrap()
        }
        _ => DistortionSpec::custom(n, "product", |x| x.iter().product()).unwrap(),
    }
}

fn c9_submodularity_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let start = Instant::now();
    let mut disagreements = Vec::new();
    let mut submodular = 0;
    for inst in 0..100 {
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(2..=10 / n);
        let m = n * k;
        let groups: Vec<(String, Vec<usize>)> =
            (0..n).map(|i| (format!("Q{}", i + 1), (i * k..(i + 1) * k).collect())).collect();
        let set = ScenarioSet::uniform_groups(m, &groups).unwrap();
        let psi = random_family(&mut rng, n, k);
        let brute = check_submodular(&distorted_set_function(&psi, &set).unwrap()).unwrap().holds;
        let grid = check_componentwise(&psi, k).unwrap();
        let criterion = grid.concave.holds && grid.submodular.holds;
        if brute {
            submodular += 1;
        }
        if brute != criterion {
            disagreements.push(format!("#{inst} {psi:?} n={n} k={k}"));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        disagreements.is_empty() && within(elapsed, 60_000),
        format!(
            "{submodular}/100 submodular, disagreements {disagreements:?}, {elapsed:?}"
        ),
    )
}

fn c10_conditional_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let day0 = chrono::NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    let mut failures = 0;
    for _ in 0..100 {
        let w = [8, 16, 40, 100, 200, 500][rng.gen_range(0..6)];
        let days: Vec<_> = (0..w + 1).map(|i| day0 + chrono::Duration::days(i as i64)).collect();
        let tied = rng.gen_bool(0.3);
        let target: Vec<f64> = (0..=w)
            .map(|_| {
                if tied {
                    rng.gen_range(-3..=3) as f64 / 100.0
                } else {
                    rng.gen_range(-0.05..0.05)
                }
            })
            .collect();
        let vix: Vec<f64> = (0..=w).map(|_| rng.gen_range(10.0..40.0)).collect();
        let res: Vec<f64> = (0..=w).map(|_| rng.gen_range(-0.2..0.2)).collect();
        let es = economic_scenarios(
            &DatedSeries::new("x", days.clone(), target).unwrap(),
            &DatedSeries::new("vix", days.clone(), vix).unwrap(),
            &DatedSeries::new("res", days.clone(), res).unwrap(),
            days[w],
            w,
        )
        .unwrap();
        assert!(es.assignment.group_sizes().iter().all(|&g| g == w / 4));
        let base = vec![1.0 / w as f64; w];
        let p = LEVELS[rng.gen_range(0..3)];
        let r = conditional_dominance_check(&es.table, &es.scenarios, &base, "x", p).unwrap();
        if !(r.mvar_dominates && r.imes_dominates) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{failures}/100 windows violate MVaR >= VaR or iMES >= ES"))
}

fn c11_basel() -> Outcome {
    let (panel, cfg, golden) = basel_fixture();
    let as_of = *panel.dates().last().unwrap();
    let mut notes = Vec::new();

    let mut full = cfg.clone();
    full.reduced_set = None;
    let th = theta(&panel, &full, as_of).unwrap();
    let theta_ok = th.theta == 1.0 && !th.cap_violation;
    notes.push(format!("theta(full) = {}", th.theta));

    let report = imcc(&panel, &cfg, as_of).unwrap();
    let frozen = golden_number(&golden["imcc"]);
    let ours: f64 = fmt_sig(report.imcc).parse().unwrap();
    let golden_ok = ours == frozen
        && ((report.imcc - frozen) / frozen).abs() < 1e-9
        && golden["as_of"].as_str() == Some(as_of.to_string().as_str());
    notes.push(format!("imcc {} vs frozen {}", fmt_sig(report.imcc), frozen));

    let from = panel.dates()[panel.len() - 25];
    let rows = rolling_series(&panel, &cfg, from, as_of).unwrap();
    let rolling_ok = rows
        .iter()
        .all(|r| r.values.as_ref().is_ok_and(|v| v.mes >= v.es));
    notes.push(format!("{} rolling rows", rows.len()));

    let doubled = imcc(&panel.scale_exposures(2.0).unwrap(), &cfg, as_of).unwrap();
    let rel = (doubled.imcc - 2.0 * report.imcc).abs() / report.imcc.abs();
    let homog_ok = rel <= HOMOGENEITY_TOL;
    notes.push(format!("doubling rel. error {rel:.2e}"));

    let start = Instant::now();
    let s = stressed_es(&panel, &cfg, as_of).unwrap();
    let elapsed = start.elapsed();
    notes.push(format!("2251-window scan {elapsed:?}, argmax j = {}", s.argmax_window.offset));

    outcome(
        theta_ok && golden_ok && rolling_ok && homog_ok && within(elapsed, 10_000),
        notes.join("; "),
    )
}

fn c12_data_layer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d0 = chrono::NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
    let days = |n: usize| -> Vec<_> { (0..n).map(|i| d0 + chrono::Duration::days(i as i64)).collect() };
    let mut worst_sum: f64 = 0.0;
    let mut worst_exp: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(2..400);
        let mut p = 100.0;
        let prices: Vec<f64> = (0..n)
            .map(|_| {
                p *= (rng.gen_range(-0.03..0.03f64)).exp();
                p
            })
            .collect();
        let r = log_linear_detrend(&PriceSeries::new("s", days(n), prices).unwrap()).unwrap();
        worst_sum = worst_sum.max(r.values().iter().sum::<f64>().abs());
        let (a, b) = (rng.gen_range(-1.0..5.0), rng.gen_range(-0.01..0.01));
        let expo: Vec<f64> = (0..n).map(|t| (a + b * t as f64).exp()).collect();
        let r = log_linear_detrend(&PriceSeries::new("e", days(n), expo).unwrap()).unwrap();
        worst_exp = worst_exp.max(r.values().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let ret = negative_returns(&PriceSeries::new("r", days(2), vec![100.0, 110.0]).unwrap()).unwrap();
    let ret_ok = ret.values() == [-0.1];

    let dir = tempfile::tempdir().unwrap();
    let mut stable = true;
    for i in 0..20 {
        let n = rng.gen_range(2..300);
        let prices: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..5000.0)).collect();
        let s = PriceSeries::new("px", days(n), prices).unwrap();
        let a = dir.path().join(format!("a{i}.csv"));
        let b = dir.path().join(format!("b{i}.csv"));
        write_csv(&a, s.as_series(), "date", "close").unwrap();
        let first = load_csv(&a, "date", "close").unwrap();
        write_csv(&b, first.as_series(), "date", "close").unwrap();
        let second = load_csv(&b, "date", "close").unwrap();
        let same_bits = first
            .prices()
            .iter()
            .zip(second.prices())
            .all(|(x, y)| x.to_bits() == y.to_bits());
        let same_text = std::fs::read(&a).unwrap() == std::fs::read(&b).unwrap();
        stable &= same_bits && same_text && first.dates() == second.dates();
    }
    outcome(
        worst_sum <= DETREND_TOL && worst_exp <= EXPONENTIAL_TOL && ret_ok && stable,
        format!(
            "residual sum {worst_sum:.2e}, exponential residual {worst_exp:.2e}, \
             returns([100,110]) = {:?}, CSV round trip stable: {stable}",
            ret.values()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("MES below ES on the two-scenario example", c1_mes_below_es),
        ("ordering chain AES <= MES <= iMES <= rMES", c2_ordering_chain),
        ("single-scenario collapse", c3_single_scenario_collapse),
        ("comonotonic additivity", c4_comonotonic_additivity),
        ("coherence probes", c5_coherence),
        ("representation consistency", c6_representation),
        ("Choquet equivalence", c7_choquet),
        ("axiom checker verdicts", c8_axiom_checkers),
        ("submodularity brute force vs componentwise", c9_submodularity_agreement),
        ("conditional scenario dominance", c10_conditional_dominance),
        ("capital charge pipeline", c11_basel),
        ("data layer", c12_data_layer),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.2?}]",
            i + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
