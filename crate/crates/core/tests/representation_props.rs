mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scenrisk::axioms::coherence_probe;
use scenrisk::choquet::{choquet_integral, distorted_set_function};
use scenrisk::representation::{
    es_mixture_eval, rho_psi, singularity_gate, sup_mixture_eval, EsMixture, Method, MixingLaws,
    PointMass, PsiBarSpec, Sampler, SingularityPolicy,
};
use scenrisk::ScenarioDistributions;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_atoms(r: &mut ChaCha8Rng, n: usize) -> Vec<PointMass> {
    let k = r.gen_range(1..=3);
    let masses: Vec<f64> = (0..k).map(|_| r.gen_range(0.1..1.0)).collect();
    let total: f64 = masses.iter().sum();
    masses
        .iter()
        .map(|m| PointMass {
            point: (0..n)
                .map(|_| if r.gen_bool(0.2) { 0.0 } else { r.gen_range(0.05..=1.0) })
                .collect::<Vec<f64>>(),
            mass: m / total,
        })
        .map(|mut a| {
            if a.point.iter().all(|u| *u == 0.0) {
                a.point[0] = 0.5;
            }
            a
        })
        .collect()
}

fn vertices(n: usize, p: f64) -> Vec<EsMixture> {
    (0..n)
        .map(|i| {
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            EsMixture::point(w, p)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn point_masses_match_choquet(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = r.gen_range(1..=10);
        let n = r.gen_range(1..=3);
        let (t, s) = random_table(&mut r, m, n);
        let spec = PsiBarSpec::PointMasses { atoms: random_atoms(&mut r, n) };
        let psi = spec.induced_distortion(n).unwrap();
        let cap = distorted_set_function(&psi, &s).unwrap();
        for var in ["Z", "K"] {
            let x = t.variable(var).unwrap();
            let sd = ScenarioDistributions::from_losses(x, &s).unwrap();
            let rho = rho_psi(&sd, &spec, None, 0).unwrap();
            prop_assert_eq!(rho.method, Method::Exact);
            let ch = choquet_integral(x, &cap, false).unwrap();
            prop_assert!((rho.value - ch).abs() <= 1e-9, "{} vs {}", rho.value, ch);
        }
    }

    #[test]
    fn vertex_sup_is_mes(seed in any::<u64>(), n in 1usize..=5, li in 0usize..3) {
        let sd = random_sd(&mut rng(seed), n, 30);
        let p = LEVELS[li];
        let sup = sup_mixture_eval(&sd, &vertices(n, p)).unwrap();
        prop_assert_eq!(sup.value, sd.mes(p).unwrap());
        let es = sd.es_values(p).unwrap();
        prop_assert_eq!(es[sup.argmax], sup.value);
        prop_assert!(es[..sup.argmax].iter().all(|v| *v < sup.value));
    }

    #[test]
    fn diagonal_uniform_is_imes(seed in any::<u64>(), n in 1usize..=4, p in 0.01..0.99f64) {
        let sd = random_sd(&mut rng(seed), n, 30);
        let v = rho_psi(&sd, &PsiBarSpec::DiagonalUniform { p }, None, 0).unwrap().value;
        prop_assert!((v - sd.imes(p).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn mixture_point_at_vertex_is_scenario_es(seed in any::<u64>(), n in 1usize..=4, p in 0.01..0.99f64) {
        let sd = random_sd(&mut rng(seed), n, 30);
        let i = (seed as usize) % n;
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        let v = es_mixture_eval(&sd, &EsMixture::point(w, p)).unwrap();
        prop_assert_eq!(v, sd.laws()[i].es(p).unwrap());
    }
}

#[test]
fn es_mixtures_are_coherent() {
    let mut r = rng(5);
    for k in 0..8 {
        let m = r.gen_range(4..20);
        let n = r.gen_range(1..=3);
        let (_, s) = random_table(&mut r, m, n);
        let raw: Vec<f64> = (0..n).map(|_| r.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let h: Vec<(f64, f64)> = vec![(r.gen_range(0.05..0.6), 0.5), (r.gen_range(0.6..1.0), 0.5)];
        let mix = EsMixture {
            w: raw.iter().map(|a| a / total).collect(),
            h: MixingLaws::Shared(h),
        };
        let f = |x: &[f64]| es_mixture_eval(&ScenarioDistributions::from_losses(x, &s).unwrap(), &mix).unwrap();
        assert!(coherence_probe(&f, m, 200, k).coherent());
    }
}

#[test]
fn monte_carlo_is_reproducible_and_close() {
    let sd = random_sd(&mut rng(6), 3, 15);
    let spec = PsiBarSpec::CustomSampler { sampler: Sampler::ProductUniform };
    let a = rho_psi(&sd, &spec, Some(50_000), 9).unwrap();
    let b = rho_psi(&sd, &spec, Some(50_000), 9).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.method, Method::MonteCarlo);
    let exact = rho_psi(&sd, &PsiBarSpec::ProductUniform, None, 0).unwrap().value;
    assert!((a.value - exact).abs() <= 5.0 * a.std_error);
}

#[test]
fn diagonal_sampler_tracks_imes() {
    let sd = random_sd(&mut rng(7), 2, 10);
    let spec = PsiBarSpec::CustomSampler { sampler: Sampler::DiagonalUniform { p: 0.8 } };
    let mc = rho_psi(&sd, &spec, Some(100_000), 1).unwrap();
    let exact = sd.imes(0.8).unwrap();
    assert!((mc.value - exact).abs() <= 5.0 * mc.std_error + 1e-12);
}

#[test]
fn duplicated_mixtures_report_first_index() {
    let sd = random_sd(&mut rng(8), 2, 10);
    let mix = EsMixture::point(vec![0.5, 0.5], 0.9);
    let sup = sup_mixture_eval(&sd, &[mix.clone(), mix.clone(), mix]).unwrap();
    assert_eq!(sup.argmax, 0);
    assert!(sup_mixture_eval(&sd, &[]).is_err());
}

#[test]
fn point_mass_vector_is_mvar() {
    let sd = random_sd(&mut rng(9), 3, 20);
    for p in LEVELS {
        let v = rho_psi(&sd, &PsiBarSpec::point_mass(vec![p; 3]), None, 0).unwrap().value;
        assert_eq!(v, sd.mvar(p).unwrap());
    }
    let origin = PsiBarSpec::point_mass(vec![0.0; 3]);
    assert!(rho_psi(&sd, &origin, None, 0).is_err());
}

#[test]
fn mixture_rejects_atom_at_zero() {
    let sd = random_sd(&mut rng(10), 2, 10);
    let mix = EsMixture { w: vec![0.5, 0.5], h: MixingLaws::Shared(vec![(0.0, 1.0)]) };
    assert!(es_mixture_eval(&sd, &mix).is_err());
}

#[test]
fn singularity_policy() {
    let (_, singular) = split_table();
    assert_eq!(singularity_gate(&singular, SingularityPolicy::Fail).unwrap(), None);
    let (_, overlapping) = random_table(&mut rng(11), 10, 2);
    if !overlapping.mutually_singular() {
        assert!(singularity_gate(&overlapping, SingularityPolicy::Warn).unwrap().is_some());
        assert!(singularity_gate(&overlapping, SingularityPolicy::Fail).is_err());
        assert_eq!(singularity_gate(&overlapping, SingularityPolicy::Ignore).unwrap(), None);
    }
    assert_eq!(SingularityPolicy::default(), SingularityPolicy::Warn);
}

#[test]
fn specs_round_trip_through_json() {
    let specs = [
        PsiBarSpec::point_mass(vec![0.9, 0.0]),
        PsiBarSpec::DiagonalUniform { p: 0.5 },
        PsiBarSpec::ProductUniform,
        PsiBarSpec::CustomSampler { sampler: Sampler::ProductPower { exponents: vec![1.0, 2.0] } },
    ];
    for s in specs {
        let text = serde_json::to_string(&s).unwrap();
        let back: PsiBarSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
    let mix: EsMixture = serde_json::from_str(r#"{"w": [0.25, 0.75], "h": [[0.9, 1.0]]}"#).unwrap();
    assert_eq!(mix.h, MixingLaws::Shared(vec![(0.9, 1.0)]));
}
