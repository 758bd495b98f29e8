mod common;

use std::collections::BTreeSet;

use common::oracle;
use gosbr::kernels::{
    build_gram, correlation_kernel, diffusion_kernel, domain_kernel, psd_check, spectrum_kernel,
    FeatureSet, GramMatrix, InteractionGraph, KernelSpec,
};
use proptest::prelude::*;

fn dna(max: usize) -> impl Strategy<Value = String> {
    proptest::string::string_regex(&format!("[ACGT]{{0,{max}}}")).unwrap()
}

fn corpus(seed: u64, n: usize) -> (Vec<String>, FeatureSet) {
    let mut r = common::rng(seed);
    let ids: Vec<String> = (0..n).map(|i| format!("p{i:02}")).collect();
    let mut f = FeatureSet::default();
    for id in &ids {
        f.sequences
            .insert(id.clone(), oracle::random_string(&mut r, b"ACDEFG", 30));
        let doms: BTreeSet<String> = (0..rand::Rng::gen_range(&mut r, 0..4))
            .map(|_| format!("IPR{}", rand::Rng::gen_range(&mut r, 0..6)))
            .collect();
        f.domains.insert(id.clone(), doms);
        f.expression.insert(
            id.clone(),
            (0..5)
                .map(|_| rand::Rng::gen_range(&mut r, -1.0..1.0))
                .collect(),
        );
    }
    (ids, f)
}

proptest! {
    #[test]
    fn spectrum_matches_brute_force(a in dna(50), b in dna(50), k in 1usize..=5) {
        prop_assert_eq!(spectrum_kernel(&a, &b, k).unwrap(), oracle::naive_spectrum(&a, &b, k));
    }

    #[test]
    fn built_grams_are_symmetric_and_psd(seed in any::<u64>(), n in 1usize..=20) {
        let (ids, f) = corpus(seed, n);
        for spec in [
            KernelSpec::Spectrum { k: 3, normalize: false },
            KernelSpec::Domain,
            KernelSpec::Correlation { double_sum: false },
        ] {
            let g = build_gram(&spec, &ids, &f).unwrap();
            prop_assert!(g.matrix() == &g.matrix().transpose(), "{:?} not symmetric", spec);
            prop_assert!(psd_check(&g, 1e-8).passed, "{:?} not PSD", spec);
        }
    }

    #[test]
    fn normalized_spectrum_is_a_cosine(seed in any::<u64>(), n in 1usize..=12) {
        let (ids, f) = corpus(seed, n);
        let g = build_gram(&KernelSpec::Spectrum { k: 2, normalize: true }, &ids, &f).unwrap();
        for i in 0..n {
            let d = g.get(i, i);
            // sequences shorter than k have no k-mers and keep a zero row
            prop_assert!(d == 0.0 || (d - 1.0).abs() < 1e-12);
            for j in 0..n {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&g.get(i, j)));
            }
        }
    }

    #[test]
    fn covariance_is_symmetric_and_shift_invariant(
        x in prop::collection::vec(-5.0..5.0f64, 1..10),
        shift in -3.0..3.0f64,
        seed in any::<u64>(),
    ) {
        let mut r = common::rng(seed);
        let y: Vec<f64> = x.iter().map(|_| rand::Rng::gen_range(&mut r, -5.0..5.0)).collect();
        let xs: Vec<f64> = x.iter().map(|v| v + shift).collect();
        let k = correlation_kernel(&x, &y).unwrap();
        prop_assert!((k - correlation_kernel(&y, &x).unwrap()).abs() <= 1e-12);
        prop_assert!((k - correlation_kernel(&xs, &y).unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn covariance_hand_cases() {
    assert!(
        (correlation_kernel(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 4.0 / 3.0).abs() < 1e-15
    );
    assert_eq!(correlation_kernel(&[2.0, 2.0], &[1.0, 5.0]).unwrap(), 0.0);
    assert!(correlation_kernel(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn domain_kernel_literal_denominator() {
    let s = |v: &[&str]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<BTreeSet<String>>()
    };
    assert_eq!(
        domain_kernel(&s(&["a", "b"]), &s(&["b", "c", "d"])),
        1.0 / 6.0
    );
    assert_eq!(domain_kernel(&s(&["a", "b"]), &s(&["a", "b"])), 0.5);
    assert_eq!(domain_kernel(&s(&[]), &s(&["a"])), 0.0);
}

#[test]
fn diffusion_flattens_each_component() {
    // a path of four and a separate pair, at large beta
    let ids: Vec<String> = (0..6).map(|i| format!("v{i}")).collect();
    let e = |a: usize, b: usize| (ids[a].clone(), ids[b].clone(), 1.0);
    let g = InteractionGraph::new(ids.clone(), vec![e(0, 1), e(1, 2), e(2, 3), e(4, 5)]).unwrap();
    let k = diffusion_kernel(&g, 50.0).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let want = match (i < 4, j < 4) {
                (true, true) => 0.25,
                (false, false) => 0.5,
                _ => 0.0,
            };
            assert!(
                (k.get(i, j) - want).abs() < 1e-6,
                "({i}, {j}) = {}",
                k.get(i, j)
            );
        }
    }
    assert!(psd_check(&k, 1e-8).passed);
}

#[test]
fn gram_csv_round_trip() {
    let (ids, f) = corpus(3, 5);
    let g = build_gram(&KernelSpec::Domain, &ids, &f).unwrap();
    let back = GramMatrix::from_csv(&g.to_csv()).unwrap();
    assert_eq!(back.ids(), g.ids());
    assert_eq!(back.matrix(), g.matrix());
}

#[test]
fn indefinite_matrices_are_reported() {
    let ids = vec!["a".to_string(), "b".to_string()];
    let g = GramMatrix::new(
        ids,
        nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
    )
    .unwrap();
    let report = psd_check(&g, 1e-8);
    assert!(!report.passed);
    assert!((report.min_eigenvalue + 1.0).abs() < 1e-12);
}
