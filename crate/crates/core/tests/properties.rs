use std::collections::BTreeMap;

use mfuq_core::metrics::{discrete_errors, ks_statistic, moments_from_samples};
use mfuq_core::misc::{combination_coefficients, coefficient_increment, MultiIndex, MultiIndexSet};
use mfuq_core::srbf::{build_interpolating, select_fidelity, TauSamples, TrainingSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Grows a downward-closed set by adding random reduced-margin elements.
fn random_closed_set(dim: usize, steps: usize, seed: u64) -> MultiIndexSet {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut set = MultiIndexSet::unit(dim);
    for _ in 0..steps {
        let rm: Vec<_> = set.reduced_margin().iter().cloned().collect();
        set.insert(rm[r.gen_range(0..rm.len())].clone()).unwrap();
    }
    set
}

#[test]
fn coefficients_sum_to_one_on_random_sets() {
    for seed in 0..200 {
        let dim = 2 + (seed % 3) as usize;
        let set = random_closed_set(dim, 1 + (seed % 25) as usize, seed);
        assert!(set.is_downward_closed());
        let c = combination_coefficients(&set).unwrap();
        assert_eq!(c.values().sum::<i64>(), 1, "seed {seed}");
    }
}

#[test]
fn increments_are_mixed_differences() {
    for seed in 0..50 {
        let set = random_closed_set(3, 10, 1000 + seed);
        for idx in set.reduced_margin().iter() {
            let inc = coefficient_increment(&set, idx).unwrap();
            let mut expect = BTreeMap::new();
            for mask in 0u32..8 {
                let e: Vec<usize> = (0..3).map(|n| idx.entries()[n] - ((mask >> n) & 1) as usize).collect();
                if e.iter().all(|&v| v >= 1) {
                    let sign = if mask.count_ones() % 2 == 0 { 1 } else { -1 };
                    expect.insert(MultiIndex::new(e).unwrap(), sign);
                }
            }
            assert_eq!(inc, expect, "seed {seed} idx {idx}");
        }
    }
}

fn samples() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 1..60)
}

proptest! {
    #[test]
    fn ks_is_symmetric(a in samples(), b in samples()) {
        let ab = ks_statistic(&a, &b).unwrap();
        prop_assert_eq!(ab, ks_statistic(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn ks_ignores_monotone_transforms(a in samples(), b in samples()) {
        let t = |v: &[f64]| v.iter().map(|x| (x / 50.0).exp() * 3.0 - 1.0).collect::<Vec<_>>();
        prop_assert_eq!(ks_statistic(&a, &b).unwrap(), ks_statistic(&t(&a), &t(&b)).unwrap());
    }

    #[test]
    fn moments_survive_duplication(a in prop::collection::vec(-10.0f64..10.0, 4..50)) {
        let m = moments_from_samples(&a).unwrap();
        let d = moments_from_samples(&[a.clone(), a.clone()].concat()).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs());
        prop_assert!(close(m.mean, d.mean) && close(m.variance, d.variance));
        match (m.skewness, d.skewness, m.kurtosis, d.kurtosis) {
            (Some(s1), Some(s2), Some(k1), Some(k2)) => prop_assert!(close(s1, s2) && close(k1, k2)),
            (None, None, None, None) => {}
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn discrete_errors_are_scale_free(
        pairs in prop::collection::vec((0.1f64..5.0, -1.0f64..1.0), 1..40),
        lambda in 0.01f64..100.0,
    ) {
        let g: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let s: Vec<f64> = pairs.iter().map(|p| p.0 + p.1).collect();
        let (l2, linf) = discrete_errors(&s, &g).unwrap();
        let sc = |v: &[f64]| v.iter().map(|x| lambda * x).collect::<Vec<_>>();
        let (l2s, linfs) = discrete_errors(&sc(&s), &sc(&g)).unwrap();
        prop_assert!((l2.unwrap() - l2s.unwrap()).abs() <= 1e-12 * (1.0 + l2.unwrap()));
        prop_assert!((linf.unwrap() - linfs.unwrap()).abs() <= 1e-12 * (1.0 + linf.unwrap()));
    }

    #[test]
    fn fidelity_choice_ignores_common_cost_scaling(
        comps in prop::collection::vec(0.0f64..10.0, 1..6),
        scale in 1e-3f64..1e3,
    ) {
        let costs: Vec<f64> = (0..comps.len()).map(|a| 8f64.powi(a as i32)).collect();
        let scaled: Vec<f64> = costs.iter().map(|c| c * scale).collect();
        prop_assert_eq!(select_fidelity(&comps, &costs), select_fidelity(&comps, &scaled));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn uncertainty_is_nonnegative(
        pts in prop::collection::btree_set((0u32..=20, 0u32..=20), 2..10),
        ys in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1..20),
    ) {
        let taus = TauSamples::from_values((0..40).map(|i| 1.0 + i as f64 / 20.0).collect()).unwrap();
        let set = TrainingSet::from_pairs(1, 2, pts.iter().map(|&(a, b)| {
            let p = vec![a as f64 / 20.0, b as f64 / 20.0];
            let v = (4.0 * p[0]).sin() * p[1];
            (p, v)
        })).unwrap();
        let mf = build_interpolating(&[set], &taus, &[1.0]).unwrap();
        for (a, b) in ys {
            prop_assert!(mf.uncertainty(&[a, b]) >= 0.0);
        }
    }
}
