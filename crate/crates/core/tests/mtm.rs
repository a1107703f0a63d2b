mod common;

use mtmix::mtm::srswor_order_with;
use mtmix::{mtm, omega_n, srswor_order, Error, MixingMeasure, MtmConfig};
use proptest::prelude::*;

fn measure() -> impl Strategy<Value = MixingMeasure> {
    (1..=15usize).prop_flat_map(|k| {
        (prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 2), k), prop::collection::vec(0.001..1.0f64, k))
            .prop_map(|(atoms, raw)| {
                let total: f64 = raw.iter().sum();
                MixingMeasure::from_coords(atoms, raw.iter().map(|w| w / total).collect()).unwrap()
            })
    })
}

fn config() -> impl Strategy<Value = MtmConfig> {
    (0.01..1.0f64, 0.05..2.0f64, prop_oneof![Just(1.0), Just(2.0), 1.0..3.0f64], any::<u64>())
        .prop_map(|(omega, c, r, seed)| MtmConfig::new(omega, c, r, seed).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn invariants(g in measure(), cfg in config()) {
        let res = mtm(&g, &cfg).unwrap();
        let merged = &res.merged_measure;

        prop_assert!((res.g_tilde.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!((merged.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert_eq!(res.k_tilde, res.g_tilde.len());
        prop_assert!(res.k_tilde >= 1);
        prop_assert!(res.k_tilde <= merged.len() && merged.len() <= g.len());
        prop_assert_eq!(res.stage1_merge_count, g.len() - merged.len());
        prop_assert!(merged.weights().windows(2).all(|w| w[0] >= w[1]));

        // Survivors are atoms of G' and, barring the fallback, above threshold.
        for (slot, &idx) in res.survivors.iter().enumerate() {
            prop_assert_eq!(&res.g_tilde.atoms()[slot], &merged.atoms()[idx]);
            prop_assert!(res.empty_fallback || merged.weights()[idx] > cfg.threshold());
        }
        prop_assert_eq!(
            res.stage2_truncated_count,
            merged.weights().iter().filter(|w| **w <= cfg.threshold()).count()
        );

        // Every removed atom was within omega of a kept atom, and of no kept
        // atom visited earlier than the one it joined.
        let pos: Vec<usize> = {
            let mut p = vec![0; g.len()];
            for (t, &i) in res.order.iter().enumerate() {
                p[i] = t;
            }
            p
        };
        let removed: Vec<usize> = res.absorptions.iter().map(|a| a.0).collect();
        for &(gone, into) in &res.absorptions {
            prop_assert!(!removed.contains(&into));
            prop_assert!(pos[into] < pos[gone]);
            prop_assert!(g.atoms()[gone].distance(&g.atoms()[into]) <= cfg.omega);
            for &earlier in &res.order[..pos[into]] {
                if !removed.contains(&earlier) {
                    prop_assert!(g.atoms()[gone].distance(&g.atoms()[earlier]) > cfg.omega);
                }
            }
        }
    }

    #[test]
    fn deterministic_given_seed(g in measure(), cfg in config()) {
        prop_assert_eq!(mtm(&g, &cfg).unwrap(), mtm(&g, &cfg).unwrap());
    }

    #[test]
    fn fixed_point_for_separated_heavy_atoms(seed in any::<u64>(), k in 1..=5usize) {
        // Atoms on a circle of radius 2 are >= 2 sin(pi/5) * 2 > 2 apart.
        let atoms: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / k as f64;
                vec![2.0 * t.cos(), 2.0 * t.sin()]
            })
            .collect();
        let g = MixingMeasure::from_coords(atoms, vec![1.0 / k as f64; k]).unwrap();
        let res = mtm(&g, &MtmConfig::new(0.5, 0.3, 2.0, seed).unwrap()).unwrap();
        prop_assert!(res.g_tilde.approx_eq_unordered(&g, 1e-12));
    }
}

#[test]
fn srswor_first_index_frequencies() {
    for (w, p0) in [([0.5, 0.5], 0.5), ([0.9, 0.1], 0.9)] {
        let hits = (0..100_000u64).filter(|&s| srswor_order(&w, s).unwrap()[0] == 0).count();
        let freq = hits as f64 / 1e5;
        assert!((freq - p0).abs() < 0.01, "{w:?}: {freq}");
    }
}

#[test]
fn srswor_full_permutation_law() {
    // P(a, b, c) = w_a * w_b / (1 - w_a) for successive sampling.
    let w = [0.5, 0.3, 0.2];
    let mut counts = std::collections::HashMap::new();
    let mut rng = common::rng(17);
    let n = 200_000;
    for _ in 0..n {
        *counts.entry(srswor_order_with(&w, &mut rng).unwrap()).or_insert(0usize) += 1;
    }
    for (perm, c) in counts {
        let (a, b) = (perm[0], perm[1]);
        let p = w[a] * w[b] / (1.0 - w[a]);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((c as f64 / n as f64 - p).abs() < 5.0 * se, "{perm:?}");
    }
}

#[test]
fn srswor_edge_cases() {
    assert_eq!(srswor_order(&[1.0], 3).unwrap(), vec![0]);
    assert_eq!(srswor_order(&[0.3, 0.7], 5).unwrap(), srswor_order(&[0.3, 0.7], 5).unwrap());
    assert_eq!(srswor_order(&[0.0, 1.0, 0.0], 1).unwrap(), vec![1, 0, 2]);
    assert!(matches!(srswor_order(&[0.0, 0.0], 1), Err(Error::EmptyMeasure)));
    assert!(srswor_order(&[-1.0, 2.0], 1).is_err());
}

#[test]
fn omega_domain() {
    assert!(omega_n(3).unwrap() > 0.0);
    assert!(matches!(omega_n(2), Err(Error::Domain(_))));
    assert!(matches!(omega_n(1), Err(Error::Domain(_))));
}

#[test]
fn config_rejects_bad_values() {
    assert!(MtmConfig::new(0.0, 1.0, 1.0, 0).is_err());
    assert!(MtmConfig::new(0.1, 0.0, 1.0, 0).is_err());
    assert!(MtmConfig::new(0.1, 1.0, 0.5, 0).is_err());
    assert!(MtmConfig::new(f64::NAN, 1.0, 1.0, 0).is_err());
}

#[test]
fn all_light_atoms_fall_back_to_heaviest() {
    let g = MixingMeasure::from_coords(vec![vec![0.0], vec![5.0], vec![10.0]], vec![0.3, 0.4, 0.3]).unwrap();
    let res = mtm(&g, &MtmConfig::new(1.0, 1.0, 1.0, 0).unwrap()).unwrap();
    assert!(res.empty_fallback);
    assert_eq!(res.k_tilde, 1);
    assert_eq!(res.g_tilde.atoms()[0].coords(), &[5.0]);
    assert!((res.g_tilde.weights()[0] - 1.0).abs() < 1e-15);
}
