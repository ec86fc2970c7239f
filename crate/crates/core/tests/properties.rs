use proptest::prelude::*;

use ghzsim_core::gates::{
    apply_inverse_qft_spatial_all, apply_path_control_all, apply_path_control_in_order,
    apply_qft_spatial_all, path_control,
};
use ghzsim_core::ghz::{ghz_spatial, hyper_initial};
use ghzsim_core::protocol::{joint_oam_first, joint_qft_first, run_exhaustive};
use ghzsim_core::{Complex64, GhzLabel, Representation, StateVector, SystemShape};

const GRID: [(u32, usize); 8] = [(2, 2), (2, 3), (2, 5), (3, 2), (3, 3), (3, 4), (4, 3), (5, 3)];

fn shape_and_label() -> impl Strategy<Value = (SystemShape, GhzLabel)> {
    prop::sample::select(GRID.to_vec()).prop_flat_map(|(d, n)| {
        (prop::collection::vec(0..d, n - 1), 0..d).prop_map(move |(x, k)| {
            (SystemShape::new(d, n).unwrap(), GhzLabel::new(x, k))
        })
    })
}

/// Random normalized dense state on a small shape.
fn random_state() -> impl Strategy<Value = StateVector> {
    prop::sample::select(vec![(2u32, 2usize), (3, 2), (2, 3)]).prop_flat_map(|(d, n)| {
        let dim = (d as usize).pow(2 * n as u32);
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map(
            "nonzero",
            move |amps| {
                let sh = SystemShape::new(d, n).unwrap();
                StateVector::from_dense(sh, amps.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).ok()
            },
        )
    })
}

fn sorted_magnitudes(s: &StateVector) -> Vec<f64> {
    let mut m: Vec<f64> = s.nonzeros().map(|(_, a)| a.norm()).collect();
    m.sort_by(f64::total_cmp);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm(s in random_state()) {
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let a = apply_path_control_all(&s);
        let b = apply_qft_spatial_all(&a);
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((b.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((StateVector::inner_product(&b, &b).unwrap().im).abs() < 1e-12);
    }

    #[test]
    fn path_control_permutes_magnitudes(s in random_state(), photon in 0usize..2) {
        let out = path_control(&s, photon).unwrap();
        prop_assert_eq!(sorted_magnitudes(&s), sorted_magnitudes(&out));
    }

    #[test]
    fn qft_inverse_restores(s in random_state()) {
        let back = apply_inverse_qft_spatial_all(&apply_qft_spatial_all(&s));
        prop_assert!(StateVector::fidelity(&back, &s).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn inner_product_bounded(a in random_state(), theta in 0.0f64..6.3) {
        let b = apply_qft_spatial_all(&a.with_global_phase(theta));
        if a.shape() == b.shape() {
            prop_assert!(StateVector::inner_product(&a, &b).unwrap().norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn dense_sparse_round_trip(s in random_state()) {
        let sparse = s.to_representation(Representation::Sparse).unwrap();
        let dense = sparse.to_representation(Representation::Dense).unwrap();
        for i in 0..s.shape().dimension() {
            prop_assert!((dense.amplitude(i) - s.amplitude(i)).norm() <= 1e-15);
        }
    }

    #[test]
    fn path_control_order_irrelevant((sh, label) in shape_and_label(), seed in any::<u64>()) {
        let initial = hyper_initial(sh, &label).unwrap();
        let mut order: Vec<usize> = (0..sh.n()).collect();
        // Fisher-Yates driven by the seed
        let mut state = seed;
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state >> 33) as usize % (i + 1));
        }
        let a = apply_path_control_all(&initial);
        let b = apply_path_control_in_order(&initial, order).unwrap();
        let ea: Vec<_> = a.nonzeros().collect();
        let eb: Vec<_> = b.nonzeros().collect();
        prop_assert_eq!(ea, eb);
    }

    #[test]
    fn spatial_factor_unchanged_by_path_control((sh, label) in shape_and_label()) {
        let after = apply_path_control_all(&hyper_initial(sh, &label).unwrap());
        let (sp, oam) = after.factor_across_registers().unwrap();
        let ghz = ghz_spatial(sh, &label).unwrap();
        prop_assert!(StateVector::fidelity(&sp, &ghz).unwrap() >= 1.0 - 1e-12);
        let rebuilt = StateVector::tensor(&sp, &oam).unwrap();
        prop_assert!(StateVector::fidelity(&rebuilt, &after).unwrap() >= 1.0 - 1e-9);
        // OAM factor is the shifted auxiliary GHZ
        let d = sh.d();
        prop_assert_eq!(oam.nonzero_count(), d as usize);
        for j in 0..d {
            let levels = label.support_tuple(d, j);
            let amp = oam.amplitude_at(&vec![0; sh.n()], &levels).unwrap();
            prop_assert!((amp.norm() - 1.0 / f64::from(d).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_support_structure((sh, label) in shape_and_label()) {
        let d = sh.d();
        let s = ghz_spatial(sh, &label).unwrap();
        prop_assert_eq!(s.nonzero_count(), d as usize);
        let mut support: Vec<Vec<u32>> = s.nonzeros().map(|(i, _)| sh.decompose(i).0).collect();
        let mut expect: Vec<Vec<u32>> = (0..d).map(|j| label.support_tuple(d, j)).collect();
        support.sort();
        expect.sort();
        prop_assert_eq!(&support, &expect);
        for (_, a) in s.nonzeros() {
            prop_assert!((a.norm() - 1.0 / f64::from(d).sqrt()).abs() < 1e-15);
        }
        // labels differing only in k share the support
        let other = ghz_spatial(sh, &GhzLabel::new(label.x.clone(), (label.k + 1) % d)).unwrap();
        let mut other_support: Vec<Vec<u32>> = other.nonzeros().map(|(i, _)| sh.decompose(i).0).collect();
        other_support.sort();
        prop_assert_eq!(support, other_support);
    }

    #[test]
    fn exhaustive_runs_decode_and_satisfy_constraint((sh, label) in shape_and_label()) {
        let d = sh.d();
        let records = run_exhaustive(sh, &label).unwrap();
        prop_assert_eq!(records.len() as u64, sh.register_dimension());
        let total: f64 = records.iter().map(|r| r.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        for r in &records {
            prop_assert_eq!(&r.decoded, &label);
            let sum: u32 = r.spatial_outcome.levels.iter().sum();
            prop_assert_eq!((sum + label.k) % d, 0);
        }
    }
}

#[test]
fn stage_order_independent_d3_n3() {
    let sh = SystemShape::new(3, 3).unwrap();
    for label in ghzsim_core::ghz::all_labels(sh).unwrap() {
        let a = joint_oam_first(sh, &label).unwrap();
        let b = joint_qft_first(sh, &label).unwrap();
        assert_eq!(a.len(), 27);
        assert!(a.keys().eq(b.keys()));
        for (pa, pb) in a.values().zip(b.values()) {
            assert!((pa - pb).abs() < 1e-12);
        }
    }
}
