use std::sync::Arc;

use proptest::prelude::*;
use vrsgd::diagnostics::finite_diff_grad;
use vrsgd::{
    parse_libsvm, synthetic, to_libsvm, Dataset, IndexSampler, LossKind, Objective, Regularizer, SamplingScheme,
};

fn sparse_rows() -> impl Strategy<Value = (usize, Vec<Vec<(usize, f64)>>, Vec<f64>)> {
    (1usize..12).prop_flat_map(|d| {
        let row = prop::collection::btree_map(0..d, -5.0f64..5.0, 0..=d)
            .prop_map(|m| m.into_iter().filter(|(_, v)| *v != 0.0).collect::<Vec<_>>());
        let rows = prop::collection::vec(row, 1..8);
        rows.prop_flat_map(move |rows| {
            let n = rows.len();
            (
                Just(d),
                Just(rows),
                prop::collection::vec(prop::sample::select(vec![-1.0, 1.0]), n),
            )
        })
    })
}

proptest! {
    #[test]
    fn libsvm_round_trip((d, rows, labels) in sparse_rows()) {
        let ds = Dataset::from_sparse(d, rows, labels).unwrap();
        let once = parse_libsvm(&to_libsvm(&ds), Some(d)).unwrap();
        let twice = parse_libsvm(&to_libsvm(&once), Some(d)).unwrap();
        prop_assert_eq!(&once, &ds);
        prop_assert_eq!(&twice, &once);
    }

    #[test]
    fn normalization_is_idempotent((d, rows, labels) in sparse_rows()) {
        let ds = Dataset::from_sparse(d, rows, labels).unwrap().normalize_rows();
        for &r in ds.row_norms() {
            prop_assert!(r == 0.0 || (r - 1.0).abs() <= 1e-12);
        }
        let again = ds.clone().normalize_rows();
        for (a, b) in ds.to_dense().iter().zip(again.to_dense()) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), n in 1usize..50, len in 1usize..200) {
        let draw = || {
            let mut s = IndexSampler::new(seed, &SamplingScheme::Uniform, n).unwrap();
            (0..len).map(|_| s.sample()).collect::<Vec<_>>()
        };
        let a = draw();
        prop_assert!(a.iter().all(|&i| i < n));
        prop_assert_eq!(a, draw());
    }
}

fn objectives() -> Vec<Objective> {
    let cls = Arc::new(synthetic::classification(25, 4, 31).unwrap().normalize_rows());
    let reg = Arc::new(synthetic::ridge(25, 4, 31).unwrap());
    vec![
        Objective::new(cls.clone(), LossKind::Logistic, Regularizer::L2(0.1)).unwrap(),
        Objective::new(cls, LossKind::Sigmoid, Regularizer::L2(0.1))
            .unwrap()
            .with_folded_l2(true),
        Objective::new(reg.clone(), LossKind::Squared, Regularizer::L2(0.1))
            .unwrap()
            .with_folded_l2(true),
        Objective::new(reg, LossKind::EigenQuadratic, Regularizer::None).unwrap(),
    ]
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn component_gradients_match_central_differences(x in point(), i in 0usize..25) {
        for obj in objectives() {
            let fd = finite_diff_grad(|p| obj.component_value(i, p), &x, 1e-6);
            let g = obj.component_gradient(i, &x);
            let err = fd.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-5, "{:?}: {}", obj, err);
        }
    }

    #[test]
    fn mean_of_components_is_the_smooth_gradient(x in point()) {
        for obj in objectives() {
            let n = obj.n_samples();
            let mut mean = vec![0.0; 4];
            for i in 0..n {
                obj.add_component_gradient(i, &x, 1.0 / n as f64, &mut mean);
            }
            let full = obj.smooth_gradient(&x);
            let scale = full.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
            let diff = mean.iter().zip(&full).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            prop_assert!(diff <= 1e-10 * scale);
        }
    }
}

#[test]
fn components_are_l_smooth() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for obj in objectives() {
        let l = obj.smoothness_constant();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let y: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let i = rng.random_range(0..obj.n_samples());
            let gx = obj.component_gradient(i, &x);
            let gy = obj.component_gradient(i, &y);
            let lhs = gx.iter().zip(&gy).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let dxy = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(lhs <= l * dxy * (1.0 + 1e-9), "{lhs} > {l} * {dxy}");
        }
    }
}

#[test]
fn strong_convexity_comes_from_the_l2_term() {
    let ds = Arc::new(synthetic::ridge(10, 3, 1).unwrap());
    let obj = Objective::new(
        ds.clone(),
        LossKind::Squared,
        Regularizer::ElasticNet { l2: 0.3, l1: 0.1 },
    )
    .unwrap();
    assert_eq!(obj.strong_convexity(), 0.3);
    let obj = Objective::new(ds, LossKind::Squared, Regularizer::L1(0.1)).unwrap();
    assert_eq!(obj.strong_convexity(), 0.0);
}
