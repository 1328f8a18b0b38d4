use atd3_nn::{Activation, Adam, AdamConfig, DenseLayer, GruCell, Tensor2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn gru_hidden_state_stays_inside_unit_interval(
        seed in 0u64..1000,
        xs in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 1..12),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cell = GruCell::new(3, 4, &mut rng);
        let mut h = Tensor2::zeros(1, 4);
        for x in &xs {
            h = cell.step(&Tensor2::row_vector(x), &h).unwrap();
            prop_assert!(h.data().iter().all(|v| v.abs() < 1.0), "hidden {:?}", h.data());
        }
    }

    #[test]
    fn saturated_gru_never_leaves_closed_unit_interval(
        seed in 0u64..1000,
        xs in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 3), 1..12),
    ) {
        // tanh rounds to exactly +-1 in floating point once saturated
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cell = GruCell::new(3, 4, &mut rng);
        cell.w_input.scale(5.0);
        cell.w_hidden_candidate.scale(5.0);
        let mut h = Tensor2::zeros(1, 4);
        for x in &xs {
            h = cell.step(&Tensor2::row_vector(x), &h).unwrap();
            prop_assert!(h.is_finite() && h.max_abs() <= 1.0);
        }
    }

    #[test]
    fn forward_passes_are_bit_identical(seed in 0u64..1000, x in prop::collection::vec(-3.0f64..3.0, 4)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layer = DenseLayer::new(4, 5, Activation::Tanh, &mut rng);
        let cell = GruCell::new(4, 3, &mut rng);
        let input = Tensor2::row_vector(&x);
        let a = layer.forward(&input).unwrap();
        let b = layer.forward(&input).unwrap();
        prop_assert_eq!(a.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        b.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let s1 = cell.forward_sequence(&[input.clone(), input.clone()]).unwrap();
        let s2 = cell.forward_sequence(&[input.clone(), input]).unwrap();
        prop_assert_eq!(s1, s2);
    }

    #[test]
    fn adam_with_zero_gradient_is_identity(values in prop::collection::vec(-10.0f64..10.0, 1..8), steps in 1usize..10) {
        let mut p = Tensor2::row_vector(&values);
        let before = p.clone();
        let mut adam = Adam::new(AdamConfig::default(), &[&p]);
        for _ in 0..steps {
            adam.step(vec![&mut p], &[Tensor2::zeros(1, values.len())]).unwrap();
        }
        prop_assert_eq!(p, before);
    }
}
