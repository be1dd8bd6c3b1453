use rand::Rng;
use rand::SeedableRng;

use super::*;
use crate::matrix::Matrix;
use crate::Prng;

fn net_from(layers: Vec<Layer>) -> DenseNet {
    DenseNet::from_layers(layers).unwrap()
}

fn random_net(dims: &[usize], acts: &[Activation], seed: u64) -> DenseNet {
    let mut rng = Prng::seed_from_u64(seed);
    DenseNet::glorot(dims, acts, &mut rng).unwrap()
}

fn random_batch(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = Prng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

#[test]
fn forward_identity_layer_passes_input_through() {
    let net = net_from(vec![Layer {
        in_dim: 2,
        out_dim: 2,
        activation: Activation::Identity,
        weights: vec![1.0, 0.0, 0.0, 1.0],
        biases: vec![0.0, 0.0],
    }]);
    let batch = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
    let out = net.forward(&batch).unwrap();
    assert_eq!(out.row(0), &[1.0, 2.0]);
}

#[test]
fn forward_tanh_output_stays_in_open_unit_interval() {
    let net = random_net(&[4, 8, 3], &[Activation::Relu, Activation::Tanh], 7);
    let batch = random_batch(32, 4, 8);
    let out = net.forward(&batch).unwrap();
    for r in 0..out.rows() {
        for &v in out.row(r) {
            assert!(v > -1.0 && v < 1.0, "tanh output out of range: {v}");
        }
    }
}

#[test]
fn forward_two_layer_relu_matches_hand_computation() {
    // Layer 1: z = W1 (1,-1) + b1 = (0.5, -1.75), relu -> (0.5, 0).
    // Layer 2: 2*0.5 + 3*0 + 0.25 = 1.25. All values dyadic, so exact.
    let net = net_from(vec![
        Layer {
            in_dim: 2,
            out_dim: 2,
            activation: Activation::Relu,
            weights: vec![1.0, 2.0, -1.0, 0.5],
            biases: vec![1.5, -0.25],
        },
        Layer {
            in_dim: 2,
            out_dim: 1,
            activation: Activation::Identity,
            weights: vec![2.0, 3.0],
            biases: vec![0.25],
        },
    ]);
    let batch = Matrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
    let out = net.forward(&batch).unwrap();
    assert_eq!(out.get(0, 0), 1.25);
}

#[test]
fn forward_rejects_dimension_mismatch_and_non_finite_input() {
    let net = random_net(&[3, 2], &[Activation::Identity], 1);
    let wrong = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
    assert!(matches!(net.forward(&wrong), Err(Error::Schema(_))));

    let bad = Matrix::from_rows(&[vec![1.0, f64::NAN, 0.0]]).unwrap();
    assert!(matches!(net.forward(&bad), Err(Error::Numeric(_))));
}

#[test]
fn per_example_gradient_of_singleton_batch_equals_batch_gradient() {
    let net = random_net(&[3, 5, 2], &[Activation::Tanh, Activation::Identity], 11);
    let batch = random_batch(1, 3, 12);
    let trace = net.forward_traced(&batch).unwrap();
    let d_out = Matrix::from_rows(&[vec![0.3, -0.7]]).unwrap();
    let per = net.backward_per_example(&trace, &d_out).unwrap();
    let whole = net.backward_batch(&trace, &d_out).unwrap();
    assert_eq!(per.len(), 1);
    assert_eq!(per[0], whole);
}

#[test]
fn duplicated_example_yields_identical_per_example_gradients() {
    let net = random_net(&[3, 4, 2], &[Activation::Sigmoid, Activation::Identity], 13);
    let row = vec![0.2, -0.4, 0.9];
    let batch = Matrix::from_rows(&[row.clone(), row]).unwrap();
    let trace = net.forward_traced(&batch).unwrap();
    let d_out = Matrix::from_rows(&[vec![1.0, -0.5], vec![1.0, -0.5]]).unwrap();
    let per = net.backward_per_example(&trace, &d_out).unwrap();
    assert_eq!(per[0], per[1]);
}

#[test]
fn linear_regression_gradients_match_closed_form() {
    // One weight w = 0.5, squared per-example loss (wx - y)^2:
    // d/dw = 2 (wx - y) x, d/db = 2 (wx - y). Dyadic fixture, exact compare.
    let w = 0.5;
    let net = net_from(vec![Layer {
        in_dim: 1,
        out_dim: 1,
        activation: Activation::Identity,
        weights: vec![w],
        biases: vec![0.0],
    }]);
    let xs = [1.0, 2.0, -1.0];
    let ys = [0.25, 1.0, 0.5];
    let batch = Matrix::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap();
    let trace = net.forward_traced(&batch).unwrap();
    let d_out = Matrix::from_rows(
        &xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| vec![2.0 * (w * x - y)])
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let per = net.backward_per_example(&trace, &d_out).unwrap();
    for ((g, &x), &y) in per.iter().zip(&xs).zip(&ys) {
        assert_eq!(g.layers[0].weights[0], 2.0 * (w * x - y) * x);
        assert_eq!(g.layers[0].biases[0], 2.0 * (w * x - y));
    }
}

#[test]
fn backward_without_matching_trace_is_a_state_error() {
    let net = random_net(&[2, 2], &[Activation::Identity], 3);
    let trace = net.forward_traced(&random_batch(4, 2, 4)).unwrap();
    let d_out = Matrix::zeros(3, 2);
    assert!(matches!(
        net.backward_per_example(&trace, &d_out),
        Err(Error::State(_))
    ));
}

#[test]
fn mean_of_per_example_gradients_matches_batch_gradient() {
    let net = random_net(
        &[4, 8, 8, 2],
        &[Activation::Relu, Activation::Tanh, Activation::Identity],
        21,
    );
    let batch = random_batch(16, 4, 22);
    let trace = net.forward_traced(&batch).unwrap();
    let targets = random_batch(16, 2, 23);
    let loss = MseLoss { targets };
    let d_out = loss.grad(trace.outputs());

    let whole = net.backward_batch(&trace, &d_out).unwrap();

    // Per-example gradients of the unscaled per-example losses.
    let mut d_unscaled = d_out.clone();
    for r in 0..d_unscaled.rows() {
        for c in 0..d_unscaled.cols() {
            d_unscaled.set(r, c, d_unscaled.get(r, c) * batch.rows() as f64);
        }
    }
    let per = net.backward_per_example(&trace, &d_unscaled).unwrap();
    let mut mean = GradientSet::zeros_like(&net);
    for g in &per {
        mean.add_assign(g);
    }
    mean.scale(1.0 / batch.rows() as f64);

    for (a, b) in mean.layers.iter().zip(&whole.layers) {
        for (x, y) in a
            .weights
            .iter()
            .chain(a.biases.iter())
            .zip(b.weights.iter().chain(b.biases.iter()))
        {
            let rel = (x - y).abs() / (y.abs() + 1e-12);
            assert!(rel < 1e-6, "per-example mean deviates: {x} vs {y}");
        }
    }
}

#[test]
fn finite_differences_confirm_backprop_on_smooth_net() {
    let net = random_net(
        &[3, 6, 4, 2],
        &[Activation::Tanh, Activation::Sigmoid, Activation::Identity],
        31,
    );
    let batch = random_batch(5, 3, 32);
    let targets = random_batch(5, 2, 33);
    let dev = finite_difference_check(&net, &batch, &MseLoss { targets }, 1e-4).unwrap();
    assert!(dev < 1e-3, "max relative deviation {dev}");
}

#[test]
fn finite_differences_confirm_backprop_on_relu_net() {
    // Random probe points; relu kinks have measure zero and these seeds
    // stay away from them.
    let net = random_net(&[4, 8, 3], &[Activation::Relu, Activation::Identity], 41);
    let batch = random_batch(6, 4, 42);
    let targets = random_batch(6, 3, 43);
    let dev = finite_difference_check(&net, &batch, &MseLoss { targets }, 1e-4).unwrap();
    assert!(dev < 1e-3, "max relative deviation {dev}");
}

struct ZeroLoss;

impl BatchLoss for ZeroLoss {
    fn value(&self, _outputs: &Matrix) -> f64 {
        0.0
    }
    fn grad(&self, outputs: &Matrix) -> Matrix {
        Matrix::zeros(outputs.rows(), outputs.cols())
    }
}

#[test]
fn finite_difference_of_constant_loss_is_zero() {
    let net = random_net(&[2, 3, 1], &[Activation::Tanh, Activation::Identity], 51);
    let batch = random_batch(3, 2, 52);
    let dev = finite_difference_check(&net, &batch, &ZeroLoss, 1e-4).unwrap();
    assert_eq!(dev, 0.0);
}

#[test]
fn zero_gradient_leaves_parameters_unchanged() {
    for kind in [OptimizerKind::rmsprop(), OptimizerKind::adam()] {
        let mut net = random_net(&[2, 3, 1], &[Activation::Tanh, Activation::Identity], 61);
        let before = net.clone();
        let mut opt = Optimizer::new(kind, 0.01, &net);
        let zero = GradientSet::zeros_like(&net);
        opt.step(&mut net, &zero).unwrap();
        assert_eq!(net, before);
        assert_eq!(opt.step_count(), 1);
    }
}

#[test]
fn rmsprop_first_step_matches_expanded_recurrence() {
    // acc = (1 - rho) g^2, so the update is lr*g / (sqrt(1-rho)*|g| + eps).
    let mut net = net_from(vec![Layer {
        in_dim: 1,
        out_dim: 1,
        activation: Activation::Identity,
        weights: vec![0.0],
        biases: vec![0.0],
    }]);
    let g = 0.5;
    let lr = 0.01;
    let mut opt = Optimizer::new(OptimizerKind::RmsProp { decay: 0.9 }, lr, &net);
    let grads = GradientSet {
        layers: vec![ParamBlock {
            weights: vec![g],
            biases: vec![0.0],
        }],
    };
    opt.step(&mut net, &grads).unwrap();
    let expected = lr * g / ((0.1_f64).sqrt() * g + optimizer::NUMERIC_EPS);
    let moved = -net.layers()[0].weights[0];
    assert!((moved - expected).abs() / expected < 1e-12);
}

#[test]
fn repeated_gradient_shrinks_rmsprop_step() {
    let mut net = net_from(vec![Layer {
        in_dim: 1,
        out_dim: 1,
        activation: Activation::Identity,
        weights: vec![0.0],
        biases: vec![0.0],
    }]);
    let mut opt = Optimizer::new(OptimizerKind::rmsprop(), 0.01, &net);
    let grads = GradientSet {
        layers: vec![ParamBlock {
            weights: vec![0.5],
            biases: vec![0.0],
        }],
    };
    opt.step(&mut net, &grads).unwrap();
    let first = net.layers()[0].weights[0].abs();
    let w_after_first = net.layers()[0].weights[0];
    opt.step(&mut net, &grads).unwrap();
    let second = (net.layers()[0].weights[0] - w_after_first).abs();
    assert!(second < first, "second step {second} not below first {first}");
}

#[test]
fn optimizer_rejects_mismatched_shapes() {
    let mut net = random_net(&[2, 2], &[Activation::Identity], 71);
    let other = random_net(&[3, 2], &[Activation::Identity], 72);
    let mut opt = Optimizer::new(OptimizerKind::adam(), 0.01, &net);
    let grads = GradientSet::zeros_like(&other);
    assert!(matches!(
        opt.step(&mut net, &grads),
        Err(Error::Schema(_))
    ));
}

#[test]
fn clip_weights_clamps_and_preserves_inner_values() {
    let mut net = net_from(vec![Layer {
        in_dim: 2,
        out_dim: 1,
        activation: Activation::Identity,
        weights: vec![0.015, -0.5],
        biases: vec![0.005],
    }]);
    net.clip_weights(0.01).unwrap();
    assert_eq!(net.layers()[0].weights, vec![0.01, -0.01]);
    assert_eq!(net.layers()[0].biases, vec![0.005]);

    let before = net.clone();
    net.clip_weights(0.01).unwrap();
    assert_eq!(net, before);

    assert!(matches!(net.clip_weights(0.0), Err(Error::Config(_))));
}

#[test]
fn seeded_training_is_bitwise_reproducible() {
    let run = || {
        let mut net = random_net(&[3, 8, 2], &[Activation::Tanh, Activation::Identity], 81);
        let mut opt = Optimizer::new(OptimizerKind::adam(), 1e-3, &net);
        let batch = random_batch(8, 3, 82);
        let targets = random_batch(8, 2, 83);
        let loss = MseLoss { targets };
        for _ in 0..50 {
            let trace = net.forward_traced(&batch).unwrap();
            let d_out = loss.grad(trace.outputs());
            let grads = net.backward_batch(&trace, &d_out).unwrap();
            opt.step(&mut net, &grads).unwrap();
        }
        net
    };
    assert_eq!(run(), run());
}

#[test]
fn gradient_flat_round_trip() {
    let net = random_net(&[3, 5, 2], &[Activation::Relu, Activation::Identity], 91);
    let batch = random_batch(4, 3, 92);
    let trace = net.forward_traced(&batch).unwrap();
    let d_out = random_batch(4, 2, 93);
    let g = net.backward_batch(&trace, &d_out).unwrap();
    let flat = g.to_flat();
    assert_eq!(flat.len(), net.param_count());
    let back = GradientSet::from_flat(&net, &flat).unwrap();
    assert_eq!(back, g);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn backprop_matches_finite_differences(seed in 0u64..1000) {
            let net = random_net(
                &[3, 5, 2],
                &[Activation::Tanh, Activation::Identity],
                seed,
            );
            let batch = random_batch(4, 3, seed.wrapping_add(1));
            let targets = random_batch(4, 2, seed.wrapping_add(2));
            let dev =
                finite_difference_check(&net, &batch, &MseLoss { targets }, 1e-4).unwrap();
            prop_assert!(dev < 1e-3, "deviation {}", dev);
        }

        #[test]
        fn clip_bounds_max_norm_exactly(seed in 0u64..1000, bound in 1e-3f64..0.5) {
            let mut net = random_net(&[4, 6, 2], &[Activation::Relu, Activation::Identity], seed);
            net.clip_weights(bound).unwrap();
            prop_assert!(net.max_abs_param() <= bound);
        }
    }
}
