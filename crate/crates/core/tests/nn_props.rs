use deeptop::nn::{Adam, Direction, Gradient, Mlp};
use deeptop::rng::StreamRng;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

/// Hidden pre-activations of a single sample, computed without the library.
fn hidden_preactivations(net: &Mlp, input: &[f64]) -> Vec<f64> {
    let sizes = net.layer_sizes();
    let mut x = input.to_vec();
    let mut out = Vec::new();
    for l in 0..net.num_layers() - 1 {
        let (w, b) = (net.weights(l), net.bias(l));
        let z: Vec<f64> = (0..sizes[l + 1])
            .map(|o| b[o] + (0..sizes[l]).map(|i| w[o * sizes[l] + i] * x[i]).sum::<f64>())
            .collect();
        out.extend(&z);
        x = z.iter().map(|v| v.max(0.0)).collect();
    }
    out
}

fn weighted_output(net: &Mlp, input: &[f64], weights: &[f64]) -> f64 {
    net.forward(input).iter().zip(weights).map(|(a, b)| a * b).sum()
}

fn fd_error(net: &Mlp, input: &[f64], weights: &[f64]) -> f64 {
    let h = 1e-6;
    let grad = net.backward(input, weights);
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for j in 0..net.params().len() {
        let orig = probe.params()[j];
        probe.params_mut()[j] = orig + h;
        let up = weighted_output(&probe, input, weights);
        probe.params_mut()[j] = orig - h;
        let down = weighted_output(&probe, input, weights);
        probe.params_mut()[j] = orig;
        let fd = (up - down) / (2.0 * h);
        let a = grad.values()[j];
        worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1.0));
    }
    worst
}

fn arb_sizes() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..6, 2..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn backprop_matches_finite_differences(sizes in arb_sizes(), seed in any::<u64>()) {
        let mut rng = StreamRng::seed_from_u64(seed);
        let net = Mlp::new(&sizes, &mut rng).unwrap();
        let input: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let weights: Vec<f64> = (0..net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        prop_assume!(hidden_preactivations(&net, &input).iter().all(|z| z.abs() >= 1e-4));
        prop_assert!(fd_error(&net, &input, &weights) <= 1e-5);
    }

    #[test]
    fn batched_backprop_is_sum_of_samples(sizes in arb_sizes(), seed in any::<u64>(), batch in 1usize..5) {
        let mut rng = StreamRng::seed_from_u64(seed);
        let net = Mlp::new(&sizes, &mut rng).unwrap();
        let inputs: Vec<f64> = (0..batch * sizes[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
        let og: Vec<f64> = (0..batch * net.output_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let acts = net.forward_batch(&inputs, batch);
        let total = net.backward_batch(&acts, &og);
        let mut sum = vec![0.0; net.params().len()];
        for b in 0..batch {
            let x = &inputs[b * sizes[0]..(b + 1) * sizes[0]];
            let g = &og[b * net.output_dim()..(b + 1) * net.output_dim()];
            for (s, v) in sum.iter_mut().zip(net.backward(x, g).values()) {
                *s += v;
            }
            prop_assert_eq!(&acts.output()[b * net.output_dim()..(b + 1) * net.output_dim()], &net.forward(x)[..]);
        }
        for (a, b) in total.values().iter().zip(&sum) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn adam_zero_gradient_keeps_parameters(sizes in arb_sizes(), seed in any::<u64>(), steps in 1usize..20) {
        let mut rng = StreamRng::seed_from_u64(seed);
        let mut net = Mlp::new(&sizes, &mut rng).unwrap();
        let before = net.clone();
        let zero = Gradient::zeros_like(&net);
        let mut opt = Adam::new(&net, 1e-3);
        for _ in 0..steps {
            opt.step(&mut net, &zero, Direction::Descend);
        }
        prop_assert_eq!(net, before);
    }

    #[test]
    fn soft_update_is_exact_blend(sizes in arb_sizes(), seed in any::<u64>(), tau in 0.0f64..=1.0) {
        let mut rng = StreamRng::seed_from_u64(seed);
        let source = Mlp::new(&sizes, &mut rng).unwrap();
        let mut target = Mlp::new(&sizes, &mut rng).unwrap();
        let old = target.clone();
        target.soft_update(&source, tau);
        for ((t, s), o) in target.params().iter().zip(source.params()).zip(old.params()) {
            prop_assert_eq!(*t, tau * s + (1.0 - tau) * o);
        }
    }

    #[test]
    fn forward_is_pure(sizes in arb_sizes(), seed in any::<u64>()) {
        let mut rng = StreamRng::seed_from_u64(seed);
        let net = Mlp::new(&sizes, &mut rng).unwrap();
        let before = net.clone();
        let input: Vec<f64> = (0..sizes[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
        let first = net.forward(&input);
        prop_assert_eq!(net.forward(&input), first);
        prop_assert_eq!(net, before);
    }

    #[test]
    fn checkpoint_round_trip(sizes in arb_sizes(), seed in any::<u64>()) {
        let mut rng = StreamRng::seed_from_u64(seed);
        let net = Mlp::new(&sizes, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        net.save(&path).unwrap();
        prop_assert_eq!(Mlp::load(&path).unwrap(), net);
    }
}

#[test]
fn initialization_respects_fan_in() {
    let mut rng = StreamRng::seed_from_u64(3);
    let net = Mlp::new(&[16, 9, 4], &mut rng).unwrap();
    for (l, fan_in) in [(0, 16.0f64), (1, 9.0)] {
        let limit = 1.0 / fan_in.sqrt();
        assert!(net.weights(l).iter().chain(net.bias(l)).all(|w| w.abs() <= limit));
    }
}
