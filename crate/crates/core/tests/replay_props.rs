use deeptop::replay::{ReplayMemory, Transition};
use deeptop::rng::StreamRng;
use deeptop::Action;
use proptest::prelude::*;
use rand::SeedableRng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn numbered(k: usize) -> Transition<usize> {
    Transition {
        state: k,
        action: Action::from_bool(k % 2 == 0),
        reward: k as f64,
        next_state: k + 1,
    }
}

proptest! {
    #[test]
    fn ring_keeps_the_latest(capacity in 1usize..50, pushes in 0usize..200) {
        let mut memory = ReplayMemory::new(capacity);
        for k in 1..=pushes {
            memory.push(numbered(k));
        }
        prop_assert_eq!(memory.len(), pushes.min(capacity));
        let kept: Vec<usize> = memory.iter_chronological().map(|t| t.state).collect();
        let first = pushes.saturating_sub(capacity) + 1;
        prop_assert_eq!(kept, (first..=pushes).collect::<Vec<_>>());
    }

    #[test]
    fn samples_come_from_memory(capacity in 1usize..30, pushes in 1usize..80, batch in 1usize..40, seed in any::<u64>()) {
        let mut memory = ReplayMemory::new(capacity);
        for k in 1..=pushes {
            memory.push(numbered(k));
        }
        let mut rng = StreamRng::seed_from_u64(seed);
        if batch > memory.len() {
            prop_assert!(memory.sample(batch, &mut rng).is_err());
        } else {
            let sample = memory.sample(batch, &mut rng).unwrap();
            prop_assert_eq!(sample.len(), batch);
            let first = pushes.saturating_sub(capacity) + 1;
            prop_assert!(sample.iter().all(|t| (first..=pushes).contains(&t.state)));
        }
    }
}

#[test]
fn sampling_is_uniform() {
    let size = 50;
    let mut memory = ReplayMemory::new(size);
    for k in 0..size {
        memory.push(numbered(k));
    }
    let mut rng = StreamRng::seed_from_u64(11);
    let mut counts = vec![0usize; size];
    let draws = 100_000;
    for _ in 0..draws / 50 {
        for i in memory.sample_indices(50, &mut rng).unwrap() {
            counts[i] += 1;
        }
    }
    let expected = draws as f64 / size as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new((size - 1) as f64).unwrap().inverse_cdf(1.0 - 0.001);
    assert!(stat < critical, "chi-square {stat} exceeds {critical}");
}
