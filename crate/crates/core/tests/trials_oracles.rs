mod common;

use common::brute_force_eer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wordmask::pipeline::synth::utterance_ids;
use wordmask::trials::{enumerate_trials_by_id, eer, trial_counts, TrialMode};

fn random_scores(rng: &mut ChaCha8Rng) -> Vec<(f64, bool)> {
    let n = rng.random_range(2..=200);
    let quantize = rng.random_bool(0.3);
    let shift = rng.random_range(0.0..2.0);
    let mut v: Vec<(f64, bool)> = (0..n)
        .map(|_| {
            let tgt = rng.random_bool(0.4);
            let mut s: f64 = rng.random_range(-1.0..1.0) + if tgt { shift } else { 0.0 };
            if quantize {
                s = (s * 10.0).round() / 10.0;
            }
            (s, tgt)
        })
        .collect();
    v[0].1 = true;
    v[1].1 = false;
    v
}

#[test]
fn sweep_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..500 {
        let s = random_scores(&mut rng);
        let fast = eer(&s).unwrap().eer;
        let slow = brute_force_eer(&s);
        assert!((fast - slow).abs() < 1e-9, "case {case}: {fast} vs {slow}");
        assert!((0.0..=1.0).contains(&fast));
    }
}

#[test]
fn separation_and_chance_fixtures() {
    let sep: Vec<(f64, bool)> = (0..50).map(|i| (i as f64, i >= 25)).collect();
    assert_eq!(eer(&sep).unwrap().eer, 0.0);
    let chance: Vec<(f64, bool)> = (0..50).flat_map(|i| [(i as f64, true), (i as f64, false)]).collect();
    assert_eq!(eer(&chance).unwrap().eer, 0.5);
    let all_equal: Vec<(f64, bool)> = (0..10).map(|i| (0.3, i % 2 == 0)).collect();
    assert_eq!(eer(&all_equal).unwrap().eer, 0.5);
}

#[test]
fn eer_invariant_under_increasing_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..100 {
        let s = random_scores(&mut rng);
        let a = rng.random_range(0.1..5.0);
        let b = rng.random_range(-3.0..3.0);
        let c = rng.random_range(0.0..2.0);
        let f = |x: f64| a * x + b + c * (x * 0.7).tanh() + 0.01 * x.powi(3);
        let t: Vec<(f64, bool)> = s.iter().map(|&(x, l)| (f(x), l)).collect();
        let e0 = eer(&s).unwrap().eer;
        let e1 = eer(&t).unwrap().eer;
        assert!((e0 - e1).abs() < 1e-12, "case {case}: {e0} vs {e1}");
    }
}

#[test]
fn single_class_is_rejected() {
    assert!(eer(&[(0.1, true), (0.2, true)]).is_err());
    assert!(eer(&[(f64::NAN, true), (0.2, false)]).is_err());
}

#[test]
fn ordered_trials_on_constructed_corpus() {
    // 68 utterances from 9 speakers with sum m(m-1) = 460
    let counts = [4, 8, 8, 8, 8, 8, 8, 8, 8];
    let ids = utterance_ids(&counts);
    assert_eq!(ids.len(), 68);
    let trials = enumerate_trials_by_id(ids.iter().map(|(u, s)| (u.as_str(), s.as_str())), TrialMode::Ordered).unwrap();
    assert_eq!(trial_counts(&trials), (460, 4096));
    let unordered =
        enumerate_trials_by_id(ids.iter().map(|(u, s)| (u.as_str(), s.as_str())), TrialMode::Unordered).unwrap();
    assert_eq!(trial_counts(&unordered), (230, 2048));
}

#[test]
fn unordered_identity_on_random_corpora() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n_spk = rng.random_range(1..12);
        let counts: Vec<usize> = (0..n_spk).map(|_| rng.random_range(1..9)).collect();
        let ids = utterance_ids(&counts);
        let n = ids.len();
        if n < 2 {
            continue;
        }
        let trials =
            enumerate_trials_by_id(ids.iter().map(|(u, s)| (u.as_str(), s.as_str())), TrialMode::Unordered).unwrap();
        let (t, nt) = trial_counts(&trials);
        assert_eq!(t + nt, n * (n - 1) / 2);
        assert_eq!(t, counts.iter().map(|m| m * (m - 1) / 2).sum::<usize>());
    }
}
