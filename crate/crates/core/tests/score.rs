mod common;

use approx::assert_abs_diff_eq;
use bncritic::score::{
    good_log_score, modal_state, ranked_probability_score, score, weaver_surprise, BaselineMarginals, ScoreKind,
};
use common::{goodlog_direct, rps_cumulative, weaver_direct};
use proptest::prelude::*;

const SKEWED: [f64; 4] = [0.9, 0.05, 0.03, 0.02];

#[test]
fn weaver_examples() {
    // (0.81 + 0.0025 + 0.0009 + 0.0004) / p_obs
    assert_abs_diff_eq!(weaver_surprise(&SKEWED, 0).unwrap(), 0.8138 / 0.9, epsilon = 1e-12);
    assert_abs_diff_eq!(weaver_surprise(&SKEWED, 0).unwrap(), 0.904222, epsilon = 1e-6);
    assert_abs_diff_eq!(weaver_surprise(&SKEWED, 3).unwrap(), 40.69, epsilon = 1e-6);
    for j in 0..4 {
        assert_abs_diff_eq!(weaver_surprise(&[0.25; 4], j).unwrap(), 1.0, epsilon = 1e-15);
    }
}

#[test]
fn good_log_examples() {
    let x2 = BaselineMarginals::new(vec![0.5, 0.5]).unwrap();
    assert_abs_diff_eq!(good_log_score(&[1.0, 0.0], 0, &x2).unwrap(), 2f64.ln().ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(good_log_score(&[1.0, 0.0], 0, &x2).unwrap(), -0.36651, epsilon = 1e-5);
    let x4 = BaselineMarginals::new(vec![0.25; 4]).unwrap();
    assert_abs_diff_eq!(good_log_score(&[0.25; 4], 0, &x4).unwrap(), (4f64.ln() * 0.25).ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(good_log_score(&[0.25; 4], 0, &x4).unwrap(), -1.05966, epsilon = 1e-5);
    let point = BaselineMarginals::new(vec![1.0, 0.0]).unwrap();
    assert_eq!(good_log_score(&[0.5, 0.5], 0, &point).unwrap_err().code(), "DEGENERATE_BASELINE");
}

#[test]
fn good_log_hit_and_miss_use_modal_probability() {
    let x4 = BaselineMarginals::new(vec![0.25; 4]).unwrap();
    let hit = good_log_score(&SKEWED, 0, &x4).unwrap();
    let miss = good_log_score(&SKEWED, 2, &x4).unwrap();
    assert_abs_diff_eq!(hit, (4f64.ln() * 0.9).ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(miss, (4f64.ln() * 0.1).ln(), epsilon = 1e-12);
    assert_eq!(miss, good_log_score(&SKEWED, 3, &x4).unwrap());
}

#[test]
fn rps_examples() {
    assert_abs_diff_eq!(ranked_probability_score(&[1.0, 0.0], 0).unwrap(), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(ranked_probability_score(&[0.0, 1.0], 0).unwrap(), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(ranked_probability_score(&[0.25; 4], 0).unwrap(), rps_cumulative(&[0.25; 4], 0), epsilon = 1e-12);
    assert_abs_diff_eq!(ranked_probability_score(&[0.25; 4], 0).unwrap(), 0.708333, epsilon = 1e-6);
    assert_eq!(ranked_probability_score(&[1.0], 0).unwrap_err().code(), "SINGLE_STATE");
}

#[test]
fn rps_is_order_sensitive() {
    // Swapping the two outer states moves mass next to the observation.
    let p = [0.5, 0.0, 0.5];
    let q = [0.5, 0.5, 0.0];
    let a = ranked_probability_score(&p, 0).unwrap();
    let b = ranked_probability_score(&q, 0).unwrap();
    assert!((a - b).abs() > 0.1, "{a} vs {b}");
}

#[test]
fn dispatch_matches_kernels() {
    let x = BaselineMarginals::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
    assert_eq!(score(ScoreKind::WeaverSurprise, &SKEWED, 2, None).unwrap(), weaver_surprise(&SKEWED, 2).unwrap());
    assert_eq!(
        score(ScoreKind::GoodLog, &SKEWED, 2, Some(&x)).unwrap(),
        good_log_score(&SKEWED, 2, &x).unwrap()
    );
    assert_eq!(
        score(ScoreKind::RankedProbability, &SKEWED, 2, None).unwrap(),
        ranked_probability_score(&SKEWED, 2).unwrap()
    );
}

fn simplex(max_k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, 2..=max_k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn simplex_pair(max_k: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2..=max_k).prop_flat_map(|k| (simplex_exact(k), simplex_exact(k)))
}

fn simplex_exact(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

fn simplex_with_state(max_k: usize) -> impl Strategy<Value = (Vec<f64>, usize)> {
    simplex(max_k).prop_flat_map(|p| {
        let k = p.len();
        (Just(p), 0..k)
    })
}

proptest! {
    #[test]
    fn rps_matches_cumulative_form((p, j) in simplex_with_state(7)) {
        let a = ranked_probability_score(&p, j).unwrap();
        prop_assert!((a - rps_cumulative(&p, j)).abs() < 1e-12);
    }

    #[test]
    fn rps_in_unit_interval((p, j) in simplex_with_state(7)) {
        let s = ranked_probability_score(&p, j).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&s));
        prop_assert!(s < 1.0, "non-degenerate forecast scored 1");
    }

    #[test]
    fn rps_point_mass_distance((k, m) in (2usize..8).prop_flat_map(|k| (Just(k), 0..k))) {
        let mut p = vec![0.0; k];
        p[m] = 1.0;
        prop_assert!((ranked_probability_score(&p, m).unwrap() - 1.0).abs() < 1e-15);
        let mut by_distance: Vec<(usize, f64)> = (0..k)
            .map(|j| (m.abs_diff(j), ranked_probability_score(&p, j).unwrap()))
            .collect();
        by_distance.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in by_distance.windows(2) {
            if w[1].0 > w[0].0 {
                prop_assert!(w[1].1 <= w[0].1 + 1e-15);
            }
        }
        for j in 0..k {
            if j != m {
                prop_assert!(ranked_probability_score(&p, j).unwrap() < 1.0);
            }
        }
    }

    #[test]
    fn weaver_matches_definition((p, j) in simplex_with_state(7)) {
        let a = weaver_surprise(&p, j).unwrap();
        prop_assert!((a - weaver_direct(&p, j)).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn weaver_rarity_vs_surprise((p, j) in simplex_with_state(7)) {
        let expected: f64 = p.iter().map(|x| x * x).sum();
        let d = modal_state(&p);
        prop_assert!(weaver_surprise(&p, d).unwrap() <= 1.0 + 1e-12);
        if p[j] < expected {
            prop_assert!(weaver_surprise(&p, j).unwrap() > 1.0);
        }
    }

    #[test]
    fn good_log_matches_definition(((p, x), j) in simplex_pair(6).prop_flat_map(|(p, x)| {
        let k = p.len();
        (Just((p, x)), 0..k)
    })) {
        let base = BaselineMarginals::new(x.clone()).unwrap();
        let a = good_log_score(&p, j, &base).unwrap();
        prop_assert!((a - goodlog_direct(&p, j, &x)).abs() < 1e-12);
    }

    #[test]
    fn good_log_hit_beats_miss((mut p, x) in simplex_pair(6)) {
        // Concentrate mass on the first state.
        p[0] += 1.0;
        p.iter_mut().for_each(|v| *v /= 2.0);
        let m = modal_state(&p);
        let base = BaselineMarginals::new(x).unwrap();
        let hit = good_log_score(&p, m, &base).unwrap();
        let miss = good_log_score(&p, (m + 1) % p.len(), &base).unwrap();
        prop_assert!(hit > miss);
    }

    #[test]
    fn weaver_and_good_log_are_permutation_invariant(
        (p, j) in simplex_with_state(6),
        seed in any::<u64>(),
    ) {
        let k = p.len();
        let x: Vec<f64> = vec![1.0 / k as f64; k];
        // Fisher-Yates driven by the proptest seed.
        let mut perm: Vec<usize> = (0..k).collect();
        let mut s = seed;
        for i in (1..k).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        // Keep the modal state unique so ties cannot move it.
        let m = modal_state(&p);
        prop_assume!(p.iter().enumerate().all(|(i, &v)| i == m || v < p[m] - 1e-9));
        let pp: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
        let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let jp = perm.iter().position(|&i| i == j).unwrap();
        let w0 = weaver_surprise(&p, j).unwrap();
        let w1 = weaver_surprise(&pp, jp).unwrap();
        prop_assert!((w0 - w1).abs() <= 1e-12 * w0.max(1.0));
        let g0 = good_log_score(&p, j, &BaselineMarginals::new(x).unwrap()).unwrap();
        let g1 = good_log_score(&pp, jp, &BaselineMarginals::new(xp).unwrap()).unwrap();
        prop_assert!((g0 - g1).abs() < 1e-12);
    }
}
