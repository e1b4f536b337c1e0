#![allow(dead_code)]

use bncritic::corpus::{standard_corpus, CorpusEntry};
use bncritic::infer::joint_enumerate;
use bncritic::network::{config_index, config_states, Network};
use bncritic::seed;

pub fn corpus() -> Vec<CorpusEntry> {
    standard_corpus()
}

/// Exact joint over the observables, row-major in declaration order.
pub struct ObservableJoint {
    pub cards: Vec<usize>,
    pub p: Vec<f64>,
}

impl ObservableJoint {
    pub fn of(net: &Network) -> Self {
        let joint = joint_enumerate(net).unwrap();
        let vars = net.observable_indices();
        let cards = net.observables().map(|v| v.cardinality()).collect();
        ObservableJoint {
            cards,
            p: joint.marginal(&vars),
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.p
            .iter()
            .enumerate()
            .map(|(i, &p)| (config_states(i, &self.cards), p))
    }

    /// `p(X_k | every other observable in row)` by direct summation.
    pub fn loo(&self, row: &[usize], k: usize) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.cards[k])
            .map(|s| {
                let mut r = row.to_vec();
                r[k] = s;
                self.p[config_index(&r, &self.cards)]
            })
            .collect();
        let z: f64 = out.iter().sum();
        out.iter_mut().for_each(|v| *v /= z);
        out
    }
}

/// Seeded uniformly random observable assignments.
pub fn random_rows(net: &Network, count: usize, seed_value: u64) -> Vec<Vec<usize>> {
    let cards: Vec<usize> = net.observables().map(|v| v.cardinality()).collect();
    let mut rng = seed::stream(seed_value, 0);
    (0..count)
        .map(|_| cards.iter().map(|&c| seed::index(&mut rng, c)).collect())
        .collect()
}

/// Ranked probability score in its cumulative form:
/// `1 − (1/(K−1)) Σ_{i<K} (C_i − O_i)²` with `C` the cumulative forecast
/// and `O_i = 1` once the observation has been reached.
pub fn rps_cumulative(p: &[f64], j: usize) -> f64 {
    let k = p.len();
    let mut c = 0.0;
    let mut total = 0.0;
    for (i, &pi) in p.iter().enumerate().take(k - 1) {
        c += pi;
        let o = if i >= j { 1.0 } else { 0.0 };
        total += (c - o) * (c - o);
    }
    1.0 - total / (k - 1) as f64
}

pub fn weaver_direct(p: &[f64], j: usize) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>() / p[j]
}

pub fn goodlog_direct(p: &[f64], j: usize, x: &[f64]) -> f64 {
    let b: f64 = x.iter().filter(|&&v| v > 0.0).map(|&v| -v * v.ln()).sum();
    let mut m = 0;
    for i in 0..p.len() {
        if p[i] > p[m] {
            m = i;
        }
    }
    if j == m {
        (b * p[m]).ln()
    } else {
        (b * (1.0 - p[m])).ln()
    }
}

/// Expected ranked probability score of observable `k` under `truth` when
/// `posited` supplies the leave-one-out forecasts.
pub fn expected_rps(truth: &ObservableJoint, posited: &ObservableJoint, k: usize) -> f64 {
    truth
        .rows()
        .map(|(row, p)| p * rps_cumulative(&posited.loo(&row, k), row[k]))
        .sum()
}

/// Mean total-variation distance between the two models' leave-one-out
/// forecasts of observable `k`, averaged over `truth`.
pub fn mean_loo_tv(truth: &ObservableJoint, other: &ObservableJoint, k: usize) -> f64 {
    truth
        .rows()
        .map(|(row, p)| {
            let a = truth.loo(&row, k);
            let b = other.loo(&row, k);
            p * 0.5 * a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>()
        })
        .sum()
}
