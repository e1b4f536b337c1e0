//! Model criticism: score matrices, node and global measures, bootstrap
//! null bands and significance flags.
//!
//! For a posited network and a dataset, every cell `(i, k)` of a
//! [`ScoreMatrix`] scores the leave-one-out predictive of observable `k`
//! given the rest of row `i`. Column means are node measures; the mean of
//! the per-simulee row means is the global measure.
//!
//! The null distribution of each measure at sample size `n` comes from a
//! pool of `cfg.pool` rows simulated under the posited network. Each
//! replicate resamples `n` pool rows with replacement and recomputes the
//! measures. Because a row's scores depend only on the row, the pool is
//! scored once and replicates average precomputed rows.

mod report;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::infer::{Engine, InferError, PredictiveDistribution};
use crate::network::Network;
use crate::sample::{self, Dataset, Provenance, SampleError};
use crate::score::{self, BaselineMarginals, ScoreError, ScoreKind};
use crate::seed::{self, tag, Seed};

pub use report::{plot_csv, summary_table, SummaryRow};

/// Nominal test level of the critical bands.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum CriticError {
    #[error("EMPTY_MATRIX: no rows to aggregate")]
    EmptyMatrix,
    #[error("INSUFFICIENT_ROWS: sample size {needed} requested, observed data has {available} rows")]
    InsufficientRows { needed: usize, available: usize },
    #[error("INVALID_CONFIG: {0}")]
    InvalidConfig(String),
    #[error("COLUMN_MISMATCH: dataset columns do not match the network's observables")]
    ColumnMismatch,
    #[error("{source} (row {row})")]
    Infer { row: usize, source: InferError },
    #[error("{source} (row {row}, node {node})")]
    Score {
        row: usize,
        node: String,
        source: ScoreError,
    },
    #[error(transparent)]
    Sample(#[from] SampleError),
}

impl CriticError {
    pub fn code(&self) -> &'static str {
        match self {
            CriticError::EmptyMatrix => "EMPTY_MATRIX",
            CriticError::InsufficientRows { .. } => "INSUFFICIENT_ROWS",
            CriticError::InvalidConfig(_) => "INVALID_CONFIG",
            CriticError::ColumnMismatch => "COLUMN_MISMATCH",
            CriticError::Infer { source, .. } => source.code(),
            CriticError::Score { source, .. } => source.code(),
            CriticError::Sample(e) => e.code(),
        }
    }
}

impl From<InferError> for CriticError {
    fn from(source: InferError) -> Self {
        CriticError::Infer { row: 0, source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    TwoTailed,
    OneTailedMisfit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    None,
    PerFamily,
}

fn default_sizes() -> Vec<usize> {
    vec![50, 100, 250, 500, 1000]
}

fn default_replicates() -> usize {
    1000
}

fn default_pool() -> usize {
    1000
}

fn default_tail() -> Tail {
    Tail::TwoTailed
}

fn default_correction() -> Correction {
    Correction::None
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_pool")]
    pub pool: usize,
    #[serde(default = "default_tail")]
    pub tail: Tail,
    #[serde(default = "default_correction")]
    pub correction: Correction,
    #[serde(default)]
    pub seed: Seed,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            sizes: default_sizes(),
            replicates: default_replicates(),
            pool: default_pool(),
            tail: default_tail(),
            correction: default_correction(),
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn with_seed(seed: Seed) -> Self {
        StudyConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), CriticError> {
        if self.replicates < 100 {
            return Err(CriticError::InvalidConfig(format!(
                "replicates = {}; at least 100 required",
                self.replicates
            )));
        }
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(CriticError::InvalidConfig(
                "sample sizes must be a non-empty list of positive counts".into(),
            ));
        }
        if self.pool == 0 {
            return Err(CriticError::InvalidConfig("pool size must be positive".into()));
        }
        Ok(())
    }

    pub fn max_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    /// First 16 hex digits of the SHA-256 of the JSON form of the config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }

    /// Seed of the model-consistent pool.
    pub fn pool_seed(&self) -> Seed {
        seed::derive(self.seed, &[tag::POOL])
    }

    /// Seed of bootstrap replicate `r` for `kind` at sample size `n`.
    pub fn replicate_seed(&self, kind: ScoreKind, n: usize, r: usize) -> Seed {
        seed::derive(self.seed, &[tag::REPLICATE, kind.code(), n as u64, r as u64])
    }
}

/// Measure level: the whole model or a single observable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Global,
    Node(String),
}

impl Level {
    /// `global` or the node name; used for file names and table headers.
    pub fn label(&self) -> &str {
        match self {
            Level::Global => "global",
            Level::Node(n) => n,
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure {
    pub level: Level,
    pub value: f64,
}

/// Per-observation scores; rows are simulees, columns are observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    kind: ScoreKind,
    columns: Vec<String>,
    values: Vec<f64>,
}

impl ScoreMatrix {
    pub fn new(kind: ScoreKind, columns: Vec<String>, values: Vec<f64>) -> Self {
        assert!(columns.is_empty() || values.len().is_multiple_of(columns.len()));
        ScoreMatrix {
            kind,
            columns,
            values,
        }
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> usize {
        if self.columns.is_empty() {
            0
        } else {
            self.values.len() / self.columns.len()
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.columns.len();
        &self.values[i * k..(i + 1) * k]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.columns.len() + k]
    }

    /// The first `n` rows.
    pub fn prefix(&self, n: usize) -> ScoreMatrix {
        ScoreMatrix {
            kind: self.kind,
            columns: self.columns.clone(),
            values: self.values[..n * self.columns.len()].to_vec(),
        }
    }
}

/// Node measures followed by the global measure, computed over the rows
/// `rows` of `m` (repeats allowed).
fn measure_values<I: IntoIterator<Item = usize>>(m: &ScoreMatrix, rows: I) -> Vec<f64> {
    let k = m.columns.len();
    let mut sums = vec![0.0; k];
    let mut global = 0.0;
    let mut count = 0usize;
    for i in rows {
        let row = m.row(i);
        let mut row_sum = 0.0;
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += v;
            row_sum += v;
        }
        global += row_sum / k as f64;
        count += 1;
    }
    let n = count as f64;
    let mut out: Vec<f64> = sums.into_iter().map(|s| s / n).collect();
    out.push(global / n);
    out
}

/// Global measure then one node measure per observable.
pub fn measures(m: &ScoreMatrix) -> Result<Vec<Measure>, CriticError> {
    if m.rows() == 0 {
        return Err(CriticError::EmptyMatrix);
    }
    let values = measure_values(m, 0..m.rows());
    let (global, nodes) = values.split_last().expect("non-empty");
    debug_assert!({
        let grand = nodes.iter().sum::<f64>() / nodes.len() as f64;
        (grand - global).abs() <= 1e-12 * global.abs().max(1.0)
    });
    Ok(levels(&m.columns)
        .into_iter()
        .zip(std::iter::once(*global).chain(nodes.iter().copied()))
        .map(|(level, value)| Measure { level, value })
        .collect())
}

fn levels(columns: &[String]) -> Vec<Level> {
    std::iter::once(Level::Global)
        .chain(columns.iter().cloned().map(Level::Node))
        .collect()
}

/// A posited network prepared for repeated scoring: inference engine,
/// no-evidence baselines, and leave-one-out predictives cached per distinct
/// observable row.
pub struct Posited<'a> {
    net: &'a Network,
    engine: Engine<'a>,
    baselines: Vec<BaselineMarginals>,
}

impl<'a> Posited<'a> {
    pub fn new(net: &'a Network) -> Result<Self, CriticError> {
        let engine = Engine::new(net)?;
        let baselines = net
            .observable_indices()
            .into_iter()
            .map(|v| {
                let p = engine.conditional(v, &[])?;
                Ok(BaselineMarginals::new(p.probabilities().to_vec())
                    .expect("inference returns a normalized marginal"))
            })
            .collect::<Result<Vec<_>, InferError>>()?;
        Ok(Posited {
            net,
            engine,
            baselines,
        })
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    pub fn baselines(&self) -> &[BaselineMarginals] {
        &self.baselines
    }

    /// Leave-one-out predictives for every distinct row of `rows`.
    pub fn predictives(
        &self,
        rows: &[Vec<usize>],
    ) -> Result<BTreeMap<Vec<usize>, Vec<PredictiveDistribution>>, CriticError> {
        let mut first: BTreeMap<&[usize], usize> = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            first.entry(r.as_slice()).or_insert(i);
        }
        let distinct: Vec<(&[usize], usize)> = first.into_iter().collect();
        let computed: Vec<Result<Vec<PredictiveDistribution>, CriticError>> = distinct
            .par_iter()
            .map(|&(r, i)| {
                self.engine
                    .loo_predictives(r)
                    .map_err(|source| CriticError::Infer { row: i, source })
            })
            .collect();
        let mut out = BTreeMap::new();
        let mut failure: Option<CriticError> = None;
        for ((r, _), result) in distinct.into_iter().zip(computed) {
            match result {
                Ok(p) => {
                    out.insert(r.to_vec(), p);
                }
                Err(e) => {
                    let earlier = match (&failure, &e) {
                        (None, _) => true,
                        (Some(CriticError::Infer { row: a, .. }), CriticError::Infer { row: b, .. }) => b < a,
                        _ => false,
                    };
                    if earlier {
                        failure = Some(e);
                    }
                }
            }
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Scores every row of `rows` with `kind`, given cached predictives.
    pub fn score_rows(
        &self,
        rows: &[Vec<usize>],
        predictives: &BTreeMap<Vec<usize>, Vec<PredictiveDistribution>>,
        kind: ScoreKind,
    ) -> Result<ScoreMatrix, CriticError> {
        let names = self.net.observable_names();
        let mut by_row: BTreeMap<&[usize], Vec<f64>> = BTreeMap::new();
        let mut values = Vec::with_capacity(rows.len() * names.len());
        for (i, row) in rows.iter().enumerate() {
            if !by_row.contains_key(row.as_slice()) {
                let preds = &predictives[row];
                let cells = preds
                    .iter()
                    .enumerate()
                    .map(|(k, p)| {
                        score::score(kind, p, row[k], Some(&self.baselines[k])).map_err(|source| {
                            CriticError::Score {
                                row: i,
                                node: names[k].clone(),
                                source,
                            }
                        })
                    })
                    .collect::<Result<Vec<f64>, _>>()?;
                by_row.insert(row.as_slice(), cells);
            }
            values.extend_from_slice(&by_row[row.as_slice()]);
        }
        Ok(ScoreMatrix::new(kind, names, values))
    }

    pub fn score_dataset(&self, ds: &Dataset, kind: ScoreKind) -> Result<ScoreMatrix, CriticError> {
        if !ds.matches(self.net) {
            return Err(CriticError::ColumnMismatch);
        }
        let preds = self.predictives(ds.rows())?;
        self.score_rows(ds.rows(), &preds, kind)
    }
}

/// Cell `(i, k)` scores the leave-one-out predictive of observable `k`
/// given the other observables of row `i`.
pub fn score_dataset(net: &Network, ds: &Dataset, kind: ScoreKind) -> Result<ScoreMatrix, CriticError> {
    Posited::new(net)?.score_dataset(ds, kind)
}

/// Empirical critical values for one measure.
///
/// `None` marks an open side: in one-tailed mode only the misfit side
/// carries a critical value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalBand {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub replicates: usize,
    pub tail: Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    NotSignificant,
    SignificantMisfit,
    SignificantOverfit,
}

impl Flag {
    pub fn is_significant(self) -> bool {
        self != Flag::NotSignificant
    }
}

/// Nearest-rank percentile of ascending `sorted`: the value at rank
/// `ceil(q·R)`, clamped to `1..=R`.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let r = sorted.len();
    let rank = ((q * r as f64) - 1e-9).ceil().clamp(1.0, r as f64) as usize;
    sorted[rank - 1]
}

/// Test level for node measures under the configured correction.
pub fn node_alpha(correction: Correction, nodes: usize) -> f64 {
    match correction {
        Correction::None => ALPHA,
        Correction::PerFamily => 1.0 - (1.0 - ALPHA).powf(1.0 / nodes as f64),
    }
}

/// Band from sorted replicate values at level `alpha`.
pub fn band_from(sorted: &[f64], alpha: f64, tail: Tail, kind: ScoreKind) -> CriticalBand {
    let (lower, upper) = match tail {
        Tail::TwoTailed => (
            Some(nearest_rank(sorted, alpha / 2.0)),
            Some(nearest_rank(sorted, 1.0 - alpha / 2.0)),
        ),
        Tail::OneTailedMisfit if kind.misfit_is_low() => (Some(nearest_rank(sorted, alpha)), None),
        Tail::OneTailedMisfit => (None, Some(nearest_rank(sorted, 1.0 - alpha))),
    };
    CriticalBand {
        lower,
        upper,
        replicates: sorted.len(),
        tail,
    }
}

/// Compares an observed measure with its band; values on a boundary are
/// not significant.
pub fn flag(value: f64, band: &CriticalBand, kind: ScoreKind) -> Flag {
    let below = band.lower.is_some_and(|l| value < l);
    let above = band.upper.is_some_and(|u| value > u);
    match (below, above, kind.misfit_is_low()) {
        (true, _, true) | (_, true, false) => Flag::SignificantMisfit,
        (true, _, false) | (_, true, true) => Flag::SignificantOverfit,
        _ => Flag::NotSignificant,
    }
}

/// Replicate measure values for `kind` at size `n`: one vector per
/// measure in [`measures`] order, each of length `cfg.replicates`.
fn replicate_values(
    pool: &ScoreMatrix,
    cfg: &StudyConfig,
    n: usize,
) -> Result<Vec<Vec<f64>>, CriticError> {
    let reps: Vec<Vec<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|r| {
            let idx = sample::resample_indices(pool.rows(), n, cfg.replicate_seed(pool.kind, n, r))?;
            Ok(measure_values(pool, idx))
        })
        .collect::<Result<_, SampleError>>()?;
    let k = pool.columns.len();
    // Reorder to [global, node_1, ..., node_k].
    Ok((0..=k)
        .map(|m| {
            let slot = if m == 0 { k } else { m - 1 };
            reps.iter().map(|v| v[slot]).collect()
        })
        .collect())
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn bands_for(pool: &ScoreMatrix, cfg: &StudyConfig, n: usize) -> Result<Vec<(Level, CriticalBand)>, CriticError> {
    let values = replicate_values(pool, cfg, n)?;
    let node_alpha = node_alpha(cfg.correction, pool.columns.len());
    Ok(levels(&pool.columns)
        .into_iter()
        .zip(values)
        .map(|(level, v)| {
            let alpha = if level == Level::Global { ALPHA } else { node_alpha };
            let band = band_from(&sorted(v), alpha, cfg.tail, pool.kind);
            (level, band)
        })
        .collect())
}

/// The model-consistent pool for `net` under `cfg`.
pub fn null_pool(net: &Network, cfg: &StudyConfig) -> Result<Dataset, CriticError> {
    Ok(sample::forward_sample(net, cfg.pool, cfg.pool_seed())?)
}

/// Critical bands for every measure of `kind` at sample size `n`, in
/// [`measures`] order.
pub fn bootstrap_null(
    net: &Network,
    cfg: &StudyConfig,
    kind: ScoreKind,
    n: usize,
) -> Result<Vec<(Level, CriticalBand)>, CriticError> {
    cfg.check()?;
    let posited = Posited::new(net)?;
    let pool = null_pool(net, cfg)?;
    let matrix = posited.score_dataset(&pool, kind)?;
    bands_for(&matrix, cfg, n)
}

/// Bootstrap replicate measures computed the long way: resample the pool
/// dataset, score it from scratch and aggregate. Mirrors
/// [`bootstrap_null`] replicate by replicate.
pub fn replicate_measures_direct(
    net: &Network,
    cfg: &StudyConfig,
    kind: ScoreKind,
    n: usize,
    r: usize,
) -> Result<Vec<Measure>, CriticError> {
    let pool = null_pool(net, cfg)?;
    let ds = sample::resample(&pool, n, cfg.replicate_seed(kind, n, r))?;
    measures(&score_dataset(net, &ds, kind)?)
}

/// Replicate measures via the precomputed pool matrix, in the layout of
/// [`replicate_measures_direct`].
pub fn replicate_measures_fast(
    net: &Network,
    cfg: &StudyConfig,
    kind: ScoreKind,
    n: usize,
    r: usize,
) -> Result<Vec<Measure>, CriticError> {
    let posited = Posited::new(net)?;
    let matrix = posited.score_dataset(&null_pool(net, cfg)?, kind)?;
    let idx = sample::resample_indices(matrix.rows(), n, cfg.replicate_seed(kind, n, r))?;
    let v = measure_values(&matrix, idx);
    let (global, nodes) = v.split_last().expect("non-empty");
    Ok(levels(&matrix.columns)
        .into_iter()
        .zip(std::iter::once(*global).chain(nodes.iter().copied()))
        .map(|(level, value)| Measure { level, value })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitCell {
    pub kind: ScoreKind,
    pub n: usize,
    pub level: Level,
    pub observed: f64,
    pub band: CriticalBand,
    pub flag: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportProvenance {
    pub tool: String,
    pub version: String,
    pub posited_network_id: String,
    pub observed_rows: usize,
    pub observed_source: Option<Provenance>,
    pub master_seed: Seed,
    pub pool_seed: Seed,
    pub config: StudyConfig,
    pub config_hash: String,
    pub alpha: f64,
    pub node_alpha: f64,
}

/// FitReport: one cell per (index, sample size, level).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub provenance: ReportProvenance,
    pub observables: Vec<String>,
    pub cells: Vec<FitCell>,
}

impl FitReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn kinds(&self) -> Vec<ScoreKind> {
        let mut kinds: Vec<ScoreKind> = Vec::new();
        for c in &self.cells {
            if !kinds.contains(&c.kind) {
                kinds.push(c.kind);
            }
        }
        kinds
    }

    pub fn levels(&self) -> Vec<Level> {
        levels(&self.observables)
    }

    pub fn cell(&self, kind: ScoreKind, n: usize, level: &Level) -> Option<&FitCell> {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.n == n && &c.level == level)
    }

    /// Sample sizes at which `level` of `kind` was flagged.
    pub fn flagged_sizes(&self, kind: ScoreKind, level: &Level) -> Vec<usize> {
        self.cells
            .iter()
            .filter(|c| c.kind == kind && &c.level == level && c.flag.is_significant())
            .map(|c| c.n)
            .collect()
    }
}

/// Orders requested kinds canonically and drops duplicates.
fn canonical_kinds(kinds: &[ScoreKind]) -> Vec<ScoreKind> {
    ScoreKind::ALL
        .into_iter()
        .filter(|k| kinds.contains(k))
        .collect()
}

/// Criticizes `net` against `observed` for each index in `kinds`.
pub fn criticize(
    net: &Network,
    observed: &Dataset,
    cfg: &StudyConfig,
    kinds: &[ScoreKind],
) -> Result<FitReport, CriticError> {
    cfg.check()?;
    if !observed.matches(net) {
        return Err(CriticError::ColumnMismatch);
    }
    if cfg.max_size() > observed.len() {
        return Err(CriticError::InsufficientRows {
            needed: cfg.max_size(),
            available: observed.len(),
        });
    }
    let kinds = canonical_kinds(kinds);
    let posited = Posited::new(net)?;
    let data = sample::prefix(observed, cfg.max_size())?;
    let pool = null_pool(net, cfg)?;
    let data_preds = posited.predictives(data.rows())?;
    let pool_preds = posited.predictives(pool.rows())?;

    let mut cells = Vec::new();
    for &kind in &kinds {
        let obs_matrix = posited.score_rows(data.rows(), &data_preds, kind)?;
        let pool_matrix = posited.score_rows(pool.rows(), &pool_preds, kind)?;
        for &n in &cfg.sizes {
            let observed_measures = measures(&obs_matrix.prefix(n))?;
            let bands = bands_for(&pool_matrix, cfg, n)?;
            for (m, (level, band)) in observed_measures.into_iter().zip(bands) {
                debug_assert_eq!(m.level, level);
                cells.push(FitCell {
                    kind,
                    n,
                    flag: flag(m.value, &band, kind),
                    level,
                    observed: m.value,
                    band,
                });
            }
        }
    }
    Ok(FitReport {
        provenance: ReportProvenance {
            tool: "bncritic".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            posited_network_id: net.id(),
            observed_rows: observed.len(),
            observed_source: observed.provenance().cloned(),
            master_seed: cfg.seed,
            pool_seed: cfg.pool_seed(),
            config: cfg.clone(),
            config_hash: cfg.hash(),
            alpha: ALPHA,
            node_alpha: node_alpha(cfg.correction, net.observable_indices().len()),
        },
        observables: net.observable_names(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_on_one_to_thousand() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.025), 25.0);
        assert_eq!(nearest_rank(&v, 0.975), 975.0);
        assert_eq!(nearest_rank(&v, 0.0), 1.0);
        assert_eq!(nearest_rank(&v, 1.0), 1000.0);
    }

    #[test]
    fn flags_follow_direction_and_ties() {
        let band = CriticalBand {
            lower: Some(1.0),
            upper: Some(2.0),
            replicates: 100,
            tail: Tail::TwoTailed,
        };
        let rps = ScoreKind::RankedProbability;
        let si = ScoreKind::WeaverSurprise;
        assert_eq!(flag(0.5, &band, rps), Flag::SignificantMisfit);
        assert_eq!(flag(2.5, &band, rps), Flag::SignificantOverfit);
        assert_eq!(flag(2.5, &band, si), Flag::SignificantMisfit);
        assert_eq!(flag(0.5, &band, si), Flag::SignificantOverfit);
        assert_eq!(flag(1.0, &band, rps), Flag::NotSignificant);
        assert_eq!(flag(2.0, &band, si), Flag::NotSignificant);
    }

    #[test]
    fn one_tailed_band_is_open_on_the_fit_side() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        let low = band_from(&v, ALPHA, Tail::OneTailedMisfit, ScoreKind::RankedProbability);
        assert_eq!((low.lower, low.upper), (Some(50.0), None));
        let high = band_from(&v, ALPHA, Tail::OneTailedMisfit, ScoreKind::WeaverSurprise);
        assert_eq!((high.lower, high.upper), (None, Some(950.0)));
        assert_eq!(flag(2000.0, &low, ScoreKind::RankedProbability), Flag::NotSignificant);
    }

    #[test]
    fn sidak_level() {
        let a = node_alpha(Correction::PerFamily, 5);
        assert!((1.0 - (1.0 - a).powi(5) - ALPHA).abs() < 1e-12);
        assert_eq!(node_alpha(Correction::None, 5), ALPHA);
    }

    #[test]
    fn measures_small_matrices() {
        let cols = vec!["A".to_string(), "B".to_string()];
        let m = ScoreMatrix::new(ScoreKind::RankedProbability, cols, vec![1.0, 3.0, 5.0, 7.0]);
        let ms = measures(&m).unwrap();
        let values: Vec<f64> = ms.iter().map(|m| m.value).collect();
        assert_eq!(values, vec![4.0, 3.0, 5.0]);
        assert_eq!(ms[0].level, Level::Global);
        let empty = ScoreMatrix::new(ScoreKind::RankedProbability, vec!["A".into()], vec![]);
        assert_eq!(measures(&empty).unwrap_err().code(), "EMPTY_MATRIX");
    }

    #[test]
    fn config_checks() {
        let mut cfg = StudyConfig::default();
        assert!(cfg.check().is_ok());
        cfg.replicates = 99;
        assert_eq!(cfg.check().unwrap_err().code(), "INVALID_CONFIG");
        let parsed: StudyConfig = serde_json::from_str(r#"{"seed": 4}"#).unwrap();
        assert_eq!(parsed, StudyConfig::with_seed(4));
        assert!(serde_json::from_str::<StudyConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
