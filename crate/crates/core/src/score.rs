//! Per-observation surprise and accuracy indices.
//!
//! Each index maps a forecast `p` over an observable's ordered states and
//! the observed state to a scalar:
//!
//! * Weaver's surprise index `Σ p_n² / p_obs`; values above 1 are
//!   increasingly surprising.
//! * Good's logarithmic score with penalty `b`, the entropy of the
//!   pre-observation marginals `x`. With `i*` the modal state of `p`
//!   (lowest index on ties) the score is `ln(b·p_i*)` when `i*` occurred
//!   and `ln(b·(1 − p_i*))` otherwise.
//! * The ranked probability score, which lies in `[0, 1]` with 1 for a
//!   point mass on the observed state and penalizes mass linearly in its
//!   rank distance from the observation.
//!
//! Logarithms are natural throughout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::ROW_SUM_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    WeaverSurprise,
    GoodLog,
    RankedProbability,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 3] = [
        ScoreKind::RankedProbability,
        ScoreKind::WeaverSurprise,
        ScoreKind::GoodLog,
    ];

    /// Short identifier used on the command line and in file names.
    pub fn slug(self) -> &'static str {
        match self {
            ScoreKind::WeaverSurprise => "weaver",
            ScoreKind::GoodLog => "goodlog",
            ScoreKind::RankedProbability => "rps",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ScoreKind::WeaverSurprise => "Weaver's Surprise Index",
            ScoreKind::GoodLog => "Good's Logarithmic Score",
            ScoreKind::RankedProbability => "Ranked Probability Score",
        }
    }

    /// Whether low values of this index signal misfit.
    pub fn misfit_is_low(self) -> bool {
        match self {
            ScoreKind::WeaverSurprise => false,
            ScoreKind::GoodLog | ScoreKind::RankedProbability => true,
        }
    }

    /// Stable numeric code mixed into derived seeds.
    pub fn code(self) -> u64 {
        match self {
            ScoreKind::WeaverSurprise => 1,
            ScoreKind::GoodLog => 2,
            ScoreKind::RankedProbability => 3,
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for ScoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "weaver" | "weaversurprise" | "si" => Ok(ScoreKind::WeaverSurprise),
            "goodlog" | "gl" | "good" => Ok(ScoreKind::GoodLog),
            "rps" | "rankedprobability" => Ok(ScoreKind::RankedProbability),
            _ => Err(format!("unknown index `{s}` (expected rps, weaver or goodlog)")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("ZERO_PROBABILITY_OBSERVED: forecast gives the observed state {0} probability 0")]
    ZeroProbabilityObserved(usize),
    #[error("DEGENERATE_BASELINE: baseline marginals are a point mass (b = 0)")]
    DegenerateBaseline,
    #[error("LOG_OF_ZERO: logarithmic score argument is 0")]
    LogOfZero,
    #[error("SINGLE_STATE: ranked probability score needs at least 2 states")]
    SingleState,
    #[error("STATE_OUT_OF_RANGE: observed state {observed} with {cardinality} states")]
    StateOutOfRange { observed: usize, cardinality: usize },
    #[error("LENGTH_MISMATCH: forecast has {forecast} states, baseline has {baseline}")]
    LengthMismatch { forecast: usize, baseline: usize },
    #[error("INVALID_BASELINE: {0}")]
    InvalidBaseline(String),
    #[error("MISSING_BASELINE: Good's logarithmic score requires baseline marginals")]
    MissingBaseline,
}

impl ScoreError {
    pub fn code(&self) -> &'static str {
        match self {
            ScoreError::ZeroProbabilityObserved(_) => "ZERO_PROBABILITY_OBSERVED",
            ScoreError::DegenerateBaseline => "DEGENERATE_BASELINE",
            ScoreError::LogOfZero => "LOG_OF_ZERO",
            ScoreError::SingleState => "SINGLE_STATE",
            ScoreError::StateOutOfRange { .. } => "STATE_OUT_OF_RANGE",
            ScoreError::LengthMismatch { .. } => "LENGTH_MISMATCH",
            ScoreError::InvalidBaseline(_) => "INVALID_BASELINE",
            ScoreError::MissingBaseline => "MISSING_BASELINE",
        }
    }
}

/// Pre-observation marginals `x` of one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineMarginals {
    x: Vec<f64>,
}

impl BaselineMarginals {
    pub fn new(x: Vec<f64>) -> Result<Self, ScoreError> {
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(ScoreError::InvalidBaseline("entry outside [0, 1]".into()));
        }
        let sum: f64 = x.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(ScoreError::InvalidBaseline(format!("sums to {sum}")));
        }
        Ok(BaselineMarginals { x })
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    /// The penalty `b = −Σ x ln x` with `0 ln 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .x
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum::<f64>()
    }
}

fn check_observed(p: &[f64], observed: usize) -> Result<(), ScoreError> {
    if observed >= p.len() {
        return Err(ScoreError::StateOutOfRange {
            observed,
            cardinality: p.len(),
        });
    }
    Ok(())
}

/// Weaver's surprise index `Σ p_n² / p_observed`.
pub fn weaver_surprise(p: &[f64], observed: usize) -> Result<f64, ScoreError> {
    check_observed(p, observed)?;
    let po = p[observed];
    if po <= 0.0 {
        return Err(ScoreError::ZeroProbabilityObserved(observed));
    }
    let expected: f64 = p.iter().map(|v| v * v).sum();
    Ok(expected / po)
}

/// Index of the largest entry, lowest index on ties.
pub fn modal_state(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Good's logarithmic score with penalty from `x`.
pub fn good_log_score(p: &[f64], observed: usize, x: &BaselineMarginals) -> Result<f64, ScoreError> {
    check_observed(p, observed)?;
    if p.len() != x.values().len() {
        return Err(ScoreError::LengthMismatch {
            forecast: p.len(),
            baseline: x.values().len(),
        });
    }
    let b = x.entropy();
    if b <= 0.0 {
        return Err(ScoreError::DegenerateBaseline);
    }
    let pi = p[modal_state(p)];
    let arg = if observed == modal_state(p) {
        b * pi
    } else {
        b * (1.0 - pi)
    };
    if arg <= 0.0 {
        return Err(ScoreError::LogOfZero);
    }
    Ok(arg.ln())
}

/// Ranked probability score of `p` against observed state `j`:
///
/// `S_j = 3/2 − 1/(2(K−1)) Σ_{i<K} [(Σ_{n≤i} p_n)² + (Σ_{n>i} p_n)²]
///        − 1/(K−1) Σ_i |i − j| p_i`.
pub fn ranked_probability_score(p: &[f64], observed: usize) -> Result<f64, ScoreError> {
    let k = p.len();
    if k < 2 {
        return Err(ScoreError::SingleState);
    }
    check_observed(p, observed)?;
    let km1 = (k - 1) as f64;
    let total: f64 = p.iter().sum();
    let mut below = 0.0;
    let mut squares = 0.0;
    for &pn in &p[..k - 1] {
        below += pn;
        let above = total - below;
        squares += below * below + above * above;
    }
    let distance: f64 = p
        .iter()
        .enumerate()
        .map(|(i, &pi)| (i as f64 - observed as f64).abs() * pi)
        .sum();
    Ok(1.5 - squares / (2.0 * km1) - distance / km1)
}

/// Scores one forecast with the given index. `baseline` is required for
/// [`ScoreKind::GoodLog`] and ignored otherwise.
pub fn score(
    kind: ScoreKind,
    p: &[f64],
    observed: usize,
    baseline: Option<&BaselineMarginals>,
) -> Result<f64, ScoreError> {
    match kind {
        ScoreKind::WeaverSurprise => weaver_surprise(p, observed),
        ScoreKind::GoodLog => {
            good_log_score(p, observed, baseline.ok_or(ScoreError::MissingBaseline)?)
        }
        ScoreKind::RankedProbability => ranked_probability_score(p, observed),
    }
}
