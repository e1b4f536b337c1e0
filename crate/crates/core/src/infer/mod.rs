//! Exact inference on small discrete networks.
//!
//! [`Engine`] answers conditional queries by variable elimination with a
//! min-degree ordering (ties broken by variable name). [`joint_enumerate`]
//! builds the full joint table by brute force and serves as an
//! independent oracle for the engine.
//!
//! Everything runs in linear probability space; the networks this crate
//! targets have at most a handful of variables with a few states each.

mod factor;
mod joint;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::network::{config_states, validate, Network, ValidationReport, ROW_SUM_TOLERANCE};
use factor::Factor;

pub use joint::{joint_enumerate, JointTable, JOINT_SIZE_LIMIT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferError {
    #[error("TOO_LARGE: joint table of {size} entries exceeds the limit of {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("ZERO_EVIDENCE_PROBABILITY: evidence has probability 0{}", .node.as_ref().map(|n| format!(" (predicting {n})")).unwrap_or_default())]
    ZeroEvidenceProbability { node: Option<String> },
    #[error("UNKNOWN_VARIABLE: `{0}`")]
    UnknownVariable(String),
    #[error("NOT_OBSERVABLE: `{0}` is latent and cannot carry evidence")]
    NotObservable(String),
    #[error("STATE_OUT_OF_RANGE: state {state} for `{variable}` with {cardinality} states")]
    StateOutOfRange {
        variable: String,
        state: usize,
        cardinality: usize,
    },
    #[error("QUERY_IN_EVIDENCE: `{0}` is both queried and observed")]
    QueryInEvidence(String),
    #[error("ROW_LENGTH: row assigns {got} observables, network has {expected}")]
    RowLength { expected: usize, got: usize },
    #[error("INVALID_NETWORK: {0}")]
    InvalidNetwork(ValidationReport),
}

impl InferError {
    pub fn code(&self) -> &'static str {
        match self {
            InferError::TooLarge { .. } => "TOO_LARGE",
            InferError::ZeroEvidenceProbability { .. } => "ZERO_EVIDENCE_PROBABILITY",
            InferError::UnknownVariable(_) => "UNKNOWN_VARIABLE",
            InferError::NotObservable(_) => "NOT_OBSERVABLE",
            InferError::StateOutOfRange { .. } => "STATE_OUT_OF_RANGE",
            InferError::QueryInEvidence(_) => "QUERY_IN_EVIDENCE",
            InferError::RowLength { .. } => "ROW_LENGTH",
            InferError::InvalidNetwork(_) => "INVALID_NETWORK",
        }
    }
}

/// Observed states of observable variables, keyed by name.
///
/// Backed by an ordered map so that results never depend on the order in
/// which observations were inserted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    entries: BTreeMap<String, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an observation; returns the previous state if `name` was
    /// already observed.
    pub fn insert<S: Into<String>>(&mut self, name: S, state: usize) -> Option<usize> {
        self.entries.insert(name.into(), state)
    }

    pub fn with<S: Into<String>>(mut self, name: S, state: usize) -> Self {
        self.insert(name, state);
        self
    }

    pub fn remove(&mut self, name: &str) -> Option<usize> {
        self.entries.remove(name)
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.entries.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Resolves names to variable indices, checking the evidence contract.
    pub(crate) fn resolve(&self, net: &Network) -> Result<Vec<(usize, usize)>, InferError> {
        self.entries
            .iter()
            .map(|(name, &state)| {
                let idx = net
                    .variable_index(name)
                    .ok_or_else(|| InferError::UnknownVariable(name.clone()))?;
                let var = &net.variables()[idx];
                if !var.is_observable() {
                    return Err(InferError::NotObservable(name.clone()));
                }
                if state >= var.cardinality() {
                    return Err(InferError::StateOutOfRange {
                        variable: name.clone(),
                        state,
                        cardinality: var.cardinality(),
                    });
                }
                Ok((idx, state))
            })
            .collect()
    }
}

/// `p(variable = j | evidence)` for every state `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictiveDistribution {
    variable: String,
    probabilities: Vec<f64>,
}

impl PredictiveDistribution {
    pub fn new<S: Into<String>>(variable: S, probabilities: Vec<f64>) -> Self {
        PredictiveDistribution {
            variable: variable.into(),
            probabilities,
        }
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        let sum: f64 = self.probabilities.iter().sum();
        self.probabilities.iter().all(|&p| p >= 0.0) && (sum - 1.0).abs() <= ROW_SUM_TOLERANCE
    }
}

impl std::ops::Deref for PredictiveDistribution {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.probabilities
    }
}

/// Variable-elimination engine over one validated network.
///
/// Holds only immutable data, so a single engine can serve any number of
/// concurrent queries.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    net: &'a Network,
    factors: Vec<Factor>,
    observables: Vec<usize>,
}

impl<'a> Engine<'a> {
    pub fn new(net: &'a Network) -> Result<Self, InferError> {
        let report = validate(net);
        if report.has_errors() {
            return Err(InferError::InvalidNetwork(report));
        }
        let factors = net
            .cpts()
            .iter()
            .map(|cpt| {
                let mut vars: Vec<usize> = cpt
                    .parents
                    .iter()
                    .map(|p| net.variable_index(p).expect("validated"))
                    .collect();
                vars.push(net.variable_index(&cpt.child).expect("validated"));
                let cards: Vec<usize> = vars
                    .iter()
                    .map(|&v| net.variables()[v].cardinality())
                    .collect();
                let values = cpt.table.iter().flatten().copied().collect();
                Factor::new(vars, cards, values)
            })
            .collect();
        Ok(Engine {
            net,
            factors,
            observables: net.observable_indices(),
        })
    }

    pub fn network(&self) -> &Network {
        self.net
    }

    /// Posterior of `query` given observable evidence.
    pub fn posterior(
        &self,
        evidence: &Evidence,
        query: &str,
    ) -> Result<PredictiveDistribution, InferError> {
        let q = self
            .net
            .variable_index(query)
            .ok_or_else(|| InferError::UnknownVariable(query.to_string()))?;
        if evidence.get(query).is_some() {
            return Err(InferError::QueryInEvidence(query.to_string()));
        }
        let ev = evidence.resolve(self.net)?;
        self.conditional(q, &ev)
    }

    /// Posterior of variable index `query` given `(variable, state)` pairs
    /// on any variables, latent ones included.
    pub(crate) fn conditional(
        &self,
        query: usize,
        evidence: &[(usize, usize)],
    ) -> Result<PredictiveDistribution, InferError> {
        let mut factors: Vec<Factor> = self
            .factors
            .iter()
            .map(|f| {
                evidence
                    .iter()
                    .fold(f.clone(), |acc, &(v, s)| acc.reduce(v, s))
            })
            .collect();
        let mut hidden: Vec<usize> = (0..self.net.variables().len())
            .filter(|&v| v != query && evidence.iter().all(|&(e, _)| e != v))
            .collect();

        while !hidden.is_empty() {
            let pick = self.min_degree(&factors, &hidden);
            let var = hidden.remove(pick);
            let (touching, rest): (Vec<Factor>, Vec<Factor>) =
                factors.into_iter().partition(|f| f.contains(var));
            factors = rest;
            if let Some(prod) = touching.iter().skip(1).fold(touching.first().cloned(), |acc, f| {
                acc.map(|a| a.product(f))
            }) {
                factors.push(prod.sum_out(var));
            }
        }

        let joint = factors
            .iter()
            .fold(Factor::scalar(1.0), |acc, f| acc.product(f));
        let card = self.net.variables()[query].cardinality();
        let unnormalized = if joint.vars.is_empty() {
            vec![joint.values[0]; card]
        } else {
            debug_assert_eq!(joint.vars, vec![query]);
            joint.values
        };
        let z: f64 = unnormalized.iter().sum();
        if !(z > 0.0) {
            return Err(InferError::ZeroEvidenceProbability { node: None });
        }
        Ok(PredictiveDistribution::new(
            self.net.variables()[query].name.clone(),
            unnormalized.into_iter().map(|x| x / z).collect(),
        ))
    }

    /// Index into `hidden` of the variable with the fewest neighbours in the
    /// current interaction graph; ties go to the smallest name.
    fn min_degree(&self, factors: &[Factor], hidden: &[usize]) -> usize {
        let names = self.net.variables();
        let degree = |var: usize| {
            let mut nbrs: Vec<usize> = factors
                .iter()
                .filter(|f| f.contains(var))
                .flat_map(|f| f.vars.iter().copied())
                .filter(|&v| v != var)
                .collect();
            nbrs.sort_unstable();
            nbrs.dedup();
            nbrs.len()
        };
        (0..hidden.len())
            .min_by(|&a, &b| {
                degree(hidden[a])
                    .cmp(&degree(hidden[b]))
                    .then_with(|| names[hidden[a]].name.cmp(&names[hidden[b]].name))
            })
            .expect("hidden is non-empty")
    }

    /// Leave-one-out predictives for a full observable assignment given in
    /// observable declaration order: entry `k` is the posterior of
    /// observable `k` given every other observable in `row`.
    pub fn loo_predictives(&self, row: &[usize]) -> Result<Vec<PredictiveDistribution>, InferError> {
        if row.len() != self.observables.len() {
            return Err(InferError::RowLength {
                expected: self.observables.len(),
                got: row.len(),
            });
        }
        for (&v, &s) in self.observables.iter().zip(row) {
            let var = &self.net.variables()[v];
            if s >= var.cardinality() {
                return Err(InferError::StateOutOfRange {
                    variable: var.name.clone(),
                    state: s,
                    cardinality: var.cardinality(),
                });
            }
        }
        (0..self.observables.len())
            .map(|k| {
                let evidence: Vec<(usize, usize)> = self
                    .observables
                    .iter()
                    .zip(row)
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, (&v, &s))| (v, s))
                    .collect();
                self.conditional(self.observables[k], &evidence)
                    .map_err(|e| match e {
                        InferError::ZeroEvidenceProbability { .. } => {
                            InferError::ZeroEvidenceProbability {
                                node: Some(self.net.variables()[self.observables[k]].name.clone()),
                            }
                        }
                        other => other,
                    })
            })
            .collect()
    }

    /// No-evidence marginal of every variable, in declaration order.
    pub fn marginals(&self) -> Result<Vec<PredictiveDistribution>, InferError> {
        (0..self.net.variables().len())
            .map(|v| self.conditional(v, &[]))
            .collect()
    }
}

/// Posterior of `query` given observable `evidence`.
pub fn posterior(
    net: &Network,
    evidence: &Evidence,
    query: &str,
) -> Result<PredictiveDistribution, InferError> {
    Engine::new(net)?.posterior(evidence, query)
}

/// See [`Engine::loo_predictives`].
pub fn loo_predictives(net: &Network, row: &[usize]) -> Result<Vec<PredictiveDistribution>, InferError> {
    Engine::new(net)?.loo_predictives(row)
}

/// Every full assignment of the observables of `net`, in row-major order
/// over observable declaration order.
pub fn observable_configurations(net: &Network) -> Vec<Vec<usize>> {
    let cards: Vec<usize> = net.observables().map(|v| v.cardinality()).collect();
    let total: usize = cards.iter().product();
    (0..total).map(|i| config_states(i, &cards)).collect()
}
