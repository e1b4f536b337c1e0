//! Discrete Bayesian network domain types.
//!
//! A [`Network`] is a list of categorical [`Variable`]s plus exactly one
//! [`Cpt`] per variable. Construction never fails: arbitrary candidate
//! structures can be built and handed to [`validate`], which reports every
//! violated invariant. Modules downstream of this one take a network that
//! has passed validation (see [`Network::validated`]).
//!
//! CPT rows are ordered row-major over the ordered parent list with the
//! first parent varying slowest. State order is semantically meaningful:
//! it is the ranked order used by ordinal scores.

mod format;
mod validate;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use format::{load_network, load_network_with, save_network, LoadOptions};
pub use validate::{validate, Finding, Severity, ValidationReport};

/// Tolerance on CPT row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Latent,
    Observable,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Latent => f.write_str("latent"),
            Role::Observable => f.write_str("observable"),
        }
    }
}

/// A categorical variable with an ordered state roster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub role: Role,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: S, role: Role, states: &[&str]) -> Self {
        Variable {
            name: name.into(),
            role,
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn latent<S: Into<String>>(name: S, states: &[&str]) -> Self {
        Self::new(name, Role::Latent, states)
    }

    pub fn observable<S: Into<String>>(name: S, states: &[&str]) -> Self {
        Self::new(name, Role::Observable, states)
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }

    pub fn is_observable(&self) -> bool {
        self.role == Role::Observable
    }
}

/// Conditional probability table for one child given an ordered parent list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub child: String,
    pub parents: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn new<S: Into<String>>(child: S, parents: &[&str], table: Vec<Vec<f64>>) -> Self {
        Cpt {
            child: child.into(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            table,
        }
    }

    /// A parentless table with a single prior row.
    pub fn prior<S: Into<String>>(child: S, row: Vec<f64>) -> Self {
        Cpt {
            child: child.into(),
            parents: Vec::new(),
            table: vec![row],
        }
    }
}

/// Row index of a parent configuration: row-major, first parent slowest.
pub fn config_index(states: &[usize], cards: &[usize]) -> usize {
    states
        .iter()
        .zip(cards)
        .fold(0, |acc, (&s, &c)| acc * c + s)
}

/// Inverse of [`config_index`].
pub fn config_states(mut index: usize, cards: &[usize]) -> Vec<usize> {
    let mut states = vec![0; cards.len()];
    for (slot, &c) in states.iter_mut().zip(cards).rev() {
        *slot = index % c;
        index /= c;
    }
    states
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("PARSE_ERROR: {0}")]
    Parse(String),
    #[error("VALIDATION_ERROR: {0}")]
    Validation(ValidationReport),
}

impl NetworkError {
    pub fn code(&self) -> &'static str {
        match self {
            NetworkError::Parse(_) => "PARSE_ERROR",
            NetworkError::Validation(_) => "VALIDATION_ERROR",
        }
    }
}

/// A discrete Bayesian network.
///
/// Immutable after construction; cheap lookups by name are precomputed.
#[derive(Debug, Clone)]
pub struct Network {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    index: HashMap<String, usize>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables && self.cpts == other.cpts
    }
}

impl Network {
    /// Builds a candidate network without checking any invariant.
    pub fn new(variables: Vec<Variable>, cpts: Vec<Cpt>) -> Self {
        let mut index = HashMap::with_capacity(variables.len());
        for (i, v) in variables.iter().enumerate() {
            index.entry(v.name.clone()).or_insert(i);
        }
        Network {
            variables,
            cpts,
            index,
        }
    }

    /// Builds a network and rejects it if validation reports any error.
    pub fn validated(variables: Vec<Variable>, cpts: Vec<Cpt>) -> Result<Self, NetworkError> {
        let net = Network::new(variables, cpts);
        let report = validate(&net);
        if report.has_errors() {
            return Err(NetworkError::Validation(report));
        }
        Ok(net)
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variable_index(name).map(|i| &self.variables[i])
    }

    pub fn cpt(&self, child: &str) -> Option<&Cpt> {
        self.cpts.iter().find(|c| c.child == child)
    }

    /// Observable variables in declaration order.
    pub fn observables(&self) -> impl Iterator<Item = &Variable> {
        self.variables.iter().filter(|v| v.is_observable())
    }

    pub fn observable_names(&self) -> Vec<String> {
        self.observables().map(|v| v.name.clone()).collect()
    }

    /// Declaration indices of the observable variables.
    pub fn observable_indices(&self) -> Vec<usize> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_observable())
            .map(|(i, _)| i)
            .collect()
    }

    /// Derived edge set `(parent, child)` in CPT declaration order.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.cpts
            .iter()
            .flat_map(|c| c.parents.iter().map(move |p| (p.clone(), c.child.clone())))
            .collect()
    }

    /// Variables whose CPT lists `name` as a parent, in CPT order.
    pub fn children(&self, name: &str) -> Vec<String> {
        self.cpts
            .iter()
            .filter(|c| c.parents.iter().any(|p| p == name))
            .map(|c| c.child.clone())
            .collect()
    }

    /// Deterministic topological order (Kahn's algorithm, ready ties broken
    /// by variable name). Returns `None` when the edge set has a cycle or
    /// references an unknown variable.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        topological_order(self).ok()
    }

    /// Content identifier: first 16 hex digits of the SHA-256 of the
    /// canonical serialization.
    pub fn id(&self) -> String {
        let bytes = format::render(self);
        let digest = Sha256::digest(bytes.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Kahn's algorithm over variable indices. On failure returns the indices
/// left unresolved (cycle members and their descendants).
pub(crate) fn topological_order(net: &Network) -> Result<Vec<usize>, Vec<usize>> {
    let n = net.variables.len();
    let mut indegree = vec![0usize; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for cpt in &net.cpts {
        let Some(c) = net.variable_index(&cpt.child) else {
            continue;
        };
        for p in &cpt.parents {
            match net.variable_index(p) {
                Some(pi) => {
                    indegree[c] += 1;
                    children[pi].push(c);
                }
                None => return Err((0..n).collect()),
            }
        }
    }
    let mut ready: BTreeSet<(&str, usize)> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(|i| (net.variables[i].name.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(first) = ready.pop_first() {
        let i = first.1;
        order.push(i);
        for &c in &children[i] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert((net.variables[c].name.as_str(), c));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let mut left: Vec<usize> = (0..n).filter(|&i| indegree[i] > 0).collect();
        left.sort_unstable();
        Err(left)
    }
}
