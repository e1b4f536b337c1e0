//! The MD data generation network, its nine error models and the study
//! runner that criticizes each of them against data from the true model.
//!
//! Latent skills: `theta1` (overall medical ability) is the parent of
//! `theta2` (pharmaceutical), `theta3` (physical exam) and `theta4`
//! (treatment planning). Patients `X1` and `X2` depend on `theta2` and
//! `theta3`; `X3` on `theta2`, `theta3` and `theta4`; `X4` and `X5` on
//! `theta3` and `theta4`.
//!
//! Outcome CPTs are conjunctive: the effective skill for a patient is the
//! lowest rank among its parents, and that rank selects one of three
//! outcome rows over {degrade, maintain, improve, healed}. `X3` mixes
//! 90% of the row for `min(theta2, theta3)` with 10% of the row for the
//! full minimum, so `theta4 -> X3` is the weak edge into the patients and
//! `theta4 -> X4`, `theta4 -> X5` are strong.

mod study;
mod transform;

use thiserror::Error;

use crate::infer::InferError;
use crate::network::{config_states, Cpt, Network, Variable};
use crate::network::ValidationReport;

pub use study::{
    model_config, observed_seed, run_models, run_study, write_report, write_study, GridCell, GridRow,
    ModelRun, Study, StudyGrid,
};
pub use transform::{apply_transform, ErrorTransform, NodeSpec, Strength};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("UNKNOWN_NODE: `{0}`")]
    UnknownNode(String),
    #[error("UNKNOWN_STATE: `{state}` is not a state of `{node}`")]
    UnknownState { node: String, state: String },
    #[error("INVALID_TRANSFORM: {0}")]
    InvalidTransform(String),
    #[error("INVALID_RESULT: {0}")]
    InvalidResult(ValidationReport),
    #[error(transparent)]
    Infer(#[from] InferError),
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::UnknownNode(_) => "UNKNOWN_NODE",
            CorpusError::UnknownState { .. } => "UNKNOWN_STATE",
            CorpusError::InvalidTransform(_) => "INVALID_TRANSFORM",
            CorpusError::InvalidResult(_) => "INVALID_RESULT",
            CorpusError::Infer(e) => e.code(),
        }
    }
}

pub const OUTCOMES: [&str; 4] = ["degrade", "maintain", "improve", "healed"];

/// Outcome rows indexed by effective skill rank.
pub const OUTCOME_ROWS: [[f64; 4]; 3] = [
    [0.97, 0.015, 0.010, 0.005],
    [0.01, 0.49, 0.49, 0.01],
    [0.005, 0.010, 0.015, 0.97],
];

/// Weight of the full conjunctive row in `X3`'s CPT.
pub const X3_THETA4_WEIGHT: f64 = 0.1;

const THETA1_PRIOR: [f64; 4] = [0.15, 0.35, 0.35, 0.15];
const THETA2_ROWS: [[f64; 3]; 4] = [
    [0.60, 0.30, 0.10],
    [0.30, 0.50, 0.20],
    [0.15, 0.50, 0.35],
    [0.05, 0.35, 0.60],
];
const THETA3_ROWS: [[f64; 3]; 4] = [
    [0.24, 0.12, 0.64],
    [0.12, 0.20, 0.68],
    [0.06, 0.20, 0.74],
    [0.02, 0.14, 0.84],
];
const THETA4_ROWS: [[f64; 3]; 4] = [
    [0.45, 0.35, 0.20],
    [0.35, 0.40, 0.25],
    [0.25, 0.40, 0.35],
    [0.20, 0.35, 0.45],
];

fn rows<const K: usize>(r: &[[f64; K]]) -> Vec<Vec<f64>> {
    r.iter().map(|row| row.to_vec()).collect()
}

/// Conjunctive outcome CPT over three-state parents. `weak` lists parent
/// positions that enter only through the `weight`ed full-minimum row.
fn conjunctive(child: &str, parents: &[&str], weak: &[usize], weight: f64) -> Cpt {
    let cards = vec![3; parents.len()];
    let table = (0..3usize.pow(parents.len() as u32))
        .map(|r| {
            let states = config_states(r, &cards);
            let full = *states.iter().min().expect("at least one parent");
            if weak.is_empty() {
                return OUTCOME_ROWS[full].to_vec();
            }
            let strong = states
                .iter()
                .enumerate()
                .filter(|(i, _)| !weak.contains(i))
                .map(|(_, &s)| s)
                .min()
                .expect("at least one strong parent");
            OUTCOME_ROWS[strong]
                .iter()
                .zip(&OUTCOME_ROWS[full])
                .map(|(s, f)| (1.0 - weight) * s + weight * f)
                .collect()
        })
        .collect();
    Cpt::new(child, parents, table)
}

/// The data generation network.
pub fn build_md_model() -> Network {
    let variables = vec![
        Variable::latent("theta1", &["poor", "moderate", "good", "excellent"]),
        Variable::latent("theta2", &["inappropriate", "typical", "precise"]),
        Variable::latent("theta3", &["incomplete", "adequate", "thorough"]),
        Variable::latent("theta4", &["trial-and-error", "by-the-book", "custom to patient"]),
        Variable::observable("X1", &OUTCOMES),
        Variable::observable("X2", &OUTCOMES),
        Variable::observable("X3", &OUTCOMES),
        Variable::observable("X4", &OUTCOMES),
        Variable::observable("X5", &OUTCOMES),
    ];
    let cpts = vec![
        Cpt::prior("theta1", THETA1_PRIOR.to_vec()),
        Cpt::new("theta2", &["theta1"], rows(&THETA2_ROWS)),
        Cpt::new("theta3", &["theta1"], rows(&THETA3_ROWS)),
        Cpt::new("theta4", &["theta1"], rows(&THETA4_ROWS)),
        conjunctive("X1", &["theta2", "theta3"], &[], 0.0),
        conjunctive("X2", &["theta2", "theta3"], &[], 0.0),
        conjunctive("X3", &["theta2", "theta3", "theta4"], &[2], X3_THETA4_WEIGHT),
        conjunctive("X4", &["theta3", "theta4"], &[], 0.0),
        conjunctive("X5", &["theta3", "theta4"], &[], 0.0),
    ];
    Network::validated(variables, cpts).expect("canonical model is valid")
}

/// Prior error: 0.15 of each `theta4` row moves from its last state to
/// its first.
pub const PRIOR_SHIFT: f64 = 0.15;

fn shifted_theta4_rows() -> Vec<Vec<f64>> {
    THETA4_ROWS
        .iter()
        .map(|r| vec![r[0] + PRIOR_SHIFT, r[1], r[2] - PRIOR_SHIFT])
        .collect()
}

/// A named error model recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModel {
    pub name: &'static str,
    pub slug: &'static str,
    pub transform: ErrorTransform,
}

pub const DATA_GENERATION: (&str, &str) = ("Data Generation", "data-generation");

/// The nine error models, all centred on `theta4`.
pub fn standard_transforms() -> Vec<ErrorModel> {
    let s = |x: &str| x.to_string();
    vec![
        ErrorModel {
            name: "Node Exclusion",
            slug: "node-exclusion",
            transform: ErrorTransform::ExcludeNode { node: s("theta4") },
        },
        ErrorModel {
            name: "Node Inclusion",
            slug: "node-inclusion",
            transform: ErrorTransform::IncludeNode {
                spec: NodeSpec {
                    name: s("theta5"),
                    states: vec![s("community"), s("academic")],
                    prior: vec![0.5, 0.5],
                    children: vec![(s("X4"), Strength::Weak), (s("X5"), Strength::Weak)],
                },
            },
        },
        ErrorModel {
            name: "State Exclusion",
            slug: "state-exclusion",
            transform: ErrorTransform::MergeStates {
                node: s("theta4"),
                states: (s("trial-and-error"), s("by-the-book")),
                label: s("routine"),
            },
        },
        ErrorModel {
            name: "State Inclusion",
            slug: "state-inclusion",
            transform: ErrorTransform::SplitState {
                node: s("theta4"),
                state: s("by-the-book"),
                labels: (s("by-the-book strict"), s("by-the-book adapted")),
            },
        },
        ErrorModel {
            name: "Prior Probability",
            slug: "prior-probability",
            transform: ErrorTransform::PerturbPriors {
                node: s("theta4"),
                rows: shifted_theta4_rows(),
            },
        },
        ErrorModel {
            name: "Strong Edge Exclusion",
            slug: "strong-edge-exclusion",
            transform: ErrorTransform::ExcludeEdge {
                parent: s("theta4"),
                child: s("X4"),
            },
        },
        ErrorModel {
            name: "Strong Edge Inclusion",
            slug: "strong-edge-inclusion",
            transform: ErrorTransform::IncludeEdge {
                parent: s("theta4"),
                child: s("X1"),
                strength: Strength::Strong,
            },
        },
        ErrorModel {
            name: "Weak Edge Exclusion",
            slug: "weak-edge-exclusion",
            transform: ErrorTransform::ExcludeEdge {
                parent: s("theta4"),
                child: s("X3"),
            },
        },
        ErrorModel {
            name: "Weak Edge Inclusion",
            slug: "weak-edge-inclusion",
            transform: ErrorTransform::IncludeEdge {
                parent: s("theta4"),
                child: s("X1"),
                strength: Strength::Weak,
            },
        },
    ]
}

/// The nine error models applied to `base`, in table order.
pub fn standard_error_models(base: &Network) -> Result<Vec<(String, Network)>, CorpusError> {
    standard_transforms()
        .into_iter()
        .map(|m| Ok((m.name.to_string(), apply_transform(base, &m.transform)?)))
        .collect()
}

/// A corpus entry: display name, file slug and network.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub slug: String,
    pub network: Network,
}

/// The data generation model followed by the nine error models.
pub fn standard_corpus() -> Vec<CorpusEntry> {
    let base = build_md_model();
    let mut out = vec![CorpusEntry {
        name: DATA_GENERATION.0.into(),
        slug: DATA_GENERATION.1.into(),
        network: base.clone(),
    }];
    for m in standard_transforms() {
        out.push(CorpusEntry {
            name: m.name.into(),
            slug: m.slug.into(),
            network: apply_transform(&base, &m.transform).expect("standard transforms are valid"),
        });
    }
    out
}

/// Observables of `model` affected by an edit relative to `base`: those
/// whose parent list or CPT changed, and those with a parent whose states
/// or CPT changed or that does not exist in `base`.
pub fn touched_observables(base: &Network, model: &Network) -> Vec<String> {
    let changed = |name: &str| -> bool {
        match (base.variable(name), model.variable(name)) {
            (Some(a), Some(b)) => a != b || base.cpt(name) != model.cpt(name),
            _ => true,
        }
    };
    model
        .observables()
        .filter(|v| {
            let cpt = model.cpt(&v.name).expect("valid model");
            base.cpt(&v.name).map(|c| &c.parents) != Some(&cpt.parents)
                || changed(&v.name)
                || cpt.parents.iter().any(|p| changed(p))
        })
        .map(|v| v.name.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn md_shape() {
        let net = build_md_model();
        assert_eq!(net.variables().len(), 9);
        assert_eq!(net.observable_names(), vec!["X1", "X2", "X3", "X4", "X5"]);
        for t in ["theta2", "theta3", "theta4"] {
            let cpt = net.cpt(t).unwrap();
            assert_eq!(cpt.parents, vec!["theta1".to_string()]);
            assert_eq!(cpt.table.len(), 4);
            assert!(cpt.table.iter().all(|r| r.len() == 3));
        }
    }

    #[test]
    fn touched_sets() {
        let base = build_md_model();
        let corpus = standard_corpus();
        let touched: Vec<Vec<String>> = corpus.iter().map(|e| touched_observables(&base, &e.network)).collect();
        assert!(touched[0].is_empty());
        assert_eq!(touched[1], vec!["X3", "X4", "X5"]);
        assert_eq!(touched[2], vec!["X4", "X5"]);
        assert_eq!(touched[5], vec!["X3", "X4", "X5"]);
        assert_eq!(touched[6], vec!["X4"]);
        assert_eq!(touched[7], vec!["X1"]);
        assert_eq!(touched[8], vec!["X3"]);
    }
}
