//! Declarative edits that turn a base network into an error model.

use serde::{Deserialize, Serialize};

use crate::infer::Engine;
use crate::network::{config_index, config_states, validate, Cpt, Network, Role, Variable};

use super::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Strong,
    Weak,
}

impl Strength {
    /// Mixing weight of a spurious parent's effect rows. Child rows for the
    /// parent's first and last states differ by exactly this much in total
    /// variation.
    pub fn alpha(self) -> f64 {
        match self {
            Strength::Strong => 0.4,
            Strength::Weak => 0.1,
        }
    }
}

/// A latent node added by [`ErrorTransform::IncludeNode`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    pub states: Vec<String>,
    pub prior: Vec<f64>,
    pub children: Vec<(String, Strength)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum ErrorTransform {
    /// Removes a node; each child's CPT averages over the removed parent
    /// using the base model's `p(removed | child's other parents)`.
    ExcludeNode { node: String },
    /// Adds a root node and makes it an extra (last) parent of each child.
    IncludeNode { spec: NodeSpec },
    /// Drops one parent of `child`, averaging it out as in `ExcludeNode`.
    ExcludeEdge { parent: String, child: String },
    /// Appends `parent` to `child`'s parent list. The row for parent state
    /// `s` of `m` is `(1 − α)·row + α·((1 − u)·e_first + u·e_last)` with
    /// `u = s/(m − 1)`.
    IncludeEdge {
        parent: String,
        child: String,
        strength: Strength,
    },
    /// Collapses two adjacent states into one labelled `label`.
    MergeStates {
        node: String,
        states: (String, String),
        label: String,
    },
    /// Replaces `state` by two states, `labels.0` then `labels.1`.
    SplitState {
        node: String,
        state: String,
        labels: (String, String),
    },
    /// Replaces the node's CPT rows.
    PerturbPriors { node: String, rows: Vec<Vec<f64>> },
}

struct Parts {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

impl Parts {
    fn of(net: &Network) -> Self {
        Parts {
            variables: net.variables().to_vec(),
            cpts: net.cpts().to_vec(),
        }
    }

    fn cpt_mut(&mut self, child: &str) -> &mut Cpt {
        self.cpts
            .iter_mut()
            .find(|c| c.child == child)
            .expect("every variable has a CPT")
    }

    fn finish(self) -> Result<Network, CorpusError> {
        let net = Network::new(self.variables, self.cpts);
        let report = validate(&net);
        if report.has_errors() {
            return Err(CorpusError::InvalidResult(report));
        }
        Ok(net)
    }
}

fn require_node(net: &Network, name: &str) -> Result<usize, CorpusError> {
    net.variable_index(name)
        .ok_or_else(|| CorpusError::UnknownNode(name.to_string()))
}

fn require_state(net: &Network, node: &str, state: &str) -> Result<usize, CorpusError> {
    net.variable(node)
        .ok_or_else(|| CorpusError::UnknownNode(node.to_string()))?
        .state_index(state)
        .ok_or_else(|| CorpusError::UnknownState {
            node: node.to_string(),
            state: state.to_string(),
        })
}

fn cards_of(net: &Network, names: &[String]) -> Vec<usize> {
    names
        .iter()
        .map(|p| net.variable(p).expect("known parent").cardinality())
        .collect()
}

/// `cpt` with `removed` averaged out under `base`'s conditional
/// distribution of `removed` given the remaining parents.
fn drop_parent(base: &Network, engine: &Engine<'_>, cpt: &Cpt, removed: &str) -> Result<Cpt, CorpusError> {
    let axis = cpt
        .parents
        .iter()
        .position(|p| p == removed)
        .ok_or_else(|| CorpusError::InvalidTransform(format!("`{removed}` is not a parent of `{}`", cpt.child)))?;
    let removed_idx = base.variable_index(removed).expect("known parent");
    let cards = cards_of(base, &cpt.parents);
    let rest: Vec<String> = cpt.parents.iter().filter(|p| *p != removed).cloned().collect();
    let rest_idx: Vec<usize> = rest
        .iter()
        .map(|p| base.variable_index(p).expect("known parent"))
        .collect();
    let rest_cards = cards_of(base, &rest);
    let rows: usize = rest_cards.iter().product();
    let width = cpt.table[0].len();
    let mut table = Vec::with_capacity(rows);
    for r in 0..rows {
        let states = config_states(r, &rest_cards);
        let evidence: Vec<(usize, usize)> = rest_idx.iter().copied().zip(states.iter().copied()).collect();
        let weights = match engine.conditional(removed_idx, &evidence) {
            Ok(p) => p.probabilities().to_vec(),
            Err(_) => engine.conditional(removed_idx, &[])?.probabilities().to_vec(),
        };
        let mut row = vec![0.0; width];
        for (s, w) in weights.iter().enumerate() {
            let mut full = states.clone();
            full.insert(axis, s);
            for (acc, v) in row.iter_mut().zip(&cpt.table[config_index(&full, &cards)]) {
                *acc += w * v;
            }
        }
        table.push(row);
    }
    Ok(Cpt {
        child: cpt.child.clone(),
        parents: rest,
        table,
    })
}

/// `cpt` with `parent` (of `m` states) appended to its parent list.
fn add_parent(cpt: &Cpt, parent: &str, m: usize, alpha: f64) -> Cpt {
    let mut table = Vec::with_capacity(cpt.table.len() * m);
    for row in &cpt.table {
        let k = row.len();
        for s in 0..m {
            let u = s as f64 / (m - 1) as f64;
            table.push(
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let target = if j == 0 { 1.0 - u } else { 0.0 } + if j == k - 1 { u } else { 0.0 };
                        (1.0 - alpha) * v + alpha * target
                    })
                    .collect(),
            );
        }
    }
    let mut parents = cpt.parents.clone();
    parents.push(parent.to_string());
    Cpt {
        child: cpt.child.clone(),
        parents,
        table,
    }
}

/// Rebuilds `cpt`'s rows when parent `axis` changes from `old_card` to
/// `new_card` states; `f` maps the old rows along that axis (indexed by
/// the parent's state) to the new ones.
fn remap_parent_axis<F>(cpt: &Cpt, cards: &[usize], axis: usize, new_card: usize, f: F) -> Cpt
where
    F: Fn(&[&Vec<f64>]) -> Vec<Vec<f64>>,
{
    let old_card = cards[axis];
    let mut new_cards = cards.to_vec();
    new_cards[axis] = new_card;
    let rows: usize = new_cards.iter().product();
    let mut table = vec![Vec::new(); rows];
    let outer_cards: Vec<usize> = cards
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != axis)
        .map(|(_, &c)| c)
        .collect();
    let outer: usize = outer_cards.iter().product();
    for o in 0..outer {
        let rest = config_states(o, &outer_cards);
        let slice: Vec<&Vec<f64>> = (0..old_card)
            .map(|s| {
                let mut full = rest.clone();
                full.insert(axis, s);
                &cpt.table[config_index(&full, cards)]
            })
            .collect();
        for (s, row) in f(&slice).into_iter().enumerate() {
            let mut full = rest.clone();
            full.insert(axis, s);
            table[config_index(&full, &new_cards)] = row;
        }
    }
    Cpt {
        child: cpt.child.clone(),
        parents: cpt.parents.clone(),
        table,
    }
}

fn exclude_node(base: &Network, node: &str) -> Result<Network, CorpusError> {
    require_node(base, node)?;
    let engine = Engine::new(base)?;
    let mut parts = Parts::of(base);
    parts.variables.retain(|v| v.name != node);
    parts.cpts.retain(|c| c.child != node);
    for cpt in parts.cpts.iter_mut() {
        if cpt.parents.iter().any(|p| p == node) {
            *cpt = drop_parent(base, &engine, cpt, node)?;
        }
    }
    parts.finish()
}

fn include_node(base: &Network, spec: &NodeSpec) -> Result<Network, CorpusError> {
    if base.variable(&spec.name).is_some() {
        return Err(CorpusError::InvalidTransform(format!("`{}` already exists", spec.name)));
    }
    for (child, _) in &spec.children {
        require_node(base, child)?;
    }
    let mut parts = Parts::of(base);
    let at = parts
        .variables
        .iter()
        .rposition(|v| v.role == Role::Latent)
        .map_or(0, |i| i + 1);
    let states: Vec<&str> = spec.states.iter().map(String::as_str).collect();
    parts.variables.insert(at, Variable::latent(spec.name.clone(), &states));
    let cpt_at = parts
        .cpts
        .iter()
        .rposition(|c| base.variable(&c.child).is_some_and(|v| v.role == Role::Latent))
        .map_or(0, |i| i + 1);
    parts.cpts.insert(cpt_at, Cpt::prior(spec.name.clone(), spec.prior.clone()));
    for (child, strength) in &spec.children {
        let cpt = parts.cpt_mut(child);
        *cpt = add_parent(cpt, &spec.name, spec.states.len(), strength.alpha());
    }
    parts.finish()
}

fn exclude_edge(base: &Network, parent: &str, child: &str) -> Result<Network, CorpusError> {
    require_node(base, parent)?;
    require_node(base, child)?;
    let engine = Engine::new(base)?;
    let mut parts = Parts::of(base);
    let cpt = parts.cpt_mut(child);
    *cpt = drop_parent(base, &engine, cpt, parent)?;
    parts.finish()
}

fn include_edge(base: &Network, parent: &str, child: &str, strength: Strength) -> Result<Network, CorpusError> {
    let m = base.variables()[require_node(base, parent)?].cardinality();
    require_node(base, child)?;
    let mut parts = Parts::of(base);
    let cpt = parts.cpt_mut(child);
    if cpt.parents.iter().any(|p| p == parent) {
        return Err(CorpusError::InvalidTransform(format!("`{parent}` is already a parent of `{child}`")));
    }
    *cpt = add_parent(cpt, parent, m, strength.alpha());
    parts.finish()
}

fn merge_states(base: &Network, node: &str, a: &str, b: &str, label: &str) -> Result<Network, CorpusError> {
    let ia = require_state(base, node, a)?;
    let ib = require_state(base, node, b)?;
    if ia.abs_diff(ib) != 1 {
        return Err(CorpusError::InvalidTransform(format!(
            "states `{a}` and `{b}` of `{node}` are not adjacent"
        )));
    }
    let (lo, hi) = (ia.min(ib), ia.max(ib));
    let engine = Engine::new(base)?;
    let marginal = engine.conditional(require_node(base, node)?, &[])?;
    let (wl, wh) = (marginal[lo], marginal[hi]);
    let (wl, wh) = if wl + wh > 0.0 { (wl / (wl + wh), wh / (wl + wh)) } else { (0.5, 0.5) };

    let mut parts = Parts::of(base);
    let var = parts.variables.iter_mut().find(|v| v.name == node).expect("known node");
    var.states[lo] = label.to_string();
    var.states.remove(hi);
    let own = parts.cpt_mut(node);
    for row in own.table.iter_mut() {
        row[lo] += row[hi];
        row.remove(hi);
    }
    for cpt in parts.cpts.iter_mut() {
        if let Some(axis) = cpt.parents.iter().position(|p| p == node) {
            let cards = cards_of(base, &cpt.parents);
            let old = cards[axis];
            *cpt = remap_parent_axis(cpt, &cards, axis, old - 1, |rows| {
                (0..old)
                    .filter(|&s| s != hi)
                    .map(|s| {
                        if s == lo {
                            rows[lo].iter().zip(rows[hi]).map(|(x, y)| wl * x + wh * y).collect()
                        } else {
                            rows[s].clone()
                        }
                    })
                    .collect()
            });
        }
    }
    parts.finish()
}

fn split_state(base: &Network, node: &str, state: &str, labels: &(String, String)) -> Result<Network, CorpusError> {
    let s = require_state(base, node, state)?;
    let mut parts = Parts::of(base);
    let var = parts.variables.iter_mut().find(|v| v.name == node).expect("known node");
    let k = var.states.len();
    var.states[s] = labels.0.clone();
    var.states.insert(s + 1, labels.1.clone());
    let own = parts.cpt_mut(node);
    for row in own.table.iter_mut() {
        row[s] /= 2.0;
        row.insert(s + 1, row[s]);
    }
    for cpt in parts.cpts.iter_mut() {
        if let Some(axis) = cpt.parents.iter().position(|p| p == node) {
            let cards = cards_of(base, &cpt.parents);
            *cpt = remap_parent_axis(cpt, &cards, axis, k + 1, |rows| {
                let lo = rows[s.saturating_sub(1)];
                let hi = rows[(s + 1).min(k - 1)];
                let span = if s > 0 && s + 1 < k { 2.0 } else { 1.0 };
                let delta: Vec<f64> = hi.iter().zip(lo).map(|(h, l)| (h - l) / span).collect();
                let mut t = 0.5;
                let shifted = |t: f64, sign: f64| -> Vec<f64> {
                    rows[s].iter().zip(&delta).map(|(v, d)| v + sign * t * d).collect()
                };
                while t > 1e-12
                    && (shifted(t, -1.0).iter().any(|&x| x < 0.0) || shifted(t, 1.0).iter().any(|&x| x < 0.0))
                {
                    t /= 2.0;
                }
                let mut out: Vec<Vec<f64>> = rows[..s].iter().map(|r| (*r).clone()).collect();
                out.push(shifted(t, -1.0));
                out.push(shifted(t, 1.0));
                out.extend(rows[s + 1..].iter().map(|r| (*r).clone()));
                out
            });
        }
    }
    parts.finish()
}

fn perturb_priors(base: &Network, node: &str, rows: &[Vec<f64>]) -> Result<Network, CorpusError> {
    require_node(base, node)?;
    let mut parts = Parts::of(base);
    parts.cpt_mut(node).table = rows.to_vec();
    parts.finish()
}

/// Applies `t` to `base`; the result has passed validation.
pub fn apply_transform(base: &Network, t: &ErrorTransform) -> Result<Network, CorpusError> {
    match t {
        ErrorTransform::ExcludeNode { node } => exclude_node(base, node),
        ErrorTransform::IncludeNode { spec } => include_node(base, spec),
        ErrorTransform::ExcludeEdge { parent, child } => exclude_edge(base, parent, child),
        ErrorTransform::IncludeEdge {
            parent,
            child,
            strength,
        } => include_edge(base, parent, child, *strength),
        ErrorTransform::MergeStates { node, states, label } => merge_states(base, node, &states.0, &states.1, label),
        ErrorTransform::SplitState { node, state, labels } => split_state(base, node, state, labels),
        ErrorTransform::PerturbPriors { node, rows } => perturb_priors(base, node, rows),
    }
}
