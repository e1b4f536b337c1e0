use crate::network::{config_index, validate, Network};

use super::{InferError, PredictiveDistribution};

/// Largest joint table [`joint_enumerate`] will build.
pub const JOINT_SIZE_LIMIT: u128 = 10_000_000;

/// Full joint distribution over every variable of a network.
///
/// Axes follow the network's topological order ([`Network::topological_order`])
/// with the first variable varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    order: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl JointTable {
    /// Declaration indices of the variables, one per axis.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Probability of a full assignment given in declaration order.
    pub fn probability(&self, assignment: &[usize]) -> f64 {
        let states: Vec<usize> = self.order.iter().map(|&v| assignment[v]).collect();
        self.values[config_index(&states, &self.cards)]
    }

    /// Iterates `(assignment in declaration order, probability)`.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let n = self.order.len();
        self.values.iter().enumerate().map(move |(i, &p)| {
            let mut rest = i;
            let mut assignment = vec![0; n];
            for axis in (0..n).rev() {
                assignment[self.order[axis]] = rest % self.cards[axis];
                rest /= self.cards[axis];
            }
            (assignment, p)
        })
    }

    /// Marginal over the given variables (declaration indices), flattened
    /// row-major in the order given.
    pub fn marginal(&self, vars: &[usize]) -> Vec<f64> {
        let cards: Vec<usize> = vars
            .iter()
            .map(|&v| self.cards[self.axis(v)])
            .collect();
        let mut out = vec![0.0; cards.iter().product()];
        for (assignment, p) in self.entries() {
            let states: Vec<usize> = vars.iter().map(|&v| assignment[v]).collect();
            out[config_index(&states, &cards)] += p;
        }
        out
    }

    /// `p(query | evidence)` by summing matching entries.
    pub fn conditional(
        &self,
        query: usize,
        evidence: &[(usize, usize)],
        name: &str,
    ) -> Result<PredictiveDistribution, InferError> {
        let mut out = vec![0.0; self.cards[self.axis(query)]];
        for (assignment, p) in self.entries() {
            if evidence.iter().all(|&(v, s)| assignment[v] == s) {
                out[assignment[query]] += p;
            }
        }
        let z: f64 = out.iter().sum();
        if !(z > 0.0) {
            return Err(InferError::ZeroEvidenceProbability { node: None });
        }
        Ok(PredictiveDistribution::new(
            name,
            out.into_iter().map(|x| x / z).collect(),
        ))
    }

    fn axis(&self, var: usize) -> usize {
        self.order
            .iter()
            .position(|&v| v == var)
            .expect("variable belongs to the table")
    }
}

/// Brute-force joint: every entry is the product of one CPT lookup per
/// variable.
pub fn joint_enumerate(net: &Network) -> Result<JointTable, InferError> {
    let report = validate(net);
    if report.has_errors() {
        return Err(InferError::InvalidNetwork(report));
    }
    let order = net.topological_order().expect("validated network is acyclic");
    let cards: Vec<usize> = order
        .iter()
        .map(|&v| net.variables()[v].cardinality())
        .collect();
    let size: u128 = cards.iter().map(|&c| c as u128).product();
    if size > JOINT_SIZE_LIMIT {
        return Err(InferError::TooLarge {
            size,
            limit: JOINT_SIZE_LIMIT,
        });
    }

    // For each variable: its CPT, parent declaration indices, parent cards.
    let lookups: Vec<(&[Vec<f64>], Vec<usize>, Vec<usize>)> = net
        .variables()
        .iter()
        .map(|v| {
            let cpt = net.cpt(&v.name).expect("validated");
            let parents: Vec<usize> = cpt
                .parents
                .iter()
                .map(|p| net.variable_index(p).expect("validated"))
                .collect();
            let pcards = parents
                .iter()
                .map(|&p| net.variables()[p].cardinality())
                .collect();
            (cpt.table.as_slice(), parents, pcards)
        })
        .collect();

    let n = order.len();
    let mut values = Vec::with_capacity(size as usize);
    let mut assignment = vec![0usize; net.variables().len()];
    let mut digits = vec![0usize; n];
    for _ in 0..size {
        for (axis, &v) in order.iter().enumerate() {
            assignment[v] = digits[axis];
        }
        let mut p = 1.0;
        for (v, (table, parents, pcards)) in lookups.iter().enumerate() {
            let pstates: Vec<usize> = parents.iter().map(|&q| assignment[q]).collect();
            p *= table[config_index(&pstates, pcards)][assignment[v]];
        }
        values.push(p);
        for axis in (0..n).rev() {
            digits[axis] += 1;
            if digits[axis] < cards[axis] {
                break;
            }
            digits[axis] = 0;
        }
    }
    Ok(JointTable {
        order,
        cards,
        values,
    })
}
