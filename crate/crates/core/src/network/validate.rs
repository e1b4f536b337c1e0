use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{topological_order, Network, ROW_SUM_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: &'static str,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} {} at {}: {}", self.code, self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.findings.iter().any(|f| f.code == code)
    }

    fn error(&mut self, code: &'static str, location: String, message: String) {
        self.findings.push(Finding {
            severity: Severity::Error,
            code,
            location,
            message,
        });
    }

    fn warning(&mut self, code: &'static str, location: String, message: String) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            code,
            location,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let errors = self.errors().count();
        write!(f, "{} finding(s), {} error(s)", self.findings.len(), errors)?;
        for finding in &self.findings {
            write!(f, "\n  {finding}")?;
        }
        Ok(())
    }
}

/// Checks every structural and probabilistic invariant of a candidate
/// network. Never fails; problems are findings.
pub fn validate(net: &Network) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut names = HashSet::new();
    for v in net.variables() {
        let loc = format!("variable[{}]", v.name);
        if v.name.is_empty() {
            report.error("EMPTY_NAME", loc.clone(), "variable name is empty".into());
        }
        if !names.insert(v.name.as_str()) {
            report.error(
                "DUPLICATE_VARIABLE",
                loc.clone(),
                format!("variable `{}` declared more than once", v.name),
            );
        }
        if v.states.len() < 2 {
            report.error(
                "TOO_FEW_STATES",
                loc.clone(),
                format!("{} state(s); at least 2 required", v.states.len()),
            );
        }
        let mut seen = HashSet::new();
        for s in &v.states {
            if !seen.insert(s.as_str()) {
                report.error(
                    "DUPLICATE_STATE",
                    loc.clone(),
                    format!("state label `{s}` repeated"),
                );
            }
        }
    }
    if net.observables().next().is_none() {
        report.error(
            "NO_OBSERVABLE",
            "network".into(),
            "network declares no observable variable".into(),
        );
    }

    let mut covered = HashSet::new();
    let mut parents_known = true;
    for (ci, cpt) in net.cpts().iter().enumerate() {
        let loc = format!("cpts[{ci}] ({})", cpt.child);
        let Some(child) = net.variable(&cpt.child) else {
            report.error(
                "CPT_UNKNOWN_CHILD",
                loc,
                format!("CPT child `{}` is not a declared variable", cpt.child),
            );
            continue;
        };
        if !covered.insert(cpt.child.as_str()) {
            report.error(
                "DUPLICATE_CPT",
                loc.clone(),
                format!("second CPT for `{}`", cpt.child),
            );
        }
        let mut cards = Vec::with_capacity(cpt.parents.len());
        let mut seen = HashSet::new();
        for p in &cpt.parents {
            if p == &cpt.child {
                report.error(
                    "SELF_PARENT",
                    loc.clone(),
                    format!("`{p}` lists itself as a parent"),
                );
            }
            if !seen.insert(p.as_str()) {
                report.error(
                    "DUPLICATE_PARENT",
                    loc.clone(),
                    format!("parent `{p}` listed twice"),
                );
            }
            match net.variable(p) {
                Some(pv) => cards.push(pv.cardinality()),
                None => {
                    parents_known = false;
                    report.error(
                        "UNKNOWN_PARENT",
                        loc.clone(),
                        format!("parent `{p}` is not a declared variable"),
                    );
                }
            }
        }
        if cards.len() == cpt.parents.len() {
            let expected: usize = cards.iter().product();
            if cpt.table.len() != expected {
                report.error(
                    "CPT_ROW_COUNT",
                    loc.clone(),
                    format!("{} row(s); expected {expected}", cpt.table.len()),
                );
            }
        }
        for (ri, row) in cpt.table.iter().enumerate() {
            let rloc = format!("{loc}.table[{ri}]");
            if row.len() != child.cardinality() {
                report.error(
                    "CPT_ROW_LENGTH",
                    rloc.clone(),
                    format!("{} entries; expected {}", row.len(), child.cardinality()),
                );
            }
            if let Some(bad) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                report.error(
                    "CPT_ENTRY_RANGE",
                    rloc.clone(),
                    format!("entry {bad} outside [0, 1]"),
                );
                continue;
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                report.error("CPT_ROW_SUM", rloc.clone(), format!("row sums to {sum}"));
            }
            if row.contains(&0.0) {
                report.warning(
                    "ZERO_PROBABILITY",
                    rloc,
                    "zero entry; evidence may become impossible".into(),
                );
            }
        }
    }
    for v in net.variables() {
        if !covered.contains(v.name.as_str()) {
            report.error(
                "MISSING_CPT",
                format!("variable[{}]", v.name),
                format!("no CPT for `{}`", v.name),
            );
        }
    }

    if parents_known {
        match topological_order(net) {
            Ok(_) => latent_reach(net, &mut report),
            Err(left) => {
                let members: Vec<&str> = left
                    .iter()
                    .map(|&i| net.variables()[i].name.as_str())
                    .collect();
                report.error(
                    "CYCLE",
                    format!("edges among [{}]", members.join(", ")),
                    "derived edge set is not acyclic".into(),
                );
            }
        }
    }
    report
}

fn latent_reach(net: &Network, report: &mut ValidationReport) {
    for v in net.variables().iter().filter(|v| !v.is_observable()) {
        let mut stack = vec![v.name.clone()];
        let mut seen = HashSet::new();
        let mut reaches = false;
        while let Some(cur) = stack.pop() {
            for c in net.children(&cur) {
                if net.variable(&c).is_some_and(|cv| cv.is_observable()) {
                    reaches = true;
                }
                if seen.insert(c.clone()) {
                    stack.push(c);
                }
            }
        }
        if !reaches {
            report.warning(
                "LATENT_UNOBSERVED",
                format!("variable[{}]", v.name),
                "latent variable has no observable descendant".into(),
            );
        }
    }
}
