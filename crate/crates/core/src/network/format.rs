//! On-disk network format: JSON with top-level `variables` and `cpts`.
//!
//! The canonical rendering is UTF-8, keys in the order
//! `variables`/`cpts`, `name`/`role`/`states`, `child`/`parents`/`table`,
//! arrays in declaration order, one CPT row per line. Floats are written
//! in their shortest round-trip decimal form so that a load/save cycle
//! preserves every probability exactly.

use std::fmt::Write as _;

use serde::Deserialize;

use super::{validate, Cpt, Network, NetworkError, Variable};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Rescale each CPT row to sum to 1 before validation.
    pub renormalize: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

pub fn load_network(bytes: &[u8]) -> Result<Network, NetworkError> {
    load_network_with(bytes, LoadOptions::default())
}

pub fn load_network_with(bytes: &[u8], options: LoadOptions) -> Result<Network, NetworkError> {
    let text = std::str::from_utf8(bytes).map_err(|e| NetworkError::Parse(e.to_string()))?;
    let mut raw: RawNetwork =
        serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
    if options.renormalize {
        for row in raw.cpts.iter_mut().flat_map(|c| c.table.iter_mut()) {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                row.iter_mut().for_each(|x| *x /= sum);
            }
        }
    }
    Network::validated(raw.variables, raw.cpts)
}

pub fn save_network(net: &Network) -> Result<Vec<u8>, NetworkError> {
    let report = validate(net);
    if report.has_errors() {
        return Err(NetworkError::Validation(report));
    }
    Ok(render(net).into_bytes())
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

fn list<I: IntoIterator<Item = String>>(items: I) -> String {
    let items: Vec<String> = items.into_iter().collect();
    format!("[{}]", items.join(", "))
}

pub(super) fn render(net: &Network) -> String {
    let mut out = String::from("{\n  \"variables\": [\n");
    let vars = net.variables();
    for (i, v) in vars.iter().enumerate() {
        let _ = write!(
            out,
            "    {{\"name\": {}, \"role\": {}, \"states\": {}}}",
            quote(&v.name),
            quote(&v.role.to_string()),
            list(v.states.iter().map(|s| quote(s)))
        );
        out.push_str(if i + 1 < vars.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n  \"cpts\": [\n");
    let cpts = net.cpts();
    for (i, c) in cpts.iter().enumerate() {
        let _ = writeln!(
            out,
            "    {{\"child\": {}, \"parents\": {}, \"table\": [",
            quote(&c.child),
            list(c.parents.iter().map(|p| quote(p)))
        );
        for (r, row) in c.table.iter().enumerate() {
            let _ = write!(out, "      {}", list(row.iter().map(|x| format!("{x}"))));
            out.push_str(if r + 1 < c.table.len() { ",\n" } else { "\n" });
        }
        out.push_str("    ]}");
        out.push_str(if i + 1 < cpts.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ]\n}\n");
    out
}
