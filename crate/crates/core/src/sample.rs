//! Ancestral sampling, nested prefixes, bootstrap resampling and the
//! dataset file format.
//!
//! Row `i` of `forward_sample(net, n, seed)` is drawn from
//! `seed::stream(seed, i)` alone, so any prefix of a larger sample is the
//! smaller sample with the same seed, and rows can be generated in
//! parallel without changing a single byte.
//!
//! On disk a dataset is a CSV whose header lists the observable names and
//! whose cells are state labels. An optional sidecar `<file>.meta.json`
//! records `{network_id, seed, n}`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{config_index, validate, Network, ValidationReport};
use crate::seed::{self, Seed};

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("OUT_OF_RANGE: requested {requested} rows from a dataset of {available}")]
    OutOfRange { requested: usize, available: usize },
    #[error("EMPTY_DATASET: cannot resample from zero rows")]
    EmptyDataset,
    #[error("INVALID_NETWORK: {0}")]
    InvalidNetwork(ValidationReport),
    #[error("COLUMN_MISMATCH: {0}")]
    ColumnMismatch(String),
    #[error("UNKNOWN_LABEL: `{label}` is not a state of `{column}` (line {line})")]
    UnknownLabel {
        column: String,
        label: String,
        line: usize,
    },
    #[error("CSV_ERROR: {0}")]
    Csv(String),
    #[error("IO_ERROR: {0}")]
    Io(String),
}

impl SampleError {
    pub fn code(&self) -> &'static str {
        match self {
            SampleError::OutOfRange { .. } => "OUT_OF_RANGE",
            SampleError::EmptyDataset => "EMPTY_DATASET",
            SampleError::InvalidNetwork(_) => "INVALID_NETWORK",
            SampleError::ColumnMismatch(_) => "COLUMN_MISMATCH",
            SampleError::UnknownLabel { .. } => "UNKNOWN_LABEL",
            SampleError::Csv(_) => "CSV_ERROR",
            SampleError::Io(_) => "IO_ERROR",
        }
    }
}

/// Where a dataset came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub network_id: String,
    pub seed: Seed,
    pub n: usize,
}

/// Observed state indices: one row per simulee, one column per observable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    columns: Vec<String>,
    states: Vec<Vec<String>>,
    rows: Vec<Vec<usize>>,
    provenance: Option<Provenance>,
}

impl Dataset {
    /// An empty dataset whose columns are the observables of `net`.
    pub fn empty_for(net: &Network) -> Self {
        Dataset {
            columns: net.observable_names(),
            states: net.observables().map(|v| v.states.clone()).collect(),
            rows: Vec::new(),
            provenance: None,
        }
    }

    /// Builds a dataset for `net` from index rows, checking every cell.
    pub fn from_rows(net: &Network, rows: Vec<Vec<usize>>) -> Result<Self, SampleError> {
        let mut ds = Dataset::empty_for(net);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != ds.columns.len() {
                return Err(SampleError::ColumnMismatch(format!(
                    "row {r} has {} cells, expected {}",
                    row.len(),
                    ds.columns.len()
                )));
            }
            for (c, &s) in row.iter().enumerate() {
                if s >= ds.states[c].len() {
                    return Err(SampleError::ColumnMismatch(format!(
                        "row {r}: state {s} out of range for `{}`",
                        ds.columns[c]
                    )));
                }
            }
        }
        ds.rows = rows;
        Ok(ds)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    /// State labels of each column.
    pub fn states(&self) -> &[Vec<String>] {
        &self.states
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn with_provenance(mut self, provenance: Option<Provenance>) -> Self {
        self.provenance = provenance;
        self
    }

    /// True when columns and state rosters agree with `net`'s observables.
    pub fn matches(&self, net: &Network) -> bool {
        self.columns == net.observable_names()
            && self
                .states
                .iter()
                .zip(net.observables())
                .all(|(s, v)| s == &v.states)
    }
}

/// Draws one observable row from `rng` by sampling every variable in
/// `order` from its CPT.
struct Sampler<'a> {
    order: Vec<usize>,
    tables: Vec<(&'a [Vec<f64>], Vec<usize>, Vec<usize>)>,
    observables: Vec<usize>,
}

impl<'a> Sampler<'a> {
    fn new(net: &'a Network) -> Self {
        let tables = net
            .variables()
            .iter()
            .map(|v| {
                let cpt = net.cpt(&v.name).expect("validated");
                let parents: Vec<usize> = cpt
                    .parents
                    .iter()
                    .map(|p| net.variable_index(p).expect("validated"))
                    .collect();
                let cards = parents
                    .iter()
                    .map(|&p| net.variables()[p].cardinality())
                    .collect();
                (cpt.table.as_slice(), parents, cards)
            })
            .collect();
        Sampler {
            order: net.topological_order().expect("validated"),
            tables,
            observables: net.observable_indices(),
        }
    }

    fn row(&self, seed: Seed, i: u64) -> Vec<usize> {
        let mut rng = seed::stream(seed, i);
        let mut states = vec![0usize; self.tables.len()];
        let mut pstates = Vec::new();
        for &v in &self.order {
            let (table, parents, cards) = &self.tables[v];
            pstates.clear();
            pstates.extend(parents.iter().map(|&p| states[p]));
            states[v] = seed::categorical(&mut rng, &table[config_index(&pstates, cards)]);
        }
        self.observables.iter().map(|&v| states[v]).collect()
    }
}

/// `n` i.i.d. ancestral samples; only observable columns are kept.
pub fn forward_sample(net: &Network, n: usize, seed: Seed) -> Result<Dataset, SampleError> {
    let report = validate(net);
    if report.has_errors() {
        return Err(SampleError::InvalidNetwork(report));
    }
    let sampler = Sampler::new(net);
    let rows: Vec<Vec<usize>> = (0..n as u64)
        .into_par_iter()
        .map(|i| sampler.row(seed, i))
        .collect();
    let mut ds = Dataset::empty_for(net);
    ds.rows = rows;
    ds.provenance = Some(Provenance {
        network_id: net.id(),
        seed,
        n,
    });
    Ok(ds)
}

/// The first `n` rows.
pub fn prefix(ds: &Dataset, n: usize) -> Result<Dataset, SampleError> {
    if n > ds.len() {
        return Err(SampleError::OutOfRange {
            requested: n,
            available: ds.len(),
        });
    }
    Ok(Dataset {
        columns: ds.columns.clone(),
        states: ds.states.clone(),
        rows: ds.rows[..n].to_vec(),
        provenance: ds.provenance.clone().map(|p| Provenance { n, ..p }),
    })
}

/// Row indices of a size-`n` resample with replacement from `len` rows.
pub fn resample_indices(len: usize, n: usize, seed: Seed) -> Result<Vec<usize>, SampleError> {
    if len == 0 {
        return Err(SampleError::EmptyDataset);
    }
    let mut rng = seed::stream(seed, 0);
    Ok((0..n).map(|_| seed::index(&mut rng, len)).collect())
}

/// `n` rows drawn uniformly with replacement.
pub fn resample(ds: &Dataset, n: usize, seed: Seed) -> Result<Dataset, SampleError> {
    let idx = resample_indices(ds.len(), n, seed)?;
    Ok(Dataset {
        columns: ds.columns.clone(),
        states: ds.states.clone(),
        rows: idx.into_iter().map(|i| ds.rows[i].clone()).collect(),
        provenance: None,
    })
}

/// CSV with a header of column names and state labels in the cells.
pub fn to_csv(ds: &Dataset) -> Result<Vec<u8>, SampleError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&ds.columns)
        .map_err(|e| SampleError::Csv(e.to_string()))?;
    for row in &ds.rows {
        w.write_record(row.iter().enumerate().map(|(c, &s)| ds.states[c][s].as_str()))
            .map_err(|e| SampleError::Csv(e.to_string()))?;
    }
    w.into_inner().map_err(|e| SampleError::Csv(e.to_string()))
}

/// Parses a dataset CSV, resolving labels against `net`'s observables.
pub fn from_csv(bytes: &[u8], net: &Network) -> Result<Dataset, SampleError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let header: Vec<String> = r
        .headers()
        .map_err(|e| SampleError::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut ds = Dataset::empty_for(net);
    if header != ds.columns {
        return Err(SampleError::ColumnMismatch(format!(
            "header [{}] does not match observables [{}]",
            header.join(", "),
            ds.columns.join(", ")
        )));
    }
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| SampleError::Csv(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, label)| {
                ds.states[c]
                    .iter()
                    .position(|s| s == label)
                    .ok_or_else(|| SampleError::UnknownLabel {
                        column: ds.columns[c].clone(),
                        label: label.to_string(),
                        line: line + 2,
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        ds.rows.push(row);
    }
    Ok(ds)
}

/// Path of the metadata sidecar for a dataset file.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the CSV and, when the dataset has provenance, its sidecar.
pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<(), SampleError> {
    let io = |e: std::io::Error| SampleError::Io(format!("{}: {e}", path.display()));
    fs::write(path, to_csv(ds)?).map_err(io)?;
    if let Some(p) = &ds.provenance {
        let mut json = serde_json::to_string_pretty(p).expect("provenance serializes");
        json.push('\n');
        fs::write(sidecar_path(path), json).map_err(io)?;
    }
    Ok(())
}

/// Reads a dataset file and its sidecar if one exists.
pub fn read_dataset(path: &Path, net: &Network) -> Result<Dataset, SampleError> {
    let io = |e: std::io::Error| SampleError::Io(format!("{}: {e}", path.display()));
    let ds = from_csv(&fs::read(path).map_err(io)?, net)?;
    let side = sidecar_path(path);
    let provenance = if side.exists() {
        let text = fs::read_to_string(&side).map_err(io)?;
        Some(serde_json::from_str(&text).map_err(|e| SampleError::Csv(e.to_string()))?)
    } else {
        None
    };
    Ok(ds.with_provenance(provenance))
}
