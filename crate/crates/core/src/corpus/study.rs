//! The full criticism study: observed data from the data generation model,
//! then every corpus model criticized against it.

use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::critic::{self, CriticError, FitReport, Level, StudyConfig, SummaryRow};
use crate::network::{save_network, Network};
use crate::sample::{self, Dataset};
use crate::score::ScoreKind;
use crate::seed::{self, tag};

use super::{standard_corpus, touched_observables};

/// One criticized model.
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub name: String,
    pub slug: String,
    pub network: Network,
    pub touched: Vec<String>,
    pub config: StudyConfig,
    pub report: FitReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridCell {
    /// Sample sizes with a significant deviation.
    pub sizes: Vec<usize>,
    /// Whether the model's error touched this node or its parents.
    pub touched: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GridRow {
    pub model: String,
    pub cells: Vec<GridCell>,
}

/// Models by {Global, observables} grid of flagged sample sizes for one
/// index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StudyGrid {
    pub kind: ScoreKind,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<GridRow>,
}

impl StudyGrid {
    pub fn row(&self, model: &str) -> Option<&GridRow> {
        self.rows.iter().find(|r| r.model == model)
    }

    /// Flagged sizes for `model` at the column labelled `column`.
    pub fn cell(&self, model: &str, column: &str) -> Option<&GridCell> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.row(model).map(|r| &r.cells[c])
    }
}

#[derive(Debug, Clone)]
pub struct Study {
    pub config: StudyConfig,
    pub kinds: Vec<ScoreKind>,
    pub observed: Dataset,
    pub models: Vec<ModelRun>,
    pub grids: Vec<StudyGrid>,
}

impl Study {
    pub fn grid(&self, kind: ScoreKind) -> Option<&StudyGrid> {
        self.grids.iter().find(|g| g.kind == kind)
    }

    pub fn summary_table(&self, kind: ScoreKind) -> String {
        let rows: Vec<SummaryRow<'_>> = self
            .models
            .iter()
            .map(|m| SummaryRow {
                model: m.name.clone(),
                report: &m.report,
                touched: m.touched.clone(),
            })
            .collect();
        critic::summary_table(kind, &rows)
    }
}

/// Seed of the observed data set.
pub fn observed_seed(cfg: &StudyConfig) -> u64 {
    seed::derive(cfg.seed, &[tag::OBSERVED])
}

/// Configuration used for the `i`-th corpus model.
pub fn model_config(cfg: &StudyConfig, i: usize) -> StudyConfig {
    StudyConfig {
        seed: seed::derive(cfg.seed, &[tag::MODEL, i as u64]),
        ..cfg.clone()
    }
}

fn build_grid(kind: ScoreKind, models: &[ModelRun]) -> StudyGrid {
    let levels: Vec<Level> = models
        .first()
        .map(|m| m.report.levels())
        .unwrap_or_default();
    StudyGrid {
        kind,
        title: kind.title().to_string(),
        columns: levels
            .iter()
            .map(|l| match l {
                Level::Global => "Global".to_string(),
                Level::Node(n) => n.clone(),
            })
            .collect(),
        rows: models
            .iter()
            .map(|m| GridRow {
                model: m.name.clone(),
                cells: levels
                    .iter()
                    .map(|l| GridCell {
                        sizes: m.report.flagged_sizes(kind, l),
                        touched: matches!(l, Level::Node(n) if m.touched.contains(n)),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Generates `max(cfg.sizes)` observed rows from the data generation
/// model and criticizes the data generation model and all nine error
/// models against them.
pub fn run_study(cfg: &StudyConfig, kinds: &[ScoreKind]) -> Result<Study, CriticError> {
    run_models(cfg, kinds, None)
}

/// [`run_study`] restricted to the corpus models whose slugs are listed.
pub fn run_models(cfg: &StudyConfig, kinds: &[ScoreKind], only: Option<&[&str]>) -> Result<Study, CriticError> {
    cfg.check()?;
    let corpus = standard_corpus();
    let base = corpus[0].network.clone();
    let observed = sample::forward_sample(&base, cfg.max_size(), observed_seed(cfg))?;
    let kinds: Vec<ScoreKind> = ScoreKind::ALL.into_iter().filter(|k| kinds.contains(k)).collect();
    let models = corpus
        .into_par_iter()
        .enumerate()
        .filter(|(_, e)| only.is_none_or(|o| o.contains(&e.slug.as_str())))
        .map(|(i, entry)| {
            let config = model_config(cfg, i);
            let report = critic::criticize(&entry.network, &observed, &config, &kinds)?;
            Ok(ModelRun {
                touched: touched_observables(&base, &entry.network),
                name: entry.name,
                slug: entry.slug,
                network: entry.network,
                config,
                report,
            })
        })
        .collect::<Result<Vec<_>, CriticError>>()?;
    let grids = kinds.iter().map(|&k| build_grid(k, &models)).collect();
    Ok(Study {
        config: cfg.clone(),
        kinds,
        observed,
        models,
        grids,
    })
}

#[derive(Serialize)]
struct StudyProvenance<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: &'a StudyConfig,
    config_hash: String,
    observed_seed: u64,
    indices: Vec<&'static str>,
    models: Vec<ModelProvenance<'a>>,
}

#[derive(Serialize)]
struct ModelProvenance<'a> {
    name: &'a str,
    slug: &'a str,
    network_id: String,
    seed: u64,
    touched: &'a [String],
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes the report, summaries and plot data of one criticism run into
/// `dir`: `report.json`, `summary.txt` and `plots/<index>/<level>.csv`.
pub fn write_report(dir: &Path, name: &str, report: &FitReport, touched: &[String]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json())?;
    let row = [SummaryRow {
        model: name.to_string(),
        report,
        touched: touched.to_vec(),
    }];
    let summary: Vec<String> = report
        .kinds()
        .into_iter()
        .map(|k| critic::summary_table(k, &row))
        .collect();
    fs::write(dir.join("summary.txt"), summary.join("\n"))?;
    for kind in report.kinds() {
        let plots = dir.join("plots").join(kind.slug());
        fs::create_dir_all(&plots)?;
        for level in report.levels() {
            fs::write(
                plots.join(format!("{}.csv", level.label())),
                critic::plot_csv(report, kind, &level),
            )?;
        }
    }
    Ok(())
}

/// Writes every artifact of `study` under `out`.
pub fn write_study(study: &Study, out: &Path) -> io::Result<()> {
    fs::create_dir_all(out)?;
    let provenance = StudyProvenance {
        tool: "bncritic",
        version: env!("CARGO_PKG_VERSION"),
        seed: study.config.seed,
        config: &study.config,
        config_hash: study.config.hash(),
        observed_seed: observed_seed(&study.config),
        indices: study.kinds.iter().map(|k| k.slug()).collect(),
        models: study
            .models
            .iter()
            .map(|m| ModelProvenance {
                name: &m.name,
                slug: &m.slug,
                network_id: m.network.id(),
                seed: m.config.seed,
                touched: &m.touched,
            })
            .collect(),
    };
    fs::write(out.join("provenance.json"), json(&provenance))?;
    sample::write_dataset(&out.join("observed.csv"), &study.observed).map_err(io::Error::other)?;

    let networks = out.join("networks");
    fs::create_dir_all(&networks)?;
    for m in &study.models {
        let bytes = save_network(&m.network).map_err(io::Error::other)?;
        fs::write(networks.join(format!("{}.json", m.slug)), bytes)?;
    }

    let grids = out.join("grids");
    fs::create_dir_all(&grids)?;
    for g in &study.grids {
        fs::write(grids.join(format!("{}.json", g.kind.slug())), json(g))?;
        fs::write(grids.join(format!("{}.txt", g.kind.slug())), study.summary_table(g.kind))?;
    }

    for m in &study.models {
        write_report(&out.join("models").join(&m.slug), &m.name, &m.report, &m.touched)?;
    }
    Ok(())
}
