//! Command implementations behind the `bncritic` binary.
//!
//! Exit codes: 0 success, 1 validation findings, 2 usage, data or I/O
//! errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bncritic::corpus::{self, standard_corpus, standard_transforms};
use bncritic::critic::{self, Correction, StudyConfig, Tail};
use bncritic::network::{self, load_network_with, save_network, LoadOptions, Network, NetworkError};
use bncritic::sample::{self, Dataset};
use bncritic::score::{self, BaselineMarginals, ScoreKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "BNCRITIC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bncritic", version, about = "Model criticism for discrete Bayesian networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file and print every finding.
    Validate(ValidateArgs),
    /// Draw simulees from a network by ancestral sampling.
    Sample(SampleArgs),
    /// Score a file of forecasts against observed states.
    Score(ScoreArgs),
    /// Criticize a network against a dataset.
    Criticize(CriticizeArgs),
    /// Run the full study over the built-in corpus.
    Study(StudyArgs),
    /// Write the built-in corpus networks and study config.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub network: PathBuf,
    /// Rescale CPT rows to sum to 1 before validating.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub network: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// CSV whose columns are state probabilities plus an `observed` label.
    pub forecasts: PathBuf,
    /// Indices to compute (repeatable); all three by default.
    #[arg(long = "index", value_parser = parse_kind)]
    pub index: Vec<ScoreKind>,
    /// Comma-separated baseline marginals for Good's score; defaults to
    /// the mean forecast.
    #[arg(long, value_delimiter = ',')]
    pub baseline: Option<Vec<f64>>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    Two,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CorrectionArg {
    None,
    PerFamily,
}

#[derive(Debug, Args)]
pub struct CriticizeArgs {
    pub network: PathBuf,
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![50, 100, 250, 500, 1000])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1000)]
    pub pool: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long = "index", value_parser = parse_kind)]
    pub index: Vec<ScoreKind>,
    #[arg(long, value_enum, default_value_t = TailArg::Two)]
    pub tail: TailArg,
    #[arg(long, value_enum, default_value_t = CorrectionArg::None)]
    pub correction: CorrectionArg,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Master seed; overrides the seed in `--config`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Study config file (JSON); built-in defaults otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "index", value_parser = parse_kind)]
    pub index: Vec<ScoreKind>,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse_kind(s: &str) -> Result<ScoreKind, String> {
    s.parse()
}

fn kinds_or_all(kinds: &[ScoreKind]) -> Vec<ScoreKind> {
    if kinds.is_empty() {
        ScoreKind::ALL.to_vec()
    } else {
        kinds.to_vec()
    }
}

/// A failure reported on stderr with exit code 2.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure(format!("IO_ERROR: {}: {e}", path.display())))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Failure(format!("IO_ERROR: {}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure(format!("IO_ERROR: {}: {e}", path.display())))
}

fn load(path: &Path, renormalize: bool) -> Result<Network, Failure> {
    Ok(load_network_with(&read(path)?, LoadOptions { renormalize })?)
}

fn json_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json serializes");
    s.push('\n');
    s
}

/// `validate`: findings on stdout, one per line.
pub fn cmd_validate(args: &ValidateArgs) -> (i32, String) {
    let bytes = match read(&args.network) {
        Ok(b) => b,
        Err(Failure(e)) => return (EXIT_ERROR, e + "\n"),
    };
    let options = LoadOptions {
        renormalize: args.renormalize,
    };
    match load_network_with(&bytes, options) {
        Ok(net) => {
            let report = network::validate(&net);
            let mut out: String = report.findings.iter().map(|f| format!("{f}\n")).collect();
            let _ = writeln!(out, "ok: {} variables, network id {}", net.variables().len(), net.id());
            (EXIT_OK, out)
        }
        Err(NetworkError::Validation(report)) => {
            let out = report.findings.iter().map(|f| format!("{f}\n")).collect();
            (EXIT_FINDINGS, out)
        }
        Err(e @ NetworkError::Parse(_)) => (EXIT_ERROR, format!("{e}\n")),
    }
}

/// `sample`: CSV plus `<out>.meta.json`.
pub fn cmd_sample(args: &SampleArgs) -> Result<String, Failure> {
    let net = load(&args.network, args.renormalize)?;
    let ds = sample::forward_sample(&net, args.n, args.seed)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    sample::write_dataset(&args.out, &ds)?;
    Ok(format!("wrote {} rows to {}\n", ds.len(), args.out.display()))
}

/// `score`: one output row per forecast, one column per index.
pub fn cmd_score(args: &ScoreArgs) -> Result<String, Failure> {
    let bytes = read(&args.forecasts)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let obs_col = header
        .iter()
        .position(|h| h == "observed")
        .ok_or_else(|| Failure("COLUMN_MISMATCH: forecasts need an `observed` column".into()))?;
    let states: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != obs_col)
        .map(|(_, h)| h.clone())
        .collect();
    let mut forecasts: Vec<(Vec<f64>, usize)> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let mut p = Vec::with_capacity(states.len());
        let mut observed = None;
        for (i, field) in record.iter().enumerate() {
            if i == obs_col {
                observed = Some(states.iter().position(|s| s == field).ok_or_else(|| {
                    Failure(format!("UNKNOWN_LABEL: `{field}` on line {}", line + 2))
                })?);
            } else {
                p.push(field.trim().parse::<f64>().map_err(|e| {
                    Failure(format!("PARSE_ERROR: `{field}` on line {}: {e}", line + 2))
                })?);
            }
        }
        forecasts.push((p, observed.expect("observed column present")));
    }
    let baseline = match &args.baseline {
        Some(x) => BaselineMarginals::new(x.clone())?,
        None => {
            let n = forecasts.len().max(1) as f64;
            let mut mean = vec![0.0; states.len()];
            for (p, _) in &forecasts {
                for (m, v) in mean.iter_mut().zip(p) {
                    *m += v / n;
                }
            }
            BaselineMarginals::new(mean)?
        }
    };
    let kinds = kinds_or_all(&args.index);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(kinds.iter().map(|k| k.slug()))?;
    for (line, (p, observed)) in forecasts.iter().enumerate() {
        let row = kinds
            .iter()
            .map(|&k| {
                score::score(k, p, *observed, Some(&baseline))
                    .map(|v| v.to_string())
                    .map_err(|e| Failure(format!("{e} (line {})", line + 2)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        w.write_record(row)?;
    }
    let out = String::from_utf8(w.into_inner().map_err(|e| Failure(e.to_string()))?)?;
    match &args.out {
        Some(path) => {
            write(path, &out)?;
            Ok(format!("wrote {} rows to {}\n", forecasts.len(), path.display()))
        }
        None => Ok(out),
    }
}

fn read_data(path: &Path, net: &Network) -> Result<Dataset, Failure> {
    Ok(sample::read_dataset(path, net)?)
}

/// `criticize`: report, summary and plot data under `--out-dir`.
pub fn cmd_criticize(args: &CriticizeArgs) -> Result<String, Failure> {
    let net = load(&args.network, args.renormalize)?;
    let data = read_data(&args.data, &net)?;
    let cfg = StudyConfig {
        sizes: args.sizes.clone(),
        replicates: args.replicates,
        pool: args.pool,
        tail: match args.tail {
            TailArg::Two => Tail::TwoTailed,
            TailArg::One => Tail::OneTailedMisfit,
        },
        correction: match args.correction {
            CorrectionArg::None => Correction::None,
            CorrectionArg::PerFamily => Correction::PerFamily,
        },
        seed: args.seed,
    };
    let kinds = kinds_or_all(&args.index);
    let report = critic::criticize(&net, &data, &cfg, &kinds)?;
    let name = args
        .network
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| net.id());
    corpus::write_report(&args.out_dir, &name, &report, &[])?;
    let provenance = json!({
        "tool": "bncritic",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "criticize",
        "network": args.network.display().to_string(),
        "network_id": net.id(),
        "data": args.data.display().to_string(),
        "indices": kinds.iter().map(|k| k.slug()).collect::<Vec<_>>(),
        "config": cfg,
        "config_hash": cfg.hash(),
    });
    write(&args.out_dir.join("provenance.json"), json_text(&provenance))?;
    let summary = fs::read_to_string(args.out_dir.join("summary.txt"))?;
    Ok(summary)
}

/// Loads the study configuration: file (if any), then `--seed`.
pub fn study_config(args: &StudyArgs) -> Result<StudyConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => serde_json::from_slice::<StudyConfig>(&read(path)?)
            .map_err(|e| Failure(format!("PARSE_ERROR: {}: {e}", path.display())))?,
        None => StudyConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// `study`: the whole output tree under `--out-dir`; runtime on stdout.
pub fn cmd_study(args: &StudyArgs) -> Result<String, Failure> {
    let start = Instant::now();
    let cfg = study_config(args)?;
    let study = corpus::run_study(&cfg, &kinds_or_all(&args.index))?;
    corpus::write_study(&study, &args.out_dir)?;
    let mut out = String::new();
    for g in &study.grids {
        out.push_str(&study.summary_table(g.kind));
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "study finished in {:.2} s ({} models, {} indices, {} sizes, {} replicates)",
        start.elapsed().as_secs_f64(),
        study.models.len(),
        study.kinds.len(),
        cfg.sizes.len(),
        cfg.replicates
    );
    Ok(out)
}

/// Canonical text of the corpus study configuration file.
pub fn corpus_study_config() -> String {
    let mut s = serde_json::to_string_pretty(&StudyConfig::default()).expect("config serializes");
    s.push('\n');
    s
}

/// `corpus`: network files, the error model recipes and the study config.
pub fn cmd_corpus(args: &CorpusArgs) -> Result<String, Failure> {
    let entries = standard_corpus();
    for e in &entries {
        write(&args.out_dir.join(format!("{}.json", e.slug)), save_network(&e.network)?)?;
    }
    let recipes: Vec<serde_json::Value> = standard_transforms()
        .into_iter()
        .map(|m| json!({"name": m.name, "slug": m.slug, "edit": m.transform}))
        .collect();
    write(&args.out_dir.join("error-models.json"), json_text(&json!(recipes)))?;
    write(&args.out_dir.join("study.json"), corpus_study_config())?;
    Ok(format!("wrote {} networks to {}\n", entries.len(), args.out_dir.display()))
}

/// Sets the global worker count from [`THREADS_ENV`] when present.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs a parsed command, printing its output; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    configure_threads();
    let result = match &cli.command {
        Command::Validate(a) => {
            let (code, out) = cmd_validate(a);
            if code == EXIT_ERROR {
                eprint!("{out}");
            } else {
                print!("{out}");
            }
            return code;
        }
        Command::Sample(a) => cmd_sample(a),
        Command::Score(a) => cmd_score(a),
        Command::Criticize(a) => cmd_criticize(a),
        Command::Study(a) => cmd_study(a),
        Command::Corpus(a) => cmd_corpus(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            EXIT_OK
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}
