//! Command-line orchestration of the pipeline stages. All parallelism lives
//! in the library; `--threads N` pins the worker pool so that N = 1 and
//! N = k produce bit-identical outputs.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::cache::{self, Cache};
use crate::code_metrics::{self, profile_by_name};
use crate::dataset::{
    dataset_stats, filter_min_interactions, load_interactions, temporal_split, ColumnSchema,
    FileFormat, SplitDataset,
};
use crate::error::{Error, Result};
use crate::experiment::{
    self, average_row, render_report_text, write_report_csv, ExperimentConfig, ReportRow,
};
use crate::ground_truth::{self, PerformanceMatrix};
use crate::meta_learner::{
    build_user_algo_dataset, build_user_only_dataset, save_model, GbtParams,
};
use crate::portfolio::{self, RecommenderSpec};
use crate::user_features;

/// Optional config file; any flag given on the command line wins.
/// Documented key-value TOML, all keys optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub interactions: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub user_col: Option<String>,
    pub item_col: Option<String>,
    pub timestamp_col: Option<String>,
    pub rating_col: Option<String>,
    pub k: Option<usize>,
    pub min_interactions: Option<usize>,
    pub train_fraction: Option<f64>,
    pub n_folds: Option<usize>,
    pub seed: Option<u64>,
    pub sba_global: Option<bool>,
    pub lenient: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        toml::from_str(&text)
            .map_err(|e| Error::Schema(format!("config {}: {e}", path.display())))
    }
}

/// Fully resolved run configuration after merging config file and flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub interactions: PathBuf,
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    pub schema: ColumnSchema,
    pub k: usize,
    pub min_interactions: usize,
    pub train_fraction: f64,
    pub n_folds: usize,
    pub seed: u64,
    pub sba_global: bool,
    pub lenient: bool,
}

#[derive(Debug, Parser)]
#[command(
    name = "recsel",
    about = "Per-user recommender algorithm selection via meta-learning",
    version
)]
pub struct Cli {
    /// TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker thread count (1 reproduces any other count bit-identically).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Artifact cache directory (falls back to RECSEL_CACHE_DIR).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// Interaction log (CSV, or TSV by extension).
    #[arg(long)]
    pub interactions: Option<PathBuf>,

    /// Portfolio manifest (TOML).
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    /// Output directory for artifacts.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    #[arg(long)]
    pub user_col: Option<String>,

    #[arg(long)]
    pub item_col: Option<String>,

    #[arg(long)]
    pub timestamp_col: Option<String>,

    /// Rating column; omit for implicit-feedback data.
    #[arg(long)]
    pub rating_col: Option<String>,

    /// Ranking cutoff for NDCG@k.
    #[arg(long)]
    pub k: Option<usize>,

    /// Drop users with fewer interactions than this.
    #[arg(long)]
    pub min_interactions: Option<usize>,

    /// Per-user chronological train fraction.
    #[arg(long)]
    pub train_fraction: Option<f64>,

    #[arg(long)]
    pub n_folds: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Pick the single-best baseline from the full matrix instead of each
    /// training fold.
    #[arg(long)]
    pub sba_global: bool,

    /// Skip malformed rows instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse, validate, and filter the interaction log; write stats JSON.
    Ingest(CommonArgs),

    /// Fit the portfolio and write the users x algorithms NDCG matrix.
    GroundTruth(CommonArgs),

    /// Write user-feature and algorithm-feature CSVs.
    Features(CommonArgs),

    /// Static code metrics for one source file.
    CodeMetrics {
        /// Source file to analyze.
        #[arg(long)]
        source: PathBuf,

        /// Language profile: python or rust.
        #[arg(long, default_value = "python")]
        profile: String,

        /// Pre-parsed AST (JSON) to use instead of the nesting heuristic.
        #[arg(long)]
        ast_json: Option<PathBuf>,

        /// Identifier recorded in the output.
        #[arg(long, default_value = "algo")]
        algo_id: String,

        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Train both meta-learners on the full matrix and save them.
    Train(CommonArgs),

    /// Full experiment: ground truth, features, cross-validated report.
    Run(CommonArgs),

    /// Recompute derived report columns from raw performance columns.
    Report {
        /// CSV with dataset, sba_algo, sba_perf, vba_perf, perf_user_only,
        /// acc1_user_only, acc3_user_only, perf_user_algo, acc1_user_algo,
        /// acc3_user_algo.
        #[arg(long)]
        input: PathBuf,

        /// Output directory (stdout table only when omitted).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn merge(args: &CommonArgs, file: &FileConfig) -> Result<RunConfig> {
    let interactions = args
        .interactions
        .clone()
        .or_else(|| file.interactions.clone())
        .ok_or_else(|| Error::InvalidArgument("missing --interactions".into()))?;
    let manifest = args
        .manifest
        .clone()
        .or_else(|| file.manifest.clone())
        .ok_or_else(|| Error::InvalidArgument("missing --manifest".into()))?;
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| file.out_dir.clone())
        .ok_or_else(|| Error::InvalidArgument("missing --out-dir".into()))?;
    let schema = ColumnSchema {
        user: args
            .user_col
            .clone()
            .or_else(|| file.user_col.clone())
            .unwrap_or_else(|| "user_id".to_string()),
        item: args
            .item_col
            .clone()
            .or_else(|| file.item_col.clone())
            .unwrap_or_else(|| "item_id".to_string()),
        timestamp: args
            .timestamp_col
            .clone()
            .or_else(|| file.timestamp_col.clone())
            .unwrap_or_else(|| "timestamp".to_string()),
        rating: args.rating_col.clone().or_else(|| file.rating_col.clone()),
    };
    let config = RunConfig {
        interactions,
        manifest,
        out_dir,
        schema,
        k: args.k.or(file.k).unwrap_or(10),
        min_interactions: args.min_interactions.or(file.min_interactions).unwrap_or(10),
        train_fraction: args.train_fraction.or(file.train_fraction).unwrap_or(0.8),
        n_folds: args.n_folds.or(file.n_folds).unwrap_or(5),
        seed: args.seed.or(file.seed).unwrap_or(17),
        sba_global: args.sba_global || file.sba_global.unwrap_or(false),
        lenient: args.lenient || file.lenient.unwrap_or(false),
    };
    if !config.interactions.exists() {
        return Err(Error::InvalidArgument(format!(
            "interactions file {} does not exist",
            config.interactions.display()
        )));
    }
    if !config.manifest.exists() {
        return Err(Error::InvalidArgument(format!(
            "manifest {} does not exist",
            config.manifest.display()
        )));
    }
    Ok(config)
}

fn ensure_out_dir(config: &RunConfig) -> Result<()> {
    fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::io(config.out_dir.display().to_string(), e))
}

/// Loads, filters, and splits the interaction log.
pub fn prepare_split(config: &RunConfig) -> Result<(SplitDataset, usize)> {
    let format = FileFormat::from_path(&config.interactions);
    let (raw, skipped) =
        load_interactions(&config.interactions, format, &config.schema, config.lenient)
            .map_err(|e| e.in_stage("ingest"))?;
    let filtered = filter_min_interactions(&raw, config.min_interactions)
        .map_err(|e| e.in_stage("ingest"))?;
    let split = temporal_split(&filtered, config.train_fraction)
        .map_err(|e| e.in_stage("split"))?;
    Ok((split, skipped))
}

fn config_digest(config: &RunConfig) -> String {
    cache::content_hash(serde_json::to_string(config).unwrap().as_bytes())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Schema(format!("serialize {}: {e}", path.display())))?;
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

#[derive(Debug, Serialize)]
struct IngestSummary {
    n_users: usize,
    n_items: usize,
    n_interactions: usize,
    sparsity: f64,
    skipped_rows: usize,
    n_test_users: usize,
}

pub fn cmd_ingest(config: &RunConfig) -> Result<()> {
    ensure_out_dir(config)?;
    let (split, skipped) = prepare_split(config)?;
    let stats = dataset_stats(
        split.train.n_users(),
        split.train.n_items(),
        split.train.n_interactions() + split.test.values().map(|s| s.len()).sum::<usize>(),
    );
    let summary = IngestSummary {
        n_users: split.train.n_users(),
        n_items: split.train.n_items(),
        n_interactions: stats.n_interactions,
        sparsity: stats.sparsity,
        skipped_rows: skipped,
        n_test_users: split.test.len(),
    };
    write_json(&summary, &config.out_dir.join("ingest_stats.json"))?;
    println!(
        "ingested {} users, {} items, {} interactions ({} skipped), sparsity {:.4}%",
        summary.n_users,
        summary.n_items,
        summary.n_interactions,
        skipped,
        100.0 * summary.sparsity
    );
    Ok(())
}

/// Builds (or reloads from cache) the performance matrix for a config.
pub fn ground_truth_matrix(
    config: &RunConfig,
    split: &SplitDataset,
    specs: &[RecommenderSpec],
    cache: Option<&Cache>,
) -> Result<(PerformanceMatrix, bool)> {
    let key = cache::combine_hashes(&[
        "ground_truth",
        &cache::file_hash(&config.interactions)?,
        &cache::file_hash(&config.manifest)?,
        &config_digest(config),
    ]);
    if let Some(c) = cache {
        if let Some(bytes) = c.get(&key, "json") {
            if let Ok(p) = serde_json::from_slice::<PerformanceMatrix>(&bytes) {
                return Ok((p, true));
            }
        }
    }
    let p = ground_truth::build_performance_matrix(split, specs, config.k)
        .map_err(|e| e.in_stage("ground_truth"))?;
    if let Some(c) = cache {
        let bytes = serde_json::to_vec(&p).map_err(|e| Error::Schema(e.to_string()))?;
        c.put(&key, "json", &bytes)?;
    }
    Ok((p, false))
}

pub fn cmd_ground_truth(config: &RunConfig, cache: Option<&Cache>) -> Result<()> {
    ensure_out_dir(config)?;
    let (split, _) = prepare_split(config)?;
    let specs = portfolio::load_manifest(&config.manifest).map_err(|e| e.in_stage("portfolio"))?;
    let (p, cached) = ground_truth_matrix(config, &split, &specs, cache)?;
    p.write_csv(&config.out_dir.join("performance_matrix.csv"))?;
    let baselines = ground_truth::baselines(&p);
    write_json(&baselines, &config.out_dir.join("ground_truth_stats.json"))?;
    println!(
        "performance matrix: {} users x {} algorithms{}; SBA {} ({:.4}), VBA {:.4}",
        p.n_users(),
        p.n_algos(),
        if cached { " (cache hit)" } else { "" },
        baselines.sba_algo,
        baselines.sba_perf,
        baselines.vba_perf
    );
    Ok(())
}

fn algo_features_for(specs: &[RecommenderSpec]) -> Result<Vec<code_metrics::AlgoFeatureVector>> {
    let profile = profile_by_name("python")?;
    specs
        .iter()
        .map(|s| {
            code_metrics::extract_features(&s.algo_id, &s.source_path, &profile)
                .map_err(|e| e.in_stage("code_metrics"))
        })
        .collect()
}

pub fn cmd_features(config: &RunConfig) -> Result<()> {
    ensure_out_dir(config)?;
    let (split, _) = prepare_split(config)?;
    let specs = portfolio::load_manifest(&config.manifest).map_err(|e| e.in_stage("portfolio"))?;
    let user_feats = user_features::extract_all(&split);
    user_features::write_csv(&user_feats, &config.out_dir.join("user_features.csv"))?;
    let algo_feats = algo_features_for(&specs)?;
    code_metrics::write_feature_csv(&algo_feats, &config.out_dir.join("algo_features.csv"))?;
    println!(
        "wrote {} user feature rows and {} algorithm feature rows",
        user_feats.len(),
        algo_feats.len()
    );
    Ok(())
}

pub fn cmd_code_metrics(
    source: &Path,
    profile_name: &str,
    ast_json: Option<&Path>,
    algo_id: &str,
    out: Option<&Path>,
) -> Result<()> {
    let profile = profile_by_name(profile_name)?;
    let mut features = code_metrics::extract_features(algo_id, source, &profile)?;
    if let Some(ast_path) = ast_json {
        let g = code_metrics::ast_metrics_from_json(ast_path)?;
        features.set_ast_metrics(&g);
    }
    features
        .validate()
        .map_err(|msg| Error::Validation { row: 0, msg })?;
    let text = serde_json::to_string_pretty(&features).map_err(|e| Error::Schema(e.to_string()))?;
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))?,
        None => println!("{text}"),
    }
    Ok(())
}

pub fn cmd_train(config: &RunConfig, cache: Option<&Cache>) -> Result<()> {
    ensure_out_dir(config)?;
    let (split, _) = prepare_split(config)?;
    let specs = portfolio::load_manifest(&config.manifest).map_err(|e| e.in_stage("portfolio"))?;
    let (p, _) = ground_truth_matrix(config, &split, &specs, cache)?;
    let user_feats = user_features::extract_all(&split);
    let algo_feats = algo_features_for(&specs)?;
    let ds_uo = build_user_only_dataset(&p, &user_feats)?;
    let ds_ua = build_user_algo_dataset(&p, &user_feats, &algo_feats)?;
    let params = GbtParams {
        seed: config.seed,
        ..GbtParams::default()
    };
    let model_uo = crate::meta_learner::train(&ds_uo, &params).map_err(|e| e.in_stage("train"))?;
    let model_ua = crate::meta_learner::train(&ds_ua, &params).map_err(|e| e.in_stage("train"))?;
    save_model(&model_uo, &config.out_dir.join("model_user_only.json"))?;
    save_model(&model_ua, &config.out_dir.join("model_user_algo.json"))?;
    println!(
        "trained meta-learners on {} users x {} algorithms",
        p.n_users(),
        p.n_algos()
    );
    Ok(())
}

pub fn cmd_run(config: &RunConfig, cache: Option<&Cache>) -> Result<()> {
    ensure_out_dir(config)?;
    let (split, _) = prepare_split(config)?;
    let specs = portfolio::load_manifest(&config.manifest).map_err(|e| e.in_stage("portfolio"))?;
    let (p, _) = ground_truth_matrix(config, &split, &specs, cache)?;
    let user_feats = user_features::extract_all(&split);
    let algo_feats = algo_features_for(&specs)?;
    let exp_config = ExperimentConfig {
        n_folds: config.n_folds,
        seed: config.seed,
        sba_global: config.sba_global,
        grid: experiment::default_grid(),
    };
    let dataset_name = config
        .interactions
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    let outcome = experiment::run_meta_cv(&dataset_name, &p, &user_feats, &algo_feats, &exp_config)
        .map_err(|e| e.in_stage("meta_cv"))?;

    let rows = vec![outcome.report.clone()];
    write_report_csv(&rows, &config.out_dir.join("report.csv"))?;
    let text = render_report_text(&rows);
    fs::write(config.out_dir.join("report.txt"), &text)
        .map_err(|e| Error::io("report.txt", e))?;
    write_json(&outcome, &config.out_dir.join("report.json"))?;
    print!("{text}");
    Ok(())
}

/// Raw performance columns accepted by the `report` subcommand.
#[derive(Debug, Deserialize)]
struct RawReportRow {
    dataset: String,
    sba_algo: String,
    sba_perf: f64,
    vba_perf: f64,
    perf_user_only: f64,
    acc1_user_only: f64,
    acc3_user_only: f64,
    perf_user_algo: f64,
    acc1_user_algo: f64,
    acc3_user_algo: f64,
}

pub fn report_rows_from_csv(input: &Path) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_path(input)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", input.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<RawReportRow>().enumerate() {
        let raw = rec.map_err(|e| Error::Validation {
            row: i + 1,
            msg: e.to_string(),
        })?;
        let (gain_vs_sba, gain_vs_user_ml, gap_closed) = experiment::derived_columns(
            raw.sba_perf,
            raw.vba_perf,
            raw.perf_user_only,
            raw.perf_user_algo,
        );
        rows.push(ReportRow {
            dataset: raw.dataset,
            sba_algo: raw.sba_algo,
            sba_perf: raw.sba_perf,
            vba_perf: raw.vba_perf,
            perf_user_only: raw.perf_user_only,
            acc1_user_only: raw.acc1_user_only,
            acc3_user_only: raw.acc3_user_only,
            perf_user_algo: raw.perf_user_algo,
            gain_vs_sba,
            gain_vs_user_ml,
            acc1_user_algo: raw.acc1_user_algo,
            acc3_user_algo: raw.acc3_user_algo,
            gap_closed,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} has no data rows",
            input.display()
        )));
    }
    Ok(rows)
}

pub fn cmd_report(input: &Path, out_dir: Option<&Path>) -> Result<()> {
    let rows = report_rows_from_csv(input)?;
    let text = render_report_text(&rows);
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        write_report_csv(&rows, &dir.join("report.csv"))?;
        fs::write(dir.join("report.txt"), &text).map_err(|e| Error::io("report.txt", e))?;
        let mut all = rows.clone();
        all.push(average_row(&rows));
        write_json(&all, &dir.join("report.json"))?;
    }
    print!("{text}");
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    let file_config = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cache = Cache::open(cli.cache_dir.as_deref())?;
    match &cli.command {
        Command::Ingest(args) => cmd_ingest(&merge(args, &file_config)?),
        Command::GroundTruth(args) => cmd_ground_truth(&merge(args, &file_config)?, cache.as_ref()),
        Command::Features(args) => cmd_features(&merge(args, &file_config)?),
        Command::CodeMetrics {
            source,
            profile,
            ast_json,
            algo_id,
            out,
        } => cmd_code_metrics(source, profile, ast_json.as_deref(), algo_id, out.as_deref()),
        Command::Train(args) => cmd_train(&merge(args, &file_config)?, cache.as_ref()),
        Command::Run(args) => cmd_run(&merge(args, &file_config)?, cache.as_ref()),
        Command::Report { input, out_dir } => cmd_report(input, out_dir.as_deref()),
    }
}

/// Entry point shared by the binary. Returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.threads {
        Some(n) if n >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build();
            match pool {
                Ok(pool) => pool.install(|| dispatch(&cli)),
                Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
            }
        }
        Some(_) => Err(Error::InvalidArgument("--threads must be >= 1".into())),
        None => dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}
