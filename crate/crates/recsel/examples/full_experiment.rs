//! End-to-end experiment on the toy fixture: ground truth, feature
//! extraction, tuned meta-learners under user-grouped 5-fold CV, and the
//! final report table with single-best and oracle baselines.

use std::path::Path;

use recsel::code_metrics::{extract_features, python_profile};
use recsel::dataset::{
    filter_min_interactions, load_interactions, temporal_split, ColumnSchema, FileFormat,
};
use recsel::experiment::{render_report_text, run_experiment, ExperimentConfig};
use recsel::portfolio::load_manifest;

fn main() -> recsel::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let schema = ColumnSchema {
        user: "user_id".into(),
        item: "item_id".into(),
        timestamp: "timestamp".into(),
        rating: Some("rating".into()),
    };
    let (raw, _) = load_interactions(
        &fixtures.join("toy_interactions.csv"),
        FileFormat::Csv,
        &schema,
        false,
    )?;
    let split = temporal_split(&filter_min_interactions(&raw, 10)?, 0.8)?;
    let specs = load_manifest(&fixtures.join("portfolio.toml"))?;
    let profile = python_profile();
    let algo_feats: Vec<_> = specs
        .iter()
        .map(|s| extract_features(&s.algo_id, &s.source_path, &profile))
        .collect::<recsel::Result<_>>()?;

    let outcome = run_experiment(
        "toy",
        &split,
        &specs,
        &algo_feats,
        10,
        &ExperimentConfig::default(),
    )?;
    print!("{}", render_report_text(&[outcome.report.clone()]));
    println!();
    for f in &outcome.folds {
        println!(
            "fold {}: SBA {} {:.4}, VBA {:.4}, M(User-Only) {:.4}, M(User+Algo) {:.4}",
            f.fold, f.sba_algo, f.sba_perf, f.vba_perf, f.user_only.avg_ndcg, f.user_algo.avg_ndcg
        );
    }
    Ok(())
}
