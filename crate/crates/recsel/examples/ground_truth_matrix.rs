//! Builds the users x algorithms NDCG@10 matrix for the toy fixture and
//! prints the single-best and oracle baselines.

use std::path::Path;

use recsel::dataset::{
    filter_min_interactions, load_interactions, temporal_split, ColumnSchema, FileFormat,
};
use recsel::ground_truth::{baselines, build_performance_matrix};
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

    let p = build_performance_matrix(&split, &specs, 10)?;
    println!("matrix: {} users x {} algorithms", p.n_users(), p.n_algos());
    println!("column means (mean NDCG@10 per algorithm):");
    for (algo, mean) in p.algo_ids.iter().zip(p.column_means()) {
        println!("  {algo:<12} {mean:.4}");
    }
    let b = baselines(&p);
    println!(
        "SBA: {} at {:.4}; VBA (oracle): {:.4}; headroom: {:.4}",
        b.sba_algo,
        b.sba_perf,
        b.vba_perf,
        b.vba_perf - b.sba_perf
    );
    Ok(())
}
