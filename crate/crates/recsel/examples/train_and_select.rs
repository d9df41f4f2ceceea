//! Trains both meta-learners on the full toy performance matrix and shows
//! which algorithm each model picks for a few users, next to the user's
//! true best algorithm.

use std::path::Path;

use recsel::code_metrics::{extract_features, python_profile};
use recsel::dataset::{
    filter_min_interactions, load_interactions, temporal_split, ColumnSchema, FileFormat,
};
use recsel::ground_truth::build_performance_matrix;
use recsel::meta_learner::{
    build_user_algo_dataset, build_user_only_dataset, select, train, GbtParams,
};
use recsel::portfolio::load_manifest;
use recsel::user_features::extract_all;

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
    let user_feats = extract_all(&split);
    let profile = python_profile();
    let algo_feats: Vec<_> = specs
        .iter()
        .map(|s| extract_features(&s.algo_id, &s.source_path, &profile))
        .collect::<recsel::Result<_>>()?;

    let params = GbtParams {
        seed: 17,
        ..GbtParams::default()
    };
    let user_only = train(&build_user_only_dataset(&p, &user_feats)?, &params)?;
    let user_algo = train(
        &build_user_algo_dataset(&p, &user_feats, &algo_feats)?,
        &params,
    )?;

    println!(
        "{:<6} {:>14} {:>14} {:>14}",
        "user", "M(User-Only)", "M(User+Algo)", "true best"
    );
    for user_id in ["u03", "u11", "u24", "u38", "u45"] {
        let uf = user_feats.iter().find(|f| f.user_id == user_id).unwrap();
        let pick_uo = select(&user_only, uf, &algo_feats)?[0].0.clone();
        let pick_ua = select(&user_algo, uf, &algo_feats)?[0].0.clone();
        let row_idx = p.user_ids.iter().position(|u| u == user_id).unwrap();
        let row = p.row(row_idx);
        let best = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| p.algo_ids[i].clone())
            .unwrap();
        println!("{user_id:<6} {pick_uo:>14} {pick_ua:>14} {best:>14}");
    }
    Ok(())
}
