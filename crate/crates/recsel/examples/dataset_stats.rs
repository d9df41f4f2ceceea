//! Loads the bundled interaction log, applies the min-interaction filter and
//! the per-user temporal split, and prints the dataset statistics.

use std::path::Path;

use recsel::dataset::{
    filter_min_interactions, load_interactions, temporal_split, ColumnSchema, FileFormat,
};

fn main() -> recsel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy_interactions.csv");
    let schema = ColumnSchema {
        user: "user_id".into(),
        item: "item_id".into(),
        timestamp: "timestamp".into(),
        rating: Some("rating".into()),
    };
    let (raw, skipped) = load_interactions(&path, FileFormat::Csv, &schema, false)?;
    let stats = raw.stats();
    println!(
        "loaded {} users, {} items, {} interactions ({skipped} skipped), sparsity {:.2}%",
        stats.n_users,
        stats.n_items,
        stats.n_interactions,
        100.0 * stats.sparsity
    );

    let filtered = filter_min_interactions(&raw, 10)?;
    println!("after min-10 filter: {} users", filtered.n_users());

    let split = temporal_split(&filtered, 0.8)?;
    let n_test: usize = split.test.values().map(|s| s.len()).sum();
    println!(
        "temporal 80/20 split: {} train interactions, {} held-out items over {} users",
        split.train.n_interactions(),
        n_test,
        split.test.len()
    );
    Ok(())
}
