//! Extracts the 15 per-user meta-features from the toy training split and
//! prints two contrasting users side by side.

use std::path::Path;

use recsel::dataset::{
    filter_min_interactions, load_interactions, temporal_split, ColumnSchema, FileFormat,
};
use recsel::user_features::{extract_all, USER_FEATURE_NAMES};

fn main() -> recsel::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/toy_interactions.csv");
    let schema = ColumnSchema {
        user: "user_id".into(),
        item: "item_id".into(),
        timestamp: "timestamp".into(),
        rating: Some("rating".into()),
    };
    let (raw, _) = load_interactions(&path, FileFormat::Csv, &schema, false)?;
    let split = temporal_split(&filter_min_interactions(&raw, 10)?, 0.8)?;

    let features = extract_all(&split);
    let pick = |id: &str| features.iter().find(|f| f.user_id == id).unwrap();
    let (light, heavy) = (pick("u02"), pick("u10"));
    println!("{:<24} {:>12} {:>12}", "feature", light.user_id, heavy.user_id);
    for (i, name) in USER_FEATURE_NAMES.iter().enumerate() {
        println!(
            "{:<24} {:>12.4} {:>12.4}",
            name, light.values[i], heavy.values[i]
        );
    }
    Ok(())
}
