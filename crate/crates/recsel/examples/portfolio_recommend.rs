//! Fits every portfolio member on the toy training split and prints each
//! one's top-5 recommendations for a single user.

use std::path::Path;

use recsel::dataset::{
    filter_min_interactions, load_interactions, temporal_split, ColumnSchema, FileFormat,
};
use recsel::portfolio::{fit, load_manifest, recommend};

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

    let user = split.train.user_idx("u07").expect("u07 in fixture");
    println!("top-5 recommendations for u07:");
    for spec in &specs {
        let model = fit(spec, &split.train)?;
        let ranked = recommend(&model, user, 5);
        let labels: Vec<&str> = ranked
            .items
            .iter()
            .map(|&i| split.train.item_label(i))
            .collect();
        println!("  {:<12} {}", spec.algo_id, labels.join(" "));
    }
    Ok(())
}
