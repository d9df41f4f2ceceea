//! Fingerprints every portfolio source file with the 14 static code
//! metrics: line counts, cyclomatic complexity, Halstead measures, and
//! syntax-tree graph statistics.

use std::path::Path;

use recsel::code_metrics::{extract_features, python_profile, ALGO_FEATURE_NAMES};
use recsel::portfolio::load_manifest;

fn main() -> recsel::Result<()> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let specs = load_manifest(&fixtures.join("portfolio.toml"))?;
    let profile = python_profile();

    print!("{:<12}", "algo_id");
    for name in ALGO_FEATURE_NAMES {
        print!(" {name:>16}");
    }
    println!();
    for spec in &specs {
        let f = extract_features(&spec.algo_id, &spec.source_path, &profile)?;
        print!("{:<12}", f.algo_id);
        for v in f.values {
            print!(" {v:>16.3}");
        }
        println!();
    }
    Ok(())
}
