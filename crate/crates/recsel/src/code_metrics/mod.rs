//! Static source-code fingerprints: the 14-dimensional algorithm feature
//! vector built from line counts, cyclomatic complexity, Halstead measures,
//! and nesting-tree graph statistics. A CSV manifest loader provides the
//! alternative path for externally computed features.

mod graph;
mod lexer;

pub use graph::{tree_metrics, GraphMetrics};
pub use lexer::{
    function_blocks, lex, nesting_tree, profile_by_name, python_profile, rust_profile,
    Block, LanguageProfile, LexedFile, NestingStyle, NestingTree, Token, TokenClass,
};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ALGO_FEATURE_NAMES: [&str; 14] = [
    "sloc",
    "lloc",
    "average_cc_file",
    "num_complexity_blocks",
    "hal_volume",
    "hal_difficulty",
    "hal_effort",
    "ast_node_count",
    "ast_edge_count",
    "ast_avg_degree",
    "ast_max_degree",
    "ast_transitivity",
    "ast_avg_clustering",
    "ast_depth",
];

pub const N_ALGO_FEATURES: usize = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoFeatureVector {
    pub algo_id: String,
    pub values: [f64; N_ALGO_FEATURES],
}

impl AlgoFeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        ALGO_FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }

    /// Overwrites the seven AST columns from externally supplied graph
    /// metrics (e.g. a pre-parsed AST dump).
    pub fn set_ast_metrics(&mut self, g: &GraphMetrics) {
        self.values[7] = g.node_count as f64;
        self.values[8] = g.edge_count as f64;
        self.values[9] = g.avg_degree;
        self.values[10] = g.max_degree as f64;
        self.values[11] = g.transitivity;
        self.values[12] = g.avg_clustering;
        self.values[13] = g.depth as f64;
    }

    /// Checks the vector invariants: finiteness, non-negativity,
    /// lloc <= sloc, and hal_effort = hal_difficulty * hal_volume.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for (name, v) in ALGO_FEATURE_NAMES.iter().zip(&self.values) {
            if !v.is_finite() || *v < 0.0 {
                return Err(format!("{name} = {v} is not finite and non-negative"));
            }
        }
        let sloc = self.get("sloc").unwrap();
        let lloc = self.get("lloc").unwrap();
        if lloc > sloc {
            return Err(format!("lloc {lloc} exceeds sloc {sloc}"));
        }
        let (v, d, e) = (
            self.get("hal_volume").unwrap(),
            self.get("hal_difficulty").unwrap(),
            self.get("hal_effort").unwrap(),
        );
        let expected = d * v;
        let tol = 1e-9 * expected.abs().max(1.0);
        if (e - expected).abs() > tol {
            return Err(format!(
                "hal_effort {e} != hal_difficulty * hal_volume = {expected}"
            ));
        }
        Ok(())
    }
}

/// A lexed and structured source file, ready for metric extraction.
#[derive(Debug, Clone)]
pub struct CodeUnit {
    pub file: LexedFile,
    pub blocks: Vec<Block>,
    pub tree: NestingTree,
}

/// Lexes a source file under the given profile, delimits function blocks,
/// and builds the nesting tree.
pub fn analyze_source(path: &Path, profile: &LanguageProfile) -> Result<CodeUnit> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let text = String::from_utf8(bytes).map_err(|_| {
        Error::Schema(format!("{} is not valid UTF-8", path.display()))
    })?;
    analyze_str(&text, profile)
}

pub fn analyze_str(source: &str, profile: &LanguageProfile) -> Result<CodeUnit> {
    let file = lex(source, profile);
    let blocks = function_blocks(&file, profile);
    let tree = nesting_tree(&file, profile.nesting)?;
    Ok(CodeUnit { file, blocks, tree })
}

/// Line counts. SLOC: non-blank lines that still carry code after comment
/// stripping. LLOC: lines with at least one operand or keyword token, so
/// pure-punctuation lines (a lone closing brace) count toward SLOC only.
pub fn line_counts(unit: &CodeUnit) -> (usize, usize) {
    let sloc = unit.file.lines.iter().filter(|l| l.has_code).count();
    let lloc = unit
        .file
        .lines
        .iter()
        .filter(|l| {
            l.tokens
                .iter()
                .any(|t| matches!(t.class, TokenClass::Operand | TokenClass::Keyword))
        })
        .count();
    (sloc, lloc)
}

/// Halstead volume, difficulty, and effort from distinct/total operator and
/// operand counts. A vocabulary of <= 1 yields zero volume.
pub fn halstead(unit: &CodeUnit) -> (f64, f64, f64) {
    let mut operators: BTreeMap<&str, usize> = BTreeMap::new();
    let mut operands: BTreeMap<&str, usize> = BTreeMap::new();
    for line in &unit.file.lines {
        for t in &line.tokens {
            match t.class {
                TokenClass::Operator => *operators.entry(&t.text).or_insert(0) += 1,
                TokenClass::Operand => *operands.entry(&t.text).or_insert(0) += 1,
                TokenClass::Keyword => {}
            }
        }
    }
    let n1 = operators.len() as f64;
    let n2 = operands.len() as f64;
    let total1: usize = operators.values().sum();
    let total2: usize = operands.values().sum();
    let vocabulary = n1 + n2;
    let length = (total1 + total2) as f64;
    let volume = if vocabulary <= 1.0 {
        0.0
    } else {
        length * vocabulary.log2()
    };
    let difficulty = (n1 / 2.0) * (total2 as f64 / n2.max(1.0));
    let effort = difficulty * volume;
    (volume, difficulty, effort)
}

/// Mean cyclomatic complexity over function blocks (1 + decision points per
/// block) and the block count. A file with no blocks reports (0, 0).
pub fn cyclomatic(unit: &CodeUnit) -> (f64, usize) {
    let n = unit.blocks.len();
    if n == 0 {
        return (0.0, 0);
    }
    let total: usize = unit.blocks.iter().map(|b| 1 + b.decision_points).sum();
    (total as f64 / n as f64, n)
}

/// The seven ast_* fields from the unit's nesting tree.
pub fn ast_graph_metrics(unit: &CodeUnit) -> GraphMetrics {
    tree_metrics(&unit.tree.children)
}

/// Full 14-feature extraction for one source file.
pub fn extract_features(
    algo_id: &str,
    path: &Path,
    profile: &LanguageProfile,
) -> Result<AlgoFeatureVector> {
    let unit = analyze_source(path, profile)?;
    Ok(features_from_unit(algo_id, &unit))
}

pub fn features_from_unit(algo_id: &str, unit: &CodeUnit) -> AlgoFeatureVector {
    let (sloc, lloc) = line_counts(unit);
    let (volume, difficulty, effort) = halstead(unit);
    let (avg_cc, n_blocks) = cyclomatic(unit);
    let g = ast_graph_metrics(unit);
    AlgoFeatureVector {
        algo_id: algo_id.to_string(),
        values: [
            sloc as f64,
            lloc as f64,
            avg_cc,
            n_blocks as f64,
            volume,
            difficulty,
            effort,
            g.node_count as f64,
            g.edge_count as f64,
            g.avg_degree,
            g.max_degree as f64,
            g.transitivity,
            g.avg_clustering,
            g.depth as f64,
        ],
    }
}

/// Externally produced syntax tree: nodes with id and children, id 0 = root.
#[derive(Debug, Deserialize, Serialize)]
pub struct AstJson {
    pub nodes: Vec<AstJsonNode>,
}

#[derive(Debug, Deserialize, Serialize)]
pub struct AstJsonNode {
    pub id: usize,
    #[serde(default)]
    pub children: Vec<usize>,
}

/// Loads a node/children JSON export and returns its graph metrics,
/// overriding the built-in nesting tree.
pub fn ast_metrics_from_json(path: &Path) -> Result<GraphMetrics> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let parsed: AstJson = serde_json::from_str(&text)
        .map_err(|e| Error::Schema(format!("ast json {}: {e}", path.display())))?;
    let n = parsed.nodes.len();
    let mut children = vec![Vec::new(); n];
    for node in &parsed.nodes {
        if node.id >= n {
            return Err(Error::Schema(format!("ast json node id {} out of range", node.id)));
        }
        for &c in &node.children {
            if c >= n {
                return Err(Error::Schema(format!("ast json child id {c} out of range")));
            }
            children[node.id].push(c);
        }
    }
    Ok(tree_metrics(&children))
}

/// Loads a feature manifest CSV (header: algo_id plus the 14 canonical
/// names) and validates every row against the vector invariants.
pub fn load_feature_manifest(path: &Path) -> Result<Vec<AlgoFeatureVector>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("manifest missing column {name:?}")))
    };
    let id_col = col("algo_id")?;
    let mut feature_cols = [0usize; N_ALGO_FEATURES];
    for (i, name) in ALGO_FEATURE_NAMES.iter().enumerate() {
        feature_cols[i] = col(name)?;
    }
    let mut out = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 2;
        let record = record.map_err(|e| Error::Validation {
            row,
            msg: e.to_string(),
        })?;
        let mut values = [0.0; N_ALGO_FEATURES];
        for (i, &c) in feature_cols.iter().enumerate() {
            let raw = record.get(c).unwrap_or("");
            values[i] = raw.parse::<f64>().map_err(|_| Error::Validation {
                row,
                msg: format!("unparseable {} value {raw:?}", ALGO_FEATURE_NAMES[i]),
            })?;
        }
        let vector = AlgoFeatureVector {
            algo_id: record.get(id_col).unwrap_or("").to_string(),
            values,
        };
        vector.validate().map_err(|msg| Error::Validation { row, msg })?;
        out.push(vector);
    }
    Ok(out)
}

pub fn write_feature_csv(features: &[AlgoFeatureVector], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display())))?;
    let mut header = vec!["algo_id".to_string()];
    header.extend(ALGO_FEATURE_NAMES.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(|e| Error::Schema(e.to_string()))?;
    for f in features {
        let mut rec = vec![f.algo_id.clone()];
        rec.extend(f.values.iter().map(|v| format!("{v:.17}")));
        w.write_record(&rec).map_err(|e| Error::Schema(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}
