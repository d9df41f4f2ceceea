//! User-grouped 5-fold cross-validation over the performance matrix,
//! hyperparameter tuning of the meta-learners, selector metrics, and
//! report assembly (CSV, JSON, and an aligned text table).

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code_metrics::AlgoFeatureVector;
use crate::dataset::SplitDataset;
use crate::error::{Error, Result};
use crate::ground_truth::{self, PerformanceMatrix};
use crate::meta_learner::{
    build_user_algo_dataset, build_user_only_dataset, mse, select, train, GbtParams, MetaDataset,
    MetaModel, ModelKind,
};
use crate::portfolio::RecommenderSpec;
use crate::user_features::{self, UserFeatureVector};

/// Assignment of every user to exactly one fold; fold sizes differ by at
/// most one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub n_folds: usize,
    pub assignments: BTreeMap<String, usize>,
    pub seed: u64,
}

/// Seeded shuffle then round-robin assignment. Deterministic given the seed.
pub fn make_folds(users: &[String], n_folds: usize, seed: u64) -> Result<FoldPlan> {
    if users.len() < n_folds {
        return Err(Error::InvalidArgument(format!(
            "{} users cannot fill {n_folds} folds",
            users.len()
        )));
    }
    let mut shuffled: Vec<&String> = users.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let assignments = shuffled
        .iter()
        .enumerate()
        .map(|(i, u)| ((*u).clone(), i % n_folds))
        .collect();
    Ok(FoldPlan {
        n_folds,
        assignments,
        seed,
    })
}

/// The default tuning grid: 8 combinations over tree count, depth, and
/// learning rate with fixed leaf size and subsampling.
pub fn default_grid() -> Vec<GbtParams> {
    let mut grid = Vec::new();
    for &n_trees in &[100usize, 300] {
        for &max_depth in &[3usize, 6] {
            for &learning_rate in &[0.05, 0.1] {
                grid.push(GbtParams {
                    n_trees,
                    max_depth,
                    learning_rate,
                    min_samples_leaf: 20,
                    subsample: 0.8,
                    seed: 0,
                });
            }
        }
    }
    grid
}

fn unique_users(dataset: &MetaDataset) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (user, _) in &dataset.row_keys {
        if seen.insert(user.clone()) {
            out.push(user.clone());
        }
    }
    out
}

fn subset_by_users(dataset: &MetaDataset, keep: &std::collections::BTreeSet<&str>) -> MetaDataset {
    let rows: Vec<usize> = dataset
        .row_keys
        .iter()
        .enumerate()
        .filter(|(_, (u, _))| keep.contains(u.as_str()))
        .map(|(i, _)| i)
        .collect();
    MetaDataset {
        kind: dataset.kind,
        features: dataset.features.select_rows(&rows),
        targets: dataset.targets.select_rows(&rows),
        row_keys: rows.iter().map(|&r| dataset.row_keys[r].clone()).collect(),
        algo_ids: dataset.algo_ids.clone(),
    }
}

fn holdout_mse(model: &MetaModel, holdout: &MetaDataset) -> f64 {
    match holdout.kind {
        ModelKind::UserAlgo => mse(&model.regressors[0], &holdout.features, &holdout.targets.data),
        ModelKind::UserOnly => {
            let mut total = 0.0;
            for (a, reg) in model.regressors.iter().enumerate() {
                let y: Vec<f64> = (0..holdout.targets.n_rows)
                    .map(|r| holdout.targets.row(r)[a])
                    .collect();
                total += mse(reg, &holdout.features, &y);
            }
            total / model.regressors.len() as f64
        }
    }
}

/// Grid search with an inner 80/20 user-grouped holdout of the training
/// fold. Picks the candidate minimizing holdout MSE; ties keep grid order.
pub fn tune_gbt(train_fold: &MetaDataset, grid: &[GbtParams], seed: u64) -> Result<GbtParams> {
    assert!(!grid.is_empty(), "tuning grid must be non-empty");
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let users = unique_users(train_fold);
    let mut shuffled: Vec<&String> = users.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let n_inner = ((users.len() as f64) * 0.8).ceil() as usize;
    let n_inner = n_inner.min(users.len().saturating_sub(1)).max(1);
    let inner: std::collections::BTreeSet<&str> =
        shuffled[..n_inner].iter().map(|s| s.as_str()).collect();
    let holdout: std::collections::BTreeSet<&str> =
        shuffled[n_inner..].iter().map(|s| s.as_str()).collect();
    let inner_ds = subset_by_users(train_fold, &inner);
    let holdout_ds = subset_by_users(train_fold, &holdout);

    let scores: Vec<Result<f64>> = grid
        .par_iter()
        .map(|params| {
            let p = GbtParams { seed, ..*params };
            let model = train(&inner_ds, &p)?;
            Ok(holdout_mse(&model, &holdout_ds))
        })
        .collect();
    let mut best = 0usize;
    let mut best_score = f64::INFINITY;
    for (i, s) in scores.into_iter().enumerate() {
        let s = s?;
        if s < best_score {
            best_score = s;
            best = i;
        }
    }
    Ok(grid[best])
}

/// Selector metrics on held-out users. `selections` maps each test user to
/// their predicted algorithm ranking (best first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorMetrics {
    /// Mean over users of P[u, top-1 selection].
    pub avg_ndcg: f64,
    /// Percent of users whose top-1 choice attains the row maximum value
    /// (any argmax counts).
    pub acc1: f64,
    /// Percent of users with some attainer of the row maximum in the top 3.
    pub acc3: f64,
    /// Stricter index-tie counting: only the lowest-column argmax counts.
    pub acc1_index_tie: f64,
    /// Percent of rows whose NDCG values are all zero (every selection is
    /// trivially "correct" there).
    pub all_zero_row_rate: f64,
}

pub fn evaluate_selector(
    p_test: &PerformanceMatrix,
    selections: &BTreeMap<String, Vec<String>>,
) -> Result<SelectorMetrics> {
    let n = p_test.n_users();
    assert!(n > 0, "no test users to evaluate");
    let col_of: BTreeMap<&str, usize> = p_test
        .algo_ids
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let mut sum_ndcg = 0.0;
    let mut hits1 = 0usize;
    let mut hits3 = 0usize;
    let mut hits1_index = 0usize;
    let mut all_zero = 0usize;
    for (u, user_id) in p_test.user_ids.iter().enumerate() {
        let ranking = selections.get(user_id).ok_or_else(|| {
            Error::MissingCoverage(format!("no selection for test user {user_id:?}"))
        })?;
        let row = p_test.row(u);
        let row_max = row.iter().copied().fold(f64::MIN, f64::max);
        let first_argmax = row.iter().position(|&v| v == row_max).unwrap();
        if row_max == 0.0 {
            all_zero += 1;
        }
        let top1 = col_of[ranking[0].as_str()];
        sum_ndcg += row[top1];
        if row[top1] == row_max {
            hits1 += 1;
        }
        if top1 == first_argmax {
            hits1_index += 1;
        }
        if ranking
            .iter()
            .take(3)
            .any(|a| row[col_of[a.as_str()]] == row_max)
        {
            hits3 += 1;
        }
    }
    let pct = |h: usize| 100.0 * h as f64 / n as f64;
    Ok(SelectorMetrics {
        avg_ndcg: sum_ndcg / n as f64,
        acc1: pct(hits1),
        acc3: pct(hits3),
        acc1_index_tie: pct(hits1_index),
        all_zero_row_rate: pct(all_zero),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_folds: usize,
    pub seed: u64,
    /// Choose the single-best algorithm from the full matrix instead of the
    /// training fold.
    pub sba_global: bool,
    pub grid: Vec<GbtParams>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_folds: 5,
            seed: 17,
            sba_global: false,
            grid: default_grid(),
        }
    }
}

/// One fold's measurements on its held-out users.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub sba_algo: String,
    pub sba_perf: f64,
    pub vba_perf: f64,
    pub user_only: SelectorMetrics,
    pub user_algo: SelectorMetrics,
    pub tuned_user_only: GbtParams,
    pub tuned_user_algo: GbtParams,
}

/// Fold-averaged numbers plus the derived report columns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub sba_algo: String,
    pub sba_perf: f64,
    pub vba_perf: f64,
    pub perf_user_only: f64,
    pub acc1_user_only: f64,
    pub acc3_user_only: f64,
    pub perf_user_algo: f64,
    pub gain_vs_sba: f64,
    pub gain_vs_user_ml: f64,
    pub acc1_user_algo: f64,
    pub acc3_user_algo: f64,
    /// None when VBA == SBA (zero gap: undefined).
    pub gap_closed: Option<f64>,
}

/// The derived columns, all in percent. `gap_closed` is undefined when the
/// oracle gap is not positive.
pub fn derived_columns(
    sba_perf: f64,
    vba_perf: f64,
    perf_user_only: f64,
    perf_user_algo: f64,
) -> (f64, f64, Option<f64>) {
    let gain_vs_sba = 100.0 * (perf_user_algo - sba_perf) / sba_perf;
    let gain_vs_user_ml = 100.0 * (perf_user_algo - perf_user_only) / perf_user_only;
    let gap_closed = if vba_perf > sba_perf {
        Some(100.0 * (perf_user_algo - sba_perf) / (vba_perf - sba_perf))
    } else {
        None
    };
    (gain_vs_sba, gain_vs_user_ml, gap_closed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub report: ReportRow,
    pub folds: Vec<FoldResult>,
    /// Fold-averaged index-tie accuracies and all-zero-row rate, reported
    /// alongside the value-tie primaries.
    pub acc1_index_tie_user_only: f64,
    pub acc1_index_tie_user_algo: f64,
    pub all_zero_row_rate: f64,
}

/// Trains both meta-learners for one fold from training-fold rows only.
/// Exposed separately so leakage can be checked by mutating held-out rows.
pub fn train_fold_models(
    p_train: &PerformanceMatrix,
    user_features: &[UserFeatureVector],
    algo_features: &[AlgoFeatureVector],
    grid: &[GbtParams],
    fold_seed: u64,
) -> Result<(MetaModel, MetaModel, GbtParams, GbtParams)> {
    let ds_user_only = build_user_only_dataset(p_train, user_features)?;
    let ds_user_algo = build_user_algo_dataset(p_train, user_features, algo_features)?;
    let tuned_uo = tune_gbt(&ds_user_only, grid, fold_seed)?;
    let tuned_ua = tune_gbt(&ds_user_algo, grid, fold_seed)?;
    let model_uo = train(&ds_user_only, &GbtParams { seed: fold_seed, ..tuned_uo })?;
    let model_ua = train(&ds_user_algo, &GbtParams { seed: fold_seed, ..tuned_ua })?;
    Ok((model_uo, model_ua, tuned_uo, tuned_ua))
}

/// The meta-learning cross-validation over an existing performance matrix
/// and feature sets. Ground truth is fold-independent; only meta-learners
/// are retrained per fold.
pub fn run_meta_cv(
    dataset_name: &str,
    p: &PerformanceMatrix,
    user_features: &[UserFeatureVector],
    algo_features: &[AlgoFeatureVector],
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    let plan = make_folds(&p.user_ids, config.n_folds, config.seed)?;
    let feature_lookup: BTreeMap<&str, &UserFeatureVector> = user_features
        .iter()
        .map(|f| (f.user_id.as_str(), f))
        .collect();

    let fold_results: Vec<Result<FoldResult>> = (0..config.n_folds)
        .into_par_iter()
        .map(|fold| {
            let train_rows: Vec<usize> = (0..p.n_users())
                .filter(|&u| plan.assignments[&p.user_ids[u]] != fold)
                .collect();
            let test_rows: Vec<usize> = (0..p.n_users())
                .filter(|&u| plan.assignments[&p.user_ids[u]] == fold)
                .collect();
            let p_train = p.select_rows(&train_rows);
            let p_test = p.select_rows(&test_rows);

            let fold_seed = config.seed + fold as u64;
            let (model_uo, model_ua, tuned_uo, tuned_ua) = train_fold_models(
                &p_train,
                user_features,
                algo_features,
                &config.grid,
                fold_seed,
            )?;

            // SBA chosen on training rows (or globally), measured on test rows.
            let (sba_algo, _) = if config.sba_global {
                ground_truth::single_best(p)
            } else {
                ground_truth::single_best(&p_train)
            };
            let sba_col = p_test
                .algo_ids
                .iter()
                .position(|a| *a == sba_algo)
                .expect("sba algo missing from columns");
            let sba_perf = (0..p_test.n_users())
                .map(|u| p_test.get(u, sba_col))
                .sum::<f64>()
                / p_test.n_users() as f64;
            let vba_perf = ground_truth::virtual_best(&p_test);

            let mut selections_uo = BTreeMap::new();
            let mut selections_ua = BTreeMap::new();
            for user_id in &p_test.user_ids {
                let uf = feature_lookup.get(user_id.as_str()).ok_or_else(|| {
                    Error::MissingCoverage(format!("no features for test user {user_id:?}"))
                })?;
                let rank_uo: Vec<String> = select(&model_uo, uf, algo_features)?
                    .into_iter()
                    .map(|(a, _)| a)
                    .collect();
                let rank_ua: Vec<String> = select(&model_ua, uf, algo_features)?
                    .into_iter()
                    .map(|(a, _)| a)
                    .collect();
                selections_uo.insert(user_id.clone(), rank_uo);
                selections_ua.insert(user_id.clone(), rank_ua);
            }
            let user_only = evaluate_selector(&p_test, &selections_uo)?;
            let user_algo = evaluate_selector(&p_test, &selections_ua)?;
            Ok(FoldResult {
                fold,
                sba_algo,
                sba_perf,
                vba_perf,
                user_only,
                user_algo,
                tuned_user_only: tuned_uo,
                tuned_user_algo: tuned_ua,
            })
        })
        .collect();

    let mut folds = Vec::with_capacity(config.n_folds);
    for f in fold_results {
        folds.push(f?);
    }

    let n = folds.len() as f64;
    let avg = |f: &dyn Fn(&FoldResult) -> f64| folds.iter().map(|x| f(x)).sum::<f64>() / n;
    let sba_perf = avg(&|f| f.sba_perf);
    let vba_perf = avg(&|f| f.vba_perf);
    let perf_user_only = avg(&|f| f.user_only.avg_ndcg);
    let perf_user_algo = avg(&|f| f.user_algo.avg_ndcg);
    let (gain_vs_sba, gain_vs_user_ml, gap_closed) =
        derived_columns(sba_perf, vba_perf, perf_user_only, perf_user_algo);

    // Representative SBA label: the choice made most often across folds,
    // ties to the lexicographically smallest.
    let mut label_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &folds {
        *label_counts.entry(f.sba_algo.as_str()).or_insert(0) += 1;
    }
    let sba_algo = label_counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(a, _)| a.to_string())
        .unwrap_or_default();

    let report = ReportRow {
        dataset: dataset_name.to_string(),
        sba_algo,
        sba_perf,
        vba_perf,
        perf_user_only,
        acc1_user_only: avg(&|f| f.user_only.acc1),
        acc3_user_only: avg(&|f| f.user_only.acc3),
        perf_user_algo,
        gain_vs_sba,
        gain_vs_user_ml,
        acc1_user_algo: avg(&|f| f.user_algo.acc1),
        acc3_user_algo: avg(&|f| f.user_algo.acc3),
        gap_closed,
    };
    Ok(ExperimentOutcome {
        report,
        acc1_index_tie_user_only: avg(&|f| f.user_only.acc1_index_tie),
        acc1_index_tie_user_algo: avg(&|f| f.user_algo.acc1_index_tie),
        all_zero_row_rate: avg(&|f| f.user_only.all_zero_row_rate),
        folds,
    })
}

/// Full pipeline for one dataset: ground truth from the portfolio, user and
/// algorithm features, then the meta-learning cross-validation.
pub fn run_experiment(
    dataset_name: &str,
    split: &SplitDataset,
    specs: &[RecommenderSpec],
    algo_features: &[AlgoFeatureVector],
    k: usize,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    let p = ground_truth::build_performance_matrix(split, specs, k)
        .map_err(|e| e.in_stage("ground_truth"))?;
    let features = user_features::extract_all(split);
    run_meta_cv(dataset_name, &p, &features, algo_features, config)
        .map_err(|e| e.in_stage("meta_cv"))
}

fn fmt_gap(gap: Option<f64>) -> String {
    match gap {
        Some(v) => format!("{v:.2}%"),
        None => "n/a".to_string(),
    }
}

/// Mean row over the given rows. `gap_closed` is recomputed from the
/// averaged perf columns.
pub fn average_row(rows: &[ReportRow]) -> ReportRow {
    let n = rows.len() as f64;
    let avg = |f: &dyn Fn(&ReportRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
    let sba_perf = avg(&|r| r.sba_perf);
    let vba_perf = avg(&|r| r.vba_perf);
    let perf_user_only = avg(&|r| r.perf_user_only);
    let perf_user_algo = avg(&|r| r.perf_user_algo);
    let (gain_vs_sba, gain_vs_user_ml, gap_closed) =
        derived_columns(sba_perf, vba_perf, perf_user_only, perf_user_algo);
    ReportRow {
        dataset: "Average".to_string(),
        sba_algo: "N/A".to_string(),
        sba_perf,
        vba_perf,
        perf_user_only,
        acc1_user_only: avg(&|r| r.acc1_user_only),
        acc3_user_only: avg(&|r| r.acc3_user_only),
        perf_user_algo,
        gain_vs_sba,
        gain_vs_user_ml,
        acc1_user_algo: avg(&|r| r.acc1_user_algo),
        acc3_user_algo: avg(&|r| r.acc3_user_algo),
        gap_closed,
    }
}

pub const REPORT_COLUMNS: [&str; 13] = [
    "dataset",
    "sba_algo",
    "sba_perf",
    "vba_perf",
    "perf_user_only",
    "acc1_user_only",
    "acc3_user_only",
    "perf_user_algo",
    "gain_vs_sba",
    "gain_vs_user_ml",
    "acc1_user_algo",
    "acc3_user_algo",
    "gap_closed",
];

pub fn write_report_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display())))?;
    w.write_record(REPORT_COLUMNS).map_err(|e| Error::Schema(e.to_string()))?;
    let mut all = rows.to_vec();
    all.push(average_row(rows));
    for r in &all {
        w.write_record([
            r.dataset.clone(),
            r.sba_algo.clone(),
            format!("{:.6}", r.sba_perf),
            format!("{:.6}", r.vba_perf),
            format!("{:.6}", r.perf_user_only),
            format!("{:.4}", r.acc1_user_only),
            format!("{:.4}", r.acc3_user_only),
            format!("{:.6}", r.perf_user_algo),
            format!("{:.4}", r.gain_vs_sba),
            format!("{:.4}", r.gain_vs_user_ml),
            format!("{:.4}", r.acc1_user_algo),
            format!("{:.4}", r.acc3_user_algo),
            r.gap_closed.map_or("n/a".to_string(), |v| format!("{v:.4}")),
        ])
        .map_err(|e| Error::Schema(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Aligned plain-text table over the same columns as the CSV.
pub fn render_report_text(rows: &[ReportRow]) -> String {
    let mut all = rows.to_vec();
    all.push(average_row(rows));
    let mut table: Vec<Vec<String>> = vec![REPORT_COLUMNS.iter().map(|s| s.to_string()).collect()];
    for r in &all {
        table.push(vec![
            r.dataset.clone(),
            r.sba_algo.clone(),
            format!("{:.3}", r.sba_perf),
            format!("{:.3}", r.vba_perf),
            format!("{:.3}", r.perf_user_only),
            format!("{:.2}%", r.acc1_user_only),
            format!("{:.2}%", r.acc3_user_only),
            format!("{:.3}", r.perf_user_algo),
            format!("{:+.2}%", r.gain_vs_sba),
            format!("{:+.2}%", r.gain_vs_user_ml),
            format!("{:.2}%", r.acc1_user_algo),
            format!("{:.2}%", r.acc3_user_algo),
            fmt_gap(r.gap_closed),
        ]);
    }
    let widths: Vec<usize> = (0..REPORT_COLUMNS.len())
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap())
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}", w = w))
            .collect();
        out.push_str(&line.join("  "));
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_disjoint_and_deterministic() {
        let users: Vec<String> = (0..10).map(|i| format!("u{i}")).collect();
        let plan = make_folds(&users, 5, 3).unwrap();
        let plan2 = make_folds(&users, 5, 3).unwrap();
        assert_eq!(plan, plan2);
        let mut sizes = vec![0usize; 5];
        for (_, &f) in &plan.assignments {
            sizes[f] += 1;
        }
        assert_eq!(sizes, vec![2; 5]);
        assert_eq!(plan.assignments.len(), users.len());
        assert!(make_folds(&users[..3], 5, 0).is_err());
    }

    #[test]
    fn grid_of_one_returns_it() {
        let ds = MetaDataset {
            kind: ModelKind::UserAlgo,
            features: crate::meta_learner::Matrix::from_rows(&[vec![1.0], vec![2.0]]),
            targets: crate::meta_learner::Matrix {
                n_rows: 2,
                n_cols: 1,
                data: vec![0.1, 0.2],
            },
            row_keys: vec![
                ("u1".to_string(), Some("a".to_string())),
                ("u2".to_string(), Some("a".to_string())),
            ],
            algo_ids: vec!["a".to_string()],
        };
        let grid = vec![GbtParams::default()];
        assert_eq!(tune_gbt(&ds, &grid, 0).unwrap(), grid[0]);
    }

    #[test]
    fn tuning_prefers_the_generalizing_depth() {
        // Target: clean step function of one feature + per-row noise that a
        // deep, small-leaf tree memorizes and a shallow one cannot.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        use rand::Rng;
        let n = 200usize;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![i as f64 / n as f64, rng.gen::<f64>()])
            .collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| if r[0] < 0.5 { 0.2 } else { 0.8 } + 0.3 * (rng.gen::<f64>() - 0.5))
            .collect();
        let ds = MetaDataset {
            kind: ModelKind::UserAlgo,
            features: crate::meta_learner::Matrix::from_rows(&rows),
            targets: crate::meta_learner::Matrix {
                n_rows: n,
                n_cols: 1,
                data: y,
            },
            row_keys: (0..n).map(|i| (format!("u{i}"), Some("a".to_string()))).collect(),
            algo_ids: vec!["a".to_string()],
        };
        let shallow = GbtParams {
            n_trees: 60,
            max_depth: 1,
            learning_rate: 0.3,
            min_samples_leaf: 20,
            subsample: 1.0,
            seed: 0,
        };
        let deep = GbtParams {
            n_trees: 400,
            max_depth: 12,
            learning_rate: 0.5,
            min_samples_leaf: 1,
            subsample: 1.0,
            seed: 0,
        };
        let picked = tune_gbt(&ds, &[deep, shallow], 9).unwrap();
        assert_eq!(picked.max_depth, 1, "overfitting depth was selected");
        // deterministic rerun
        assert_eq!(tune_gbt(&ds, &[deep, shallow], 9).unwrap(), picked);
    }

    fn pm(algo_ids: &[&str], rows: &[&[f64]]) -> PerformanceMatrix {
        PerformanceMatrix {
            user_ids: (0..rows.len()).map(|u| format!("u{u}")).collect(),
            algo_ids: algo_ids.iter().map(|s| s.to_string()).collect(),
            values: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    fn rank(selections: &[(&str, &[&str])]) -> BTreeMap<String, Vec<String>> {
        selections
            .iter()
            .map(|(u, r)| {
                (
                    u.to_string(),
                    r.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                )
            })
            .collect()
    }

    #[test]
    fn oracle_selector_attains_vba_and_full_accuracy() {
        let p = pm(&["a", "b"], &[&[0.1, 0.9], &[0.8, 0.2]]);
        let sel = rank(&[("u0", &["b", "a"]), ("u1", &["a", "b"])]);
        let m = evaluate_selector(&p, &sel).unwrap();
        assert!((m.avg_ndcg - 0.85).abs() < 1e-15);
        assert_eq!(m.acc1, 100.0);
        assert_eq!(m.acc3, 100.0);
    }

    #[test]
    fn top3_covers_all_of_a_three_algo_portfolio() {
        let p = pm(&["a", "b", "c"], &[&[0.5, 0.1, 0.9], &[0.2, 0.8, 0.1]]);
        let sel = rank(&[("u0", &["a", "b", "c"]), ("u1", &["c", "a", "b"])]);
        let m = evaluate_selector(&p, &sel).unwrap();
        assert_eq!(m.acc3, 100.0);
    }

    #[test]
    fn value_ties_count_as_correct() {
        let p = pm(&["a", "b", "c"], &[&[0.5, 0.5, 0.1]]);
        let sel = rank(&[("u0", &["b", "c", "a"])]);
        let m = evaluate_selector(&p, &sel).unwrap();
        assert_eq!(m.acc1, 100.0);
        // index-tie counting is stricter: the first argmax is column a
        assert_eq!(m.acc1_index_tie, 0.0);
    }

    #[test]
    fn derived_columns_match_report_formulas() {
        let (gain_sba, gain_ml, gap) = derived_columns(0.131, 0.282, 0.135, 0.147);
        assert!((gain_sba - 100.0 * (0.147 - 0.131) / 0.131).abs() < 1e-12);
        assert!((gain_ml - 100.0 * (0.147 - 0.135) / 0.135).abs() < 1e-12);
        assert!((gap.unwrap() - 100.0 * 0.016 / 0.151).abs() < 1e-12);
        // degenerate dominance: zero denominator -> undefined marker
        assert_eq!(derived_columns(0.3, 0.3, 0.3, 0.3).2, None);
    }
}
