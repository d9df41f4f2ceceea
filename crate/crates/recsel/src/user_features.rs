//! The 15-dimensional per-user meta-feature vector, computed from the user's
//! training interactions only. Covers activity, rating patterns, temporal
//! dynamics, and item-popularity preferences.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SplitDataset};
use crate::error::{Error, Result};

pub const USER_FEATURE_NAMES: [&str; 15] = [
    "n_interactions",
    "n_unique_items",
    "redundancy",
    "mean_rating",
    "std_rating",
    "rating_entropy",
    "history_duration_days",
    "mean_gap_days",
    "activity_rate",
    "recency_days",
    "mean_item_popularity",
    "median_item_popularity",
    "std_item_popularity",
    "longtail_fraction",
    "popularity_entropy",
];

pub const N_USER_FEATURES: usize = 15;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserFeatureVector {
    pub user_id: String,
    pub values: [f64; N_USER_FEATURES],
}

/// Training-split item statistics shared by all users: normalized popularity
/// (count / max count) and membership in the top-20%-most-popular head.
#[derive(Debug, Clone)]
pub struct GlobalStats {
    popularity: Vec<f64>,
    is_head: Vec<bool>,
}

impl GlobalStats {
    pub fn from_train(train: &Dataset) -> Self {
        let n_items = train.n_items();
        let mut counts = vec![0usize; n_items];
        for (_, i, _, _) in train.dense_iter() {
            counts[i] += 1;
        }
        let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let popularity = counts.iter().map(|&c| c as f64 / max).collect();
        // Head = ceil(20% of training items) by (count desc, index asc).
        // Only items with train interactions count toward the head budget;
        // the shared index space also holds test-only items.
        let mut order: Vec<usize> = (0..n_items).filter(|&i| counts[i] > 0).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let head_size = (0.2 * order.len() as f64).ceil() as usize;
        let mut is_head = vec![false; n_items];
        for &i in order.iter().take(head_size) {
            is_head[i] = true;
        }
        GlobalStats { popularity, is_head }
    }

    pub fn popularity(&self, item: usize) -> f64 {
        self.popularity[item]
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Shannon entropy (natural log) of a discrete count distribution.
fn entropy_from_counts<I: IntoIterator<Item = usize>>(counts: I) -> f64 {
    let counts: Vec<usize> = counts.into_iter().collect();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum()
}

/// Computes the canonical 15 features for one user from training data.
/// `split_point` is the user's train/test boundary timestamp (for recency).
pub fn extract_user_features(
    user: usize,
    train: &Dataset,
    global: &GlobalStats,
    split_point: i64,
) -> UserFeatureVector {
    let events: Vec<(usize, i64, f64)> = train
        .dense_iter()
        .filter(|&(u, _, _, _)| u == user)
        .map(|(_, i, t, r)| (i, t, r))
        .collect();
    assert!(!events.is_empty(), "user has no training interactions");

    let n = events.len() as f64;
    let mut items: Vec<usize> = events.iter().map(|e| e.0).collect();
    items.sort_unstable();
    let mut unique_items = items.clone();
    unique_items.dedup();
    let n_unique = unique_items.len() as f64;
    let redundancy = 1.0 - n_unique / n;

    let ratings: Vec<f64> = events.iter().map(|e| e.2).collect();
    let mean_rating = mean(&ratings);
    let std_rating = population_std(&ratings);
    let mut rating_counts: BTreeMap<u64, usize> = BTreeMap::new();
    for r in &ratings {
        *rating_counts.entry(r.to_bits()).or_insert(0) += 1;
    }
    let rating_entropy = entropy_from_counts(rating_counts.into_values());

    let mut timestamps: Vec<i64> = events.iter().map(|e| e.1).collect();
    timestamps.sort_unstable();
    let duration_days = (timestamps[timestamps.len() - 1] - timestamps[0]) as f64 / SECONDS_PER_DAY;
    let mean_gap_days = if timestamps.len() < 2 {
        0.0
    } else {
        timestamps
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 / SECONDS_PER_DAY)
            .sum::<f64>()
            / (timestamps.len() - 1) as f64
    };
    // Day buckets relative to the user's first event, so the whole vector is
    // invariant under shifting every timestamp by a constant.
    let t0 = timestamps[0];
    let mut active_days: Vec<i64> = timestamps.iter().map(|t| (t - t0).div_euclid(86_400)).collect();
    active_days.dedup();
    let activity_rate = n / active_days.len() as f64;
    let recency_days = (split_point - timestamps[timestamps.len() - 1]) as f64 / SECONDS_PER_DAY;

    let mut pops: Vec<f64> = events.iter().map(|e| global.popularity[e.0]).collect();
    pops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean_pop = mean(&pops);
    let median_pop = median(&pops);
    let std_pop = population_std(&pops);
    let longtail = unique_items
        .iter()
        .filter(|&&i| !global.is_head[i])
        .count() as f64
        / n_unique;
    let mut item_counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &(i, _, _) in &events {
        *item_counts.entry(i).or_insert(0) += 1;
    }
    let popularity_entropy = entropy_from_counts(item_counts.into_values());

    UserFeatureVector {
        user_id: train.user_label(user).to_string(),
        values: [
            n,
            n_unique,
            redundancy,
            mean_rating,
            std_rating,
            rating_entropy,
            duration_days,
            mean_gap_days,
            activity_rate,
            recency_days,
            mean_pop,
            median_pop,
            std_pop,
            longtail,
            popularity_entropy,
        ],
    }
}

/// Features for every user with training history, in dense-index order.
pub fn extract_all(split: &SplitDataset) -> Vec<UserFeatureVector> {
    let global = GlobalStats::from_train(&split.train);
    let per_user = split.train.by_user();
    per_user
        .iter()
        .enumerate()
        .filter(|(_, positions)| !positions.is_empty())
        .map(|(u, _)| {
            let split_point = split.split_point.get(&u).copied().unwrap_or_else(|| {
                // Users without test items fall back to their last train event.
                split
                    .train
                    .dense_iter()
                    .filter(|&(tu, _, _, _)| tu == u)
                    .map(|(_, _, t, _)| t)
                    .max()
                    .unwrap()
            });
            extract_user_features(u, &split.train, &global, split_point)
        })
        .collect()
}

pub fn write_csv(features: &[UserFeatureVector], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display())))?;
    let mut header = vec!["user_id".to_string()];
    header.extend(USER_FEATURE_NAMES.iter().map(|s| s.to_string()));
    w.write_record(&header).map_err(|e| Error::Schema(e.to_string()))?;
    for f in features {
        let mut rec = vec![f.user_id.clone()];
        rec.extend(f.values.iter().map(|v| format!("{v:.17}")));
        w.write_record(&rec).map_err(|e| Error::Schema(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<UserFeatureVector>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
    let header = r
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .clone();
    let expected: Vec<&str> = std::iter::once("user_id")
        .chain(USER_FEATURE_NAMES.iter().copied())
        .collect();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::SchemaMismatch(format!(
            "user-feature header {got:?} does not match the canonical names"
        )));
    }
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
        let mut values = [0.0; N_USER_FEATURES];
        for (i, v) in values.iter_mut().enumerate() {
            *v = rec[i + 1].parse::<f64>().map_err(|e| Error::Validation {
                row: row + 1,
                msg: format!("bad value in column {}: {e}", USER_FEATURE_NAMES[i]),
            })?;
            if !v.is_finite() {
                return Err(Error::Validation {
                    row: row + 1,
                    msg: format!("non-finite value in column {}", USER_FEATURE_NAMES[i]),
                });
            }
        }
        out.push(UserFeatureVector {
            user_id: rec[0].to_string(),
            values,
        });
    }
    Ok(out)
}
