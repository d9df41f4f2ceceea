//! Per-(user, algorithm) NDCG@10 ground truth and the single-best /
//! virtual-best baselines.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::SplitDataset;
use crate::error::{Error, Result};
use crate::portfolio::{self, RankedList, RecommenderSpec};

/// Dense users x algorithms matrix of NDCG@10 values in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMatrix {
    pub user_ids: Vec<String>,
    pub algo_ids: Vec<String>,
    /// Row-major, rows follow `user_ids`, columns follow `algo_ids`.
    pub values: Vec<f64>,
}

impl PerformanceMatrix {
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_algos(&self) -> usize {
        self.algo_ids.len()
    }

    pub fn get(&self, user_row: usize, algo_col: usize) -> f64 {
        self.values[user_row * self.algo_ids.len() + algo_col]
    }

    pub fn row(&self, user_row: usize) -> &[f64] {
        let w = self.algo_ids.len();
        &self.values[user_row * w..(user_row + 1) * w]
    }

    /// Column means summed in user-row order (bit-stable under threading).
    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n_users() as f64;
        (0..self.n_algos())
            .map(|a| (0..self.n_users()).map(|u| self.get(u, a)).sum::<f64>() / n)
            .collect()
    }

    /// Sub-matrix restricted to the given rows, preserving order.
    pub fn select_rows(&self, rows: &[usize]) -> PerformanceMatrix {
        PerformanceMatrix {
            user_ids: rows.iter().map(|&r| self.user_ids[r].clone()).collect(),
            algo_ids: self.algo_ids.clone(),
            values: rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display())))?;
        w.write_record(["user_id", "algo_id", "ndcg"])
            .map_err(|e| Error::Schema(e.to_string()))?;
        for (u, user_id) in self.user_ids.iter().enumerate() {
            for (a, algo_id) in self.algo_ids.iter().enumerate() {
                w.write_record([user_id.as_str(), algo_id.as_str(), &format!("{:.17}", self.get(u, a))])
                    .map_err(|e| Error::Schema(e.to_string()))?;
            }
        }
        w.flush().map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<PerformanceMatrix> {
        let mut rdr = csv::Reader::from_path(path)
            .map_err(|e| Error::Schema(format!("cannot read {}: {e}", path.display())))?;
        let mut user_ids: Vec<String> = Vec::new();
        let mut algo_ids: Vec<String> = Vec::new();
        let mut cells: Vec<(String, String, f64)> = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Validation {
                row: row + 2,
                msg: e.to_string(),
            })?;
            let (u, a, v) = (
                record.get(0).unwrap_or("").to_string(),
                record.get(1).unwrap_or("").to_string(),
                record
                    .get(2)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::Validation {
                        row: row + 2,
                        msg: "unparseable ndcg value".into(),
                    })?,
            );
            if !user_ids.contains(&u) {
                user_ids.push(u.clone());
            }
            if !algo_ids.contains(&a) {
                algo_ids.push(a.clone());
            }
            cells.push((u, a, v));
        }
        let mut values = vec![f64::NAN; user_ids.len() * algo_ids.len()];
        for (u, a, v) in cells {
            let ur = user_ids.iter().position(|x| *x == u).unwrap();
            let ac = algo_ids.iter().position(|x| *x == a).unwrap();
            values[ur * algo_ids.len() + ac] = v;
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Validation {
                row: 0,
                msg: "performance matrix has missing (user, algo) cells".into(),
            });
        }
        Ok(PerformanceMatrix {
            user_ids,
            algo_ids,
            values,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub sba_algo: String,
    pub sba_perf: f64,
    pub vba_perf: f64,
}

/// NDCG@k with binary relevance. DCG sums 1/log2(p+1) over relevant ranked
/// positions p <= k; the ideal DCG places min(k, |relevant|) hits first.
pub fn ndcg_at_k(ranked: &RankedList, relevant: &BTreeSet<usize>, k: usize) -> f64 {
    assert!(k >= 1, "ndcg_at_k requires k >= 1");
    assert!(!relevant.is_empty(), "ndcg_at_k requires a non-empty relevant set");
    let dcg: f64 = ranked
        .items
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, item)| relevant.contains(item))
        .map(|(pos, _)| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    let idcg: f64 = (0..k.min(relevant.len()))
        .map(|pos| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    dcg / idcg
}

/// Fits every portfolio member on the training split and evaluates NDCG@k
/// for every test user. Rows follow the split's test-user order; columns
/// follow portfolio order. One fit failure aborts the whole build.
pub fn build_performance_matrix(
    split: &SplitDataset,
    specs: &[RecommenderSpec],
    k: usize,
) -> Result<PerformanceMatrix> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("portfolio is empty".into()));
    }
    let test_users = split.test_users();
    let columns: Vec<Result<Vec<f64>>> = specs
        .par_iter()
        .map(|spec| {
            let model = portfolio::fit(spec, &split.train).map_err(|e| Error::FitFailed {
                algo_id: spec.algo_id.clone(),
                msg: e.to_string(),
            })?;
            Ok(test_users
                .iter()
                .map(|&u| {
                    let relevant = &split.test[&u];
                    let recs = portfolio::recommend(&model, u, k);
                    ndcg_at_k(&recs, relevant, k)
                })
                .collect())
        })
        .collect();
    let mut cols = Vec::with_capacity(specs.len());
    for c in columns {
        cols.push(c?);
    }
    let mut values = Vec::with_capacity(test_users.len() * specs.len());
    for (row, _) in test_users.iter().enumerate() {
        for col in &cols {
            values.push(col[row]);
        }
    }
    Ok(PerformanceMatrix {
        user_ids: test_users
            .iter()
            .map(|&u| split.train.user_label(u).to_string())
            .collect(),
        algo_ids: specs.iter().map(|s| s.algo_id.clone()).collect(),
        values,
    })
}

/// Best average column: argmax of column means, ties resolved by the
/// lexicographically smallest algo_id.
pub fn single_best(p: &PerformanceMatrix) -> (String, f64) {
    assert!(p.n_users() > 0 && p.n_algos() > 0, "empty performance matrix");
    let means = p.column_means();
    let mut best = 0;
    for a in 1..p.n_algos() {
        if means[a] > means[best]
            || (means[a] == means[best] && p.algo_ids[a] < p.algo_ids[best])
        {
            best = a;
        }
    }
    (p.algo_ids[best].clone(), means[best])
}

/// Mean over users of their row maxima: the oracle selector's performance.
pub fn virtual_best(p: &PerformanceMatrix) -> f64 {
    assert!(p.n_users() > 0 && p.n_algos() > 0, "empty performance matrix");
    let total: f64 = (0..p.n_users())
        .map(|u| p.row(u).iter().copied().fold(f64::MIN, f64::max))
        .sum();
    total / p.n_users() as f64
}

pub fn baselines(p: &PerformanceMatrix) -> BaselineSummary {
    let (sba_algo, sba_perf) = single_best(p);
    BaselineSummary {
        sba_algo,
        sba_perf,
        vba_perf: virtual_best(p),
    }
}
