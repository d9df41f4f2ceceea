//! Closed-form shallow autoencoder. With the binary Gram matrix G = X^T X
//! and P = (G + lambda I)^-1, the item-weight matrix is
//! B = I - P diag(1 / diag(P)), which has an exactly zero diagonal. Scores
//! are x_u B.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::{ModelBase, RankedList, RecommenderSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EaseModel {
    base: ModelBase,
    n_items: usize,
    /// Row-major n_items x n_items weight matrix with zero diagonal.
    weights: Vec<f64>,
}

pub(super) fn fit(spec: &RecommenderSpec, train: &Dataset, base: ModelBase) -> Result<EaseModel> {
    let lambda = spec.param("lambda", 100.0);
    let n_items = train.n_items();

    // Binary Gram matrix from distinct per-user item sets.
    let mut gram = DMatrix::<f64>::zeros(n_items, n_items);
    for history in &base.histories {
        for (a_pos, &a) in history.iter().enumerate() {
            gram[(a, a)] += 1.0;
            for &b in &history[a_pos + 1..] {
                gram[(a, b)] += 1.0;
                gram[(b, a)] += 1.0;
            }
        }
    }
    for i in 0..n_items {
        gram[(i, i)] += lambda;
    }
    let p = gram.try_inverse().ok_or_else(|| Error::DegenerateData {
        algo_id: spec.algo_id.clone(),
        msg: "regularized Gram matrix is singular".into(),
    })?;

    let mut weights = vec![0.0; n_items * n_items];
    for j in 0..n_items {
        let pjj = p[(j, j)];
        for i in 0..n_items {
            if i != j {
                weights[i * n_items + j] = -p[(i, j)] / pjj;
            }
        }
    }
    Ok(EaseModel {
        base,
        n_items,
        weights,
    })
}

impl EaseModel {
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n_items + j]
    }

    pub fn recommend(&self, user: usize, k: usize) -> RankedList {
        let history = &self.base.histories[user];
        self.base.rank_top_k(user, k, |i| {
            history.iter().map(|&j| self.weight(j, i)).sum()
        })
    }
}
