//! Popularity counting. The rating-damped variant scales each item's count
//! by its mean rating relative to the dataset maximum; on implicit data that
//! factor is 1 and both variants coincide.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

use super::{ModelBase, RankedList, RecommenderSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PopularityModel {
    base: ModelBase,
    scores: Vec<f64>,
}

pub(super) fn fit(spec: &RecommenderSpec, train: &Dataset, base: ModelBase) -> PopularityModel {
    let damped = spec.param("rating_damped", 0.0) != 0.0;
    let n_items = train.n_items();
    let mut counts = vec![0.0f64; n_items];
    let mut rating_sum = vec![0.0f64; n_items];
    let mut max_rating = f64::MIN;
    for (_, i, _, r) in train.dense_iter() {
        counts[i] += 1.0;
        rating_sum[i] += r;
        max_rating = max_rating.max(r);
    }
    let scores = if damped && max_rating > 0.0 {
        (0..n_items)
            .map(|i| {
                if counts[i] > 0.0 {
                    counts[i] * (rating_sum[i] / counts[i]) / max_rating
                } else {
                    0.0
                }
            })
            .collect()
    } else {
        counts
    };
    PopularityModel { base, scores }
}

impl PopularityModel {
    pub fn recommend(&self, user: usize, k: usize) -> RankedList {
        self.base.rank_top_k(user, k, |i| self.scores[i])
    }

    pub fn item_scores(&self) -> &[f64] {
        &self.scores
    }
}
