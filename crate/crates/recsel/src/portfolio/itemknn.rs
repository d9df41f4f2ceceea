//! Item-based k-NN over cosine similarity of binary item interaction
//! vectors. Scoring sums similarities from the user's training items that
//! appear in the candidate's top-n neighbor list; an optional shrinkage
//! `sim * co / (co + beta)` discounts low-support pairs.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

use super::{ModelBase, RankedList, RecommenderSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ItemKnnModel {
    base: ModelBase,
    /// For each item, its top-n neighbors as (neighbor, similarity),
    /// similarity-descending.
    neighbors: Vec<Vec<(usize, f64)>>,
}

pub(super) fn fit(spec: &RecommenderSpec, train: &Dataset, base: ModelBase) -> ItemKnnModel {
    let n = spec.param("neighbors", 20.0) as usize;
    let beta = spec.param("shrinkage", 0.0);
    let n_items = train.n_items();

    // Distinct users per item, then pairwise co-occurrence via user histories.
    let mut item_users: Vec<usize> = vec![0; n_items];
    let mut co = std::collections::HashMap::<(usize, usize), usize>::new();
    for history in &base.histories {
        for (a_pos, &a) in history.iter().enumerate() {
            item_users[a] += 1;
            for &b in &history[a_pos + 1..] {
                *co.entry((a, b)).or_insert(0) += 1;
            }
        }
    }

    let mut sims: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_items];
    for (&(a, b), &count) in &co {
        let denom = (item_users[a] as f64).sqrt() * (item_users[b] as f64).sqrt();
        let mut sim = count as f64 / denom;
        if beta > 0.0 {
            sim *= count as f64 / (count as f64 + beta);
        }
        sims[a].push((b, sim));
        sims[b].push((a, sim));
    }
    let neighbors = sims
        .into_iter()
        .map(|mut v| {
            v.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap().then(x.0.cmp(&y.0)));
            v.truncate(n);
            v
        })
        .collect();
    ItemKnnModel { base, neighbors }
}

impl ItemKnnModel {
    pub fn recommend(&self, user: usize, k: usize) -> RankedList {
        let history = &self.base.histories[user];
        self.base.rank_top_k(user, k, |i| {
            self.neighbors[i]
                .iter()
                .filter(|(j, _)| history.binary_search(j).is_ok())
                .map(|(_, s)| s)
                .sum()
        })
    }

    pub fn neighbors_of(&self, item: usize) -> &[(usize, f64)] {
        &self.neighbors[item]
    }
}
