//! Pairwise-ranking matrix factorization trained by stochastic gradient
//! ascent on ln sigmoid(x_ui - x_uj) with L2 regularization and uniform
//! negative sampling over each user's non-history items.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

use super::{ModelBase, RankedList, RecommenderSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BprModel {
    base: ModelBase,
    factors: usize,
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub(super) fn fit(spec: &RecommenderSpec, train: &Dataset, base: ModelBase) -> BprModel {
    let d = spec.param("factors", 32.0) as usize;
    let lr = spec.param("lr", 0.05);
    let reg = spec.param("reg", 0.01);
    let epochs = spec.param("epochs", 30.0) as usize;
    let n_users = train.n_users();
    let n_items = train.n_items();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let init = |rng: &mut ChaCha8Rng, len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-0.1..0.1)).collect()
    };
    let mut p = init(&mut rng, n_users * d);
    let mut q = init(&mut rng, n_items * d);

    let positives: Vec<(usize, usize)> = train.dense_iter().map(|(u, i, _, _)| (u, i)).collect();
    let mut order: Vec<usize> = (0..positives.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &pos in &order {
            let (u, i) = positives[pos];
            let history = &base.histories[u];
            if history.len() >= n_items {
                continue; // user has seen everything; no negative exists
            }
            let j = loop {
                let cand = rng.gen_range(0..n_items);
                if history.binary_search(&cand).is_err() {
                    break cand;
                }
            };
            let (pu, qi, qj) = (u * d, i * d, j * d);
            let x = (0..d).map(|f| p[pu + f] * (q[qi + f] - q[qj + f])).sum::<f64>();
            let e = sigmoid(-x);
            for f in 0..d {
                let (puf, qif, qjf) = (p[pu + f], q[qi + f], q[qj + f]);
                p[pu + f] += lr * (e * (qif - qjf) - reg * puf);
                q[qi + f] += lr * (e * puf - reg * qif);
                q[qj + f] += lr * (-e * puf - reg * qjf);
            }
        }
    }
    BprModel {
        base,
        factors: d,
        user_factors: p,
        item_factors: q,
    }
}

impl BprModel {
    pub fn score(&self, user: usize, item: usize) -> f64 {
        let (pu, qi) = (user * self.factors, item * self.factors);
        (0..self.factors)
            .map(|f| self.user_factors[pu + f] * self.item_factors[qi + f])
            .sum()
    }

    pub fn recommend(&self, user: usize, k: usize) -> RankedList {
        self.base.rank_top_k(user, k, |i| self.score(user, i))
    }
}
