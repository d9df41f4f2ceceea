//! Factorized personalized Markov chain: combines a user-item term with a
//! (previous item)-item transition term, trained with pairwise ranking
//! updates over (user, previous item, item) triples taken from
//! chronologically adjacent interactions. Recommendation conditions on the
//! user's last training item.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

use super::{ModelBase, RankedList, RecommenderSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FpmcModel {
    base: ModelBase,
    factors: usize,
    /// <v_u^{UI}, v_i^{IU}> user-taste term.
    user_ui: Vec<f64>,
    item_iu: Vec<f64>,
    /// <v_l^{LI}, v_i^{IL}> transition term conditioned on the last item l.
    prev_li: Vec<f64>,
    item_il: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Chronologically adjacent (user, prev_item, next_item) triples per user,
/// stable on timestamp ties.
fn adjacent_triples(train: &Dataset) -> Vec<(usize, usize, usize)> {
    let per_user = train.by_user();
    let mut triples = Vec::new();
    for (u, positions) in per_user.iter().enumerate() {
        let mut ordered = positions.clone();
        ordered.sort_by_key(|&pos| train.interactions()[pos].timestamp);
        for w in ordered.windows(2) {
            let prev = train.dense_pair(w[0]).1;
            let next = train.dense_pair(w[1]).1;
            triples.push((u, prev, next));
        }
    }
    triples
}

pub(super) fn fit(spec: &RecommenderSpec, train: &Dataset, base: ModelBase) -> FpmcModel {
    let d = spec.param("factors", 32.0) as usize;
    let lr = spec.param("lr", 0.05);
    let reg = spec.param("reg", 0.01);
    let epochs = spec.param("epochs", 30.0) as usize;
    let n_users = train.n_users();
    let n_items = train.n_items();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut init = |len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-0.1..0.1)).collect()
    };
    let mut user_ui = init(n_users * d);
    let mut item_iu = init(n_items * d);
    let mut prev_li = init(n_items * d);
    let mut item_il = init(n_items * d);

    let triples = adjacent_triples(train);
    let mut order: Vec<usize> = (0..triples.len()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &t in &order {
            let (u, l, i) = triples[t];
            let history = &base.histories[u];
            if history.len() >= n_items {
                continue;
            }
            let j = loop {
                let cand = rng.gen_range(0..n_items);
                if history.binary_search(&cand).is_err() {
                    break cand;
                }
            };
            let (ou, ol, oi, oj) = (u * d, l * d, i * d, j * d);
            let mut x = 0.0;
            for f in 0..d {
                x += user_ui[ou + f] * (item_iu[oi + f] - item_iu[oj + f]);
                x += prev_li[ol + f] * (item_il[oi + f] - item_il[oj + f]);
            }
            let e = sigmoid(-x);
            for f in 0..d {
                let (vu, vl) = (user_ui[ou + f], prev_li[ol + f]);
                let (wi_u, wj_u) = (item_iu[oi + f], item_iu[oj + f]);
                let (wi_l, wj_l) = (item_il[oi + f], item_il[oj + f]);
                user_ui[ou + f] += lr * (e * (wi_u - wj_u) - reg * vu);
                item_iu[oi + f] += lr * (e * vu - reg * wi_u);
                item_iu[oj + f] += lr * (-e * vu - reg * wj_u);
                prev_li[ol + f] += lr * (e * (wi_l - wj_l) - reg * vl);
                item_il[oi + f] += lr * (e * vl - reg * wi_l);
                item_il[oj + f] += lr * (-e * vl - reg * wj_l);
            }
        }
    }
    FpmcModel {
        base,
        factors: d,
        user_ui,
        item_iu,
        prev_li,
        item_il,
    }
}

impl FpmcModel {
    pub fn score(&self, user: usize, item: usize) -> f64 {
        let d = self.factors;
        let mut s: f64 = (0..d)
            .map(|f| self.user_ui[user * d + f] * self.item_iu[item * d + f])
            .sum();
        if let Some(last) = self.base.last_item[user] {
            s += (0..d)
                .map(|f| self.prev_li[last * d + f] * self.item_il[item * d + f])
                .sum::<f64>();
        }
        s
    }

    pub fn recommend(&self, user: usize, k: usize) -> RankedList {
        self.base.rank_top_k(user, k, |i| self.score(user, i))
    }
}
