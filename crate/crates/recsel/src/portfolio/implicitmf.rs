//! Alternating least squares on implicit feedback with confidence
//! c_ui = 1 + alpha * r_ui. Each sweep solves closed-form ridge systems per
//! user and per item.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

use super::{ModelBase, RankedList, RecommenderSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImplicitMfModel {
    base: ModelBase,
    factors: usize,
    user_factors: Vec<f64>,
    item_factors: Vec<f64>,
}

/// Per-row confidence weights: r_ui aggregated by summing ratings (counts on
/// implicit data) over duplicate events.
fn confidence_lists(train: &Dataset, alpha: f64) -> Vec<Vec<(usize, f64)>> {
    let mut per_user: Vec<std::collections::BTreeMap<usize, f64>> =
        vec![std::collections::BTreeMap::new(); train.n_users()];
    for (u, i, _, r) in train.dense_iter() {
        *per_user[u].entry(i).or_insert(0.0) += r;
    }
    per_user
        .into_iter()
        .map(|m| m.into_iter().map(|(i, r)| (i, 1.0 + alpha * r)).collect())
        .collect()
}

fn transpose_lists(lists: &[Vec<(usize, f64)>], n_items: usize) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new(); n_items];
    for (u, row) in lists.iter().enumerate() {
        for &(i, c) in row {
            out[i].push((u, c));
        }
    }
    out
}

/// One half-sweep: recompute `target` factors holding `fixed` factors
/// constant. Solves (F^T F + sum_k (c_k - 1) f_k f_k^T + reg I) x =
/// sum_k c_k f_k for each row.
fn solve_side(
    target: &mut [f64],
    fixed: &[f64],
    lists: &[Vec<(usize, f64)>],
    d: usize,
    reg: f64,
) {
    let n_fixed = fixed.len() / d;
    let mut gram = DMatrix::<f64>::zeros(d, d);
    for k in 0..n_fixed {
        let fk = DVector::from_column_slice(&fixed[k * d..(k + 1) * d]);
        gram += &fk * fk.transpose();
    }
    for a in 0..d {
        gram[(a, a)] += reg;
    }
    for (row, observed) in lists.iter().enumerate() {
        let mut lhs = gram.clone();
        let mut rhs = DVector::<f64>::zeros(d);
        for &(k, c) in observed {
            let fk = DVector::from_column_slice(&fixed[k * d..(k + 1) * d]);
            lhs += (c - 1.0) * (&fk * fk.transpose());
            rhs += c * fk;
        }
        let solution = lhs
            .lu()
            .solve(&rhs)
            .unwrap_or_else(|| DVector::zeros(d));
        target[row * d..(row + 1) * d].copy_from_slice(solution.as_slice());
    }
}

pub(super) fn fit(
    spec: &RecommenderSpec,
    train: &Dataset,
    base: ModelBase,
) -> Result<ImplicitMfModel> {
    let d = spec.param("factors", 32.0) as usize;
    let alpha = spec.param("alpha", 40.0);
    let reg = spec.param("reg", 0.1);
    let sweeps = spec.param("sweeps", 15.0) as usize;
    if d == 0 {
        return Err(Error::DegenerateData {
            algo_id: spec.algo_id.clone(),
            msg: "factors must be >= 1".into(),
        });
    }
    let user_lists = confidence_lists(train, alpha);
    let item_lists = transpose_lists(&user_lists, train.n_items());

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x: Vec<f64> = (0..train.n_users() * d).map(|_| rng.gen_range(-0.01..0.01)).collect();
    let mut y: Vec<f64> = (0..train.n_items() * d).map(|_| rng.gen_range(-0.01..0.01)).collect();
    for _ in 0..sweeps {
        solve_side(&mut x, &y, &user_lists, d, reg);
        solve_side(&mut y, &x, &item_lists, d, reg);
    }
    Ok(ImplicitMfModel {
        base,
        factors: d,
        user_factors: x,
        item_factors: y,
    })
}

/// Full weighted regularized squared loss over all (user, item) cells, with
/// preference 1 and the row's confidence on observed cells and preference 0,
/// confidence 1 elsewhere. Used by convergence tests.
pub fn als_loss(
    train: &Dataset,
    model: &ImplicitMfModel,
    alpha: f64,
    reg: f64,
) -> f64 {
    let d = model.factors;
    let user_lists = confidence_lists(train, alpha);
    let mut loss = 0.0;
    for u in 0..train.n_users() {
        let observed: std::collections::BTreeMap<usize, f64> =
            user_lists[u].iter().copied().collect();
        for i in 0..train.n_items() {
            let pred: f64 = (0..d)
                .map(|f| model.user_factors[u * d + f] * model.item_factors[i * d + f])
                .sum();
            let (c, p) = match observed.get(&i) {
                Some(&c) => (c, 1.0),
                None => (1.0, 0.0),
            };
            loss += c * (p - pred) * (p - pred);
        }
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    loss + reg * (sq(&model.user_factors) + sq(&model.item_factors))
}

impl ImplicitMfModel {
    pub fn recommend(&self, user: usize, k: usize) -> RankedList {
        let d = self.factors;
        self.base.rank_top_k(user, k, |i| {
            (0..d)
                .map(|f| self.user_factors[user * d + f] * self.item_factors[i * d + f])
                .sum()
        })
    }
}
