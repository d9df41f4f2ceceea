//! Gradient boosting with squared-error loss over depth-limited regression
//! trees. Splits are exact: a variance-reduction scan over every midpoint of
//! consecutive distinct feature values, honoring min_samples_leaf. Each
//! stage fits the residuals on a seeded row subsample and is added with
//! shrinkage.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 20,
            subsample: 0.8,
            seed: 0,
        }
    }
}

impl GbtParams {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must be in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "subsample must be in (0, 1], got {}",
                self.subsample
            )));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidArgument("min_samples_leaf must be >= 1".into()));
        }
        Ok(())
    }
}

/// Row-major feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        Matrix {
            n_rows,
            n_cols,
            data: rows.iter().flat_map(|r| r.iter().copied()).collect(),
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.n_cols..(r + 1) * self.n_cols]
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        Matrix {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            data: rows.iter().flat_map(|&r| self.row(r).iter().copied()).collect(),
        }
    }
}

/// Flattened tree: internal nodes carry (feature, threshold, children),
/// leaves carry a value. Rows with feature value <= threshold go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: usize,
    pub threshold: f64,
    pub left: i32,
    pub right: i32,
    pub value: f64,
    pub is_leaf: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            let node = &self.nodes[idx];
            if node.is_leaf {
                return node.value;
            }
            idx = if row[node.feature] <= node.threshold {
                node.left as usize
            } else {
                node.right as usize
            };
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub sse_reduction: f64,
}

/// Exhaustive best split over the given rows: for every feature, scan every
/// midpoint of consecutive distinct sorted values and keep the split with
/// the largest SSE reduction. Ties keep the lowest feature index, then the
/// lowest threshold. Returns None when no split satisfies min_samples_leaf
/// or improves SSE.
pub fn best_split(
    x: &Matrix,
    residuals: &[f64],
    rows: &[usize],
    min_samples_leaf: usize,
) -> Option<SplitChoice> {
    let n = rows.len();
    if n < 2 * min_samples_leaf {
        return None;
    }
    let total_sum: f64 = rows.iter().map(|&r| residuals[r]).sum();
    let total_sq: f64 = rows.iter().map(|&r| residuals[r] * residuals[r]).sum();
    let parent_sse = total_sq - total_sum * total_sum / n as f64;

    let mut best: Option<SplitChoice> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for feature in 0..x.n_cols {
        order.sort_by(|&a, &b| {
            x.row(a)[feature]
                .partial_cmp(&x.row(b)[feature])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for i in 0..n - 1 {
            let r = order[i];
            left_sum += residuals[r];
            left_sq += residuals[r] * residuals[r];
            let left_n = i + 1;
            let right_n = n - left_n;
            if left_n < min_samples_leaf || right_n < min_samples_leaf {
                continue;
            }
            let v = x.row(order[i])[feature];
            let v_next = x.row(order[i + 1])[feature];
            if v == v_next {
                continue; // not a boundary between distinct values
            }
            let right_sum = total_sum - left_sum;
            let right_sq = total_sq - left_sq;
            let sse = (left_sq - left_sum * left_sum / left_n as f64)
                + (right_sq - right_sum * right_sum / right_n as f64);
            let reduction = parent_sse - sse;
            if reduction <= 0.0 {
                continue;
            }
            let threshold = v + (v_next - v) / 2.0;
            let better = match &best {
                None => true,
                Some(b) => reduction > b.sse_reduction,
            };
            if better {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    sse_reduction: reduction,
                });
            }
        }
    }
    best
}

fn build_tree(
    x: &Matrix,
    residuals: &[f64],
    rows: Vec<usize>,
    depth_left: usize,
    min_samples_leaf: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let mean = rows.iter().map(|&r| residuals[r]).sum::<f64>() / rows.len() as f64;
    let idx = nodes.len();
    nodes.push(TreeNode {
        feature: 0,
        threshold: 0.0,
        left: -1,
        right: -1,
        value: mean,
        is_leaf: true,
    });
    if depth_left == 0 {
        return idx;
    }
    let Some(split) = best_split(x, residuals, &rows, min_samples_leaf) else {
        return idx;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .into_iter()
        .partition(|&r| x.row(r)[split.feature] <= split.threshold);
    let left = build_tree(x, residuals, left_rows, depth_left - 1, min_samples_leaf, nodes);
    let right = build_tree(x, residuals, right_rows, depth_left - 1, min_samples_leaf, nodes);
    nodes[idx] = TreeNode {
        feature: split.feature,
        threshold: split.threshold,
        left: left as i32,
        right: right as i32,
        value: 0.0,
        is_leaf: false,
    };
    idx
}

/// A fitted boosted ensemble: F(x) = f0 + lr * sum of tree predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtEnsemble {
    pub version: u32,
    pub f0: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegressionTree>,
}

impl GbtEnsemble {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.f0
            + self.learning_rate
                * self.trees.iter().map(|t| t.predict(row)).sum::<f64>()
    }
}

pub fn fit_gbt(x: &Matrix, y: &[f64], params: &GbtParams) -> Result<GbtEnsemble> {
    params.validate()?;
    if x.n_rows == 0 || x.n_rows != y.len() {
        return Err(Error::InvalidArgument(format!(
            "feature matrix has {} rows but {} targets",
            x.n_rows,
            y.len()
        )));
    }
    if x.data.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in training data".into()));
    }

    let f0 = y.iter().sum::<f64>() / y.len() as f64;
    let mut predictions = vec![f0; y.len()];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let sample_size = ((params.subsample * x.n_rows as f64).floor() as usize).max(1);
    let mut all_rows: Vec<usize> = (0..x.n_rows).collect();
    for _ in 0..params.n_trees {
        let rows: Vec<usize> = if sample_size < x.n_rows {
            all_rows.shuffle(&mut rng);
            let mut s = all_rows[..sample_size].to_vec();
            s.sort_unstable();
            s
        } else {
            all_rows.clone()
        };
        let residuals: Vec<f64> = y
            .iter()
            .zip(&predictions)
            .map(|(yi, pi)| yi - pi)
            .collect();
        let mut nodes = Vec::new();
        build_tree(
            x,
            &residuals,
            rows,
            params.max_depth,
            params.min_samples_leaf,
            &mut nodes,
        );
        let tree = RegressionTree { nodes };
        for (r, p) in predictions.iter_mut().enumerate() {
            *p += params.learning_rate * tree.predict(x.row(r));
        }
        trees.push(tree);
    }
    Ok(GbtEnsemble {
        version: 1,
        f0,
        learning_rate: params.learning_rate,
        trees,
    })
}

pub fn mse(model: &GbtEnsemble, x: &Matrix, y: &[f64]) -> f64 {
    let total: f64 = (0..x.n_rows)
        .map(|r| {
            let e = model.predict(x.row(r)) - y[r];
            e * e
        })
        .sum();
    total / x.n_rows as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn params(n_trees: usize, max_depth: usize, lr: f64, msl: usize, sub: f64) -> GbtParams {
        GbtParams {
            n_trees,
            max_depth,
            learning_rate: lr,
            min_samples_leaf: msl,
            subsample: sub,
            seed: 42,
        }
    }

    #[test]
    fn zero_trees_is_mean_predictor() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]);
        let y = [1.0, 2.0, 6.0];
        let m = fit_gbt(&x, &y, &params(0, 3, 0.1, 1, 1.0)).unwrap();
        assert_eq!(m.predict(&[5.0]), 3.0);
    }

    /// Brute-force oracle: evaluate every candidate threshold (every
    /// midpoint) directly by computing both sides' SSE from scratch.
    fn brute_force_split(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
        let mut vals: Vec<f64> = xs.to_vec();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        let sse = |members: &[f64]| -> f64 {
            if members.is_empty() {
                return 0.0;
            }
            let m = members.iter().sum::<f64>() / members.len() as f64;
            members.iter().map(|v| (v - m) * (v - m)).sum()
        };
        let total = sse(ys);
        let mut best: Option<(f64, f64)> = None;
        for w in vals.windows(2) {
            let t = w[0] + (w[1] - w[0]) / 2.0;
            let left: Vec<f64> = xs
                .iter()
                .zip(ys)
                .filter(|(x, _)| **x <= t)
                .map(|(_, y)| *y)
                .collect();
            let right: Vec<f64> = xs
                .iter()
                .zip(ys)
                .filter(|(x, _)| **x > t)
                .map(|(_, y)| *y)
                .collect();
            if left.is_empty() || right.is_empty() {
                continue;
            }
            let reduction = total - sse(&left) - sse(&right);
            if reduction > 0.0 && best.map_or(true, |(_, r)| reduction > r) {
                best = Some((t, reduction));
            }
        }
        best
    }

    #[test]
    fn stump_matches_brute_force_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..100 {
            let n = rng.gen_range(4..40);
            let xs: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..15) as f64) / 3.0).collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|x| x * rng.gen_range(-2.0..2.0) + rng.gen_range(-1.0..1.0))
                .collect();
            let x = Matrix::from_rows(&xs.iter().map(|&v| vec![v]).collect::<Vec<_>>());
            let model = fit_gbt(&x, &ys, &params(1, 1, 1.0, 1, 1.0)).unwrap();
            let oracle = brute_force_split(&xs, &ys);
            let root = &model.trees[0].nodes[0];
            match oracle {
                None => assert!(root.is_leaf, "case {case}: oracle found no split"),
                Some((t, reduction)) => {
                    assert!(!root.is_leaf, "case {case}: split missed (oracle gain {reduction})");
                    assert!(
                        (root.threshold - t).abs() < 1e-12,
                        "case {case}: threshold {} vs oracle {t}",
                        root.threshold
                    );
                }
            }
        }
    }

    #[test]
    fn realizable_step_function_is_learned_exactly() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..40).map(|i| if i < 17 { 1.0 } else { 5.0 }).collect();
        let x = Matrix::from_rows(&rows);
        let m = fit_gbt(&x, &y, &params(200, 2, 0.5, 1, 1.0)).unwrap();
        assert!(mse(&m, &x, &y) < 1e-6);
    }

    #[test]
    fn constant_targets_give_constant_predictor() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]);
        let y = [3.5, 3.5, 3.5];
        let m = fit_gbt(&x, &y, &params(10, 3, 0.1, 1, 1.0)).unwrap();
        assert_eq!(m.predict(&[0.7]), 3.5);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let x = Matrix::from_rows(&[vec![0.0], vec![f64::NAN]]);
        assert!(fit_gbt(&x, &[1.0, 2.0], &params(1, 1, 0.1, 1, 1.0)).is_err());
    }

    #[test]
    fn determinism_same_seed_same_model() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 + rng.gen::<f64>()).collect();
        let x = Matrix::from_rows(&rows);
        let p = params(30, 3, 0.1, 2, 0.7);
        let m1 = fit_gbt(&x, &y, &p).unwrap();
        let m2 = fit_gbt(&x, &y, &p).unwrap();
        assert_eq!(
            serde_json::to_string(&m1).unwrap(),
            serde_json::to_string(&m2).unwrap()
        );
    }

    #[test]
    fn training_error_non_increasing_without_subsampling() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 7) as f64, (i % 3) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] - 0.5 * r[1]).collect();
        let x = Matrix::from_rows(&rows);
        let mut previous = f64::INFINITY;
        for n_trees in [0, 5, 10, 20, 40, 80] {
            let m = fit_gbt(&x, &y, &params(n_trees, 10, 0.3, 1, 1.0)).unwrap();
            let err = mse(&m, &x, &y);
            assert!(err <= previous + 1e-12, "mse rose from {previous} to {err}");
            previous = err;
        }
    }

    #[test]
    fn shifting_targets_shifts_predictions_by_constant() {
        let rows: Vec<Vec<f64>> = (0..25).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| (r[0] * 0.3).sin()).collect();
        let shifted: Vec<f64> = y.iter().map(|v| v + 10.0).collect();
        let x = Matrix::from_rows(&rows);
        let p = params(50, 3, 0.1, 2, 1.0);
        let m1 = fit_gbt(&x, &y, &p).unwrap();
        let m2 = fit_gbt(&x, &shifted, &p).unwrap();
        for r in 0..x.n_rows {
            let a = m1.predict(x.row(r));
            let b = m2.predict(x.row(r));
            assert!((b - a - 10.0).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
