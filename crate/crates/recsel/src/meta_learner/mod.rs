//! The two meta-learners. The user-only model fits one boosted ensemble per
//! portfolio column from user features alone; the user+algo model fits a
//! single ensemble over concatenated (user, algorithm) feature rows. Both
//! predict NDCG@10 and select algorithms by descending predicted score.

pub mod gbt;

pub use gbt::{best_split, fit_gbt, mse, GbtEnsemble, GbtParams, Matrix};

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code_metrics::{AlgoFeatureVector, ALGO_FEATURE_NAMES, N_ALGO_FEATURES};
use crate::error::{Error, Result};
use crate::ground_truth::PerformanceMatrix;
use crate::user_features::{UserFeatureVector, N_USER_FEATURES, USER_FEATURE_NAMES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    UserOnly,
    UserAlgo,
}

/// Training rows for one meta-learner. For `UserOnly` there is one row per
/// user and one target column per algorithm; for `UserAlgo` one row and one
/// target per (user, algorithm) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaDataset {
    pub kind: ModelKind,
    pub features: Matrix,
    /// Row-major targets: width = n_algos for UserOnly, 1 for UserAlgo.
    pub targets: Matrix,
    pub row_keys: Vec<(String, Option<String>)>,
    pub algo_ids: Vec<String>,
}

fn feature_map(features: &[UserFeatureVector]) -> BTreeMap<&str, &UserFeatureVector> {
    features.iter().map(|f| (f.user_id.as_str(), f)).collect()
}

/// One row per user in P, features = f_I, targets = the user's full P row.
pub fn build_user_only_dataset(
    p: &PerformanceMatrix,
    user_features: &[UserFeatureVector],
) -> Result<MetaDataset> {
    let lookup = feature_map(user_features);
    let mut rows = Vec::with_capacity(p.n_users());
    for user_id in &p.user_ids {
        let f = lookup.get(user_id.as_str()).ok_or_else(|| {
            Error::MissingCoverage(format!("no user features for {user_id:?}"))
        })?;
        rows.push(f.values.to_vec());
    }
    Ok(MetaDataset {
        kind: ModelKind::UserOnly,
        features: Matrix::from_rows(&rows),
        targets: Matrix {
            n_rows: p.n_users(),
            n_cols: p.n_algos(),
            data: p.values.clone(),
        },
        row_keys: p.user_ids.iter().map(|u| (u.clone(), None)).collect(),
        algo_ids: p.algo_ids.clone(),
    })
}

/// One row per (user, algorithm) cell: 15 user features concatenated with
/// 14 algorithm features, target = P[u, a].
pub fn build_user_algo_dataset(
    p: &PerformanceMatrix,
    user_features: &[UserFeatureVector],
    algo_features: &[AlgoFeatureVector],
) -> Result<MetaDataset> {
    let users = feature_map(user_features);
    let algos: BTreeMap<&str, &AlgoFeatureVector> =
        algo_features.iter().map(|f| (f.algo_id.as_str(), f)).collect();
    for algo_id in &p.algo_ids {
        if !algos.contains_key(algo_id.as_str()) {
            return Err(Error::MissingCoverage(format!(
                "no algorithm features for {algo_id:?}"
            )));
        }
    }
    let mut rows = Vec::with_capacity(p.n_users() * p.n_algos());
    let mut targets = Vec::with_capacity(rows.capacity());
    let mut row_keys = Vec::with_capacity(rows.capacity());
    for (u, user_id) in p.user_ids.iter().enumerate() {
        let uf = users.get(user_id.as_str()).ok_or_else(|| {
            Error::MissingCoverage(format!("no user features for {user_id:?}"))
        })?;
        for (a, algo_id) in p.algo_ids.iter().enumerate() {
            let af = algos[algo_id.as_str()];
            let mut row = Vec::with_capacity(N_USER_FEATURES + N_ALGO_FEATURES);
            row.extend_from_slice(&uf.values);
            row.extend_from_slice(&af.values);
            rows.push(row);
            targets.push(p.get(u, a));
            row_keys.push((user_id.clone(), Some(algo_id.clone())));
        }
    }
    Ok(MetaDataset {
        kind: ModelKind::UserAlgo,
        features: Matrix::from_rows(&rows),
        targets: Matrix {
            n_rows: targets.len(),
            n_cols: 1,
            data: targets,
        },
        row_keys,
        algo_ids: p.algo_ids.clone(),
    })
}

/// A trained selector. Serializes to versioned JSON so selections are
/// reproducible across builds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaModel {
    pub version: u32,
    pub kind: ModelKind,
    pub feature_names: Vec<String>,
    pub algo_ids: Vec<String>,
    /// One ensemble per algorithm for UserOnly; exactly one for UserAlgo.
    pub regressors: Vec<GbtEnsemble>,
}

pub fn train(dataset: &MetaDataset, params: &GbtParams) -> Result<MetaModel> {
    match dataset.kind {
        ModelKind::UserOnly => {
            let regressors: Vec<Result<GbtEnsemble>> = (0..dataset.algo_ids.len())
                .into_par_iter()
                .map(|a| {
                    let y: Vec<f64> = (0..dataset.targets.n_rows)
                        .map(|r| dataset.targets.row(r)[a])
                        .collect();
                    fit_gbt(&dataset.features, &y, params)
                })
                .collect();
            let mut ensembles = Vec::with_capacity(regressors.len());
            for r in regressors {
                ensembles.push(r?);
            }
            Ok(MetaModel {
                version: 1,
                kind: ModelKind::UserOnly,
                feature_names: USER_FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
                algo_ids: dataset.algo_ids.clone(),
                regressors: ensembles,
            })
        }
        ModelKind::UserAlgo => {
            let y = dataset.targets.data.clone();
            let ensemble = fit_gbt(&dataset.features, &y, params)?;
            let feature_names = USER_FEATURE_NAMES
                .iter()
                .chain(ALGO_FEATURE_NAMES.iter())
                .map(|s| s.to_string())
                .collect();
            Ok(MetaModel {
                version: 1,
                kind: ModelKind::UserAlgo,
                feature_names,
                algo_ids: dataset.algo_ids.clone(),
                regressors: vec![ensemble],
            })
        }
    }
}

/// Predicted (algo_id, score) pairs sorted by descending score, ties broken
/// by ascending algo_id.
pub fn select(
    model: &MetaModel,
    user: &UserFeatureVector,
    algo_features: &[AlgoFeatureVector],
) -> Result<Vec<(String, f64)>> {
    let mut scored: Vec<(String, f64)> = match model.kind {
        ModelKind::UserOnly => {
            if model.regressors.len() != model.algo_ids.len() {
                return Err(Error::SchemaMismatch(
                    "user-only model regressor count != algo count".into(),
                ));
            }
            model
                .algo_ids
                .iter()
                .zip(&model.regressors)
                .map(|(id, reg)| (id.clone(), reg.predict(&user.values)))
                .collect()
        }
        ModelKind::UserAlgo => {
            let lookup: BTreeMap<&str, &AlgoFeatureVector> =
                algo_features.iter().map(|f| (f.algo_id.as_str(), f)).collect();
            let reg = model.regressors.first().ok_or_else(|| {
                Error::SchemaMismatch("user+algo model has no regressor".into())
            })?;
            let mut out = Vec::with_capacity(model.algo_ids.len());
            for id in &model.algo_ids {
                let af = lookup.get(id.as_str()).ok_or_else(|| {
                    Error::SchemaMismatch(format!("missing algorithm features for {id:?}"))
                })?;
                let mut row = Vec::with_capacity(N_USER_FEATURES + N_ALGO_FEATURES);
                row.extend_from_slice(&user.values);
                row.extend_from_slice(&af.values);
                out.push((id.clone(), reg.predict(&row)));
            }
            out
        }
    };
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(scored)
}

pub fn save_model(model: &MetaModel, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(model)
        .map_err(|e| Error::Schema(format!("model serialization: {e}")))?;
    std::fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_model(path: &Path) -> Result<MetaModel> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("model file {}: {e}", path.display())))
}
