//! A portfolio of recommender implementations behind one fit/recommend
//! interface.
//!
//! Nine default members span six families: popularity counting, item-based
//! k-NN, pairwise-ranking matrix factorization, implicit-feedback ALS, a
//! closed-form shallow autoencoder, and a factorized Markov chain. Paired
//! variants (`*_a` / `*_b`) use different hyperparameters and physically
//! separate source files so their code-metric fingerprints differ.

mod bpr;
mod ease;
mod fpmc;
mod implicitmf;
mod itemknn;
mod popularity;

pub use bpr::BprModel;
pub use ease::EaseModel;
pub use fpmc::FpmcModel;
pub use implicitmf::{als_loss, ImplicitMfModel};
pub use itemknn::ItemKnnModel;
pub use popularity::PopularityModel;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Popularity,
    ItemKnn,
    Bpr,
    ImplicitMf,
    Ease,
    Fpmc,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "popularity" => Ok(Family::Popularity),
            "itemknn" => Ok(Family::ItemKnn),
            "bpr" => Ok(Family::Bpr),
            "implicitmf" => Ok(Family::ImplicitMf),
            "ease" => Ok(Family::Ease),
            "fpmc" => Ok(Family::Fpmc),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

/// One portfolio member: an algorithm family plus fixed hyperparameters,
/// a seed, and the path of the source file its code metrics come from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecommenderSpec {
    pub algo_id: String,
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    pub source_path: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl RecommenderSpec {
    pub fn param(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }
}

/// Top-k recommendations: items sorted by non-increasing score, ties broken
/// by ascending item index, training-history items excluded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub items: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Shared per-model training context: each user's distinct training items
/// (sorted) and their chronologically last item.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBase {
    pub n_items: usize,
    pub histories: Vec<Vec<usize>>,
    pub last_item: Vec<Option<usize>>,
}

impl ModelBase {
    pub fn from_train(train: &Dataset) -> Self {
        let mut seen = vec![Vec::new(); train.n_users()];
        let mut last: Vec<Option<(i64, usize)>> = vec![None; train.n_users()];
        for (u, i, t, _) in train.dense_iter() {
            seen[u].push(i);
            // Latest timestamp wins; input order breaks ties.
            if last[u].map_or(true, |(lt, _)| t >= lt) {
                last[u] = Some((t, i));
            }
        }
        let histories = seen
            .into_iter()
            .map(|mut v| {
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        ModelBase {
            n_items: train.n_items(),
            histories,
            last_item: last.into_iter().map(|o| o.map(|(_, i)| i)).collect(),
        }
    }

    /// Ranks all non-history items for `user` by `score`, keeping the top k.
    pub fn rank_top_k(&self, user: usize, k: usize, score: impl Fn(usize) -> f64) -> RankedList {
        let history = &self.histories[user];
        let mut scored: Vec<(usize, f64)> = (0..self.n_items)
            .filter(|i| history.binary_search(i).is_err())
            .map(|i| (i, score(i)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(k);
        RankedList {
            items: scored.iter().map(|&(i, _)| i).collect(),
            scores: scored.iter().map(|&(_, s)| s).collect(),
        }
    }
}

/// An immutable fitted recommender. Fitting is deterministic given
/// (spec.params, spec.seed, train); recommendation may run concurrently.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum FittedModel {
    Popularity(PopularityModel),
    ItemKnn(ItemKnnModel),
    Bpr(BprModel),
    ImplicitMf(ImplicitMfModel),
    Ease(EaseModel),
    Fpmc(FpmcModel),
}

pub fn fit(spec: &RecommenderSpec, train: &Dataset) -> Result<FittedModel> {
    if train.n_interactions() == 0 {
        return Err(Error::FitFailed {
            algo_id: spec.algo_id.clone(),
            msg: "empty training data".into(),
        });
    }
    let base = ModelBase::from_train(train);
    Ok(match spec.family {
        Family::Popularity => FittedModel::Popularity(popularity::fit(spec, train, base)),
        Family::ItemKnn => FittedModel::ItemKnn(itemknn::fit(spec, train, base)),
        Family::Bpr => FittedModel::Bpr(bpr::fit(spec, train, base)),
        Family::ImplicitMf => FittedModel::ImplicitMf(implicitmf::fit(spec, train, base)?),
        Family::Ease => FittedModel::Ease(ease::fit(spec, train, base)?),
        Family::Fpmc => FittedModel::Fpmc(fpmc::fit(spec, train, base)),
    })
}

pub fn recommend(model: &FittedModel, user: usize, k: usize) -> RankedList {
    match model {
        FittedModel::Popularity(m) => m.recommend(user, k),
        FittedModel::ItemKnn(m) => m.recommend(user, k),
        FittedModel::Bpr(m) => m.recommend(user, k),
        FittedModel::ImplicitMf(m) => m.recommend(user, k),
        FittedModel::Ease(m) => m.recommend(user, k),
        FittedModel::Fpmc(m) => m.recommend(user, k),
    }
}

/// The nine-member default portfolio. `source_dir` holds one source file per
/// member, named `<algo_id>.py`.
pub fn default_portfolio(source_dir: &Path) -> Vec<RecommenderSpec> {
    let spec = |algo_id: &str, family: Family, params: &[(&str, f64)], seed: u64| {
        RecommenderSpec {
            algo_id: algo_id.to_string(),
            family,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            source_path: source_dir.join(format!("{algo_id}.py")),
            seed,
        }
    };
    vec![
        spec("pop_a", Family::Popularity, &[("rating_damped", 0.0)], 1),
        spec("pop_b", Family::Popularity, &[("rating_damped", 1.0)], 2),
        spec(
            "itemknn_a",
            Family::ItemKnn,
            &[("neighbors", 20.0), ("shrinkage", 0.0)],
            3,
        ),
        spec(
            "itemknn_b",
            Family::ItemKnn,
            &[("neighbors", 100.0), ("shrinkage", 100.0)],
            4,
        ),
        spec(
            "bpr_a",
            Family::Bpr,
            &[("factors", 32.0), ("lr", 0.05), ("reg", 0.01), ("epochs", 30.0)],
            5,
        ),
        spec(
            "bpr_b",
            Family::Bpr,
            &[("factors", 64.0), ("lr", 0.01), ("reg", 0.001), ("epochs", 50.0)],
            6,
        ),
        spec(
            "implicitmf",
            Family::ImplicitMf,
            &[("factors", 32.0), ("alpha", 40.0), ("reg", 0.1), ("sweeps", 15.0)],
            7,
        ),
        spec("ease", Family::Ease, &[("lambda", 100.0)], 8),
        spec(
            "fpmc",
            Family::Fpmc,
            &[("factors", 32.0), ("lr", 0.05), ("reg", 0.01), ("epochs", 30.0)],
            9,
        ),
    ]
}

#[derive(Debug, Deserialize)]
struct ManifestFile {
    #[serde(rename = "algorithm")]
    algorithms: Vec<ManifestEntry>,
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    algo_id: String,
    family: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    source_path: String,
    #[serde(default)]
    seed: u64,
}

/// Loads a portfolio manifest (TOML, one `[[algorithm]]` table per member).
/// Relative `source_path` entries resolve against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<Vec<RecommenderSpec>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let parsed: ManifestFile = toml::from_str(&text)
        .map_err(|e| Error::Schema(format!("portfolio manifest {}: {e}", path.display())))?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    let mut specs = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for entry in parsed.algorithms {
        if !seen.insert(entry.algo_id.clone()) {
            return Err(Error::Schema(format!(
                "duplicate algo_id {:?} in manifest",
                entry.algo_id
            )));
        }
        let source_path = {
            let p = PathBuf::from(&entry.source_path);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        if !source_path.is_file() {
            return Err(Error::Schema(format!(
                "source_path {} for {:?} is not a readable file",
                source_path.display(),
                entry.algo_id
            )));
        }
        specs.push(RecommenderSpec {
            algo_id: entry.algo_id,
            family: entry.family.parse()?,
            params: entry.params,
            source_path,
            seed: entry.seed,
        });
    }
    if specs.is_empty() {
        return Err(Error::Schema("portfolio manifest lists no algorithms".into()));
    }
    Ok(specs)
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;
    use crate::dataset::{Dataset, Interaction};

    pub fn tiny_train(rows: &[(&str, &str, i64)]) -> Dataset {
        Dataset::from_interactions(
            rows.iter()
                .map(|&(u, i, t)| Interaction {
                    user: u.into(),
                    item: i.into(),
                    timestamp: t,
                    rating: None,
                })
                .collect(),
        )
    }

    pub fn spec(family: Family, params: &[(&str, f64)], seed: u64) -> RecommenderSpec {
        RecommenderSpec {
            algo_id: format!("{family:?}").to_lowercase(),
            family,
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            source_path: PathBuf::from("/dev/null"),
            seed,
        }
    }
}
