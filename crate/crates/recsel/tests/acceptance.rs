//! Acceptance gate: one test per criterion, each printing a PASS line when
//! its assertions hold (failures abort with the offending values).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use recsel::code_metrics::{
    extract_features, profile_by_name, python_profile, rust_profile, tree_metrics,
    AlgoFeatureVector,
};
use recsel::dataset::{
    dataset_stats, filter_min_interactions, load_interactions, temporal_split, ColumnSchema,
    Dataset, FileFormat, Interaction, SplitDataset,
};
use recsel::experiment::{
    derived_columns, run_meta_cv, train_fold_models, ExperimentConfig,
};
use recsel::ground_truth::{build_performance_matrix, ndcg_at_k, PerformanceMatrix};
use recsel::meta_learner::{fit_gbt, GbtParams, Matrix};
use recsel::portfolio::{fit, load_manifest, FittedModel, RankedList};
use recsel::user_features::UserFeatureVector;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn toy_split() -> SplitDataset {
    let schema = ColumnSchema {
        user: "user_id".into(),
        item: "item_id".into(),
        timestamp: "timestamp".into(),
        rating: Some("rating".into()),
    };
    let (raw, _) = load_interactions(
        &fixtures().join("toy_interactions.csv"),
        FileFormat::Csv,
        &schema,
        false,
    )
    .unwrap();
    temporal_split(&filter_min_interactions(&raw, 10).unwrap(), 0.8).unwrap()
}

// ---------------------------------------------------------------- criterion 1

#[test]
fn criterion_1_sparsity_reproduction() {
    // (users, items, interactions, published sparsity %)
    let published: [(usize, usize, usize, f64); 6] = [
        (6_040, 3_706, 1_000_209, 95.53),
        (1_874, 17_612, 92_779, 99.72),
        (2_946, 17_384, 272_677, 99.47),
        (9_446, 68_433, 240_843, 99.96),
        (2_189, 5_076, 104_737, 99.06),
        (59, 84, 681, 86.26),
    ];
    for (users, items, interactions, want) in published {
        let got = 100.0 * dataset_stats(users, items, interactions).sparsity;
        assert!(
            (got - want).abs() < 0.01,
            "sparsity for {users}x{items}/{interactions}: got {got:.4}, published {want}"
        );
    }
    println!("[criterion 1] PASS: all 6 published sparsity figures reproduced within 0.01pp");
}

// ---------------------------------------------------------------- criterion 2

#[test]
fn criterion_2_report_arithmetic() {
    // (name, sba, vba, perf_user_only, perf_user_algo,
    //  printed gain vs sba %, printed gain vs user ml %, printed gap closed %)
    let rows: [(&str, f64, f64, f64, f64, f64, f64, f64); 7] = [
        ("row_a", 0.284, 0.616, 0.331, 0.332, 16.99, 0.27, 14.54),
        ("row_b", 0.038, 0.086, 0.049, 0.052, 38.56, 5.89, 29.90),
        ("row_c", 0.041, 0.072, 0.037, 0.040, -3.89, 6.18, -4.97),
        ("row_d", 0.107, 0.181, 0.107, 0.106, -0.84, -1.30, -1.26),
        ("row_e", 0.163, 0.358, 0.200, 0.195, 19.16, -2.50, 16.10),
        ("row_f", 0.150, 0.380, 0.083, 0.154, 2.46, 86.56, 1.64),
        ("average", 0.131, 0.282, 0.135, 0.147, 12.07, 8.83, 10.49),
    ];
    for (name, sba, vba, uo, ua, want_gain, want_gain_ml, want_gap) in rows {
        let (gain, gain_ml, gap) = derived_columns(sba, vba, uo, ua);
        let gap = gap.expect("vba > sba in every published row");
        assert!(
            (gain - want_gain).abs() <= 2.0,
            "{name}: gain vs single-best {gain:.2} vs printed {want_gain} (tol 2.0pp)"
        );
        assert!(
            (gain_ml - want_gain_ml).abs() <= 2.0,
            "{name}: gain vs user-ml {gain_ml:.2} vs printed {want_gain_ml} (tol 2.0pp)"
        );
        // row_c's printed gap was computed from unrounded internals; the
        // 3-decimal inputs quantize the gap in steps of ~3.2pp, so only the
        // propagated input-rounding bound is checkable there.
        let gap_tol = if name == "row_c" { 3.4 } else { 1.0 };
        assert!(
            (gap - want_gap).abs() <= gap_tol,
            "{name}: gap closed {gap:.2} vs printed {want_gap} (tol {gap_tol}pp)"
        );
    }
    println!(
        "[criterion 2] PASS: derived report columns match all 7 published rows \
         (gap tolerance widened to the input-rounding bound for one row)"
    );
}

// ---------------------------------------------------------------- criterion 3

/// Independent NDCG oracle: textbook formula, written against the raw item
/// slices rather than the library's iterator pipeline.
fn ndcg_oracle(items: &[usize], relevant: &BTreeSet<usize>, k: usize) -> f64 {
    let mut dcg = 0.0;
    for p in 1..=k.min(items.len()) {
        if relevant.contains(&items[p - 1]) {
            dcg += 1.0 / ((p as f64) + 1.0).log2();
        }
    }
    let ideal_hits = relevant.len().min(k);
    let mut idcg = 0.0;
    for p in 1..=ideal_hits {
        idcg += 1.0 / ((p as f64) + 1.0).log2();
    }
    dcg / idcg
}

#[test]
fn criterion_3a_ndcg_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..1000 {
        let n_items = rng.gen_range(5..60);
        let k = rng.gen_range(1..=15);
        let list_len = rng.gen_range(1..=n_items);
        let mut pool: Vec<usize> = (0..n_items).collect();
        for i in (1..pool.len()).rev() {
            pool.swap(i, rng.gen_range(0..=i));
        }
        let items: Vec<usize> = pool[..list_len].to_vec();
        let n_rel = rng.gen_range(1..=n_items);
        let relevant: BTreeSet<usize> = (0..n_items)
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        let relevant = if relevant.is_empty() {
            BTreeSet::from([rng.gen_range(0..n_items)])
        } else {
            relevant
        };
        let _ = n_rel;
        let ranked = RankedList {
            items: items.clone(),
            scores: vec![0.0; items.len()],
        };
        let got = ndcg_at_k(&ranked, &relevant, k);
        let want = ndcg_oracle(&items, &relevant, k);
        assert!(
            (got - want).abs() < 1e-12,
            "case {case}: ndcg {got} vs oracle {want}"
        );
    }
    println!("[criterion 3a] PASS: 1000 randomized NDCG cases match the direct oracle at 1e-12");
}

#[test]
fn criterion_3b_ease_closed_form_oracle() {
    // Random 6-item instance: 12 users, 2..4 distinct items each.
    let n_items = 6usize;
    let lambda = 7.5;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut interactions = Vec::new();
    let mut baskets: Vec<BTreeSet<usize>> = Vec::new();
    for u in 0..12 {
        let size = rng.gen_range(2..=4);
        let mut basket = BTreeSet::new();
        while basket.len() < size {
            basket.insert(rng.gen_range(0..n_items));
        }
        for (pos, &item) in basket.iter().enumerate() {
            interactions.push(Interaction {
                user: format!("u{u}"),
                item: format!("i{item}"),
                timestamp: pos as i64,
                rating: None,
            });
        }
        baskets.push(basket);
    }
    let train = Dataset::from_interactions(interactions);
    let spec = load_manifest(&fixtures().join("portfolio.toml"))
        .unwrap()
        .into_iter()
        .find(|s| s.algo_id == "ease")
        .map(|mut s| {
            s.params.insert("lambda".into(), lambda);
            s
        })
        .unwrap();
    let model = match fit(&spec, &train).unwrap() {
        FittedModel::Ease(m) => m,
        other => panic!("expected an ease model, got {other:?}"),
    };

    // Oracle: per column j, the constrained ridge problem
    //   min ||x_j - X b||^2 + lambda ||b||^2  s.t. b_j = 0
    // solved directly by deleting row/column j from (G + lambda I).
    // Items are indexed by first appearance in the interaction list.
    let idx = |label: &str| train.item_idx(label).unwrap();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(n_items, n_items);
    for basket in &baskets {
        let dense: Vec<usize> = basket.iter().map(|i| idx(&format!("i{i}"))).collect();
        for &a in &dense {
            for &b in &dense {
                gram[(a, b)] += 1.0;
            }
        }
    }
    for j in 0..n_items {
        let keep: Vec<usize> = (0..n_items).filter(|&i| i != j).collect();
        let mut a = nalgebra::DMatrix::<f64>::zeros(n_items - 1, n_items - 1);
        let mut rhs = nalgebra::DVector::<f64>::zeros(n_items - 1);
        for (r, &i) in keep.iter().enumerate() {
            rhs[r] = gram[(i, j)];
            for (c, &i2) in keep.iter().enumerate() {
                a[(r, c)] = gram[(i, i2)] + if i == i2 { lambda } else { 0.0 };
            }
        }
        let b = a.lu().solve(&rhs).expect("regularized system is SPD");
        for (r, &i) in keep.iter().enumerate() {
            let got = model.weight(i, j);
            assert!(
                (got - b[r]).abs() < 1e-8,
                "weight({i},{j}) = {got} vs constrained LS oracle {}",
                b[r]
            );
        }
        assert_eq!(model.weight(j, j), 0.0, "diagonal must be exactly zero");
    }
    println!(
        "[criterion 3b] PASS: item weights match the constrained least-squares oracle \
         at 1e-8 with an exactly zero diagonal"
    );
}

#[test]
fn criterion_3c_gbt_split_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for case in 0..100 {
        let n = rng.gen_range(4..40);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-5.0..5.0)]).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = Matrix::from_rows(&rows);
        let params = GbtParams {
            n_trees: 1,
            max_depth: 1,
            learning_rate: 1.0,
            min_samples_leaf: 1,
            subsample: 1.0,
            seed: 0,
        };
        let model = fit_gbt(&x, &y, &params).unwrap();

        // Brute force over every midpoint of consecutive distinct values.
        let mut xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        let mean = |vals: &[f64]| vals.iter().sum::<f64>() / vals.len() as f64;
        let sse = |vals: &[f64]| {
            let m = mean(vals);
            vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
        };
        let mut best: Option<(f64, f64, f64)> = None; // (sse, left mean, right mean)
        let mut best_threshold = f64::NAN;
        for w in xs.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<f64> = (0..n).filter(|&i| rows[i][0] <= t).map(|i| y[i]).collect();
            let right: Vec<f64> = (0..n).filter(|&i| rows[i][0] > t).map(|i| y[i]).collect();
            let total = sse(&left) + sse(&right);
            if best.map_or(true, |(s, _, _)| total < s - 1e-12) {
                best = Some((total, mean(&left), mean(&right)));
                best_threshold = t;
            }
        }
        if let Some((_, left_mean, right_mean)) = best {
            for i in 0..n {
                let want = mean(&y)
                    + if rows[i][0] <= best_threshold {
                        left_mean - mean(&y)
                    } else {
                        right_mean - mean(&y)
                    };
                let got = model.predict(&rows[i]);
                assert!(
                    (got - want).abs() < 1e-9,
                    "case {case}, row {i}: stump predicts {got}, brute force {want}"
                );
            }
        }
    }
    println!("[criterion 3c] PASS: depth-1 trees reproduce brute-force best splits on 100 datasets");
}

fn toy_inputs() -> (PerformanceMatrix, Vec<UserFeatureVector>, Vec<AlgoFeatureVector>) {
    let split = toy_split();
    let specs = load_manifest(&fixtures().join("portfolio.toml")).unwrap();
    let p = build_performance_matrix(&split, &specs, 10).unwrap();
    let user_feats = recsel::user_features::extract_all(&split);
    let profile = python_profile();
    let algo_feats = specs
        .iter()
        .map(|s| extract_features(&s.algo_id, &s.source_path, &profile).unwrap())
        .collect();
    (p, user_feats, algo_feats)
}

#[test]
fn criterion_3d_baseline_ordering() {
    let (p, user_feats, algo_feats) = toy_inputs();
    let outcome = run_meta_cv(
        "toy",
        &p,
        &user_feats,
        &algo_feats,
        &ExperimentConfig::default(),
    )
    .unwrap();
    for f in &outcome.folds {
        assert!(
            f.vba_perf >= f.sba_perf,
            "fold {}: oracle {} below single-best {}",
            f.fold,
            f.vba_perf,
            f.sba_perf
        );
        for (name, perf) in [
            ("user-only", f.user_only.avg_ndcg),
            ("user+algo", f.user_algo.avg_ndcg),
        ] {
            assert!(
                f.vba_perf >= perf,
                "fold {}: oracle {} below {name} selector {}",
                f.fold,
                f.vba_perf,
                perf
            );
        }
    }
    println!(
        "[criterion 3d] PASS: oracle >= single-best and >= both selectors on all {} folds",
        outcome.folds.len()
    );
}

#[test]
fn criterion_3e_leakage_guard() {
    let (p, user_feats, algo_feats) = toy_inputs();
    let plan = recsel::experiment::make_folds(&p.user_ids, 5, 17).unwrap();
    let train_rows: Vec<usize> = (0..p.n_users())
        .filter(|&u| plan.assignments[&p.user_ids[u]] != 0)
        .collect();
    let grid = vec![GbtParams::default()];

    let p_train = p.select_rows(&train_rows);
    let models_a = train_fold_models(&p_train, &user_feats, &algo_feats, &grid, 17).unwrap();

    // Corrupt every held-out-fold target, rebuild the training view, retrain.
    let mut mutated = p.clone();
    let n_algos = mutated.n_algos();
    for u in 0..mutated.n_users() {
        if plan.assignments[&mutated.user_ids[u]] == 0 {
            for a in 0..n_algos {
                mutated.values[u * n_algos + a] = 0.987654321;
            }
        }
    }
    let p_train_mut = mutated.select_rows(&train_rows);
    let models_b = train_fold_models(&p_train_mut, &user_feats, &algo_feats, &grid, 17).unwrap();

    let ser = |m: &(recsel::meta_learner::MetaModel, recsel::meta_learner::MetaModel, GbtParams, GbtParams)| {
        (
            serde_json::to_string(&m.0).unwrap(),
            serde_json::to_string(&m.1).unwrap(),
        )
    };
    assert_eq!(
        ser(&models_a),
        ser(&models_b),
        "meta-models changed after mutating held-out targets"
    );
    println!("[criterion 3e] PASS: mutating held-out-fold targets leaves trained models bit-identical");
}

// ---------------------------------------------------------------- criterion 4

fn synth_algo_features(n: usize) -> Vec<AlgoFeatureVector> {
    (0..n)
        .map(|k| {
            let mut values = [0.0; 14];
            values[0] = 30.0 + k as f64;
            values[1] = 25.0 + k as f64;
            values[2] = 3.0;
            values[3] = 2.0;
            values[4] = 100.0 + 10.0 * k as f64; // the planted code metric
            values[5] = 10.0;
            values[6] = values[4] * values[5];
            values[7] = 20.0;
            values[8] = 19.0;
            values[9] = 1.9;
            values[10] = 5.0;
            values[11] = 0.0;
            values[12] = 0.0;
            values[13] = 4.0;
            AlgoFeatureVector {
                algo_id: format!("algo{k}"),
                values,
            }
        })
        .collect()
}

fn noise_users(n: usize, rng: &mut ChaCha8Rng) -> Vec<UserFeatureVector> {
    (0..n)
        .map(|u| {
            let mut values = [0.0; 15];
            for v in values.iter_mut() {
                *v = rng.gen::<f64>();
            }
            UserFeatureVector {
                user_id: format!("u{u:03}"),
                values,
            }
        })
        .collect()
}

fn single_point_grid() -> Vec<GbtParams> {
    vec![GbtParams {
        n_trees: 100,
        max_depth: 3,
        learning_rate: 0.1,
        min_samples_leaf: 20,
        subsample: 0.8,
        seed: 0,
    }]
}

#[test]
fn criterion_4_planted_signal() {
    // Construction A: the best algorithm is a threshold function of user
    // feature 0; additive N(0, 0.02) noise on every NDCG value.
    let n_users = 150;
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let normal = Normal::new(0.0, 0.02).unwrap();
    let mut users = noise_users(n_users, &mut rng);
    let algos = synth_algo_features(3);
    let mut values = Vec::new();
    for u in &mut users {
        let f = u.values[0];
        let best = if f < 0.34 {
            0
        } else if f < 0.67 {
            1
        } else {
            2
        };
        for k in 0..3 {
            let base = if k == best { 0.75 } else { 0.45 };
            let v: f64 = base + normal.sample(&mut rng);
            values.push(v.clamp(0.0, 1.0));
        }
    }
    let p = PerformanceMatrix {
        user_ids: users.iter().map(|u| u.user_id.clone()).collect(),
        algo_ids: algos.iter().map(|a| a.algo_id.clone()).collect(),
        values,
    };
    let config = ExperimentConfig {
        seed: 1,
        grid: single_point_grid(),
        ..ExperimentConfig::default()
    };
    let out = run_meta_cv("planted_user", &p, &users, &algos, &config).unwrap();
    let r = &out.report;
    let gap = |perf: f64| 100.0 * (perf - r.sba_perf) / (r.vba_perf - r.sba_perf);
    let gap_uo = gap(r.perf_user_only);
    let gap_ua = gap(r.perf_user_algo);
    assert!(
        gap_uo >= 80.0,
        "user-only closed only {gap_uo:.1}% of the gap on the user-feature construction"
    );
    assert!(
        gap_ua >= 80.0,
        "user+algo closed only {gap_ua:.1}% of the gap on the user-feature construction"
    );

    // Construction B: per-algorithm offsets linear in one code metric, user
    // features pure noise. The pooled model must strictly beat the
    // per-column model on 5/5 seeds.
    let (n_users_b, gap_b, sigma_b) = construction_b_params();
    let mut wins = 0;
    for seed in 1..=5u64 {
        let (p, users, algos) = construction_b(n_users_b, 9, gap_b, sigma_b, seed);
        let config = ExperimentConfig {
            seed,
            grid: single_point_grid(),
            ..ExperimentConfig::default()
        };
        let out = run_meta_cv("planted_algo", &p, &users, &algos, &config).unwrap();
        if out.report.perf_user_algo > out.report.perf_user_only {
            wins += 1;
        } else {
            eprintln!(
                "seed {seed}: user+algo {:.5} did not exceed user-only {:.5}",
                out.report.perf_user_algo, out.report.perf_user_only
            );
        }
    }
    assert_eq!(wins, 5, "user+algo must strictly win on 5/5 seeds");
    println!(
        "[criterion 4] PASS: both selectors closed >= 80% of the gap on the user-feature \
         construction ({gap_uo:.1}% / {gap_ua:.1}%); user+algo strictly beat user-only on 5/5 \
         code-metric-signal seeds"
    );
}

fn construction_b_params() -> (usize, f64, f64) {
    // Calibrated over a 20-seed sweep; see the bundled notes on tolerances.
    (120, 0.02, 0.05)
}

fn construction_b(
    n_users: usize,
    n_algos: usize,
    gap: f64,
    sigma: f64,
    seed: u64,
) -> (PerformanceMatrix, Vec<UserFeatureVector>, Vec<AlgoFeatureVector>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users = noise_users(n_users, &mut rng);
    let algos = synth_algo_features(n_algos);
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut values = Vec::with_capacity(n_users * n_algos);
    for _ in 0..n_users {
        for k in 0..n_algos {
            let v: f64 = 0.35 + gap * k as f64 + normal.sample(&mut rng);
            values.push(v.clamp(0.0, 1.0));
        }
    }
    let p = PerformanceMatrix {
        user_ids: users.iter().map(|u| u.user_id.clone()).collect(),
        algo_ids: algos.iter().map(|a| a.algo_id.clone()).collect(),
        values,
    };
    (p, users, algos)
}

// ---------------------------------------------------------------- criterion 5

#[test]
fn criterion_5_code_metric_fixtures() {
    // clip.py, hand-counted: operators {def ( , ) : if < > return} with
    // N1 = 15; operands {clip x lo hi} with N2 = 11 (x appears 4 times
    // including the parameter list). N = 26, vocabulary 13.
    let clip = extract_features(
        "clip",
        &fixtures().join("code_samples/clip.py"),
        &python_profile(),
    )
    .unwrap();
    let v = 26.0 * 13.0f64.log2();
    let d = (9.0 / 2.0) * (11.0 / 4.0);
    let expect_clip: [(usize, f64); 14] = [
        (0, 6.0),          // sloc
        (1, 6.0),          // lloc
        (2, 3.0),          // 1 + two ifs
        (3, 1.0),          // one def block
        (4, v),
        (5, d),
        (6, d * v),
        (7, 7.0),          // root + 6 code lines
        (8, 6.0),
        (9, 12.0 / 7.0),
        (10, 4.0),         // the def line: 3 children + root
        (11, 0.0),
        (12, 0.0),
        (13, 3.0),         // root -> def -> if -> return
    ];
    for (i, want) in expect_clip {
        let got = clip.values[i];
        let tol = if (4..7).contains(&i) { 1e-3 } else { 0.0 };
        assert!(
            (got - want).abs() <= tol,
            "clip.py feature {i}: got {got}, hand-computed {want}"
        );
    }

    // clamp.rs, hand-counted: 13 distinct operators (N1 = 23), 5 distinct
    // operands (N2 = 15). N = 38, vocabulary 18.
    let clamp = extract_features(
        "clamp",
        &fixtures().join("code_samples/clamp.rs"),
        &rust_profile(),
    )
    .unwrap();
    let v = 38.0 * 18.0f64.log2();
    let d = (13.0 / 2.0) * (15.0 / 5.0);
    let expect_clamp: [(usize, f64); 14] = [
        (0, 9.0),
        (1, 6.0),          // lone braces are sloc-only
        (2, 3.0),
        (3, 1.0),
        (4, v),
        (5, d),
        (6, d * v),
        (7, 10.0),
        (8, 9.0),
        (9, 18.0 / 10.0),
        (10, 6.0),
        (11, 0.0),
        (12, 0.0),
        (13, 3.0),
    ];
    for (i, want) in expect_clamp {
        let got = clamp.values[i];
        let tol = if (4..7).contains(&i) { 1e-3 } else { 0.0 };
        assert!(
            (got - want).abs() <= tol,
            "clamp.rs feature {i}: got {got}, hand-computed {want}"
        );
    }

    // External AST JSON path: 6-node tree, hand-derived metrics.
    let g = recsel::code_metrics::ast_metrics_from_json(
        &fixtures().join("code_samples/clip_ast.json"),
    )
    .unwrap();
    assert_eq!(
        (g.node_count, g.edge_count, g.max_degree, g.depth),
        (6, 5, 3, 3)
    );
    assert!((g.avg_degree - 10.0 / 6.0).abs() < 1e-15);
    assert_eq!((g.transitivity, g.avg_clustering), (0.0, 0.0));

    // Tree-graph invariants on all nine portfolio sources.
    let profile = profile_by_name("python").unwrap();
    for spec in load_manifest(&fixtures().join("portfolio.toml")).unwrap() {
        let unit = recsel::code_metrics::analyze_source(&spec.source_path, &profile).unwrap();
        let g = tree_metrics(&unit.tree.children);
        assert_eq!(
            g.edge_count,
            g.node_count - 1,
            "{}: tree must have N-1 edges",
            spec.algo_id
        );
        assert_eq!(g.transitivity, 0.0, "{}: trees are triangle-free", spec.algo_id);
    }
    println!(
        "[criterion 5] PASS: hand-annotated metric fixtures reproduced (Halstead within 1e-3, \
         tree metrics exact); tree invariants hold on all 9 portfolio sources"
    );
}

// ---------------------------------------------------------------- criterion 6

#[test]
fn criterion_6_end_to_end_smoke() {
    let bin = env!("CARGO_BIN_EXE_recsel");
    let tmp = tempfile::tempdir().unwrap();
    let run = |extra: &[&str], out: &str| {
        let mut cmd = Command::new(bin);
        cmd.args(extra);
        cmd.args([
            "run",
            "--interactions",
            fixtures().join("toy_interactions.csv").to_str().unwrap(),
            "--manifest",
            fixtures().join("portfolio.toml").to_str().unwrap(),
            "--rating-col",
            "rating",
            "--out-dir",
            tmp.path().join(out).to_str().unwrap(),
        ]);
        let started = Instant::now();
        let status = cmd.status().expect("binary launches");
        (status, started.elapsed())
    };

    let (status, elapsed) = run(&[], "a");
    assert!(status.success(), "run exited with {status}");
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "toy run took {:.1}s (budget 60s)",
        elapsed.as_secs_f64()
    );

    // Structural completeness: 13 header fields (dataset label + 12 report
    // columns), one dataset row, one averages row.
    let report = std::fs::read_to_string(tmp.path().join("a/report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 3, "header + dataset row + averages row");
    assert_eq!(lines[0].split(',').count(), 13);
    assert!(lines[2].starts_with("Average,"));
    for line in &lines[1..] {
        assert_eq!(line.split(',').count(), 13);
    }

    let (status, _) = run(&[], "b");
    assert!(status.success());
    let rerun = std::fs::read_to_string(tmp.path().join("b/report.csv")).unwrap();
    assert_eq!(report, rerun, "rerun must be bit-identical");

    let (status, _) = run(&["--threads", "1"], "t1");
    assert!(status.success());
    let (status, _) = run(&["--threads", "8"], "t8");
    assert!(status.success());
    let t1 = std::fs::read_to_string(tmp.path().join("t1/report.csv")).unwrap();
    let t8 = std::fs::read_to_string(tmp.path().join("t8/report.csv")).unwrap();
    assert_eq!(t1, t8, "--threads 1 and --threads 8 must agree bit-for-bit");
    assert_eq!(report, t1, "threaded runs must match the default run");

    println!(
        "[criterion 6] PASS: toy run finished in {:.1}s with a complete report, exit 0, \
         bit-identical across reruns and thread counts",
        elapsed.as_secs_f64()
    );
}
