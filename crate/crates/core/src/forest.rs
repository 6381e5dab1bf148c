//! Random forest of Gini CART trees and stratified cross-validation.

use std::collections::BTreeSet;

use log::warn;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{random_under_sample, LabeledDataset, MinMax};
use crate::error::{Error, Result};
use crate::eval::{auc_roc, classification_scores, confusion_counts, EvalScores, PredictionScore};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features drawn per split; `None` means `floor(sqrt(m))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn with_seed(seed: u64) -> Self {
        ForestParams {
            seed,
            ..ForestParams::default()
        }
    }

    fn features_per_split(&self, m: usize) -> Result<usize> {
        let f = self
            .max_features
            .unwrap_or_else(|| ((m as f64).sqrt().floor() as usize).max(1));
        if self.n_trees == 0 {
            return Err(Error::InvalidParams("n_trees must be at least 1".into()));
        }
        if f == 0 || f > m {
            return Err(Error::InvalidParams(format!("max_features {f} outside 1..={m}")));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    /// Training rows reaching the leaf, by label.
    Leaf { counts: [usize; 2] },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A tree stored as a node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Leaf vote: the majority label, ties going to 1.
    pub fn vote(&self, x: &[f64]) -> u8 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return u8::from(counts[1] >= counts[0]),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub params: ForestParams,
    pub feature_names: Vec<String>,
}

struct Grower<'a> {
    x: &'a [&'a [f64]],
    y: &'a [u8],
    per_split: usize,
    min_samples_split: usize,
    max_depth: Option<usize>,
    nodes: Vec<Node>,
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[1] as f64 / n;
    2.0 * p * (1.0 - p)
}

impl Grower<'_> {
    fn counts(&self, rows: &[usize]) -> [usize; 2] {
        let pos = rows.iter().filter(|&&r| self.y[r] == 1).count();
        [rows.len() - pos, pos]
    }

    /// Best `(weighted child impurity, threshold)` for one feature, or
    /// `None` if the feature is constant over `rows`.
    fn best_threshold(&self, rows: &mut [usize], f: usize, total: [usize; 2]) -> Option<(f64, f64)> {
        rows.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
        let n = rows.len() as f64;
        let mut left = [0usize; 2];
        let mut best: Option<(f64, f64)> = None;
        for i in 0..rows.len() - 1 {
            left[self.y[rows[i]] as usize] += 1;
            let a = self.x[rows[i]][f];
            let b = self.x[rows[i + 1]][f];
            if a == b {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = (left[0] + left[1]) as f64;
            let impurity = (nl * gini(left) + (n - nl) * gini(right)) / n;
            if best.is_none_or(|(b_imp, _)| impurity < b_imp) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some((impurity, threshold));
            }
        }
        best
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.counts(rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        if pure || rows.len() < self.min_samples_split || self.max_depth.is_some_and(|d| depth >= d) {
            return id;
        }
        let m = self.x[0].len();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let mut best: Option<(f64, usize, f64)> = None;
        // Draw `per_split` features; if all were constant, keep drawing.
        for (tried, &f) in order.iter().enumerate() {
            if tried >= self.per_split && best.is_some() {
                break;
            }
            if let Some((imp, t)) = self.best_threshold(rows, f, counts) {
                if best.is_none_or(|(b_imp, _, _)| imp < b_imp) {
                    best = Some((imp, f, t));
                }
            }
        }
        let Some((_, feature, threshold)) = best else { return id };
        rows.sort_by(|&a, &b| self.x[a][feature].total_cmp(&self.x[b][feature]));
        let split = rows.partition_point(|&r| self.x[r][feature] <= threshold);
        let (l, r) = rows.split_at_mut(split);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

pub fn train_random_forest(train: &LabeledDataset, params: &ForestParams) -> Result<ForestModel> {
    train.require_both_labels()?;
    let m = train.feature_names.len();
    for r in &train.rows {
        if r.features.len() != m {
            return Err(Error::FeatureLength {
                expected: m,
                actual: r.features.len(),
            });
        }
    }
    let per_split = params.features_per_split(m)?;
    let x: Vec<&[f64]> = train.rows.iter().map(|r| r.features.as_slice()).collect();
    let y: Vec<u8> = train.rows.iter().map(|r| r.label).collect();
    let n = x.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t);
            let mut rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut g = Grower {
                x: &x,
                y: &y,
                per_split,
                min_samples_split: params.min_samples_split.max(2),
                max_depth: params.max_depth,
                nodes: Vec::new(),
            };
            g.grow(&mut rows, 0, &mut rng);
            DecisionTree { nodes: g.nodes }
        })
        .collect();
    Ok(ForestModel {
        trees,
        params: params.clone(),
        feature_names: train.feature_names.clone(),
    })
}

/// Fraction of trees voting 1.
pub fn predict_proba(model: &ForestModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.feature_names.len() {
        return Err(Error::FeatureLength {
            expected: model.feature_names.len(),
            actual: row.len(),
        });
    }
    let votes: usize = model.trees.iter().map(|t| t.vote(row) as usize).sum();
    Ok(votes as f64 / model.trees.len() as f64)
}

/// Fold index per row: rows of each label are shuffled and dealt round-robin,
/// continuing across labels, so fold sizes and per-fold label counts each
/// differ by at most one.
pub fn stratified_folds(labels: &[u8], folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0; labels.len()];
    let mut next = 0;
    for label in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            out[i] = next % folds;
            next += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub test_rows: usize,
    pub scores: EvalScores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    /// Out-of-fold scores in dataset row order; rows of skipped folds are absent.
    pub predictions: Vec<PredictionScore>,
    pub fold_of: Vec<usize>,
    pub folds: Vec<FoldResult>,
    pub skipped_folds: Vec<usize>,
}

impl CvResult {
    /// Unweighted mean over evaluated folds; `auc` averages the folds where it
    /// is defined.
    pub fn mean_scores(&self) -> EvalScores {
        let n = self.folds.len() as f64;
        if n == 0.0 {
            return EvalScores::default();
        }
        let mean = |f: fn(&EvalScores) -> f64| self.folds.iter().map(|r| f(&r.scores)).sum::<f64>() / n;
        let aucs: Vec<f64> = self.folds.iter().filter_map(|r| r.scores.auc).collect();
        EvalScores {
            precision: mean(|s| s.precision),
            recall: mean(|s| s.recall),
            f1: mean(|s| s.f1),
            accuracy: mean(|s| s.accuracy),
            auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
        }
    }
}

/// Stratified k-fold cross-validation. Normalization is fit and
/// under-sampling applied inside each training fold.
pub fn cross_validate(ds: &LabeledDataset, folds: usize, params: &ForestParams) -> Result<CvResult> {
    if folds < 2 || ds.rows.len() < folds {
        return Err(Error::TooFewRows {
            rows: ds.rows.len(),
            folds,
        });
    }
    ds.require_both_labels()?;
    let labels: Vec<u8> = ds.rows.iter().map(|r| r.label).collect();
    let fold_of = stratified_folds(&labels, folds, params.seed);
    let mut scores: Vec<Option<f64>> = vec![None; ds.rows.len()];
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for fold in 0..folds {
        let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..ds.rows.len()).partition(|&i| fold_of[i] == fold);
        let train = ds.subset(&train_idx);
        if train.require_both_labels().is_err() {
            warn!(
                "{} {}: fold {fold} skipped, training rows have one label",
                ds.release, ds.granularity
            );
            skipped.push(fold);
            continue;
        }
        let scaler = MinMax::fit(&train);
        let fold_seed = params.seed.wrapping_add(fold as u64);
        let train = random_under_sample(&scaler.apply(&train), fold_seed)?;
        let test = scaler.apply(&ds.subset(&test_idx));
        let model = train_random_forest(
            &train,
            &ForestParams {
                seed: fold_seed,
                ..params.clone()
            },
        )?;
        let mut pairs = Vec::with_capacity(test_idx.len());
        for (&i, row) in test_idx.iter().zip(&test.rows) {
            let s = predict_proba(&model, &row.features)?;
            scores[i] = Some(s);
            pairs.push((s, row.label));
        }
        let universe: BTreeSet<usize> = (0..pairs.len()).collect();
        let predicted: BTreeSet<usize> = universe.iter().copied().filter(|&j| pairs[j].0 >= 0.5).collect();
        let truth: BTreeSet<usize> = universe.iter().copied().filter(|&j| pairs[j].1 == 1).collect();
        let mut s = classification_scores(&confusion_counts(&predicted, &truth, &universe));
        s.auc = auc_roc(&pairs);
        results.push(FoldResult {
            fold,
            test_rows: test_idx.len(),
            scores: s,
        });
    }
    let predictions = ds
        .rows
        .iter()
        .zip(scores)
        .filter_map(|(r, s)| s.map(|s| PredictionScore::new(r.module.clone(), s)))
        .collect();
    Ok(CvResult {
        predictions,
        fold_of,
        folds: results,
        skipped_folds: skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureRow;
    use crate::modules::{ModuleId, ModuleKind};
    use proptest::prelude::*;

    fn dataset(rows: Vec<(Vec<f64>, u8)>) -> LabeledDataset {
        let m = rows.first().map_or(0, |r| r.0.len());
        LabeledDataset {
            release: "t".into(),
            granularity: ModuleKind::Class,
            feature_names: (0..m).map(|j| format!("f{j}")).collect(),
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(i, (features, label))| FeatureRow {
                    module: ModuleId::class("T.java", format!("C{i:04}")),
                    features,
                    label,
                    loc: 1,
                })
                .collect(),
        }
    }

    fn separable(n: usize) -> LabeledDataset {
        dataset(
            (0..n)
                .map(|i| {
                    let label = (i % 2) as u8;
                    let noise = ((i * 7919) % 13) as f64;
                    (vec![noise, label as f64 * 10.0 + (i % 3) as f64, noise * 2.0], label)
                })
                .collect(),
        )
    }

    fn check_boxes(tree: &DecisionTree, node: usize, lo: &mut Vec<f64>, hi: &mut Vec<f64>) -> bool {
        match tree.nodes[node] {
            Node::Leaf { counts } => counts[0] + counts[1] > 0,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if !(threshold > lo[feature] && threshold < hi[feature]) {
                    return false;
                }
                let saved = hi[feature];
                hi[feature] = threshold;
                let ok_left = check_boxes(tree, left, lo, hi);
                hi[feature] = saved;
                let saved = lo[feature];
                lo[feature] = threshold;
                let ok_right = check_boxes(tree, right, lo, hi);
                lo[feature] = saved;
                ok_left && ok_right
            }
        }
    }

    #[test]
    fn separating_feature_fits_training_set() {
        let ds = separable(60);
        let model = train_random_forest(&ds, &ForestParams::with_seed(1)).unwrap();
        for r in &ds.rows {
            let p = predict_proba(&model, &r.features).unwrap();
            assert_eq!(u8::from(p >= 0.5), r.label);
        }
    }

    #[test]
    fn two_rows_one_per_label() {
        let ds = dataset(vec![(vec![0.0], 0), (vec![1.0], 1)]);
        let model = train_random_forest(&ds, &ForestParams::with_seed(3)).unwrap();
        assert_eq!(model.trees.len(), 100);
        assert!(train_random_forest(&dataset(vec![(vec![0.0], 1), (vec![1.0], 1)]), &ForestParams::default()).is_err());
    }

    #[test]
    fn vote_fraction() {
        let leaf = |l: usize| DecisionTree {
            nodes: vec![Node::Leaf { counts: [1 - l, l] }],
        };
        let model = ForestModel {
            trees: vec![leaf(1), leaf(1), leaf(0), leaf(0)],
            params: ForestParams::default(),
            feature_names: vec!["a".into()],
        };
        assert_eq!(predict_proba(&model, &[0.0]).unwrap(), 0.5);
        assert!(predict_proba(&model, &[0.0, 1.0]).is_err());
        let tie = DecisionTree {
            nodes: vec![Node::Leaf { counts: [2, 2] }],
        };
        assert_eq!(tie.vote(&[0.0]), 1);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let ds = separable(40);
        let a = train_random_forest(&ds, &ForestParams::with_seed(9)).unwrap();
        let b = train_random_forest(&ds, &ForestParams::with_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trees_narrow_their_boxes() {
        let ds = dataset(
            (0..80)
                .map(|i| {
                    let x = ((i * 37) % 17) as f64;
                    let y = ((i * 11) % 5) as f64;
                    (vec![x, y, 1.0], u8::from(x + y > 10.0))
                })
                .collect(),
        );
        let model = train_random_forest(&ds, &ForestParams::with_seed(5)).unwrap();
        for t in &model.trees {
            assert!(check_boxes(
                t,
                0,
                &mut vec![f64::NEG_INFINITY; 3],
                &mut vec![f64::INFINITY; 3]
            ));
        }
    }

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 7 == 0)).collect();
        let f = stratified_folds(&labels, 10, 4);
        for k in 0..10 {
            assert_eq!(f.iter().filter(|&&x| x == k).count(), 10);
        }
        let pos: Vec<usize> = (0..10)
            .map(|k| (0..100).filter(|&i| f[i] == k && labels[i] == 1).count())
            .collect();
        assert!(pos.iter().max().unwrap() - pos.iter().min().unwrap() <= 1);
    }

    #[test]
    fn cv_scores_every_row_once() {
        let ds = separable(100);
        let cv = cross_validate(&ds, 10, &ForestParams::with_seed(2)).unwrap();
        assert_eq!(cv.predictions.len(), 100);
        let ids: BTreeSet<_> = cv.predictions.iter().map(|p| p.module.clone()).collect();
        assert_eq!(ids.len(), 100);
        assert!(cv.mean_scores().auc.unwrap() >= 0.95);
        assert!(matches!(
            cross_validate(&separable(5), 10, &ForestParams::default()),
            Err(Error::TooFewRows { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn vote_fraction_is_a_multiple_of_tree_count(
            rows in proptest::collection::vec((proptest::collection::vec(0.0f64..4.0, 3), 0u8..2), 4..30),
            probe in proptest::collection::vec(-1.0f64..5.0, 3),
            n_trees in 1usize..12,
        ) {
            let ds = dataset(rows);
            prop_assume!(ds.require_both_labels().is_ok());
            let params = ForestParams { n_trees, ..ForestParams::with_seed(0) };
            let model = train_random_forest(&ds, &params).unwrap();
            let p = predict_proba(&model, &probe).unwrap();
            let scaled = p * n_trees as f64;
            prop_assert!((scaled - scaled.round()).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
