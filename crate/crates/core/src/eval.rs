//! Classification scores, class-to-method projection and effort-aware
//! ranking evaluation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::diff::line_churn;
use crate::error::{Error, Result};
use crate::modules::ModuleId;
use crate::tracker::ChangeHistory;

/// Budgets (in LOC) used for the top-k ratios unless configured otherwise.
pub const DEFAULT_K_VALUES: [usize; 5] = [100, 500, 1000, 5000, 10000];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Counts from the predicted-positive set `preds` and the actual-positive
/// set `truth`, both drawn from `universe`.
pub fn confusion_counts<T: Ord>(preds: &BTreeSet<T>, truth: &BTreeSet<T>, universe: &BTreeSet<T>) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for e in universe {
        match (preds.contains(e), truth.contains(e)) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct EvalScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub auc: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall, F1 and accuracy; any 0/0 is 0. `auc` is left empty.
pub fn classification_scores(c: &ConfusionCounts) -> EvalScores {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    EvalScores {
        precision,
        recall,
        f1,
        accuracy: ratio(c.tp + c.tn, c.total()),
        auc: None,
    }
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. `None` unless both labels are present.
pub fn auc_roc(scores: &[(f64, u8)]) -> Option<f64> {
    let pos = scores.iter().filter(|s| s.1 == 1).count();
    let neg = scores.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sum over positives of (negatives below + half the negatives tied).
    let mut concordant = 0.0;
    let mut negs_below = 0usize;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            j += 1;
        }
        let group_pos = sorted[i..j].iter().filter(|s| s.1 == 1).count();
        let group_neg = (j - i) - group_pos;
        concordant += group_pos as f64 * (negs_below as f64 + group_neg as f64 / 2.0);
        negs_below += group_neg;
        i = j;
    }
    Some(concordant / (pos as f64 * neg as f64))
}

/// Every method of every predicted class.
pub fn project_class_predictions_to_methods(
    predicted_classes: &BTreeSet<ModuleId>,
    methods_of: &BTreeMap<ModuleId, BTreeSet<ModuleId>>,
) -> Result<BTreeSet<ModuleId>> {
    let mut out = BTreeSet::new();
    for c in predicted_classes {
        let methods = methods_of.get(c).ok_or_else(|| Error::UnknownClass(c.to_string()))?;
        out.extend(methods.iter().cloned());
    }
    Ok(out)
}

/// Per-module out-of-fold score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionScore {
    pub module: ModuleId,
    pub score: f64,
    pub predicted: u8,
}

impl PredictionScore {
    pub fn new(module: ModuleId, score: f64) -> Self {
        PredictionScore {
            module,
            score,
            predicted: u8::from(score >= 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedModule {
    pub module: ModuleId,
    pub score: f64,
    pub loc: usize,
}

/// Modules by descending score; ties by ascending LOC, then module id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking(pub Vec<RankedModule>);

impl Ranking {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn rank_order(a: &RankedModule, b: &RankedModule) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.loc.cmp(&b.loc))
        .then_with(|| a.module.cmp(&b.module))
}

pub fn rank_by_score(scores: &[PredictionScore], locs: &BTreeMap<ModuleId, usize>) -> Result<Ranking> {
    let mut out = scores
        .iter()
        .map(|s| {
            let loc = *locs
                .get(&s.module)
                .ok_or_else(|| Error::MissingLoc(s.module.to_string()))?;
            Ok(RankedModule {
                module: s.module.clone(),
                score: s.score,
                loc,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(rank_order);
    Ok(Ranking(out))
}

/// Largest prefix `l` with cumulative LOC below `k`: the `l` satisfying
/// `sum(loc[..l]) < k <= sum(loc[..=l])`, or the whole ranking when its
/// total LOC is below `k`.
pub fn top_k_cutoff(r: &Ranking, k: usize) -> usize {
    let mut total = 0usize;
    for (l, m) in r.0.iter().enumerate() {
        if total + m.loc >= k {
            return l;
        }
        total += m.loc;
    }
    r.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeKind {
    Release,
    Commit,
}

impl ChangeKind {
    pub const ALL: [ChangeKind; 2] = [ChangeKind::Release, ChangeKind::Commit];

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::Release => "release",
            ChangeKind::Commit => "commit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeSizes {
    pub module: ModuleId,
    pub delta_release: usize,
    pub delta_commit: usize,
}

impl ChangeSizes {
    pub fn get(&self, kind: ChangeKind) -> usize {
        match kind {
            ChangeKind::Release => self.delta_release,
            ChangeKind::Commit => self.delta_commit,
        }
    }
}

/// Release-based size from the module's bodies at the two releases (`None`
/// at `r'` when it was removed) and commit-based size from its history over
/// the milestone.
pub fn change_sizes(
    module: &ModuleId,
    body_at_r: &[String],
    body_at_rprime: Option<&[String]>,
    history: &ChangeHistory,
) -> ChangeSizes {
    ChangeSizes {
        module: module.clone(),
        delta_release: line_churn(body_at_r, body_at_rprime.unwrap_or(&[])).total(),
        delta_commit: history.total_churn(),
    }
}

/// Summed change size over summed LOC of the top-`l` modules for budget
/// `k`. `None` when no module fits. Modules without sizes count as 0.
pub fn top_k_change_ratio(
    r: &Ranking,
    k: usize,
    sizes: &BTreeMap<ModuleId, ChangeSizes>,
    kind: ChangeKind,
) -> Option<f64> {
    let l = top_k_cutoff(r, k);
    if l == 0 {
        return None;
    }
    let top = &r.0[..l];
    let delta: usize = top
        .iter()
        .map(|m| sizes.get(&m.module).map_or(0, |s| s.get(kind)))
        .sum();
    let loc: usize = top.iter().map(|m| m.loc).sum();
    Some(delta as f64 / loc as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id(i: usize) -> ModuleId {
        ModuleId::class("F.java", format!("C{i:02}"))
    }

    fn ranking(locs: &[usize]) -> Ranking {
        Ranking(
            locs.iter()
                .enumerate()
                .map(|(i, &loc)| RankedModule {
                    module: id(i),
                    score: 1.0 - i as f64 / 100.0,
                    loc,
                })
                .collect(),
        )
    }

    #[test]
    fn scores_from_counts() {
        let s = classification_scores(&ConfusionCounts {
            tp: 3,
            fp: 1,
            fn_: 2,
            tn: 4,
        });
        assert_eq!(s.precision, 0.75);
        assert_eq!(s.recall, 0.6);
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.accuracy, 0.7);
        let z = classification_scores(&ConfusionCounts {
            tp: 0,
            fp: 0,
            fn_: 3,
            tn: 1,
        });
        assert_eq!((z.precision, z.f1), (0.0, 0.0));
    }

    #[test]
    fn confusion_edge_cases() {
        let u: BTreeSet<usize> = (0..6).collect();
        let t: BTreeSet<usize> = [1, 3].into();
        let same = confusion_counts(&t, &t, &u);
        assert_eq!((same.fp, same.fn_), (0, 0));
        let all = confusion_counts(&u, &t, &u);
        assert_eq!((all.tn, all.fn_), (0, 0));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_roc(&[(0.9, 1), (0.8, 0), (0.7, 1), (0.6, 0)]), Some(0.75));
        assert_eq!(auc_roc(&[(0.5, 1), (0.5, 0), (0.5, 1)]), Some(0.5));
        assert_eq!(auc_roc(&[(0.9, 1), (0.1, 0)]), Some(1.0));
        assert_eq!(auc_roc(&[(0.9, 1)]), None);
    }

    #[test]
    fn projection() {
        let a = id(0);
        let b = id(1);
        let m = |c: &ModuleId, n: &str| ModuleId::method("F.java", c.qualified_class.clone(), n, vec![]);
        let methods_of: BTreeMap<_, _> = [
            (a.clone(), [m(&a, "a1"), m(&a, "a2")].into()),
            (b.clone(), [m(&b, "b1")].into()),
        ]
        .into();
        let p = project_class_predictions_to_methods(&[a.clone()].into(), &methods_of).unwrap();
        assert_eq!(p, [m(&a, "a1"), m(&a, "a2")].into());
        assert!(project_class_predictions_to_methods(&BTreeSet::new(), &methods_of)
            .unwrap()
            .is_empty());
        let both = project_class_predictions_to_methods(&[a.clone(), b.clone()].into(), &methods_of).unwrap();
        assert_eq!(both.len(), 3);
        assert!(project_class_predictions_to_methods(&[id(7)].into(), &methods_of).is_err());
    }

    #[test]
    fn ranking_tie_breaks() {
        let locs: BTreeMap<_, _> = [(id(0), 50), (id(1), 30), (id(2), 10)].into();
        let scores = vec![
            PredictionScore::new(id(0), 0.5),
            PredictionScore::new(id(1), 0.5),
            PredictionScore::new(id(2), 0.9),
        ];
        let r = rank_by_score(&scores, &locs).unwrap();
        let order: Vec<_> = r.0.iter().map(|m| m.module.clone()).collect();
        assert_eq!(order, vec![id(2), id(1), id(0)]);
        let missing = [PredictionScore::new(id(5), 0.1)];
        assert!(rank_by_score(&missing, &locs).is_err());
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(top_k_cutoff(&ranking(&[40, 30, 50]), 100), 2);
        assert_eq!(top_k_cutoff(&ranking(&[40, 30]), 30), 0);
        assert_eq!(top_k_cutoff(&ranking(&[10, 10]), 100), 2);
        assert_eq!(top_k_cutoff(&ranking(&[40, 60]), 100), 1);
    }

    #[test]
    fn ratio_examples() {
        let r = ranking(&[40, 30, 50]);
        let sizes: BTreeMap<_, _> = [(0, 20), (1, 10), (2, 99)]
            .iter()
            .map(|&(i, d)| {
                (
                    id(i),
                    ChangeSizes {
                        module: id(i),
                        delta_release: d,
                        delta_commit: d + 1,
                    },
                )
            })
            .collect();
        let v = top_k_change_ratio(&r, 100, &sizes, ChangeKind::Release).unwrap();
        assert!((v - 30.0 / 70.0).abs() < 1e-12);
        assert_eq!(top_k_change_ratio(&r, 10, &sizes, ChangeKind::Commit), None);
    }

    proptest! {
        #[test]
        fn auc_invariant_under_monotone_transform(
            pts in proptest::collection::vec((0u32..20, 0u8..2), 2..40),
        ) {
            let a: Vec<(f64, u8)> = pts.iter().map(|&(s, l)| (s as f64 / 20.0, l)).collect();
            let b: Vec<(f64, u8)> = pts.iter().map(|&(s, l)| ((s as f64).exp() * 3.0 + 1.0, l)).collect();
            prop_assert_eq!(auc_roc(&a), auc_roc(&b));
        }

        #[test]
        fn cutoff_is_monotone_in_k(locs in proptest::collection::vec(1usize..200, 0..20), k in 1usize..2000, dk in 0usize..500) {
            let r = ranking(&locs);
            prop_assert!(top_k_cutoff(&r, k) <= top_k_cutoff(&r, k + dk));
        }

        #[test]
        fn projection_partitions_methods(pick in proptest::collection::vec(any::<bool>(), 5)) {
            let mut methods_of = BTreeMap::new();
            let mut all = BTreeSet::new();
            for c in 0..5 {
                let ms: BTreeSet<_> = (0..c).map(|j| ModuleId::method("F.java", format!("C{c:02}"), format!("m{j}"), vec![])).collect();
                all.extend(ms.iter().cloned());
                methods_of.insert(id(c), ms);
            }
            let pc: BTreeSet<_> = (0..5).filter(|&c| pick[c]).map(id).collect();
            let p = project_class_predictions_to_methods(&pc, &methods_of).unwrap();
            let complement: BTreeSet<_> = all.difference(&p).cloned().collect();
            prop_assert!(p.is_subset(&all));
            prop_assert!(p.is_disjoint(&complement));
            prop_assert_eq!(p.len() + complement.len(), all.len());
        }
    }
}
