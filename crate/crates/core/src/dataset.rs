//! Labeled feature tables, normalization and under-sampling.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{feature_names, ProcessMetricVector, ProductMetricVector};
use crate::modules::{ModuleId, ModuleKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRow {
    pub module: ModuleId,
    pub features: Vec<f64>,
    pub label: u8,
    pub loc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledDataset {
    /// Release pair label, `r..r'`.
    pub release: String,
    pub granularity: ModuleKind,
    pub feature_names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl LabeledDataset {
    /// `(negatives, positives)`.
    pub fn label_counts(&self) -> (usize, usize) {
        let pos = self.rows.iter().filter(|r| r.label == 1).count();
        (self.rows.len() - pos, pos)
    }

    /// Fraction of change-prone rows.
    pub fn change_prone_ratio(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.label_counts().1 as f64 / self.rows.len() as f64
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            release: self.release.clone(),
            granularity: self.granularity,
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn require_both_labels(&self) -> Result<()> {
        match self.label_counts() {
            (0, _) => Err(Error::SingleLabel(1)),
            (_, 0) => Err(Error::SingleLabel(0)),
            _ => Ok(()),
        }
    }
}

/// Median of the counts; even-sized inputs average the two middle values.
pub fn median(values: &[usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] + v[mid]) as f64 / 2.0
    })
}

/// Label 1 iff a module's change count is strictly above the median count.
pub fn label_change_prone(counts: &BTreeMap<ModuleId, usize>) -> Result<BTreeMap<ModuleId, u8>> {
    let values: Vec<usize> = counts.values().copied().collect();
    let m = median(&values).ok_or(Error::EmptyCounts)?;
    Ok(counts
        .iter()
        .map(|(id, &c)| (id.clone(), u8::from(c as f64 > m)))
        .collect())
}

/// One row per module, product block then process block.
pub fn assemble(
    release: impl Into<String>,
    granularity: ModuleKind,
    product: &BTreeMap<ModuleId, ProductMetricVector>,
    process: &BTreeMap<ModuleId, ProcessMetricVector>,
    labels: &BTreeMap<ModuleId, u8>,
    locs: &BTreeMap<ModuleId, usize>,
) -> Result<LabeledDataset> {
    let all: BTreeSet<&ModuleId> = product
        .keys()
        .chain(process.keys())
        .chain(labels.keys())
        .chain(locs.keys())
        .collect();
    let mut missing = Vec::new();
    let mut rows = Vec::with_capacity(all.len());
    for id in all {
        match (product.get(id), process.get(id), labels.get(id), locs.get(id)) {
            (Some(p), Some(q), Some(&label), Some(&loc)) => rows.push(FeatureRow {
                module: id.clone(),
                features: p.values.iter().chain(&q.values).copied().collect(),
                label,
                loc,
            }),
            _ => missing.push(id.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingModules(missing));
    }
    Ok(LabeledDataset {
        release: release.into(),
        granularity,
        feature_names: feature_names(granularity),
        rows,
    })
}

/// Per-feature bounds learned from one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMax {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMax {
    pub fn fit(ds: &LabeledDataset) -> MinMax {
        let m = ds.feature_names.len();
        let mut min = vec![f64::INFINITY; m];
        let mut max = vec![f64::NEG_INFINITY; m];
        for r in &ds.rows {
            for (j, &x) in r.features.iter().enumerate() {
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
            }
        }
        MinMax { min, max }
    }

    /// Map each feature to `(x - min) / (max - min)`. Constant features map
    /// to 0. Values outside the fitted range are not clipped.
    pub fn apply(&self, ds: &LabeledDataset) -> LabeledDataset {
        let mut out = ds.clone();
        for r in &mut out.rows {
            for (j, x) in r.features.iter_mut().enumerate() {
                let span = self.max[j] - self.min[j];
                *x = if span > 0.0 { (*x - self.min[j]) / span } else { 0.0 };
            }
        }
        out
    }
}

pub fn min_max_normalize(ds: &LabeledDataset) -> LabeledDataset {
    MinMax::fit(ds).apply(ds)
}

/// Drop majority-label rows uniformly at random until both labels have the
/// minority count. Row order is preserved.
pub fn random_under_sample(ds: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    ds.require_both_labels()?;
    let (neg, pos) = ds.label_counts();
    let majority = u8::from(pos > neg);
    let keep = neg.min(pos);
    let majority_rows: Vec<usize> = (0..ds.rows.len()).filter(|&i| ds.rows[i].label == majority).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: BTreeSet<usize> = sample(&mut rng, majority_rows.len(), keep)
        .into_iter()
        .map(|k| majority_rows[k])
        .collect();
    let indices: Vec<usize> = (0..ds.rows.len())
        .filter(|i| ds.rows[*i].label != majority || chosen.contains(i))
        .collect();
    Ok(ds.subset(&indices))
}

pub fn write_csv<W: Write>(ds: &LabeledDataset, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["module_id".to_string(), "loc".to_string()];
    header.extend(ds.feature_names.iter().cloned());
    header.push("label".into());
    wtr.write_record(&header)?;
    for r in &ds.rows {
        let mut rec = vec![r.module.to_string(), r.loc.to_string()];
        rec.extend(r.features.iter().map(|x| x.to_string()));
        rec.push(r.label.to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

fn bad(msg: String) -> Error {
    Error::InvalidData(msg)
}

pub fn read_csv<R: Read>(r: R, release: impl Into<String>) -> Result<LabeledDataset> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    let n = header.len();
    if n < 3 || &header[0] != "module_id" || &header[1] != "loc" || &header[n - 1] != "label" {
        return Err(bad("dataset header must be module_id, loc, features..., label".into()));
    }
    let feature_names: Vec<String> = header.iter().skip(2).take(n - 3).map(String::from).collect();
    let mut rows = Vec::new();
    let mut granularity = None;
    for rec in rdr.records() {
        let rec = rec?;
        let module: ModuleId = rec[0].parse().map_err(bad)?;
        granularity.get_or_insert(module.kind);
        let loc = rec[1].parse().map_err(|e| bad(format!("loc `{}`: {e}", &rec[1])))?;
        let features = (2..n - 1)
            .map(|j| {
                rec[j]
                    .parse::<f64>()
                    .map_err(|e| bad(format!("feature `{}`: {e}", &rec[j])))
            })
            .collect::<Result<Vec<_>>>()?;
        let label = match &rec[n - 1] {
            "0" => 0,
            "1" => 1,
            other => return Err(bad(format!("label must be 0 or 1, got `{other}`"))),
        };
        rows.push(FeatureRow {
            module,
            features,
            label,
            loc,
        });
    }
    Ok(LabeledDataset {
        release: release.into(),
        granularity: granularity.unwrap_or(ModuleKind::Class),
        feature_names,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id(i: usize) -> ModuleId {
        ModuleId::method("A.java", "A", format!("m{i:03}"), vec![])
    }

    fn counts(v: &[usize]) -> BTreeMap<ModuleId, usize> {
        v.iter().enumerate().map(|(i, &c)| (id(i), c)).collect()
    }

    fn labels(v: &[usize]) -> Vec<u8> {
        label_change_prone(&counts(v)).unwrap().into_values().collect()
    }

    fn toy(labels: &[u8]) -> LabeledDataset {
        LabeledDataset {
            release: "a..b".into(),
            granularity: ModuleKind::Method,
            feature_names: vec!["x".into(), "y".into()],
            rows: labels
                .iter()
                .enumerate()
                .map(|(i, &l)| FeatureRow {
                    module: id(i),
                    features: vec![i as f64, 7.0],
                    label: l,
                    loc: i + 1,
                })
                .collect(),
        }
    }

    #[test]
    fn median_zero_marks_any_change() {
        assert_eq!(labels(&[0, 0, 1, 2]), vec![0, 0, 1, 1]);
    }

    #[test]
    fn strict_inequality_and_even_median() {
        assert_eq!(labels(&[5, 5, 5]), vec![0, 0, 0]);
        assert_eq!(labels(&[1, 2, 3, 4]), vec![0, 0, 1, 1]);
    }

    #[test]
    fn empty_counts_error() {
        assert!(matches!(label_change_prone(&BTreeMap::new()), Err(Error::EmptyCounts)));
    }

    #[test]
    fn normalization_examples() {
        let mut ds = toy(&[0, 1, 0]);
        for (r, x) in ds.rows.iter_mut().zip([0.0, 5.0, 10.0]) {
            r.features[0] = x;
        }
        let n = min_max_normalize(&ds);
        let col: Vec<Vec<f64>> = n.rows.iter().map(|r| r.features.clone()).collect();
        assert_eq!(col, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn rus_balances() {
        let ds = toy(&[1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0]);
        let out = random_under_sample(&ds, 3).unwrap();
        assert_eq!(out.label_counts(), (4, 4));
        assert_eq!(out, random_under_sample(&ds, 3).unwrap());
        let balanced = toy(&[0, 1, 0, 1]);
        assert_eq!(random_under_sample(&balanced, 9).unwrap(), balanced);
        assert!(random_under_sample(&toy(&[1, 1]), 0).is_err());
    }

    #[test]
    fn assemble_reports_missing_modules() {
        let kind = ModuleKind::Method;
        let pv = |i: usize| ProductMetricVector {
            kind,
            values: vec![i as f64; 12],
        };
        let qv = ProcessMetricVector { values: vec![1.0; 17] };
        let ids: Vec<ModuleId> = (0..3).map(id).collect();
        let product: BTreeMap<_, _> = ids.iter().map(|i| (i.clone(), pv(1))).collect();
        let mut process: BTreeMap<_, _> = ids.iter().map(|i| (i.clone(), qv.clone())).collect();
        let labels: BTreeMap<_, _> = ids.iter().map(|i| (i.clone(), 0u8)).collect();
        let locs: BTreeMap<_, _> = ids.iter().map(|i| (i.clone(), 3usize)).collect();
        let ds = assemble("r", kind, &product, &process, &labels, &locs).unwrap();
        assert_eq!(ds.rows.len(), 3);
        assert_eq!(ds.rows[0].features.len(), 29);
        process.remove(&ids[1]);
        match assemble("r", kind, &product, &process, &labels, &locs) {
            Err(Error::MissingModules(m)) => assert_eq!(m, vec![ids[1].to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut ds = toy(&[0, 1, 1]);
        ds.rows[1].features[1] = 0.1 + 0.2;
        ds.rows[2].module = ModuleId::method("src/a b,c.java", "A.In", "f", vec!["Map<K,V>".into(), "int[]".into()]);
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), "a..b").unwrap();
        assert_eq!(back, ds);
    }

    proptest! {
        #[test]
        fn labels_are_permutation_equivariant(v in proptest::collection::vec(0usize..6, 1..30), rot in 0usize..30) {
            let base = labels(&v);
            let k = rot % v.len();
            let mut w = v.clone();
            w.rotate_left(k);
            let mut expect = base.clone();
            expect.rotate_left(k);
            prop_assert_eq!(labels(&w), expect);
        }

        #[test]
        fn rus_output_is_balanced_subset(ls in proptest::collection::vec(0u8..2, 2..40), seed in any::<u64>()) {
            let ds = toy(&ls);
            prop_assume!(ds.require_both_labels().is_ok());
            let out = random_under_sample(&ds, seed).unwrap();
            let (a, b) = out.label_counts();
            prop_assert_eq!(a, b);
            prop_assert!(out.rows.iter().all(|r| ds.rows.contains(r)));
        }

        #[test]
        fn normalized_values_in_unit_range_and_idempotent(xs in proptest::collection::vec(-1e6f64..1e6, 1..30)) {
            let mut ds = toy(&vec![0; xs.len()]);
            for (r, x) in ds.rows.iter_mut().zip(&xs) {
                r.features[0] = *x;
            }
            let n = min_max_normalize(&ds);
            prop_assert!(n.rows.iter().all(|r| r.features.iter().all(|v| (0.0..=1.0).contains(v))));
            let twice = min_max_normalize(&n);
            for (a, b) in n.rows.iter().zip(&twice.rows) {
                prop_assert!((a.features[0] - b.features[0]).abs() < 1e-12);
            }
        }
    }
}
