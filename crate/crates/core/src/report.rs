//! Report files: per-release evaluation CSVs, RQ tables, the cross-release
//! summary and a JSON manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{ChangeKind, EvalScores};
use crate::experiment::{ExperimentResults, GranularityResult, PairResult};
use crate::stats::{compare, StatResult};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// File-name-safe form of a tag or repository name.
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

/// One row of the cross-release summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub table: String,
    pub metric: String,
    pub class_median: Option<f64>,
    pub method_median: Option<f64>,
    pub n: usize,
    pub stat: Option<StatResult>,
}

/// A metric observed at both granularities for every release pair.
pub struct MetricSeries {
    pub table: String,
    pub metric: String,
    pub pairs: Vec<(Option<f64>, Option<f64>)>,
}

/// Medians and paired statistics per metric, over pairs where both values
/// are present.
pub fn summarize(series: &[MetricSeries]) -> Result<Vec<SummaryRow>> {
    if series.is_empty() {
        return Err(Error::EmptyReport("no metrics to summarize".into()));
    }
    series
        .iter()
        .map(|s| {
            let (class, method): (Vec<f64>, Vec<f64>) = s.pairs.iter().filter_map(|&(c, m)| Some((c?, m?))).unzip();
            let stat = if class.is_empty() {
                None
            } else {
                Some(compare(&class, &method)?)
            };
            Ok(SummaryRow {
                table: s.table.clone(),
                metric: s.metric.clone(),
                class_median: median(&class),
                method_median: median(&method),
                n: class.len(),
                stat,
            })
        })
        .collect()
}

const SCORE_METRICS: [&str; 5] = ["precision", "recall", "f1", "accuracy", "auc"];

fn score(s: &EvalScores, metric: &str) -> Option<f64> {
    match metric {
        "precision" => Some(s.precision),
        "recall" => Some(s.recall),
        "f1" => Some(s.f1),
        "accuracy" => Some(s.accuracy),
        "auc" => s.auc,
        _ => None,
    }
}

/// The RQ1 (direct), RQ2 (projected vs method) and RQ3 (top-k ratio) series.
pub fn metric_series(results: &ExperimentResults) -> Vec<MetricSeries> {
    let pairs: Vec<&PairResult> = results.pairs().collect();
    let mut out = Vec::new();
    for m in SCORE_METRICS {
        out.push(MetricSeries {
            table: "rq1".into(),
            metric: m.into(),
            pairs: pairs
                .iter()
                .map(|p| (score(&p.class.direct, m), score(&p.method.direct, m)))
                .collect(),
        });
    }
    for m in &SCORE_METRICS[..4] {
        out.push(MetricSeries {
            table: "rq2".into(),
            metric: (*m).into(),
            pairs: pairs
                .iter()
                .map(|p| (score(&p.projected, m), score(&p.method.pooled, m)))
                .collect(),
        });
    }
    for kind in ChangeKind::ALL {
        for &k in &results.config.k_values {
            out.push(MetricSeries {
                table: "rq3".into(),
                metric: format!("{}@{k}", kind.as_str()),
                pairs: pairs
                    .iter()
                    .map(|p| (p.class.ratio(kind, k), p.method.ratio(kind, k)))
                    .collect(),
            });
        }
    }
    out
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

fn scores_fields(s: &EvalScores) -> Vec<String> {
    vec![
        s.precision.to_string(),
        s.recall.to_string(),
        s.f1.to_string(),
        s.accuracy.to_string(),
        opt(s.auc),
    ]
}

fn write_release_report(path: &Path, g: &GranularityResult, k_values: &[usize]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<String> = SCORE_METRICS.iter().map(|s| s.to_string()).collect();
    let mut row = scores_fields(&g.direct);
    for kind in ChangeKind::ALL {
        for &k in k_values {
            header.push(format!("{}_top{k}", kind.as_str()));
            row.push(opt(g.ratio(kind, k)));
        }
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ManifestRepo<'a> {
    name: &'a str,
    path: &'a str,
    release_pairs: usize,
    failed_pairs: usize,
    parse_warnings: usize,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    folds: usize,
    k_values: &'a [usize],
    n_trees: usize,
    config_hash: String,
    repos: Vec<ManifestRepo<'a>>,
}

/// Write every report file under `output_dir` and return their paths.
pub fn emit_report(results: &ExperimentResults, output_dir: &Path) -> Result<Vec<PathBuf>> {
    if results.repos.is_empty() {
        return Err(Error::EmptyReport("no repositories in results".into()));
    }
    fs::create_dir_all(output_dir)?;
    let cfg = &results.config;
    let mut written = Vec::new();
    let pairs: Vec<&PairResult> = results.pairs().collect();

    let path = output_dir.join("rq1.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "repo",
        "release",
        "granularity",
        "modules",
        "change_prone_ratio",
        "precision",
        "recall",
        "f1",
        "accuracy",
        "auc",
    ])?;
    for p in &pairs {
        for g in [&p.class, &p.method] {
            let mut rec = vec![
                p.repo.clone(),
                p.release.clone(),
                g.kind.to_string(),
                g.modules.to_string(),
                g.change_prone_ratio.to_string(),
            ];
            rec.extend(scores_fields(&g.direct));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = output_dir.join("rq2.csv");
    let mut w = writer(&path)?;
    w.write_record(["repo", "release", "evaluation", "precision", "recall", "f1", "accuracy"])?;
    for p in &pairs {
        for (name, s) in [("projected", &p.projected), ("method", &p.method.pooled)] {
            let mut rec = vec![p.repo.clone(), p.release.clone(), name.to_string()];
            rec.extend(scores_fields(s).into_iter().take(4));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = output_dir.join("rq3.csv");
    let mut w = writer(&path)?;
    w.write_record(["repo", "release", "kind", "k", "class_ratio", "method_ratio"])?;
    for p in &pairs {
        for kind in ChangeKind::ALL {
            for &k in &cfg.k_values {
                w.write_record([
                    p.repo.clone(),
                    p.release.clone(),
                    kind.as_str().to_string(),
                    k.to_string(),
                    opt(p.class.ratio(kind, k)),
                    opt(p.method.ratio(kind, k)),
                ])?;
            }
        }
    }
    w.flush()?;
    written.push(path);

    let path = output_dir.join("summary.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "table",
        "metric",
        "class_median",
        "method_median",
        "n",
        "p",
        "mark",
        "delta",
        "magnitude",
    ])?;
    for row in summarize(&metric_series(results))? {
        let stat = row.stat.as_ref();
        w.write_record([
            row.table,
            row.metric,
            opt(row.class_median),
            opt(row.method_median),
            row.n.to_string(),
            opt(stat.map(|s| s.p_value)),
            stat.map(|s| s.significance_mark.to_string()).unwrap_or_default(),
            opt(stat.map(|s| s.delta)),
            stat.map(|s| s.magnitude.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = output_dir.join("folds.csv");
    let mut w = writer(&path)?;
    w.write_record(["repo", "release", "granularity", "module_id", "fold"])?;
    for p in &pairs {
        for g in [&p.class, &p.method] {
            for (row, fold) in g.dataset.rows.iter().zip(&g.cv.fold_of) {
                w.write_record([
                    p.repo.clone(),
                    p.release.clone(),
                    g.kind.to_string(),
                    row.module.to_string(),
                    fold.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    written.push(path);

    let path = output_dir.join("predictions.csv");
    let mut w = writer(&path)?;
    w.write_record([
        "repo",
        "release",
        "granularity",
        "module_id",
        "loc",
        "label",
        "score",
        "predicted",
    ])?;
    for p in &pairs {
        for g in [&p.class, &p.method] {
            let rows: std::collections::BTreeMap<_, _> = g.dataset.rows.iter().map(|r| (&r.module, r)).collect();
            for pred in &g.cv.predictions {
                let row = rows[&pred.module];
                w.write_record([
                    p.repo.clone(),
                    p.release.clone(),
                    g.kind.to_string(),
                    pred.module.to_string(),
                    row.loc.to_string(),
                    row.label.to_string(),
                    pred.score.to_string(),
                    pred.predicted.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    written.push(path);

    let path = output_dir.join("errors.csv");
    let mut w = writer(&path)?;
    w.write_record(["repo", "release", "message"])?;
    for r in &results.repos {
        if let Some(e) = &r.error {
            w.write_record([r.name.as_str(), "", e.as_str()])?;
        }
        for (release, msg) in &r.pair_errors {
            w.write_record([r.name.as_str(), release.as_str(), msg.as_str()])?;
        }
    }
    w.flush()?;
    written.push(path);

    for p in &pairs {
        for g in [&p.class, &p.method] {
            let name = format!("{}__{}.csv", sanitize(&p.release), g.kind);
            let path = output_dir.join("releases").join(sanitize(&p.repo)).join(&name);
            write_release_report(&path, g, &cfg.k_values)?;
            written.push(path);
            if cfg.dump_datasets {
                let path = output_dir.join("datasets").join(sanitize(&p.repo)).join(&name);
                if let Some(dir) = path.parent() {
                    fs::create_dir_all(dir)?;
                }
                crate::dataset::write_csv(&g.dataset, fs::File::create(&path)?)?;
                written.push(path);
            }
        }
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        folds: cfg.folds,
        k_values: &cfg.k_values,
        n_trees: cfg.forest.n_trees,
        config_hash: cfg.hash(),
        repos: results
            .repos
            .iter()
            .map(|r| ManifestRepo {
                name: &r.name,
                path: &r.path,
                release_pairs: r.pairs.len(),
                failed_pairs: r.pair_errors.len(),
                parse_warnings: r.parse_warnings,
                error: r.error.as_deref(),
            })
            .collect(),
    };
    let path = output_dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_metric_set_is_an_error() {
        assert!(matches!(summarize(&[]), Err(Error::EmptyReport(_))));
    }

    #[test]
    fn summary_pairs_only_complete_observations() {
        let s = MetricSeries {
            table: "rq3".into(),
            metric: "release@100".into(),
            pairs: vec![
                (Some(0.1), Some(0.6)),
                (None, Some(0.9)),
                (Some(0.2), Some(0.7)),
                (Some(0.3), None),
            ],
        };
        let rows = summarize(&[s]).unwrap();
        assert_eq!(rows[0].n, 2);
        assert!((rows[0].class_median.unwrap() - 0.15).abs() < 1e-12);
        assert!((rows[0].method_median.unwrap() - 0.65).abs() < 1e-12);
        let stat = rows[0].stat.as_ref().unwrap();
        assert_eq!(stat.delta, 1.0);
    }

    #[test]
    fn sanitize_names() {
        assert_eq!(sanitize("rel/commons-io-2.4..rel/2.5"), "rel_commons-io-2.4..rel_2.5");
    }
}
