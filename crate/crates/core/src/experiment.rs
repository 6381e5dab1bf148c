//! End-to-end pipeline: mine release pairs, build both datasets, cross-validate
//! and evaluate.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, RepoConfig};
use crate::dataset::{assemble, label_change_prone, LabeledDataset};
use crate::diff::line_churn;
use crate::error::{Error, Result};
use crate::eval::{
    auc_roc, classification_scores, confusion_counts, project_class_predictions_to_methods, rank_by_score,
    top_k_change_ratio, ChangeKind, ChangeSizes, EvalScores,
};
use crate::forest::{cross_validate, CvResult, ForestParams};
use crate::metrics::{
    process_metrics_from_events, snapshot_product_metrics, ProcessEvent, ProcessMetricVector, ProductMetricVector,
};
use crate::modules::{module_loc, ExtractWarning, ModuleDef, ModuleId, ModuleKind};
use crate::repo::{linearize_commits, resolve_release_tags, CommitInfo, ReleasePair, ReleaseTag, Repo};
use crate::tracker::{mine_history, MinedHistory};

/// A module alive at `r` with its milestone change data.
#[derive(Debug, Clone)]
pub struct ReleaseModule {
    pub def: ModuleDef,
    pub changes: usize,
    pub sizes: ChangeSizes,
}

impl ReleaseModule {
    pub fn loc(&self) -> usize {
        module_loc(&self.def)
    }
}

/// Everything mined for one release pair.
#[derive(Debug, Clone)]
pub struct MinedRelease {
    pub pair: ReleasePair,
    /// Sorted by module id.
    pub modules: Vec<ReleaseModule>,
    pub product: BTreeMap<ModuleId, ProductMetricVector>,
    pub process: BTreeMap<ModuleId, ProcessMetricVector>,
}

impl MinedRelease {
    pub fn of_kind(&self, kind: ModuleKind) -> impl Iterator<Item = &ReleaseModule> {
        self.modules.iter().filter(move |m| m.def.kind() == kind)
    }

    pub fn counts(&self, kind: ModuleKind) -> BTreeMap<ModuleId, usize> {
        self.of_kind(kind).map(|m| (m.def.id.clone(), m.changes)).collect()
    }

    pub fn locs(&self, kind: ModuleKind) -> BTreeMap<ModuleId, usize> {
        self.of_kind(kind).map(|m| (m.def.id.clone(), m.loc())).collect()
    }

    pub fn sizes(&self, kind: ModuleKind) -> BTreeMap<ModuleId, ChangeSizes> {
        self.of_kind(kind)
            .map(|m| (m.def.id.clone(), m.sizes.clone()))
            .collect()
    }

    /// Methods of each class, by direct ownership.
    pub fn methods_of(&self) -> BTreeMap<ModuleId, BTreeSet<ModuleId>> {
        let mut out: BTreeMap<ModuleId, BTreeSet<ModuleId>> = self
            .of_kind(ModuleKind::Class)
            .map(|c| (c.def.id.clone(), BTreeSet::new()))
            .collect();
        for m in self.of_kind(ModuleKind::Method) {
            out.entry(m.def.id.owner()).or_default().insert(m.def.id.clone());
        }
        out
    }

    /// Labeled dataset at one granularity.
    pub fn dataset(&self, kind: ModuleKind) -> Result<LabeledDataset> {
        fn of_kind<V: Clone>(m: &BTreeMap<ModuleId, V>, kind: ModuleKind) -> BTreeMap<ModuleId, V> {
            m.iter()
                .filter(|(id, _)| id.kind == kind)
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect()
        }
        let product = of_kind(&self.product, kind);
        let process = of_kind(&self.process, kind);
        let labels = label_change_prone(&self.counts(kind))?;
        assemble(self.pair.label(), kind, &product, &process, &labels, &self.locs(kind))
    }
}

/// Release pairs of one repository, mined in as few history walks as
/// possible.
#[derive(Debug, Clone)]
pub struct RepoMining {
    pub releases: Vec<MinedRelease>,
    pub warnings: Vec<ExtractWarning>,
    /// Release pairs that could not be formed.
    pub skipped: Vec<(String, String)>,
}

fn release_of(
    mined: &MinedHistory,
    infos: &HashMap<crate::repo::CommitId, CommitInfo>,
    r: &ReleaseTag,
    rprime: &ReleaseTag,
    idx_r: usize,
    idx_rp: usize,
) -> MinedRelease {
    let time = |i: usize| infos.get(&mined.chain[i]).map_or(0, |c| c.time);
    let snap_r = &mined.checkpoints[&idx_r];
    let at_rp: HashMap<usize, &ModuleDef> = mined.checkpoints[&idx_rp].iter().map(|(l, d)| (*l, d)).collect();

    let mut touched: HashMap<(ModuleKind, usize), usize> = HashMap::new();
    for l in &mined.lineages {
        let mut seen = BTreeSet::new();
        for (i, _) in l.events.iter().filter(|(i, _)| *i <= idx_r) {
            if seen.insert(*i) {
                *touched.entry((l.kind(), *i)).or_insert(0) += 1;
            }
        }
    }

    let defs: Vec<ModuleDef> = snap_r.iter().map(|(_, d)| d.clone()).collect();
    let product = snapshot_product_metrics(&defs);
    let mut modules = Vec::with_capacity(snap_r.len());
    let mut process = BTreeMap::new();
    for (lin, def) in snap_r {
        let lineage = &mined.lineages[*lin];
        let window: Vec<_> = lineage.events_in(idx_r, idx_rp).collect();
        let body_rp = at_rp.get(lin).map(|d| d.body.as_slice());
        let sizes = ChangeSizes {
            module: def.id.clone(),
            delta_release: line_churn(&def.body, body_rp.unwrap_or(&[])).total(),
            delta_commit: window.iter().map(|(_, c)| c.total()).sum(),
        };
        let prior: Vec<ProcessEvent> = lineage
            .events
            .iter()
            .filter(|(i, _)| *i <= idx_r)
            .map(|(i, c)| ProcessEvent {
                time: time(*i),
                author: infos
                    .get(&mined.chain[*i])
                    .map(|c| c.author.clone())
                    .unwrap_or_default(),
                churn: *c,
                co_changed: touched.get(&(lineage.kind(), *i)).is_some_and(|&n| n >= 2),
            })
            .collect();
        process.insert(
            def.id.clone(),
            process_metrics_from_events(time(lineage.birth), time(idx_r), &prior),
        );
        modules.push(ReleaseModule {
            def: def.clone(),
            changes: window.len(),
            sizes,
        });
    }
    modules.sort_by(|a, b| a.def.id.cmp(&b.def.id));
    MinedRelease {
        pair: ReleasePair {
            r_tag: r.name.clone(),
            rprime_tag: rprime.name.clone(),
            r_commit: r.commit.clone(),
            rprime_commit: rprime.commit.clone(),
            commits: mined.chain[idx_r..=idx_rp].to_vec(),
        },
        modules,
        product,
        process,
    }
}

/// Mine every consecutive tag pair matching `tag_filter`.
///
/// Pairs on the newest tag's first-parent chain share one walk from the root
/// commit; any other pair is walked separately.
pub fn mine_repository(path: &Path, tag_filter: &str) -> Result<RepoMining> {
    let mut repo = Repo::open(path)?;
    let tags = resolve_release_tags(&repo, tag_filter)?;
    let mut out = RepoMining {
        releases: Vec::new(),
        warnings: Vec::new(),
        skipped: Vec::new(),
    };
    if tags.len() < 2 {
        warn!(
            "{}: {} tag(s) match `{tag_filter}`; no release pairs",
            path.display(),
            tags.len()
        );
        return Ok(out);
    }
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for (i, w) in tags.windows(2).enumerate() {
        match linearize_commits(&repo, &w[0], &w[1]) {
            Ok(_) => pending.push((i, i + 1)),
            Err(e) => {
                warn!("{}: {e}", path.display());
                out.skipped
                    .push((format!("{}..{}", w[0].name, w[1].name), e.to_string()));
            }
        }
    }
    let mut results: BTreeMap<usize, MinedRelease> = BTreeMap::new();
    while let Some(&(_, tip)) = pending.last() {
        let mut chain = repo.first_parent_ancestry(&tags[tip].commit)?;
        chain.reverse();
        let index: HashMap<_, usize> = chain.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        let (here, rest): (Vec<_>, Vec<_>) = pending
            .iter()
            .partition(|(a, b)| index.contains_key(&tags[*a].commit) && index.contains_key(&tags[*b].commit));
        pending = rest;
        let needed = here
            .iter()
            .flat_map(|(a, b)| [*a, *b])
            .map(|t| index[&tags[t].commit])
            .max()
            .unwrap_or(0);
        let chain = chain[..=needed].to_vec();
        let checkpoints: Vec<usize> = here
            .iter()
            .flat_map(|(a, b)| [index[&tags[*a].commit], index[&tags[*b].commit]])
            .collect();
        info!(
            "{}: walking {} commits for {} release pair(s)",
            path.display(),
            chain.len(),
            here.len()
        );
        let mined = mine_history(&mut repo, &chain, &checkpoints)?;
        let infos = repo.commit_infos(&chain[needed])?;
        for (a, b) in here {
            let (ia, ib) = (index[&tags[a].commit], index[&tags[b].commit]);
            results.insert(a, release_of(&mined, &infos, &tags[a], &tags[b], ia, ib));
        }
        out.warnings.extend(mined.warnings);
    }
    out.releases = results.into_values().collect();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioEntry {
    pub kind: ChangeKind,
    pub k: usize,
    pub value: Option<f64>,
}

/// Cross-validated results at one granularity.
#[derive(Debug, Clone, Serialize)]
pub struct GranularityResult {
    pub kind: ModuleKind,
    pub modules: usize,
    pub change_prone_ratio: f64,
    /// Fold-averaged scores.
    pub direct: EvalScores,
    /// Scores of the pooled out-of-fold predictions.
    pub pooled: EvalScores,
    pub ratios: Vec<RatioEntry>,
    pub cv: CvResult,
    #[serde(skip)]
    pub dataset: LabeledDataset,
}

impl GranularityResult {
    pub fn ratio(&self, kind: ChangeKind, k: usize) -> Option<f64> {
        self.ratios
            .iter()
            .find(|r| r.kind == kind && r.k == k)
            .and_then(|r| r.value)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairResult {
    pub repo: String,
    pub release: String,
    pub commits: usize,
    pub class: GranularityResult,
    pub method: GranularityResult,
    /// Class predictions projected onto their methods, scored against the
    /// method labels.
    pub projected: EvalScores,
}

fn pooled_scores(cv: &CvResult, labels: &BTreeMap<ModuleId, u8>) -> EvalScores {
    let universe: BTreeSet<&ModuleId> = cv.predictions.iter().map(|p| &p.module).collect();
    let predicted = cv
        .predictions
        .iter()
        .filter(|p| p.predicted == 1)
        .map(|p| &p.module)
        .collect();
    let truth = universe.iter().copied().filter(|m| labels[*m] == 1).collect();
    let mut s = classification_scores(&confusion_counts(&predicted, &truth, &universe));
    let pairs: Vec<(f64, u8)> = cv.predictions.iter().map(|p| (p.score, labels[&p.module])).collect();
    s.auc = auc_roc(&pairs);
    s
}

fn analyze_granularity(
    release: &MinedRelease,
    kind: ModuleKind,
    params: &ForestParams,
    folds: usize,
    k_values: &[usize],
) -> Result<GranularityResult> {
    let dataset = release.dataset(kind)?;
    let cv = cross_validate(&dataset, folds, params)?;
    let labels: BTreeMap<ModuleId, u8> = dataset.rows.iter().map(|r| (r.module.clone(), r.label)).collect();
    let ranking = rank_by_score(&cv.predictions, &release.locs(kind))?;
    let sizes = release.sizes(kind);
    let ratios = ChangeKind::ALL
        .iter()
        .flat_map(|&ck| {
            let ranking = &ranking;
            let sizes = &sizes;
            k_values.iter().map(move |&k| RatioEntry {
                kind: ck,
                k,
                value: top_k_change_ratio(ranking, k, sizes, ck),
            })
        })
        .collect();
    Ok(GranularityResult {
        kind,
        modules: dataset.rows.len(),
        change_prone_ratio: dataset.change_prone_ratio(),
        direct: cv.mean_scores(),
        pooled: pooled_scores(&cv, &labels),
        ratios,
        cv,
        dataset,
    })
}

/// Both granularities, projection and ratios for one release pair.
pub fn analyze_release(
    repo: &str,
    release: &MinedRelease,
    params: &ForestParams,
    folds: usize,
    k_values: &[usize],
) -> Result<PairResult> {
    let class = analyze_granularity(release, ModuleKind::Class, params, folds, k_values)?;
    let method = analyze_granularity(release, ModuleKind::Method, params, folds, k_values)?;
    let predicted_classes: BTreeSet<ModuleId> = class
        .cv
        .predictions
        .iter()
        .filter(|p| p.predicted == 1)
        .map(|p| p.module.clone())
        .collect();
    let projected_set = project_class_predictions_to_methods(&predicted_classes, &release.methods_of())?;
    let universe: BTreeSet<ModuleId> = method.dataset.rows.iter().map(|r| r.module.clone()).collect();
    let truth: BTreeSet<ModuleId> = method
        .dataset
        .rows
        .iter()
        .filter(|r| r.label == 1)
        .map(|r| r.module.clone())
        .collect();
    let projected = classification_scores(&confusion_counts(&projected_set, &truth, &universe));
    Ok(PairResult {
        repo: repo.to_string(),
        release: release.pair.label(),
        commits: release.pair.commits.len(),
        class,
        method,
        projected,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RepoResult {
    pub name: String,
    pub path: String,
    pub pairs: Vec<PairResult>,
    /// `(release, message)` for pairs that could not be mined or evaluated.
    pub pair_errors: Vec<(String, String)>,
    /// Set when the repository as a whole failed.
    pub error: Option<String>,
    pub parse_warnings: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResults {
    pub config: ExperimentConfig,
    pub repos: Vec<RepoResult>,
}

impl ExperimentResults {
    pub fn pairs(&self) -> impl Iterator<Item = &PairResult> {
        self.repos.iter().flat_map(|r| r.pairs.iter())
    }

    /// True when every repository failed outright.
    pub fn all_failed(&self) -> bool {
        self.repos.iter().all(|r| r.error.is_some())
    }
}

fn run_repo(cfg: &ExperimentConfig, repo: &RepoConfig) -> RepoResult {
    let name = repo.display_name();
    let mut result = RepoResult {
        name: name.clone(),
        path: repo.path.display().to_string(),
        pairs: Vec::new(),
        pair_errors: Vec::new(),
        error: None,
        parse_warnings: 0,
    };
    let mining = match mine_repository(&repo.path, &repo.tag_filter) {
        Ok(m) => m,
        Err(e) => {
            warn!("{name}: {e}");
            result.error = Some(e.to_string());
            return result;
        }
    };
    if mining.releases.is_empty() && mining.skipped.is_empty() {
        result.error = Some(format!("no release pairs for tag filter `{}`", repo.tag_filter));
    }
    result.parse_warnings = mining.warnings.len();
    result.pair_errors.extend(mining.skipped);
    let params = cfg.forest_params();
    let analyzed: Vec<Result<PairResult>> = mining
        .releases
        .par_iter()
        .map(|r| analyze_release(&name, r, &params, cfg.folds, &cfg.k_values))
        .collect();
    for (r, res) in mining.releases.iter().zip(analyzed) {
        match res {
            Ok(p) => result.pairs.push(p),
            Err(e) => {
                warn!("{name} {}: {e}", r.pair.label());
                result.pair_errors.push((r.pair.label(), e.to_string()));
            }
        }
    }
    result
}

/// Run the whole experiment with up to `jobs` worker threads (0 = all cores).
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentResults> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let repos = pool.install(|| cfg.repos.par_iter().map(|r| run_repo(cfg, r)).collect());
    Ok(ExperimentResults {
        config: cfg.clone(),
        repos,
    })
}
