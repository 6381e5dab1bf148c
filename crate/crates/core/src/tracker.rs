//! Method-repository style history tracking.
//!
//! Modules are threaded through a linear commit chain: at each step the
//! modules of changed files are matched by identity, then by body similarity
//! (renames), and every matched module whose text differs gets one change
//! event carrying the line churn of its body.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::{Hash, Hasher};

use log::{debug, warn};
use serde::Serialize;

use crate::diff::{line_churn, similarity, LineChurn};
use crate::error::Result;
use crate::modules::{extract_modules, ExtractWarning, ModuleDef, ModuleId, ModuleKind};
use crate::repo::{CommitId, FileSnapshot, ReleasePair, Repo};

/// Minimum body similarity for pairing a deleted module with an added one.
pub const RENAME_THRESHOLD: f64 = 0.6;

/// One pairing produced by [`match_renames`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenameMatch {
    pub prev: usize,
    pub cur: usize,
    pub similarity: f64,
}

/// Pair modules of adjacent snapshots: exact identity first, then the
/// remaining modules of the same kind greedily by descending body similarity
/// (at least [`RENAME_THRESHOLD`]). Each module is used at most once. The
/// result is sorted by `prev`.
pub fn match_renames(prev: &[ModuleDef], cur: &[ModuleDef]) -> Vec<RenameMatch> {
    let mut matches = Vec::new();
    let mut cur_used = vec![false; cur.len()];
    let mut prev_used = vec![false; prev.len()];

    let mut by_id: HashMap<&ModuleId, usize> = HashMap::with_capacity(cur.len());
    for (i, d) in cur.iter().enumerate() {
        by_id.entry(&d.id).or_insert(i);
    }
    for (p, d) in prev.iter().enumerate() {
        if let Some(&c) = by_id.get(&d.id) {
            if !cur_used[c] {
                cur_used[c] = true;
                prev_used[p] = true;
                let sim = if d.body == cur[c].body {
                    1.0
                } else {
                    similarity(&d.body, &cur[c].body)
                };
                matches.push(RenameMatch {
                    prev: p,
                    cur: c,
                    similarity: sim,
                });
            }
        }
    }

    let open_prev: Vec<usize> = (0..prev.len()).filter(|&p| !prev_used[p]).collect();
    let open_cur: Vec<usize> = (0..cur.len()).filter(|&c| !cur_used[c]).collect();
    if !open_prev.is_empty() && !open_cur.is_empty() {
        let prev_hashes: Vec<Vec<u64>> = open_prev.iter().map(|&p| line_hashes(&prev[p].body)).collect();
        let cur_hashes: Vec<Vec<u64>> = open_cur.iter().map(|&c| line_hashes(&cur[c].body)).collect();
        let mut candidates = Vec::new();
        for (pi, &p) in open_prev.iter().enumerate() {
            for (ci, &c) in open_cur.iter().enumerate() {
                if prev[p].id.kind != cur[c].id.kind {
                    continue;
                }
                let (a, b) = (prev[p].body.len(), cur[c].body.len());
                let total = (a + b) as f64;
                if total == 0.0 || 2.0 * a.min(b) as f64 / total < RENAME_THRESHOLD {
                    continue;
                }
                let common = sorted_intersection(&prev_hashes[pi], &cur_hashes[ci]);
                if 2.0 * common as f64 / total < RENAME_THRESHOLD {
                    continue;
                }
                let sim = similarity(&prev[p].body, &cur[c].body);
                if sim >= RENAME_THRESHOLD {
                    candidates.push(RenameMatch {
                        prev: p,
                        cur: c,
                        similarity: sim,
                    });
                }
            }
        }
        candidates.sort_by(|x, y| {
            y.similarity
                .total_cmp(&x.similarity)
                .then(x.prev.cmp(&y.prev))
                .then(x.cur.cmp(&y.cur))
        });
        for m in candidates {
            if !prev_used[m.prev] && !cur_used[m.cur] {
                prev_used[m.prev] = true;
                cur_used[m.cur] = true;
                matches.push(m);
            }
        }
    }
    matches.sort_by_key(|m| m.prev);
    matches
}

fn line_hashes(lines: &[String]) -> Vec<u64> {
    let mut v: Vec<u64> = lines
        .iter()
        .map(|l| {
            let mut h = DefaultHasher::new();
            l.hash(&mut h);
            h.finish()
        })
        .collect();
    v.sort_unstable();
    v
}

fn sorted_intersection(a: &[u64], b: &[u64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// A change to a module made by `commit`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeEvent {
    pub commit: CommitId,
    pub added: usize,
    pub deleted: usize,
}

impl ChangeEvent {
    pub fn churn(&self) -> usize {
        self.added + self.deleted
    }
}

/// The change events of one module over a commit sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChangeHistory {
    pub module: ModuleId,
    pub events: Vec<ChangeEvent>,
    pub birth_commit: CommitId,
}

impl ChangeHistory {
    pub fn total_churn(&self) -> usize {
        self.events.iter().map(ChangeEvent::churn).sum()
    }
}

pub fn count_changes_between(history: &ChangeHistory) -> usize {
    history.events.len()
}

/// A module tracked across the chain, from birth to (optional) death.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lineage {
    /// Identity at birth.
    pub id: ModuleId,
    /// Chain index of the commit that introduced the module.
    pub birth: usize,
    /// Chain index of the commit that removed it.
    pub death: Option<usize>,
    /// `(chain index, churn)` per change, in chain order. A removal is a
    /// change deleting every line.
    pub events: Vec<(usize, LineChurn)>,
}

impl Lineage {
    pub fn kind(&self) -> ModuleKind {
        self.id.kind
    }

    pub fn alive_at(&self, idx: usize) -> bool {
        self.birth <= idx && self.death.is_none_or(|d| idx < d)
    }

    /// Events made by commits in the half-open index window `(from, to]`.
    pub fn events_in(&self, from: usize, to: usize) -> impl Iterator<Item = &(usize, LineChurn)> {
        self.events.iter().filter(move |(i, _)| *i > from && *i <= to)
    }
}

/// Result of walking a first-parent chain.
#[derive(Debug, Clone)]
pub struct MinedHistory {
    pub chain: Vec<CommitId>,
    pub lineages: Vec<Lineage>,
    /// Module snapshot at each requested chain index: `(lineage, def)`.
    pub checkpoints: BTreeMap<usize, Vec<(usize, ModuleDef)>>,
    pub warnings: Vec<ExtractWarning>,
}

impl MinedHistory {
    pub fn index_of(&self, commit: &CommitId) -> Option<usize> {
        self.chain.iter().position(|c| c == commit)
    }

    /// Change history of every lineage restricted to the index window
    /// `(from, to]`, keyed by identity at birth. Lineages that reuse an
    /// identity (removed and re-added) are merged, as a path-based history
    /// would.
    pub fn histories_between(&self, from: usize, to: usize) -> BTreeMap<ModuleId, ChangeHistory> {
        let mut out: BTreeMap<ModuleId, ChangeHistory> = BTreeMap::new();
        for l in &self.lineages {
            if l.birth > to || l.death.is_some_and(|d| d <= from) {
                continue;
            }
            let events: Vec<ChangeEvent> = l
                .events_in(from, to)
                .map(|(i, c)| ChangeEvent {
                    commit: self.chain[*i].clone(),
                    added: c.added,
                    deleted: c.deleted,
                })
                .collect();
            out.entry(l.id.clone())
                .and_modify(|h| h.events.extend(events.iter().cloned()))
                .or_insert_with(|| ChangeHistory {
                    module: l.id.clone(),
                    events,
                    birth_commit: self.chain[l.birth.max(from)].clone(),
                });
        }
        out
    }
}

fn is_source(path: &str) -> bool {
    path.ends_with(".java")
}

struct Walker<'r> {
    repo: &'r mut Repo,
    files: BTreeMap<String, Vec<(usize, ModuleDef)>>,
    lineages: Vec<Lineage>,
    warnings: Vec<ExtractWarning>,
}

impl Walker<'_> {
    fn load(&mut self, commit: &CommitId, path: &str) -> Result<Vec<ModuleDef>> {
        let Some(text) = self.repo.read_blob(commit, path)? else {
            return Ok(Vec::new());
        };
        let snap = FileSnapshot::new(path, &text, commit.clone());
        match extract_modules(&snap) {
            Ok(defs) => Ok(defs),
            Err(w) => {
                warn!("{}@{}: skipped, {}", w.path, commit.short(), w.message);
                self.warnings.push(w);
                Ok(Vec::new())
            }
        }
    }

    fn born(&mut self, idx: usize, def: ModuleDef) -> (usize, ModuleDef) {
        self.lineages.push(Lineage {
            id: def.id.clone(),
            birth: idx,
            death: None,
            events: Vec::new(),
        });
        (self.lineages.len() - 1, def)
    }

    fn step(&mut self, idx: usize, from: &CommitId, to: &CommitId) -> Result<()> {
        let changed: Vec<String> = self
            .repo
            .changed_files(from, to)?
            .into_iter()
            .filter(|p| is_source(p))
            .collect();
        if changed.is_empty() {
            return Ok(());
        }
        let mut prev: Vec<(usize, ModuleDef)> = Vec::new();
        let mut cur: Vec<ModuleDef> = Vec::new();
        for path in &changed {
            if let Some(mods) = self.files.remove(path) {
                prev.extend(mods);
            }
            cur.extend(self.load(to, path)?);
        }
        let prev_defs: Vec<ModuleDef> = prev.iter().map(|(_, d)| d.clone()).collect();
        let matches = match_renames(&prev_defs, &cur);

        let mut cur_lineage: Vec<Option<usize>> = vec![None; cur.len()];
        let mut prev_matched = vec![false; prev.len()];
        for m in &matches {
            let (lineage, old) = &prev[m.prev];
            let new = &cur[m.cur];
            prev_matched[m.prev] = true;
            cur_lineage[m.cur] = Some(*lineage);
            // Identity-only changes (enclosing class renamed, file moved)
            // leave the body intact and are not edits of the module.
            if old.body != new.body {
                let churn = line_churn(&old.body, &new.body);
                self.lineages[*lineage].events.push((idx, churn));
            }
        }
        for (p, (lineage, old)) in prev.iter().enumerate() {
            if !prev_matched[p] {
                let l = &mut self.lineages[*lineage];
                l.death = Some(idx);
                l.events.push((
                    idx,
                    LineChurn {
                        added: 0,
                        deleted: old.body.len(),
                    },
                ));
            }
        }
        for (c, def) in cur.into_iter().enumerate() {
            let entry = match cur_lineage[c] {
                Some(l) => (l, def),
                None => self.born(idx, def),
            };
            self.files.entry(entry.1.id.file_path.clone()).or_default().push(entry);
        }
        Ok(())
    }

    fn snapshot(&self) -> Vec<(usize, ModuleDef)> {
        self.files.values().flatten().cloned().collect()
    }
}

/// Walk `chain` (oldest first), threading module identities through every
/// adjacent pair. Module snapshots are kept for the chain indices listed in
/// `checkpoints`.
pub fn mine_history(repo: &mut Repo, chain: &[CommitId], checkpoints: &[usize]) -> Result<MinedHistory> {
    let wanted: HashSet<usize> = checkpoints.iter().copied().collect();
    let mut walker = Walker {
        repo,
        files: BTreeMap::new(),
        lineages: Vec::new(),
        warnings: Vec::new(),
    };
    let mut snaps = BTreeMap::new();
    let Some(first) = chain.first() else {
        return Ok(MinedHistory {
            chain: Vec::new(),
            lineages: Vec::new(),
            checkpoints: snaps,
            warnings: Vec::new(),
        });
    };

    let files: Vec<String> = walker
        .repo
        .list_files(first)?
        .into_iter()
        .filter(|p| is_source(p))
        .collect();
    for path in files {
        for def in walker.load(first, &path)? {
            let entry = walker.born(0, def);
            walker.files.entry(path.clone()).or_default().push(entry);
        }
    }
    if wanted.contains(&0) {
        snaps.insert(0, walker.snapshot());
    }
    for idx in 1..chain.len() {
        walker.step(idx, &chain[idx - 1], &chain[idx])?;
        if wanted.contains(&idx) {
            snaps.insert(idx, walker.snapshot());
        }
        if idx % 500 == 0 {
            debug!("walked {idx}/{} commits", chain.len());
        }
    }
    Ok(MinedHistory {
        chain: chain.to_vec(),
        lineages: walker.lineages,
        checkpoints: snaps,
        warnings: walker.warnings,
    })
}

/// Change histories of every module over the release pair's linearized
/// commits. Modules alive at `r` are keyed by their identity at `r`.
pub fn build_change_histories(repo: &mut Repo, pair: &ReleasePair) -> Result<BTreeMap<ModuleId, ChangeHistory>> {
    let mined = mine_history(repo, &pair.commits, &[])?;
    Ok(mined.histories_between(0, pair.commits.len().saturating_sub(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::split_lines;
    use crate::modules::extract_from_lines;

    fn defs(src: &str) -> Vec<ModuleDef> {
        extract_from_lines("A.java", &split_lines(src)).unwrap()
    }

    #[test]
    fn identity_matches_unchanged_modules() {
        let a = defs("class A {\n  void f() {\n    x();\n  }\n}\n");
        let m = match_renames(&a, &a);
        assert_eq!(m.len(), a.len());
        assert!(m.iter().all(|m| m.prev == m.cur && m.similarity == 1.0));
    }

    #[test]
    fn renamed_method_with_same_body_is_matched() {
        let old = defs("class A {\n  void f() {\n    a();\n    b();\n    c();\n  }\n}\n");
        let new = defs("class A {\n  void g() {\n    a();\n    b();\n    c();\n  }\n}\n");
        let m = match_renames(&old, &new);
        let method = m.iter().find(|m| m.prev == 1).expect("method matched");
        assert_eq!(method.cur, 1);
        // Signature line differs: 2 * 4 / 10.
        assert!((method.similarity - 0.8).abs() < 1e-12);
        assert_eq!(new[1].body[1..], old[1].body[1..]);
    }

    #[test]
    fn identical_body_under_new_identity_scores_one() {
        let mut old = defs("class A {\n  void f() {\n    a();\n  }\n}\n");
        let new = old.clone();
        old[1].id.method_name = Some("renamed".into());
        let m = match_renames(&old, &new);
        assert_eq!(m.iter().find(|m| m.prev == 1).unwrap().similarity, 1.0);
    }

    #[test]
    fn dissimilar_bodies_are_birth_and_death() {
        let old = defs("class A {\n  void f() {\n    a();\n    b();\n    c();\n    d();\n    e();\n  }\n}\n");
        let new = defs("class A {\n  void g() {\n    v();\n    w();\n    c();\n    x();\n    y();\n  }\n}\n");
        // Line LCS of the two bodies by hand: only `c();` and the closing brace align.
        let sim = similarity(&old[1].body, &new[1].body);
        assert!((sim - 2.0 * 2.0 / 14.0).abs() < 1e-12);
        assert!(sim < RENAME_THRESHOLD);
        let m = match_renames(&old, &new);
        assert!(m.iter().all(|m| m.prev != 1));
    }

    #[test]
    fn each_module_matched_once() {
        let old = defs("class A {\n  void f() {\n    a();\n    b();\n  }\n}\n");
        let new = defs("class A {\n  void g() {\n    a();\n    b();\n  }\n  void h() {\n    a();\n    b();\n  }\n}\n");
        let m = match_renames(&old, &new);
        let curs: HashSet<usize> = m.iter().map(|m| m.cur).collect();
        assert_eq!(curs.len(), m.len());
        assert_eq!(m.iter().find(|m| m.prev == 1).unwrap().cur, 1);
    }

    #[test]
    fn kinds_never_cross() {
        let mut old = defs("class A {\n}\n");
        old[0].id = ModuleId::method("A.java", "A", "x", vec![]);
        let new = defs("class B {\n}\n");
        assert!(match_renames(&old, &new).is_empty());
    }

    #[test]
    fn counts_are_event_counts() {
        let h = ChangeHistory {
            module: ModuleId::class("A.java", "A"),
            events: Vec::new(),
            birth_commit: CommitId::new("a".repeat(40)).unwrap(),
        };
        assert_eq!(count_changes_between(&h), 0);
        let mut h3 = h.clone();
        for _ in 0..3 {
            h3.events.push(ChangeEvent {
                commit: h.birth_commit.clone(),
                added: 1,
                deleted: 0,
            });
        }
        assert_eq!(count_changes_between(&h3), 3);
    }
}
