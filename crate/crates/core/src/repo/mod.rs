//! Repository mining: release tags, first-parent linearization and file churn.

mod git;

pub use git::{CommitId, CommitInfo, Repo};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::diff::{line_churn, split_lines};
use crate::error::{Error, Result};

/// A tag resolved to the commit it points at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseTag {
    pub name: String,
    pub commit: CommitId,
    /// Committer date of the tagged commit.
    pub time: i64,
}

/// Two consecutive releases `r -> r'` and the commits between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleasePair {
    pub r_tag: String,
    pub rprime_tag: String,
    pub r_commit: CommitId,
    pub rprime_commit: CommitId,
    /// `c_1 .. c_n` with `c_1 = r` and `c_n = r'`.
    pub commits: Vec<CommitId>,
}

impl ReleasePair {
    pub fn label(&self) -> String {
        format!("{}..{}", self.r_tag, self.rprime_tag)
    }
}

/// A file's content at a commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileSnapshot {
    pub path: String,
    pub content: Vec<String>,
    pub commit: CommitId,
}

impl FileSnapshot {
    pub fn new(path: impl Into<String>, text: &str, commit: CommitId) -> Self {
        FileSnapshot {
            path: path.into(),
            content: split_lines(text),
            commit,
        }
    }
}

/// Tags matching `tag_filter`, sorted by the committer date of the tagged
/// commit (tag name breaks ties).
pub fn resolve_release_tags(repo: &Repo, tag_filter: &str) -> Result<Vec<ReleaseTag>> {
    let names = repo.tags(tag_filter)?;
    let mut commits = Vec::with_capacity(names.len());
    let mut kept = Vec::with_capacity(names.len());
    for name in names {
        match repo.resolve_commit(&format!("refs/tags/{name}")) {
            Ok(c) => {
                commits.push(c);
                kept.push(name);
            }
            Err(_) => warn!("tag `{name}` does not point at a commit; ignored"),
        }
    }
    let times = repo.committer_times(&commits)?;
    let mut tags: Vec<ReleaseTag> = kept
        .into_iter()
        .zip(commits)
        .zip(times)
        .map(|((name, commit), time)| ReleaseTag { name, commit, time })
        .collect();
    tags.sort_by(|a, b| a.time.cmp(&b.time).then_with(|| a.name.cmp(&b.name)));
    Ok(tags)
}

/// Pair consecutive release tags. Pairs whose older release is not on the
/// first-parent chain of the newer one are dropped with a warning.
pub fn resolve_release_pairs(repo: &Repo, tag_filter: &str) -> Result<Vec<ReleasePair>> {
    let tags = resolve_release_tags(repo, tag_filter)?;
    if tags.len() < 2 {
        warn!(
            "{}: {} tag(s) match `{tag_filter}`; at least two are needed for a release pair",
            repo.path().display(),
            tags.len()
        );
        return Ok(Vec::new());
    }
    let mut pairs = Vec::with_capacity(tags.len() - 1);
    for w in tags.windows(2) {
        match linearize_commits(repo, &w[0], &w[1]) {
            Ok(commits) => pairs.push(ReleasePair {
                r_tag: w[0].name.clone(),
                rprime_tag: w[1].name.clone(),
                r_commit: w[0].commit.clone(),
                rprime_commit: w[1].commit.clone(),
                commits,
            }),
            Err(e) => warn!("skipping release pair: {e}"),
        }
    }
    Ok(pairs)
}

/// The first-parent path from `r'` back to `r`, oldest first, endpoints
/// included.
pub fn linearize_commits(repo: &Repo, r: &ReleaseTag, rprime: &ReleaseTag) -> Result<Vec<CommitId>> {
    if r.commit == rprime.commit {
        return Ok(vec![r.commit.clone()]);
    }
    let ancestry = repo.first_parent_ancestry(&rprime.commit)?;
    match ancestry.iter().position(|c| *c == r.commit) {
        Some(pos) => {
            let mut path = ancestry[..=pos].to_vec();
            path.reverse();
            Ok(path)
        }
        None => Err(Error::NotFirstParentAncestor {
            from: r.name.clone(),
            to: rprime.name.clone(),
        }),
    }
}

/// Added plus deleted lines between `path_old@c` and `path_new@c_prime`.
/// A missing blob counts as empty.
pub fn diff_churn(repo: &mut Repo, path_old: &str, path_new: &str, c: &CommitId, c_prime: &CommitId) -> Result<usize> {
    let old = repo.read_blob(c, path_old)?.unwrap_or_default();
    let new = repo.read_blob(c_prime, path_new)?.unwrap_or_default();
    Ok(line_churn(&split_lines(&old), &split_lines(&new)).total())
}
