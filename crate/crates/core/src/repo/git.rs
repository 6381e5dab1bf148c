//! Thin read-only wrapper over the `git` command line.
//!
//! A [`Repo`] owns one long-lived `git cat-file --batch` process for blob
//! reads, so a handle is single-threaded. Open one handle per worker.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full 40-hex object name of a commit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommitId(String);

impl CommitId {
    pub fn new(hash: impl Into<String>) -> Result<Self> {
        let hash = hash.into();
        if hash.len() == 40 && hash.bytes().all(|b| b.is_ascii_hexdigit()) {
            Ok(CommitId(hash.to_ascii_lowercase()))
        } else {
            Err(Error::UnknownRevision(hash))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn short(&self) -> &str {
        &self.0[..10]
    }
}

impl fmt::Display for CommitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Author identity and timestamp of a commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitInfo {
    pub author: String,
    /// Author date, seconds since the epoch.
    pub time: i64,
}

struct BlobReader {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Drop for BlobReader {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct Repo {
    path: PathBuf,
    blobs: Option<BlobReader>,
}

impl fmt::Debug for Repo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Repo").field("path", &self.path).finish()
    }
}

impl Repo {
    pub fn open(path: impl AsRef<Path>) -> Result<Repo> {
        let path = path.as_ref().to_path_buf();
        if !path.is_dir() {
            return Err(Error::NotARepository(path));
        }
        let status = Command::new("git")
            .args(["rev-parse", "--git-dir"])
            .current_dir(&path)
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()?;
        if !status.success() {
            return Err(Error::NotARepository(path));
        }
        Ok(Repo { path, blobs: None })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub(crate) fn git<I, S>(&self, args: I) -> Result<String>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<std::ffi::OsStr>,
    {
        let args: Vec<std::ffi::OsString> = args.into_iter().map(|a| a.as_ref().to_owned()).collect();
        let output = Command::new("git").args(&args).current_dir(&self.path).output()?;
        if !output.status.success() {
            return Err(Error::Git {
                command: args
                    .iter()
                    .map(|a| a.to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join(" "),
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_owned(),
            });
        }
        Ok(String::from_utf8_lossy(&output.stdout).into_owned())
    }

    /// Resolve any revision (tag, branch, hash) to the commit it names.
    pub fn resolve_commit(&self, rev: &str) -> Result<CommitId> {
        let out = self
            .git(["rev-parse", "--verify", "--quiet", &format!("{rev}^{{commit}}")])
            .map_err(|_| Error::UnknownRevision(rev.to_owned()))?;
        CommitId::new(out.trim())
    }

    /// Tag names matching a git wildmatch pattern, in git's listing order.
    pub fn tags(&self, pattern: &str) -> Result<Vec<String>> {
        let out = self.git(["tag", "--list", pattern])?;
        Ok(out.lines().filter(|l| !l.is_empty()).map(str::to_owned).collect())
    }

    /// Committer timestamps of the given commits.
    pub fn committer_times(&self, commits: &[CommitId]) -> Result<Vec<i64>> {
        if commits.is_empty() {
            return Ok(Vec::new());
        }
        let mut args = vec!["show".to_owned(), "-s".into(), "--format=%ct".into()];
        args.extend(commits.iter().map(|c| c.to_string()));
        let out = self.git(&args)?;
        let times: Vec<i64> = out
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.trim().parse().unwrap_or(0))
            .collect();
        if times.len() != commits.len() {
            return Err(Error::Git {
                command: "show -s --format=%ct".into(),
                stderr: format!("expected {} timestamps, got {}", commits.len(), times.len()),
            });
        }
        Ok(times)
    }

    /// First-parent ancestry of `tip`, newest first, `tip` included.
    pub fn first_parent_ancestry(&self, tip: &CommitId) -> Result<Vec<CommitId>> {
        let out = self.git(["rev-list", "--first-parent", tip.as_str()])?;
        out.lines().filter(|l| !l.is_empty()).map(CommitId::new).collect()
    }

    /// Author and author-date of every commit on the first-parent chain of `tip`.
    pub fn commit_infos(&self, tip: &CommitId) -> Result<HashMap<CommitId, CommitInfo>> {
        let out = self.git(["log", "--first-parent", "--format=%H%x00%ae%x00%at", tip.as_str()])?;
        let mut infos = HashMap::new();
        for line in out.lines().filter(|l| !l.is_empty()) {
            let mut parts = line.split('\0');
            let (Some(hash), Some(author), Some(time)) = (parts.next(), parts.next(), parts.next()) else {
                continue;
            };
            infos.insert(
                CommitId::new(hash)?,
                CommitInfo {
                    author: author.to_ascii_lowercase(),
                    time: time.trim().parse().unwrap_or(0),
                },
            );
        }
        Ok(infos)
    }

    /// All file paths in the tree of `commit`.
    pub fn list_files(&self, commit: &CommitId) -> Result<Vec<String>> {
        let out = self.git(["ls-tree", "-r", "-z", "--name-only", commit.as_str()])?;
        Ok(out.split('\0').filter(|p| !p.is_empty()).map(str::to_owned).collect())
    }

    /// Paths whose content differs between two commits (no rename pairing).
    pub fn changed_files(&self, from: &CommitId, to: &CommitId) -> Result<Vec<String>> {
        let out = self.git([
            "diff-tree",
            "-r",
            "-z",
            "--no-renames",
            "--name-only",
            from.as_str(),
            to.as_str(),
        ])?;
        Ok(out.split('\0').filter(|p| !p.is_empty()).map(str::to_owned).collect())
    }

    /// Content of `path` at `commit`, or `None` when the path does not exist
    /// there. Invalid UTF-8 is replaced lossily.
    pub fn read_blob(&mut self, commit: &CommitId, path: &str) -> Result<Option<String>> {
        if path.contains('\n') {
            return Ok(None);
        }
        if self.blobs.is_none() {
            let mut child = Command::new("git")
                .args(["cat-file", "--batch"])
                .current_dir(&self.path)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::null())
                .spawn()?;
            let stdin = child.stdin.take().expect("piped stdin");
            let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
            self.blobs = Some(BlobReader { child, stdin, stdout });
        }
        let reader = self.blobs.as_mut().expect("initialized above");
        writeln!(reader.stdin, "{commit}:{path}")?;
        reader.stdin.flush()?;

        let mut header = String::new();
        reader.stdout.read_line(&mut header)?;
        let header = header.trim_end();
        if header.ends_with(" missing") || header.ends_with(" ambiguous") {
            return Ok(None);
        }
        let mut fields = header.split(' ');
        let _oid = fields.next();
        let kind = fields.next().unwrap_or_default();
        let size: usize = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| Error::Git {
            command: "cat-file --batch".into(),
            stderr: format!("unexpected header `{header}`"),
        })?;
        let mut buf = vec![0u8; size + 1];
        reader.stdout.read_exact(&mut buf)?;
        buf.pop();
        if kind != "blob" {
            return Ok(None);
        }
        Ok(Some(String::from_utf8_lossy(&buf).into_owned()))
    }
}
