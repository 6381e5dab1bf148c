//! Minimal line-level diffing.
//!
//! Churn is the size of a shortest edit script made of whole-line insertions
//! and deletions (no substitutions), which is `|a| + |b| - 2 * LCS(a, b)`.
//! Whitespace and comments are compared verbatim, as `git diff` does.

use std::collections::HashMap;

/// Added and deleted line counts between two versions of a text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LineChurn {
    pub added: usize,
    pub deleted: usize,
}

impl LineChurn {
    pub fn total(self) -> usize {
        self.added + self.deleted
    }
}

impl std::ops::Add for LineChurn {
    type Output = LineChurn;

    fn add(self, rhs: LineChurn) -> LineChurn {
        LineChurn {
            added: self.added + rhs.added,
            deleted: self.deleted + rhs.deleted,
        }
    }
}

/// Split a blob into lines the way the diff sees them.
pub fn split_lines(text: &str) -> Vec<String> {
    text.lines().map(str::to_owned).collect()
}

/// Length of a longest common subsequence of two line sequences.
pub fn lcs_len<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let (a, b) = intern(a, b);
    let prefix = a.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[prefix..], &b[prefix..]);
    let suffix = a.iter().rev().zip(b.iter().rev()).take_while(|(x, y)| x == y).count();
    let (a, b) = (&a[..a.len() - suffix], &b[..b.len() - suffix]);

    if a.is_empty() || b.is_empty() || common_line_bound(a, b) == 0 {
        return prefix + suffix;
    }
    let d = myers_distance(a, b);
    prefix + suffix + (a.len() + b.len() - d) / 2
}

/// Added plus deleted lines of a minimal line diff from `old` to `new`.
pub fn line_churn<S: AsRef<str>>(old: &[S], new: &[S]) -> LineChurn {
    let lcs = lcs_len(old, new);
    LineChurn {
        added: new.len() - lcs,
        deleted: old.len() - lcs,
    }
}

/// Line-based similarity ratio `2 * LCS / (|a| + |b|)`; two empty inputs are
/// identical.
pub fn similarity<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    2.0 * lcs_len(a, b) as f64 / total as f64
}

/// Upper bound on `similarity(a, b)` that is cheap to evaluate; used to prune
/// rename candidates before running the full diff.
pub fn similarity_upper_bound<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    let total = a.len() + b.len();
    if total == 0 {
        return 1.0;
    }
    let (ia, ib) = intern(a, b);
    2.0 * common_line_bound(&ia, &ib) as f64 / total as f64
}

fn intern<'a, S: AsRef<str>>(a: &'a [S], b: &'a [S]) -> (Vec<u32>, Vec<u32>) {
    let mut ids: HashMap<&'a str, u32> = HashMap::new();
    let mut out = (Vec::with_capacity(a.len()), Vec::with_capacity(b.len()));
    for (side, lines) in [(&mut out.0, a), (&mut out.1, b)] {
        for line in lines {
            let next = ids.len() as u32;
            side.push(*ids.entry(line.as_ref()).or_insert(next));
        }
    }
    out
}

/// Multiset intersection size, an upper bound on the LCS length.
fn common_line_bound(a: &[u32], b: &[u32]) -> usize {
    let mut counts: HashMap<u32, isize> = HashMap::new();
    for &x in a {
        *counts.entry(x).or_default() += 1;
    }
    let mut common = 0;
    for &y in b {
        if let Some(c) = counts.get_mut(&y) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    common
}

/// Number of insertions plus deletions in a shortest edit script (Myers'
/// greedy O((N+M)D) forward search).
fn myers_distance(a: &[u32], b: &[u32]) -> usize {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max = (n + m) as usize;
    let offset = max as isize + 1;
    let mut v = vec![0isize; 2 * max + 3];
    for d in 0..=max as isize {
        let mut k = -d;
        while k <= d {
            let idx = (k + offset) as usize;
            let mut x = if k == -d || (k != d && v[idx - 1] < v[idx + 1]) {
                v[idx + 1]
            } else {
                v[idx - 1] + 1
            };
            let mut y = x - k;
            while x < n && y < m && a[x as usize] == b[y as usize] {
                x += 1;
                y += 1;
            }
            v[idx] = x;
            if x >= n && y >= m {
                return d as usize;
            }
            k += 2;
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(s: &str) -> Vec<&str> {
        s.split(' ').filter(|x| !x.is_empty()).collect()
    }

    fn dp_lcs(a: &[&str], b: &[&str]) -> usize {
        let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                t[i][j] = if a[i - 1] == b[j - 1] {
                    t[i - 1][j - 1] + 1
                } else {
                    t[i - 1][j].max(t[i][j - 1])
                };
            }
        }
        t[a.len()][b.len()]
    }

    #[test]
    fn identical_content_has_no_churn() {
        let a = lines("a b c");
        assert_eq!(line_churn(&a, &a).total(), 0);
    }

    #[test]
    fn two_added_one_deleted() {
        let old = lines("a b c");
        let new = lines("a x c y");
        let c = line_churn(&old, &new);
        assert_eq!((c.added, c.deleted), (2, 1));
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn whitespace_is_significant() {
        let old = vec!["int x = 1;"];
        let new = vec!["int x  = 1;"];
        assert_eq!(line_churn(&old, &new).total(), 2);
    }

    #[test]
    fn empty_side_counts_all_lines() {
        let b = lines("a b c d");
        let empty: Vec<&str> = vec![];
        assert_eq!(line_churn(&empty, &b).total(), 4);
        assert_eq!(line_churn(&b, &empty).total(), 4);
    }

    #[test]
    fn interleaved_edits_match_dp_oracle() {
        let old = lines("a b c d e f g h a b c");
        let new = lines("b a c x e g f h c a b");
        let lcs = dp_lcs(&old, &new);
        let c = line_churn(&old, &new);
        assert_eq!(c.total(), old.len() + new.len() - 2 * lcs);
        assert_eq!(lcs, 7);
        assert_eq!(c.total(), 8);
    }

    #[test]
    fn similarity_bounds() {
        let a = lines("a b c d e");
        let b = lines("a b c d x");
        assert!((similarity(&a, &b) - 0.8).abs() < 1e-12);
        assert!(similarity_upper_bound(&a, &b) >= similarity(&a, &b));
        let empty: Vec<&str> = vec![];
        assert_eq!(similarity(&empty, &empty), 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn seq() -> impl Strategy<Value = Vec<String>> {
            proptest::collection::vec("[abc]", 0..24)
        }

        proptest! {
            #[test]
            fn lcs_matches_dp(a in seq(), b in seq()) {
                let ar: Vec<&str> = a.iter().map(String::as_str).collect();
                let br: Vec<&str> = b.iter().map(String::as_str).collect();
                prop_assert_eq!(lcs_len(&ar, &br), dp_lcs(&ar, &br));
            }

            #[test]
            fn churn_is_symmetric(a in seq(), b in seq()) {
                prop_assert_eq!(line_churn(&a, &b).total(), line_churn(&b, &a).total());
            }

            #[test]
            fn churn_triangle(a in seq(), b in seq(), c in seq()) {
                let direct = line_churn(&a, &c).total();
                let via = line_churn(&a, &b).total() + line_churn(&b, &c).total();
                prop_assert!(direct <= via);
            }
        }
    }
}
