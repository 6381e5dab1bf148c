//! Paired two-sided Wilcoxon signed-rank test and Cliff's delta.

use std::fmt;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of nonzero differences handled by the exact test.
pub const EXACT_MAX_N: usize = 25;

/// Ranks of `values` (1-based), ties receiving their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided p-value. Zero differences are dropped; if none remain, p = 1.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::UnpairedSamples(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::EmptySample);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Ok(1.0);
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    if diffs.len() <= EXACT_MAX_N {
        Ok(exact_p(&ranks, w_plus))
    } else {
        Ok(normal_p(&abs, &ranks, w_plus))
    }
}

/// Exact null distribution of the positive rank sum over all 2^n sign
/// patterns, in doubled ranks so tied half-ranks stay integral.
fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut ways = vec![0u64; total + 1];
    ways[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            ways[s] += ways[s - r];
        }
    }
    let observed = (2.0 * w_plus).round() as i64;
    let extremity = (2 * observed - total as i64).abs();
    let hits: u64 = (0..=total)
        .filter(|&s| (2 * s as i64 - total as i64).abs() >= extremity)
        .map(|s| ways[s])
        .sum();
    (hits as f64 / 2f64.powi(doubled.len() as i32)).min(1.0)
}

/// Normal approximation with tie and continuity corrections.
fn normal_p(abs: &[f64], ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Magnitude {
    Negligible,
    Small,
    Medium,
    Large,
}

impl Magnitude {
    pub fn of(delta: f64) -> Magnitude {
        let d = delta.abs();
        if d < 0.147 {
            Magnitude::Negligible
        } else if d < 0.33 {
            Magnitude::Small
        } else if d < 0.474 {
            Magnitude::Medium
        } else {
            Magnitude::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Magnitude::Negligible => "negligible",
            Magnitude::Small => "small",
            Magnitude::Medium => "medium",
            Magnitude::Large => "large",
        }
    }
}

impl fmt::Display for Magnitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(#{a_i > b_j} - #{a_i < b_j}) / (|a| |b|)` with its magnitude band.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<(f64, Magnitude)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for &x in a {
        let below = sorted.partition_point(|&y| y < x);
        let not_above = sorted.partition_point(|&y| y <= x);
        let above = sorted.len() - not_above;
        dominance += below as i64 - above as i64;
    }
    let d = dominance as f64 / (a.len() * b.len()) as f64;
    Ok((d, Magnitude::of(d)))
}

pub fn significance_mark(p: f64) -> &'static str {
    if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        "n.s."
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatResult {
    pub p_value: f64,
    pub delta: f64,
    pub magnitude: Magnitude,
    pub significance_mark: &'static str,
}

/// Paired comparison of two granularities. `delta` is positive when the
/// method-level sample dominates the class-level one.
pub fn compare(class_level: &[f64], method_level: &[f64]) -> Result<StatResult> {
    let p = wilcoxon_signed_rank(method_level, class_level)?;
    let (delta, magnitude) = cliffs_delta(method_level, class_level)?;
    Ok(StatResult {
        p_value: p,
        delta,
        magnitude,
        significance_mark: significance_mark(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_samples() {
        assert_eq!(wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(
            cliffs_delta(&[1.0, 2.0], &[1.0, 2.0]).unwrap(),
            (0.0, Magnitude::Negligible)
        );
    }

    #[test]
    fn six_positive_differences() {
        let a = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let b = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        assert_eq!(wilcoxon_signed_rank(&a, &b).unwrap(), 0.03125);
        assert_eq!(wilcoxon_signed_rank(&b, &a).unwrap(), 0.03125);
    }

    #[test]
    fn dominance_is_large() {
        assert_eq!(cliffs_delta(&[5.0, 6.0], &[1.0, 2.0]).unwrap(), (1.0, Magnitude::Large));
    }

    #[test]
    fn bands() {
        assert_eq!(Magnitude::of(0.2), Magnitude::Small);
        assert_eq!(Magnitude::of(0.146), Magnitude::Negligible);
        assert_eq!(Magnitude::of(0.147), Magnitude::Small);
        assert_eq!(Magnitude::of(-0.33), Magnitude::Medium);
        assert_eq!(Magnitude::of(0.474), Magnitude::Large);
        assert_eq!(significance_mark(0.049), "*");
        assert_eq!(significance_mark(0.0099), "**");
        assert_eq!(significance_mark(0.05), "n.s.");
    }

    #[test]
    fn large_sample_uses_approximation() {
        let a: Vec<f64> = (0..40).map(|i| i as f64 + 1.0).collect();
        let b = vec![0.0; 40];
        let p = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(p > 0.0 && p < 1e-6);
        let mixed: Vec<f64> = (0..40)
            .map(|i| (if i % 2 == 0 { 1.0 } else { -1.0 }) * (i + 1) as f64)
            .collect();
        assert!(wilcoxon_signed_rank(&mixed, &b).unwrap() > 0.5);
    }

    #[test]
    fn errors() {
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
        assert!(wilcoxon_signed_rank(&[], &[]).is_err());
        assert!(cliffs_delta(&[], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn cliffs_is_antisymmetric(a in proptest::collection::vec(0i32..10, 1..15), b in proptest::collection::vec(0i32..10, 1..15)) {
            let a: Vec<f64> = a.into_iter().map(f64::from).collect();
            let b: Vec<f64> = b.into_iter().map(f64::from).collect();
            prop_assert_eq!(cliffs_delta(&a, &b).unwrap().0, -cliffs_delta(&b, &a).unwrap().0);
        }

        #[test]
        fn monotone_transform_keeps_delta(a in proptest::collection::vec(-5i32..5, 1..12), b in proptest::collection::vec(-5i32..5, 1..12)) {
            let f = |v: &Vec<i32>| v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>();
            let g = |v: &Vec<i32>| v.iter().map(|&x| f64::from(x).exp()).collect::<Vec<_>>();
            prop_assert_eq!(cliffs_delta(&f(&a), &f(&b)).unwrap(), cliffs_delta(&g(&a), &g(&b)).unwrap());
        }

        #[test]
        fn wilcoxon_is_symmetric(pairs in proptest::collection::vec((0i32..6, 0i32..6), 1..30)) {
            let a: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let b: Vec<f64> = pairs.iter().map(|p| f64::from(p.1)).collect();
            let p = wilcoxon_signed_rank(&a, &b).unwrap();
            prop_assert_eq!(p, wilcoxon_signed_rank(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
