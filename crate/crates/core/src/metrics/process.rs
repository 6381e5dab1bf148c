use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::diff::LineChurn;
use crate::repo::{CommitId, CommitInfo};
use crate::tracker::ChangeHistory;

use super::{ProcessMetricVector, PROCESS_METRICS};

const DAY: f64 = 86_400.0;
const WEEK: i64 = 7 * 86_400;
const WINDOW_30D: i64 = 30 * 86_400;
const WINDOW_90D: i64 = 90 * 86_400;

/// One prior change with its commit metadata resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessEvent {
    pub time: i64,
    pub author: String,
    pub churn: LineChurn,
    /// The commit also changed another module of the same granularity.
    pub co_changed: bool,
}

/// Process metrics of one module.
///
/// `touched` maps each commit to the number of same-granularity modules it
/// changed. A commit missing from `commits` is dated at the release with an
/// empty author.
pub fn process_metrics(
    history: &ChangeHistory,
    commits: &HashMap<CommitId, CommitInfo>,
    release: &CommitId,
    touched: &HashMap<CommitId, usize>,
) -> ProcessMetricVector {
    let release_time = commits.get(release).map_or(0, |c| c.time);
    let time_of = |c: &CommitId| commits.get(c).map_or(release_time, |i| i.time);
    let events: Vec<ProcessEvent> = history
        .events
        .iter()
        .map(|e| ProcessEvent {
            time: time_of(&e.commit),
            author: commits.get(&e.commit).map(|i| i.author.clone()).unwrap_or_default(),
            churn: LineChurn {
                added: e.added,
                deleted: e.deleted,
            },
            co_changed: touched.get(&e.commit).is_some_and(|&n| n >= 2),
        })
        .collect();
    process_metrics_from_events(time_of(&history.birth_commit), release_time, &events)
}

pub fn process_metrics_from_events(birth_time: i64, release_time: i64, events: &[ProcessEvent]) -> ProcessMetricVector {
    let days = |secs: i64| secs.max(0) as f64 / DAY;
    let n = events.len();
    let churns: Vec<usize> = events.iter().map(|e| e.churn.total()).collect();
    let churn: usize = churns.iter().sum();
    let added: usize = events.iter().map(|e| e.churn.added).sum();
    let deleted: usize = events.iter().map(|e| e.churn.deleted).sum();

    let mut by_author: BTreeMap<&str, usize> = BTreeMap::new();
    for e in events {
        *by_author.entry(e.author.as_str()).or_insert(0) += 1;
    }
    let entropy = if by_author.len() <= 1 {
        0.0
    } else {
        -by_author
            .values()
            .map(|&c| {
                let p = c as f64 / n as f64;
                p * p.log2()
            })
            .sum::<f64>()
    };
    let dominant = by_author.values().max().map_or(0.0, |&c| c as f64 / n as f64);

    let mut times: Vec<i64> = events.iter().map(|e| e.time).collect();
    times.sort_unstable();
    let age = days(release_time - birth_time);
    let since_last = times.last().map_or(age, |&t| days(release_time - t));
    let first_offset = times.first().map_or(0.0, |&t| days(t - birth_time));
    let weeks: BTreeSet<i64> = times.iter().map(|t| t.div_euclid(WEEK)).collect();
    let mut max_30d = 0;
    let mut hi = 0;
    for lo in 0..times.len() {
        while hi < times.len() && times[hi] - times[lo] < WINDOW_30D {
            hi += 1;
        }
        max_30d = max_30d.max(hi - lo);
    }
    let recent: usize = events
        .iter()
        .filter(|e| release_time - e.time <= WINDOW_90D)
        .map(|e| e.churn.total())
        .sum();

    let values = vec![
        n as f64,
        by_author.len() as f64,
        churn as f64,
        added as f64,
        deleted as f64,
        churns.iter().copied().max().unwrap_or(0) as f64,
        if n == 0 { 0.0 } else { churn as f64 / n as f64 },
        age,
        since_last,
        if age > 0.0 { n as f64 / age } else { 0.0 },
        weeks.len() as f64,
        events.iter().filter(|e| e.co_changed).count() as f64,
        max_30d as f64,
        first_offset,
        recent as f64,
        entropy,
        dominant,
    ];
    debug_assert_eq!(values.len(), PROCESS_METRICS.len());
    ProcessMetricVector { values }
}
