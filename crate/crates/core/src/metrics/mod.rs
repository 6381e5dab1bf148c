//! Product metrics from a release snapshot and process metrics from the
//! history before it. Names and order are fixed; see `docs/metrics.md`.

mod process;
mod product;
pub mod scan;

use serde::Serialize;

use crate::modules::ModuleKind;

pub use process::{process_metrics, process_metrics_from_events, ProcessEvent};
pub use product::{
    class_product_metrics, class_product_metrics_indexed, method_product_metrics, snapshot_product_metrics,
    SnapshotIndex,
};

pub const CLASS_METRICS: [&str; 15] = [
    "loc",
    "nom",
    "nof",
    "wmc",
    "dit",
    "noc",
    "cbo",
    "rfc",
    "lcom",
    "max_nesting",
    "static_members",
    "public_members",
    "string_literals",
    "loops",
    "comparisons",
];

pub const METHOD_METRICS: [&str; 12] = [
    "loc",
    "cc",
    "params",
    "max_nesting",
    "local_vars",
    "invocations",
    "loops",
    "comparisons",
    "returns",
    "string_literals",
    "unique_identifiers",
    "fan_out",
];

pub const PROCESS_METRICS: [&str; 17] = [
    "commits",
    "authors",
    "churn",
    "added",
    "deleted",
    "max_churn",
    "mean_churn",
    "age_days",
    "days_since_last_change",
    "change_density",
    "active_weeks",
    "co_changes",
    "max_changes_30d",
    "first_change_offset_days",
    "churn_last_90d",
    "author_entropy",
    "dominant_author_ratio",
];

pub fn product_metric_names(kind: ModuleKind) -> &'static [&'static str] {
    match kind {
        ModuleKind::Class => &CLASS_METRICS,
        ModuleKind::Method => &METHOD_METRICS,
    }
}

/// Product + process column names for one granularity.
pub fn feature_names(kind: ModuleKind) -> Vec<String> {
    product_metric_names(kind)
        .iter()
        .chain(PROCESS_METRICS.iter())
        .map(|s| s.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductMetricVector {
    pub kind: ModuleKind,
    pub values: Vec<f64>,
}

impl ProductMetricVector {
    pub fn names(&self) -> &'static [&'static str] {
        product_metric_names(self.kind)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.names().iter().position(|n| *n == name).map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessMetricVector {
    pub values: Vec<f64>,
}

impl ProcessMetricVector {
    pub fn names(&self) -> &'static [&'static str] {
        &PROCESS_METRICS
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        PROCESS_METRICS.iter().position(|n| *n == name).map(|i| self.values[i])
    }
}
