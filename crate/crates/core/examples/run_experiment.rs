//! The whole pipeline on the fixture repository, writing a report directory.
//!
//! `cargo run --example run_experiment [-- <output-dir>]`

use granite::config::{ExperimentConfig, RepoConfig};
use granite::experiment::run_experiment;
use granite::report::emit_report;

fn main() -> granite::Result<()> {
    let dir = tempfile::tempdir()?;
    let fixture = granite::fixture::build_fixture(&dir.path().join("fixture"))?;
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| dir.path().join("report"), Into::into);
    let repo = RepoConfig {
        path: fixture.path,
        tag_filter: "v*".into(),
        name: Some("fixture".into()),
    };
    let mut cfg = ExperimentConfig::new(vec![repo], &out);
    cfg.folds = 3;
    cfg.forest.n_trees = 50;
    let results = run_experiment(&cfg, 0)?;
    for p in results.pairs() {
        println!(
            "{} {}: class f1={:.3} method f1={:.3} projected f1={:.3}",
            p.repo, p.release, p.class.direct.f1, p.method.direct.f1, p.projected.f1
        );
    }
    for path in emit_report(&results, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
