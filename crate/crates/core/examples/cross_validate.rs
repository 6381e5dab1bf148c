//! Stratified k-fold cross-validation with per-fold under-sampling and
//! normalisation, on one release's method-level dataset.
//!
//! `cargo run --example cross_validate`

use granite::experiment::mine_repository;
use granite::forest::{cross_validate, ForestParams};
use granite::modules::ModuleKind;

fn main() -> granite::Result<()> {
    let dir = tempfile::tempdir()?;
    let fixture = granite::fixture::build_fixture(dir.path())?;
    let mined = mine_repository(&fixture.path, "v*")?;
    let ds = mined.releases[0].dataset(ModuleKind::Method)?;
    let cv = cross_validate(&ds, 3, &ForestParams::with_seed(7))?;
    for f in &cv.folds {
        println!(
            "fold {}: {} rows, f1={:.3} auc={:?}",
            f.fold, f.test_rows, f.scores.f1, f.scores.auc
        );
    }
    println!("skipped folds: {:?}", cv.skipped_folds);
    println!("mean: {:?}", cv.mean_scores());
    Ok(())
}
