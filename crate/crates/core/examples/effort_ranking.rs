//! Rank modules by predicted change-proneness and measure the change size
//! captured within LOC budgets.
//!
//! `cargo run --example effort_ranking`

use granite::eval::{rank_by_score, top_k_change_ratio, top_k_cutoff, ChangeKind, PredictionScore};
use granite::experiment::mine_repository;
use granite::forest::{cross_validate, ForestParams};
use granite::modules::ModuleKind;

fn main() -> granite::Result<()> {
    let dir = tempfile::tempdir()?;
    let fixture = granite::fixture::build_fixture(dir.path())?;
    let mined = mine_repository(&fixture.path, "v*")?;
    let release = &mined.releases[0];
    let ds = release.dataset(ModuleKind::Method)?;
    let cv = cross_validate(&ds, 3, &ForestParams::with_seed(1))?;
    let scores: Vec<PredictionScore> = cv.predictions.clone();
    let ranking = rank_by_score(&scores, &release.locs(ModuleKind::Method))?;
    let sizes = release.sizes(ModuleKind::Method);
    for m in &ranking.0 {
        println!("{:<62} score={:.2} loc={}", m.module.to_string(), m.score, m.loc);
    }
    for k in [10, 25, 50, 100] {
        let ratios: Vec<String> = ChangeKind::ALL
            .iter()
            .map(|&kind| format!("{}={:?}", kind.as_str(), top_k_change_ratio(&ranking, k, &sizes, kind)))
            .collect();
        println!("k={k}: l={} {}", top_k_cutoff(&ranking, k), ratios.join(" "));
    }
    Ok(())
}
