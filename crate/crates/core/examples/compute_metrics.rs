//! Product and process metrics for every module alive at a release.
//!
//! `cargo run --example compute_metrics`

use granite::experiment::mine_repository;

fn main() -> granite::Result<()> {
    let dir = tempfile::tempdir()?;
    let fixture = granite::fixture::build_fixture(dir.path())?;
    let mined = mine_repository(&fixture.path, "v*")?;
    let release = &mined.releases[0];
    println!("release {}", release.pair.r_tag);
    for m in &release.modules {
        let product = &release.product[&m.def.id];
        let process = &release.process[&m.def.id];
        let shown: Vec<String> = product
            .names()
            .iter()
            .zip(&product.values)
            .take(6)
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        println!(
            "{:<62} {} | commits={} churn={}",
            m.def.id.to_string(),
            shown.join(" "),
            process.get("commits").unwrap_or_default(),
            process.get("churn").unwrap_or_default()
        );
    }
    Ok(())
}
