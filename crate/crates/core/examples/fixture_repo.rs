//! Build the scripted fixture repository and print its ground-truth ledger.
//!
//! `cargo run --example fixture_repo -- /tmp/granite-fixture`

use std::path::PathBuf;

fn main() -> granite::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("granite-fixture"));
    let fixture = granite::fixture::build_fixture(&dir)?;
    println!("{} first-parent commits in {}", fixture.chain.len(), dir.display());
    for rel in &fixture.releases {
        println!("\n{}..{} ({} commits)", rel.r_tag, rel.rprime_tag, rel.commits);
        println!("{:<70} {:>4} {:>3} {:>4} {:>4}", "module", "loc", "chg", "dRel", "dCom");
        for (id, t) in &rel.modules {
            println!(
                "{:<70} {:>4} {:>3} {:>4} {:>4}",
                id.to_string(),
                t.loc,
                t.changes,
                t.delta_release,
                t.delta_commit
            );
        }
    }
    Ok(())
}
