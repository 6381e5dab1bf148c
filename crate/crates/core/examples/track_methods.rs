//! Walk a first-parent chain and follow every module through renames,
//! printing each lineage's change events.
//!
//! `cargo run --example track_methods`

use granite::repo::Repo;
use granite::tracker::mine_history;

fn main() -> granite::Result<()> {
    let dir = tempfile::tempdir()?;
    let fixture = granite::fixture::build_fixture(dir.path())?;
    let mut repo = Repo::open(&fixture.path)?;
    let last = fixture.chain.len() - 1;
    let mined = mine_history(&mut repo, &fixture.chain, &[last])?;
    for lineage in &mined.lineages {
        let events: Vec<String> = lineage
            .events
            .iter()
            .map(|(i, c)| format!("#{i}:+{}-{}", c.added, c.deleted))
            .collect();
        let fate = lineage
            .death
            .map_or("alive".to_string(), |d| format!("removed at #{d}"));
        println!("{} (born #{}, {fate}) {}", lineage.id, lineage.birth, events.join(" "));
    }
    println!("\nidentities at the tip:");
    for (_, def) in &mined.checkpoints[&last] {
        println!("  {}", def.id);
    }
    Ok(())
}
