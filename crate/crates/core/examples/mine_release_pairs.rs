//! Resolve release tags into consecutive pairs and list the first-parent
//! commits each pair spans.
//!
//! `cargo run --example mine_release_pairs [-- <repo> <tag-glob>]`

use granite::repo::{resolve_release_pairs, Repo};

fn main() -> granite::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scratch = tempfile::tempdir()?;
    let (path, glob) = match args.as_slice() {
        [p, g, ..] => (p.into(), g.clone()),
        _ => (granite::fixture::build_fixture(scratch.path())?.path, "v*".to_string()),
    };
    let repo = Repo::open(&path)?;
    for pair in resolve_release_pairs(&repo, &glob)? {
        println!(
            "{}: {} commits, {} -> {}",
            pair.label(),
            pair.commits.len(),
            pair.r_commit.short(),
            pair.rprime_commit.short()
        );
    }
    Ok(())
}
