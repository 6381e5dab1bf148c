//! Label modules by the median-change rule and write the feature table as CSV.
//!
//! `cargo run --example build_dataset`

use granite::dataset::write_csv;
use granite::experiment::mine_repository;
use granite::modules::ModuleKind;

fn main() -> granite::Result<()> {
    let dir = tempfile::tempdir()?;
    let fixture = granite::fixture::build_fixture(dir.path())?;
    let mined = mine_repository(&fixture.path, "v*")?;
    for kind in [ModuleKind::Class, ModuleKind::Method] {
        let ds = mined.releases[0].dataset(kind)?;
        let (neg, pos) = ds.label_counts();
        eprintln!("{kind}: {} rows, {pos} change-prone, {neg} not", ds.rows.len());
        write_csv(&ds, std::io::stdout().lock())?;
    }
    Ok(())
}
