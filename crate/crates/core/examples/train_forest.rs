//! Train a random forest on synthetic data and score held-out rows.
//!
//! `cargo run --example train_forest`

use granite::dataset::{FeatureRow, LabeledDataset};
use granite::forest::{predict_proba, train_random_forest, ForestParams};
use granite::modules::{ModuleId, ModuleKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blobs(n: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let centre = 1.5 * f64::from(label);
            FeatureRow {
                module: ModuleId::class("Gen.java", format!("C{i}")),
                features: (0..4).map(|_| centre + rng.gen_range(-1.0..1.0)).collect(),
                label,
                loc: 10,
            }
        })
        .collect();
    LabeledDataset {
        release: "synthetic".into(),
        granularity: ModuleKind::Class,
        feature_names: (0..4).map(|i| format!("f{i}")).collect(),
        rows,
    }
}

fn main() -> granite::Result<()> {
    let model = train_random_forest(&blobs(200, 1), &ForestParams::with_seed(42))?;
    let test = blobs(20, 2);
    let mut correct = 0;
    for row in &test.rows {
        let p = predict_proba(&model, &row.features)?;
        correct += usize::from(u8::from(p >= 0.5) == row.label);
        println!("{:<24} label={} p={p:.2}", row.module.to_string(), row.label);
    }
    println!("{correct}/{} correct with {} trees", test.rows.len(), model.trees.len());
    Ok(())
}
