//! Paired Wilcoxon signed-rank test and Cliff's delta between class- and
//! method-level scores.
//!
//! `cargo run --example compare_granularities`

use granite::stats::compare;

fn main() -> granite::Result<()> {
    let class_f1 = [0.61, 0.58, 0.66, 0.52, 0.70, 0.63, 0.59, 0.55];
    let method_f1 = [0.71, 0.69, 0.64, 0.68, 0.77, 0.72, 0.70, 0.61];
    let r = compare(&class_f1, &method_f1)?;
    println!("p = {:.4} {}", r.p_value, r.significance_mark);
    println!("delta = {:.3} ({})", r.delta, r.magnitude);
    Ok(())
}
