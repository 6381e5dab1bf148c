//! Split a Java source file into class and method modules.
//!
//! `cargo run --example extract_modules [-- File.java]`

use granite::modules::{extract_from_lines, module_loc};

const SAMPLE: &str = r#"package demo;

public class Account {
    private long balance;

    public void deposit(long amount) {
        if (amount > 0) {
            balance += amount;
        }
    }

    static class Audit {
        void log(String msg, java.util.List<String> sink) { sink.add(msg); }
    }
}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (path, text) = match std::env::args().nth(1) {
        Some(p) => (p.clone(), std::fs::read_to_string(&p)?),
        None => ("demo/Account.java".to_string(), SAMPLE.to_string()),
    };
    let lines: Vec<String> = text.lines().map(String::from).collect();
    for def in extract_from_lines(&path, &lines)? {
        println!(
            "{:<60} lines {:>3}-{:<3} loc {}",
            def.id.to_string(),
            def.span.0,
            def.span.1,
            module_loc(&def)
        );
    }
    Ok(())
}
