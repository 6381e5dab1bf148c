use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use granite::config::ExperimentConfig;
use granite::dataset::label_change_prone;
use granite::eval::{
    auc_roc, classification_scores, confusion_counts, rank_by_score, top_k_change_ratio, top_k_cutoff, ChangeKind,
    ChangeSizes, PredictionScore, DEFAULT_K_VALUES,
};
use granite::experiment::{mine_repository, run_experiment};
use granite::modules::{ModuleId, ModuleKind};
use granite::report::emit_report;

#[derive(Parser)]
#[command(
    name = "granite",
    version,
    about = "Class- and method-level change-proneness experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Mine release pairs and print per-module change data as CSV.
    Mine {
        repo: PathBuf,
        #[arg(long, default_value = "*")]
        tags: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Effort-aware evaluation of an existing prediction file.
    Eval {
        /// CSV with module_id, score, loc, delta_release, delta_commit and an optional label.
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_K_VALUES)]
        k: Vec<usize>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRANITE_LOG", "info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, jobs, seed } => run(&config, jobs, seed),
        Command::Mine { repo, tags, output } => mine(&repo, &tags, output.as_deref()).map(|()| true),
        Command::Eval { predictions, k } => eval(&predictions, &k).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(config: &Path, jobs: usize, seed: Option<u64>) -> Result<bool> {
    let mut cfg = ExperimentConfig::from_file(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let results = run_experiment(&cfg, jobs)?;
    let written = emit_report(&results, &cfg.output_dir)?;
    log::info!("wrote {} files under {}", written.len(), cfg.output_dir.display());
    if results.all_failed() {
        log::error!("every repository failed");
        return Ok(false);
    }
    Ok(true)
}

fn mine(repo: &Path, tags: &str, output: Option<&Path>) -> Result<()> {
    let mined = mine_repository(repo, tags).with_context(|| format!("mining {}", repo.display()))?;
    let sink: Box<dyn Write> = match output {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "release",
        "kind",
        "module_id",
        "loc",
        "changes",
        "label",
        "delta_release",
        "delta_commit",
    ])?;
    for rel in &mined.releases {
        for kind in [ModuleKind::Class, ModuleKind::Method] {
            let counts = rel.counts(kind);
            let labels = if counts.is_empty() {
                BTreeMap::new()
            } else {
                label_change_prone(&counts)?
            };
            for m in rel.of_kind(kind) {
                w.write_record([
                    rel.pair.label(),
                    kind.to_string(),
                    m.def.id.to_string(),
                    m.loc().to_string(),
                    m.changes.to_string(),
                    labels[&m.def.id].to_string(),
                    m.sizes.delta_release.to_string(),
                    m.sizes.delta_commit.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    for (pair, why) in &mined.skipped {
        log::warn!("skipped {pair}: {why}");
    }
    Ok(())
}

#[derive(Deserialize)]
struct PredictionRow {
    module_id: String,
    score: f64,
    loc: usize,
    delta_release: usize,
    delta_commit: usize,
    #[serde(default)]
    label: Option<u8>,
}

fn eval(path: &Path, ks: &[usize]) -> Result<()> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let mut scores = Vec::new();
    let mut locs = BTreeMap::new();
    let mut sizes = BTreeMap::new();
    let mut labeled = Vec::new();
    for (i, row) in reader.deserialize::<PredictionRow>().enumerate() {
        let row = row.with_context(|| format!("row {}", i + 2))?;
        let id: ModuleId = row
            .module_id
            .parse()
            .map_err(|e| anyhow::anyhow!("row {}: {e}", i + 2))?;
        if locs.insert(id.clone(), row.loc).is_some() {
            bail!("duplicate module {id}");
        }
        sizes.insert(
            id.clone(),
            ChangeSizes {
                module: id.clone(),
                delta_release: row.delta_release,
                delta_commit: row.delta_commit,
            },
        );
        if let Some(l) = row.label {
            labeled.push((id.clone(), row.score, l));
        }
        scores.push(PredictionScore::new(id, row.score));
    }
    let ranking = rank_by_score(&scores, &locs)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["metric", "k", "value"])?;
    for &k in ks {
        w.write_record(["cutoff", &k.to_string(), &top_k_cutoff(&ranking, k).to_string()])?;
        for kind in ChangeKind::ALL {
            let v = top_k_change_ratio(&ranking, k, &sizes, kind).map_or(String::new(), |v| v.to_string());
            w.write_record([&format!("{}_ratio", kind.as_str()), &k.to_string(), &v])?;
        }
    }
    if !labeled.is_empty() {
        if labeled.len() != scores.len() {
            bail!("labels must be given for every row or none");
        }
        let universe = locs.keys().cloned().collect();
        let predicted = scores
            .iter()
            .filter(|s| s.predicted == 1)
            .map(|s| s.module.clone())
            .collect();
        let truth = labeled
            .iter()
            .filter(|(_, _, l)| *l == 1)
            .map(|(m, _, _)| m.clone())
            .collect();
        let mut s = classification_scores(&confusion_counts(&predicted, &truth, &universe));
        s.auc = auc_roc(&labeled.iter().map(|(_, p, l)| (*p, *l)).collect::<Vec<_>>());
        for (name, v) in [
            ("precision", Some(s.precision)),
            ("recall", Some(s.recall)),
            ("f1", Some(s.f1)),
            ("accuracy", Some(s.accuracy)),
            ("auc", s.auc),
        ] {
            w.write_record([name, "", &v.map_or(String::new(), |v| v.to_string())])?;
        }
    }
    w.flush()?;
    Ok(())
}
