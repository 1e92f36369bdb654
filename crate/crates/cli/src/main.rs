//! Experiment runner: parses a config file, dispatches the named experiment,
//! writes deterministic CSV artifacts plus a run manifest.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical-convergence
//! failure, 1 unexpected I/O failure.

mod config;
mod experiments;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use config::{required_blocks, ExperimentConfig, EXPERIMENTS};
use experiments::RunOutput;

#[derive(Parser)]
#[command(
    name = "fewbody",
    version,
    about = "Coupling-threshold and spreading laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one named experiment from a config file
    Run {
        /// one of: twobody-threshold, mu-curve, wk-decomp, lemma3,
        /// green-bound, zabyv, threebody-scan, spreading
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        /// output directory (overrides `[output].dir`)
        #[arg(long)]
        out: Option<PathBuf>,
        /// rayon thread count (0 = default)
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// random seed (overrides the config seed)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate a config file without computing anything
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_error(&e))
        }
    }
}

/// Map failures onto the documented exit codes.
fn classify_error(e: &anyhow::Error) -> u8 {
    use fewbody_core::Error as CoreError;
    if let Some(core) = e.downcast_ref::<CoreError>() {
        return match core {
            CoreError::Domain(_) | CoreError::Range(_) | CoreError::Input(_) => 2,
            _ => 3,
        };
    }
    if e.downcast_ref::<std::io::Error>().is_some() {
        return 1;
    }
    // config parse and block errors are validation failures
    2
}

fn dispatch() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => validate(&config),
        Command::Run {
            experiment,
            config,
            out,
            threads,
            seed,
        } => run(&experiment, &config, out, threads, seed),
    }
}

fn read_config(path: &Path) -> anyhow::Result<(ExperimentConfig, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::Error::new(e).context(format!("cannot read {}", path.display())))?;
    let cfg = ExperimentConfig::parse(&text)?;
    Ok((cfg, text))
}

fn validate(path: &Path) -> anyhow::Result<ExitCode> {
    let (cfg, _) = read_config(path)?;
    let (errors, warnings) = cfg.validation_report();
    let mut missing = Vec::new();
    for exp in EXPERIMENTS {
        for block in required_blocks(exp) {
            if !cfg.has_block(block) {
                missing.push(format!("{exp}: missing [{block}] block"));
            }
        }
    }
    for w in &warnings {
        println!("warning: {w}");
    }
    for e in &errors {
        println!("error: {e}");
    }
    for m in &missing {
        println!("unavailable: {m}");
    }
    if errors.is_empty() && missing.is_empty() && warnings.is_empty() {
        println!("config ok: all experiments available");
    }
    if errors.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

fn run(
    experiment: &str,
    config_path: &Path,
    out_override: Option<PathBuf>,
    threads: usize,
    seed_override: Option<u64>,
) -> anyhow::Result<ExitCode> {
    if !EXPERIMENTS.contains(&experiment) {
        anyhow::bail!(
            "unknown experiment {experiment:?}; expected one of {}",
            EXPERIMENTS.join(", ")
        );
    }
    let (cfg, raw) = read_config(config_path)?;
    let (errors, warnings) = cfg.validation_report();
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("error: {e}");
        }
        anyhow::bail!("config validation failed with {} error(s)", errors.len());
    }
    for block in required_blocks(experiment) {
        if !cfg.has_block(block) {
            anyhow::bail!("{experiment}: missing [{block}] block");
        }
    }

    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    let seed = seed_override.or(cfg.seed).unwrap_or(0);
    let config_hash = {
        let mut h = Sha256::new();
        h.update(raw.as_bytes());
        hex_prefix(&h.finalize(), 16)
    };

    let out_dir = out_override
        .or_else(|| {
            cfg.output
                .as_ref()
                .and_then(|o| o.dir.as_ref().map(PathBuf::from))
        })
        .unwrap_or_else(|| PathBuf::from("out"));

    // basis cache lookup, keyed by the config hash
    let cache_dir = out_dir.join("cache");
    let cache_path = cache_dir.join(format!("basis-{config_hash}.tsv"));
    let cached_forms = std::fs::read_to_string(&cache_path).ok();

    let started = Instant::now();
    let output: RunOutput = match experiment {
        "twobody-threshold" => experiments::run_twobody_threshold(&cfg)?,
        "mu-curve" => experiments::run_mu_curve(&cfg)?,
        "wk-decomp" => experiments::run_wk_decomp(&cfg)?,
        "lemma3" => experiments::run_lemma3(&cfg)?,
        "green-bound" => experiments::run_green_bound(&cfg)?,
        "zabyv" => experiments::run_zabyv(&cfg, seed)?,
        "threebody-scan" => experiments::run_threebody_scan(&cfg, cached_forms)?,
        "spreading" => experiments::run_spreading(&cfg, cached_forms)?,
        _ => unreachable!(),
    };
    let wall_ms = started.elapsed().as_millis();

    // all computation succeeded; only now touch the filesystem
    std::fs::create_dir_all(&out_dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> std::io::Result<()> {
        for (name, content) in &output.files {
            let path = out_dir.join(name);
            std::fs::write(&path, content)?;
            written.push(path);
        }
        if let Some((_, content)) = &output.cache {
            std::fs::create_dir_all(&cache_dir)?;
            std::fs::write(&cache_path, content)?;
        }
        let manifest = format!(
            "experiment = {experiment}\nconfig_sha256_16 = {config_hash}\ntool = fewbody {}\n\
             seed = {seed}\nthreads = {threads}\nwall_ms = {wall_ms}\nartifacts = {}\n",
            env!("CARGO_PKG_VERSION"),
            output
                .files
                .iter()
                .map(|(n, _)| n.as_str())
                .collect::<Vec<_>>()
                .join(", "),
        );
        let manifest_path = out_dir.join(format!("{experiment}_manifest.txt"));
        std::fs::write(&manifest_path, manifest)?;
        written.push(manifest_path);
        Ok(())
    })();
    if let Err(e) = result {
        // remove partial outputs before reporting the failure
        for p in &written {
            let _ = std::fs::remove_file(p);
        }
        return Err(anyhow::Error::new(e).context("writing artifacts"));
    }
    for (name, _) in &output.files {
        println!("wrote {}", out_dir.join(name).display());
    }
    Ok(ExitCode::SUCCESS)
}

fn hex_prefix(bytes: &[u8], chars: usize) -> String {
    let mut s = String::with_capacity(chars);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
        if s.len() >= chars {
            break;
        }
    }
    s.truncate(chars);
    s
}
