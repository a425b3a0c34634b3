//! `gec-combine`: train, apply and evaluate black-box GEC system combination.
//!
//! Exit status: 0 on success, 1 on I/O failure, 2 on invalid input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gec_combine::{CombineConfig, Rounding};

#[derive(Parser, Debug)]
#[command(name = "gec-combine", version, about, propagate_version = true)]
struct Cli {
    /// Worker threads for per-sentence parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

fn parse_beta(s: &str) -> Result<f64, String> {
    let b: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if b > 0.0 && b.is_finite() {
        Ok(b)
    } else {
        Err(format!("beta must be > 0, got {s}"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let f: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if f > 0.0 && f < 1.0 {
        Ok(f)
    } else {
        Err(format!("fraction must lie in (0, 1), got {s}"))
    }
}

/// Options shared by every command that trains or scores.
#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Weight of recall in F-beta.
    #[arg(long, default_value_t = 0.5, value_parser = parse_beta)]
    beta: f64,
    /// Gold annotator id.
    #[arg(long, default_value_t = 0)]
    annotator: u32,
    /// Cells with fewer system edits on dev are always dropped.
    #[arg(long, default_value_t = 2)]
    min_samples: u64,
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep probability for cells that do not affect F: round (drop) or sample (0.5).
    #[arg(long, default_value = "round")]
    rounding: Rounding,
    /// Print machine-readable JSON instead of tables.
    #[arg(long, default_value_t = false)]
    json: bool,
}

impl RunArgs {
    fn config(&self, dev_name: &str) -> CombineConfig {
        CombineConfig {
            beta: self.beta,
            annotator: self.annotator,
            min_samples: self.min_samples,
            rounding: self.rounding,
            seed: self.seed,
            dev_name: dev_name.to_owned(),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract typed edits from original/corrected sentence files into M².
    Extract {
        /// Original sentences, one per line.
        #[arg(long)]
        orig: PathBuf,
        /// Corrected sentences, line-aligned with --orig.
        #[arg(long)]
        corrected: PathBuf,
        /// M² file to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Word list enabling the spelling type.
        #[arg(long)]
        dict: Option<PathBuf>,
    },
    /// Learn a selection policy for two systems on an annotated dev set.
    TrainPolicy {
        /// System A output as M².
        #[arg(long)]
        sys_a: PathBuf,
        /// System B output as M².
        #[arg(long)]
        sys_b: PathBuf,
        /// Annotated dev set as M².
        #[arg(long)]
        gold: PathBuf,
        /// Policy JSON to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Hold out this fraction of dev for reporting; train on the rest.
        #[arg(long, value_parser = parse_fraction)]
        holdout: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Merge two systems with a learned policy.
    ApplyPolicy {
        /// System A output as M².
        #[arg(long)]
        sys_a: PathBuf,
        /// System B output as M².
        #[arg(long)]
        sys_b: PathBuf,
        /// Policy JSON from train-policy.
        #[arg(long)]
        policy: PathBuf,
        /// File to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Seed for fractional keep probabilities.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Combine several systems pairwise, left to right.
    Combine {
        /// System M² files in combination order.
        #[arg(long, num_args = 2.., required = true)]
        systems: Vec<PathBuf>,
        /// Train on this dev set (writes one policy per step).
        #[arg(long, conflicts_with = "policies")]
        gold: Option<PathBuf>,
        /// Replay previously trained policies instead of training.
        #[arg(long, num_args = 1..)]
        policies: Vec<PathBuf>,
        /// Prefix for trained policy files: PREFIX.1.json, PREFIX.2.json, ...
        #[arg(long, requires = "gold")]
        policy_prefix: Option<String>,
        /// File to write.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Drop the error types on which one system hurts F on dev.
    Filter {
        /// System output as M².
        #[arg(long)]
        sys: PathBuf,
        /// Annotated dev set as M².
        #[arg(long)]
        gold: PathBuf,
        /// File to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the learned policy.
        #[arg(long)]
        policy_out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Precision, recall and F-beta of a hypothesis against gold, per type.
    Score {
        /// Hypothesis edits as M².
        #[arg(long)]
        hyp: PathBuf,
        /// Gold edits as M².
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Weight of recall in F-beta.
        #[arg(long, default_value_t = 0.5, value_parser = parse_beta)]
        beta: f64,
        /// Gold annotator id.
        #[arg(long, default_value_t = 0)]
        annotator: u32,
        /// Print machine-readable JSON instead of a table.
        #[arg(long, default_value_t = false)]
        json: bool,
    },
    /// Write the corrected sentences of one annotator of an M² file.
    Apply {
        /// Annotated corpus.
        #[arg(long)]
        m2: PathBuf,
        /// Annotator whose edits are applied.
        #[arg(long, default_value_t = 0)]
        annotator: u32,
        /// File to write.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Frequency-dictionary spellchecker.
    #[command(subcommand)]
    Spell(SpellCommand),
    /// Synthetic error generation.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand, Debug)]
enum SpellCommand {
    /// Count words of monolingual corpora into a TSV model.
    BuildModel {
        /// Monolingual corpora, whitespace-tokenized.
        #[arg(long, num_args = 1.., required = true)]
        corpus: Vec<PathBuf>,
        /// Dictionary, one word per line.
        #[arg(long)]
        dict: PathBuf,
        /// File to write.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Correct sentences from a file (or stdin) to a file (or stdout).
    Correct {
        /// Word-count model (word<TAB>count).
        #[arg(long)]
        model: PathBuf,
        /// Dictionary, one word per line.
        #[arg(long)]
        dict: PathBuf,
        /// Input sentences (default: stdin).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output file (default: stdout).
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Count below which a word is unknown.
        #[arg(long, default_value_t = 3)]
        known_min_count: u64,
        /// Count above which a word is a candidate correction.
        #[arg(long, default_value_t = 20)]
        candidate_min_count: u64,
    },
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    /// Measure the correction distribution of an annotated corpus.
    Measure {
        /// Annotated training corpus as M².
        #[arg(long)]
        train: PathBuf,
        /// Annotator whose edits are counted.
        #[arg(long, default_value_t = 0)]
        annotator: u32,
        /// File to write.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate PREFIX.src, PREFIX.trg and PREFIX.m2 from clean sentences.
    Generate {
        /// Clean sentences, one per line.
        #[arg(long)]
        pool: PathBuf,
        /// Distribution JSON from synth measure.
        #[arg(long)]
        dist: PathBuf,
        /// Number of pairs to generate.
        #[arg(short = 'n', long)]
        count: usize,
        /// Seed of the generation stream.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Correction draws per pair before giving up.
        #[arg(long, default_value_t = 1000)]
        max_attempts: usize,
        /// Output prefix.
        #[arg(short, long)]
        output: String,
    },
}

/// 1 when the root cause is an I/O failure, otherwise 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    let io = err.chain().any(|cause| {
        cause.is::<std::io::Error>()
            || cause
                .downcast_ref::<gec_combine::Error>()
                .is_some_and(gec_combine::Error::is_io)
    });
    if io {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Only fails if the pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
