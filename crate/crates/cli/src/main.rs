//! Command-line front end: training, decoding, statistics, evaluation and
//! parameter sweeps.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Marks errors that come from bad invocations rather than bad data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(
    name = "genparse",
    version,
    about = "Beam search decoding for generative shift-reduce parsers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PosArg {
    Auto,
    Keep,
    Strip,
}

#[derive(Args, Debug, Clone)]
pub struct TreebankArgs {
    /// Bracketed treebank file
    #[arg(long)]
    pub treebank: PathBuf,
    /// Preterminal handling
    #[arg(long, value_enum, default_value_t = PosArg::Auto)]
    pub pos: PosArg,
    /// Words seen fewer times become the unknown word
    #[arg(long, default_value_t = 1)]
    pub min_count: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a count-based action scorer
    TrainScorer {
        #[command(flatten)]
        data: TreebankArgs,
        /// Context length in actions
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Additive smoothing weight
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a coarse Open-pruning model
    TrainPruner {
        #[command(flatten)]
        data: TreebankArgs,
        /// Context size c
        #[arg(long, default_value_t = 2)]
        context: usize,
        #[arg(long, default_value_t = 32)]
        embed_dim: usize,
        #[arg(long, default_value_t = 128)]
        hidden_dim: usize,
        #[arg(long, default_value_t = 0.05)]
        learning_rate: f64,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse sentences with a trained scorer
    Decode(commands::DecodeArgs),
    /// Cumulative Open-output statistics and lower bounds on p
    Stats {
        /// Treebank to analyse
        #[arg(long, conflicts_with = "table", required_unless_present = "table")]
        treebank: Option<PathBuf>,
        /// Read cumulative rows from a table instead of a treebank
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PosArg::Auto)]
        pos: PosArg,
        /// Context sizes, comma separated
        #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
        contexts: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        min_occurrences: usize,
        #[arg(long, default_value_t = 0.99)]
        coverage: f64,
        /// Denominator of p; defaults to the treebank's label count
        #[arg(long)]
        num_nonterminals: Option<usize>,
    },
    /// Labeled-bracket scores of predicted against gold trees
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, value_enum, default_value_t = PosArg::Auto)]
        pos: PosArg,
        /// Per-sentence TSV output
        #[arg(long)]
        per_sentence: Option<PathBuf>,
    },
    /// Decode and score a development set over a parameter grid
    Sweep(commands::SweepArgs),
    /// Sample a synthetic treebank
    Synth {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        min_words: usize,
        #[arg(long, default_value_t = 25)]
        max_words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the action sequence of every tree
    Linearize {
        #[command(flatten)]
        data: TreebankArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::TrainScorer {
            data,
            order,
            alpha,
            out,
        } => commands::train_scorer(&data, order, alpha, &out),
        Command::TrainPruner {
            data,
            context,
            embed_dim,
            hidden_dim,
            learning_rate,
            batch_size,
            epochs,
            seed,
            out,
        } => {
            let config = genparse::pruning::PruneTrainConfig {
                context,
                embed_dim,
                hidden_dim,
                learning_rate,
                batch_size,
                epochs,
                seed,
            };
            commands::train_pruner(&data, &config, &out)
        }
        Command::Decode(args) => commands::decode(&args),
        Command::Stats {
            treebank,
            table,
            pos,
            contexts,
            min_occurrences,
            coverage,
            num_nonterminals,
        } => commands::stats(
            treebank.as_deref(),
            table.as_deref(),
            pos,
            &contexts,
            min_occurrences,
            coverage,
            num_nonterminals,
        ),
        Command::Eval {
            pred,
            gold,
            pos,
            per_sentence,
        } => commands::eval(&pred, &gold, pos, per_sentence.as_deref()),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Synth {
            count,
            min_words,
            max_words,
            seed,
            out,
        } => commands::synth(count, min_words, max_words, seed, out.as_deref()),
        Command::Linearize { data } => commands::linearize(&data),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
