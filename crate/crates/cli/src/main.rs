use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod report;

use report::Failure;

/// Runs the worked stream processors, their law suites, the verified
/// optimizer and the TCP simulation. Reports go to stdout as JSON.
#[derive(Parser)]
#[command(name = "streamalg", version)]
struct Cli {
    /// Seed for every sampled check. Defaults to $STREAMALG_SEED, then a
    /// built-in constant.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Stream an input through a registered example.
    Run {
        example: String,
        /// Input as inline JSON in the example's input encoding.
        #[arg(long, conflicts_with = "input_file")]
        input: Option<String>,
        #[arg(long)]
        input_file: Option<PathBuf>,
        /// `whole`, `per-generator`, `random`, or chunk sizes like `2,1,3`.
        #[arg(long, default_value = "per-generator")]
        chunking: String,
        /// Where to write the JSON-lines trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the law suites.
    Laws {
        #[arg(long, default_value = "all")]
        scope: String,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        /// Add a non-associative "monoid" to the monoid suite.
        #[arg(long)]
        inject_broken: bool,
    },
    /// Check two serialized terms for equivalence.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[command(flatten)]
        corpus: commands::CorpusArgs,
    },
    /// Rewrite a serialized term with verified rules.
    Optimize {
        term: PathBuf,
        /// `greedy` or `exhaustive:K`.
        #[arg(long, default_value = "greedy")]
        strategy: String,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        /// Comma-separated rules; defaults to the standard set.
        #[arg(long)]
        rules: Option<String>,
        /// Splitter to partition with, checked by an independence certificate.
        #[arg(long)]
        certificate: Option<String>,
        /// Also try a rule that drops pure nodes; it must be rejected.
        #[arg(long)]
        inject_broken: bool,
        /// Skip verification of each step.
        #[arg(long)]
        trusted: bool,
        /// Where to write the optimized, annotated term.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        corpus: commands::CorpusArgs,
    },
    /// Simulate the retransmission protocol over lossy networks.
    Tcp {
        /// Number of messages, at most 8.
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// NetworkConfig JSON for the data direction.
        #[arg(long)]
        net1: Option<PathBuf>,
        /// NetworkConfig JSON for the request direction.
        #[arg(long)]
        net2: Option<PathBuf>,
        /// Seeds to sweep when no configs are given.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Largest deadline drawn for generated configs.
        #[arg(long, default_value_t = 4)]
        max_deadline: u64,
        #[arg(long, default_value_t = 1000)]
        max_rounds: u64,
    },
    /// Print the names of examples, rules and registered terms.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match commands::resolve_seed(cli.seed) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let out = match cli.cmd {
        Cmd::Run { example, input, input_file, chunking, out } => {
            commands::run(&example, input.as_deref(), input_file.as_deref(), &chunking, out.as_deref(), seed)
        }
        Cmd::Laws { scope, budget, inject_broken } => commands::laws(&scope, budget, inject_broken, seed),
        Cmd::Equiv { a, b, budget, corpus } => commands::equiv(&a, &b, budget, &corpus, seed),
        Cmd::Optimize { term, strategy, budget, rules, certificate, inject_broken, trusted, out, corpus } => {
            let o = commands::OptimizeArgs { strategy, budget, rules, certificate, inject_broken, trusted, out, corpus };
            commands::optimize(&term, &o, seed)
        }
        Cmd::Tcp { k, net1, net2, seeds, max_deadline, max_rounds } => {
            commands::tcp(k, net1.as_deref(), net2.as_deref(), seeds, max_deadline, max_rounds, seed)
        }
        Cmd::List => commands::list(),
    };
    match out {
        Ok(r) => {
            // A closed pipe downstream is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{}", r.to_json_string());
            if r.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => usage(e),
    }
}

fn usage(e: Failure) -> ExitCode {
    eprintln!("error: {}", e.0);
    ExitCode::from(2)
}
