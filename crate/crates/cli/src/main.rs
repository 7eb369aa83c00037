mod commands;
mod input;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gradpre_core::logic::Caps;
use gradpre_core::theory::Budget;

use commands::{DeriveArgs, EvalArgs, PairArgs, PosetSource, Report};
use input::StateRef;

/// Behavioural preorders, modal formulas and graded derivations on finite
/// ordered transition systems.
#[derive(Parser)]
#[command(name = "gradpre", version)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Output::Text, global = true)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Args)]
struct PairOpts {
    /// bisim, sim, readysim, sync or ptrace.
    #[arg(long)]
    sem: String,
    /// Largest depth checked; defaults to the product of the state counts.
    #[arg(long)]
    depth: Option<usize>,
    /// Skip the monotonicity check on loaded systems.
    #[arg(long)]
    no_validate: bool,
    /// `file.json:state`.
    left: StateRef,
    right: StateRef,
}

impl PairOpts {
    fn args(&self) -> PairArgs {
        PairArgs {
            sem: self.sem.clone(),
            left: self.left.clone(),
            right: self.right.clone(),
            depth: self.depth,
            validate: !self.no_validate,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the left state refines the right one at each depth.
    Check(PairOpts),
    /// Evaluate a formula at a state.
    Eval {
        #[arg(long)]
        sem: String,
        /// HML, POS_HML, SYNC or PROB; defaults to the logic of the semantics.
        #[arg(long)]
        logic: Option<String>,
        /// Depth to evaluate at, for formulas without a fixed depth.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        no_validate: bool,
        state: StateRef,
        formula: String,
    },
    /// Find a formula true at the left state and not at the right one.
    Distinguish {
        #[command(flatten)]
        pair: PairOpts,
        #[arg(long)]
        logic: Option<String>,
        /// Largest formula size enumerated.
        #[arg(long, default_value_t = Caps::default().size)]
        size: usize,
        #[arg(long, default_value_t = Caps::default().depth)]
        enum_depth: usize,
        #[arg(long, default_value_t = Caps::default().max_formulas)]
        max_formulas: usize,
    },
    /// Search for a derivation of an inequation in a graded theory.
    Derive {
        /// jsl, jsl_down, jsl_sync, pt, subconvex, or a theory file.
        #[arg(long)]
        theory: String,
        /// Context such as `x<=y, z`.
        #[arg(long, default_value = "")]
        ctx: String,
        /// Comma-separated labels; defaults to the operations applied in the goal.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        /// Largest sum width of the builtin theories.
        #[arg(long, default_value_t = 2)]
        width: usize,
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long, default_value_t = Budget::default().max_terms)]
        max_terms: usize,
        #[arg(long, default_value_t = Budget::default().max_rounds)]
        max_rounds: usize,
        /// `lhs <= rhs : k` or `lhs = rhs : k`.
        goal: String,
    },
    /// Compare two subdistributions given as formal sums.
    Order {
        /// Poset file.
        #[arg(long, conflicts_with = "elements", required_unless_present = "elements")]
        poset: Option<PathBuf>,
        /// Inline poset such as `x<=y, z`.
        #[arg(long)]
        elements: Option<String>,
        left: String,
        right: String,
    },
}

fn run(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Check(p) => commands::check(&p.args()),
        Command::Eval { sem, logic, depth, no_validate, state, formula } => commands::eval(&EvalArgs {
            sem,
            logic: logic.as_deref(),
            state,
            formula,
            depth: *depth,
            validate: !no_validate,
        }),
        Command::Distinguish { pair, logic, size, enum_depth, max_formulas } => {
            let caps = Caps { depth: *enum_depth, size: *size, max_formulas: *max_formulas };
            commands::distinguish_cmd(&pair.args(), logic.as_deref(), caps)
        }
        Command::Derive { theory, ctx, labels, width, max_size, max_terms, max_rounds, goal } => {
            let budget =
                Budget { max_size: *max_size, max_terms: *max_terms, max_rounds: *max_rounds, ..Budget::default() };
            commands::derive(&DeriveArgs {
                theory: theory.clone(),
                labels: labels.clone(),
                width: *width,
                ctx: ctx.clone(),
                goal: goal.clone(),
                budget,
            })
        }
        Command::Order { poset, elements, left, right } => {
            let src = match (poset, elements) {
                (Some(p), _) => PosetSource::File(p.clone()),
                (None, Some(e)) => PosetSource::Inline(e.clone()),
                (None, None) => unreachable!("clap requires one of them"),
            };
            commands::order(&src, left, right)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            let body = match cli.output {
                Output::Text => report.text,
                Output::Json => serde_json::to_string_pretty(&report.json).expect("serializable") + "\n",
            };
            let _ = std::io::stdout().write_all(body.as_bytes());
            ExitCode::from(report.outcome.code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
