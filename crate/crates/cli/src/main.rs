use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spectroscopy::ccs::DEFAULT_STATE_BOUND;
use spectroscopy::driver::{self, InputFormat, OutputFormat, Query, RunConfig};
use spectroscopy::hml::{in_notion, parse_formula};
use spectroscopy::spectroscopy::GameVariant;
use spectroscopy::spectrum::builtin_table;

/// Compare two processes across the weak spectrum of behavioral equivalences.
#[derive(Parser)]
#[command(name = "spectro", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide every notion at once, or a single one with --notion.
    Check {
        #[command(flatten)]
        pair: PairArgs,
        /// Only ask whether LEFT is preordered below RIGHT under this notion.
        #[arg(long)]
        notion: Option<String>,
        /// Attach distinguishing formulas for violated notions.
        #[arg(long)]
        certificates: bool,
    },
    /// Print the minimal attacker budgets in both directions.
    Budgets {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Cross-check the game against brute-force formula search (small inputs).
    Verify {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Price a formula and list the notions whose observations include it.
    FormulaPrice {
        formula: String,
        #[arg(long, value_enum, default_value_t = Format::Human)]
        format: Format,
    },
    /// Expand a CCS program into a transition list.
    Parse {
        input: PathBuf,
        /// Definitions to expand (default: all).
        roots: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
        max_states: usize,
    },
}

#[derive(Args)]
struct PairArgs {
    /// Transition list, or CCS program when the name ends in `.ccs`.
    input: PathBuf,
    left: String,
    right: String,
    #[arg(long, value_enum)]
    input_format: Option<InFormat>,
    #[arg(long, default_value = "full", value_parser = parse_variant)]
    variant: GameVariant,
    /// Comma-separated: divergence, completion.
    #[arg(long, value_delimiter = ',', value_enum)]
    preprocess: Vec<Mark>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Bound on the states of the loaded system.
    #[arg(long, default_value_t = DEFAULT_STATE_BOUND)]
    max_states: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum InFormat {
    TransitionList,
    Ccs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mark {
    Divergence,
    Completion,
}

fn parse_variant(s: &str) -> Result<GameVariant, String> {
    s.parse().map_err(|e| format!("{e}"))
}

impl PairArgs {
    fn config(self, query: Query, certificates: bool) -> RunConfig {
        RunConfig {
            input: self.input,
            input_format: self.input_format.map(|f| match f {
                InFormat::TransitionList => InputFormat::TransitionList,
                InFormat::Ccs => InputFormat::Ccs,
            }),
            left: self.left,
            right: self.right,
            variant: self.variant,
            divergence: self.preprocess.contains(&Mark::Divergence),
            completion: self.preprocess.contains(&Mark::Completion),
            query,
            certificates,
            output: match self.format {
                Format::Human => OutputFormat::Human,
                Format::Structured => OutputFormat::Structured,
            },
            max_states: self.max_states,
        }
    }
}

fn formula_price(text: &str, format: Format) -> Result<String, String> {
    let f = parse_formula(text).map_err(|e| e.to_string())?;
    let price = f.price();
    let notions: Vec<String> = builtin_table()
        .into_iter()
        .filter(|n| in_notion(&f, &n.coordinate))
        .map(|n| n.name)
        .collect();
    Ok(match format {
        Format::Human => format!(
            "formula: {f}\nprice: {price}\nobservable in: {}\n",
            if notions.is_empty() { "-".to_string() } else { notions.join(" ") }
        ),
        Format::Structured => {
            let doc = serde_json::json!({
                "schema": driver::SCHEMA,
                "formula": f.to_string(),
                "price": price.to_string(),
                "notions": notions,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("json value serializes"))
        }
    })
}

fn split(o: driver::Outcome) -> (String, i32) {
    let code = o.exit_code();
    (o.output, code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check {
            pair,
            notion,
            certificates,
        } => {
            let query = notion.map_or(Query::Spectrum, Query::Notion);
            driver::run(&pair.config(query, certificates)).map(split)
        }
        Command::Budgets { pair } => {
            driver::run(&pair.config(Query::Budgets, false)).map(split)
        }
        Command::Verify { pair } => {
            driver::run(&pair.config(Query::Verify, false)).map(split)
        }
        Command::FormulaPrice { formula, format } => match formula_price(&formula, format) {
            Ok(out) => {
                print!("{out}");
                return ExitCode::SUCCESS;
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        Command::Parse {
            input,
            roots,
            max_states,
        } => driver::dump_ccs(&input, &roots, max_states).map(|s| (s, 0)),
    };
    match result {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
