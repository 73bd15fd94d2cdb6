use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mqsp_core::document::fixtures;
use mqsp_core::{
    check_necessary, random_sequence, synthesize, AngleMode, NecessaryReport, OracleConfig,
    PolyPairDocument, PqPair, SequenceDocument, DEFAULT_TOLERANCE,
};

#[derive(Parser)]
#[command(
    name = "mqsp",
    version,
    about = "Decide and synthesize multivariable QSP sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a pair is realizable in the given number of steps.
    Decide(PairArgs),
    /// Recover phases and indices for a realizable pair.
    Synthesize {
        #[command(flatten)]
        pair: PairArgs,
        /// Where to write the sequence document; stdout if omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Evaluate a sequence and compare it with a pair.
    Verify {
        pair: PathBuf,
        sequence: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Write a random sequence and the pair it produces.
    Gen {
        #[arg(long)]
        variables: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "continuous")]
        angle_mode: AngleMode,
        /// Pair document path.
        #[arg(long, short)]
        output: PathBuf,
        /// Sequence document path.
        #[arg(long)]
        sequence_output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Report the necessary conditions for realizability.
    Check(PairArgs),
    /// Print or write a bundled pair.
    Fixture {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(fixtures::NAMES))]
        name: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PairArgs {
    input: PathBuf,
    #[arg(long, short = 'n')]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
}

fn read_pair(path: &Path, tol: f64) -> Result<PqPair> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc = PolyPairDocument::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))?;
    doc.to_pair(tol)
        .with_context(|| format!("in {}", path.display()))
}

fn check_tolerance(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        bail!("tolerance must be positive and finite, got {tol}");
    }
    Ok(())
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_report(report: &NecessaryReport) {
    println!(
        "necessary conditions (degrees {:?}, sum {}):",
        report.degrees, report.degree_sum
    );
    for (name, ok) in report.flags() {
        println!("  {name:<17} {ok}");
    }
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Decide(args) => {
            check_tolerance(args.tolerance)?;
            let pair = read_pair(&args.input, args.tolerance)?;
            let result = synthesize(&pair, args.steps, args.tolerance)?;
            for step in &result.trace.steps {
                println!("{step}");
            }
            print_report(&check_necessary(&pair, args.steps, args.tolerance)?);
            println!("constructible: {}", result.constructible);
            Ok(verdict(result.constructible))
        }
        Command::Synthesize { pair: args, output } => {
            check_tolerance(args.tolerance)?;
            let pair = read_pair(&args.input, args.tolerance)?;
            let result = synthesize(&pair, args.steps, args.tolerance)?;
            let Some(seq) = result.sequence.filter(|_| result.constructible) else {
                for step in &result.trace.steps {
                    eprintln!("{step}");
                }
                eprintln!("not constructible in {} steps", args.steps);
                return Ok(ExitCode::from(1));
            };
            write_or_print(
                output.as_deref(),
                &SequenceDocument::from_sequence(&seq).to_json(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            pair,
            sequence,
            tolerance,
        } => {
            check_tolerance(tolerance)?;
            let target = read_pair(&pair, tolerance)?;
            let text = fs::read_to_string(&sequence)
                .with_context(|| format!("reading {}", sequence.display()))?;
            let seq = SequenceDocument::from_json(&text)
                .and_then(|d| d.to_sequence())
                .with_context(|| format!("in {}", sequence.display()))?;
            if seq.variables() != target.variables() {
                bail!(
                    "sequence has {} variables, pair has {}",
                    seq.variables(),
                    target.variables()
                );
            }
            let deviation = seq
                .evaluate_with_tolerance(tolerance)?
                .max_deviation(&target)?;
            println!("max deviation: {deviation:.3e}");
            Ok(verdict(deviation <= tolerance))
        }
        Command::Gen {
            variables,
            steps,
            seed,
            angle_mode,
            output,
            sequence_output,
            tolerance,
        } => {
            check_tolerance(tolerance)?;
            let cfg = OracleConfig::new(variables, steps, seed, angle_mode)?;
            let seq = random_sequence(&cfg);
            let mut doc = PolyPairDocument::from_pair(&seq.evaluate_with_tolerance(tolerance)?);
            doc.name = Some(format!("oracle m={variables} n={steps}"));
            doc.source = Some(format!("seed {seed}, {angle_mode} angles"));
            fs::write(&output, doc.to_json())
                .with_context(|| format!("writing {}", output.display()))?;
            fs::write(
                &sequence_output,
                SequenceDocument::from_sequence(&seq).to_json(),
            )
            .with_context(|| format!("writing {}", sequence_output.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check(args) => {
            check_tolerance(args.tolerance)?;
            let pair = read_pair(&args.input, args.tolerance)?;
            let report = check_necessary(&pair, args.steps, args.tolerance)?;
            print_report(&report);
            Ok(verdict(report.all_ok()))
        }
        Command::Fixture { name, output } => {
            let doc = fixtures::by_name(&name).expect("name checked by the parser");
            write_or_print(output.as_deref(), &doc.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
