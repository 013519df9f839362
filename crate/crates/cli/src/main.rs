//! Command-line front end. Exit codes: 0 on success, 2 for usage or
//! configuration problems, 3 for numerical failures.

use clap::{Args, Parser, Subcommand};
use gridbp_cli::commands::{self, CrossvalOutcome, TrainOutcome};
use gridbp_cli::prepare::{load_config, Overrides};
use gridbp_cli::CliError;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "gridbp", version, about = "Spreadsheet-semantics network trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration file (key = value lines)
    #[arg(long)]
    config: PathBuf,

    /// Seed or comma-separated list of seeds; defaults to the config's seed
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,

    /// Override the config's epoch count
    #[arg(long)]
    epochs: Option<u32>,

    /// Train for exactly this many passes instead of whole epochs
    #[arg(long)]
    iterations: Option<u32>,

    /// Override the config's data file
    #[arg(long)]
    data: Option<PathBuf>,

    /// First N records train; the rest are held out
    #[arg(long)]
    split: Option<usize>,

    /// Column scaling applied before training
    #[arg(long, value_parser = ["zscore", "range"])]
    scaler: Option<String>,

    /// Directory for output files
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: None,
            epochs: self.epochs,
            iterations: self.iterations,
            data: self.data.clone(),
            split: self.split,
            scaler: self.scaler.clone(),
        }
    }

    /// Seeds to run: the flag list, or the config's own seed.
    fn seeds(&self) -> Result<Vec<u64>, CliError> {
        if self.seed.is_empty() {
            Ok(vec![load_config(&self.config, &self.overrides())?.seed])
        } else {
            Ok(self.seed.clone())
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile the training workbook and write the script and its layout
    Build(RunArgs),
    /// Train one network per seed, reporting errors at every epoch boundary
    Train(RunArgs),
    /// Train against a held-out sample, keeping the best weights seen
    Crossval(RunArgs),
    /// Closed-form linear least-squares baseline on the same data
    Regress(RunArgs),
    /// Print a range of a saved workbook script
    Dump {
        /// Workbook script file, as written by `build`
        #[arg(long)]
        workbook: PathBuf,

        /// What to print for each cell
        #[arg(long, default_value = "values", value_parser = ["values", "formulas"])]
        what: String,

        /// Defined name, or an A1-style range on the first sheet
        #[arg(long)]
        name: String,
    },
    /// Run the built-in fixture checks
    Selftest,
}

fn describe_train(out: &TrainOutcome, out_dir: &PathBuf) -> String {
    let mut s = String::new();
    for run in &out.runs {
        let last = run.rows.last().unwrap();
        let _ = writeln!(
            s,
            "seed {}: epoch {} in_err {:.6} out_err {:.6} ema {:.6}",
            run.seed, last.epoch, last.in_err, last.out_err, last.ema
        );
    }
    let _ = writeln!(s, "wrote reports under {}", out_dir.display());
    s
}

fn describe_crossval(out: &CrossvalOutcome, out_dir: &PathBuf) -> String {
    let mut s = String::new();
    for (i, run) in out.runs.iter().enumerate() {
        let _ = writeln!(
            s,
            "seed {}: best epoch {} out_err {:.6}",
            run.seed, out.best_epoch[i], out.best_out[i]
        );
    }
    let _ = writeln!(s, "wrote reports under {}", out_dir.display());
    s
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Build(args) => {
            let mut ov = args.overrides();
            ov.seed = args.seed.first().copied();
            commands::cmd_build(&args.config, &ov, &args.out_dir)
        }
        Command::Train(args) => {
            let seeds = args.seeds()?;
            let out = commands::cmd_train(&args.config, &args.overrides(), &seeds, &args.out_dir)?;
            Ok(describe_train(&out, &args.out_dir))
        }
        Command::Crossval(args) => {
            let seeds = args.seeds()?;
            let out =
                commands::cmd_crossval(&args.config, &args.overrides(), &seeds, &args.out_dir)?;
            Ok(describe_crossval(&out, &args.out_dir))
        }
        Command::Regress(args) => {
            let out = commands::cmd_regress(&args.config, &args.overrides(), &args.out_dir)?;
            let mut s = String::new();
            for (t, name) in out.target_names.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{name}: in_err {:.6} out_err {:.6}",
                    out.in_err[t], out.out_err[t]
                );
            }
            let _ = writeln!(s, "wrote {}", args.out_dir.join("regress.csv").display());
            Ok(s)
        }
        Command::Dump { workbook, what, name } => commands::cmd_dump(&workbook, &what, &name),
        Command::Selftest => commands::cmd_selftest(),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
