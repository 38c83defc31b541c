use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use bennett_core::report::{self, CommandOutput, Format, ReportError, RunConfig, EXIT_ERROR};

#[derive(Parser)]
#[command(name = "bennett", version, about = "Bennett-type deviation bounds: evaluation, inversion and validation")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides BENNETT_OUT_DIR.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a tail bound over a deviation grid.
    Eval,
    /// Invert a bound: confidence to radius.
    Invert,
    /// Figure data, beta intervals and monotonicity tables.
    Constants,
    /// Covering numbers and Rademacher complexity of a matrix.
    Complexity {
        /// Evaluation matrix CSV; overrides the config.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Monte Carlo validation of the tail bounds.
    Simulate {
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Radius-versus-N curves and slope fits.
    Rates,
}

fn run(cli: Cli) -> Result<i32, ReportError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let output: CommandOutput = match cli.command {
        Command::Eval => report::cmd_eval(&cfg)?,
        Command::Invert => report::cmd_invert(&cfg)?,
        Command::Constants => report::cmd_constants(&cfg)?,
        Command::Complexity { matrix } => {
            if matrix.is_some() {
                cfg.complexity.matrix = matrix;
            }
            report::cmd_complexity(&cfg)?
        }
        Command::Simulate { trials, workers } => {
            if let Some(t) = trials {
                cfg.simulate.trials = t;
            }
            if let Some(w) = workers {
                cfg.simulate.workers = w;
            }
            report::cmd_simulate(&cfg)?
        }
        Command::Rates => report::cmd_rates(&cfg)?,
    };
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let out_dir = report::resolve_out_dir(cli.out.as_deref());
    let paths = report::emit(&output, &cfg, &out_dir, format)?;
    for line in &output.summary {
        println!("{line}");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(output.status.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
