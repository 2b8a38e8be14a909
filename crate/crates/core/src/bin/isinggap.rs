//! Command-line front end. All work happens in `isinggap::report`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isinggap::report::{self, Command, Format, RunConfig};
use isinggap::Temperature;

#[derive(Parser)]
#[command(
    name = "isinggap",
    version,
    about = "Exact small-lattice checks of Ising Gibbs-sampler eigenvalue bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues of the kernel (dense, or Lanczos with --iterative).
    Spectrum(Common),
    /// Exact kappa, spectrum and every closed-form bound, with verdicts.
    Bounds(Common),
    /// f/g curves and both spectral-gap bounds over a temperature grid.
    Compare(Common),
    /// Full invariant suite with a verdict table.
    Verify(Common),
    /// Kernel CSV with JSON header, plus edge loads when n <= 3.
    Dump(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Lattice side length.
    #[arg(long, default_value_t = 2)]
    n: u32,
    /// Temperature; `inf` for 1/T = 0.
    #[arg(long = "T", default_value = "1")]
    temperature: Temperature,
    /// Temperature grid for compare: `start:stop:step` or a comma list.
    #[arg(long, default_value = "0.5:10:0.5")]
    grid: String,
    /// Lattice sides for compare, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
    sizes: Vec<u32>,
    /// Largest power k checked by verify.
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    /// Directory that receives every artifact of the run.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of what is printed to stdout (verify prints its table for csv).
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Seed for sampled path checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of sampled pairs when exhaustive path checks are too large.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Enumeration ceiling in states; defaults to $ISINGGAP_MAX_STATES or 65536.
    #[arg(long)]
    max_states: Option<u64>,
    /// bounds: closed forms only, no enumeration.
    #[arg(long)]
    formulas_only: bool,
    /// spectrum: extreme eigenvalues by Lanczos instead of a dense solve.
    #[arg(long)]
    iterative: bool,
}

fn config(command: Command, c: Common) -> Result<RunConfig, isinggap::Error> {
    let mut cfg = RunConfig::new(command, c.n, c.temperature);
    cfg.grid = report::parse_grid(&c.grid)?;
    cfg.sizes = c.sizes;
    cfg.horizon = c.horizon;
    cfg.out = c.out;
    cfg.format = match c.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    cfg.seed = c.seed;
    cfg.samples = c.samples;
    if let Some(m) = c.max_states {
        cfg.ceiling = m;
    }
    cfg.formulas_only = c.formulas_only;
    cfg.iterative = c.iterative;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Bounds(c) => (Command::Bounds, c),
        Cmd::Compare(c) => (Command::Compare, c),
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Dump(c) => (Command::Dump, c),
    };
    let outcome = config(command, common).and_then(|cfg| {
        let artifacts = report::run(&cfg)?;
        if let Some(dir) = &cfg.out {
            artifacts.write_files(dir)?;
        }
        Ok(artifacts)
    });
    let mut stdout = std::io::stdout().lock();
    match outcome {
        Ok(a) => {
            let _ = stdout.write_all(a.stdout.as_bytes());
            ExitCode::from(a.exit_code as u8)
        }
        Err(e) => {
            let _ = writeln!(stdout, "{}", report::error_json(&e));
            eprintln!("isinggap: {e}");
            ExitCode::from(report::exit_code_for(&e) as u8)
        }
    }
}
