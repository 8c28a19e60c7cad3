use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shimura_core::config::CACHE_ENV;
use shimura_core::{cmd_basis, cmd_brandt, cmd_localfactors, cmd_theta, Error, JobConfig, OutputFormat, Selector};
use shimura_core::{EXIT_CONFIG, EXIT_OK};

/// Weight-3/2 basis forms attached to a rational newform of odd square-free level.
#[derive(Parser)]
#[command(name = "shimura", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// The basis {g, h} with metadata.
    Basis(Common),
    /// Brandt matrices B(1), ..., B(bound) of the selected algebra.
    Brandt(Common),
    /// Theta series of the ideal classes.
    Theta(Common),
    /// Diagnostic local factor table K1, K2.
    Localfactors {
        #[command(flatten)]
        common: Common,
        /// Inclusive range `a..b` of n.
        #[arg(long, default_value = "2..23")]
        range: String,
    },
}

#[derive(Args)]
struct Common {
    /// Odd square-free level N >= 3.
    #[arg(long)]
    level: u64,
    /// Eigenspace index (e.g. `0`) or eigenvalue prefix (e.g. `2=-1,3=-1,5=1`).
    #[arg(long)]
    selector: Option<String>,
    /// Produce coefficients a_n for 1 <= n <= prec.
    #[arg(long, default_value_t = 100)]
    prec: u64,
    /// `json` or `text`.
    #[arg(long, default_value = "json")]
    format: String,
    /// Directory for cached Brandt data.
    #[arg(long, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Newform eigenvalues `p b_p` per line, or a JSON object.
    #[arg(long)]
    newform_file: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn config(&self) -> Result<JobConfig, Error> {
        let selector = self.selector.as_deref().map(str::parse::<Selector>).transpose()?;
        Ok(JobConfig {
            level: self.level,
            selector,
            precision: self.prec,
            format: self.format.parse::<OutputFormat>()?,
            cache_dir: self.cache_dir.clone(),
            newform_file: self.newform_file.clone(),
        })
    }
}

fn parse_range(s: &str) -> Result<(u64, u64), Error> {
    let bad = || Error::InvalidConfig(format!("range {s:?} is not of the form a..b"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn run(cli: Cli) -> Result<String, Error> {
    let common = match &cli.command {
        Command::Basis(c) | Command::Brandt(c) | Command::Theta(c) => c,
        Command::Localfactors { common, .. } => common,
    };
    if let Some(n) = common.workers {
        if n == 0 {
            return Err(Error::InvalidConfig("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    let config = common.config()?;
    match &cli.command {
        Command::Basis(_) => cmd_basis(&config),
        Command::Brandt(_) => cmd_brandt(&config),
        Command::Theta(_) => cmd_theta(&config),
        Command::Localfactors { range, .. } => {
            let (a, b) = parse_range(range)?;
            cmd_localfactors(&config, a, b)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::from(EXIT_OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
