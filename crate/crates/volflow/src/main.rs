use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use volflow::config::{Format, NRange, RunConfig, Tolerances};
use volflow::error::CliError;
use volflow::jets::{JetFile, RateReport};
use volflow::path::{Fig8Report, PathSpec};
use volflow::suites;

#[derive(Parser)]
#[command(
    name = "volflow",
    version,
    about = "Volume-rate identities, cross-checks and figure-eight deformation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cocycle, invariance, rate and Veronese identity checks.
    Verify(Common),
    /// Evaluate the volume rate of the jets in a JSON file.
    Rate(Common),
    /// Run a figure-eight deformation experiment from a JSON path file.
    Fig8(Common),
    /// Compare the rate against the Hodgson, BFG and DGG formulas.
    Compare(Common),
    /// Print the Veronese images of H, E, F and check the trace identity.
    Veronese(Common),
}

#[derive(Args)]
struct Common {
    /// Matrix size or inclusive range, e.g. `3` or `2..5`.
    #[arg(long)]
    n: Option<NRange>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Overrides every tolerance class.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

impl Common {
    fn config(&self, default_n: NRange) -> RunConfig {
        RunConfig {
            n: self.n.unwrap_or(default_n),
            trials: self.trials,
            seed: self.seed,
            tol: self.tol.map(Tolerances::uniform).unwrap_or_default(),
            input: self.input.clone(),
            output: self.output.clone(),
            format: self.format,
        }
    }
}

fn read_input(cfg: &RunConfig) -> Result<String, CliError> {
    let path = cfg.input.as_deref().ok_or_else(|| CliError::Usage("--input PATH is required".into()))?;
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn write_output(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

/// Renders the report, prints the summary to stderr and returns whether
/// every check passed.
fn emit(cfg: &RunConfig, json: String, csv: String, summary: String, pass: bool) -> Result<bool, CliError> {
    let body = match cfg.format {
        Format::Json => json + "\n",
        Format::Csv => csv,
    };
    write_output(cfg.output.as_deref(), &body)?;
    eprint!("{summary}");
    Ok(pass)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    suites::configure_threads()?;
    let all = NRange { lo: 2, hi: 5 };
    match cli.command {
        Command::Verify(c) => {
            let cfg = c.config(all);
            let r = suites::verify(&cfg)?;
            emit(&cfg, r.to_json(), r.to_csv(), r.summary(), r.pass())
        }
        Command::Compare(c) => {
            let cfg = c.config(all);
            let r = suites::compare(&cfg)?;
            emit(&cfg, r.to_json(), r.to_csv(), r.summary(), r.pass())
        }
        Command::Veronese(c) => {
            let cfg = c.config(NRange::single(3));
            let r = suites::veronese(&cfg)?;
            emit(&cfg, r.to_json(), r.to_csv(), r.summary(), r.pass())
        }
        Command::Rate(c) => {
            let cfg = c.config(all);
            cfg.validate()?;
            let file = JetFile::from_json(&read_input(&cfg)?)?;
            let r = RateReport::compute(&file, cfg.tol.solver)?;
            emit(&cfg, r.to_json(), r.to_csv(), r.summary(), r.pass)
        }
        Command::Fig8(c) => {
            let cfg = c.config(NRange::single(2));
            cfg.validate()?;
            let spec = PathSpec::from_json(&read_input(&cfg)?)?;
            let r = Fig8Report::run(&spec, cfg.tol.solver)?;
            emit(&cfg, r.to_json(), r.to_csv(), r.summary(), r.pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
