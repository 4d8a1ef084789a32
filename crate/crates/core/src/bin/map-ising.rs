use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use map_ising::config::{KeyValues, SweepConfig};
use map_ising::experiments::{
    self, run_analytic, run_boundaries, run_simulate, run_validation, write_analytic_csv, write_boundary_csv,
    write_simulation_csv,
};
use map_ising::Error;

const CSV_HELP: &str = "\
CSV columns (one header row, 9 significant digits, empty field = not applicable):
  analytic:   q,epsilon,J,h,m,on_boundary,f,c,v,theta,theta_over_ln2
  simulate:   the analytic columns, then n,trials and mean/standard-error pairs
              v_hat,c_hat,theta_hat,energy_per_site_hat,map_error,ml_error,
              v_witness,c_witness,theta_frustration_hat (each followed by *_se)
  boundaries: q,m,epsilon,J,h,f,theta,theta_over_ln2,c_below,v_below,c_above,v_above
On a boundary h = 2J/m, analytic c and v are those of regime m and theta includes
the frustrated-site contribution. *_hat columns average over all optimal paths;
*_witness columns use the single decoded path; theta_frustration_hat counts
frustrated sites along the field recursion.

Exit codes: 0 success, 1 usage or configuration error, 2 validation failure,
3 numerical or tie-ambiguity failure.";

#[derive(Parser)]
#[command(
    name = "map-ising",
    version,
    about = "MAP decoding of binary symmetric hidden Markov chains via the random-field Ising chain",
    after_help = CSV_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic f, c, v, theta over an epsilon grid.
    Analytic(SweepArgs),
    /// Monte Carlo Viterbi decoding over an epsilon grid.
    Simulate(SweepArgs),
    /// Run the identity suite; exit code 2 on any failure.
    Validate,
    /// Boundary and regular entropy tables for m = 1..7.
    Tables {
        #[arg(long, default_value_t = SweepConfig::DEFAULT_Q)]
        q: f64,
    },
    /// Boundary epsilons, entropies and the jumps of c and v.
    Boundaries {
        #[arg(long, default_value_t = SweepConfig::DEFAULT_Q)]
        q: f64,
        #[arg(long, default_value_t = 7)]
        m_max: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Flat key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hidden-chain flip probability.
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated error probabilities.
    #[arg(long, conflicts_with = "eps_range")]
    eps: Option<String>,
    /// Error probability grid start:stop:step.
    #[arg(long)]
    eps_range: Option<String>,
    /// Sequence length.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// auto, incommensurate or boundary:M.
    #[arg(long)]
    mode: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepArgs {
    fn resolve(&self) -> Result<SweepConfig, Error> {
        let mut kv = match &self.config {
            Some(path) => KeyValues::load(path)?,
            None => KeyValues::default(),
        };
        if let Some(list) = &self.eps {
            for k in ["eps_start", "eps_stop", "eps_step"] {
                kv.remove(k);
            }
            kv.set("eps", list.clone());
        }
        if let Some(range) = &self.eps_range {
            let parts: Vec<&str> = range.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidArgument(format!("eps range {range:?}: expected start:stop:step")));
            }
            kv.remove("eps");
            for (k, v) in ["eps_start", "eps_stop", "eps_step"].iter().zip(parts) {
                kv.set(k, v);
            }
        }
        let scalars = [
            ("q", self.q.map(|v| v.to_string())),
            ("n", self.n.map(|v| v.to_string())),
            ("trials", self.trials.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("mode", self.mode.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in scalars {
            if let Some(v) = v {
                kv.set(k, v);
            }
        }
        SweepConfig::from_key_values(&kv)
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Analytic(args) => {
            let cfg = args.resolve()?;
            let rows = run_analytic(&cfg)?;
            write_analytic_csv(open_output(cfg.out.as_ref())?, &rows)?;
        }
        Command::Simulate(args) => {
            let cfg = args.resolve()?;
            let rows = run_simulate(&cfg)?;
            write_simulation_csv(open_output(cfg.out.as_ref())?, &rows)?;
        }
        Command::Validate => {
            let report = run_validation()?;
            println!("{report}");
            if !report.passed() {
                eprintln!("validation failed:");
                for c in report.failures() {
                    eprintln!("  {c}");
                }
                return Ok(ExitCode::from(2));
            }
        }
        Command::Tables { q } => {
            print!("{}", experiments::tables(q)?);
        }
        Command::Boundaries { q, m_max, out } => {
            if m_max == 0 {
                return Err(Error::InvalidArgument("m-max must be at least 1".into()));
            }
            let rows = run_boundaries(q, m_max)?;
            write_boundary_csv(open_output(out.as_ref())?, &rows)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
