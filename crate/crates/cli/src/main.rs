use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isospec_cli::{run, Command, RunConfig, Source};

#[derive(Parser)]
#[command(
    name = "isospec",
    version,
    about = "Isospectral skew pencils: certificates, flows and curvature reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare two maps: isospectrality, non-isometry, heat invariants
    Certify {
        #[command(flatten)]
        common: Common,
        /// Second map as a JSON file
        #[arg(long, conflicts_with = "catalog2")]
        input2: Option<PathBuf>,
        /// Second map as a catalog id, e.g. ex4.3@t=0.25
        #[arg(long)]
        catalog2: Option<String>,
    },
    /// Integrate the invariant-preserving flow from a map
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3, allow_hyphen_values = true)]
        dt: f64,
        #[arg(long, default_value_t = 1e-8)]
        drift_bound: f64,
        /// Write every state as JSON under <out>/states/
        #[arg(long)]
        states: bool,
    },
    /// Curvature report for one map
    Report {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Map as a JSON file {"m", "r", "components": [[row-major entries], ...]}
    #[arg(long, conflicts_with = "catalog")]
    input: Option<PathBuf>,
    /// Map as a catalog id: ex2.5, ex4.3 or lemma4.2, with optional @key=value,...
    #[arg(long)]
    catalog: Option<String>,
    #[arg(long, default_value = "su2xsu2-unit")]
    base: String,
    #[arg(long, default_value_t = 1e-8, allow_hyphen_values = true)]
    tol_iso: f64,
    #[arg(long, default_value_t = 1e-9, allow_hyphen_values = true)]
    tol_verdict: f64,
    /// Monte-Carlo samples for the c_Ric quadrature (at least 10000)
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; without it the main JSON goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn source(path: Option<PathBuf>, id: Option<String>) -> Option<Source> {
    path.map(Source::File).or(id.map(Source::Catalog))
}

impl Common {
    fn into_config(self, command: Command) -> RunConfig {
        RunConfig {
            input: source(self.input, self.catalog),
            base: self.base,
            tol_iso: self.tol_iso,
            tol_verdict: self.tol_verdict,
            samples: self.samples,
            seed: self.seed,
            out: self.out,
            ..RunConfig::new(command)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match cli.command {
        Cmd::Certify {
            common,
            input2,
            catalog2,
        } => RunConfig {
            input2: source(input2, catalog2),
            ..common.into_config(Command::Certify)
        },
        Cmd::Flow {
            common,
            t_end,
            dt,
            drift_bound,
            states,
        } => RunConfig {
            t_end,
            dt,
            drift_bound,
            write_states: states,
            ..common.into_config(Command::Flow)
        },
        Cmd::Report { common } => common.into_config(Command::Report),
    };
    ExitCode::from(run(&config) as u8)
}
