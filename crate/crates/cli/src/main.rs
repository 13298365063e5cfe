use clap::Parser;
use std::path::PathBuf;

use mcd_cli::config::ExperimentKind;
use mcd_cli::{parse_degree_list, run, Invocation};

/// Mollified Christoffel-Darboux kernel experiments: support location and
/// density recovery from moment data.
#[derive(Parser, Debug)]
#[command(name = "mcd", version, about)]
struct Args {
    /// Experiment: dichotomy | recover-box | recover-sphere |
    /// funk-hecke-check | axioms-check (optional when --config names one)
    experiment: Option<String>,

    /// JSON configuration file; fields override the experiment defaults
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (default from the config, or ./out)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Comma-separated degree list, e.g. 5,10,15
    #[arg(long)]
    degrees: Option<String>,

    /// Seed for randomly placed evaluation points
    #[arg(long)]
    seed: Option<u64>,

    /// Also write the moment matrices as moments_d<degree>.csv
    #[arg(long)]
    dump_moments: bool,

    /// Exit with code 4 when the experiment's built-in thresholds fail
    #[arg(long)]
    assert: bool,
}

fn main() {
    let args = Args::parse();
    let experiment = match args.experiment.as_deref().map(ExperimentKind::parse) {
        Some(Ok(kind)) => Some(kind),
        Some(Err(e)) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
        None => None,
    };
    let degrees = match args.degrees.as_deref().map(parse_degree_list) {
        Some(Ok(list)) => Some(list),
        Some(Err(e)) => {
            eprintln!("config error: {e}");
            std::process::exit(2);
        }
        None => None,
    };
    let inv = Invocation {
        experiment,
        config_path: args.config,
        out_dir: args.out,
        degrees,
        seed: args.seed,
        dump_moments: args.dump_moments,
        assert_thresholds: args.assert,
    };
    match run(&inv) {
        Ok(_) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
