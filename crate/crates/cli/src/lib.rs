//! Experiment harness around the kernel library: configures domains,
//! measures, and mollifiers; runs the dichotomy, recovery, Funk-Hecke, and
//! axiom experiments; writes `results.csv`, `plot_<experiment>.svg`, and
//! `config_resolved.json`.

pub mod config;
pub mod experiments;
pub mod report;
pub mod svg;

use std::path::{Path, PathBuf};

use config::{ExperimentConfig, ExperimentKind};
use experiments::run_experiment;

/// Failures sorted by exit code: configuration problems exit 2, numerical
/// failures 3, and `--assert` threshold failures 4.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    AssertFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::AssertFailed(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::AssertFailed(m) => write!(f, "acceptance threshold failed: {m}"),
        }
    }
}

/// Command-line option bundle after parsing.
pub struct Invocation {
    pub experiment: Option<ExperimentKind>,
    pub config_path: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub degrees: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub dump_moments: bool,
    pub assert_thresholds: bool,
}

/// Resolves the configuration from defaults, file, and flag overrides.
pub fn resolve_config(inv: &Invocation) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&inv.config_path, inv.experiment) {
        (Some(path), kind) => ExperimentConfig::load(path, kind)?,
        (None, Some(kind)) => ExperimentConfig::defaults(kind),
        (None, None) => {
            return Err(CliError::Config(
                "give an experiment name or a config file".into(),
            ))
        }
    };
    if let Some(out) = &inv.out_dir {
        cfg.out_dir = out.clone();
    }
    if let Some(degrees) = &inv.degrees {
        cfg.degrees = degrees.clone();
    }
    if let Some(seed) = inv.seed {
        cfg.seed = seed;
    }
    if inv.dump_moments {
        cfg.dump_moments = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one experiment and writes all artifacts. Returns the resolved
/// output directory.
pub fn run(inv: &Invocation) -> Result<PathBuf, CliError> {
    let cfg = resolve_config(inv)?;
    let out = run_experiment(&cfg)?;

    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
    let write = |name: &str, content: &str| -> Result<(), CliError> {
        let path = cfg.out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
    };

    let resolved = serde_json::to_string_pretty(&cfg)
        .map_err(|e| CliError::Config(e.to_string()))?;
    write("config_resolved.json", &(resolved + "\n"))?;
    write("results.csv", &report::write_csv(&out.rows))?;
    if let Some(chart) = &out.chart {
        write(&format!("plot_{}.svg", cfg.experiment.name()), &chart.render())?;
    }
    for (d, mm) in &out.moment_dumps {
        let mut buf = Vec::new();
        mm.write_csv(&mut buf)
            .map_err(|e| CliError::Config(e.to_string()))?;
        write(
            &format!("moments_d{d}.csv"),
            &String::from_utf8(buf).expect("csv is utf8"),
        )?;
    }

    for line in &out.summary {
        println!("{line}");
    }
    println!(
        "{}: wrote {} rows to {}",
        cfg.experiment.name(),
        out.rows.len(),
        cfg.out_dir.join("results.csv").display()
    );

    if let Some(failure) = out.failure {
        return Err(failure);
    }
    if inv.assert_thresholds {
        if out.assert_ok {
            println!("assert: PASS - {}", out.assert_detail);
        } else {
            return Err(CliError::AssertFailed(out.assert_detail));
        }
    } else {
        println!("check: {} - {}", if out.assert_ok { "PASS" } else { "FAIL" }, out.assert_detail);
    }
    Ok(cfg.out_dir.clone())
}

/// Parses a `--degrees 5,10,15` style list.
pub fn parse_degree_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad degree '{part}': {e}"))
        })
        .collect()
}

/// Convenience used by tests: run an experiment into a directory.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    let mut cfg = cfg.clone();
    cfg.out_dir = dir.to_path_buf();
    let inv = Invocation {
        experiment: Some(cfg.experiment),
        config_path: None,
        out_dir: None,
        degrees: None,
        seed: None,
        dump_moments: false,
        assert_thresholds: false,
    };
    // write the config to a temp file and go through the normal path so
    // tests exercise the same code as users
    let tmp = dir.join("config_in.json");
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(e.to_string()))?;
    std::fs::write(
        &tmp,
        serde_json::to_string_pretty(&cfg).map_err(|e| CliError::Config(e.to_string()))?,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;
    let inv = Invocation {
        config_path: Some(tmp),
        out_dir: Some(dir.to_path_buf()),
        ..inv
    };
    run(&inv).map(|_| ())
}
