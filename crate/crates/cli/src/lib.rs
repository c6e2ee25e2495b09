//! Library side of the `opint` binary: argument types, artifact writers and
//! the subcommand drivers.

pub mod args;
pub mod error;
pub mod output;

use std::fs;
use std::path::Path;
use std::time::Instant;

use opint_core::besov::{besov_report, BesovOptions};
use opint_core::function::CatalogSpec;
use opint_core::integrals::{f_of_pair, f_of_pair_sharp};
use opint_core::lab::{
    identity_experiment, lipschitz_experiment, p_above_2_scan, ExperimentConfig, ExperimentReport,
};
use opint_core::spectral::MatrixDoc;
use serde::Serialize;

pub use args::{Cli, Command, Common, Format};
pub use error::CliError;
pub use output::{emit_plot_data, Artifacts, FileEntry, PlotData, RunManifest, MANIFEST};

/// Reads a JSON or TOML (by extension) experiment configuration.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, "read config", e))?;
    let parsed = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => ExperimentConfig::from_toml(&text),
        _ => ExperimentConfig::from_json(&text),
    };
    let config = parsed?;
    config.validate()?;
    Ok(config)
}

struct Run {
    config_path: Option<String>,
    seed: u64,
    overrides: Vec<String>,
    lines: Vec<String>,
}

/// Manifest of a finished run plus human-readable summary lines.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub summary: Vec<String>,
}

fn apply_overrides(config: &mut ExperimentConfig, common: &Common) -> Vec<String> {
    let mut overrides = Vec::new();
    if let Some(seed) = common.seed {
        config.seed = seed;
        overrides.push(format!("seed={seed}"));
    }
    overrides
}

/// Runs one subcommand and writes its artifacts plus `manifest.json`.
pub fn run(command: &Command) -> Result<RunOutput, CliError> {
    let common = command.common();
    let started = Instant::now();
    let mut artifacts = Artifacts::create(&common.out)?;
    let pool = match common.threads {
        Some(0) => return Err(CliError::validation("cli", "threads: must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::validation("cli", format!("threads: {e}")))?,
        None => rayon::ThreadPoolBuilder::new()
            .build()
            .map_err(|e| CliError::validation("cli", format!("threads: {e}")))?,
    };
    let run = pool.install(|| dispatch(command, &mut artifacts))?;
    let manifest = RunManifest {
        command: command.name().to_string(),
        config_path: run.config_path,
        output_dir: common.out.display().to_string(),
        seed: run.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        threads: common.threads,
        overrides: run.overrides,
        wall_time: started.elapsed().as_secs_f64(),
        files: artifacts.into_files(),
    };
    let path = common.out.join(MANIFEST);
    let mut text = serde_json::to_vec_pretty(&manifest)?;
    text.push(b'\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, "write", e))?;
    Ok(RunOutput {
        manifest,
        summary: run.lines,
    })
}

fn dispatch(command: &Command, out: &mut Artifacts) -> Result<Run, CliError> {
    let format = command.common().format;
    match command {
        Command::VerifyIdentity { config, common } => {
            let mut cfg = load_config(config)?;
            let overrides = apply_overrides(&mut cfg, common);
            let report = identity_experiment(&cfg)?;
            if format.json() {
                out.write_json("identity.json", &report)?;
            }
            if format.csv() {
                out.write("identity.csv", &output::identity_csv(&report)?)?;
            }
            let lines = vec![format!(
                "{} identity checks, max relative residual {:e}",
                report.checks.len(),
                report.max_relative_residual
            )];
            Ok(Run {
                config_path: Some(config.display().to_string()),
                seed: cfg.seed,
                overrides,
                lines,
            })
        }
        Command::Lipschitz { config, common } | Command::Scan { config, common } => {
            let mut cfg = load_config(config)?;
            let overrides = apply_overrides(&mut cfg, common);
            let report = match command {
                Command::Scan { .. } => p_above_2_scan(&cfg)?,
                _ => lipschitz_experiment(&cfg)?,
            };
            write_experiment(out, &report, format)?;
            let mut lines = vec![format!(
                "{} trials ({} skipped), empirical constant {:e}",
                report.trials.len(),
                report.skipped,
                report.empirical_constant
            )];
            lines.extend(report.trends.iter().map(|t| {
                format!(
                    "p = {}: slope {:.4}, spread {:.4}{}",
                    t.p,
                    t.log_log_slope,
                    t.spread,
                    if t.grows {
                        ", grows with dimension"
                    } else {
                        ""
                    }
                )
            }));
            Ok(Run {
                config_path: Some(config.display().to_string()),
                seed: cfg.seed,
                overrides,
                lines,
            })
        }
        Command::Besov {
            functions,
            config,
            sup_grid,
            common,
        } => {
            let mut specs: Vec<CatalogSpec> = Vec::new();
            for (i, text) in functions.iter().enumerate() {
                specs.push(text.parse().map_err(|e| {
                    CliError::validation("function-model", format!("function[{i}]: {e}"))
                })?);
            }
            if let Some(path) = config {
                specs.extend(load_config(path)?.function_specs()?);
            }
            if specs.is_empty() {
                return Err(CliError::validation(
                    "cli",
                    "besov needs --function or --config",
                ));
            }
            if *sup_grid < 2 {
                return Err(CliError::validation("cli", "sup-grid: must be at least 2"));
            }
            let opts = BesovOptions {
                sup_grid: *sup_grid,
                ..BesovOptions::default()
            };
            let reports = specs
                .iter()
                .map(|s| Ok(besov_report(&s.build()?, &opts)?))
                .collect::<Result<Vec<_>, CliError>>()?;
            if format.json() {
                out.write_json("besov.json", &reports)?;
            }
            if format.csv() {
                out.write("besov.csv", &output::besov_csv(&reports)?)?;
            }
            Ok(Run {
                config_path: config.as_ref().map(|p| p.display().to_string()),
                seed: common.seed.unwrap_or(0),
                overrides: Vec::new(),
                lines: reports
                    .iter()
                    .map(|r| {
                        format!(
                            "{}: inhomogeneous norm in {}",
                            r.function, r.inhomogeneous_norm
                        )
                    })
                    .collect(),
            })
        }
        Command::Fab {
            a,
            b,
            f,
            sharp,
            common,
        } => {
            let read = |path: &Path, name: &str| -> Result<MatrixDoc, CliError> {
                let text = fs::read_to_string(path).map_err(|e| CliError::io(path, "read", e))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::validation("spectral-core", format!("{name}: {e}")))
            };
            let ma = read(a, "A")?.to_hermitian().map_err(|e| tag(e, "A"))?;
            let mb = read(b, "B")?.to_hermitian().map_err(|e| tag(e, "B"))?;
            let spec: CatalogSpec = f
                .parse()
                .map_err(|e| CliError::validation("function-model", format!("f: {e}")))?;
            let func = spec.build()?;
            let value = if *sharp {
                f_of_pair_sharp(&func, &ma, &mb)?
            } else {
                f_of_pair(&func, &ma, &mb)?
            };
            if format.json() {
                out.write_json(
                    "fab.json",
                    &FabReport {
                        function: func.label().to_string(),
                        sharp: *sharp,
                        value: MatrixDoc::from_matrix(&value),
                    },
                )?;
            }
            if format.csv() {
                out.write("fab.csv", &output::matrix_csv(&value)?)?;
            }
            Ok(Run {
                config_path: None,
                seed: common.seed.unwrap_or(0),
                overrides: Vec::new(),
                lines: vec![format!(
                    "f(A, B) for f = {} written to {}",
                    func.label(),
                    out.dir().display()
                )],
            })
        }
    }
}

fn tag(e: opint_core::Error, field: &str) -> CliError {
    match CliError::from(e) {
        CliError::Validation { module, message } => CliError::Validation {
            module,
            message: format!("{field}: {message}"),
        },
        other => other,
    }
}

#[derive(Serialize)]
struct FabReport {
    function: String,
    sharp: bool,
    value: MatrixDoc,
}

/// Writes `report.json`, `trials.csv`, `series.csv` and `summary.csv` as the format allows.
pub fn write_experiment(
    out: &mut Artifacts,
    report: &ExperimentReport,
    format: Format,
) -> Result<(), CliError> {
    if format.json() {
        out.write_json("report.json", report)?;
    }
    if format.csv() {
        out.write("trials.csv", &output::trials_csv(report)?)?;
        let plot = emit_plot_data(report)?;
        out.write("series.csv", &plot.series)?;
        out.write("summary.csv", &plot.summary)?;
    }
    Ok(())
}
