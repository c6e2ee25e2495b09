use std::fs;
use std::path::{Path, PathBuf};

use opint_core::besov::BesovReport;
use opint_core::lab::{ExperimentReport, IdentityReport};
use opint_core::CMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of one CLI run. Everything except `wall_time` is deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub output_dir: String,
    pub seed: u64,
    pub tool_version: String,
    pub threads: Option<usize>,
    /// Config fields replaced by command-line flags, as `field=value`.
    pub overrides: Vec<String>,
    pub wall_time: f64,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    /// Files whose on-disk digest differs from the recorded one (missing files included).
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|f| {
                fs::read(dir.join(&f.path))
                    .map(|b| digest(&b) != f.sha256)
                    .unwrap_or(true)
            })
            .map(|f| f.path.clone())
            .collect()
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts into one directory and remembers their digests.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, "create output directory", e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, "write", e))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: digest(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

fn csv_bytes<R: Serialize>(
    rows: impl IntoIterator<Item = R>,
    header: &[&str],
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| CliError::validation("cli", format!("csv: {e}")))
}

#[derive(Serialize)]
struct IdentityRow<'a> {
    index: usize,
    seed: Option<u64>,
    dim: usize,
    check: &'a str,
    function: &'a str,
    lhs_norm: f64,
    rhs_norm: f64,
    residual_norm: f64,
    relative_residual: f64,
}

pub fn identity_csv(report: &IdentityReport) -> Result<Vec<u8>, CliError> {
    let rows = report
        .checks
        .iter()
        .enumerate()
        .map(|(index, c)| IdentityRow {
            index,
            seed: c.seed,
            dim: c.dim,
            check: match c.check {
                opint_core::lab::CheckKind::First => "first",
                opint_core::lab::CheckKind::Second => "second",
                opint_core::lab::CheckKind::Full => "full",
            },
            function: &c.function,
            lhs_norm: c.lhs_norm,
            rhs_norm: c.rhs_norm,
            residual_norm: c.residual_norm,
            relative_residual: c.relative_residual,
        });
    csv_bytes(
        rows,
        &[
            "index",
            "seed",
            "dim",
            "check",
            "function",
            "lhs_norm",
            "rhs_norm",
            "residual_norm",
            "relative_residual",
        ],
    )
}

#[derive(Serialize)]
struct TrialRow<'a> {
    trial: usize,
    seed: u64,
    dim: usize,
    p: String,
    sigma: Option<f64>,
    function: &'a str,
    diff_norm: f64,
    pert_norm: f64,
    ratio: f64,
    normalizer: f64,
    normalized_ratio: f64,
    greedy: bool,
}

pub fn trials_csv(report: &ExperimentReport) -> Result<Vec<u8>, CliError> {
    let rows = report.trials.iter().map(|t| TrialRow {
        trial: t.trial,
        seed: t.seed,
        dim: t.dim,
        p: t.p.to_string(),
        sigma: t.sigma,
        function: &t.function,
        diff_norm: t.diff_norm,
        pert_norm: t.pert_norm,
        ratio: t.ratio,
        normalizer: t.normalizer,
        normalized_ratio: t.normalized_ratio,
        greedy: t.greedy,
    });
    csv_bytes(
        rows,
        &[
            "trial",
            "seed",
            "dim",
            "p",
            "sigma",
            "function",
            "diff_norm",
            "pert_norm",
            "ratio",
            "normalizer",
            "normalized_ratio",
            "greedy",
        ],
    )
}

/// Plot-ready series: `series` has one row per trial keyed by `(p, dim)`,
/// `summary` one row per `(p, dim)` cell with at least one trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlotData {
    pub series: Vec<u8>,
    pub summary: Vec<u8>,
}

#[derive(Serialize)]
struct SeriesRow {
    p: String,
    dim: usize,
    trial_index: usize,
    ratio: f64,
    normalized_ratio: f64,
}

#[derive(Serialize)]
struct SummaryRow {
    index: usize,
    p: String,
    dim: usize,
    max_ratio: f64,
    max_normalized_ratio: f64,
}

pub fn emit_plot_data(report: &ExperimentReport) -> Result<PlotData, CliError> {
    let series = report.trials.iter().map(|t| SeriesRow {
        p: t.p.to_string(),
        dim: t.dim,
        trial_index: t.trial,
        ratio: t.ratio,
        normalized_ratio: t.normalized_ratio,
    });
    let summary = report
        .summary
        .iter()
        .filter(|s| s.trials > 0)
        .enumerate()
        .map(|(index, s)| SummaryRow {
            index,
            p: s.p.to_string(),
            dim: s.dim,
            max_ratio: s.max_ratio,
            max_normalized_ratio: s.max_normalized_ratio,
        });
    Ok(PlotData {
        series: csv_bytes(
            series,
            &["p", "dim", "trial_index", "ratio", "normalized_ratio"],
        )?,
        summary: csv_bytes(
            summary,
            &["index", "p", "dim", "max_ratio", "max_normalized_ratio"],
        )?,
    })
}

#[derive(Serialize)]
struct BesovCsvRow<'a> {
    function: &'a str,
    n: i32,
    lower: f64,
    upper: f64,
    weight: f64,
    sup_lower: f64,
    sup_upper: f64,
}

/// One row per block; `lower`/`upper` are the `2ⁿ`-weighted contributions.
pub fn besov_csv(reports: &[BesovReport]) -> Result<Vec<u8>, CliError> {
    let rows = reports.iter().flat_map(|r| {
        r.rows().into_iter().map(move |row| BesovCsvRow {
            function: &r.function,
            n: row.n,
            lower: row.lower,
            upper: row.upper,
            weight: row.weight,
            sup_lower: row.sup_lower,
            sup_upper: row.sup_upper,
        })
    });
    csv_bytes(
        rows,
        &[
            "function",
            "n",
            "lower",
            "upper",
            "weight",
            "sup_lower",
            "sup_upper",
        ],
    )
}

#[derive(Serialize)]
struct EntryRow {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

pub fn matrix_csv(m: &CMatrix) -> Result<Vec<u8>, CliError> {
    let rows = (0..m.nrows())
        .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
        .map(|(r, c)| EntryRow {
            row: r,
            col: c,
            re: m[(r, c)].re,
            im: m[(r, c)].im,
        });
    csv_bytes(rows, &["row", "col", "re", "im"])
}
