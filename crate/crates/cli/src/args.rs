use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "opint",
    version,
    about = "Operator-integral lab: functions of noncommuting Hermitian pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Format::Csv
    }

    pub fn csv(self) -> bool {
        self != Format::Json
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "opint-out")]
    pub out: PathBuf,
    /// Worker threads for parallel trials.
    #[arg(long, env = "OPINT_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the operator-difference identities on seeded random instances.
    VerifyIdentity {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Littlewood–Paley blocks and Besov norm intervals of catalog functions.
    Besov {
        /// Catalog expression, e.g. `plane_wave:2,0`; repeatable.
        #[arg(long = "function")]
        functions: Vec<String>,
        /// Experiment config whose `functions` list is reported.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Per-axis grid size for sup-norm lower bounds.
        #[arg(long, default_value_t = opint_core::function::SUP_GRID_SAMPLES)]
        sup_grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate f(A, B) for matrices given as JSON documents.
    Fab {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
        #[arg(long = "f")]
        f: String,
        /// Evaluate through f♯(A, B)(I − iB).
        #[arg(long)]
        sharp: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Schatten-class Lipschitz ratio experiment, p in [1, 2].
    Lipschitz {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Adversarial ratio scan for p >= 2.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyIdentity { .. } => "verify-identity",
            Command::Besov { .. } => "besov",
            Command::Fab { .. } => "fab",
            Command::Lipschitz { .. } => "lipschitz",
            Command::Scan { .. } => "scan",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::VerifyIdentity { common, .. }
            | Command::Besov { common, .. }
            | Command::Fab { common, .. }
            | Command::Lipschitz { common, .. }
            | Command::Scan { common, .. } => common,
        }
    }
}
