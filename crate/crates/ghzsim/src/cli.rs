use clap::{Args, Parser, Subcommand, ValueEnum};

use ghzsim_core::{DEFAULT_DENSE_CAP, DEFAULT_LABEL_CAP};

/// Simulate and verify complete GHZ-state measurement for n photons with
/// d-level spatial and OAM qudits.
#[derive(Debug, Parser)]
#[command(name = "ghzsim", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustively verify that every GHZ label is decoded with certainty.
    Verify(CommonArgs),
    /// Print the OAM and spatial detection tables.
    Tables(CommonArgs),
    /// Sample measurement shots for one prepared GHZ state.
    Run(RunArgs),
    /// Decode a pair of measured OAM and spatial outcomes.
    Classify(ClassifyArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Markdown,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Qudit dimension d.
    #[arg(long, default_value_t = 3)]
    pub dim: u32,
    /// Photon count n.
    #[arg(long, default_value_t = 3)]
    pub photons: usize,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    /// Worker threads for label-level parallelism.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Maximum amplitudes in a dense state.
    #[arg(long, env = "GHZSIM_DENSE_CAP", default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: u64,
    /// Maximum number of GHZ labels to enumerate.
    #[arg(long, env = "GHZSIM_LABEL_CAP", default_value_t = DEFAULT_LABEL_CAP)]
    pub label_cap: u64,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Prepared state as `x_1,...,x_{n-1}:k`.
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub shots: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// OAM levels, comma-separated.
    #[arg(long)]
    pub oam: String,
    /// Spatial levels after the QFT, comma-separated.
    #[arg(long)]
    pub spatial: String,
}
