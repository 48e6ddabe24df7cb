use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(
    name = "udisc",
    version,
    about = "Optimal unambiguous discrimination of mixed states and programmable discriminators"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every random draw in the command
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Monte Carlo trials
    #[arg(long, global = true, default_value_t = 100_000)]
    pub trials: u64,

    /// Allowed negativity of a smallest eigenvalue
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,

    /// Relative eigenvalue cutoff for rank, support and square roots
    #[arg(long, global = true)]
    pub tol_clip: Option<f64>,

    /// Largest side length of any single matrix
    #[arg(long, global = true)]
    pub dim_cap: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write state files: the counterexample family, random states, or a pure pair
    Gen(GenArgs),
    /// Optimal failure probability for n data copies
    Bound(BoundArgs),
    /// Compare q_opt(n) against the single-copy baseline
    Compare(PairArgs),
    /// Run one of the numerical verifiers
    Verify(VerifyArgs),
    /// Monte Carlo simulation of a UD measurement
    Simulate(SimulateArgs),
    /// Bounds for many random pairs and copy counts
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,

    /// Directory the files are written to
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,

    /// File name prefix; files are <prefix>1.json, <prefix>2.json, ...
    #[arg(long, default_value = "rho")]
    pub prefix: String,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// rho'1, rho'2, rho'3 of the three-state family
    Counterexample {
        #[arg(long, default_value_t = 0.5)]
        a1: f64,
        #[arg(long, default_value_t = 0.5)]
        b1: f64,
        #[arg(long, default_value_t = 0.5)]
        c1: f64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Ginibre-induced random states
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 2)]
        count: usize,
    },
    /// Two pure states with a real overlap
    PurePair {
        #[arg(long)]
        overlap: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

#[derive(Debug, Args)]
pub struct PairArgs {
    pub state1: PathBuf,
    pub state2: PathBuf,

    /// Prior of the first state
    #[arg(long, default_value_t = 0.5)]
    pub eta1: f64,

    /// Number of data copies
    #[arg(long, default_value_t = 1)]
    pub n: u32,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub pair: PairArgs,

    /// Skip the positivity certificate on the composed operators
    #[arg(long)]
    pub no_certify: bool,

    /// Reject pairs whose supports share a nonzero subspace
    #[arg(long)]
    pub strict_supports: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PovmSource {
    Pure,
    Commuting,
    File,
}

#[derive(Debug, Args)]
pub struct PovmArgs {
    /// How the measurement is obtained
    #[arg(long, value_enum, default_value_t = PovmSource::Commuting)]
    pub povm: PovmSource,

    /// POVM file, required with --povm file
    #[arg(long, required_if_eq("povm", "file"))]
    pub povm_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(subcommand)]
    pub target: VerifyTarget,
}

#[derive(Debug, Subcommand)]
pub enum VerifyTarget {
    /// Lift a UD measurement to the composed pair and compare outcome traces
    Theorem1 {
        state1: PathBuf,
        state2: PathBuf,
        #[command(flatten)]
        povm: PovmArgs,
        /// Prior passed to the pure-state constructor
        #[arg(long, default_value_t = 0.5)]
        eta1: f64,
    },
    /// Annihilation-constraint check on the three-state family
    Theorem2 {
        #[arg(long, default_value_t = 0.5)]
        a1: f64,
        #[arg(long, default_value_t = 0.5)]
        b1: f64,
        #[arg(long, default_value_t = 0.5)]
        c1: f64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Remove constraint vector CASE:INDEX before checking
        #[arg(long, hide = true, value_parser = parse_drop)]
        drop_constraint: Option<(u8, usize)>,
    },
    /// F(rho1in, rho2in) = F(rho1, rho2)^n on random pairs, for n = 1..=N
    Lemma1 {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 3)]
        n: u32,
        /// Number of random pairs
        #[arg(long, default_value_t = 50)]
        seeds: usize,
    },
    /// F(rho1 x rho2, rho3 x rho4) = F(rho1, rho3) F(rho2, rho4) on random quadruples
    Eq16 {
        /// Largest factor dimension
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
    },
}

fn parse_drop(s: &str) -> Result<(u8, usize), String> {
    let (case, index) = s
        .split_once(':')
        .ok_or_else(|| format!("expected CASE:INDEX, got {s:?}"))?;
    Ok((
        case.parse()
            .map_err(|e| format!("bad case {case:?}: {e}"))?,
        index
            .parse()
            .map_err(|e| format!("bad index {index:?}: {e}"))?,
    ))
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pair: PairArgs,

    #[command(flatten)]
    pub povm: PovmArgs,

    /// Simulate on the composed pair with n data copies instead of the bare pair
    #[arg(long)]
    pub composed: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub rank1: usize,
    #[arg(long, default_value_t = 2)]
    pub rank2: usize,
    /// Largest copy count
    #[arg(long, default_value_t = 3)]
    pub n_max: u32,
    /// Number of random instances
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Fixed prior for every instance; drawn per instance when absent
    #[arg(long)]
    pub eta1: Option<f64>,
}
