//! `grpdtopos`: batch front end over JSON documents.

mod commands;
mod docs;
mod error;
mod report;
mod theory;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "grpdtopos", version, about = "Finite topological groupoids, their sheaves and their logic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Quantifier rank of the formulas behind logical topologies.
    #[arg(long, global = true, default_value_t = 2, value_parser = clap::value_parser!(u16).range(0..=8))]
    pub depth: u16,
    /// Longest parameter tuple probed.
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u16).range(0..=8))]
    pub tuple_cap: u16,
    /// Most open sets materialised for one space.
    #[arg(long, global = true, default_value_t = grpdtopos::fintop::DEFAULT_OPEN_CAP as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub open_cap: u64,
    /// Most open subgroupoids enumerated when no family is given.
    #[arg(long, global = true, default_value_t = grpdtopos::weq::DEFAULT_BUDGET as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub subgroupoid_budget: u64,
    /// Most arrows in a merged model groupoid.
    #[arg(long, global = true, default_value_t = grpdtopos::frac::DEFAULT_MERGE_BUDGET as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub merge_budget: u64,
    /// Open subgroupoids to test against instead of all of them.
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::All)]
    pub mode: ModeArg,
    /// Write the report here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    QuasiHomeo,
    TwoCondition,
    SubobjectOracle,
    All,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a document is well formed and satisfies its axioms.
    Validate {
        file: PathBuf,
        /// Groupoid to check a subgroupoid or family document against.
        #[arg(long)]
        groupoid: Option<PathBuf>,
    },
    /// Opens and separation properties of a space.
    Topology {
        #[arg(long)]
        space: PathBuf,
    },
    /// Whether a subgroupoid inclusion is a weak equivalence.
    WeqCheck(Inclusion),
    /// Whether a subgroupoid inclusion induces a localic surjection.
    SurjectionCheck(Inclusion),
    /// Whether a subgroupoid inclusion induces a subtopos inclusion.
    InclusionCheck(Inclusion),
    /// Factor a functor through its full essential image.
    Factorize {
        #[arg(long)]
        functor: PathBuf,
    },
    /// Generating sheaves attached to open subgroupoids.
    Generators {
        #[arg(long)]
        groupoid: PathBuf,
        /// One open subgroupoid; all of them (or the family) otherwise.
        #[arg(long)]
        sub: Option<PathBuf>,
    },
    /// The subobject lattice of the generator of an open subgroupoid.
    Subobjects {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        sub: PathBuf,
    },
    /// The groupoid of indexed models with its logical topologies.
    LogicalTopology {
        #[arg(long)]
        models: PathBuf,
        /// A geometric formula whose definable sheaf is reported.
        #[arg(long)]
        formula: Option<String>,
        /// Free variable of the formula, as `name:Sort`; repeatable.
        #[arg(long = "var", requires = "formula")]
        vars: Vec<String>,
    },
    /// Search for parameter-free definitions of parameter orbits.
    ElimParams {
        #[arg(long)]
        models: PathBuf,
    },
    /// Étale completeness, and the completion adding missing isomorphisms.
    EtaleComplete {
        #[arg(long)]
        models: PathBuf,
    },
    /// Compose two cospans of model groupoids.
    Compose {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
    /// Search for a common apex into which both groupoids embed as weak equivalences.
    MoritaSearch {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct Inclusion {
    #[arg(long)]
    pub groupoid: PathBuf,
    #[arg(long)]
    pub sub: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; help and version are not errors
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    ExitCode::from(report::run(&cli) as u8)
}
