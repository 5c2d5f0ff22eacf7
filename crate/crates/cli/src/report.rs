//! Reading inputs with their digests and writing the report.

use crate::error::{CliError, Loc};
use crate::{commands, Cli, ModeArg};
use grpdtopos::weq::Answer;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const REPORT_SCHEMA: &str = "grpdtopos-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    No,
    Unknown,
}

impl Status {
    pub fn of(a: Answer) -> Self {
        match a {
            Answer::Yes => Status::Ok,
            Answer::No => Status::No,
            Answer::Unknown => Status::Unknown,
        }
    }

    /// The least favourable of several outcomes.
    pub fn worst(all: impl IntoIterator<Item = Status>) -> Self {
        all.into_iter().fold(Status::Ok, |acc, s| match (acc, s) {
            (Status::No, _) | (_, Status::No) => Status::No,
            (Status::Unknown, _) | (_, Status::Unknown) => Status::Unknown,
            _ => Status::Ok,
        })
    }

    fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::No => 1,
            Status::Unknown => 2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::No => "no",
            Status::Unknown => "unknown",
        }
    }
}

/// The input files read so far, in order, with their SHA-256 digests.
#[derive(Default)]
pub struct Inputs {
    seen: Vec<Value>,
}

impl Inputs {
    pub fn read<T: DeserializeOwned>(&mut self, role: &str, path: &Path) -> Result<(T, Loc), CliError> {
        let name = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
        self.seen.push(json!({"role": role, "path": name, "sha256": hex::encode(Sha256::digest(&bytes))}));
        let doc = serde_json::from_slice(&bytes).map_err(|e| CliError::Input(format!("{name}: {e}")))?;
        Ok((doc, Loc::file(&name)))
    }
}

fn options_json(cli: &Cli) -> Value {
    let o = &cli.opts;
    json!({
        "depth": o.depth,
        "tuple_cap": o.tuple_cap,
        "open_cap": o.open_cap,
        "subgroupoid_budget": o.subgroupoid_budget,
        "merge_budget": o.merge_budget,
        "family": o.family.as_ref().map(|p| p.display().to_string()),
        "mode": match o.mode {
            ModeArg::QuasiHomeo => "quasi-homeo",
            ModeArg::TwoCondition => "two-condition",
            ModeArg::SubobjectOracle => "subobject-oracle",
            ModeArg::All => "all",
        },
    })
}

/// Runs the command, writes the report and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let mut inputs = Inputs::default();
    let outcome = commands::dispatch(cli, &mut inputs);
    let (status, code, result, error) = match outcome {
        Ok((s, r)) => (s.name(), s.code(), r, Value::Null),
        Err(e) => {
            eprintln!("error: {e}");
            (e.status(), e.exit_code(), Value::Null, Value::String(e.to_string()))
        }
    };
    let report = json!({
        "schema": REPORT_SCHEMA,
        "tool": "grpdtopos",
        "version": env!("CARGO_PKG_VERSION"),
        "library_version": grpdtopos::VERSION,
        "command": commands::name(&cli.command),
        "inputs": inputs.seen,
        "options": options_json(cli),
        "status": status,
        "exit_code": code,
        "result": result,
        "error": error,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialise");
    text.push('\n');
    match &cli.opts.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return 3;
            }
        }
        None => print!("{text}"),
    }
    code
}
