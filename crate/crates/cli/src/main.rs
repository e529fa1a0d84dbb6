//! `antsreview` command-line runner.
//!
//! Exit codes: 0 success, 1 failed assertion or unknown id, 2 parse or IO error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use antsreview_core::confidential::GroupParams;
use antsreview_core::scenario;
use antsreview_core::{derive_address, Address, ContentHash, EnvConfig, Environment, Snapshot};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "antsreview", version, about = "Ants-Review protocol engine")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay an NDJSON scenario against a fresh environment.
    Run {
        scenario: PathBuf,
        /// Write the event log here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat protocol errors as run failures.
        #[arg(long)]
        strict: bool,
        /// Snapshot the final state to this file.
        #[arg(long)]
        save_state: Option<PathBuf>,
        /// Start from a saved snapshot instead of genesis.
        #[arg(long)]
        state_file: Option<PathBuf>,
        /// Group parameters for confidential notes (JSON with p, q, g, h).
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Print an object from a saved snapshot as JSON.
    Show {
        what: Kind,
        id: String,
        #[arg(long)]
        state_file: PathBuf,
    },
    /// Store a file and print its content hash.
    PutFile {
        path: PathBuf,
        /// Snapshot to add the file to (created if missing).
        #[arg(long)]
        state_file: Option<PathBuf>,
    },
    /// Write a stored document to disk.
    GetFile {
        hash: String,
        path: PathBuf,
        #[arg(long)]
        state_file: PathBuf,
    },
    /// Move public ANTS into a confidential note.
    Shield {
        #[arg(long = "as")]
        sender: String,
        #[arg(long)]
        amount: String,
        /// Blinding factor (decimal or 0x-hex).
        #[arg(long)]
        r: String,
        #[arg(long)]
        state_file: PathBuf,
    },
    /// Spend notes into new commitments, from a request JSON file.
    JoinSplit {
        request: PathBuf,
        #[arg(long = "as")]
        sender: String,
        #[arg(long)]
        state_file: PathBuf,
    },
    /// Open a note back into public ANTS.
    Unshield {
        #[arg(long = "as")]
        sender: String,
        #[arg(long)]
        note_id: u64,
        #[arg(long)]
        value: u64,
        #[arg(long)]
        r: String,
        #[arg(long)]
        state_file: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Antreview,
    Balance,
    Note,
    Tally,
}

/// Outcome that maps to a specific exit code.
enum Exit {
    Fail(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        Exit::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run { scenario, out, strict, save_state, state_file, params } => {
            run(&scenario, out.as_deref(), strict, save_state.as_deref(), state_file.as_deref(), params.as_deref())
        }
        Cmd::Show { what, id, state_file } => show(what, &id, &state_file),
        Cmd::PutFile { path, state_file } => put_file(&path, state_file.as_deref()),
        Cmd::GetFile { hash, path, state_file } => get_file(&hash, &path, &state_file),
        Cmd::Shield { sender, amount, r, state_file } => {
            let args = json!({ "amount": amount, "r": r });
            execute(&sender, "shield", args, &state_file)
        }
        Cmd::JoinSplit { request, sender, state_file } => match read_json(&request) {
            Ok(args) => execute(&sender, "join_split", args, &state_file),
            Err(e) => Err(e.into()),
        },
        Cmd::Unshield { sender, note_id, value, r, state_file } => {
            let args = json!({ "note_id": note_id, "value": value, "r": r });
            execute(&sender, "unshield", args, &state_file)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit::Fail(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Exit::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Environment> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let snap: Snapshot = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Environment::from_snapshot(snap).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn save(env: &Environment, path: &Path) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(&env.snapshot())?;
    fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
}

fn run(
    path: &Path,
    out: Option<&Path>,
    strict: bool,
    save_state: Option<&Path>,
    state_file: Option<&Path>,
    params: Option<&Path>,
) -> Result<(), Exit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let lines = scenario::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;

    let mut env = match (state_file, params) {
        (Some(_), Some(_)) => return Err(anyhow!("--params cannot be combined with --state-file").into()),
        (Some(snap), None) => load(snap)?,
        (None, Some(p)) => {
            let raw = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let params: GroupParams =
                serde_json::from_str(&raw).with_context(|| format!("parsing {}", p.display()))?;
            Environment::new(EnvConfig { params, ..EnvConfig::default() })
        }
        (None, None) => Environment::default(),
    };

    let report = scenario::run(&mut env, &lines);
    let digest = env.state_digest();
    let log = scenario::render_log(&report.events, &digest);
    match out {
        Some(file) => {
            fs::write(file, &log).with_context(|| format!("writing {}", file.display()))?;
            println!("{digest}");
        }
        None => print!("{log}"),
    }
    if let Some(file) = save_state {
        save(&env, file)?;
    }

    for f in &report.failures {
        eprintln!("{}:{}: {}", path.display(), f.line, f.message);
    }
    if report.passed(strict) {
        Ok(())
    } else if report.failures.is_empty() {
        Err(Exit::Fail(anyhow!("{} protocol error(s) under --strict", report.protocol_errors)))
    } else {
        Err(Exit::Fail(anyhow!("{} assertion(s) failed", report.failures.len())))
    }
}

fn resolve_address(s: &str) -> anyhow::Result<Address> {
    match s.strip_prefix('@') {
        Some(seed) => Ok(derive_address(seed.as_bytes())),
        None => s.parse().map_err(|e| anyhow!("{e}")),
    }
}

fn show(what: Kind, id: &str, state_file: &Path) -> Result<(), Exit> {
    let env = load(state_file)?;
    let path = match what {
        Kind::Balance => format!("balance/{}", resolve_address(id)?),
        Kind::Antreview => format!("antreview/{id}"),
        Kind::Note => format!("note/{id}"),
        Kind::Tally => format!("tally/{id}"),
    };
    let value: Value = env.query(&path).ok_or_else(|| Exit::Fail(anyhow!("unknown id {id}")))?;
    println!("{}", serde_json::to_string_pretty(&value).map_err(anyhow::Error::from)?);
    Ok(())
}

fn put_file(path: &Path, state_file: Option<&Path>) -> Result<(), Exit> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut env = match state_file {
        Some(f) if f.exists() => load(f)?,
        _ => Environment::default(),
    };
    let hash = env.store_mut().put(&bytes).map_err(|e| Exit::Fail(e.into()))?;
    if let Some(f) = state_file {
        save(&env, f)?;
    }
    println!("{hash}");
    Ok(())
}

fn get_file(hash: &str, path: &Path, state_file: &Path) -> Result<(), Exit> {
    let hash: ContentHash = hash.parse().map_err(|e| anyhow!("{e}"))?;
    let env = load(state_file)?;
    let bytes = env.store().get(&hash).map_err(|e| Exit::Fail(anyhow!("{hash}: {e}")))?;
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Runs one call against a snapshot and writes it back. Events go to stdout.
fn execute(sender: &str, op: &str, args: Value, state_file: &Path) -> Result<(), Exit> {
    let mut env = load(state_file)?;
    let sender = resolve_address(&format!("@{}", sender.trim_start_matches('@')))?;
    let result = env.execute_json(sender, op, Some(args));
    // a loaded snapshot carries no history, so these are this call's events
    for e in env.events() {
        println!("{}", e.to_json_line());
    }
    save(&env, state_file)?;
    result.map(drop).map_err(|e| Exit::Fail(anyhow!("{op}: {e}")))
}
