//! Line-delimited JSON scenarios.
//!
//! Each non-blank line is one object. Protocol calls look like
//! `{"as": "alice", "op": "contribute", "args": {"id": 0, "amount": "100"}}`
//! where `as` is the seed of an account created earlier. Meta operations:
//!
//! * `{"op": "create_account", "seed": "alice"}`
//! * `{"op": "advance_time", "delta": 86400}`
//! * `{"op": "assert_event", "match": {"name": "Accepted", "attributes": {"amount": "60"}}, "scope": "last"}`
//! * `{"op": "assert_state", "path": "balance/@bob", "equals": "60"}`
//!
//! Inside `args`, `match`, `path` and `equals`, a string `@seed` stands for
//! the address derived from `seed` (`@escrow` is the escrow account) and
//! `#text` for the content hash of the UTF-8 bytes of `text`. Lines
//! starting with `#` are comments.

use serde_json::{Map, Value};
use thiserror::Error;

use crate::call::ProtocolCall;
use crate::env::{derive_address, Environment};
use crate::event::Event;
use crate::hash::{sha256, Hash32};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    CreateAccount { seed: String },
    AdvanceTime { delta: u64 },
    AssertEvent { matcher: EventMatch, scope: Scope },
    AssertState { path: String, equals: Value },
    Call { sender_seed: String, call: ProtocolCall },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scope {
    /// Events of the most recent transaction.
    #[default]
    Last,
    All,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventMatch {
    pub name: Option<String>,
    pub attributes: Vec<(String, String)>,
}

impl EventMatch {
    pub fn matches(&self, event: &Event) -> bool {
        self.name.as_ref().is_none_or(|n| *n == event.name)
            && self
                .attributes
                .iter()
                .all(|(k, v)| event.attr(k) == Some(v.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub number: usize,
    pub command: Command,
}

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    /// Events appended during this run.
    pub events: Vec<Event>,
    pub failures: Vec<Failure>,
    pub protocol_errors: usize,
}

impl Report {
    pub fn passed(&self, strict: bool) -> bool {
        self.failures.is_empty() && (!strict || self.protocol_errors == 0)
    }
}

/// Resolves `@seed` and `#text` references in a string.
fn resolve_str(s: &str, escrow: &str) -> String {
    if let Some(seed) = s.strip_prefix('@') {
        if seed == "escrow" {
            escrow.to_string()
        } else {
            derive_address(seed.as_bytes()).to_string()
        }
    } else if let Some(text) = s.strip_prefix('#') {
        sha256(text.as_bytes()).to_string()
    } else {
        s.to_string()
    }
}

fn resolve(value: Value, escrow: &str) -> Value {
    match value {
        Value::String(s) => Value::String(resolve_str(&s, escrow)),
        Value::Array(items) => Value::Array(items.into_iter().map(|v| resolve(v, escrow)).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, resolve(v, escrow)))
                .collect(),
        ),
        other => other,
    }
}

fn escrow_string() -> String {
    derive_address(crate::env::ESCROW_SEED.as_bytes()).to_string()
}

fn take_str(obj: &mut Map<String, Value>, key: &str) -> Result<String, String> {
    match obj.remove(key) {
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(format!("`{key}` must be a string")),
        None => Err(format!("missing `{key}`")),
    }
}

fn parse_command(text: &str) -> Result<Command, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let Value::Object(mut obj) = value else {
        return Err("expected a JSON object".into());
    };
    let op = take_str(&mut obj, "op")?;
    let escrow = escrow_string();
    match op.as_str() {
        "create_account" => Ok(Command::CreateAccount {
            seed: take_str(&mut obj, "seed")?,
        }),
        "advance_time" => {
            let delta = obj
                .get("delta")
                .and_then(Value::as_u64)
                .ok_or("`delta` must be a non-negative integer")?;
            Ok(Command::AdvanceTime { delta })
        }
        "assert_event" => {
            let scope = match obj.get("scope").and_then(Value::as_str) {
                None | Some("last") => Scope::Last,
                Some("all") => Scope::All,
                Some(other) => return Err(format!("unknown scope `{other}`")),
            };
            let Some(Value::Object(m)) = obj.remove("match").map(|v| resolve(v, &escrow)) else {
                return Err("`match` must be an object".into());
            };
            let name = match m.get("name") {
                None => None,
                Some(Value::String(n)) => Some(n.clone()),
                Some(_) => return Err("`match.name` must be a string".into()),
            };
            let attributes = match m.get("attributes") {
                None => Vec::new(),
                Some(Value::Object(attrs)) => attrs
                    .iter()
                    .map(|(k, v)| match v {
                        Value::String(s) => Ok((k.clone(), s.clone())),
                        Value::Number(n) => Ok((k.clone(), n.to_string())),
                        Value::Bool(b) => Ok((k.clone(), b.to_string())),
                        _ => Err(format!("attribute `{k}` must be a scalar")),
                    })
                    .collect::<Result<_, _>>()?,
                Some(_) => return Err("`match.attributes` must be an object".into()),
            };
            Ok(Command::AssertEvent {
                matcher: EventMatch { name, attributes },
                scope,
            })
        }
        "assert_state" => {
            let path = take_str(&mut obj, "path")?
                .split('/')
                .map(|seg| resolve_str(seg, &escrow))
                .collect::<Vec<_>>()
                .join("/");
            let equals = obj.remove("equals").ok_or("missing `equals`")?;
            Ok(Command::AssertState {
                path,
                equals: resolve(equals, &escrow),
            })
        }
        op if ProtocolCall::is_known(op) => {
            let sender_seed = take_str(&mut obj, "as")?;
            let args = obj.remove("args").map(|v| resolve(v, &escrow));
            let call = ProtocolCall::from_json(op, args).map_err(|e| format!("{op}: {e}"))?;
            Ok(Command::Call { sender_seed, call })
        }
        other => Err(format!("unknown op `{other}`")),
    }
}

/// Parses a whole scenario. Blank lines and `#` comments are skipped;
/// line numbers are 1-based.
pub fn parse(text: &str) -> Result<Vec<Line>, ParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            parse_command(l)
                .map(|command| Line {
                    number: i + 1,
                    command,
                })
                .map_err(|message| ParseError {
                    line: i + 1,
                    message,
                })
        })
        .collect()
}

/// Loose equality for assertions: identical JSON, or a string and a number
/// with the same decimal rendering.
fn json_equal(actual: &Value, expected: &Value) -> bool {
    match (actual, expected) {
        (Value::String(s), Value::Number(n)) | (Value::Number(n), Value::String(s)) => {
            *s == n.to_string()
        }
        _ => actual == expected,
    }
}

/// Executes `lines` in order against `env`.
pub fn run(env: &mut Environment, lines: &[Line]) -> Report {
    let first_event = env.events().len();
    let mut report = Report::default();
    let fail = |report: &mut Report, line: usize, message: String| {
        report.failures.push(Failure { line, message });
    };
    for Line { number, command } in lines {
        match command {
            Command::CreateAccount { seed } => {
                if let Err(e) = env.create_account(seed.as_bytes()) {
                    fail(&mut report, *number, format!("create_account: {e}"));
                }
            }
            Command::AdvanceTime { delta } => {
                if let Err(e) = env.advance_time(*delta) {
                    fail(&mut report, *number, format!("advance_time: {e}"));
                }
            }
            Command::Call { sender_seed, call } => {
                let sender = derive_address(sender_seed.as_bytes());
                if env.execute(sender, call).is_err() {
                    report.protocol_errors += 1;
                }
            }
            Command::AssertEvent { matcher, scope } => {
                let events = &env.events()[first_event..];
                let candidates: &[Event] = match scope {
                    Scope::All => events,
                    Scope::Last => {
                        let last = env.tx_index().checked_sub(1);
                        let start = events
                            .iter()
                            .rposition(|e| Some(e.tx_index) != last)
                            .map_or(0, |i| i + 1);
                        &events[start..]
                    }
                };
                if !candidates.iter().any(|e| matcher.matches(e)) {
                    fail(&mut report, *number, format!("no event matches {matcher:?}"));
                }
            }
            Command::AssertState { path, equals } => match env.query(path) {
                Some(actual) if json_equal(&actual, equals) => {}
                Some(actual) => fail(
                    &mut report,
                    *number,
                    format!("{path}: expected {equals}, found {actual}"),
                ),
                None => fail(&mut report, *number, format!("{path}: no such value")),
            },
        }
    }
    report.events = env.events()[first_event..].to_vec();
    report
}

/// Parses and runs `text` against a fresh default environment.
pub fn run_text(text: &str) -> Result<(Environment, Report), ParseError> {
    let lines = parse(text)?;
    let mut env = Environment::default();
    let report = run(&mut env, &lines);
    Ok((env, report))
}

/// Canonical log output: one JSON event per line, then the state digest.
pub fn render_log(events: &[Event], digest: &Hash32) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_json_line());
        out.push('\n');
    }
    out.push_str(&digest.to_hex());
    out.push('\n');
    out
}
