use std::path::{Path, PathBuf};

use antsreview_core::call::ProtocolCall as C;
use antsreview_core::{sha256, Address, Amount, ContentHash, Environment, Event, Role, Timestamp};

/// Fails the enclosing check with a formatted message.
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}
pub(crate) use ensure;

pub fn h(text: &str) -> ContentHash {
    sha256(text.as_bytes())
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/scenarios")
}

pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ndjson"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

/// An environment with named accounts and helpers that turn protocol
/// errors into check failures.
pub struct Env {
    pub env: Environment,
}

impl Env {
    pub fn new(env: Environment) -> Self {
        Env { env }
    }

    pub fn account(&mut self, seed: &str) -> Address {
        self.env.create_account(seed.as_bytes()).unwrap()
    }

    pub fn call(&mut self, who: Address, call: &C) -> antsreview_core::Result<Vec<Event>> {
        self.env.execute(who, call)
    }

    pub fn ok(&mut self, who: Address, call: C) -> Result<Vec<Event>, String> {
        self.env.execute(who, &call).map_err(|e| format!("{} failed: {e}", call.name()))
    }

    pub fn grant(&mut self, role: Role, who: Address) -> Result<(), String> {
        let admin = self.env.deployer();
        self.ok(admin, C::GrantRole { role, who }).map(drop)
    }

    pub fn balance(&self, who: Address) -> u128 {
        self.env.balance_of(who).0
    }

    pub fn now(&self) -> u64 {
        self.env.now().0
    }

    pub fn issue(&mut self, issuer: Address, approver: Address, deadline_in: u64) -> Result<u64, String> {
        let id = self.env.state().reviews.len() as u64;
        let deadline = Timestamp(self.now() + deadline_in);
        self.ok(
            issuer,
            C::IssueAntReview {
                issuers: vec![issuer],
                approver,
                paper_hash: h("paper"),
                requirements_hash: h("requirements"),
                deadline,
            },
        )?;
        Ok(id)
    }

    pub fn contribute(&mut self, who: Address, id: u64, amount: u128) -> Result<(), String> {
        let escrow = self.env.escrow();
        self.ok(who, C::Approve { spender: escrow, amount: Amount(amount) })?;
        self.ok(who, C::Contribute { id, amount: Amount(amount) }).map(drop)
    }
}
