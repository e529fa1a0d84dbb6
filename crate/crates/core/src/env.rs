//! The simulated chain: accounts, logical time, transaction dispatch and
//! the event log.
//!
//! One transaction carries one [`ProtocolCall`]. A call either commits all
//! of its state changes and events, or none of them; in the latter case a
//! single `Error` event is logged instead. `tx_index` advances either way.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::access::{Role, RoleRegistry};
use crate::antsreview::AntsReview;
use crate::call::ProtocolCall;
use crate::confidential::{ConfidentialLedger, GroupParams};
use crate::error::{Error, Result};
use crate::event::Event;
use crate::hash::{sha256, ContentHash, Hash32};
use crate::poe::{ContentStore, PoeRegistry, DEFAULT_MAX_CONTENT};
use crate::token::{FaucetConfig, TokenLedger};
use crate::types::{Address, Amount, Timestamp};

/// Seed of the engine-owned escrow account.
pub const ESCROW_SEED: &str = "antsreview/escrow";
pub const DEFAULT_DEPLOYER_SEED: &str = "deployer";

/// First 20 bytes of `SHA-256(seed)`.
pub fn derive_address(seed: &[u8]) -> Address {
    let digest = sha256(seed);
    let mut out = [0u8; 20];
    out.copy_from_slice(&digest.as_bytes()[..20]);
    Address(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxContext {
    pub sender: Address,
    pub now: Timestamp,
    pub tx_index: u64,
}

/// A transaction in flight: its context plus the events it has emitted so far.
#[derive(Debug)]
pub struct Tx {
    ctx: TxContext,
    events: Vec<Event>,
}

impl Tx {
    pub fn new(ctx: TxContext) -> Self {
        Tx {
            ctx,
            events: Vec::new(),
        }
    }

    pub fn sender(&self) -> Address {
        self.ctx.sender
    }

    pub fn now(&self) -> Timestamp {
        self.ctx.now
    }

    pub fn context(&self) -> TxContext {
        self.ctx
    }

    pub fn emit<K, V>(&mut self, name: &str, attributes: impl IntoIterator<Item = (K, V)>)
    where
        K: Into<String>,
        V: Into<String>,
    {
        self.events.push(Event {
            tx_index: self.ctx.tx_index,
            name: name.to_string(),
            attributes: attributes
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        });
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub deployer_seed: String,
    pub genesis_time: Timestamp,
    pub faucet: FaucetConfig,
    pub max_content: usize,
    pub params: GroupParams,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            deployer_seed: DEFAULT_DEPLOYER_SEED.to_string(),
            genesis_time: Timestamp(0),
            faucet: FaucetConfig::default(),
            max_content: DEFAULT_MAX_CONTENT,
            params: GroupParams::standard(),
        }
    }
}

/// All protocol state covered by the state digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct State {
    pub access: RoleRegistry,
    pub token: TokenLedger,
    pub poe: PoeRegistry,
    pub reviews: AntsReview,
    pub confidential: ConfidentialLedger,
    pub voting: crate::voting::Voting,
}

#[derive(Debug, Clone)]
pub struct Environment {
    config: EnvConfig,
    deployer: Address,
    escrow: Address,
    now: Timestamp,
    tx_index: u64,
    accounts: BTreeMap<Address, String>,
    state: State,
    /// Off-chain document store; not part of the state digest.
    store: ContentStore,
    events: Vec<Event>,
}

impl Default for Environment {
    fn default() -> Self {
        Environment::new(EnvConfig::default())
    }
}

impl Environment {
    pub fn new(config: EnvConfig) -> Self {
        let deployer = derive_address(config.deployer_seed.as_bytes());
        let escrow = derive_address(ESCROW_SEED.as_bytes());
        assert!(!deployer.is_zero() && deployer != escrow, "unusable deployer seed");
        let state = State {
            access: RoleRegistry::new(deployer),
            token: TokenLedger::new(config.faucet.clone()),
            poe: PoeRegistry::default(),
            reviews: AntsReview::new(escrow),
            confidential: ConfidentialLedger::new(config.params.clone()),
            voting: Default::default(),
        };
        Environment {
            deployer,
            escrow,
            now: config.genesis_time,
            tx_index: 0,
            accounts: BTreeMap::from([(deployer, config.deployer_seed.clone())]),
            state,
            store: ContentStore::new(config.max_content),
            events: Vec::new(),
            config,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn deployer(&self) -> Address {
        self.deployer
    }

    pub fn escrow(&self) -> Address {
        self.escrow
    }

    pub fn now(&self) -> Timestamp {
        self.now
    }

    /// Index the next transaction will get.
    pub fn tx_index(&self) -> u64 {
        self.tx_index
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn store(&self) -> &ContentStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ContentStore {
        &mut self.store
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn accounts(&self) -> impl Iterator<Item = (&Address, &str)> {
        self.accounts.iter().map(|(a, s)| (a, s.as_str()))
    }

    pub fn is_account(&self, who: Address) -> bool {
        self.accounts.contains_key(&who)
    }

    /// Registers the account derived from `seed`. Deterministic and idempotent.
    pub fn create_account(&mut self, seed: &[u8]) -> Result<Address> {
        let address = derive_address(seed);
        if address.is_zero() {
            return Err(Error::ZeroAddress);
        }
        if address == self.escrow {
            return Err(Error::ReservedAddress);
        }
        self.accounts
            .entry(address)
            .or_insert_with(|| String::from_utf8_lossy(seed).into_owned());
        Ok(address)
    }

    pub fn advance_time(&mut self, delta: u64) -> Result<Timestamp> {
        self.now = self.now.checked_add(delta)?;
        Ok(self.now)
    }

    pub fn balance_of(&self, who: Address) -> Amount {
        self.state.token.balance_of(who)
    }

    pub fn has_role(&self, role: Role, who: Address) -> bool {
        self.state.access.has_role(role, who)
    }

    /// SHA-256 of the canonical JSON encoding of [`State`].
    pub fn state_digest(&self) -> Hash32 {
        sha256(&serde_json::to_vec(&self.state).expect("state serializes"))
    }

    /// Runs `call` as one transaction.
    pub fn execute(&mut self, sender: Address, call: &ProtocolCall) -> Result<Vec<Event>> {
        let ctx = self.next_context(sender);
        let outcome = if self.is_account(sender) {
            let snapshot = self.state.clone();
            let mut tx = Tx::new(ctx);
            match self.dispatch(&mut tx, call) {
                Ok(()) => Ok(tx.into_events()),
                Err(e) => {
                    self.state = snapshot;
                    Err(e)
                }
            }
        } else {
            Err(Error::UnknownSender)
        };
        self.finish(ctx, call.name(), outcome)
    }

    /// Like [`Environment::execute`] but takes an untyped call; unknown
    /// names and malformed arguments become error events.
    pub fn execute_json(
        &mut self,
        sender: Address,
        op: &str,
        args: Option<Value>,
    ) -> Result<Vec<Event>> {
        match ProtocolCall::from_json(op, args) {
            Ok(call) => self.execute(sender, &call),
            Err(e) => {
                let ctx = self.next_context(sender);
                self.finish(ctx, op, Err(e))
            }
        }
    }

    fn next_context(&mut self, sender: Address) -> TxContext {
        let ctx = TxContext {
            sender,
            now: self.now,
            tx_index: self.tx_index,
        };
        self.tx_index += 1;
        ctx
    }

    fn finish(
        &mut self,
        ctx: TxContext,
        call: &str,
        outcome: Result<Vec<Event>>,
    ) -> Result<Vec<Event>> {
        match outcome {
            Ok(events) => {
                self.events.extend(events.iter().cloned());
                Ok(events)
            }
            Err(e) => {
                self.events.push(Event {
                    tx_index: ctx.tx_index,
                    name: "Error".into(),
                    attributes: vec![
                        ("call".into(), call.into()),
                        ("sender".into(), ctx.sender.to_string()),
                        ("reason".into(), e.code().into()),
                    ],
                });
                Err(e)
            }
        }
    }

    fn dispatch(&mut self, tx: &mut Tx, call: &ProtocolCall) -> Result<()> {
        use ProtocolCall::*;
        let s = &mut self.state;
        if call.is_gated() && s.access.is_paused() {
            return Err(Error::Paused);
        }
        match call {
            Transfer { to, amount } => {
                if *to == self.escrow {
                    return Err(Error::EscrowDirectTransfer);
                }
                s.token.transfer(tx, *to, *amount)?;
            }
            Approve { spender, amount } => {
                s.token.approve(tx, *spender, *amount)?;
            }
            TransferFrom { owner, to, amount } => {
                if *to == self.escrow {
                    return Err(Error::EscrowDirectTransfer);
                }
                s.token.transfer_from(tx, *owner, *to, *amount)?;
            }
            FaucetDrip {} => {
                s.token.faucet_drip(tx)?;
            }
            GrantRole { role, who } => s.access.grant_role(tx, *role, *who)?,
            RevokeRole { role, who } => s.access.revoke_role(tx, *role, *who)?,
            Pause {} => s.access.pause(tx)?,
            Unpause {} => s.access.unpause(tx)?,
            Put { content } => {
                let hash = self.store.put(&content.0)?;
                tx.emit(
                    "Stored",
                    [("hash", hash.to_string()), ("size", content.0.len().to_string())],
                );
            }
            Notarize { hash } => {
                s.poe.notarize(tx, *hash);
            }
            IssueAntReview {
                issuers,
                approver,
                paper_hash,
                requirements_hash,
                deadline,
            } => {
                s.reviews.issue_ant_review(
                    tx,
                    &s.access,
                    &mut s.poe,
                    issuers,
                    *approver,
                    *paper_hash,
                    *requirements_hash,
                    *deadline,
                )?;
            }
            ChangeAntReview {
                id,
                issuers,
                paper_hash,
                requirements_hash,
                deadline,
            } => s.reviews.change_ant_review(
                tx,
                &mut s.poe,
                *id,
                issuers,
                *paper_hash,
                *requirements_hash,
                *deadline,
            )?,
            AddApprover { id, who } => s.reviews.add_approver(tx, *id, *who)?,
            RemoveApprover { id, who } => s.reviews.remove_approver(tx, *id, *who)?,
            Contribute { id, amount } => s.reviews.contribute(tx, &mut s.token, *id, *amount)?,
            FulfillAntReview { id, review_hash } => {
                s.reviews
                    .fulfill_ant_review(tx, &s.access, &mut s.poe, *id, *review_hash)?;
            }
            UpdateReview {
                id,
                fulfillment_id,
                review_hash,
            } => s
                .reviews
                .update_review(tx, &mut s.poe, *id, *fulfillment_id, *review_hash)?,
            AcceptAntReview {
                id,
                fulfillment_id,
                amount,
            } => s
                .reviews
                .accept_ant_review(tx, &mut s.token, *id, *fulfillment_id, *amount)?,
            Refund {
                id,
                contribution_index,
            } => s
                .reviews
                .refund(tx, &mut s.token, *id, *contribution_index)?,
            WithdrawAntReview { id, amount } => {
                s.reviews.withdraw_ant_review(tx, &mut s.token, *id, *amount)?
            }
            Shield { amount, r } => {
                s.confidential.shield(tx, &mut s.token, *amount, r)?;
            }
            JoinSplit(req) => {
                s.confidential.join_split(tx, req)?;
            }
            Unshield { note_id, value, r } => {
                s.confidential
                    .unshield(tx, &mut s.token, *note_id, *value, r)?;
            }
            OpenVoting { id, pool } => s.voting.open_voting(tx, &mut s.reviews, *id, *pool)?,
            Vote {
                id,
                fulfillment_id,
                direction,
            } => s
                .voting
                .vote(tx, &s.reviews, *id, *fulfillment_id, *direction)?,
            FinalizeVoting { id } => {
                s.voting
                    .finalize_voting(tx, &mut s.reviews, &mut s.token, *id)?;
            }
        }
        Ok(())
    }

    /// Looks up a value by slash-separated path, e.g. `balance/0x…`,
    /// `antreview/0/balance`, `note/3/spent`, `tally/0/payouts/1`.
    pub fn query(&self, path: &str) -> Option<Value> {
        let segments: Vec<&str> = path.trim_matches('/').split('/').collect();
        let s = &self.state;
        let (root, rest): (Value, &[&str]) = match segments.as_slice() {
            ["now"] => return Some(json!(self.now.0)),
            ["tx_index"] => return Some(json!(self.tx_index)),
            ["paused"] => return Some(json!(s.access.is_paused())),
            ["total_supply"] => return Some(to_json(&s.token.total_supply())),
            ["escrow"] => return Some(json!(self.escrow.to_string())),
            ["balance", who] => {
                let who: Address = who.parse().ok()?;
                return Some(to_json(&s.token.balance_of(who)));
            }
            ["allowance", owner, spender] => {
                let owner: Address = owner.parse().ok()?;
                let spender: Address = spender.parse().ok()?;
                return Some(to_json(&s.token.allowance(owner, spender)));
            }
            ["role", role, who] => {
                let role: Role = role.parse().ok()?;
                let who: Address = who.parse().ok()?;
                return Some(json!(s.access.has_role(role, who)));
            }
            ["poe", hash, rest @ ..] => {
                let hash: ContentHash = hash.parse().ok()?;
                (to_json(s.poe.record(&hash)?), rest)
            }
            ["antreview", id, rest @ ..] => (to_json(s.reviews.get(id.parse().ok()?).ok()?), rest),
            ["note", id, rest @ ..] => (to_json(s.confidential.note(id.parse().ok()?).ok()?), rest),
            ["tally", id, rest @ ..] => (to_json(s.voting.tally(id.parse().ok()?).ok()?), rest),
            _ => return None,
        };
        if rest.is_empty() {
            return Some(root);
        }
        let pointer: String = rest.iter().map(|seg| format!("/{seg}")).collect();
        root.pointer(&pointer).cloned()
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            version: Snapshot::VERSION,
            config: self.config.clone(),
            now: self.now,
            tx_index: self.tx_index,
            accounts: self.accounts.clone(),
            state: self.state.clone(),
            store: self
                .store
                .iter()
                .map(|(h, b)| (*h, format!("0x{}", hex::encode(b))))
                .collect(),
        }
    }

    pub fn from_snapshot(snap: Snapshot) -> std::result::Result<Self, SnapshotError> {
        if snap.version != Snapshot::VERSION {
            return Err(SnapshotError::Version(snap.version));
        }
        let mut env = Environment::new(snap.config);
        env.now = snap.now;
        env.tx_index = snap.tx_index;
        env.accounts = snap.accounts;
        env.state = snap.state;
        for (hash, blob) in snap.store {
            let bytes = blob
                .strip_prefix("0x")
                .and_then(|d| hex::decode(d).ok())
                .ok_or(SnapshotError::Blob(hash))?;
            if env.store.put(&bytes).ok() != Some(hash) {
                return Err(SnapshotError::Blob(hash));
            }
        }
        Ok(env)
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("state serializes")
}

/// Serialized environment, including stored documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub config: EnvConfig,
    pub now: Timestamp,
    pub tx_index: u64,
    pub accounts: BTreeMap<Address, String>,
    pub state: State,
    pub store: BTreeMap<ContentHash, String>,
}

impl Snapshot {
    pub const VERSION: u32 = 1;
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("unsupported snapshot version {0}")]
    Version(u32),
    #[error("stored blob {0} is corrupt")]
    Blob(ContentHash),
}
