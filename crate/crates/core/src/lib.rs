//! Deterministic engine for the Ants-Review protocol: anonymous,
//! token-incentivized peer review organized as bounties.
//!
//! [`Environment`] simulates the ledger. Everything that changes protocol
//! state goes through [`Environment::execute`] as a [`ProtocolCall`]:
//!
//! * [`token`]: the ANTS token and its faucet
//! * [`access`]: roles and the pause switch
//! * [`poe`]: content-addressed documents and proof of existence
//! * [`antsreview`]: the bounty lifecycle
//! * [`confidential`]: commitment-based private notes
//! * [`voting`]: community scoring of reviews with proportional payout
//!
//! [`scenario`] replays line-delimited JSON scripts against an environment.

pub mod access;
pub mod antsreview;
pub mod call;
pub mod confidential;
pub mod env;
pub mod error;
pub mod event;
pub mod hash;
pub mod poe;
pub mod scenario;
pub mod token;
pub mod types;
pub mod voting;

pub use access::Role;
pub use call::ProtocolCall;
pub use env::{derive_address, EnvConfig, Environment, Snapshot, State, TxContext};
pub use error::{Error, ParseError, Result};
pub use event::Event;
pub use hash::{sha256, ContentHash, Hash32};
pub use types::{Address, Amount, Timestamp};
