//! The set of state-changing protocol calls a transaction can carry.

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::access::Role;
use crate::antsreview::{AntReviewId, FulfillmentId};
use crate::confidential::{JoinSplitRequest, NoteId, Scalar};
use crate::error::Error;
use crate::hash::ContentHash;
use crate::types::{Address, Amount, Timestamp};
use crate::voting::Direction;

/// Raw document bytes. JSON form is a string: `0x`-prefixed strings are
/// hex-decoded, anything else is taken as UTF-8 text.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Blob(pub Vec<u8>);

impl fmt::Debug for Blob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Blob({} bytes)", self.0.len())
    }
}

impl Serialize for Blob {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("0x{}", hex::encode(&self.0)))
    }
}

impl<'de> Deserialize<'de> for Blob {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match s.strip_prefix("0x") {
            Some(digits) => hex::decode(digits).map(Blob).map_err(de::Error::custom),
            None => Ok(Blob(s.into_bytes())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum ProtocolCall {
    // token
    Transfer { to: Address, amount: Amount },
    Approve { spender: Address, amount: Amount },
    TransferFrom { owner: Address, to: Address, amount: Amount },
    FaucetDrip {},
    // access
    GrantRole { role: Role, who: Address },
    RevokeRole { role: Role, who: Address },
    Pause {},
    Unpause {},
    // poe
    Put { content: Blob },
    Notarize { hash: ContentHash },
    // antsreview
    IssueAntReview {
        issuers: Vec<Address>,
        approver: Address,
        paper_hash: ContentHash,
        requirements_hash: ContentHash,
        deadline: Timestamp,
    },
    ChangeAntReview {
        id: AntReviewId,
        issuers: Vec<Address>,
        paper_hash: ContentHash,
        requirements_hash: ContentHash,
        deadline: Timestamp,
    },
    AddApprover { id: AntReviewId, who: Address },
    RemoveApprover { id: AntReviewId, who: Address },
    Contribute { id: AntReviewId, amount: Amount },
    FulfillAntReview { id: AntReviewId, review_hash: ContentHash },
    UpdateReview {
        id: AntReviewId,
        fulfillment_id: FulfillmentId,
        review_hash: ContentHash,
    },
    AcceptAntReview {
        id: AntReviewId,
        fulfillment_id: FulfillmentId,
        amount: Amount,
    },
    Refund { id: AntReviewId, contribution_index: u64 },
    WithdrawAntReview { id: AntReviewId, amount: Amount },
    // confidential
    Shield { amount: Amount, r: Scalar },
    JoinSplit(JoinSplitRequest),
    Unshield { note_id: NoteId, value: u64, r: Scalar },
    // voting
    OpenVoting { id: AntReviewId, pool: Amount },
    Vote {
        id: AntReviewId,
        fulfillment_id: FulfillmentId,
        direction: Direction,
    },
    FinalizeVoting { id: AntReviewId },
}

impl ProtocolCall {
    pub const NAMES: [&'static str; 26] = [
        "transfer",
        "approve",
        "transfer_from",
        "faucet_drip",
        "grant_role",
        "revoke_role",
        "pause",
        "unpause",
        "put",
        "notarize",
        "issue_ant_review",
        "change_ant_review",
        "add_approver",
        "remove_approver",
        "contribute",
        "fulfill_ant_review",
        "update_review",
        "accept_ant_review",
        "refund",
        "withdraw_ant_review",
        "shield",
        "join_split",
        "unshield",
        "open_voting",
        "vote",
        "finalize_voting",
    ];

    pub fn is_known(op: &str) -> bool {
        Self::NAMES.contains(&op)
    }

    /// Builds a call from an operation name and its JSON arguments.
    /// Missing arguments are treated as `{}`.
    pub fn from_json(op: &str, args: Option<Value>) -> Result<ProtocolCall, Error> {
        if !Self::is_known(op) {
            return Err(Error::UnknownCall(op.to_string()));
        }
        let args = args.unwrap_or_else(|| Value::Object(Default::default()));
        serde_json::from_value(serde_json::json!({ "op": op, "args": args }))
            .map_err(|e| Error::BadArgs(e.to_string()))
    }

    pub fn name(&self) -> &'static str {
        use ProtocolCall::*;
        match self {
            Transfer { .. } => "transfer",
            Approve { .. } => "approve",
            TransferFrom { .. } => "transfer_from",
            FaucetDrip {} => "faucet_drip",
            GrantRole { .. } => "grant_role",
            RevokeRole { .. } => "revoke_role",
            Pause {} => "pause",
            Unpause {} => "unpause",
            Put { .. } => "put",
            Notarize { .. } => "notarize",
            IssueAntReview { .. } => "issue_ant_review",
            ChangeAntReview { .. } => "change_ant_review",
            AddApprover { .. } => "add_approver",
            RemoveApprover { .. } => "remove_approver",
            Contribute { .. } => "contribute",
            FulfillAntReview { .. } => "fulfill_ant_review",
            UpdateReview { .. } => "update_review",
            AcceptAntReview { .. } => "accept_ant_review",
            Refund { .. } => "refund",
            WithdrawAntReview { .. } => "withdraw_ant_review",
            Shield { .. } => "shield",
            JoinSplit(_) => "join_split",
            Unshield { .. } => "unshield",
            OpenVoting { .. } => "open_voting",
            Vote { .. } => "vote",
            FinalizeVoting { .. } => "finalize_voting",
        }
    }

    /// Whether the circuit breaker blocks this call. Plain token movements,
    /// role administration, unpausing and the off-chain store stay live.
    pub fn is_gated(&self) -> bool {
        use ProtocolCall::*;
        !matches!(
            self,
            Transfer { .. }
                | Approve { .. }
                | TransferFrom { .. }
                | GrantRole { .. }
                | RevokeRole { .. }
                | Pause {}
                | Unpause {}
                | Put { .. }
        )
    }
}
