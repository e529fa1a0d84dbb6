use thiserror::Error;

use crate::access::Role;

/// Everything that can make a protocol call revert.
///
/// `code()` is the stable identifier written into error events.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("protocol is paused")]
    Paused,
    #[error("unknown call `{0}`")]
    UnknownCall(String),
    #[error("malformed arguments: {0}")]
    BadArgs(String),
    #[error("sender is not a known account")]
    UnknownSender,
    #[error("the zero address is not allowed here")]
    ZeroAddress,
    #[error("address is reserved for the engine")]
    ReservedAddress,
    #[error("tokens cannot be sent to the escrow account directly")]
    EscrowDirectTransfer,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("time overflow")]
    TimeOverflow,

    // token
    #[error("insufficient balance")]
    InsufficientBalance,
    #[error("insufficient allowance")]
    InsufficientAllowance,
    #[error("faucet cooldown has not elapsed")]
    CooldownActive,

    // access
    #[error("sender lacks role {0}")]
    MissingRole(Role),
    #[error("protocol is already paused")]
    AlreadyPaused,
    #[error("protocol is not paused")]
    NotPaused,

    // poe
    #[error("content of {size} bytes exceeds the {max} byte limit")]
    ContentTooLarge { size: usize, max: usize },
    #[error("content not found")]
    NotFound,

    // antsreview
    #[error("unknown ant review {0}")]
    UnknownAntReview(u64),
    #[error("unknown fulfillment {0}")]
    UnknownFulfillment(u64),
    #[error("unknown contribution {0}")]
    UnknownContribution(u64),
    #[error("issuer set must not be empty")]
    EmptyIssuers,
    #[error("deadline must lie in the future")]
    DeadlineNotInFuture,
    #[error("deadline has passed")]
    DeadlinePassed,
    #[error("deadline has not been reached")]
    DeadlineNotReached,
    #[error("sender is not an issuer")]
    NotIssuer,
    #[error("sender is not an approver")]
    NotApprover,
    #[error("sender is not the reviewer of this fulfillment")]
    NotReviewer,
    #[error("sender is not the contributor")]
    NotContributor,
    #[error("conflict of interest between reviewer and issuer/approver")]
    ConflictOfInterest,
    #[error("amount must be positive")]
    ZeroAmount,
    #[error("amount exceeds the ant review balance")]
    AmountExceedsBalance,
    #[error("fulfillment already accepted")]
    AlreadyAccepted,
    #[error("contribution already refunded")]
    AlreadyRefunded,
    #[error("ant review has fulfillments")]
    HasFulfillments,
    #[error("ant review has no fulfillments")]
    NoFulfillments,

    // confidential
    #[error("unknown note {0}")]
    UnknownNote(u64),
    #[error("note {0} is already spent")]
    NoteSpent(u64),
    #[error("sender does not own note {0}")]
    NotNoteOwner(u64),
    #[error("opening does not match the commitment")]
    CommitmentMismatch,
    #[error("join-split commitments do not balance")]
    JoinSplitUnbalanced,
    #[error("join-split needs at least one input and one output")]
    EmptyJoinSplit,
    #[error("output commitments and owners differ in length")]
    OutputMismatch,
    #[error("note {0} is listed twice as input")]
    DuplicateInput(u64),
    #[error("value is not an element of the commitment group")]
    InvalidGroupElement,
    #[error("blinding scalar is not below the group order")]
    ScalarOutOfRange,
    #[error("amount does not fit in 64 bits")]
    AmountTooLarge,

    // voting
    #[error("voting already opened for ant review {0}")]
    VotingAlreadyOpen(u64),
    #[error("no voting tally for ant review {0}")]
    NoTally(u64),
    #[error("voting already finalized")]
    VotingFinalized,
    #[error("sender already voted on this fulfillment")]
    AlreadyVoted,
    #[error("reviewers cannot vote on their own review")]
    SelfVote,
}

impl Error {
    /// Stable snake_case identifier for event logs.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            Paused => "paused",
            UnknownCall(_) => "unknown_call",
            BadArgs(_) => "bad_args",
            UnknownSender => "unknown_sender",
            ReservedAddress => "reserved_address",
            EscrowDirectTransfer => "escrow_direct_transfer",
            ZeroAddress => "zero_address",
            Overflow => "overflow",
            TimeOverflow => "time_overflow",
            InsufficientBalance => "insufficient_balance",
            InsufficientAllowance => "insufficient_allowance",
            CooldownActive => "cooldown_active",
            MissingRole(_) => "missing_role",
            AlreadyPaused => "already_paused",
            NotPaused => "not_paused",
            ContentTooLarge { .. } => "content_too_large",
            NotFound => "not_found",
            UnknownAntReview(_) => "unknown_ant_review",
            UnknownFulfillment(_) => "unknown_fulfillment",
            UnknownContribution(_) => "unknown_contribution",
            EmptyIssuers => "empty_issuers",
            DeadlineNotInFuture => "deadline_not_in_future",
            DeadlinePassed => "deadline_passed",
            DeadlineNotReached => "deadline_not_reached",
            NotIssuer => "not_issuer",
            NotApprover => "not_approver",
            NotReviewer => "not_reviewer",
            NotContributor => "not_contributor",
            ConflictOfInterest => "conflict_of_interest",
            ZeroAmount => "zero_amount",
            AmountExceedsBalance => "amount_exceeds_balance",
            AlreadyAccepted => "already_accepted",
            AlreadyRefunded => "already_refunded",
            HasFulfillments => "has_fulfillments",
            NoFulfillments => "no_fulfillments",
            UnknownNote(_) => "unknown_note",
            NoteSpent(_) => "spent",
            NotNoteOwner(_) => "not_note_owner",
            CommitmentMismatch => "commitment_mismatch",
            JoinSplitUnbalanced => "join_split_unbalanced",
            EmptyJoinSplit => "empty_join_split",
            OutputMismatch => "output_mismatch",
            DuplicateInput(_) => "duplicate_input",
            InvalidGroupElement => "invalid_group_element",
            ScalarOutOfRange => "scalar_out_of_range",
            AmountTooLarge => "amount_too_large",
            VotingAlreadyOpen(_) => "voting_already_open",
            NoTally(_) => "no_tally",
            VotingFinalized => "voting_finalized",
            AlreadyVoted => "already_voted",
            SelfVote => "self_vote",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures while decoding textual values (addresses, hashes, scalars, params).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid address `{0}`: expected 0x followed by 40 hex digits")]
    Address(String),
    #[error("invalid hash `{0}`: expected 0x followed by 64 hex digits")]
    Hash(String),
    #[error("invalid amount `{0}`")]
    Amount(String),
    #[error("unknown role `{0}`")]
    Role(String),
    #[error("invalid vote direction `{0}`")]
    Direction(String),
    #[error("invalid integer `{0}`")]
    Integer(String),
    #[error("invalid group parameters: {0}")]
    Params(String),
}
