//! Community up/down voting on submitted reviews, settled by paying a
//! reserved pool out in proportion to each review's net score.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::antsreview::{AntReviewId, AntsReview, FulfillmentId};
use crate::env::Tx;
use crate::error::{Error, ParseError, Result};
use crate::token::TokenLedger;
use crate::types::{Address, Amount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Up => "up",
            Direction::Down => "down",
        })
    }
}

impl FromStr for Direction {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "up" => Ok(Direction::Up),
            "down" => Ok(Direction::Down),
            _ => Err(ParseError::Direction(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Votes {
    pub up: u64,
    pub down: u64,
}

impl Votes {
    /// Net score, floored at zero.
    pub fn score(&self) -> u64 {
        self.up.saturating_sub(self.down)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteTally {
    pub antreview_id: AntReviewId,
    pub votes: BTreeMap<FulfillmentId, Votes>,
    pub voted: BTreeSet<(Address, FulfillmentId)>,
    pub finalized: bool,
    pub pool: Amount,
    pub payouts: BTreeMap<FulfillmentId, Amount>,
}

impl VoteTally {
    pub fn votes_for(&self, fid: FulfillmentId) -> Votes {
        self.votes.get(&fid).copied().unwrap_or_default()
    }
}

/// Splits `pool` proportionally to `scores`.
///
/// Each share is `floor(pool * score / total)`; the rounding remainder goes
/// to the highest score, ties broken by the lowest id. Returns `None` when
/// every score is zero. Zero-score entries are included with a zero payout.
pub fn proportional_split(
    pool: Amount,
    scores: &[(FulfillmentId, u64)],
) -> Option<Vec<(FulfillmentId, Amount)>> {
    let total: u128 = scores.iter().map(|&(_, s)| u128::from(s)).sum();
    if total == 0 {
        return None;
    }
    let pool_big = BigUint::from(pool.0);
    let total_big = BigUint::from(total);
    let mut payouts: Vec<(FulfillmentId, Amount)> = scores
        .iter()
        .map(|&(fid, s)| {
            let share: BigUint = &pool_big * s / &total_big;
            // share <= pool, so it fits
            let share = u128::try_from(share).expect("share bounded by pool");
            (fid, Amount(share))
        })
        .collect();
    let distributed: u128 = payouts.iter().map(|(_, a)| a.0).sum();
    let remainder = pool.0 - distributed;

    let winner = scores
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("non-empty when total > 0");
    payouts[winner].1 = Amount(payouts[winner].1 .0 + remainder);
    Some(payouts)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Voting {
    tallies: BTreeMap<AntReviewId, VoteTally>,
}

impl Voting {
    pub fn tally(&self, id: AntReviewId) -> Result<&VoteTally> {
        self.tallies.get(&id).ok_or(Error::NoTally(id))
    }

    pub fn tallies(&self) -> impl Iterator<Item = &VoteTally> {
        self.tallies.values()
    }

    /// Moves `pool` out of the bounty's balance into a new tally.
    pub fn open_voting(
        &mut self,
        tx: &mut Tx,
        reviews: &mut AntsReview,
        id: AntReviewId,
        pool: Amount,
    ) -> Result<()> {
        let review = reviews.get_mut(id)?;
        if !review.is_issuer(tx.sender()) {
            return Err(Error::NotIssuer);
        }
        if self.tallies.contains_key(&id) {
            return Err(Error::VotingAlreadyOpen(id));
        }
        if review.accepting_submissions(tx.now()) {
            return Err(Error::DeadlineNotReached);
        }
        if review.fulfillments.is_empty() {
            return Err(Error::NoFulfillments);
        }
        review.reserve(pool)?;
        self.tallies.insert(
            id,
            VoteTally {
                antreview_id: id,
                votes: BTreeMap::new(),
                voted: BTreeSet::new(),
                finalized: false,
                pool,
                payouts: BTreeMap::new(),
            },
        );
        tx.emit(
            "VotingOpened",
            [("id", id.to_string()), ("pool", pool.to_string())],
        );
        Ok(())
    }

    pub fn vote(
        &mut self,
        tx: &mut Tx,
        reviews: &AntsReview,
        id: AntReviewId,
        fulfillment_id: FulfillmentId,
        direction: Direction,
    ) -> Result<()> {
        let voter = tx.sender();
        let review = reviews.get(id)?;
        let tally = self.tallies.get_mut(&id).ok_or(Error::NoTally(id))?;
        if tally.finalized {
            return Err(Error::VotingFinalized);
        }
        if review.fulfillment(fulfillment_id)?.reviewer == voter {
            return Err(Error::SelfVote);
        }
        if !tally.voted.insert((voter, fulfillment_id)) {
            return Err(Error::AlreadyVoted);
        }
        let entry = tally.votes.entry(fulfillment_id).or_default();
        let counter = match direction {
            Direction::Up => &mut entry.up,
            Direction::Down => &mut entry.down,
        };
        *counter = counter.checked_add(1).ok_or(Error::Overflow)?;
        tx.emit(
            "Voted",
            [
                ("id", id.to_string()),
                ("fulfillment_id", fulfillment_id.to_string()),
                ("voter", voter.to_string()),
                ("direction", direction.to_string()),
            ],
        );
        Ok(())
    }

    /// Pays the pool out by net score. With no positive score the pool goes
    /// back to the bounty's balance.
    pub fn finalize_voting(
        &mut self,
        tx: &mut Tx,
        reviews: &mut AntsReview,
        token: &mut TokenLedger,
        id: AntReviewId,
    ) -> Result<BTreeMap<FulfillmentId, Amount>> {
        let sender = tx.sender();
        let escrow = reviews.escrow();
        let review = reviews.get_mut(id)?;
        let tally = self.tallies.get_mut(&id).ok_or(Error::NoTally(id))?;
        if tally.finalized {
            return Err(Error::VotingFinalized);
        }
        if !review.is_issuer(sender) && !review.is_approver(sender) {
            return Err(Error::NotApprover);
        }

        let scores: Vec<(FulfillmentId, u64)> = review
            .fulfillments
            .iter()
            .map(|f| (f.id, tally.votes_for(f.id).score()))
            .collect();
        let mut payouts = BTreeMap::new();
        let mut attrs = vec![
            ("id".to_string(), id.to_string()),
            ("pool".to_string(), tally.pool.to_string()),
        ];
        match proportional_split(tally.pool, &scores) {
            None => {
                review.release_reserved(tally.pool)?;
                attrs.push(("restored".into(), tally.pool.to_string()));
            }
            Some(split) => {
                for (fid, amount) in split {
                    let reviewer = review.fulfillment(fid)?.reviewer;
                    if !amount.is_zero() {
                        review.pay_reserved(tx, token, escrow, reviewer, amount)?;
                    }
                    attrs.push((format!("payout:{fid}"), amount.to_string()));
                    payouts.insert(fid, amount);
                }
                attrs.push(("restored".into(), "0".into()));
            }
        }
        tally.finalized = true;
        tally.payouts = payouts.clone();
        tx.emit("VotingFinalized", attrs);
        Ok(payouts)
    }
}
