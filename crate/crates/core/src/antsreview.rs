//! The AntReview bounty lifecycle.
//!
//! An issuer opens a bounty for reviews of a paper, anyone may stake ANTS
//! into it, peer reviewers submit reviews before the deadline and approvers
//! pay accepted reviews out of the escrowed balance. After the deadline,
//! contributors are refunded if nobody reviewed, and issuers may withdraw
//! what is left.
//!
//! All escrowed ANTS sit on a single engine-owned escrow address. For every
//! bounty
//!
//! ```text
//! unrefunded contributions = balance + reserved + total_paid + total_withdrawn
//! ```
//!
//! where `reserved` is the part handed to a community vote.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::access::{Role, RoleRegistry};
use crate::env::Tx;
use crate::error::{Error, Result};
use crate::hash::ContentHash;
use crate::poe::PoeRegistry;
use crate::token::TokenLedger;
use crate::types::{Address, Amount, Timestamp};

pub type AntReviewId = u64;
pub type FulfillmentId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contribution {
    pub contributor: Address,
    pub amount: Amount,
    pub refunded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewVersion {
    pub hash: ContentHash,
    pub submitted_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fulfillment {
    pub id: FulfillmentId,
    pub reviewer: Address,
    /// Every submitted version, oldest first. Never empty.
    pub review_hashes: Vec<ReviewVersion>,
    pub accepted: bool,
    pub paid: Amount,
}

impl Fulfillment {
    pub fn latest(&self) -> &ReviewVersion {
        self.review_hashes.last().expect("fulfillment has a version")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntReview {
    pub id: AntReviewId,
    pub issuers: BTreeSet<Address>,
    pub approvers: BTreeSet<Address>,
    pub paper_hash: ContentHash,
    pub requirements_hash: ContentHash,
    pub deadline: Timestamp,
    /// Escrowed ANTS available for acceptance, withdrawal and refunds.
    pub balance: Amount,
    /// Escrowed ANTS set aside for a community vote.
    pub reserved: Amount,
    pub contributions: Vec<Contribution>,
    pub fulfillments: Vec<Fulfillment>,
    pub total_paid: Amount,
    pub total_withdrawn: Amount,
}

impl AntReview {
    pub fn is_issuer(&self, who: Address) -> bool {
        self.issuers.contains(&who)
    }

    pub fn is_approver(&self, who: Address) -> bool {
        self.approvers.contains(&who)
    }

    pub fn is_reviewer(&self, who: Address) -> bool {
        self.fulfillments.iter().any(|f| f.reviewer == who)
    }

    pub fn accepting_submissions(&self, now: Timestamp) -> bool {
        now < self.deadline
    }

    pub fn fulfillment(&self, id: FulfillmentId) -> Result<&Fulfillment> {
        usize::try_from(id)
            .ok()
            .and_then(|i| self.fulfillments.get(i))
            .ok_or(Error::UnknownFulfillment(id))
    }

    fn fulfillment_mut(&mut self, id: FulfillmentId) -> Result<&mut Fulfillment> {
        usize::try_from(id)
            .ok()
            .and_then(|i| self.fulfillments.get_mut(i))
            .ok_or(Error::UnknownFulfillment(id))
    }

    pub fn unrefunded_contributions(&self) -> Result<Amount> {
        self.contributions
            .iter()
            .filter(|c| !c.refunded)
            .try_fold(Amount::ZERO, |acc, c| acc.checked_add(c.amount))
    }

    /// Total escrow held on behalf of this bounty.
    pub fn escrowed(&self) -> Result<Amount> {
        self.balance.checked_add(self.reserved)
    }

    fn require_issuer(&self, who: Address) -> Result<()> {
        if self.is_issuer(who) {
            Ok(())
        } else {
            Err(Error::NotIssuer)
        }
    }

    pub(crate) fn reserve(&mut self, amount: Amount) -> Result<()> {
        if amount > self.balance {
            return Err(Error::AmountExceedsBalance);
        }
        self.balance = self.balance.checked_sub(amount)?;
        self.reserved = self.reserved.checked_add(amount)?;
        Ok(())
    }

    pub(crate) fn release_reserved(&mut self, amount: Amount) -> Result<()> {
        self.reserved = self.reserved.checked_sub(amount)?;
        self.balance = self.balance.checked_add(amount)?;
        Ok(())
    }

    /// Pays `amount` out of the reservation to `to` as a reward.
    pub(crate) fn pay_reserved(
        &mut self,
        tx: &mut Tx,
        token: &mut TokenLedger,
        escrow: Address,
        to: Address,
        amount: Amount,
    ) -> Result<()> {
        self.reserved = self.reserved.checked_sub(amount)?;
        self.total_paid = self.total_paid.checked_add(amount)?;
        token.move_funds(tx, escrow, to, amount)
    }
}

fn collect_issuers(issuers: &[Address]) -> Result<BTreeSet<Address>> {
    if issuers.is_empty() {
        return Err(Error::EmptyIssuers);
    }
    issuers.iter().map(|a| a.non_zero()).collect()
}

fn join(set: &BTreeSet<Address>) -> String {
    set.iter().map(Address::to_string).collect::<Vec<_>>().join(",")
}

/// All bounties and the escrow account that holds their funds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntsReview {
    escrow: Address,
    reviews: Vec<AntReview>,
}

impl AntsReview {
    pub fn new(escrow: Address) -> Self {
        AntsReview {
            escrow,
            reviews: Vec::new(),
        }
    }

    pub fn escrow(&self) -> Address {
        self.escrow
    }

    pub fn get(&self, id: AntReviewId) -> Result<&AntReview> {
        usize::try_from(id)
            .ok()
            .and_then(|i| self.reviews.get(i))
            .ok_or(Error::UnknownAntReview(id))
    }

    pub(crate) fn get_mut(&mut self, id: AntReviewId) -> Result<&mut AntReview> {
        usize::try_from(id)
            .ok()
            .and_then(|i| self.reviews.get_mut(i))
            .ok_or(Error::UnknownAntReview(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = &AntReview> {
        self.reviews.iter()
    }

    pub fn len(&self) -> usize {
        self.reviews.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviews.is_empty()
    }

    #[allow(clippy::too_many_arguments)]
    pub fn issue_ant_review(
        &mut self,
        tx: &mut Tx,
        access: &RoleRegistry,
        poe: &mut PoeRegistry,
        issuers: &[Address],
        approver: Address,
        paper_hash: ContentHash,
        requirements_hash: ContentHash,
        deadline: Timestamp,
    ) -> Result<AntReviewId> {
        let sender = tx.sender();
        access.require(Role::Issuer, sender)?;
        let issuers = collect_issuers(issuers)?;
        if !issuers.contains(&sender) {
            return Err(Error::NotIssuer);
        }
        approver.non_zero()?;
        if deadline <= tx.now() {
            return Err(Error::DeadlineNotInFuture);
        }

        let id = self.reviews.len() as AntReviewId;
        poe.notarize(tx, paper_hash);
        poe.notarize(tx, requirements_hash);
        tx.emit(
            "AntReviewIssued",
            [
                ("id", id.to_string()),
                ("issuers", join(&issuers)),
                ("approver", approver.to_string()),
                ("paper_hash", paper_hash.to_string()),
                ("requirements_hash", requirements_hash.to_string()),
                ("deadline", deadline.to_string()),
            ],
        );
        self.reviews.push(AntReview {
            id,
            issuers,
            approvers: BTreeSet::from([approver]),
            paper_hash,
            requirements_hash,
            deadline,
            balance: Amount::ZERO,
            reserved: Amount::ZERO,
            contributions: Vec::new(),
            fulfillments: Vec::new(),
            total_paid: Amount::ZERO,
            total_withdrawn: Amount::ZERO,
        });
        Ok(id)
    }

    /// Replaces issuers, documents and deadline. Existing fulfillments are kept.
    #[allow(clippy::too_many_arguments)]
    pub fn change_ant_review(
        &mut self,
        tx: &mut Tx,
        poe: &mut PoeRegistry,
        id: AntReviewId,
        new_issuers: &[Address],
        new_paper_hash: ContentHash,
        new_requirements_hash: ContentHash,
        new_deadline: Timestamp,
    ) -> Result<()> {
        let sender = tx.sender();
        let review = self.get_mut(id)?;
        review.require_issuer(sender)?;
        let issuers = collect_issuers(new_issuers)?;
        if issuers.iter().any(|a| review.is_reviewer(*a)) {
            return Err(Error::ConflictOfInterest);
        }

        review.issuers = issuers;
        review.paper_hash = new_paper_hash;
        review.requirements_hash = new_requirements_hash;
        review.deadline = new_deadline;
        poe.notarize(tx, new_paper_hash);
        poe.notarize(tx, new_requirements_hash);
        tx.emit(
            "AntReviewChanged",
            [
                ("id", id.to_string()),
                ("issuers", join(&review.issuers)),
                ("paper_hash", new_paper_hash.to_string()),
                ("requirements_hash", new_requirements_hash.to_string()),
                ("deadline", new_deadline.to_string()),
                ("fulfillments", review.fulfillments.len().to_string()),
            ],
        );
        Ok(())
    }

    pub fn add_approver(&mut self, tx: &mut Tx, id: AntReviewId, who: Address) -> Result<()> {
        let review = self.get_mut(id)?;
        review.require_issuer(tx.sender())?;
        who.non_zero()?;
        if review.is_reviewer(who) {
            return Err(Error::ConflictOfInterest);
        }
        review.approvers.insert(who);
        tx.emit(
            "ApproverAdded",
            [("id", id.to_string()), ("approver", who.to_string())],
        );
        Ok(())
    }

    pub fn remove_approver(&mut self, tx: &mut Tx, id: AntReviewId, who: Address) -> Result<()> {
        let review = self.get_mut(id)?;
        review.require_issuer(tx.sender())?;
        review.approvers.remove(&who);
        tx.emit(
            "ApproverRemoved",
            [("id", id.to_string()), ("approver", who.to_string())],
        );
        if review.approvers.is_empty() && review.fulfillments.iter().any(|f| !f.accepted) {
            tx.emit("WarnNoApprover", [("id", id.to_string())]);
        }
        Ok(())
    }

    /// Pulls `amount` from the sender into escrow. The sender must have
    /// approved the escrow address beforehand.
    pub fn contribute(
        &mut self,
        tx: &mut Tx,
        token: &mut TokenLedger,
        id: AntReviewId,
        amount: Amount,
    ) -> Result<()> {
        let sender = tx.sender();
        let escrow = self.escrow;
        let review = self.get_mut(id)?;
        if amount.is_zero() {
            return Err(Error::ZeroAmount);
        }
        if !review.accepting_submissions(tx.now()) {
            return Err(Error::DeadlinePassed);
        }
        token.pull(tx, sender, escrow, amount)?;
        review.balance = review.balance.checked_add(amount)?;
        let index = review.contributions.len();
        review.contributions.push(Contribution {
            contributor: sender,
            amount,
            refunded: false,
        });
        tx.emit(
            "Contributed",
            [
                ("id", id.to_string()),
                ("contribution_index", index.to_string()),
                ("contributor", sender.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(())
    }

    pub fn fulfill_ant_review(
        &mut self,
        tx: &mut Tx,
        access: &RoleRegistry,
        poe: &mut PoeRegistry,
        id: AntReviewId,
        review_hash: ContentHash,
    ) -> Result<FulfillmentId> {
        let sender = tx.sender();
        let now = tx.now();
        let review = self.get_mut(id)?;
        access.require(Role::PeerReviewer, sender)?;
        if !review.accepting_submissions(now) {
            return Err(Error::DeadlinePassed);
        }
        if review.is_issuer(sender) || review.is_approver(sender) {
            return Err(Error::ConflictOfInterest);
        }

        let fid = review.fulfillments.len() as FulfillmentId;
        review.fulfillments.push(Fulfillment {
            id: fid,
            reviewer: sender,
            review_hashes: vec![ReviewVersion {
                hash: review_hash,
                submitted_at: now,
            }],
            accepted: false,
            paid: Amount::ZERO,
        });
        poe.notarize(tx, review_hash);
        tx.emit(
            "Fulfilled",
            [
                ("id", id.to_string()),
                ("fulfillment_id", fid.to_string()),
                ("reviewer", sender.to_string()),
                ("review_hash", review_hash.to_string()),
            ],
        );
        Ok(fid)
    }

    pub fn update_review(
        &mut self,
        tx: &mut Tx,
        poe: &mut PoeRegistry,
        id: AntReviewId,
        fulfillment_id: FulfillmentId,
        new_hash: ContentHash,
    ) -> Result<()> {
        let sender = tx.sender();
        let now = tx.now();
        let review = self.get_mut(id)?;
        let open = review.accepting_submissions(now);
        let f = review.fulfillment_mut(fulfillment_id)?;
        if f.reviewer != sender {
            return Err(Error::NotReviewer);
        }
        if f.accepted {
            return Err(Error::AlreadyAccepted);
        }
        if !open {
            return Err(Error::DeadlinePassed);
        }
        f.review_hashes.push(ReviewVersion {
            hash: new_hash,
            submitted_at: now,
        });
        let version = f.review_hashes.len() - 1;
        poe.notarize(tx, new_hash);
        tx.emit(
            "ReviewUpdated",
            [
                ("id", id.to_string()),
                ("fulfillment_id", fulfillment_id.to_string()),
                ("review_hash", new_hash.to_string()),
                ("version", version.to_string()),
            ],
        );
        Ok(())
    }

    /// Pays `amount` from the bounty to the reviewer of `fulfillment_id`.
    /// The approver picks the amount, so rewards can track review quality.
    pub fn accept_ant_review(
        &mut self,
        tx: &mut Tx,
        token: &mut TokenLedger,
        id: AntReviewId,
        fulfillment_id: FulfillmentId,
        amount: Amount,
    ) -> Result<()> {
        let sender = tx.sender();
        let escrow = self.escrow;
        let review = self.get_mut(id)?;
        if !review.is_approver(sender) {
            return Err(Error::NotApprover);
        }
        if review.fulfillment(fulfillment_id)?.accepted {
            return Err(Error::AlreadyAccepted);
        }
        if amount.is_zero() {
            return Err(Error::ZeroAmount);
        }
        if amount > review.balance {
            return Err(Error::AmountExceedsBalance);
        }

        review.balance = review.balance.checked_sub(amount)?;
        review.total_paid = review.total_paid.checked_add(amount)?;
        let f = review.fulfillment_mut(fulfillment_id)?;
        f.accepted = true;
        f.paid = amount;
        let reviewer = f.reviewer;
        token.move_funds(tx, escrow, reviewer, amount)?;
        tx.emit(
            "Accepted",
            [
                ("id", id.to_string()),
                ("fulfillment_id", fulfillment_id.to_string()),
                ("approver", sender.to_string()),
                ("reviewer", reviewer.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(())
    }

    /// Returns a contribution in full once the deadline has passed without
    /// any review having been submitted.
    pub fn refund(
        &mut self,
        tx: &mut Tx,
        token: &mut TokenLedger,
        id: AntReviewId,
        contribution_index: u64,
    ) -> Result<()> {
        let sender = tx.sender();
        let now = tx.now();
        let escrow = self.escrow;
        let review = self.get_mut(id)?;
        let deadline_passed = !review.accepting_submissions(now);
        let has_fulfillments = !review.fulfillments.is_empty();
        let balance = review.balance;
        let c = usize::try_from(contribution_index)
            .ok()
            .and_then(|i| review.contributions.get_mut(i))
            .ok_or(Error::UnknownContribution(contribution_index))?;
        if c.contributor != sender {
            return Err(Error::NotContributor);
        }
        if c.refunded {
            return Err(Error::AlreadyRefunded);
        }
        if !deadline_passed {
            return Err(Error::DeadlineNotReached);
        }
        if has_fulfillments {
            return Err(Error::HasFulfillments);
        }
        // An issuer withdrawal may already have drained the balance.
        if c.amount > balance {
            return Err(Error::AmountExceedsBalance);
        }
        c.refunded = true;
        let amount = c.amount;
        review.balance = review.balance.checked_sub(amount)?;
        token.move_funds(tx, escrow, sender, amount)?;
        tx.emit(
            "Refunded",
            [
                ("id", id.to_string()),
                ("contribution_index", contribution_index.to_string()),
                ("contributor", sender.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(())
    }

    pub fn withdraw_ant_review(
        &mut self,
        tx: &mut Tx,
        token: &mut TokenLedger,
        id: AntReviewId,
        amount: Amount,
    ) -> Result<()> {
        let sender = tx.sender();
        let now = tx.now();
        let escrow = self.escrow;
        let review = self.get_mut(id)?;
        review.require_issuer(sender)?;
        if review.accepting_submissions(now) {
            return Err(Error::DeadlineNotReached);
        }
        if amount > review.balance {
            return Err(Error::AmountExceedsBalance);
        }
        review.balance = review.balance.checked_sub(amount)?;
        review.total_withdrawn = review.total_withdrawn.checked_add(amount)?;
        token.move_funds(tx, escrow, sender, amount)?;
        tx.emit(
            "Withdrawn",
            [
                ("id", id.to_string()),
                ("issuer", sender.to_string()),
                ("amount", amount.to_string()),
                ("balance", review.balance.to_string()),
            ],
        );
        Ok(())
    }
}
