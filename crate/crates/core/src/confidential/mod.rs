//! Note-based confidential ANTS.
//!
//! Public ANTS are shielded into notes holding a commitment to their value.
//! A join-split spends notes and creates new ones; it is valid when the
//! product of the input commitments equals the product of the output
//! commitments, which (with balanced blinding factors) means the hidden
//! values sum to the same total. Notes are unshielded back to public ANTS
//! by revealing an opening.
//!
//! There are no range proofs. Values are bounded to 64 bits at the
//! shield/unshield boundary, and with a 255-bit group order a wrapped
//! value cannot be opened to anything unshieldable without knowing
//! `log_g h`.

mod group;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use group::{hash_to_group, is_probable_prime, GroupElement, GroupParams, Scalar};

use crate::env::Tx;
use crate::error::{Error, Result};
use crate::token::TokenLedger;
use crate::types::{Address, Amount};

pub type NoteId = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub note_id: NoteId,
    pub commitment: GroupElement,
    pub owner: Address,
    pub spent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinSplitRequest {
    pub input_note_ids: Vec<NoteId>,
    pub output_commitments: Vec<GroupElement>,
    pub output_owners: Vec<Address>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfidentialLedger {
    params: GroupParams,
    notes: Vec<Note>,
}

fn join_ids<'a>(ids: impl IntoIterator<Item = &'a NoteId>) -> String {
    ids.into_iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl ConfidentialLedger {
    pub fn new(params: GroupParams) -> Self {
        ConfidentialLedger {
            params,
            notes: Vec::new(),
        }
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn note(&self, id: NoteId) -> Result<&Note> {
        usize::try_from(id)
            .ok()
            .and_then(|i| self.notes.get(i))
            .ok_or(Error::UnknownNote(id))
    }

    pub fn notes(&self) -> impl Iterator<Item = &Note> {
        self.notes.iter()
    }

    pub fn verify_commitment(&self, c: &GroupElement, value: u64, r: &Scalar) -> bool {
        self.params.verify(c, value, r)
    }

    fn push_note(&mut self, commitment: GroupElement, owner: Address) -> Note {
        let note = Note {
            note_id: self.notes.len() as NoteId,
            commitment,
            owner,
            spent: false,
        };
        self.notes.push(note.clone());
        note
    }

    /// Burns `amount` public ANTS from the sender and mints a note committing to it.
    pub fn shield(
        &mut self,
        tx: &mut Tx,
        token: &mut TokenLedger,
        amount: Amount,
        r: &Scalar,
    ) -> Result<Note> {
        let sender = tx.sender();
        let value = u64::try_from(amount.0).map_err(|_| Error::AmountTooLarge)?;
        if !self.params.is_scalar(r) {
            return Err(Error::ScalarOutOfRange);
        }
        token.burn(tx, sender, amount)?;
        let note = self.push_note(self.params.commit(value, r), sender);
        tx.emit(
            "Shielded",
            [
                ("note_id", note.note_id.to_string()),
                ("owner", sender.to_string()),
                ("amount", amount.to_string()),
                ("commitment", note.commitment.to_string()),
            ],
        );
        Ok(note)
    }

    /// Spends the sender's input notes and creates the requested outputs.
    pub fn join_split(&mut self, tx: &mut Tx, req: &JoinSplitRequest) -> Result<Vec<Note>> {
        let sender = tx.sender();
        if req.input_note_ids.is_empty() || req.output_commitments.is_empty() {
            return Err(Error::EmptyJoinSplit);
        }
        if req.output_commitments.len() != req.output_owners.len() {
            return Err(Error::OutputMismatch);
        }
        let mut seen = BTreeSet::new();
        for &id in &req.input_note_ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateInput(id));
            }
            let note = self.note(id)?;
            if note.owner != sender {
                return Err(Error::NotNoteOwner(id));
            }
            if note.spent {
                return Err(Error::NoteSpent(id));
            }
        }
        for (c, owner) in req.output_commitments.iter().zip(&req.output_owners) {
            owner.non_zero()?;
            if !self.params.is_element(&c.0) {
                return Err(Error::InvalidGroupElement);
            }
        }

        let inputs = self.params.product(
            req.input_note_ids
                .iter()
                .map(|&id| &self.notes[id as usize].commitment),
        );
        let outputs = self.params.product(&req.output_commitments);
        if inputs != outputs {
            return Err(Error::JoinSplitUnbalanced);
        }

        for &id in &req.input_note_ids {
            self.notes[id as usize].spent = true;
        }
        let created: Vec<Note> = req
            .output_commitments
            .iter()
            .zip(&req.output_owners)
            .map(|(c, owner)| self.push_note(c.clone(), *owner))
            .collect();
        tx.emit(
            "JoinSplit",
            [
                ("inputs", join_ids(&req.input_note_ids)),
                ("outputs", join_ids(created.iter().map(|n| &n.note_id))),
                (
                    "commitments",
                    created
                        .iter()
                        .map(|n| n.commitment.to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                ),
            ],
        );
        Ok(created)
    }

    /// Opens a note and mints its value back as public ANTS.
    pub fn unshield(
        &mut self,
        tx: &mut Tx,
        token: &mut TokenLedger,
        note_id: NoteId,
        value: u64,
        r: &Scalar,
    ) -> Result<Amount> {
        let sender = tx.sender();
        let note = self.note(note_id)?;
        if note.owner != sender {
            return Err(Error::NotNoteOwner(note_id));
        }
        if note.spent {
            return Err(Error::NoteSpent(note_id));
        }
        if !self.params.verify(&note.commitment, value, r) {
            return Err(Error::CommitmentMismatch);
        }
        self.notes[note_id as usize].spent = true;
        let amount = Amount(value.into());
        token.mint(tx, sender, amount)?;
        tx.emit(
            "Unshielded",
            [
                ("note_id", note_id.to_string()),
                ("owner", sender.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(amount)
    }
}
