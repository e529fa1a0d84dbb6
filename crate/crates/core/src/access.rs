//! Role registry and the protocol-wide circuit breaker.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::Tx;
use crate::error::{Error, ParseError, Result};
use crate::types::Address;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    Issuer,
    PeerReviewer,
    Pauser,
    /// Grants and revokes every role, itself included.
    Admin,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Issuer, Role::PeerReviewer, Role::Pauser, Role::Admin];

    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Issuer => "ISSUER",
            Role::PeerReviewer => "PEER_REVIEWER",
            Role::Pauser => "PAUSER",
            Role::Admin => "ADMIN",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| ParseError::Role(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleRegistry {
    members: BTreeMap<Role, BTreeSet<Address>>,
    paused: bool,
}

impl RoleRegistry {
    /// Genesis registry: the deployer holds ADMIN and PAUSER.
    pub fn new(deployer: Address) -> Self {
        let mut members: BTreeMap<Role, BTreeSet<Address>> = BTreeMap::new();
        members.entry(Role::Admin).or_default().insert(deployer);
        members.entry(Role::Pauser).or_default().insert(deployer);
        RoleRegistry {
            members,
            paused: false,
        }
    }

    pub fn has_role(&self, role: Role, who: Address) -> bool {
        !who.is_zero() && self.members.get(&role).is_some_and(|m| m.contains(&who))
    }

    pub fn members(&self, role: Role) -> impl Iterator<Item = &Address> {
        self.members.get(&role).into_iter().flatten()
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn require(&self, role: Role, who: Address) -> Result<()> {
        if self.has_role(role, who) {
            Ok(())
        } else {
            Err(Error::MissingRole(role))
        }
    }

    pub fn grant_role(&mut self, tx: &mut Tx, role: Role, who: Address) -> Result<()> {
        self.require(Role::Admin, tx.sender())?;
        who.non_zero()?;
        self.members.entry(role).or_default().insert(who);
        tx.emit(
            "RoleGranted",
            [
                ("role", role.to_string()),
                ("account", who.to_string()),
                ("sender", tx.sender().to_string()),
            ],
        );
        Ok(())
    }

    pub fn revoke_role(&mut self, tx: &mut Tx, role: Role, who: Address) -> Result<()> {
        self.require(Role::Admin, tx.sender())?;
        if let Some(set) = self.members.get_mut(&role) {
            set.remove(&who);
            if set.is_empty() {
                self.members.remove(&role);
            }
        }
        tx.emit(
            "RoleRevoked",
            [
                ("role", role.to_string()),
                ("account", who.to_string()),
                ("sender", tx.sender().to_string()),
            ],
        );
        if role == Role::Admin && self.members(Role::Admin).next().is_none() {
            tx.emit("WarnNoAdmin", [] as [(&str, String); 0]);
        }
        Ok(())
    }

    pub fn pause(&mut self, tx: &mut Tx) -> Result<()> {
        self.require(Role::Pauser, tx.sender())?;
        if self.paused {
            return Err(Error::AlreadyPaused);
        }
        self.paused = true;
        tx.emit("Paused", [("account", tx.sender().to_string())]);
        Ok(())
    }

    pub fn unpause(&mut self, tx: &mut Tx) -> Result<()> {
        self.require(Role::Pauser, tx.sender())?;
        if !self.paused {
            return Err(Error::NotPaused);
        }
        self.paused = false;
        tx.emit("Unpaused", [("account", tx.sender().to_string())]);
        Ok(())
    }
}
