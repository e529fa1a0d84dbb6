//! The ANTS token ledger and its test-net faucet.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::Tx;
use crate::error::{Error, Result};
use crate::types::{Address, Amount, Timestamp};

pub const NAME: &str = "Ants-Review";
pub const SYMBOL: &str = "ANTS";
pub const DECIMALS: u8 = 18;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaucetConfig {
    pub drip_amount: Amount,
    /// Seconds an address must wait between drips.
    pub cooldown: u64,
}

impl Default for FaucetConfig {
    fn default() -> Self {
        FaucetConfig {
            drip_amount: Amount::tokens(1000),
            cooldown: 86_400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaucetState {
    pub config: FaucetConfig,
    pub last_drip: BTreeMap<Address, Timestamp>,
}

/// Balances, allowances and supply of ANTS.
///
/// Zero balances and zero allowances are pruned so that equal ledgers
/// serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLedger {
    balances: BTreeMap<Address, Amount>,
    /// owner -> spender -> amount
    allowances: BTreeMap<Address, BTreeMap<Address, Amount>>,
    total_supply: Amount,
    faucet: FaucetState,
}

impl TokenLedger {
    pub fn new(faucet: FaucetConfig) -> Self {
        TokenLedger {
            balances: BTreeMap::new(),
            allowances: BTreeMap::new(),
            total_supply: Amount::ZERO,
            faucet: FaucetState {
                config: faucet,
                last_drip: BTreeMap::new(),
            },
        }
    }

    pub fn balance_of(&self, who: Address) -> Amount {
        self.balances.get(&who).copied().unwrap_or_default()
    }

    pub fn allowance(&self, owner: Address, spender: Address) -> Amount {
        self.allowances
            .get(&owner)
            .and_then(|m| m.get(&spender))
            .copied()
            .unwrap_or_default()
    }

    pub fn total_supply(&self) -> Amount {
        self.total_supply
    }

    pub fn balances(&self) -> impl Iterator<Item = (&Address, &Amount)> {
        self.balances.iter()
    }

    pub fn faucet(&self) -> &FaucetState {
        &self.faucet
    }

    pub fn transfer(&mut self, tx: &mut Tx, to: Address, amount: Amount) -> Result<bool> {
        let from = tx.sender();
        self.move_funds(tx, from, to, amount)?;
        Ok(true)
    }

    pub fn approve(&mut self, tx: &mut Tx, spender: Address, amount: Amount) -> Result<bool> {
        spender.non_zero()?;
        let owner = tx.sender();
        self.set_allowance(owner, spender, amount);
        tx.emit(
            "Approval",
            [
                ("owner", owner.to_string()),
                ("spender", spender.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(true)
    }

    pub fn transfer_from(
        &mut self,
        tx: &mut Tx,
        owner: Address,
        to: Address,
        amount: Amount,
    ) -> Result<bool> {
        let spender = tx.sender();
        self.spend_allowance(owner, spender, amount)?;
        self.move_funds(tx, owner, to, amount)?;
        Ok(true)
    }

    /// Mints the configured drip amount to the sender, at most once per cooldown.
    pub fn faucet_drip(&mut self, tx: &mut Tx) -> Result<Amount> {
        let who = tx.sender();
        let now = tx.now();
        if let Some(last) = self.faucet.last_drip.get(&who) {
            // now >= last + cooldown, written so it cannot overflow
            if now.0 < last.0 || now.0 - last.0 < self.faucet.config.cooldown {
                return Err(Error::CooldownActive);
            }
        }
        let amount = self.faucet.config.drip_amount;
        self.mint(tx, who, amount)?;
        self.faucet.last_drip.insert(who, now);
        tx.emit("Drip", [("to", who.to_string()), ("amount", amount.to_string())]);
        Ok(amount)
    }

    /// Moves funds and emits `Transfer`. Used directly by the escrow paths.
    pub(crate) fn move_funds(
        &mut self,
        tx: &mut Tx,
        from: Address,
        to: Address,
        amount: Amount,
    ) -> Result<()> {
        to.non_zero()?;
        self.debit(from, amount)?;
        self.credit(to, amount)?;
        tx.emit(
            "Transfer",
            [
                ("from", from.to_string()),
                ("to", to.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(())
    }

    /// Pulls `amount` from `owner` using the allowance granted to `spender`.
    pub(crate) fn pull(
        &mut self,
        tx: &mut Tx,
        owner: Address,
        spender: Address,
        amount: Amount,
    ) -> Result<()> {
        self.spend_allowance(owner, spender, amount)?;
        self.move_funds(tx, owner, spender, amount)
    }

    pub(crate) fn mint(&mut self, tx: &mut Tx, to: Address, amount: Amount) -> Result<()> {
        to.non_zero()?;
        self.total_supply = self.total_supply.checked_add(amount)?;
        self.credit(to, amount)?;
        tx.emit(
            "Transfer",
            [
                ("from", Address::ZERO.to_string()),
                ("to", to.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(())
    }

    pub(crate) fn burn(&mut self, tx: &mut Tx, from: Address, amount: Amount) -> Result<()> {
        self.debit(from, amount)?;
        self.total_supply = self.total_supply.checked_sub(amount)?;
        tx.emit(
            "Transfer",
            [
                ("from", from.to_string()),
                ("to", Address::ZERO.to_string()),
                ("amount", amount.to_string()),
            ],
        );
        Ok(())
    }

    fn spend_allowance(&mut self, owner: Address, spender: Address, amount: Amount) -> Result<()> {
        let current = self.allowance(owner, spender);
        let rest = current
            .checked_sub(amount)
            .map_err(|_| Error::InsufficientAllowance)?;
        if self.balance_of(owner) < amount {
            return Err(Error::InsufficientBalance);
        }
        self.set_allowance(owner, spender, rest);
        Ok(())
    }

    fn set_allowance(&mut self, owner: Address, spender: Address, amount: Amount) {
        if amount.is_zero() {
            if let Some(m) = self.allowances.get_mut(&owner) {
                m.remove(&spender);
                if m.is_empty() {
                    self.allowances.remove(&owner);
                }
            }
        } else {
            self.allowances.entry(owner).or_default().insert(spender, amount);
        }
    }

    fn debit(&mut self, from: Address, amount: Amount) -> Result<()> {
        let rest = self
            .balance_of(from)
            .checked_sub(amount)
            .map_err(|_| Error::InsufficientBalance)?;
        self.set_balance(from, rest);
        Ok(())
    }

    fn credit(&mut self, to: Address, amount: Amount) -> Result<()> {
        let new = self.balance_of(to).checked_add(amount)?;
        self.set_balance(to, new);
        Ok(())
    }

    fn set_balance(&mut self, who: Address, amount: Amount) {
        if amount.is_zero() {
            self.balances.remove(&who);
        } else {
            self.balances.insert(who, amount);
        }
    }
}
