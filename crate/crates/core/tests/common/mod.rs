#![allow(dead_code)]

use antsreview_core::call::ProtocolCall as C;
use antsreview_core::{sha256, Address, Amount, ContentHash, Environment, Event, Result, Role, Timestamp};

/// A small cast on a fresh environment: Alice issues, Bob and Eve review,
/// Ted approves, Carol and Dan contribute. Everyone has dripped the faucet.
pub struct World {
    pub env: Environment,
    pub admin: Address,
    pub alice: Address,
    pub bob: Address,
    pub eve: Address,
    pub ted: Address,
    pub carol: Address,
    pub dan: Address,
}

pub fn h(text: &str) -> ContentHash {
    sha256(text.as_bytes())
}

impl World {
    pub fn new() -> Self {
        let mut env = Environment::default();
        let admin = env.deployer();
        let mut acct = |s: &str| env.create_account(s.as_bytes()).unwrap();
        let (alice, bob, eve, ted, carol, dan) =
            (acct("alice"), acct("bob"), acct("eve"), acct("ted"), acct("carol"), acct("dan"));
        let mut w = World { env, admin, alice, bob, eve, ted, carol, dan };
        w.ok(admin, C::GrantRole { role: Role::Issuer, who: alice });
        w.ok(admin, C::GrantRole { role: Role::PeerReviewer, who: bob });
        w.ok(admin, C::GrantRole { role: Role::PeerReviewer, who: eve });
        for who in [alice, bob, eve, ted, carol, dan] {
            w.ok(who, C::FaucetDrip {});
        }
        w
    }

    pub fn call(&mut self, who: Address, call: C) -> Result<Vec<Event>> {
        self.env.execute(who, &call)
    }

    #[track_caller]
    pub fn ok(&mut self, who: Address, call: C) -> Vec<Event> {
        let name = call.name();
        self.call(who, call).unwrap_or_else(|e| panic!("{name} failed: {e}"))
    }

    pub fn now(&self) -> u64 {
        self.env.now().0
    }

    pub fn balance(&self, who: Address) -> Amount {
        self.env.balance_of(who)
    }

    /// Alice issues a bounty with Ted as approver, `deadline_in` seconds from now.
    pub fn issue(&mut self, deadline_in: u64) -> u64 {
        let id = self.env.state().reviews.len() as u64;
        let deadline = Timestamp(self.now() + deadline_in);
        self.ok(
            self.alice,
            C::IssueAntReview {
                issuers: vec![self.alice],
                approver: self.ted,
                paper_hash: h("paper"),
                requirements_hash: h("requirements"),
                deadline,
            },
        );
        id
    }

    pub fn contribute(&mut self, who: Address, id: u64, amount: u128) {
        let escrow = self.env.escrow();
        self.ok(who, C::Approve { spender: escrow, amount: Amount(amount) });
        self.ok(who, C::Contribute { id, amount: Amount(amount) });
    }

    pub fn fulfill(&mut self, who: Address, id: u64, review: &str) -> Result<Vec<Event>> {
        self.call(who, C::FulfillAntReview { id, review_hash: h(review) })
    }

    pub fn advance(&mut self, secs: u64) {
        self.env.advance_time(secs).unwrap();
    }
}
