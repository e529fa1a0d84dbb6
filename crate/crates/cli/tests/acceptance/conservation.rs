use antsreview_core::call::{Blob, ProtocolCall as C};
use antsreview_core::confidential::{GroupElement, JoinSplitRequest, Scalar};
use antsreview_core::voting::Direction;
use antsreview_core::{Address, Amount, Environment, Error, Role, Timestamp};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::util::{ensure, h, Env};
use crate::Check;

const SEQUENCES: usize = 10_000;
const MAX_LEN: usize = 40;

/// Plaintext view of a shielded note.
#[derive(Clone)]
struct OracleNote {
    owner: Address,
    value: u64,
    r: BigUint,
    spent: bool,
}

struct Oracle {
    minted: u128,
    shielded: u128,
    unshielded: u128,
    notes: Vec<OracleNote>,
}

struct Group {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    h: BigUint,
}

impl Group {
    fn commit(&self, v: u64, r: &BigUint) -> BigUint {
        self.g.modpow(&BigUint::from(v), &self.p) * self.h.modpow(r, &self.p) % &self.p
    }

    fn random_scalar(&self, rng: &mut ChaCha8Rng) -> BigUint {
        BigUint::from_bytes_be(&rng.random::<[u8; 32]>()) % &self.q
    }
}

struct Fixture {
    base: Environment,
    actors: Vec<Address>,
    reviewers: Vec<Address>,
    admin: Address,
    minted: u128,
}

fn fixture() -> Result<Fixture, String> {
    let mut w = Env::new(Environment::default());
    let admin = w.env.deployer();
    let seeds = ["alice", "frank", "bob", "eve", "carol", "dan", "ted"];
    let mut actors: Vec<Address> = seeds.iter().map(|s| w.account(s)).collect();
    let [alice, frank, bob, eve, carol, dan, ted] = actors[..] else { unreachable!() };
    w.grant(Role::Issuer, alice)?;
    w.grant(Role::Issuer, frank)?;
    w.grant(Role::PeerReviewer, bob)?;
    w.grant(Role::PeerReviewer, eve)?;
    for a in &actors {
        w.ok(*a, C::FaucetDrip {})?;
    }
    let minted = actors.len() as u128 * w.env.config().faucet.drip_amount.0;
    let first = w.issue(alice, ted, 2_000)?;
    let second = w.issue(frank, alice, 5_000)?;
    for id in [first, second] {
        w.contribute(carol, id, 300)?;
        w.contribute(dan, id, 200)?;
    }
    w.ok(bob, C::FulfillAntReview { id: first, review_hash: h("bob") })?;
    actors.push(admin);
    Ok(Fixture { base: w.env, actors, reviewers: vec![bob, eve], admin, minted })
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn amount(rng: &mut ChaCha8Rng) -> Amount {
    Amount(match rng.random_range(0..10) {
        0 => 0,
        1 => 10u128.pow(21) + rng.random_range(0..2),
        _ => rng.random_range(1..500),
    })
}

/// One random call. Returns the expected outcome when the generator can
/// predict it from plaintext knowledge, plus the oracle update to apply on
/// success.
enum Plan {
    Free(Address, Vec<C>),
    Shield(Address, C, OracleNote),
    JoinSplit(Address, C, Option<Error>, Vec<usize>, Vec<OracleNote>),
    Unshield(Address, C, Option<Error>, usize, u64),
}

fn plan(rng: &mut ChaCha8Rng, env: &Environment, fx: &Fixture, group: &Group, oracle: &Oracle) -> Plan {
    let anyone = pick(rng, &fx.actors);
    let other = pick(rng, &fx.actors);
    let reviews = env.state().reviews.len() as u64;
    let op = match rng.random_range(0..36) {
        32..=34 => 25,
        35 => 26,
        op => op,
    };
    // mostly existing bounties, sometimes one past the end
    let mut id = if rng.random_bool(0.9) { rng.random_range(0..reviews) } else { reviews };
    let state = env.state();
    let eligible: Vec<u64> = match op {
        22 => state.reviews.iter().filter(|r| r.fulfillments.is_empty()).map(|r| r.id).collect(),
        25 | 26 => state.voting.tallies().filter(|t| !t.finalized).map(|t| t.antreview_id).collect(),
        _ => vec![],
    };
    if !eligible.is_empty() && rng.random_bool(0.8) {
        id = pick(rng, &eligible);
    }
    let review = env.state().reviews.get(id).ok();
    let fids = review.map_or(1, |r| r.fulfillments.len() as u64 + 1);
    let fid = rng.random_range(0..fids);
    let issuers = review.map_or(vec![], |r| r.issuers.iter().copied().collect());
    let approvers = review.map_or(vec![], |r| r.approvers.iter().copied().collect());
    let contributors: Vec<Address> = review.map_or(vec![], |r| r.contributions.iter().map(|c| c.contributor).collect());
    let fulfiller = review.and_then(|r| r.fulfillment(fid).ok()).map(|f| f.reviewer);
    let deadline = Timestamp(env.now().0.saturating_add(rng.random_range(0..3000)));

    // a plausible sender most of the time
    let mut role_pick = |set: Vec<Address>| -> Address {
        if set.is_empty() || rng.random_bool(0.2) { anyone } else { set[rng.random_range(0..set.len())] }
    };
    let who = match op {
        7..=9 => fx.admin,
        12 | 13 => role_pick(vec![fx.actors[0], fx.actors[1]]),
        14 | 15 | 16 | 23 | 24 => role_pick(issuers.clone()),
        19 => role_pick(fx.reviewers.clone()),
        20 => role_pick(fulfiller.into_iter().collect()),
        21 => role_pick(approvers.clone()),
        22 => role_pick(contributors.clone()),
        26 => role_pick([issuers.clone(), approvers.clone()].concat()),
        _ => anyone,
    };
    let calls = match op {
        0 => vec![C::Transfer { to: other, amount: amount(rng) }],
        1 => vec![C::Approve { spender: if rng.random_bool(0.5) { env.escrow() } else { other }, amount: amount(rng) }],
        2 => vec![C::TransferFrom { owner: other, to: pick(rng, &fx.actors), amount: amount(rng) }],
        3 => vec![C::FaucetDrip {}],
        4 => vec![C::GrantRole { role: pick(rng, &Role::ALL), who: other }],
        5 => vec![C::RevokeRole { role: pick(rng, &[Role::Issuer, Role::PeerReviewer]), who: other }],
        6 => vec![C::Put { content: Blob(rng.random::<[u8; 4]>().to_vec()) }],
        7 if rng.random_bool(0.3) => vec![C::Pause {}],
        7..=9 => vec![C::Unpause {}],
        10 | 11 => vec![C::Notarize { hash: h(&rng.random_range(0..20).to_string()) }],
        12 | 13 => vec![C::IssueAntReview {
            issuers: vec![who],
            approver: other,
            paper_hash: h("paper"),
            requirements_hash: h("reqs"),
            deadline,
        }],
        14 => vec![C::ChangeAntReview { id, issuers: vec![who, other], paper_hash: h("p2"), requirements_hash: h("r2"), deadline }],
        15 => vec![C::AddApprover { id, who: other }],
        16 => vec![C::RemoveApprover { id, who: other }],
        17 | 18 => {
            let amount = amount(rng);
            vec![C::Approve { spender: env.escrow(), amount }, C::Contribute { id, amount }]
        }
        19 => vec![C::FulfillAntReview { id, review_hash: h("review") }],
        20 => vec![C::UpdateReview { id, fulfillment_id: fid, review_hash: h("review v2") }],
        21 => vec![C::AcceptAntReview { id, fulfillment_id: fid, amount: Amount(rng.random_range(0..300)) }],
        22 => {
            let n = contributors.len() as u64 + 1;
            vec![C::Refund { id, contribution_index: rng.random_range(0..n) }]
        }
        23 => vec![C::WithdrawAntReview { id, amount: Amount(rng.random_range(0..300)) }],
        24 => vec![C::OpenVoting { id, pool: Amount(rng.random_range(0..400)) }],
        25 | 26 if op == 25 || rng.random_bool(0.5) => {
            let direction = if rng.random_bool(0.7) { Direction::Up } else { Direction::Down };
            vec![C::Vote { id, fulfillment_id: fid, direction }]
        }
        26 => vec![C::FinalizeVoting { id }],
        27 | 28 => {
            let value = rng.random_range(0..400u64);
            let r = group.random_scalar(rng);
            let note = OracleNote { owner: who, value, r: r.clone(), spent: false };
            return Plan::Shield(who, C::Shield { amount: Amount(value as u128), r: Scalar(r) }, note);
        }
        29 | 30 => return plan_join_split(rng, fx, group, oracle),
        _ => return plan_unshield(rng, fx, oracle),
    };
    Plan::Free(who, calls)
}

fn plan_join_split(rng: &mut ChaCha8Rng, fx: &Fixture, group: &Group, oracle: &Oracle) -> Plan {
    let who = pick(rng, &fx.actors);
    let mut inputs: Vec<usize> = (0..oracle.notes.len())
        .filter(|&i| oracle.notes[i].owner == who && !oracle.notes[i].spent)
        .collect();
    inputs.truncate(rng.random_range(1..=2));
    let mut expect = None;
    if inputs.is_empty() || rng.random_bool(0.1) {
        // somebody else's or an already spent note
        if oracle.notes.is_empty() {
            let req = JoinSplitRequest { input_note_ids: vec![0], output_commitments: vec![], output_owners: vec![] };
            return Plan::JoinSplit(who, C::JoinSplit(req), Some(Error::EmptyJoinSplit), vec![], vec![]);
        }
        let i = rng.random_range(0..oracle.notes.len());
        expect = if oracle.notes[i].owner != who {
            Some(Error::NotNoteOwner(i as u64))
        } else if oracle.notes[i].spent {
            Some(Error::NoteSpent(i as u64))
        } else {
            None
        };
        inputs = vec![i];
    }
    let total: u64 = inputs.iter().map(|&i| oracle.notes[i].value).sum();
    let r_in = inputs.iter().fold(BigUint::ZERO, |acc, &i| (acc + &oracle.notes[i].r) % &group.q);

    let k = rng.random_range(1..=3);
    let mut values = vec![0u64; k];
    let mut left = total;
    for v in values.iter_mut().take(k - 1) {
        *v = rng.random_range(0..=left);
        left -= *v;
    }
    values[k - 1] = left;
    let mut rs: Vec<BigUint> = (0..k - 1).map(|_| group.random_scalar(rng)).collect();
    let used = rs.iter().fold(BigUint::ZERO, |acc, r| (acc + r) % &group.q);
    rs.push((r_in + &group.q - used) % &group.q);

    if expect.is_none() && rng.random_bool(0.2) {
        let j = rng.random_range(0..k);
        if rng.random_bool(0.5) {
            values[j] += 1;
        } else {
            rs[j] = (&rs[j] + 1u32) % &group.q;
        }
        expect = Some(Error::JoinSplitUnbalanced);
    }
    let outputs: Vec<OracleNote> = values
        .iter()
        .zip(&rs)
        .map(|(&value, r)| OracleNote { owner: pick(rng, &fx.actors), value, r: r.clone(), spent: false })
        .collect();
    let req = JoinSplitRequest {
        input_note_ids: inputs.iter().map(|&i| i as u64).collect(),
        output_commitments: outputs.iter().map(|n| GroupElement(group.commit(n.value, &n.r))).collect(),
        output_owners: outputs.iter().map(|n| n.owner).collect(),
    };
    Plan::JoinSplit(who, C::JoinSplit(req), expect, inputs, outputs)
}

fn plan_unshield(rng: &mut ChaCha8Rng, fx: &Fixture, oracle: &Oracle) -> Plan {
    if oracle.notes.is_empty() {
        let who = pick(rng, &fx.actors);
        let call = C::Unshield { note_id: 0, value: 0, r: Scalar(BigUint::ZERO) };
        return Plan::Unshield(who, call, Some(Error::UnknownNote(0)), 0, 0);
    }
    let i = rng.random_range(0..oracle.notes.len());
    let note = &oracle.notes[i];
    let who = if rng.random_bool(0.8) { note.owner } else { pick(rng, &fx.actors) };
    let wrong = rng.random_bool(0.15);
    let value = if wrong { note.value + 1 } else { note.value };
    let expect = if who != note.owner {
        Some(Error::NotNoteOwner(i as u64))
    } else if note.spent {
        Some(Error::NoteSpent(i as u64))
    } else if wrong {
        Some(Error::CommitmentMismatch)
    } else {
        None
    };
    let call = C::Unshield { note_id: i as u64, value, r: Scalar(note.r.clone()) };
    Plan::Unshield(who, call, expect, i, value)
}

fn check_outcome(got: &Result<(), Error>, expect: &Option<Error>, paused: bool, what: &str) -> Result<(), String> {
    let want = if paused {
        Err(Error::Paused)
    } else {
        expect.clone().map_or(Ok(()), Err)
    };
    ensure!(*got == want, "{what}: expected {want:?}, got {got:?}");
    Ok(())
}

fn check_invariants(env: &Environment, oracle: &Oracle) -> Result<(), String> {
    let s = env.state();
    let supply = s.token.total_supply().0;
    let sum: u128 = s.token.balances().map(|(_, a)| a.0).sum();
    ensure!(sum == supply, "balances {sum} != supply {supply}");
    ensure!(
        supply == oracle.minted - oracle.shielded + oracle.unshielded,
        "supply {supply} != minted {} - shielded {} + unshielded {}",
        oracle.minted,
        oracle.shielded,
        oracle.unshielded
    );

    let mut escrowed = 0u128;
    for r in s.reviews.iter() {
        let unrefunded: u128 = r.contributions.iter().filter(|c| !c.refunded).map(|c| c.amount.0).sum();
        let accounted = r.balance.0 + r.reserved.0 + r.total_paid.0 + r.total_withdrawn.0;
        ensure!(unrefunded == accounted, "review {}: contributions {unrefunded} != {accounted}", r.id);
        escrowed += r.balance.0 + r.reserved.0;
    }
    let escrow = env.balance_of(env.escrow()).0;
    ensure!(escrow == escrowed, "escrow {escrow} != held {escrowed}");

    let notes: Vec<_> = s.confidential.notes().collect();
    ensure!(notes.len() == oracle.notes.len(), "{} notes, oracle has {}", notes.len(), oracle.notes.len());
    for (n, o) in notes.iter().zip(&oracle.notes) {
        ensure!(n.spent == o.spent && n.owner == o.owner, "note {} disagrees with oracle", n.note_id);
    }
    let hidden: u128 = oracle.notes.iter().filter(|n| !n.spent).map(|n| n.value as u128).sum();
    ensure!(
        hidden == oracle.shielded - oracle.unshielded,
        "hidden {hidden} != shielded {} - unshielded {}",
        oracle.shielded,
        oracle.unshielded
    );
    Ok(())
}

fn check_openings(env: &Environment, group: &Group, oracle: &Oracle) -> Result<(), String> {
    for (n, o) in env.state().confidential.notes().zip(&oracle.notes) {
        ensure!(n.commitment.0 == group.commit(o.value, &o.r), "note {} does not open to oracle value", n.note_id);
    }
    Ok(())
}

pub fn run() -> Check {
    let fx = fixture()?;
    let params = fx.base.state().confidential.params();
    let group = Group { p: params.p().clone(), q: params.q().clone(), g: params.g().clone(), h: params.h().clone() };
    let drip = fx.base.config().faucet.drip_amount.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0xA27);
    let (mut ops, mut errors, mut predicted) = (0usize, 0usize, 0usize);

    for seq in 0..SEQUENCES {
        let mut env = fx.base.clone();
        let mut oracle = Oracle { minted: fx.minted, shielded: 0, unshielded: 0, notes: Vec::new() };
        let len = rng.random_range(1..=MAX_LEN);
        for step in 0..len {
            if rng.random_bool(0.2) {
                env.advance_time(rng.random_range(0..1500)).map_err(|e| e.to_string())?;
            }
            let paused = env.state().access.is_paused();
            let what = format!("sequence {seq} step {step}");
            match plan(&mut rng, &env, &fx, &group, &oracle) {
                Plan::Free(who, calls) => {
                    for call in calls {
                        let got = env.execute(who, &call);
                        if matches!(call, C::FaucetDrip {}) && got.is_ok() {
                            oracle.minted += drip;
                        }
                        errors += got.is_err() as usize;
                        ops += 1;
                        check_invariants(&env, &oracle).map_err(|e| format!("{what}: {e}"))?;
                    }
                    continue;
                }
                Plan::Shield(who, call, note) => {
                    let expect = (env.balance_of(who).0 < note.value as u128).then_some(Error::InsufficientBalance);
                    let got = env.execute(who, &call).map(drop);
                    check_outcome(&got, &expect, paused, &what)?;
                    if got.is_ok() {
                        oracle.shielded += note.value as u128;
                        oracle.notes.push(note);
                    }
                    predicted += 1;
                    errors += got.is_err() as usize;
                }
                Plan::JoinSplit(who, call, expect, inputs, outputs) => {
                    let got = env.execute(who, &call).map(drop);
                    check_outcome(&got, &expect, paused, &what)?;
                    if got.is_ok() {
                        for i in inputs {
                            oracle.notes[i].spent = true;
                        }
                        oracle.notes.extend(outputs);
                    }
                    predicted += 1;
                    errors += got.is_err() as usize;
                }
                Plan::Unshield(who, call, expect, i, value) => {
                    let got = env.execute(who, &call).map(drop);
                    check_outcome(&got, &expect, paused, &what)?;
                    if got.is_ok() {
                        oracle.notes[i].spent = true;
                        oracle.unshielded += value as u128;
                    }
                    predicted += 1;
                    errors += got.is_err() as usize;
                }
            }
            ops += 1;
            check_invariants(&env, &oracle).map_err(|e| format!("{what}: {e}"))?;
        }
        check_openings(&env, &group, &oracle).map_err(|e| format!("sequence {seq}: {e}"))?;
    }
    Ok(format!(
        "{SEQUENCES} sequences, {ops} calls ({errors} reverted, {predicted} confidential outcomes predicted), 0 violations"
    ))
}
