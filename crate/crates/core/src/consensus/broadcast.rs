//! Detectable broadcast from correlated lists.
//!
//! Three parties: one sender, two receivers. A trusted dealer (standing in
//! for entanglement-based dealing) draws a uniform bit list `s` and gives
//! each receiver a view of it with every position independently hidden with
//! probability 1/2.
//!
//! To broadcast bit `b`, the sender sends each receiver the claim `(b, T)`
//! where `T = { j : s_j = 1 - b }`. A receiver audits a claim against its
//! view: every revealed position in `T` must show `1 - b`, every revealed
//! position outside must show `b`; malformed index sets count as inconsistent.
//! In the second round the receivers forward the claims they received to each
//! other and audit those too. Decision rule, per receiver:
//!
//! * direct and forwarded claims consistent and equal: output the bit;
//! * both consistent but conflicting: output ⊥ (sender provably equivocated);
//! * own claim consistent, forwarded inconsistent: trust the direct claim
//!   (the other receiver forged);
//! * own claim inconsistent, forwarded consistent: adopt the forwarded claim
//!   (the sender cheated this receiver; the relayed claim is auditable);
//! * both inconsistent: output ⊥.
//!
//! An equivocating sender that keeps its index sets truthful produces two
//! individually consistent, conflicting claims, so both receivers output ⊥
//! deterministically. A receiver forging a claim must guess the sender bits
//! at positions it cannot see and escapes detection with probability at most
//! `(3/4)^(L/2)`.

use rand::Rng;
use serde::Serialize;

use crate::rng::SimRng;

use super::ConsensusError;

/// Dealer output: the sender's bit list and each receiver's partial view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelatedLists {
    pub length: usize,
    pub sender_list: Vec<bool>,
    /// `views[r][j]` is `Some(s_j)` where receiver `r` sees position `j`.
    pub views: [Vec<Option<bool>>; 2],
}

/// Shortest list the dealer will produce.
pub const MIN_LIST_LENGTH: usize = 8;

/// Deal a fresh list set: uniform sender bits, each position revealed to each
/// receiver independently with probability 1/2.
pub fn deal_correlated_lists(
    length: usize,
    rng: &mut SimRng,
) -> Result<CorrelatedLists, ConsensusError> {
    if length < MIN_LIST_LENGTH {
        return Err(ConsensusError::ListTooShort {
            min: MIN_LIST_LENGTH,
            got: length,
        });
    }
    let sender_list: Vec<bool> = (0..length).map(|_| rng.random_bool(0.5)).collect();
    let mut views = [vec![None; length], vec![None; length]];
    for view in &mut views {
        for (j, slot) in view.iter_mut().enumerate() {
            if rng.random_bool(0.5) {
                *slot = Some(sender_list[j]);
            }
        }
    }
    Ok(CorrelatedLists {
        length,
        sender_list,
        views,
    })
}

/// A broadcast claim: the announced bit and the positions alleged to hold its
/// complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim {
    pub bit: bool,
    pub flips: Vec<u32>,
}

impl Claim {
    /// The truthful claim for `bit` over `sender_list`.
    pub fn honest(sender_list: &[bool], bit: bool) -> Claim {
        Claim {
            bit,
            flips: sender_list
                .iter()
                .enumerate()
                .filter(|(_, &s)| s != bit)
                .map(|(j, _)| j as u32)
                .collect(),
        }
    }
}

/// Audit `claim` against one receiver's view. Strictly increasing in-range
/// index sets are required; anything else is inconsistent, not an error.
pub fn claim_consistent(view: &[Option<bool>], claim: &Claim) -> bool {
    let mut prev: Option<u32> = None;
    for &j in &claim.flips {
        if j as usize >= view.len() || prev.is_some_and(|p| p >= j) {
            return false;
        }
        prev = Some(j);
    }
    let mut in_flips = vec![false; view.len()];
    for &j in &claim.flips {
        in_flips[j as usize] = true;
    }
    // A revealed position inside the flip set must show the complement bit,
    // one outside must show the claimed bit.
    view.iter().enumerate().all(|(j, seen)| match seen {
        Some(value) => *value == (claim.bit ^ in_flips[j]),
        None => true,
    })
}

/// What the sender does in round one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderBehavior {
    /// Same truthful claim to both receivers.
    Honest(bool),
    /// `bit` to receiver 0 and its complement to receiver 1, both with
    /// truthful index sets.
    Equivocate(bool),
    /// Truthful claim to one receiver, out-of-range garbage to the other.
    MalformedTo { receiver: usize, bit: bool },
}

/// What each receiver does when forwarding in round two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverBehavior {
    /// Forward the received claim unchanged.
    Honest,
    /// Forward a forged claim for the complement bit, guessing the sender
    /// bits at positions outside its own view.
    ForgeOpposite,
}

/// Per-receiver outcome: the broadcast bit or ⊥.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Bit(bool),
    Bot,
}

/// Round-one claims, one per receiver.
pub fn sender_claims(lists: &CorrelatedLists, behavior: SenderBehavior) -> [Claim; 2] {
    match behavior {
        SenderBehavior::Honest(bit) => {
            let claim = Claim::honest(&lists.sender_list, bit);
            [claim.clone(), claim]
        }
        SenderBehavior::Equivocate(bit) => [
            Claim::honest(&lists.sender_list, bit),
            Claim::honest(&lists.sender_list, !bit),
        ],
        SenderBehavior::MalformedTo { receiver, bit } => {
            let honest = Claim::honest(&lists.sender_list, bit);
            let garbage = Claim {
                bit,
                flips: vec![lists.length as u32 + 7],
            };
            if receiver == 0 {
                [garbage, honest]
            } else {
                [honest, garbage]
            }
        }
    }
}

/// Round-two forwarding: what receiver `who` relays to the other receiver.
pub fn receiver_forward(
    lists: &CorrelatedLists,
    who: usize,
    received: &Claim,
    behavior: ReceiverBehavior,
    rng: &mut SimRng,
) -> Claim {
    match behavior {
        ReceiverBehavior::Honest => received.clone(),
        ReceiverBehavior::ForgeOpposite => {
            let target = !received.bit;
            // Claim every position believed to hold the complement of the
            // forged bit: known positions from the view, coin flips elsewhere.
            let flips = (0..lists.length)
                .filter(|&j| {
                    let believed = lists.views[who][j].unwrap_or_else(|| rng.random_bool(0.5));
                    believed != target
                })
                .map(|j| j as u32)
                .collect();
            Claim { bit: target, flips }
        }
    }
}

/// Apply the decision rule for one receiver.
pub fn decide(view: &[Option<bool>], direct: &Claim, forwarded: &Claim) -> Decision {
    let direct_ok = claim_consistent(view, direct);
    let forwarded_ok = claim_consistent(view, forwarded);
    match (direct_ok, forwarded_ok) {
        (true, true) if direct.bit == forwarded.bit => Decision::Bit(direct.bit),
        (true, true) => Decision::Bot,
        (true, false) => Decision::Bit(direct.bit),
        (false, true) => Decision::Bit(forwarded.bit),
        (false, false) => Decision::Bot,
    }
}

/// Run the whole two-round protocol over one dealt list set and return both
/// receivers' decisions.
pub fn detectable_broadcast(
    lists: &CorrelatedLists,
    sender: SenderBehavior,
    receivers: [ReceiverBehavior; 2],
    rng: &mut SimRng,
) -> [Decision; 2] {
    let claims = sender_claims(lists, sender);
    let forwarded_to_1 = receiver_forward(lists, 0, &claims[0], receivers[0], rng);
    let forwarded_to_0 = receiver_forward(lists, 1, &claims[1], receivers[1], rng);
    [
        decide(&lists.views[0], &claims[0], &forwarded_to_0),
        decide(&lists.views[1], &claims[1], &forwarded_to_1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_rng, rng_from_seed};

    #[test]
    fn dealer_reveals_matching_values() {
        let mut rng = rng_from_seed(1);
        let lists = deal_correlated_lists(8, &mut rng).unwrap();
        for view in &lists.views {
            for (j, seen) in view.iter().enumerate() {
                if let Some(v) = seen {
                    assert_eq!(*v, lists.sender_list[j]);
                }
            }
        }
    }

    #[test]
    fn dealer_rejects_short_lists() {
        let mut rng = rng_from_seed(1);
        assert_eq!(
            deal_correlated_lists(4, &mut rng).unwrap_err(),
            ConsensusError::ListTooShort { min: 8, got: 4 }
        );
    }

    #[test]
    fn dealer_reveal_counts_and_overlap() {
        // Each receiver sees ~L/2 positions; both see ~L/4.
        let mut rng = rng_from_seed(2);
        let length = 4096;
        let lists = deal_correlated_lists(length, &mut rng).unwrap();
        let seen0: Vec<usize> = (0..length).filter(|&j| lists.views[0][j].is_some()).collect();
        let seen1: Vec<usize> = (0..length).filter(|&j| lists.views[1][j].is_some()).collect();
        let overlap = seen0.iter().filter(|j| lists.views[1][**j].is_some()).count();
        let half = length as f64 / 2.0;
        let quarter = length as f64 / 4.0;
        assert!((seen0.len() as f64 - half).abs() < half * 0.1);
        assert!((seen1.len() as f64 - half).abs() < half * 0.1);
        assert!((overlap as f64 - quarter).abs() < quarter * 0.2);
    }

    #[test]
    fn dealing_is_deterministic_per_seed() {
        let a = deal_correlated_lists(64, &mut rng_from_seed(9)).unwrap();
        let b = deal_correlated_lists(64, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn honest_run_delivers_the_bit() {
        for seed in 0..50 {
            let mut rng = rng_from_seed(seed);
            let lists = deal_correlated_lists(64, &mut rng).unwrap();
            let decisions = detectable_broadcast(
                &lists,
                SenderBehavior::Honest(true),
                [ReceiverBehavior::Honest; 2],
                &mut rng,
            );
            assert_eq!(decisions, [Decision::Bit(true); 2]);
        }
    }

    #[test]
    fn equivocation_with_truthful_sets_yields_bot_at_both() {
        for seed in 0..200 {
            let mut rng = rng_from_seed(seed);
            let lists = deal_correlated_lists(64, &mut rng).unwrap();
            let decisions = detectable_broadcast(
                &lists,
                SenderBehavior::Equivocate(seed % 2 == 0),
                [ReceiverBehavior::Honest; 2],
                &mut rng,
            );
            assert_eq!(decisions, [Decision::Bot; 2]);
        }
    }

    #[test]
    fn forging_receiver_rarely_escapes_the_audit() {
        // Theoretical miss probability (3/4)^(L/2) ~ 1e-8 at L = 128; with
        // 10^4 trials no miss should ever be observed.
        let trials = 10_000u64;
        let mut honest_bit = 0u64;
        for t in 0..trials {
            let mut rng = derive_rng(77, t);
            let lists = deal_correlated_lists(128, &mut rng).unwrap();
            let decisions = detectable_broadcast(
                &lists,
                SenderBehavior::Honest(true),
                [ReceiverBehavior::Honest, ReceiverBehavior::ForgeOpposite],
                &mut rng,
            );
            // Receiver 0 is honest and audits the forged forward.
            if decisions[0] == Decision::Bit(true) {
                honest_bit += 1;
            }
        }
        let rate = honest_bit as f64 / trials as f64;
        assert!(rate >= 0.999, "honest receiver held the bit in {rate}");
    }

    #[test]
    fn malformed_index_sets_are_inconsistent_not_fatal() {
        let mut rng = rng_from_seed(5);
        let lists = deal_correlated_lists(32, &mut rng).unwrap();
        let decisions = detectable_broadcast(
            &lists,
            SenderBehavior::MalformedTo {
                receiver: 0,
                bit: true,
            },
            [ReceiverBehavior::Honest; 2],
            &mut rng,
        );
        // The garbled receiver adopts the relayed truthful claim; the other
        // receiver distrusts the forwarded garbage and keeps its direct bit.
        assert_eq!(decisions, [Decision::Bit(true); 2]);
    }

    #[test]
    fn claim_audit_rejects_unsorted_and_out_of_range_sets() {
        let mut rng = rng_from_seed(6);
        let lists = deal_correlated_lists(16, &mut rng).unwrap();
        let honest = Claim::honest(&lists.sender_list, false);
        assert!(claim_consistent(&lists.views[0], &honest));

        let mut unsorted = honest.clone();
        unsorted.flips.reverse();
        if unsorted.flips.len() >= 2 {
            assert!(!claim_consistent(&lists.views[0], &unsorted));
        }
        let out_of_range = Claim {
            bit: false,
            flips: vec![999],
        };
        assert!(!claim_consistent(&lists.views[0], &out_of_range));
    }
}
