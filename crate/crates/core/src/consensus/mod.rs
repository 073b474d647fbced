//! Simulated network of honest and Byzantine nodes running GHZ shared-coin
//! consensus and detectable broadcast, with a classical echo-broadcast
//! baseline for contrast.
//!
//! The GHZ coin is exactly what measuring `(|0...0> + |1...1>)/sqrt(2)` in the
//! computational basis produces: every participant holds the same uniformly
//! random bit, no matter how many participants misreport it afterwards.
//! Distributed one-qubit-per-node measurement is simulated by one global
//! basis sample whose bits are dealt to the nodes; for GHZ states measured in
//! the computational basis the two procedures have identical distributions.
//!
//! Agreement on a *chosen* value is a different task and is routed through
//! [`broadcast::detectable_broadcast`], bit by bit.
//!
//! The event scheduler is single-threaded and deterministic; identical seeds
//! and configurations reproduce transcripts byte for byte.

pub mod broadcast;
pub mod network;

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::qsim::{QsimError, StateVector};
use crate::rng::SimRng;

pub use broadcast::{
    deal_correlated_lists, detectable_broadcast, Claim, CorrelatedLists, Decision,
    ReceiverBehavior, SenderBehavior,
};
pub use network::{Delivered, EventRecord, Network, Topology};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConsensusError {
    #[error("topology needs at least one node")]
    EmptyTopology,
    #[error("unknown node id {id}")]
    UnknownNode { id: usize },
    #[error("link latency must be at least one tick")]
    InvalidLatency,
    #[error("message posted at tick {tick} but the network is already at {now}")]
    PostInPast { tick: u64, now: u64 },
    #[error("correlated lists need at least {min} positions, got {got}")]
    ListTooShort { min: usize, got: usize },
    #[error("detectable broadcast runs with exactly 3 nodes, got {got}")]
    NotThreeNodes { got: usize },
    #[error("classical baseline wants at most one Byzantine node, got {got}")]
    TooManyTraitors { got: usize },
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// How a consensus round ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundOutcome {
    /// Every honest node output this bit.
    Agreed(bool),
    /// Honest nodes unanimously flagged a fault.
    DetectedFault,
    /// Honest nodes ended with conflicting outputs.
    Disagreement,
}

/// One GHZ coin round: the dealt measurement bits, what each node reported
/// to the others, and the outcome over honest outputs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsensusRound {
    pub round_id: u64,
    pub measured: Vec<bool>,
    pub reported: Vec<bool>,
    pub outcome: RoundOutcome,
}

/// Run one GHZ shared-coin round over the topology.
///
/// Prepares GHZ(N), samples one global computational-basis measurement, and
/// deals bit `i` to node `i`. Honest nodes output their dealt bit; Byzantine
/// nodes report an arbitrary bit to the others, which cannot change any
/// honest node's own output. The outcome is `Agreed` in every round, for any
/// Byzantine set, including a third or more of the nodes.
pub fn ghz_consensus_round(
    topology: &Topology,
    round_id: u64,
    rng: &mut SimRng,
) -> Result<ConsensusRound, ConsensusError> {
    let n = topology.node_count();
    let state = StateVector::ghz(n)?;
    let measured = state.measure_all(rng);
    debug_assert!(measured.iter().all(|&b| b == measured[0]));

    let reported: Vec<bool> = measured
        .iter()
        .enumerate()
        .map(|(id, &bit)| {
            if topology.is_byzantine(id) {
                rng.random_bool(0.5)
            } else {
                bit
            }
        })
        .collect();

    let honest_bits: Vec<bool> = (0..n)
        .filter(|id| !topology.is_byzantine(*id))
        .map(|id| measured[id])
        .collect();
    let outcome = match honest_bits.split_first() {
        Some((first, rest)) if rest.iter().all(|b| b == first) => RoundOutcome::Agreed(*first),
        Some(_) => RoundOutcome::Disagreement,
        // All nodes Byzantine: fall back to the dealt coin.
        None => RoundOutcome::Agreed(measured[0]),
    };

    Ok(ConsensusRound {
        round_id,
        measured,
        reported,
        outcome,
    })
}

/// A node's verdict after value agreement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueDecision {
    Decided(Vec<u8>),
    DetectedFault,
}

/// Result of [`agree_on_value`]: per-node verdicts, the number of broadcast
/// sub-rounds spent (one per bit), and the network transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgreeOutcome {
    pub decisions: BTreeMap<usize, ValueDecision>,
    pub sub_rounds: usize,
    pub events: Vec<EventRecord>,
}

/// Default correlated-list length for value agreement.
pub const DEFAULT_LIST_LENGTH: usize = 128;

fn bytes_to_bits(value: &[u8]) -> Vec<bool> {
    value
        .iter()
        .flat_map(|byte| (0..8).map(move |b| byte & (0x80 >> b) != 0))
        .collect()
}

fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &bit)| acc | if bit { 0x80 >> i } else { 0 })
        })
        .collect()
}

/// Agree on an arbitrary byte string in a 3-node topology.
///
/// Node 0 is the designated sender holding the value; nodes 1 and 2 receive.
/// The value is decomposed into bits and each bit runs one detectable
/// broadcast over freshly dealt lists, with all claims carried by the tick
/// network. A Byzantine sender equivocates on every bit; a Byzantine receiver
/// forges forwarded claims. Honest receivers either reassemble the identical
/// value or unanimously flag the fault.
pub fn agree_on_value(
    topology: &Topology,
    value: &[u8],
    rng: &mut SimRng,
) -> Result<AgreeOutcome, ConsensusError> {
    if topology.node_count() != 3 {
        return Err(ConsensusError::NotThreeNodes {
            got: topology.node_count(),
        });
    }
    let bits = bytes_to_bits(value);
    let mut net = Network::new(topology.clone());
    let step = topology.max_latency();

    let mut per_receiver: [Vec<Decision>; 2] = [Vec::new(), Vec::new()];
    for &bit in &bits {
        let lists = deal_correlated_lists(DEFAULT_LIST_LENGTH, rng)?;
        let sender = if topology.is_byzantine(0) {
            SenderBehavior::Equivocate(bit)
        } else {
            SenderBehavior::Honest(bit)
        };
        let claims = broadcast::sender_claims(&lists, sender);
        let now = net.now();
        for (r, claim) in claims.iter().enumerate() {
            let payload = serde_json::to_vec(claim).expect("claims serialize");
            net.post_message(0, r + 1, payload, now)?;
        }
        net.advance(step);

        let behavior = |node: usize| {
            if topology.is_byzantine(node) {
                ReceiverBehavior::ForgeOpposite
            } else {
                ReceiverBehavior::Honest
            }
        };
        let forwarded_by_0 = broadcast::receiver_forward(&lists, 0, &claims[0], behavior(1), rng);
        let forwarded_by_1 = broadcast::receiver_forward(&lists, 1, &claims[1], behavior(2), rng);
        let now = net.now();
        net.post_message(1, 2, serde_json::to_vec(&forwarded_by_0).unwrap(), now)?;
        net.post_message(2, 1, serde_json::to_vec(&forwarded_by_1).unwrap(), now)?;
        net.advance(step);

        per_receiver[0].push(broadcast::decide(&lists.views[0], &claims[0], &forwarded_by_1));
        per_receiver[1].push(broadcast::decide(&lists.views[1], &claims[1], &forwarded_by_0));
    }

    let mut decisions = BTreeMap::new();
    decisions.insert(0, ValueDecision::Decided(value.to_vec()));
    for (r, outcomes) in per_receiver.iter().enumerate() {
        let verdict = if outcomes.contains(&Decision::Bot) {
            ValueDecision::DetectedFault
        } else {
            let bits: Vec<bool> = outcomes
                .iter()
                .map(|d| match d {
                    Decision::Bit(b) => *b,
                    Decision::Bot => unreachable!(),
                })
                .collect();
            ValueDecision::Decided(bits_to_bytes(&bits))
        };
        decisions.insert(r + 1, verdict);
    }

    Ok(AgreeOutcome {
        decisions,
        sub_rounds: bits.len(),
        events: net.events().to_vec(),
    })
}

/// Transcript of the classical 3-node echo-broadcast exhibit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaselineTranscript {
    pub proposed_bit: bool,
    pub decisions: BTreeMap<usize, bool>,
    /// Per-receiver flag: the echoed claim conflicted with the direct one.
    /// A conflict does not identify the liar.
    pub conflicts: BTreeMap<usize, bool>,
    pub honest_agreement: bool,
    pub events: Vec<EventRecord>,
}

/// Plain two-round echo broadcast with no correlated lists: sender 0 sends a
/// bit, receivers echo what they got to each other, and every receiver keeps
/// its direct bit. With an equivocating sender the two honest receivers end
/// up holding different bits and neither can tell which party lied. This is
/// an illustrative exhibit, not an impossibility proof.
pub fn classical_baseline_scenario(
    topology: &Topology,
    rng: &mut SimRng,
) -> Result<BaselineTranscript, ConsensusError> {
    if topology.node_count() != 3 {
        return Err(ConsensusError::NotThreeNodes {
            got: topology.node_count(),
        });
    }
    if topology.byzantine_count() > 1 {
        return Err(ConsensusError::TooManyTraitors {
            got: topology.byzantine_count(),
        });
    }
    let proposed = rng.random_bool(0.5);
    let mut net = Network::new(topology.clone());
    let step = topology.max_latency();

    let sent = |bit: bool| vec![u8::from(bit)];
    let round1: [bool; 2] = if topology.is_byzantine(0) {
        [proposed, !proposed]
    } else {
        [proposed, proposed]
    };
    let now = net.now();
    net.post_message(0, 1, sent(round1[0]), now)?;
    net.post_message(0, 2, sent(round1[1]), now)?;
    let direct: BTreeMap<usize, bool> = net
        .advance(step)
        .into_iter()
        .map(|d| (d.to, d.payload[0] != 0))
        .collect();

    let echo_of = |node: usize| {
        let honest = direct[&node];
        if topology.is_byzantine(node) {
            !honest
        } else {
            honest
        }
    };
    let now = net.now();
    net.post_message(1, 2, sent(echo_of(1)), now)?;
    net.post_message(2, 1, sent(echo_of(2)), now)?;
    let echoes: BTreeMap<usize, bool> = net
        .advance(step)
        .into_iter()
        .map(|d| (d.to, d.payload[0] != 0))
        .collect();

    let mut decisions = BTreeMap::new();
    let mut conflicts = BTreeMap::new();
    decisions.insert(0, proposed);
    for r in [1usize, 2] {
        decisions.insert(r, direct[&r]);
        conflicts.insert(r, direct[&r] != echoes[&r]);
    }

    let honest: Vec<bool> = (0..3)
        .filter(|id| !topology.is_byzantine(*id))
        .map(|id| decisions[&id])
        .collect();
    let honest_agreement = honest.windows(2).all(|w| w[0] == w[1]);

    Ok(BaselineTranscript {
        proposed_bit: proposed,
        decisions,
        conflicts,
        honest_agreement,
        events: net.events().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_rng, rng_from_seed};

    #[test]
    fn single_node_agrees_with_itself_and_the_coin_is_fair() {
        let topology = Topology::new(1).unwrap();
        let mut ones = 0;
        let rounds = 2000;
        for r in 0..rounds {
            let mut rng = derive_rng(1, r);
            let round = ghz_consensus_round(&topology, r, &mut rng).unwrap();
            match round.outcome {
                RoundOutcome::Agreed(bit) => {
                    if bit {
                        ones += 1;
                    }
                }
                other => panic!("unexpected outcome {other:?}"),
            }
        }
        let freq = ones as f64 / rounds as f64;
        assert!((freq - 0.5).abs() < 0.05, "frequency {freq}");
    }

    #[test]
    fn seven_honest_nodes_agree_on_a_fair_coin() {
        let topology = Topology::new(7).unwrap();
        let rounds = 2000u64;
        let mut ones = 0u64;
        for r in 0..rounds {
            let mut rng = derive_rng(14, r);
            let round = ghz_consensus_round(&topology, r, &mut rng).unwrap();
            match round.outcome {
                RoundOutcome::Agreed(bit) => ones += u64::from(bit),
                other => panic!("round {r}: {other:?}"),
            }
        }
        let freq = ones as f64 / rounds as f64;
        assert!((freq - 0.5).abs() < 0.05, "ones frequency {freq}");
    }

    #[test]
    fn honest_nodes_always_agree_even_with_many_traitors() {
        let topology = Topology::new(7).unwrap().with_byzantine(&[1, 3, 5]).unwrap();
        for r in 0..500 {
            let mut rng = derive_rng(2, r);
            let round = ghz_consensus_round(&topology, r, &mut rng).unwrap();
            assert!(matches!(round.outcome, RoundOutcome::Agreed(_)));
            // Byzantine reports never leak into honest outputs.
            for id in topology.honest_ids() {
                assert_eq!(round.reported[id], round.measured[id]);
            }
        }
    }

    #[test]
    fn ghz_round_rejects_oversized_topologies() {
        let topology = Topology::new(30).unwrap();
        let err = ghz_consensus_round(&topology, 0, &mut rng_from_seed(0)).unwrap_err();
        assert_eq!(err, ConsensusError::Qsim(QsimError::QubitCountOutOfRange(30)));
    }

    #[test]
    fn empty_value_agrees_immediately() {
        let topology = Topology::new(3).unwrap();
        let out = agree_on_value(&topology, b"", &mut rng_from_seed(3)).unwrap();
        assert_eq!(out.sub_rounds, 0);
        for verdict in out.decisions.values() {
            assert_eq!(*verdict, ValueDecision::Decided(Vec::new()));
        }
    }

    #[test]
    fn two_byte_value_takes_sixteen_sub_rounds() {
        let topology = Topology::new(3).unwrap();
        let out = agree_on_value(&topology, b"ok", &mut rng_from_seed(4)).unwrap();
        assert_eq!(out.sub_rounds, 16);
        for verdict in out.decisions.values() {
            assert_eq!(*verdict, ValueDecision::Decided(b"ok".to_vec()));
        }
        // Two claims plus two forwards per bit.
        assert_eq!(out.events.len(), 16 * 4);
    }

    #[test]
    fn equivocating_sender_is_detected_by_all_honest_nodes() {
        let topology = Topology::new(3).unwrap().with_byzantine(&[0]).unwrap();
        let out = agree_on_value(&topology, b"x", &mut rng_from_seed(5)).unwrap();
        assert_eq!(out.decisions[&1], ValueDecision::DetectedFault);
        assert_eq!(out.decisions[&2], ValueDecision::DetectedFault);
    }

    #[test]
    fn agree_on_value_requires_three_nodes() {
        let topology = Topology::new(4).unwrap();
        assert_eq!(
            agree_on_value(&topology, b"v", &mut rng_from_seed(0)).unwrap_err(),
            ConsensusError::NotThreeNodes { got: 4 }
        );
    }

    #[test]
    fn bit_codec_round_trips() {
        let value = b"\x00\xff\x5a";
        assert_eq!(bits_to_bytes(&bytes_to_bits(value)), value);
        assert!(bytes_to_bits(&[0x80])[0]);
    }

    #[test]
    fn baseline_traitor_sender_splits_the_honest_receivers() {
        let topology = Topology::new(3).unwrap().with_byzantine(&[0]).unwrap();
        let t = classical_baseline_scenario(&topology, &mut rng_from_seed(6)).unwrap();
        assert_ne!(t.decisions[&1], t.decisions[&2]);
        assert!(!t.honest_agreement);
        // Both receivers saw a conflict but cannot attribute it.
        assert!(t.conflicts[&1] && t.conflicts[&2]);
    }

    #[test]
    fn baseline_with_no_traitor_agrees() {
        let topology = Topology::new(3).unwrap();
        let t = classical_baseline_scenario(&topology, &mut rng_from_seed(7)).unwrap();
        assert!(t.honest_agreement);
        assert_eq!(t.decisions[&1], t.decisions[&0]);
        assert_eq!(t.decisions[&2], t.decisions[&0]);
    }

    #[test]
    fn baseline_transcripts_are_deterministic() {
        let topology = Topology::new(3).unwrap().with_byzantine(&[1]).unwrap();
        let a = classical_baseline_scenario(&topology, &mut rng_from_seed(8)).unwrap();
        let b = classical_baseline_scenario(&topology, &mut rng_from_seed(8)).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn baseline_preconditions() {
        let topology = Topology::new(4).unwrap();
        assert_eq!(
            classical_baseline_scenario(&topology, &mut rng_from_seed(0)).unwrap_err(),
            ConsensusError::NotThreeNodes { got: 4 }
        );
        let topology = Topology::new(3).unwrap().with_byzantine(&[0, 1]).unwrap();
        assert_eq!(
            classical_baseline_scenario(&topology, &mut rng_from_seed(0)).unwrap_err(),
            ConsensusError::TooManyTraitors { got: 2 }
        );
    }
}
