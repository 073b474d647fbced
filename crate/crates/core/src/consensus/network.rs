//! Deterministic tick-based message scheduler.
//!
//! Messages posted at tick `t` on a directed pair with latency `l` are
//! delivered at `t + l`. Delivery order is total and reproducible: events are
//! drained in `(tick, from, to, sequence)` order, so per-pair FIFO holds and
//! cross-pair ties resolve lexicographically.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::chain::sha256;

use super::ConsensusError;

/// Node roster, fault set, and link latencies for one simulated network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    node_count: usize,
    byzantine: BTreeSet<usize>,
    default_latency: u64,
    latency_overrides: BTreeMap<(usize, usize), u64>,
}

impl Topology {
    /// All-honest topology with unit latency everywhere.
    pub fn new(node_count: usize) -> Result<Self, ConsensusError> {
        if node_count == 0 {
            return Err(ConsensusError::EmptyTopology);
        }
        Ok(Topology {
            node_count,
            byzantine: BTreeSet::new(),
            default_latency: 1,
            latency_overrides: BTreeMap::new(),
        })
    }

    pub fn with_byzantine(mut self, nodes: &[usize]) -> Result<Self, ConsensusError> {
        for &id in nodes {
            if id >= self.node_count {
                return Err(ConsensusError::UnknownNode { id });
            }
            self.byzantine.insert(id);
        }
        Ok(self)
    }

    pub fn set_latency(&mut self, from: usize, to: usize, ticks: u64) -> Result<(), ConsensusError> {
        self.check_node(from)?;
        self.check_node(to)?;
        if ticks == 0 {
            return Err(ConsensusError::InvalidLatency);
        }
        self.latency_overrides.insert((from, to), ticks);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn is_byzantine(&self, id: usize) -> bool {
        self.byzantine.contains(&id)
    }

    pub fn byzantine_count(&self) -> usize {
        self.byzantine.len()
    }

    pub fn honest_ids(&self) -> Vec<usize> {
        (0..self.node_count)
            .filter(|id| !self.is_byzantine(*id))
            .collect()
    }

    pub fn latency(&self, from: usize, to: usize) -> u64 {
        *self
            .latency_overrides
            .get(&(from, to))
            .unwrap_or(&self.default_latency)
    }

    pub fn max_latency(&self) -> u64 {
        self.latency_overrides
            .values()
            .copied()
            .chain([self.default_latency])
            .max()
            .unwrap_or(1)
    }

    fn check_node(&self, id: usize) -> Result<(), ConsensusError> {
        if id >= self.node_count {
            return Err(ConsensusError::UnknownNode { id });
        }
        Ok(())
    }
}

/// A message handed to its destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivered {
    pub tick: u64,
    pub from: usize,
    pub to: usize,
    pub payload: Vec<u8>,
}

/// Transcript row: one delivery, with the payload reduced to its digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventRecord {
    pub tick: u64,
    pub from: usize,
    pub to: usize,
    pub payload_digest: String,
}

/// In-flight message queue plus the delivery log.
#[derive(Debug, Clone)]
pub struct Network {
    topology: Topology,
    now: u64,
    sequence: u64,
    queue: BTreeMap<(u64, usize, usize, u64), Vec<u8>>,
    events: Vec<EventRecord>,
}

impl Network {
    pub fn new(topology: Topology) -> Self {
        Network {
            topology,
            now: 0,
            sequence: 0,
            queue: BTreeMap::new(),
            events: Vec::new(),
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Schedule `payload` from `from` to `to`, sent at `tick` (not earlier
    /// than the current tick) and delivered after the pair's latency.
    pub fn post_message(
        &mut self,
        from: usize,
        to: usize,
        payload: Vec<u8>,
        tick: u64,
    ) -> Result<(), ConsensusError> {
        self.topology.check_node(from)?;
        self.topology.check_node(to)?;
        if tick < self.now {
            return Err(ConsensusError::PostInPast {
                tick,
                now: self.now,
            });
        }
        let deliver_at = tick + self.topology.latency(from, to);
        self.queue
            .insert((deliver_at, from, to, self.sequence), payload);
        self.sequence += 1;
        Ok(())
    }

    /// Move time forward by `ticks`, returning everything that came due, in
    /// deterministic `(tick, from, to, sequence)` order.
    pub fn advance(&mut self, ticks: u64) -> Vec<Delivered> {
        self.now += ticks;
        let mut due = Vec::new();
        let pending = std::mem::take(&mut self.queue);
        for ((tick, from, to, seq), payload) in pending {
            if tick <= self.now {
                self.events.push(EventRecord {
                    tick,
                    from,
                    to,
                    payload_digest: sha256(&payload).to_hex(),
                });
                due.push(Delivered {
                    tick,
                    from,
                    to,
                    payload,
                });
            } else {
                self.queue.insert((tick, from, to, seq), payload);
            }
        }
        due
    }

    /// Delivery log so far.
    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }
}
