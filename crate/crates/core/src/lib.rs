//! Desk-scale simulator of quantum threats to a proof-of-work blockchain and
//! of the quantum primitives that defend against them.
//!
//! Threat side: Grover-accelerated nonce search against real SHA-256 puzzles,
//! classical-vs-quantum fork races, and a discrete-log key breaker standing in
//! for a cryptographically relevant quantum computer. Defense side: BB84 key
//! distribution with an intercept-resend eavesdropper, GHZ shared-coin
//! consensus, and a detectable-broadcast protocol built on correlated lists.
//!
//! Everything is driven by a single 64-bit seed: the same seed and
//! configuration produce bit-identical results, including the JSON reports
//! emitted by the `qchain-sim` binary.
//!
//! Quantum systems are simulated exactly (dense statevectors up to 24 qubits);
//! there are no noise models and no approximations beyond double-precision
//! arithmetic.

pub mod adversary;
pub mod chain;
pub mod consensus;
pub mod qkd;
pub mod qsim;
pub mod report;
pub mod rng;
pub mod scenario;

pub use chain::{Block, BlockHeader, Chain, Hash256, MerkleProof};
pub use qsim::StateVector;
pub use report::{Report, ReportFormat, ScenarioConfig};
pub use rng::{derive_rng, derive_seed, rng_from_seed, SimRng};
pub use scenario::run_scenario;
