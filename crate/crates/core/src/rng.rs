//! Seeded random number generation.
//!
//! All randomness in the simulator flows from a 64-bit master seed through
//! [`ChaCha8Rng`], which is portable across platforms and word sizes. Distinct
//! subsystems draw from independent streams derived by hashing the master seed
//! together with a stream index, so adding draws to one stage of a scenario
//! never perturbs another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::sha256;

/// The simulator's generator of record.
pub type SimRng = ChaCha8Rng;

/// Root generator for a master seed. Equivalent to `derive_rng(seed, 0)`.
pub fn rng_from_seed(master_seed: u64) -> SimRng {
    derive_rng(master_seed, 0)
}

/// Independent stream `stream` of the master seed.
///
/// The 32-byte generator seed is `sha256("qchain.rng" || master || stream)`
/// with both integers big-endian, so streams are uncorrelated and the mapping
/// is stable across releases.
pub fn derive_rng(master_seed: u64, stream: u64) -> SimRng {
    ChaCha8Rng::from_seed(derive_material(master_seed, stream))
}

/// Collapse a derived stream to a fresh 64-bit seed, for handing a whole
/// subsystem its own seed space.
pub fn derive_seed(master_seed: u64, stream: u64) -> u64 {
    let material = derive_material(master_seed, stream);
    u64::from_be_bytes(material[0..8].try_into().unwrap())
}

fn derive_material(master_seed: u64, stream: u64) -> [u8; 32] {
    let mut material = Vec::with_capacity(26);
    material.extend_from_slice(b"qchain.rng");
    material.extend_from_slice(&master_seed.to_be_bytes());
    material.extend_from_slice(&stream.to_be_bytes());
    sha256(&material).into_bytes()
}
