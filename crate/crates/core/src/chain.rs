//! Blockchain data structures: SHA-256 hashing, Merkle trees with membership
//! proofs, proof-of-work headers, nonce mining, and whole-chain validation.
//!
//! A block header commits to the previous block's hash, the Merkle root of its
//! transactions, a nonce, and a difficulty expressed as a leading-zero-bit
//! count. Headers serialize to a fixed 89-byte big-endian layout (see
//! [`BlockHeader::encode`]) so hashes are identical across runs and machines.
//!
//! All types are immutable values after construction and every operation here
//! is a pure function; nothing in this module holds shared mutable state.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::{derive_rng, SimRng};

/// Errors for Merkle, mining, and serialization operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("merkle tree requires at least one leaf")]
    EmptyLeaves,
    #[error("leaf index {index} out of range for {leaves} leaves")]
    LeafIndexOutOfRange { index: usize, leaves: usize },
    #[error("no qualifying nonce within {attempts} attempts")]
    MiningExhausted { attempts: u64 },
    #[error("mining requires max_attempts >= 1")]
    ZeroAttemptBudget,
    #[error("truncated encoding: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },
    #[error("trailing bytes after decoded block")]
    TrailingBytes,
}

/// A 32-byte SHA-256 digest; the universal identifier for blocks, Merkle
/// nodes, and proof-of-work targets.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hash256(#[serde(with = "hex_bytes")] [u8; 32]);

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8; 32], ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<[u8; 32], D::Error> {
        let s = String::deserialize(de)?;
        let v = hex::decode(&s).map_err(serde::de::Error::custom)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("expected 32 bytes"))
    }
}

impl Hash256 {
    /// The all-zero digest, used as the genesis block's previous-hash pointer.
    pub const ZERO: Hash256 = Hash256([0u8; 32]);

    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Hash256(bytes)
    }

    pub fn into_bytes(self) -> [u8; 32] {
        self.0
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    /// Number of leading zero bits, scanning from the most significant bit of
    /// the first byte. Ranges from 0 to 256.
    pub fn leading_zero_bits(&self) -> u32 {
        let mut zeros = 0;
        for &byte in &self.0 {
            if byte == 0 {
                zeros += 8;
            } else {
                zeros += byte.leading_zeros();
                break;
            }
        }
        zeros
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let v = hex::decode(s).ok()?;
        let arr: [u8; 32] = v.try_into().ok()?;
        Some(Hash256(arr))
    }
}

impl fmt::Debug for Hash256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hash256({})", self.to_hex())
    }
}

impl fmt::Display for Hash256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// SHA-256 of `data`. Pure and deterministic; the hash of record for every
/// digest in the simulator.
pub fn sha256(data: &[u8]) -> Hash256 {
    let mut out = [0u8; 32];
    out.copy_from_slice(&Sha256::digest(data));
    Hash256(out)
}

/// Block header: the mined portion of a block.
///
/// `difficulty` is the required number of leading zero bits in the block hash
/// and `timestamp` counts simulation ticks, not wall-clock time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockHeader {
    pub height: u64,
    pub timestamp: u64,
    pub prev_hash: Hash256,
    pub merkle_root: Hash256,
    pub difficulty: u8,
    pub nonce: u64,
}

/// Size of the canonical header encoding in bytes.
pub const HEADER_LEN: usize = 8 + 8 + 32 + 32 + 1 + 8;

impl BlockHeader {
    /// Canonical fixed-width encoding:
    /// `height(8) || timestamp(8) || prev_hash(32) || merkle_root(32) ||
    /// difficulty(1) || nonce(8)`, integers big-endian.
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut buf = [0u8; HEADER_LEN];
        buf[0..8].copy_from_slice(&self.height.to_be_bytes());
        buf[8..16].copy_from_slice(&self.timestamp.to_be_bytes());
        buf[16..48].copy_from_slice(self.prev_hash.as_bytes());
        buf[48..80].copy_from_slice(self.merkle_root.as_bytes());
        buf[80] = self.difficulty;
        buf[81..89].copy_from_slice(&self.nonce.to_be_bytes());
        buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ChainError> {
        if bytes.len() < HEADER_LEN {
            return Err(ChainError::Truncated {
                needed: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let mut prev = [0u8; 32];
        let mut root = [0u8; 32];
        prev.copy_from_slice(&bytes[16..48]);
        root.copy_from_slice(&bytes[48..80]);
        Ok(BlockHeader {
            height: u64::from_be_bytes(bytes[0..8].try_into().unwrap()),
            timestamp: u64::from_be_bytes(bytes[8..16].try_into().unwrap()),
            prev_hash: Hash256(prev),
            merkle_root: Hash256(root),
            difficulty: bytes[80],
            nonce: u64::from_be_bytes(bytes[81..89].try_into().unwrap()),
        })
    }
}

/// A block: header plus the opaque transaction payloads it commits to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub header: BlockHeader,
    pub transactions: Vec<Vec<u8>>,
}

impl Block {
    /// `header || tx_count(4) || (len(4) || payload)*`, integers big-endian.
    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(
            HEADER_LEN + 4 + self.transactions.iter().map(|t| 4 + t.len()).sum::<usize>(),
        );
        buf.extend_from_slice(&self.header.encode());
        buf.extend_from_slice(&(self.transactions.len() as u32).to_be_bytes());
        for tx in &self.transactions {
            buf.extend_from_slice(&(tx.len() as u32).to_be_bytes());
            buf.extend_from_slice(tx);
        }
        buf
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ChainError> {
        let header = BlockHeader::decode(bytes)?;
        let mut at = HEADER_LEN;
        let take = |at: &mut usize, n: usize| -> Result<&[u8], ChainError> {
            if bytes.len() < *at + n {
                return Err(ChainError::Truncated {
                    needed: *at + n,
                    found: bytes.len(),
                });
            }
            let slice = &bytes[*at..*at + n];
            *at += n;
            Ok(slice)
        };
        let count = u32::from_be_bytes(take(&mut at, 4)?.try_into().unwrap());
        let mut transactions = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let len = u32::from_be_bytes(take(&mut at, 4)?.try_into().unwrap()) as usize;
            transactions.push(take(&mut at, len)?.to_vec());
        }
        if at != bytes.len() {
            return Err(ChainError::TrailingBytes);
        }
        Ok(Block {
            header,
            transactions,
        })
    }
}

/// An ordered sequence of blocks linked by hash pointers.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Chain {
    pub blocks: Vec<Block>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn tip(&self) -> Option<&Block> {
        self.blocks.last()
    }
}

/// Which side a Merkle proof sibling sits on when rehashing upward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Membership proof for one leaf: the sibling hashes from leaf level to the
/// root, each tagged with the side it occupies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MerkleProof {
    pub leaf_index: usize,
    pub siblings: Vec<(Hash256, Side)>,
}

// Domain-separation prefixes keep leaf hashes and internal-node hashes in
// disjoint input spaces (second-preimage hygiene).
const LEAF_PREFIX: u8 = 0x00;
const NODE_PREFIX: u8 = 0x01;

fn leaf_hash(leaf: &[u8]) -> Hash256 {
    let mut h = Sha256::new();
    h.update([LEAF_PREFIX]);
    h.update(leaf);
    let mut out = [0u8; 32];
    out.copy_from_slice(&h.finalize());
    Hash256(out)
}

fn node_hash(left: &Hash256, right: &Hash256) -> Hash256 {
    let mut h = Sha256::new();
    h.update([NODE_PREFIX]);
    h.update(left.as_bytes());
    h.update(right.as_bytes());
    let mut out = [0u8; 32];
    out.copy_from_slice(&h.finalize());
    Hash256(out)
}

fn level_up(level: &[Hash256]) -> Vec<Hash256> {
    let mut next = Vec::with_capacity(level.len().div_ceil(2));
    for pair in level.chunks(2) {
        // Odd level: the last node pairs with a copy of itself.
        let right = pair.get(1).unwrap_or(&pair[0]);
        next.push(node_hash(&pair[0], right));
    }
    next
}

/// Merkle root over `leaves`.
///
/// Leaf hash is `sha256(0x00 || leaf)`, internal nodes are
/// `sha256(0x01 || left || right)`, and a level with an odd node count
/// duplicates its last node.
pub fn merkle_root(leaves: &[Vec<u8>]) -> Result<Hash256, ChainError> {
    if leaves.is_empty() {
        return Err(ChainError::EmptyLeaves);
    }
    let mut level: Vec<Hash256> = leaves.iter().map(|l| leaf_hash(l)).collect();
    while level.len() > 1 {
        level = level_up(&level);
    }
    Ok(level[0])
}

/// Membership proof for `leaves[index]` under [`merkle_root`]'s tree shape.
pub fn merkle_prove(leaves: &[Vec<u8>], index: usize) -> Result<MerkleProof, ChainError> {
    if leaves.is_empty() {
        return Err(ChainError::EmptyLeaves);
    }
    if index >= leaves.len() {
        return Err(ChainError::LeafIndexOutOfRange {
            index,
            leaves: leaves.len(),
        });
    }
    let mut level: Vec<Hash256> = leaves.iter().map(|l| leaf_hash(l)).collect();
    let mut at = index;
    let mut siblings = Vec::new();
    while level.len() > 1 {
        let sibling_at = if at.is_multiple_of(2) { at + 1 } else { at - 1 };
        // The duplicated last node of an odd level is its own sibling.
        let sibling = *level.get(sibling_at).unwrap_or(&level[at]);
        let side = if at.is_multiple_of(2) { Side::Right } else { Side::Left };
        siblings.push((sibling, side));
        level = level_up(&level);
        at /= 2;
    }
    Ok(MerkleProof {
        leaf_index: index,
        siblings,
    })
}

/// Check `proof` for `leaf` against `root`. Any single-bit change to the
/// leaf, a sibling, or the root makes this return false.
pub fn merkle_verify(root: &Hash256, leaf: &[u8], proof: &MerkleProof) -> bool {
    let mut acc = leaf_hash(leaf);
    for (sibling, side) in &proof.siblings {
        acc = match side {
            Side::Left => node_hash(sibling, &acc),
            Side::Right => node_hash(&acc, sibling),
        };
    }
    acc == *root
}

/// Hash of the canonical header encoding.
pub fn block_hash(header: &BlockHeader) -> Hash256 {
    sha256(&header.encode())
}

/// The proof-of-work threshold test: at least `difficulty` leading zero bits.
/// Monotone in `difficulty`: a digest passing at `d` passes at every `d' <= d`.
pub fn meets_difficulty(hash: &Hash256, difficulty: u8) -> bool {
    hash.leading_zero_bits() >= u32::from(difficulty)
}

/// True iff the block hash clears the header's own difficulty.
pub fn pow_check(header: &BlockHeader) -> bool {
    meets_difficulty(&block_hash(header), header.difficulty)
}

/// Result of a successful nonce search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningResult {
    pub nonce: u64,
    pub attempts: u64,
}

/// Classical mining: draw nonces uniformly at random (with replacement) from
/// the full 64-bit nonce space until [`pow_check`] passes.
///
/// Attempt counts follow a geometric distribution with success probability
/// `2^-difficulty`. Fails with [`ChainError::MiningExhausted`] once
/// `max_attempts` draws have been spent.
pub fn mine_classical(
    template: &BlockHeader,
    rng: &mut SimRng,
    max_attempts: u64,
) -> Result<MiningResult, ChainError> {
    if max_attempts == 0 {
        return Err(ChainError::ZeroAttemptBudget);
    }
    let mut candidate = *template;
    for attempt in 1..=max_attempts {
        candidate.nonce = rng.random();
        if pow_check(&candidate) {
            return Ok(MiningResult {
                nonce: candidate.nonce,
                attempts: attempt,
            });
        }
    }
    Err(ChainError::MiningExhausted {
        attempts: max_attempts,
    })
}

/// Why a chain failed validation, reported with the offending block index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationReason {
    /// Genesis previous-hash pointer is not all-zero.
    GenesisPrevHash,
    /// Height does not increase by exactly one from the previous block.
    HeightMismatch,
    /// Previous-hash pointer does not match the previous block's hash.
    LinkMismatch,
    /// Difficulty differs from the genesis difficulty (no retargeting).
    DifficultyMismatch,
    /// Block carries no transactions.
    EmptyTransactions,
    /// Header Merkle root does not match the transactions.
    MerkleMismatch,
    /// Block hash does not clear the declared difficulty.
    PowNotSatisfied,
}

/// First rule violation found in a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainViolation {
    pub index: usize,
    pub reason: ViolationReason,
}

/// Outcome of [`validate_chain`]. Violations are values, not errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainValidity {
    Valid,
    Violation(ChainViolation),
}

impl ChainValidity {
    pub fn is_valid(&self) -> bool {
        matches!(self, ChainValidity::Valid)
    }
}

/// Validate a whole chain, reporting the first violation.
///
/// Per block this checks, in order: genesis form (zero previous hash, height
/// 0), hash-pointer linkage and height progression, difficulty uniformity
/// (this simulator never retargets, so every block must carry the genesis
/// difficulty), transaction presence, Merkle root consistency, and proof of
/// work. An empty chain is vacuously valid.
pub fn validate_chain(chain: &Chain) -> ChainValidity {
    let violation = |index, reason| ChainValidity::Violation(ChainViolation { index, reason });
    for (i, block) in chain.blocks.iter().enumerate() {
        let header = &block.header;
        if i == 0 {
            if header.prev_hash != Hash256::ZERO {
                return violation(0, ViolationReason::GenesisPrevHash);
            }
            if header.height != 0 {
                return violation(0, ViolationReason::HeightMismatch);
            }
        } else {
            let prev = &chain.blocks[i - 1].header;
            if header.height != prev.height + 1 {
                return violation(i, ViolationReason::HeightMismatch);
            }
            if header.prev_hash != block_hash(prev) {
                return violation(i, ViolationReason::LinkMismatch);
            }
            if header.difficulty != chain.blocks[0].header.difficulty {
                return violation(i, ViolationReason::DifficultyMismatch);
            }
        }
        if block.transactions.is_empty() {
            return violation(i, ViolationReason::EmptyTransactions);
        }
        match merkle_root(&block.transactions) {
            Ok(root) if root == header.merkle_root => {}
            _ => return violation(i, ViolationReason::MerkleMismatch),
        }
        if !pow_check(header) {
            return violation(i, ViolationReason::PowNotSatisfied);
        }
    }
    ChainValidity::Valid
}

/// Mine a block extending `prev` (or a genesis block when `prev` is `None`).
pub fn mine_block(
    prev: Option<&Block>,
    transactions: Vec<Vec<u8>>,
    difficulty: u8,
    timestamp: u64,
    rng: &mut SimRng,
    max_attempts: u64,
) -> Result<Block, ChainError> {
    let (height, prev_hash) = match prev {
        Some(b) => (b.header.height + 1, block_hash(&b.header)),
        None => (0, Hash256::ZERO),
    };
    let template = BlockHeader {
        height,
        timestamp,
        prev_hash,
        merkle_root: merkle_root(&transactions)?,
        difficulty,
        nonce: 0,
    };
    let mined = mine_classical(&template, rng, max_attempts)?;
    Ok(Block {
        header: BlockHeader {
            nonce: mined.nonce,
            ..template
        },
        transactions,
    })
}

/// Deterministically mine a `block_count`-block chain at a fixed difficulty.
///
/// Block `h` carries three synthetic transactions `tx-<h>-<k>`, uses its
/// height as timestamp, and is mined from RNG stream `h` of `master_seed`,
/// so the result is a pure function of the arguments.
pub fn build_chain(
    block_count: usize,
    difficulty: u8,
    master_seed: u64,
    max_attempts: u64,
) -> Result<Chain, ChainError> {
    let mut chain = Chain::default();
    for h in 0..block_count {
        let txs = (0..3)
            .map(|k| format!("tx-{h}-{k}").into_bytes())
            .collect();
        let mut rng = derive_rng(master_seed, h as u64);
        let block = mine_block(
            chain.tip(),
            txs,
            difficulty,
            h as u64,
            &mut rng,
            max_attempts,
        )?;
        chain.blocks.push(block);
    }
    Ok(chain)
}
