//! Property tests for the structural invariants: Merkle round trips,
//! serialization, threshold monotonicity, oracle involution, sifting, and
//! one-time-pad round trips.

use proptest::prelude::*;

use qchain_sim::chain::{
    self, merkle_prove, merkle_root, merkle_verify, Block, BlockHeader, Hash256,
};
use qchain_sim::qkd::{sift, Basis, OtpKey};
use qchain_sim::qsim::StateVector;
use qchain_sim::rng::rng_from_seed;

fn leaves_strategy() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(any::<u8>(), 0..24), 1..64)
}

fn header_strategy() -> impl Strategy<Value = BlockHeader> {
    (
        any::<u64>(),
        any::<u64>(),
        any::<[u8; 32]>(),
        any::<[u8; 32]>(),
        any::<u8>(),
        any::<u64>(),
    )
        .prop_map(|(height, timestamp, prev, root, difficulty, nonce)| BlockHeader {
            height,
            timestamp,
            prev_hash: Hash256::from_bytes(prev),
            merkle_root: Hash256::from_bytes(root),
            difficulty,
            nonce,
        })
}

proptest! {
    /// Every leaf of every random tree proves and verifies.
    #[test]
    fn merkle_round_trip(leaves in leaves_strategy()) {
        let root = merkle_root(&leaves).unwrap();
        for (i, leaf) in leaves.iter().enumerate() {
            let proof = merkle_prove(&leaves, i).unwrap();
            prop_assert!(merkle_verify(&root, leaf, &proof));
        }
    }

    /// A proof never verifies a different leaf of the same tree.
    #[test]
    fn merkle_proof_binds_the_leaf(leaves in leaves_strategy(), index in any::<prop::sample::Index>()) {
        prop_assume!(leaves.len() >= 2);
        let i = index.index(leaves.len());
        let j = (i + 1) % leaves.len();
        prop_assume!(leaves[i] != leaves[j]);
        let root = merkle_root(&leaves).unwrap();
        let proof = merkle_prove(&leaves, i).unwrap();
        prop_assert!(!merkle_verify(&root, &leaves[j], &proof));
    }

    /// decode(encode(block)) is the identity.
    #[test]
    fn block_serialization_round_trip(
        header in header_strategy(),
        transactions in prop::collection::vec(prop::collection::vec(any::<u8>(), 0..32), 0..8),
    ) {
        let block = Block { header, transactions };
        prop_assert_eq!(Block::decode(&block.encode()).unwrap(), block);
    }

    /// A digest passing the threshold at difficulty d passes at every d' <= d.
    #[test]
    fn pow_threshold_is_monotone(bytes in any::<[u8; 32]>(), difficulty in 0u8..=255) {
        let digest = Hash256::from_bytes(bytes);
        if chain::meets_difficulty(&digest, difficulty) {
            for lower in (0..=difficulty).step_by(13) {
                prop_assert!(chain::meets_difficulty(&digest, lower));
            }
        }
    }

    /// Applying the same phase oracle twice restores the state exactly.
    #[test]
    fn phase_oracle_is_an_involution(seed in any::<u64>(), modulus in 2u64..30) {
        let mut state = StateVector::zero(5).unwrap();
        state.hadamard_all();
        let before = state.clone();
        let marked = move |i: u64| i.wrapping_mul(seed | 1).is_multiple_of(modulus);
        state.phase_oracle(marked);
        state.phase_oracle(marked);
        for i in 0..state.len() {
            prop_assert!((state.amplitude(i) - before.amplitude(i)).norm() < 1e-12);
        }
    }

    /// GHZ states have exactly two support points and unit norm.
    #[test]
    fn ghz_support_is_two_points(n in 1usize..=12) {
        let state = StateVector::ghz(n).unwrap();
        let support = (0..state.len())
            .filter(|&i| state.amplitude(i).norm_sqr() > 0.0)
            .count();
        prop_assert_eq!(support, 2);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }

    /// Sifting keeps exactly the positions with equal bases, in order.
    #[test]
    fn sift_keeps_matching_positions(
        bits_a in prop::collection::vec(any::<bool>(), 0..200),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let n = bits_a.len();
        let mut rng = rng_from_seed(seed);
        let basis = |b: bool| if b { Basis::Rectilinear } else { Basis::Diagonal };
        let bases_a: Vec<Basis> = (0..n).map(|_| basis(rng.random_bool(0.5))).collect();
        let bases_b: Vec<Basis> = (0..n).map(|_| basis(rng.random_bool(0.5))).collect();
        let bits_b: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let (key_a, key_b, kept) = sift(&bits_a, &bases_a, &bits_b, &bases_b).unwrap();
        prop_assert_eq!(key_a.len(), kept.len());
        prop_assert_eq!(key_b.len(), kept.len());
        let expected: Vec<usize> = (0..n).filter(|&i| bases_a[i] == bases_b[i]).collect();
        prop_assert_eq!(&kept, &expected);
        for (k, &pos) in kept.iter().enumerate() {
            prop_assert_eq!(key_a[k], bits_a[pos]);
            prop_assert_eq!(key_b[k], bits_b[pos]);
        }
    }

    /// open(protect(m)) = m whenever both parties hold the same pad.
    #[test]
    fn otp_round_trip(
        key_bytes in prop::collection::vec(any::<u8>(), 16..64),
        message in prop::collection::vec(any::<u8>(), 0..16),
    ) {
        let bits: Vec<bool> = key_bytes
            .iter()
            .flat_map(|b| (0..8).map(move |i| b & (0x80 >> i) != 0))
            .collect();
        let mut sender = OtpKey::from_bits(bits.clone());
        let mut receiver = OtpKey::from_bits(bits);
        let ciphertext = sender.protect(&message).unwrap();
        prop_assert_eq!(receiver.open(&ciphertext).unwrap(), message);
    }
}
