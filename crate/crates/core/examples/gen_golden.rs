//! Regenerate the frozen golden corpus used by `tests/golden.rs`:
//!
//! ```sh
//! cargo run -p qchain-sim --example gen_golden > crates/core/tests/golden/golden.json
//! ```
//!
//! The corpus pins byte-level outputs (genesis encoding, puzzle solution
//! counts, a toy signature) for the default scenario parameters, so any
//! unintended change to hashing, header layout, seed derivation, or signing
//! shows up as a golden mismatch.

use qchain_sim::adversary::{count_solutions, pow_oracle, toy_sign, MiningPuzzle, ToyGroup, ToyKeypair};
use qchain_sim::chain::{block_hash, build_chain};
use qchain_sim::rng::{derive_rng, derive_seed};
use qchain_sim::scenario::default_puzzle_template;

fn main() {
    // Genesis of the default full-demo chain (10 blocks, difficulty 12,
    // master seed 42, stage stream 1).
    let chain = build_chain(10, 12, derive_seed(42, 1), 1 << 30).unwrap();
    let genesis = &chain.blocks[0];

    // The default mine-race puzzle (16-bit nonce space, difficulty 4).
    let puzzle = MiningPuzzle::new(default_puzzle_template(4), 16, 4).unwrap();
    let solutions = count_solutions(&puzzle);
    let oracle = pow_oracle(&puzzle);
    let first_solution = (0..puzzle.space()).find(|&n| oracle(n)).unwrap();

    // A fixed keypair and signature.
    let mut rng = derive_rng(0x901d, 0);
    let group = ToyGroup::random(1 << 19, 1 << 20, &mut rng);
    let keypair = ToyKeypair::generate(group, &mut rng);
    let message = b"pay 10 qtc to bob";
    let signature = toy_sign(&keypair, message, &mut rng);
    let mut sig_bytes = Vec::new();
    sig_bytes.extend_from_slice(&signature.challenge.to_be_bytes());
    sig_bytes.extend_from_slice(&signature.response.to_be_bytes());

    let golden = serde_json::json!({
        "genesis": {
            "header_hex": hex::encode(genesis.header.encode()),
            "block_hash_hex": block_hash(&genesis.header).to_hex(),
            "encoded_block_hex": hex::encode(genesis.encode()),
        },
        "puzzle": {
            "nonce_bits": 16,
            "difficulty": 4,
            "template_header_hex": hex::encode(puzzle.template.encode()),
            "solution_count": solutions,
            "first_solution": first_solution,
        },
        "toy_signature": {
            "modulus": group.modulus,
            "generator": group.generator,
            "private": keypair.private,
            "public": keypair.public,
            "message_hex": hex::encode(message),
            "challenge": signature.challenge,
            "response": signature.response,
            "signature_hex": hex::encode(sig_bytes),
        },
    });
    println!("{}", serde_json::to_string_pretty(&golden).unwrap());
}
