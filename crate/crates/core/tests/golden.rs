//! Frozen-output checks: the default-parameter artifacts must reproduce the
//! hex-encoded values generated once and committed under `tests/golden/`.
//! Regenerate with `cargo run -p qchain-sim --example gen_golden` after an
//! intentional format change.

use qchain_sim::adversary::{
    count_solutions, pow_oracle, toy_sign, toy_verify, MiningPuzzle, ToyGroup, ToyKeypair,
};
use qchain_sim::chain::{block_hash, build_chain, validate_chain};
use qchain_sim::rng::{derive_rng, derive_seed};
use qchain_sim::scenario::default_puzzle_template;

fn golden() -> serde_json::Value {
    serde_json::from_str(include_str!("golden/golden.json")).expect("golden corpus parses")
}

#[test]
fn genesis_header_matches_the_golden_file() {
    let g = golden();
    let chain = build_chain(10, 12, derive_seed(42, 1), 1 << 30).unwrap();
    assert!(validate_chain(&chain).is_valid());
    let genesis = &chain.blocks[0];
    assert_eq!(
        hex::encode(genesis.header.encode()),
        g["genesis"]["header_hex"].as_str().unwrap()
    );
    assert_eq!(
        block_hash(&genesis.header).to_hex(),
        g["genesis"]["block_hash_hex"].as_str().unwrap()
    );
    assert_eq!(
        hex::encode(genesis.encode()),
        g["genesis"]["encoded_block_hex"].as_str().unwrap()
    );
}

#[test]
fn default_puzzle_solution_count_matches_the_golden_file() {
    let g = golden();
    let puzzle = MiningPuzzle::new(default_puzzle_template(4), 16, 4).unwrap();
    assert_eq!(
        hex::encode(puzzle.template.encode()),
        g["puzzle"]["template_header_hex"].as_str().unwrap()
    );
    assert_eq!(
        count_solutions(&puzzle),
        g["puzzle"]["solution_count"].as_u64().unwrap()
    );
    let first = g["puzzle"]["first_solution"].as_u64().unwrap();
    assert!(pow_oracle(&puzzle)(first));
    assert_eq!((0..puzzle.space()).find(|&n| pow_oracle(&puzzle)(n)), Some(first));
}

#[test]
fn toy_signature_matches_the_golden_file() {
    let g = golden();
    let s = &g["toy_signature"];
    let mut rng = derive_rng(0x901d, 0);
    let group = ToyGroup::random(1 << 19, 1 << 20, &mut rng);
    assert_eq!(group.modulus, s["modulus"].as_u64().unwrap());
    assert_eq!(group.generator, s["generator"].as_u64().unwrap());
    let keypair = ToyKeypair::generate(group, &mut rng);
    assert_eq!(keypair.private, s["private"].as_u64().unwrap());
    assert_eq!(keypair.public, s["public"].as_u64().unwrap());

    let message = hex::decode(s["message_hex"].as_str().unwrap()).unwrap();
    let signature = toy_sign(&keypair, &message, &mut rng);
    assert_eq!(signature.challenge, s["challenge"].as_u64().unwrap());
    assert_eq!(signature.response, s["response"].as_u64().unwrap());
    assert!(toy_verify(&group, keypair.public, &message, &signature));

    let mut sig_bytes = Vec::new();
    sig_bytes.extend_from_slice(&signature.challenge.to_be_bytes());
    sig_bytes.extend_from_slice(&signature.response.to_be_bytes());
    assert_eq!(hex::encode(sig_bytes), s["signature_hex"].as_str().unwrap());
}
