//! Quantum attacker models.
//!
//! Three threat surfaces:
//!
//! * Mining: [`grover_mine`] drives the exact statevector search against a
//!   real SHA-256 proof-of-work predicate and is compared with classical
//!   rejection sampling over the same nonce space.
//! * Fork races: [`simulate_race`] plays the gambler's-ruin catch-up walk for
//!   a classical or Grover-equipped attacker; [`catchup_probability`] is the
//!   closed-form baseline.
//! * Signatures: a Schnorr-style discrete-log scheme over a small prime
//!   modulus, plus [`break_key`], a baby-step giant-step discrete-log solver
//!   that recovers private keys outright, standing in for a cryptographically
//!   relevant quantum factoring machine.
//!
//! Everything is pure given its RNG; Monte Carlo trials may be distributed
//! over derived seed streams and aggregated with order-independent sums.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::chain::{sha256, BlockHeader};
use crate::qsim::{grover_search, GroverPlan, QsimError};
use crate::rng::SimRng;

/// Widest nonce space a puzzle may use; bounded by the statevector cap.
pub const MAX_NONCE_BITS: u32 = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("nonce space of {0} bits exceeds the {MAX_NONCE_BITS}-bit cap")]
    NonceSpaceTooLarge(u32),
    #[error("puzzle has no solution in its nonce space")]
    UnsolvablePuzzle,
    #[error("no qualifying nonce within {0} attempts")]
    AttemptsExhausted(u64),
    #[error("no puzzle with the requested solution count within {0} template probes")]
    PuzzleSearchExhausted(u64),
    #[error("attacker power fraction must lie strictly between 0 and 1")]
    InvalidPowerFraction,
    #[error("race needs at least one trial")]
    ZeroTrials,
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// A restricted proof-of-work instance: vary only the low `nonce_bits` bits
/// of the nonce and demand `difficulty` leading zero bits of the block hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningPuzzle {
    pub template: BlockHeader,
    pub nonce_bits: u32,
    pub difficulty: u8,
}

impl MiningPuzzle {
    pub fn new(
        mut template: BlockHeader,
        nonce_bits: u32,
        difficulty: u8,
    ) -> Result<Self, AdversaryError> {
        if nonce_bits > MAX_NONCE_BITS {
            return Err(AdversaryError::NonceSpaceTooLarge(nonce_bits));
        }
        template.difficulty = difficulty;
        Ok(MiningPuzzle {
            template,
            nonce_bits,
            difficulty,
        })
    }

    /// Size of the nonce space, `2^nonce_bits`.
    pub fn space(&self) -> u64 {
        1u64 << self.nonce_bits
    }

    fn qualifies(&self, nonce: u64) -> bool {
        let mut header = self.template;
        header.nonce = nonce;
        sha256(&header.encode()).leading_zero_bits() >= u32::from(self.difficulty)
    }
}

/// The puzzle as a marking predicate over nonce indices: true iff the header
/// hashed with that nonce (genuine SHA-256) clears the difficulty. Pure, so
/// repeated evaluation is identical.
pub fn pow_oracle(puzzle: &MiningPuzzle) -> impl Fn(u64) -> bool + '_ {
    move |nonce| puzzle.qualifies(nonce)
}

/// Exhaustively count qualifying nonces. A count of zero is a value here, not
/// an error; schedulers decide what to do with unsolvable puzzles.
pub fn count_solutions(puzzle: &MiningPuzzle) -> u64 {
    (0..puzzle.space()).filter(|&n| puzzle.qualifies(n)).count() as u64
}

/// One exhaustive sweep of the nonce space, reusable across many runs of the
/// same puzzle so the SHA-256 scan is paid once, not once per trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuzzleScan {
    mask: Vec<bool>,
    marked_count: u64,
}

impl PuzzleScan {
    pub fn marked_count(&self) -> u64 {
        self.marked_count
    }

    pub fn is_solution(&self, nonce: u64) -> bool {
        self.mask[nonce as usize]
    }
}

/// Evaluate the oracle over the whole nonce space once.
pub fn scan_puzzle(puzzle: &MiningPuzzle) -> PuzzleScan {
    let mask: Vec<bool> = (0..puzzle.space()).map(|n| puzzle.qualifies(n)).collect();
    let marked_count = mask.iter().filter(|&&m| m).count() as u64;
    PuzzleScan { mask, marked_count }
}

/// Search templates (by bumping the timestamp) until the puzzle has exactly
/// `solutions` qualifying nonces. Used to pin Grover benchmarks at M = 1.
pub fn find_puzzle_with_solutions(
    base: BlockHeader,
    nonce_bits: u32,
    difficulty: u8,
    solutions: u64,
    max_probes: u64,
) -> Result<MiningPuzzle, AdversaryError> {
    let mut template = base;
    for probe in 0..max_probes {
        template.timestamp = base.timestamp + probe;
        let puzzle = MiningPuzzle::new(template, nonce_bits, difficulty)?;
        if count_solutions(&puzzle) == solutions {
            return Ok(puzzle);
        }
    }
    Err(AdversaryError::PuzzleSearchExhausted(max_probes))
}

/// Transcript of one Grover mining run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverMineOutcome {
    /// A nonce satisfying the puzzle predicate.
    pub nonce: u64,
    /// Total oracle queries spent: the iteration count summed over attempts.
    pub oracle_queries: u64,
    /// Samples drawn until one landed on a solution.
    pub attempts: u64,
    /// Exact per-attempt success probability of the final state.
    pub success_probability: f64,
}

/// Mine with Grover search: schedule `k = optimal_iterations(2^bits, M)` from
/// the exhaustive solution count, run the statevector search, and resample
/// with fresh randomness until the drawn nonce actually qualifies. Each
/// attempt costs `k` oracle queries.
pub fn grover_mine(
    puzzle: &MiningPuzzle,
    rng: &mut SimRng,
) -> Result<GroverMineOutcome, AdversaryError> {
    grover_mine_scanned(puzzle, &scan_puzzle(puzzle), rng)
}

/// [`grover_mine`] with the exhaustive scan supplied by the caller; use this
/// when running many trials of one puzzle.
pub fn grover_mine_scanned(
    puzzle: &MiningPuzzle,
    scan: &PuzzleScan,
    rng: &mut SimRng,
) -> Result<GroverMineOutcome, AdversaryError> {
    assert_eq!(
        scan.mask.len() as u64,
        puzzle.space(),
        "scan does not belong to this puzzle's nonce space"
    );
    if scan.marked_count == 0 {
        return Err(AdversaryError::UnsolvablePuzzle);
    }
    let plan = GroverPlan::new(puzzle.nonce_bits as usize, scan.marked_count);
    let marked = |nonce: u64| scan.mask[nonce as usize];
    let mut oracle_queries = 0;
    let mut attempts = 0;
    loop {
        attempts += 1;
        oracle_queries += plan.iterations;
        let outcome = grover_search(puzzle.nonce_bits as usize, marked, plan.iterations, rng)?;
        if marked(outcome.sample) {
            return Ok(GroverMineOutcome {
                nonce: outcome.sample,
                oracle_queries,
                attempts,
                success_probability: outcome.marked_mass,
            });
        }
    }
}

/// Classical mining restricted to the puzzle's nonce space: uniform draws
/// with replacement until the predicate passes.
pub fn classical_mine(
    puzzle: &MiningPuzzle,
    rng: &mut SimRng,
    max_attempts: u64,
) -> Result<(u64, u64), AdversaryError> {
    for attempt in 1..=max_attempts {
        let nonce = rng.random_range(0..puzzle.space());
        if puzzle.qualifies(nonce) {
            return Ok((nonce, attempt));
        }
    }
    Err(AdversaryError::AttemptsExhausted(max_attempts))
}

/// Which mining algorithm an attacker wields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackerKind {
    Classical,
    Grover,
}

/// Expected oracle queries to solve a puzzle with `marked` solutions in a
/// space of `space` indices: `N/M` classically, `(pi/4) * sqrt(N/M)` for
/// Grover. Reported un-floored; schedules round separately.
pub fn expected_queries(kind: AttackerKind, space: u64, marked: u64) -> f64 {
    assert!(
        marked >= 1 && marked <= space,
        "expected_queries requires 1 <= M <= N"
    );
    let ratio = space as f64 / marked as f64;
    match kind {
        AttackerKind::Classical => ratio,
        AttackerKind::Grover => FRAC_PI_4 * ratio.sqrt(),
    }
}

/// Closed-form probability that an attacker holding power fraction `q` ever
/// erases a deficit of `z` blocks: 1 when `q >= 1/2`, else `(q/(1-q))^z`.
pub fn catchup_probability(attacker_share: f64, deficit: u32) -> f64 {
    assert!(
        attacker_share > 0.0 && attacker_share < 1.0,
        "attacker share must lie strictly between 0 and 1"
    );
    if attacker_share >= 0.5 {
        1.0
    } else {
        (attacker_share / (1.0 - attacker_share)).powi(deficit as i32)
    }
}

/// Fork-race configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaceConfig {
    /// Attacker's share of block production for a classical attacker.
    pub attacker_share: f64,
    /// Blocks the attacker starts behind.
    pub confirmation_depth: u32,
    pub attacker_kind: AttackerKind,
    pub trials: u64,
    /// Difficulty (leading zero bits) of the per-block puzzle; sets the
    /// Grover attacker's per-block query budget.
    pub pow_bits: u32,
    /// Honest lead at which a trial is declared lost. The default of 200
    /// biases tested parameters by well under 1e-6.
    pub lead_cap: u32,
}

impl RaceConfig {
    pub fn classical(attacker_share: f64, confirmation_depth: u32, trials: u64) -> Self {
        RaceConfig {
            attacker_share,
            confirmation_depth,
            attacker_kind: AttackerKind::Classical,
            trials,
            pow_bits: 16,
            lead_cap: 200,
        }
    }

    pub fn grover(pow_bits: u32, confirmation_depth: u32, trials: u64) -> Self {
        RaceConfig {
            attacker_share: 0.5,
            confirmation_depth,
            attacker_kind: AttackerKind::Grover,
            trials,
            pow_bits,
            lead_cap: 200,
        }
    }

    /// Probability that the next block is the attacker's.
    ///
    /// Classical attackers win blocks at their power share. A Grover attacker
    /// issuing queries at the same rate as the whole honest side solves a
    /// `2^t`-hard puzzle in `(pi/4) * 2^(t/2)` expected queries instead of
    /// `2^t`, so its effective share is `(1/T_a) / (1/T_a + 1/T_h)`.
    pub fn effective_share(&self) -> f64 {
        match self.attacker_kind {
            AttackerKind::Classical => self.attacker_share,
            AttackerKind::Grover => {
                let space = (1u64 << self.pow_bits) as f64;
                let t_attacker = FRAC_PI_4 * space.sqrt();
                let t_honest = space;
                (1.0 / t_attacker) / (1.0 / t_attacker + 1.0 / t_honest)
            }
        }
    }
}

/// Race outcome counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaceOutcome {
    pub trials: u64,
    pub caught_up: u64,
    pub frequency: f64,
    pub effective_share: f64,
}

/// Monte Carlo gambler's-ruin walk: each step the attacker closes its deficit
/// with the effective share probability or falls one further behind, until it
/// catches up or hits the lead cap.
pub fn simulate_race(config: &RaceConfig, rng: &mut SimRng) -> Result<RaceOutcome, AdversaryError> {
    if config.attacker_share <= 0.0 || config.attacker_share >= 1.0 {
        return Err(AdversaryError::InvalidPowerFraction);
    }
    if config.trials == 0 {
        return Err(AdversaryError::ZeroTrials);
    }
    let share = config.effective_share();
    let cap = i64::from(config.lead_cap.max(config.confirmation_depth + 1));
    let mut caught_up = 0u64;
    for _ in 0..config.trials {
        let mut deficit = i64::from(config.confirmation_depth);
        while deficit > 0 && deficit < cap {
            deficit += if rng.random_bool(share) { -1 } else { 1 };
        }
        if deficit == 0 {
            caught_up += 1;
        }
    }
    Ok(RaceOutcome {
        trials: config.trials,
        caught_up,
        frequency: caught_up as f64 / config.trials as f64,
        effective_share: share,
    })
}

// ---------------------------------------------------------------------------
// Toy discrete-log signature scheme and its breaker.
// ---------------------------------------------------------------------------

/// Multiplicative group mod a prime `modulus <= 2^32`, generated by a
/// primitive root, so the group order is `modulus - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ToyGroup {
    pub modulus: u64,
    pub generator: u64,
}

impl ToyGroup {
    pub fn order(&self) -> u64 {
        self.modulus - 1
    }

    pub fn pow(&self, base: u64, exponent: u64) -> u64 {
        mod_pow(base, exponent, self.modulus)
    }

    /// Sample a group: a random prime in `[min, max]` with a primitive root.
    pub fn random(min: u64, max: u64, rng: &mut SimRng) -> Self {
        assert!(min >= 5 && max <= 1 << 32 && min < max);
        let modulus = loop {
            let candidate = rng.random_range(min..=max);
            if is_prime(candidate) {
                break candidate;
            }
        };
        ToyGroup {
            modulus,
            generator: primitive_root(modulus),
        }
    }
}

/// Private/public key pair: `public = g^private mod p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyKeypair {
    pub group: ToyGroup,
    pub private: u64,
    pub public: u64,
}

impl ToyKeypair {
    pub fn generate(group: ToyGroup, rng: &mut SimRng) -> Self {
        let private = rng.random_range(1..group.order());
        ToyKeypair {
            group,
            private,
            public: group.pow(group.generator, private),
        }
    }

    pub fn from_private(group: ToyGroup, private: u64) -> Self {
        ToyKeypair {
            group,
            private,
            public: group.pow(group.generator, private),
        }
    }
}

/// Schnorr-style signature `(challenge, response)` with SHA-256 as the
/// challenge hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ToySignature {
    pub challenge: u64,
    pub response: u64,
}

fn challenge_hash(group: &ToyGroup, commitment: u64, message: &[u8]) -> u64 {
    let mut data = Vec::with_capacity(24 + message.len());
    data.extend_from_slice(&group.modulus.to_be_bytes());
    data.extend_from_slice(&group.generator.to_be_bytes());
    data.extend_from_slice(&commitment.to_be_bytes());
    data.extend_from_slice(message);
    let digest = sha256(&data);
    u64::from_be_bytes(digest.as_bytes()[0..8].try_into().unwrap()) % group.order()
}

/// Sign `message`: commit `r = g^k`, challenge `e = H(r || m)`, respond
/// `s = k + e*x mod (p-1)`. A zero nonce draw is resampled internally.
pub fn toy_sign(keypair: &ToyKeypair, message: &[u8], rng: &mut SimRng) -> ToySignature {
    let group = keypair.group;
    let nonce = loop {
        let k = rng.random_range(0..group.order());
        if k != 0 {
            break k;
        }
    };
    let commitment = group.pow(group.generator, nonce);
    let challenge = challenge_hash(&group, commitment, message);
    let response = ((u128::from(nonce) + u128::from(challenge) * u128::from(keypair.private))
        % u128::from(group.order())) as u64;
    ToySignature {
        challenge,
        response,
    }
}

/// Verify: recompute `r' = g^s * y^(-e)` and check `H(r' || m)` equals the
/// challenge. Rejects out-of-range components outright.
pub fn toy_verify(group: &ToyGroup, public: u64, message: &[u8], sig: &ToySignature) -> bool {
    if sig.challenge >= group.order() || sig.response >= group.order() || public >= group.modulus {
        return false;
    }
    // y^(order - e) is y^(-e) since the generator has full order p-1.
    let neg_challenge = (group.order() - sig.challenge) % group.order();
    let commitment = (u128::from(group.pow(group.generator, sig.response))
        * u128::from(group.pow(public, neg_challenge))
        % u128::from(group.modulus)) as u64;
    challenge_hash(group, commitment, message) == sig.challenge
}

/// A recovered private key plus the group operations the search spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BrokenKey {
    pub private: u64,
    pub group_operations: u64,
}

/// Baby-step giant-step discrete log: recover `x` with `g^x = y mod p` in
/// `O(sqrt(p))` time and memory. Total on its domain: every public key
/// produced by [`ToyKeypair`] is recovered, as is the trivial `y = 1`.
pub fn break_key(group: &ToyGroup, public: u64) -> BrokenKey {
    let order = group.order();
    let m = (order as f64).sqrt().ceil() as u64;
    let mut ops = 0u64;

    let mut baby_steps = HashMap::with_capacity(m as usize);
    let mut acc = 1u64;
    for j in 0..m {
        baby_steps.entry(acc).or_insert(j);
        acc = (u128::from(acc) * u128::from(group.generator) % u128::from(group.modulus)) as u64;
        ops += 1;
    }

    // giant stride g^(-m) = g^(order - m mod order)
    let stride = group.pow(group.generator, (order - m % order) % order);
    let mut gamma = public % group.modulus;
    for i in 0..=m {
        if let Some(&j) = baby_steps.get(&gamma) {
            return BrokenKey {
                private: (i * m + j) % order,
                group_operations: ops,
            };
        }
        gamma = (u128::from(gamma) * u128::from(stride) % u128::from(group.modulus)) as u64;
        ops += 1;
    }
    panic!("discrete log not found: {public} is not an element of the group");
}

fn mod_pow(base: u64, mut exponent: u64, modulus: u64) -> u64 {
    let m = u128::from(modulus);
    let mut result = 1u128;
    let mut b = u128::from(base % modulus);
    while exponent > 0 {
        if exponent & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exponent >>= 1;
    }
    result as u64
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs with this witness
/// set.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = (u128::from(x) * u128::from(x) % u128::from(n)) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn factorize(mut n: u64) -> Vec<u64> {
    let mut factors = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            factors.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

fn primitive_root(modulus: u64) -> u64 {
    let order = modulus - 1;
    let factors = factorize(order);
    (2..modulus)
        .find(|&g| factors.iter().all(|&f| mod_pow(g, order / f, modulus) != 1))
        .expect("every prime modulus has a primitive root")
}

// ---------------------------------------------------------------------------
// Threat reporting.
// ---------------------------------------------------------------------------

/// Published resource estimate for breaking RSA-2048 on a fault-tolerant
/// quantum machine; reported alongside measured toy-scale ratios, with no
/// extrapolation between the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CitedResourceEstimate {
    pub target: &'static str,
    pub hours: f64,
    pub noisy_qubits: f64,
}

pub const RSA_2048_ESTIMATE: CitedResourceEstimate = CitedResourceEstimate {
    target: "RSA-2048",
    hours: 8.0,
    noisy_qubits: 2.0e7,
};

/// One measured classical-vs-quantum query comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupMeasurement {
    pub label: String,
    pub classical_queries: f64,
    pub quantum_queries: f64,
}

impl SpeedupMeasurement {
    pub fn ratio(&self) -> f64 {
        self.quantum_queries / self.classical_queries
    }
}

/// Structured threat summary: the cited large-scale datapoint plus whatever
/// toy-scale measurements the caller supplies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreatReport {
    pub cited: CitedResourceEstimate,
    pub measurements: Vec<SpeedupMeasurement>,
}

pub fn threat_report(measurements: &[SpeedupMeasurement]) -> ThreatReport {
    ThreatReport {
        cited: RSA_2048_ESTIMATE,
        measurements: measurements.to_vec(),
    }
}
