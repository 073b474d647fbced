//! BB84 key distribution over a simulated quantum channel.
//!
//! The sender encodes random bits in random bases (rectilinear or diagonal);
//! an optional intercept-resend eavesdropper measures a fraction of the
//! qubits in random bases and forwards what it saw; the receiver measures in
//! its own random bases. Matching-basis positions survive sifting, a random
//! sample of them is sacrificed to estimate the error rate, and the session
//! aborts when the estimate crosses the threshold.
//!
//! Per-qubit behavior is simulated with exact single-qubit probabilities
//! rather than statevectors: a matching-basis measurement reproduces the
//! prepared bit deterministically, a mismatched one is a fair coin. For BB84
//! these tables are distributionally identical to the full quantum treatment
//! and orders of magnitude faster.
//!
//! Intercepting every qubit drives the sifted-key error rate to 1/4: the
//! eavesdropper picks the wrong basis half the time, and each wrongly based
//! resend flips the receiver's matched-basis readout half the time.
//!
//! There is no error correction or privacy amplification: sessions report raw
//! sifted statistics. Keys feed the XOR one-time pad in [`OtpKey`], which
//! tracks spent bits and refuses to reuse them.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rng::SimRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QkdError {
    #[error("BB84 needs at least {min} transmitted qubits, got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("eve fraction must lie in [0, 1]")]
    InvalidEveFraction,
    #[error("sample fraction must lie strictly between 0 and 1")]
    InvalidSampleFraction,
    #[error("abort threshold must lie in [0, 1]")]
    InvalidAbortThreshold,
    #[error("sifted key of {sifted} bits is too short to sample for error estimation")]
    SiftedKeyTooShort { sifted: usize },
    #[error("basis/bit streams differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("one-time pad needs {needed} key bits but only {available} remain")]
    InsufficientKey { needed: usize, available: usize },
    #[error("one-time pad bits already spent; key reuse refused")]
    KeyReuse,
}

/// Smallest transmission that can survive sifting and sampling.
pub const MIN_QUBITS: usize = 16;

/// Preparation/measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Rectilinear,
    Diagonal,
}

impl Basis {
    fn random(rng: &mut SimRng) -> Basis {
        if rng.random_bool(0.5) {
            Basis::Rectilinear
        } else {
            Basis::Diagonal
        }
    }
}

/// BB84 session parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QkdConfig {
    /// Number of qubits the sender transmits.
    pub n_qubits: usize,
    /// Fraction of qubits the eavesdropper intercepts, in `[0, 1]`.
    pub eve_fraction: f64,
    /// Fraction of sifted bits sacrificed to estimate the error rate.
    pub sample_fraction: f64,
    /// Estimated error rate above which the session aborts.
    pub abort_threshold: f64,
}

impl QkdConfig {
    pub fn new(n_qubits: usize, eve_fraction: f64) -> Self {
        QkdConfig {
            n_qubits,
            eve_fraction,
            sample_fraction: 0.5,
            abort_threshold: 0.11,
        }
    }

    pub fn validate(&self) -> Result<(), QkdError> {
        if self.n_qubits < MIN_QUBITS {
            return Err(QkdError::TooFewQubits {
                min: MIN_QUBITS,
                got: self.n_qubits,
            });
        }
        if !(0.0..=1.0).contains(&self.eve_fraction) || self.eve_fraction.is_nan() {
            return Err(QkdError::InvalidEveFraction);
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction < 1.0) {
            return Err(QkdError::InvalidSampleFraction);
        }
        if !(0.0..=1.0).contains(&self.abort_threshold) || self.abort_threshold.is_nan() {
            return Err(QkdError::InvalidAbortThreshold);
        }
        Ok(())
    }
}

/// Everything a completed session exposes: sifted keys on both ends, the
/// sampled error estimate, the abort flag, and the residual final keys
/// (empty when aborted).
#[derive(Debug, Clone, PartialEq)]
pub struct QkdSession {
    pub config: QkdConfig,
    pub bases_a: Vec<Basis>,
    pub bases_b: Vec<Basis>,
    /// Transmitted positions that survived sifting.
    pub kept_positions: Vec<usize>,
    /// Sifted positions (indices into the sifted keys) sacrificed for the
    /// error estimate.
    pub sampled_positions: Vec<usize>,
    pub sifted_key_a: Vec<bool>,
    pub sifted_key_b: Vec<bool>,
    pub qber_estimate: f64,
    pub aborted: bool,
    pub final_key_a: Vec<bool>,
    pub final_key_b: Vec<bool>,
}

impl QkdSession {
    /// Error rate over the residual (non-sacrificed) bits, available in
    /// simulation because both sifted keys are visible.
    pub fn residual_error_rate(&self) -> f64 {
        let sampled: std::collections::BTreeSet<usize> =
            self.sampled_positions.iter().copied().collect();
        let mut errors = 0usize;
        let mut total = 0usize;
        for i in 0..self.sifted_key_a.len() {
            if !sampled.contains(&i) {
                total += 1;
                if self.sifted_key_a[i] != self.sifted_key_b[i] {
                    errors += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            errors as f64 / total as f64
        }
    }

    pub fn transcript(&self) -> QkdTranscript {
        QkdTranscript {
            n_qubits: self.config.n_qubits,
            eve_fraction: self.config.eve_fraction,
            bases_a: self.bases_a.iter().map(|b| basis_char(*b)).collect(),
            bases_b: self.bases_b.iter().map(|b| basis_char(*b)).collect(),
            kept_positions: self.kept_positions.clone(),
            qber_estimate: self.qber_estimate,
            aborted: self.aborted,
            final_key_a_hex: bits_to_hex(&self.final_key_a),
            final_key_b_hex: bits_to_hex(&self.final_key_b),
        }
    }
}

fn basis_char(b: Basis) -> char {
    match b {
        Basis::Rectilinear => '+',
        Basis::Diagonal => 'x',
    }
}

/// JSON-exportable session summary; keys appear as hex strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QkdTranscript {
    pub n_qubits: usize,
    pub eve_fraction: f64,
    pub bases_a: String,
    pub bases_b: String,
    pub kept_positions: Vec<usize>,
    pub qber_estimate: f64,
    pub aborted: bool,
    pub final_key_a_hex: String,
    pub final_key_b_hex: String,
}

/// Pack bits MSB-first into bytes and hex-encode; trailing bits are
/// zero-padded.
pub fn bits_to_hex(bits: &[bool]) -> String {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for (i, &bit) in bits.iter().enumerate() {
        if bit {
            bytes[i / 8] |= 0x80 >> (i % 8);
        }
    }
    hex::encode(bytes)
}

/// Run one BB84 session.
///
/// With `eve_fraction = 0` the sifted keys agree exactly and the error
/// estimate is exactly zero; with full interception the estimate concentrates
/// around 1/4.
pub fn bb84_run(config: &QkdConfig, rng: &mut SimRng) -> Result<QkdSession, QkdError> {
    config.validate()?;
    let n = config.n_qubits;

    let mut bases_a = Vec::with_capacity(n);
    let mut bases_b = Vec::with_capacity(n);
    let mut bits_a = Vec::with_capacity(n);
    let mut bits_b = Vec::with_capacity(n);

    for _ in 0..n {
        let bit = rng.random_bool(0.5);
        let basis_a = Basis::random(rng);

        // Channel, possibly disturbed by an intercept-resend measurement.
        let (state_bit, state_basis) =
            if config.eve_fraction > 0.0 && rng.random_bool(config.eve_fraction) {
                let basis_e = Basis::random(rng);
                let read = if basis_e == basis_a {
                    bit
                } else {
                    rng.random_bool(0.5)
                };
                (read, basis_e)
            } else {
                (bit, basis_a)
            };

        let basis_b = Basis::random(rng);
        let read_b = if basis_b == state_basis {
            state_bit
        } else {
            rng.random_bool(0.5)
        };

        bases_a.push(basis_a);
        bases_b.push(basis_b);
        bits_a.push(bit);
        bits_b.push(read_b);
    }

    let (sifted_key_a, sifted_key_b, kept_positions) = sift(&bits_a, &bases_a, &bits_b, &bases_b)?;

    let sample_len = (sifted_key_a.len() as f64 * config.sample_fraction).floor() as usize;
    if sample_len == 0 || sample_len >= sifted_key_a.len() {
        return Err(QkdError::SiftedKeyTooShort {
            sifted: sifted_key_a.len(),
        });
    }

    let mut sampled_positions: Vec<usize> =
        rand::seq::index::sample(rng, sifted_key_a.len(), sample_len).into_vec();
    sampled_positions.sort_unstable();

    let mismatches = sampled_positions
        .iter()
        .filter(|&&i| sifted_key_a[i] != sifted_key_b[i])
        .count();
    let qber_estimate = mismatches as f64 / sample_len as f64;
    let aborted = qber_estimate > config.abort_threshold;

    let (mut final_key_a, mut final_key_b) = (Vec::new(), Vec::new());
    if !aborted {
        let sampled: std::collections::BTreeSet<usize> =
            sampled_positions.iter().copied().collect();
        for i in 0..sifted_key_a.len() {
            if !sampled.contains(&i) {
                final_key_a.push(sifted_key_a[i]);
                final_key_b.push(sifted_key_b[i]);
            }
        }
    }

    Ok(QkdSession {
        config: *config,
        bases_a,
        bases_b,
        kept_positions,
        sampled_positions,
        sifted_key_a,
        sifted_key_b,
        qber_estimate,
        aborted,
        final_key_a,
        final_key_b,
    })
}

/// Both parties' sifted keys plus the surviving transmission positions.
pub type SiftedKeys = (Vec<bool>, Vec<bool>, Vec<usize>);

/// Keep exactly the positions where both parties used the same basis.
/// Expected to retain half the transmission.
pub fn sift(
    bits_a: &[bool],
    bases_a: &[Basis],
    bits_b: &[bool],
    bases_b: &[Basis],
) -> Result<SiftedKeys, QkdError> {
    let n = bits_a.len();
    for other in [bases_a.len(), bits_b.len(), bases_b.len()] {
        if other != n {
            return Err(QkdError::LengthMismatch { left: n, right: other });
        }
    }
    let mut key_a = Vec::new();
    let mut key_b = Vec::new();
    let mut kept = Vec::new();
    for i in 0..n {
        if bases_a[i] == bases_b[i] {
            key_a.push(bits_a[i]);
            key_b.push(bits_b[i]);
            kept.push(i);
        }
    }
    Ok((key_a, key_b, kept))
}

/// One party's copy of a shared pad. Bits are spent from the front; a pad
/// protects (or opens) a single message and then refuses reuse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OtpKey {
    bits: Vec<bool>,
    spent: usize,
}

impl OtpKey {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        OtpKey { bits, spent: 0 }
    }

    /// Unspent bits remaining.
    pub fn remaining(&self) -> usize {
        self.bits.len() - self.spent
    }

    /// Split off the unspent tail as a fresh pad, leaving this one fully
    /// spent. This is how one session key protects several messages without
    /// ever reusing a bit.
    pub fn take_remaining(&mut self) -> OtpKey {
        let tail = self.bits.split_off(self.spent);
        OtpKey {
            bits: tail,
            spent: 0,
        }
    }

    fn xor_from_front(&mut self, data: &[u8]) -> Result<Vec<u8>, QkdError> {
        let needed = data.len() * 8;
        if needed > self.bits.len() {
            return Err(QkdError::InsufficientKey {
                needed,
                available: self.bits.len(),
            });
        }
        if self.spent > 0 {
            return Err(QkdError::KeyReuse);
        }
        let mut out = Vec::with_capacity(data.len());
        for (i, &byte) in data.iter().enumerate() {
            let mut mask = 0u8;
            for b in 0..8 {
                if self.bits[i * 8 + b] {
                    mask |= 0x80 >> b;
                }
            }
            out.push(byte ^ mask);
        }
        self.spent = needed;
        Ok(out)
    }

    /// XOR `message` with the pad, marking the consumed bits spent.
    pub fn protect(&mut self, message: &[u8]) -> Result<Vec<u8>, QkdError> {
        self.xor_from_front(message)
    }

    /// Recover a message with this party's copy of the pad; consumes the same
    /// leading bits.
    pub fn open(&mut self, ciphertext: &[u8]) -> Result<Vec<u8>, QkdError> {
        self.xor_from_front(ciphertext)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_rng, rng_from_seed};
    use rand::Rng;

    #[test]
    fn quiet_channel_has_zero_error_and_identical_keys() {
        let config = QkdConfig::new(4096, 0.0);
        let session = bb84_run(&config, &mut rng_from_seed(1)).unwrap();
        assert_eq!(session.qber_estimate, 0.0);
        assert!(!session.aborted);
        assert_eq!(session.sifted_key_a, session.sifted_key_b);
        assert_eq!(session.final_key_a, session.final_key_b);
        assert!(!session.final_key_a.is_empty());
    }

    #[test]
    fn full_interception_disturbs_a_quarter_of_the_key() {
        let config = QkdConfig::new(100_000, 1.0);
        let session = bb84_run(&config, &mut rng_from_seed(2)).unwrap();
        assert!(
            (0.23..=0.27).contains(&session.qber_estimate),
            "estimate {}",
            session.qber_estimate
        );
        assert!(session.aborted);
        assert!(session.final_key_a.is_empty() && session.final_key_b.is_empty());
    }

    #[test]
    fn half_interception_scales_linearly() {
        let config = QkdConfig::new(100_000, 0.5);
        let session = bb84_run(&config, &mut rng_from_seed(3)).unwrap();
        assert!(
            (session.qber_estimate - 0.125).abs() < 0.02,
            "estimate {}",
            session.qber_estimate
        );
    }

    #[test]
    fn interception_error_rate_by_enumeration() {
        // Independent oracle: enumerate Eve's basis against the sifted basis
        // with exact probabilities. A sifted error needs Eve in the wrong
        // basis (1/2) and the receiver's readout coin to land wrong (1/2).
        let mut error_probability = 0.0;
        for eve_matches in [true, false] {
            let p_basis = 0.5;
            let p_error_given_basis = if eve_matches { 0.0 } else { 0.5 };
            error_probability += p_basis * p_error_given_basis;
        }
        assert_eq!(error_probability, 0.25);
    }

    #[test]
    fn mean_qber_is_monotone_in_eve_fraction() {
        let mut means = Vec::new();
        for (idx, f) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
            let mut total = 0.0;
            let sessions = 20;
            for s in 0..sessions {
                let config = QkdConfig::new(4096, f);
                let mut rng = derive_rng(90, (idx * 100 + s) as u64);
                total += bb84_run(&config, &mut rng).unwrap().qber_estimate;
            }
            means.push(total / sessions as f64);
        }
        assert_eq!(means[0], 0.0);
        for pair in means.windows(2) {
            assert!(pair[1] >= pair[0], "means not monotone: {means:?}");
        }
    }

    #[test]
    fn abort_fires_exactly_above_threshold() {
        for f in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
            let config = QkdConfig::new(8192, f);
            let session = bb84_run(&config, &mut rng_from_seed(17)).unwrap();
            assert_eq!(
                session.aborted,
                session.qber_estimate > config.abort_threshold
            );
            assert_eq!(session.final_key_a.is_empty(), session.aborted);
        }
    }

    #[test]
    fn sampled_estimate_predicts_residual_error_rate() {
        let config = QkdConfig {
            n_qubits: 100_000,
            eve_fraction: 0.3,
            sample_fraction: 0.5,
            // Keep the residual keys around despite the disturbed channel.
            abort_threshold: 1.0,
        };
        let session = bb84_run(&config, &mut rng_from_seed(5)).unwrap();
        let residual = session.residual_error_rate();
        assert!(
            (session.qber_estimate - residual).abs() < 0.03,
            "sample {} vs residual {residual}",
            session.qber_estimate
        );
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            bb84_run(&QkdConfig::new(8, 0.0), &mut rng_from_seed(0)).unwrap_err(),
            QkdError::TooFewQubits { min: 16, got: 8 }
        );
        let mut config = QkdConfig::new(64, 1.5);
        assert_eq!(config.validate(), Err(QkdError::InvalidEveFraction));
        config.eve_fraction = 0.0;
        config.sample_fraction = 1.0;
        assert_eq!(config.validate(), Err(QkdError::InvalidSampleFraction));
    }

    #[test]
    fn sift_keeps_exactly_matching_bases() {
        let bits = vec![true, false, true, false];
        let rect = vec![Basis::Rectilinear; 4];
        let diag = vec![Basis::Diagonal; 4];
        let (a, b, kept) = sift(&bits, &rect, &bits, &rect).unwrap();
        assert_eq!(a, bits);
        assert_eq!(b, bits);
        assert_eq!(kept, vec![0, 1, 2, 3]);

        let (a, _, kept) = sift(&bits, &rect, &bits, &diag).unwrap();
        assert!(a.is_empty() && kept.is_empty());

        assert_eq!(
            sift(&bits, &rect[..3], &bits, &rect).unwrap_err(),
            QkdError::LengthMismatch { left: 4, right: 3 }
        );
    }

    #[test]
    fn sift_retains_about_half_of_random_bases() {
        let mut rng = rng_from_seed(8);
        let n = 10_000;
        let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        let bases_a: Vec<Basis> = (0..n).map(|_| Basis::random(&mut rng)).collect();
        let bases_b: Vec<Basis> = (0..n).map(|_| Basis::random(&mut rng)).collect();
        let (_, _, kept) = sift(&bits, &bases_a, &bits, &bases_b).unwrap();
        let expected = n as f64 / 2.0;
        assert!(
            (kept.len() as f64 - expected).abs() < expected * 0.05,
            "kept {}",
            kept.len()
        );
    }

    #[test]
    fn otp_zero_key_is_identity() {
        let mut key = OtpKey::from_bits(vec![false; 64]);
        let ct = key.protect(b"zeropad!").unwrap();
        assert_eq!(ct, b"zeropad!");
    }

    #[test]
    fn otp_round_trip_on_random_messages() {
        let mut rng = rng_from_seed(10);
        for _ in 0..50 {
            let bits: Vec<bool> = (0..128).map(|_| rng.random_bool(0.5)).collect();
            let message: Vec<u8> = (0..16).map(|_| rng.random()).collect();
            let mut sender = OtpKey::from_bits(bits.clone());
            let mut receiver = OtpKey::from_bits(bits);
            let ct = sender.protect(&message).unwrap();
            assert_eq!(receiver.open(&ct).unwrap(), message);
        }
    }

    #[test]
    fn otp_refuses_key_reuse_and_overdraw() {
        let mut key = OtpKey::from_bits(vec![true; 256]);
        key.protect(b"first").unwrap();
        assert_eq!(key.protect(b"again"), Err(QkdError::KeyReuse));

        let mut small = OtpKey::from_bits(vec![true; 8]);
        assert_eq!(
            small.protect(b"toolong"),
            Err(QkdError::InsufficientKey {
                needed: 56,
                available: 8
            })
        );
    }

    #[test]
    fn otp_take_remaining_spends_fresh_bits() {
        let mut key = OtpKey::from_bits(vec![true; 128]);
        key.protect(b"one").unwrap();
        assert_eq!(key.remaining(), 128 - 24);
        let mut rest = key.take_remaining();
        assert_eq!(key.remaining(), 0);
        assert_eq!(rest.remaining(), 104);
        rest.protect(b"two").unwrap();
        assert_eq!(rest.protect(b"three"), Err(QkdError::KeyReuse));
    }

    #[test]
    fn bits_pack_to_hex_msb_first() {
        assert_eq!(
            bits_to_hex(&[true, false, false, false, false, false, false, false]),
            "80"
        );
        assert_eq!(bits_to_hex(&[true; 4]), "f0");
        assert_eq!(bits_to_hex(&[]), "");
    }

    #[test]
    fn sessions_are_deterministic_per_seed() {
        let config = QkdConfig::new(2048, 0.4);
        let a = bb84_run(&config, &mut rng_from_seed(33)).unwrap();
        let b = bb84_run(&config, &mut rng_from_seed(33)).unwrap();
        assert_eq!(a, b);
        let ta = serde_json::to_string(&a.transcript()).unwrap();
        let tb = serde_json::to_string(&b.transcript()).unwrap();
        assert_eq!(ta, tb);
    }
}
