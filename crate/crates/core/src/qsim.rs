//! Exact statevector simulation of small qubit registers.
//!
//! Holds the full `2^n` complex amplitude vector (n capped at 24 qubits,
//! ~256 MB of doubles) and provides exactly what the rest of the simulator
//! needs: uniform-superposition preparation, predicate phase oracles,
//! inversion about the mean, GHZ states, and terminal computational-basis
//! measurement. Oracles are classical predicates evaluated per basis index,
//! which permits marking functions as heavy as real SHA-256 without compiling
//! them to reversible gates.
//!
//! Basis-index convention: qubit 0 is the most significant bit of the index,
//! so the 3-qubit index `0b101` reads as the bitstring `101`.
//!
//! A `StateVector` mutates in place; confine one state to one thread at a
//! time. Independent states may be processed in parallel.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::rng::SimRng;

/// Largest supported register; 2^24 amplitudes keeps memory modest.
pub const MAX_QUBITS: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QsimError {
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    QubitCountOutOfRange(usize),
    #[error("phase oracle marks no basis index")]
    NoMarkedIndex,
}

/// Normalized amplitude vector over an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state `|0...0>`.
    pub fn zero(qubits: usize) -> Result<Self, QsimError> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(QsimError::QubitCountOutOfRange(qubits));
        }
        let mut amplitudes = vec![Complex64::ZERO; 1 << qubits];
        amplitudes[0] = Complex64::ONE;
        Ok(StateVector { qubits, amplitudes })
    }

    /// The GHZ state `(|0...0> + |1...1>)/sqrt(2)`: amplitude `1/sqrt(2)` at
    /// indices 0 and `2^n - 1`, zero elsewhere.
    pub fn ghz(qubits: usize) -> Result<Self, QsimError> {
        let mut state = Self::zero(qubits)?;
        let last = state.amplitudes.len() - 1;
        state.amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        state.amplitudes[last] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// Number of amplitudes, `2^n`.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    /// Total probability mass; 1 within 1e-12 after any gate sequence.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Hadamard on every qubit. Maps `|0...0>` to the uniform superposition.
    pub fn hadamard_all(&mut self) {
        for q in 0..self.qubits {
            let stride = 1usize << (self.qubits - 1 - q);
            let mut base = 0;
            while base < self.amplitudes.len() {
                for i in base..base + stride {
                    let a = self.amplitudes[i];
                    let b = self.amplitudes[i + stride];
                    self.amplitudes[i] = (a + b) * FRAC_1_SQRT_2;
                    self.amplitudes[i + stride] = (a - b) * FRAC_1_SQRT_2;
                }
                base += stride << 1;
            }
        }
    }

    /// Phase oracle: negate the amplitude of every basis index satisfying
    /// `marked`. Applying the same oracle twice restores the state.
    pub fn phase_oracle(&mut self, marked: impl Fn(u64) -> bool) {
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            if marked(index as u64) {
                *amp = -*amp;
            }
        }
    }

    /// Grover diffusion, `2|s><s| - I` with `|s>` the uniform superposition:
    /// reflects every amplitude about the mean amplitude.
    pub fn diffusion(&mut self) {
        let mean = self.amplitudes.iter().sum::<Complex64>() / self.amplitudes.len() as f64;
        for amp in &mut self.amplitudes {
            *amp = 2.0 * mean - *amp;
        }
    }

    /// Probability of observing each basis index.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Summed probability over the marked basis indices.
    pub fn marked_mass(&self, marked: impl Fn(u64) -> bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| marked(*i as u64))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Sample one basis index from the Born distribution.
    pub fn sample_index(&self, rng: &mut SimRng) -> u64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (index, amp) in self.amplitudes.iter().enumerate() {
            acc += amp.norm_sqr();
            if u < acc {
                return index as u64;
            }
        }
        // Rounding placed the norm a hair below u; the mass is at the tail.
        self.amplitudes.len() as u64 - 1
    }

    /// Terminal measurement of every qubit: samples a basis index and unpacks
    /// it into bits, qubit 0 first (most significant bit of the index).
    pub fn measure_all(&self, rng: &mut SimRng) -> Vec<bool> {
        let index = self.sample_index(rng);
        index_to_bits(index, self.qubits)
    }

    /// Dump `(index, probability)` rows as CSV, for debugging distributions.
    pub fn write_distribution_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,probability")?;
        for (index, amp) in self.amplitudes.iter().enumerate() {
            writeln!(w, "{},{}", index, amp.norm_sqr())?;
        }
        Ok(())
    }
}

/// Expand a basis index into `n` bits, qubit 0 as the most significant bit.
pub fn index_to_bits(index: u64, qubits: usize) -> Vec<bool> {
    (0..qubits)
        .map(|q| (index >> (qubits - 1 - q)) & 1 == 1)
        .collect()
}

/// Render measurement bits the way basis labels read, e.g. `101`.
pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Grover schedule for `marked` solutions in a search space of `space`
/// indices: the rotation angle and the iteration count that maximizes the
/// success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverPlan {
    pub qubits: usize,
    pub marked_count: u64,
    pub iterations: u64,
    pub theta: f64,
}

impl GroverPlan {
    pub fn new(qubits: usize, marked_count: u64) -> Self {
        let space = 1u64 << qubits;
        GroverPlan {
            qubits,
            marked_count,
            iterations: optimal_iterations(space, marked_count),
            theta: grover_theta(space, marked_count),
        }
    }
}

fn grover_theta(space: u64, marked: u64) -> f64 {
    assert!(
        marked >= 1 && marked <= space,
        "marked count must satisfy 1 <= M <= N"
    );
    (marked as f64 / space as f64).sqrt().asin()
}

/// Iteration count maximizing Grover's success probability:
/// `round(pi/(4*theta) - 1/2)` with `sin^2(theta) = M/N`, floored at zero.
pub fn optimal_iterations(space: u64, marked: u64) -> u64 {
    let theta = grover_theta(space, marked);
    let k = (PI / (4.0 * theta) - 0.5).round();
    if k < 0.0 {
        0
    } else {
        k as u64
    }
}

/// Success probability after `k` Grover iterations: `sin^2((2k+1)*theta)`.
pub fn grover_success_probability(space: u64, marked: u64, iterations: u64) -> f64 {
    let theta = grover_theta(space, marked);
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

/// Result of one Grover run: the sampled index and the exact probability mass
/// on marked indices in the final state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverOutcome {
    pub sample: u64,
    pub marked_mass: f64,
    pub marked_count: u64,
}

/// Run Grover search: uniform superposition, then `iterations` rounds of
/// phase oracle plus diffusion, then one Born-rule sample.
///
/// The returned `marked_mass` is computed exactly from the final state and
/// matches [`grover_success_probability`] to well under 1e-9.
pub fn grover_search(
    qubits: usize,
    marked: impl Fn(u64) -> bool,
    iterations: u64,
    rng: &mut SimRng,
) -> Result<GroverOutcome, QsimError> {
    let mut state = StateVector::zero(qubits)?;
    let marked_count = (0..state.len() as u64).filter(|&i| marked(i)).count() as u64;
    if marked_count == 0 {
        return Err(QsimError::NoMarkedIndex);
    }
    state.hadamard_all();
    for _ in 0..iterations {
        state.phase_oracle(&marked);
        state.diffusion();
    }
    Ok(GroverOutcome {
        sample: state.sample_index(rng),
        marked_mass: state.marked_mass(&marked),
        marked_count,
    })
}
