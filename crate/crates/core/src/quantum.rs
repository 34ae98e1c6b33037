//! The one-query Forrelation circuit.
//!
//! Register layout: one control qubit and `n` data qubits, all prepared in
//! `|+>`. The oracle applies `f(x)` to `|0>|x>` and `g(x)` to `|1>|x>`; then a
//! Hadamard is applied to every data qubit controlled on the control qubit,
//! a Hadamard to the control, and the control is measured. Outcome `0` is
//! "accept" and occurs with probability `(1 + forr(f, g)) / 2`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng as _, RngCore};

use crate::boolfun::{forrelation, Dyadic, TruthTable};
use crate::error::{Error, Result};

/// Largest data-register size for the state-vector simulation.
pub const STATE_VECTOR_MAX_ARITY: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measurement {
    Accept,
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuantumOutcome {
    pub accept_prob: Dyadic,
    pub sampled: Option<Measurement>,
}

/// Exact acceptance probability, `(1 + forr(f, g)) / 2`.
pub fn accept_probability(f: &TruthTable, g: &TruthTable) -> Result<Dyadic> {
    Ok((Dyadic::ONE + forrelation(f, g)?).half())
}

/// Acceptance probability from an explicit state-vector run of the circuit.
pub fn simulate_circuit(f: &TruthTable, g: &TruthTable) -> Result<f64> {
    let n = f.arity();
    if g.arity() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.arity(),
        });
    }
    if n > STATE_VECTOR_MAX_ARITY {
        return Err(Error::ArityAboveCap {
            n,
            cap: STATE_VECTOR_MAX_ARITY,
        });
    }
    let dim = 1usize << n;
    // amp[c * dim + x] is the amplitude of |c>|x>.
    let mut amp: Vec<f64> = vec![1.0 / libm::sqrt((2 * dim) as f64); 2 * dim];

    // The single oracle call.
    for x in 0..dim {
        amp[x] *= f.get(x).to_f64();
        amp[dim + x] *= g.get(x).to_f64();
    }

    let s = core::f64::consts::FRAC_1_SQRT_2;
    for qubit in 0..n {
        let bit = 1usize << qubit;
        for x in 0..dim {
            if x & bit == 0 {
                let (i, j) = (dim + x, dim + (x | bit));
                let (a, b) = (amp[i], amp[j]);
                amp[i] = s * (a + b);
                amp[j] = s * (a - b);
            }
        }
    }

    let mut accept = 0.0;
    for x in 0..dim {
        let zero = s * (amp[x] + amp[dim + x]);
        accept += zero * zero;
    }
    Ok(accept)
}

/// One run of the circuit: a Bernoulli draw at the exact acceptance
/// probability.
pub fn sample_outcome<R: RngCore + ?Sized>(
    f: &TruthTable,
    g: &TruthTable,
    rng: &mut R,
) -> Result<QuantumOutcome> {
    let p = accept_probability(f, g)?;
    let accepted = if p.exp() == 0 {
        p.num() == 1
    } else {
        // p = num / 2^exp with exp <= 63 for every supported arity.
        let draw = rng.gen_range(0..1u64 << p.exp());
        draw < p.num() as u64
    };
    Ok(QuantumOutcome {
        accept_prob: p,
        sampled: Some(if accepted {
            Measurement::Accept
        } else {
            Measurement::Reject
        }),
    })
}
