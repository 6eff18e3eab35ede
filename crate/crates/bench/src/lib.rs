//! Shared fixtures for the criterion benchmarks.

use qcbc_core::ComplexAmplitude;

/// Deterministic unit-modulus inputs with small spread in phase.
pub fn jittered_inputs(len: usize) -> Vec<ComplexAmplitude> {
    (0..len)
        .map(|j| ComplexAmplitude::from_polar(1.0, 0.01 * ((j * 7919) % 101) as f64 / 101.0))
        .collect()
}
