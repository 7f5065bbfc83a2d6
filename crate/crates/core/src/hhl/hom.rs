//! Destructive overlap (Hong-Ou-Mandel) module.
//!
//! CX from each HOM qubit onto the matching state qubit followed by H on
//! the HOM qubit. Measuring both registers gives
//! `|⟨b|x⟩|² = Σ_{α,β} (−1)^{popcount(α & β)} P(α, β)`.

use serde::Serialize;

use super::{HhlConfig, Mode};
use crate::circuit::{Gate, QuantumCircuit};
use crate::error::{Error, Result};
use crate::statevector::{Distribution, Statevector};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomResult {
    /// `|⟨b|x⟩|`, clamped to `[0, 1]`.
    pub overlap: f64,
    /// Signed estimate of `|⟨b|x⟩|²` before clamping.
    pub raw_overlap_sq: f64,
    /// True when a negative sampled estimate was clamped to zero.
    pub clamped: bool,
    /// Binomial standard error of `raw_overlap_sq` (sampled mode).
    pub std_error: Option<f64>,
}

pub fn hom_gates(state: &[usize], hom: &[usize]) -> Vec<Gate> {
    let mut gates: Vec<Gate> = state.iter().zip(hom).map(|(&s, &h)| Gate::cx(h, s)).collect();
    gates.extend(hom.iter().map(|&h| Gate::h(h)));
    gates
}

fn parity_sign(key: u64, n: usize) -> f64 {
    let alpha = key & ((1u64 << n) - 1);
    let beta = key >> n;
    if (alpha & beta).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ (−1)^{α·β} P(αβ)` for a distribution whose low `n` key bits are the
/// state register and high `n` bits the HOM register.
pub fn overlap_from_distribution(dist: &Distribution, n: usize) -> f64 {
    dist.probs.iter().map(|(&k, &p)| parity_sign(k, n) * p).sum()
}

pub(crate) fn finish(raw: f64, mode: Mode, shots: Option<usize>) -> Result<HomResult> {
    if mode == Mode::Exact && raw < -1e-9 {
        return Err(Error::invalid(format!("negative exact overlap estimate {raw:e}; HOM circuit is inconsistent")));
    }
    let clamped = raw < 0.0 && mode == Mode::Sampled;
    let overlap = raw.clamp(0.0, 1.0).sqrt();
    // each shot contributes ±1, so the variance of the mean is (1 − raw²)/shots
    let std_error = shots.map(|s| ((1.0 - raw * raw).max(0.0) / s as f64).sqrt());
    Ok(HomResult { overlap, raw_overlap_sq: raw, clamped, std_error })
}

/// Overlap of two register states through the HOM circuit.
pub fn hom_overlap(x: &Statevector, b: &Statevector, config: &HhlConfig) -> Result<HomResult> {
    let n = x.num_qubits();
    if b.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.num_qubits() });
    }
    let mut joint = x.tensor(b);
    let state: Vec<usize> = (0..n).collect();
    let hom: Vec<usize> = (n..2 * n).collect();
    let mut circ = QuantumCircuit::new(2 * n);
    circ.extend(hom_gates(&state, &hom))?;
    circ.apply(&mut joint)?;
    let all: Vec<usize> = (0..2 * n).collect();
    match config.mode {
        Mode::Exact => finish(overlap_from_distribution(&joint.marginal_distribution(&all, &[])?, n), Mode::Exact, None),
        Mode::Sampled => {
            let counts = joint.sample_counts(&all, config.shots, config.seed)?;
            let dist = Distribution::from_counts(2 * n, &counts);
            finish(overlap_from_distribution(&dist, n), Mode::Sampled, Some(config.shots))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn cfg(mode: Mode) -> HhlConfig {
        HhlConfig { n_r: 1, c: 0.5, mode, shots: 10_000, repetitions: 1, seed: 4 }
    }

    #[test]
    fn self_and_orthogonal() {
        let x = Statevector::normalized(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0), c(0.1, -0.3)]).unwrap();
        assert!((hom_overlap(&x, &x, &cfg(Mode::Exact)).unwrap().overlap - 1.0).abs() < 1e-10);
        let a = Statevector::basis(2, 1).unwrap();
        let b = Statevector::basis(2, 2).unwrap();
        assert!(hom_overlap(&a, &b, &cfg(Mode::Exact)).unwrap().overlap.abs() < 1e-10);
    }

    #[test]
    fn mismatched_sizes() {
        assert!(hom_overlap(&Statevector::zero(1), &Statevector::zero(2), &cfg(Mode::Exact)).is_err());
    }
}
