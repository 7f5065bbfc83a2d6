//! Pass-pipeline circuit compression with equivalence checks.
//!
//! Equivalence is checked on the full unitary up to [`VERIFY_CAP`] qubits
//! and statistically above it. The reported classical fidelity compares the
//! full output distributions of both circuits started from `|0…0⟩`.

mod passes;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{metrics, CircuitMetrics, QuantumCircuit};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::statevector::{Distribution, Statevector};

pub use passes::{cancel_inverse_pairs, commute_and_cancel, merge_rotations, peephole, Pass};

/// Largest circuit verified through its full unitary.
pub const VERIFY_CAP: usize = 8;
pub const MAX_ROUNDS: usize = 20;
const RESIDUAL_TOL: f64 = 1e-8;
const STATISTICAL_TOL: f64 = 1e-6;
const STATISTICAL_SAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassPipeline {
    pub passes: Vec<Pass>,
    pub repeat_until_fixed_point: bool,
}

impl PassPipeline {
    pub fn new(passes: Vec<Pass>, repeat_until_fixed_point: bool) -> Result<Self> {
        if let Some(w) = passes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("pass `{}` appears twice in a row", w[0])));
        }
        Ok(Self { passes, repeat_until_fixed_point })
    }
}

impl Default for PassPipeline {
    fn default() -> Self {
        Self {
            passes: vec![Pass::CancelInversePairs, Pass::MergeRotations, Pass::CommuteAndCancel, Pass::Peephole2qResynthesis],
            repeat_until_fixed_point: true,
        }
    }
}

/// Runs the pipeline; a pass whose output is deeper than its input is discarded.
pub fn optimize(circuit: &QuantumCircuit, pipeline: &PassPipeline) -> Result<QuantumCircuit> {
    if let Some(g) = circuit.gates().iter().find(|g| !g.is_native()) {
        return Err(Error::NonNative(g.to_string()));
    }
    let mut current = circuit.clone();
    let mut depth = metrics(&current)?.depth;
    for _ in 0..MAX_ROUNDS {
        let before = current.gates().to_vec();
        for pass in &pipeline.passes {
            let candidate = pass.run(&current)?;
            let d = metrics(&candidate)?.depth;
            if d <= depth {
                current = candidate;
                depth = d;
            }
        }
        if !pipeline.repeat_until_fixed_point || current.gates() == before.as_slice() {
            break;
        }
    }
    Ok(current)
}

/// `|d_out − d_in|/d_in × 100`.
pub fn depth_compression(d_in: usize, d_out: usize) -> Result<f64> {
    if d_in == 0 {
        return Err(Error::invalid("depth compression undefined for an empty input circuit"));
    }
    Ok((d_out as f64 - d_in as f64).abs() / d_in as f64 * 100.0)
}

/// `Σ √(p·q)` over a shared bitstring space.
pub fn classical_fidelity(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.width != q.width {
        return Err(Error::DomainMismatch);
    }
    for d in [p, q] {
        if (d.total() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("distribution sums to {}, not 1", d.total())));
        }
    }
    let f: f64 = p.probs.iter().map(|(k, &a)| (a * q.get(*k)).sqrt()).sum();
    Ok(f.min(1.0))
}

fn full_distribution(state: &Statevector) -> Distribution {
    Distribution::from_dense(state.num_qubits(), &state.probabilities())
}

/// Fidelity between the output distributions of two circuits run from `|0…0⟩`.
pub fn output_fidelity(a: &QuantumCircuit, b: &QuantumCircuit) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch { expected: a.num_qubits(), found: b.num_qubits() });
    }
    classical_fidelity(&full_distribution(&a.simulate()), &full_distribution(&b.simulate()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMethod {
    Unitary,
    Statistical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    pub method: VerifyMethod,
    /// `φ ∈ [0, 2π)` with `U_orig·U_opt† = e^{iφ}I` (unitary method only).
    pub phase: Option<f64>,
    /// `‖U_orig·U_opt† − e^{iφ}I‖_F` (unitary method only).
    pub residual: Option<f64>,
    /// Smallest output-distribution fidelity over the checked inputs.
    pub min_fidelity: f64,
}

fn run_from(circuit: &QuantumCircuit, basis: usize) -> Statevector {
    let mut s = Statevector::basis(circuit.num_qubits(), basis).expect("basis index in range");
    circuit.apply(&mut s).expect("sizes agree");
    s
}

/// Checks that `optimized` implements `original` up to a global phase.
pub fn verify_equivalence(original: &QuantumCircuit, optimized: &QuantumCircuit) -> Result<Verification> {
    verify_equivalence_capped(original, optimized, VERIFY_CAP)
}

pub fn verify_equivalence_capped(original: &QuantumCircuit, optimized: &QuantumCircuit, cap: usize) -> Result<Verification> {
    let n = original.num_qubits();
    if optimized.num_qubits() != n {
        return Err(Error::DimensionMismatch { expected: n, found: optimized.num_qubits() });
    }
    if n <= cap {
        // ‖U − e^{iφ}V‖_F equals ‖UV† − e^{iφ}I‖_F.
        let cols: Vec<(Statevector, Statevector)> =
            (0..1usize << n).into_par_iter().map(|j| (run_from(original, j), run_from(optimized, j))).collect();
        let overlap: C64 = cols.iter().map(|(u, v)| v.inner_product(u).expect("same size")).sum();
        let rot = C64::from_polar(1.0, overlap.arg());
        let residual = cols
            .iter()
            .map(|(u, v)| u.amplitudes().iter().zip(v.amplitudes()).map(|(a, b)| (a - rot * b).norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        if residual >= RESIDUAL_TOL {
            return Err(Error::NotEquivalent(residual));
        }
        let phase = if overlap.norm() > 0.0 { overlap.arg().rem_euclid(2.0 * PI) } else { 0.0 };
        let phase = if 2.0 * PI - phase < 1e-12 { 0.0 } else { phase };
        let min_fidelity = output_fidelity(original, optimized)?;
        return Ok(Verification { method: VerifyMethod::Unitary, phase: Some(phase), residual: Some(residual), min_fidelity });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut inputs = vec![0usize];
    inputs.extend((1..STATISTICAL_SAMPLES).map(|_| rng.random_range(0..1usize << n)));
    let mut min_fidelity = 1.0f64;
    for j in inputs {
        let f = classical_fidelity(&full_distribution(&run_from(original, j)), &full_distribution(&run_from(optimized, j)))?;
        min_fidelity = min_fidelity.min(f);
    }
    if min_fidelity < 1.0 - STATISTICAL_TOL {
        return Err(Error::NotEquivalent(1.0 - min_fidelity));
    }
    Ok(Verification { method: VerifyMethod::Statistical, phase: None, residual: None, min_fidelity })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub depth_in: usize,
    pub depth_out: usize,
    pub two_q_in: usize,
    pub two_q_out: usize,
    pub compression_pct: f64,
    pub fidelity: f64,
    pub phase: Option<f64>,
    pub residual: Option<f64>,
    pub method: VerifyMethod,
}

/// Optimizes and verifies in one step.
pub fn optimize_verified(circuit: &QuantumCircuit, pipeline: &PassPipeline) -> Result<(QuantumCircuit, OptimizeReport)> {
    let out = optimize(circuit, pipeline)?;
    let v = verify_equivalence(circuit, &out)?;
    let (m_in, m_out): (CircuitMetrics, CircuitMetrics) = (metrics(circuit)?, metrics(&out)?);
    let report = OptimizeReport {
        depth_in: m_in.depth,
        depth_out: m_out.depth,
        two_q_in: m_in.two_qubit_count,
        two_q_out: m_out.two_qubit_count,
        compression_pct: if m_in.depth == 0 { 0.0 } else { depth_compression(m_in.depth, m_out.depth)? },
        fidelity: v.min_fidelity,
        phase: v.phase,
        residual: v.residual,
        method: v.method,
    };
    Ok((out, report))
}

/// Tries every ordering of the four passes and returns the pipeline giving
/// the shallowest circuit (ties broken by two-qubit count, then order).
pub fn search_pipelines(circuit: &QuantumCircuit) -> Result<(PassPipeline, CircuitMetrics)> {
    let mut orders = Vec::new();
    permutations(&mut Pass::ALL.to_vec(), 0, &mut orders);
    let results: Vec<(PassPipeline, CircuitMetrics)> = orders
        .into_par_iter()
        .map(|passes| {
            let p = PassPipeline::new(passes, true)?;
            let m = metrics(&optimize(circuit, &p)?)?;
            Ok((p, m))
        })
        .collect::<Result<_>>()?;
    Ok(results
        .into_iter()
        .min_by(|a, b| (a.1.depth, a.1.two_qubit_count, &a.0.passes).cmp(&(b.1.depth, b.1.two_qubit_count, &b.0.passes)))
        .expect("24 orderings"))
}

fn permutations(items: &mut Vec<Pass>, k: usize, out: &mut Vec<Vec<Pass>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}
