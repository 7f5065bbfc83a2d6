//! HHL circuit construction and execution.
//!
//! Layout: qubit 0 is the ancilla, then the clock (`n_r`), state (`n_b`)
//! and HOM (`n_b`) registers. Clock qubit `q` controls `U^{2^q}` with
//! `U = e^{i·sA·2π}`. The inverse Fourier transform has no swaps, so clock
//! qubit 0 carries the most significant bit of the eigenvalue readout `y`
//! (`λ̃ = y/2^{n_r}`).

mod hom;
mod run;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::synthesis::{state_preparation, ucry};
use crate::circuit::{decompose_to_native, Gate, QuantumCircuit};
use crate::error::{Error, Result};
use crate::fixing::FixingPlan;
use crate::linalg::Mat;
use crate::problem::ProblemInstance;
use crate::scaling::ScalingPlan;
use crate::statevector::Control;
use crate::unitary::{evolution_unitary, UnitaryBlock};

pub use hom::{hom_gates, hom_overlap, overlap_from_distribution, HomResult};
pub use run::{correlation_energy, run_hhl, solution_norm, HhlOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HhlConfig {
    pub n_r: usize,
    pub c: f64,
    pub mode: Mode,
    pub shots: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl HhlConfig {
    pub fn exact(plan: &ScalingPlan) -> Self {
        Self { n_r: plan.n_r, c: plan.c, mode: Mode::Exact, shots: 1000, repetitions: 10, seed: 0 }
    }

    pub fn sampled(plan: &ScalingPlan, shots: usize, repetitions: usize, seed: u64) -> Self {
        Self { n_r: plan.n_r, c: plan.c, mode: Mode::Sampled, shots, repetitions, seed }
    }
}

fn rotation_argument(n_r: usize, c: f64, y: usize) -> f64 {
    c * (1u64 << n_r) as f64 / y as f64
}

/// `θ_y = 2·asin(c·2^{n_r}/y)`, `θ_0 = 0`.
pub fn rotation_angles(n_r: usize, c: f64) -> Result<Vec<f64>> {
    if c <= 0.0 {
        return Err(Error::invalid(format!("rotation constant must be positive, got {c}")));
    }
    (0..1usize << n_r)
        .map(|y| {
            if y == 0 {
                return Ok(0.0);
            }
            let arg = rotation_argument(n_r, c, y);
            if arg > 1.0 + 1e-12 {
                return Err(Error::RotationDomain { index: y, argument: arg });
            }
            Ok(2.0 * arg.min(1.0).asin())
        })
        .collect()
}

/// As [`rotation_angles`], with arguments above 1 clamped to a full flip.
pub fn rotation_angles_clamped(n_r: usize, c: f64) -> Vec<f64> {
    (0..1usize << n_r)
        .map(|y| if y == 0 { 0.0 } else { 2.0 * rotation_argument(n_r, c, y).min(1.0).asin() })
        .collect()
}

/// Readout integer `y` for a clock bit pattern (bit `q` of `pattern` is clock qubit `q`).
pub fn readout_value(pattern: usize, n_r: usize) -> usize {
    (0..n_r).fold(0, |y, q| y | ((pattern >> q & 1) << (n_r - 1 - q)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HhlLayout {
    pub ancilla: usize,
    pub clock: Vec<usize>,
    pub state: Vec<usize>,
    pub hom: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct HhlCircuit {
    pub circuit: QuantumCircuit,
    pub layout: HhlLayout,
    /// Index of the first HOM gate; `None` once optimization has mixed
    /// HOM gates into the solver.
    pub hom_start: Option<usize>,
}

impl HhlCircuit {
    /// Gates before the HOM module.
    pub fn solver_part(&self) -> Option<QuantumCircuit> {
        let end = self.hom_start?;
        Some(self.circuit.with_gates(self.circuit.gates()[..end].to_vec()).expect("same layout"))
    }

    /// Lowers to native gates, keeping the solver/HOM boundary.
    pub fn to_native(&self) -> Result<HhlCircuit> {
        let Some(end) = self.hom_start else {
            return Ok(HhlCircuit { circuit: decompose_to_native(&self.circuit)?, layout: self.layout.clone(), hom_start: None });
        };
        let gates = self.circuit.gates();
        let solver = decompose_to_native(&self.circuit.with_gates(gates[..end].to_vec())?)?;
        let hom = decompose_to_native(&self.circuit.with_gates(gates[end..].to_vec())?)?;
        let hom_start = Some(solver.len());
        let mut circuit = solver;
        circuit.extend(hom.gates().iter().cloned())?;
        Ok(HhlCircuit { circuit, layout: self.layout.clone(), hom_start })
    }

    /// Same layout with a replacement gate list (for example an optimized one).
    pub fn replaced(&self, circuit: QuantumCircuit) -> Result<HhlCircuit> {
        if circuit.num_qubits() != self.circuit.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.circuit.num_qubits(), found: circuit.num_qubits() });
        }
        Ok(HhlCircuit { circuit, layout: self.layout.clone(), hom_start: None })
    }
}

/// `diag(1, e^{iθ})` on `target`, controlled by `control`.
fn controlled_phase(control: usize, target: usize, theta: f64) -> Gate {
    let p = UnitaryBlock::diagonal(&[0.0, theta]).expect("diagonal phases are unitary");
    Gate::unitary(p, vec![target]).controlled_by([Control::on(control)])
}

/// Phase estimation gates on `clock`/`state`, with fixed clock qubits
/// substituted by their classical values.
pub fn qpe_gates(sa: &Mat, clock: &[usize], state: &[usize], fixing: Option<&FixingPlan>) -> Result<Vec<Gate>> {
    let n_r = clock.len();
    if let Some(f) = fixing {
        f.check(n_r)?;
    }
    let fixed = |q: usize| fixing.and_then(|f| f.bit(q));
    let mut gates = Vec::new();
    for q in 0..n_r {
        if fixed(q).is_none() {
            gates.push(Gate::h(clock[q]));
        }
    }
    for q in 0..n_r {
        let power = (1u64 << q) as f64;
        match fixed(q) {
            Some(0) => {}
            Some(_) => gates.push(Gate::unitary(evolution_unitary(sa, 2.0 * PI * power)?, state.to_vec())),
            None => gates.push(
                Gate::unitary(evolution_unitary(sa, 2.0 * PI * power)?, state.to_vec()).controlled_by([Control::on(clock[q])]),
            ),
        }
    }
    // Inverse QFT on t_k = clock[k]: t_0 holds 0.y_{n-1}...y_0 before the transform.
    for k in (0..n_r).rev() {
        for m in (k + 1..n_r).rev() {
            let theta = -2.0 * PI / (1u64 << (m - k + 1)) as f64;
            // A fixed qubit is classical: the phase either vanishes or acts on the other qubit alone.
            match (fixed(m), fixed(k)) {
                (Some(_), Some(_)) | (Some(0), None) | (None, Some(0)) => {}
                (Some(_), None) => gates.push(Gate::rz(clock[k], theta)),
                (None, Some(_)) => gates.push(Gate::rz(clock[m], theta)),
                (None, None) => gates.push(controlled_phase(clock[m], clock[k], theta)),
            }
        }
        if fixed(k).is_none() {
            gates.push(Gate::h(clock[k]));
        }
    }
    Ok(gates)
}

/// Ancilla rotation multiplexed over the free clock qubits.
pub fn rotation_gates(n_r: usize, c: f64, ancilla: usize, clock: &[usize], fixing: Option<&FixingPlan>) -> Vec<Gate> {
    let table = rotation_angles_clamped(n_r, c);
    let free: Vec<usize> = (0..n_r).filter(|&q| fixing.and_then(|f| f.bit(q)).is_none()).collect();
    let base = (0..n_r).fold(0usize, |acc, q| acc | ((fixing.and_then(|f| f.bit(q)).unwrap_or(0) as usize) << q));
    let angles: Vec<f64> = (0..1usize << free.len())
        .map(|x| {
            let pattern = free.iter().enumerate().fold(base, |acc, (j, &q)| acc | ((x >> j & 1) << q));
            table[readout_value(pattern, n_r)]
        })
        .collect();
    let controls: Vec<usize> = free.iter().map(|&q| clock[q]).collect();
    ucry(&angles, &controls, ancilla)
}

fn check_problem(problem: &ProblemInstance, plan: &ScalingPlan) -> Result<()> {
    if problem.norm_b() < 1e-14 {
        return Err(Error::invalid("b must be non-zero"));
    }
    if plan.s <= 0.0 || plan.c <= 0.0 {
        return Err(Error::invalid("scaling plan needs s > 0 and c > 0"));
    }
    Ok(())
}

/// State preparation plus phase estimation on registers `clock` (0..n_r)
/// and `state` (n_r..n_r+n_b).
pub fn build_qpe_circuit(problem: &ProblemInstance, plan: &ScalingPlan, fixing: Option<&FixingPlan>) -> Result<QuantumCircuit> {
    check_problem(problem, plan)?;
    let mut circuit = QuantumCircuit::with_registers(&[("clock", plan.n_r), ("state", problem.n_b())]);
    let clock = circuit.register("clock").expect("declared").qubits();
    let state = circuit.register("state").expect("declared").qubits();
    circuit.extend(state_preparation(&problem.b, &state)?)?;
    circuit.extend(qpe_gates(&plan.scaled(&problem.a), &clock, &state, fixing)?)?;
    Ok(circuit)
}

/// Full HHL circuit: state preparation on the state and HOM registers,
/// QPE, conditioned rotation, inverse QPE and the HOM module.
pub fn build_hhl_circuit(
    problem: &ProblemInstance,
    plan: &ScalingPlan,
    config: &HhlConfig,
    fixing: Option<&FixingPlan>,
) -> Result<HhlCircuit> {
    check_problem(problem, plan)?;
    if config.n_r != plan.n_r {
        return Err(Error::invalid(format!("config n_r = {} but scaling plan n_r = {}", config.n_r, plan.n_r)));
    }
    let n_b = problem.n_b();
    let mut circuit = QuantumCircuit::with_registers(&[("ancilla", 1), ("clock", config.n_r), ("state", n_b), ("hom", n_b)]);
    let reg = |name: &str| circuit.register(name).expect("declared").qubits();
    let layout = HhlLayout { ancilla: 0, clock: reg("clock"), state: reg("state"), hom: reg("hom") };
    let prep = state_preparation(&problem.b, &layout.state)?;
    let prep_hom = state_preparation(&problem.b, &layout.hom)?;
    let qpe = qpe_gates(&plan.scaled(&problem.a), &layout.clock, &layout.state, fixing)?;
    let rotation = rotation_gates(config.n_r, config.c, layout.ancilla, &layout.clock, fixing);
    circuit.extend(prep)?;
    circuit.extend(prep_hom)?;
    circuit.extend(qpe.iter().cloned())?;
    circuit.extend(rotation)?;
    circuit.extend(qpe.iter().rev().map(Gate::inverse))?;
    let hom_start = Some(circuit.len());
    circuit.extend(hom_gates(&layout.state, &layout.hom))?;
    Ok(HhlCircuit { circuit, layout, hom_start })
}
