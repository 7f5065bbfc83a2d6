//! Circuit representation, metrics, serialization and native-gate synthesis.

mod metrics;
pub mod synthesis;
mod text;

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::statevector::{Control, Statevector};
use crate::unitary::{hadamard, pauli_x, rx, rxx, ry, rz, swap, UnitaryBlock};

pub use metrics::{metrics, CircuitMetrics};
pub use synthesis::decompose_to_native;
pub use text::{parse_circuit, write_circuit};

/// Default qubit cap for [`circuit_unitary`].
pub const UNITARY_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Rxx(f64),
    X,
    H,
    Swap,
    Unitary(UnitaryBlock),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Rxx(_) => "RXX",
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::Swap => "SWAP",
            GateKind::Unitary(_) => "U",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Rxx(a) => Some(a),
            _ => None,
        }
    }

    fn arity(&self) -> usize {
        match self {
            GateKind::Rxx(_) | GateKind::Swap => 2,
            GateKind::Unitary(u) => u.num_qubits(),
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    fn plain(kind: GateKind, qubits: Vec<usize>) -> Self {
        Self { kind, qubits, controls: Vec::new() }
    }

    pub fn rx(q: usize, theta: f64) -> Self {
        Self::plain(GateKind::Rx(theta), vec![q])
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Self::plain(GateKind::Ry(theta), vec![q])
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self::plain(GateKind::Rz(theta), vec![q])
    }

    pub fn rxx(a: usize, b: usize, theta: f64) -> Self {
        Self::plain(GateKind::Rxx(theta), vec![a, b])
    }

    pub fn x(q: usize) -> Self {
        Self::plain(GateKind::X, vec![q])
    }

    pub fn h(q: usize) -> Self {
        Self::plain(GateKind::H, vec![q])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::plain(GateKind::Swap, vec![a, b])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::x(target).controlled_by([Control::on(control)])
    }

    pub fn unitary(block: UnitaryBlock, targets: Vec<usize>) -> Self {
        Self::plain(GateKind::Unitary(block), targets)
    }

    pub fn controlled_by(mut self, controls: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(controls);
        self
    }

    /// Matrix on the target qubits only (controls excluded).
    pub fn target_matrix(&self) -> Mat {
        match &self.kind {
            GateKind::Rx(a) => rx(*a),
            GateKind::Ry(a) => ry(*a),
            GateKind::Rz(a) => rz(*a),
            GateKind::Rxx(a) => rxx(*a),
            GateKind::X => pauli_x(),
            GateKind::H => hadamard(),
            GateKind::Swap => swap(),
            GateKind::Unitary(u) => u.matrix().clone(),
        }
    }

    /// Full matrix on `support()`: targets occupy the low index bits, controls the high bits.
    pub fn support_matrix(&self) -> Mat {
        let t = self.qubits.len();
        let k = self.controls.len();
        let block = self.target_matrix();
        let dim = 1usize << (t + k);
        let mut m = Mat::identity(dim, dim);
        let active = self
            .controls
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, c)| if c.polarity { acc | 1 << (t + j) } else { acc });
        for i in 0..1usize << t {
            for j in 0..1usize << t {
                m[(active | i, active | j)] = block[(i, j)];
            }
        }
        m
    }

    pub fn support(&self) -> Vec<usize> {
        self.qubits.iter().copied().chain(self.controls.iter().map(|c| c.qubit)).collect()
    }

    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::Rx(a) => GateKind::Rx(-a),
            GateKind::Ry(a) => GateKind::Ry(-a),
            GateKind::Rz(a) => GateKind::Rz(-a),
            GateKind::Rxx(a) => GateKind::Rxx(-a),
            GateKind::Unitary(u) => GateKind::Unitary(u.adjoint()),
            k => k.clone(),
        };
        Gate { kind, qubits: self.qubits.clone(), controls: self.controls.clone() }
    }

    pub fn is_native(&self) -> bool {
        self.controls.is_empty()
            && matches!(self.kind, GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_) | GateKind::Rxx(_))
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::invalid(format!(
                "{} expects {} operand(s), got {}",
                self.kind.name(),
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        let mut seen = vec![false; num_qubits];
        for q in self.support() {
            if q >= num_qubits {
                return Err(Error::IndexOutOfRange { index: q, limit: num_qubits });
            }
            if seen[q] {
                return Err(Error::OverlappingQubits(q));
            }
            seen[q] = true;
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", text::format_gate(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn range(&self) -> Range<usize> {
        self.start..self.start + self.len
    }

    pub fn qubits(&self) -> Vec<usize> {
        self.range().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuantumCircuit {
    num_qubits: usize,
    registers: Vec<Register>,
    gates: Vec<Gate>,
}

impl QuantumCircuit {
    /// Circuit over `num_qubits` anonymous qubits.
    pub fn new(num_qubits: usize) -> Self {
        Self { num_qubits, registers: Vec::new(), gates: Vec::new() }
    }

    /// Empty circuit whose registers are laid out contiguously in the given order.
    pub fn with_registers(layout: &[(&str, usize)]) -> Self {
        let mut c = Self::new(0);
        for (name, len) in layout {
            c.add_register(name, *len);
        }
        c
    }

    /// Appends a register of fresh qubits and returns its range.
    pub fn add_register(&mut self, name: &str, len: usize) -> Range<usize> {
        let start = self.num_qubits;
        self.registers.push(Register { name: name.to_string(), start, len });
        self.num_qubits += len;
        start..start + len
    }

    pub(crate) fn declare_register(&mut self, reg: Register) -> Result<()> {
        if reg.start + reg.len > self.num_qubits {
            return Err(Error::IndexOutOfRange { index: reg.start + reg.len, limit: self.num_qubits });
        }
        if self.registers.iter().any(|r| r.name == reg.name || (r.start < reg.start + reg.len && reg.start < r.start + r.len)) {
            return Err(Error::invalid(format!("register `{}` overlaps an existing register", reg.name)));
        }
        self.registers.push(reg);
        Ok(())
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// Same registers, different gate list.
    pub fn with_gates(&self, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self { num_qubits: self.num_qubits, registers: self.registers.clone(), gates: Vec::new() };
        c.extend(gates)?;
        Ok(c)
    }

    pub(crate) fn with_gates_unchecked(&self, gates: Vec<Gate>) -> Self {
        Self { num_qubits: self.num_qubits, registers: self.registers.clone(), gates }
    }

    pub fn inverse(&self) -> Self {
        self.with_gates_unchecked(self.gates.iter().rev().map(Gate::inverse).collect())
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(Gate::is_native)
    }

    /// Applies every gate in order to `state`.
    pub fn apply(&self, state: &mut Statevector) -> Result<()> {
        self.apply_range(state, 0..self.gates.len())
    }

    pub fn apply_range(&self, state: &mut Statevector, range: Range<usize>) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: state.num_qubits() });
        }
        for g in &self.gates[range] {
            state.apply_matrix(&g.target_matrix(), &g.qubits, &g.controls);
        }
        Ok(())
    }

    pub fn simulate(&self) -> Statevector {
        let mut s = Statevector::zero(self.num_qubits);
        self.apply(&mut s).expect("sizes agree");
        s
    }
}

/// Full unitary of a circuit, column by column.
pub fn circuit_unitary(circuit: &QuantumCircuit) -> Result<UnitaryBlock> {
    circuit_unitary_capped(circuit, UNITARY_CAP)
}

pub fn circuit_unitary_capped(circuit: &QuantumCircuit, cap: usize) -> Result<UnitaryBlock> {
    let n = circuit.num_qubits();
    if n > cap {
        return Err(Error::UnitaryCap { qubits: n, cap });
    }
    let dim = 1usize << n;
    let columns: Vec<Statevector> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut s = Statevector::basis(n, j).expect("in range");
            circuit.apply(&mut s).expect("sizes agree");
            s
        })
        .collect();
    let mut m = Mat::zeros(dim, dim);
    for (j, col) in columns.iter().enumerate() {
        for (i, z) in col.amplitudes().iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    let res = crate::linalg::unitarity_residual(&m);
    if res > 1e-8 {
        return Err(Error::NonUnitary(res));
    }
    Ok(UnitaryBlock::new_unchecked(m))
}
