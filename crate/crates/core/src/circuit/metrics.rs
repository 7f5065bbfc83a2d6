use serde::{Deserialize, Serialize};

use super::{GateKind, QuantumCircuit};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub depth: usize,
    pub two_qubit_count: usize,
    pub gate_count: usize,
    pub num_qubits: usize,
}

/// Depth by greedy layering and the Rxx count of a native circuit.
pub fn metrics(circuit: &QuantumCircuit) -> Result<CircuitMetrics> {
    let mut layer = vec![0usize; circuit.num_qubits()];
    let mut depth = 0;
    let mut two_q = 0;
    for g in circuit.gates() {
        if !g.is_native() {
            return Err(Error::NonNative(g.to_string()));
        }
        if matches!(g.kind, GateKind::Rxx(_)) {
            two_q += 1;
        }
        let l = g.qubits.iter().map(|&q| layer[q]).max().unwrap_or(0) + 1;
        for &q in &g.qubits {
            layer[q] = l;
        }
        depth = depth.max(l);
    }
    Ok(CircuitMetrics { depth, two_qubit_count: two_q, gate_count: circuit.len(), num_qubits: circuit.num_qubits() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    #[test]
    fn empty_circuit() {
        let m = metrics(&QuantumCircuit::new(3)).unwrap();
        assert_eq!((m.depth, m.two_qubit_count, m.gate_count), (0, 0, 0));
    }

    #[test]
    fn parallel_and_serial() {
        let mut c = QuantumCircuit::new(2);
        c.extend([Gate::rx(0, 0.1), Gate::rx(1, 0.2)]).unwrap();
        assert_eq!(metrics(&c).unwrap().depth, 1);
        let mut c = QuantumCircuit::new(2);
        c.extend([Gate::rxx(0, 1, 0.3), Gate::rx(0, 0.1)]).unwrap();
        let m = metrics(&c).unwrap();
        assert_eq!((m.depth, m.two_qubit_count), (2, 1));
    }

    #[test]
    fn non_native_rejected() {
        let mut c = QuantumCircuit::new(1);
        c.push(Gate::h(0)).unwrap();
        assert!(matches!(metrics(&c), Err(Error::NonNative(_))));
    }
}
