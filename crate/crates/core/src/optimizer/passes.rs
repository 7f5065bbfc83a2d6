//! Rewrite passes over native circuits. Every pass preserves the circuit
//! unitary up to global phase; an uncontrolled rotation by a multiple of
//! 2π is dropped as a phase.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::synthesis::euler::{negligible, wrap};
use crate::circuit::synthesis::{synth_1q, synth_2q};
use crate::circuit::{circuit_unitary, Gate, GateKind, QuantumCircuit};
use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pass {
    CancelInversePairs,
    MergeRotations,
    CommuteAndCancel,
    Peephole2qResynthesis,
}

impl Pass {
    pub const ALL: [Pass; 4] = [Pass::CancelInversePairs, Pass::MergeRotations, Pass::CommuteAndCancel, Pass::Peephole2qResynthesis];

    pub fn name(&self) -> &'static str {
        match self {
            Pass::CancelInversePairs => "cancel_inverse_pairs",
            Pass::MergeRotations => "merge_rotations",
            Pass::CommuteAndCancel => "commute_and_cancel",
            Pass::Peephole2qResynthesis => "peephole_2q_resynthesis",
        }
    }

    pub fn run(&self, circuit: &QuantumCircuit) -> Result<QuantumCircuit> {
        let gates = circuit.gates();
        let n = circuit.num_qubits();
        let out = match self {
            Pass::CancelInversePairs => cancel_inverse_pairs(gates, n),
            Pass::MergeRotations => merge_rotations(gates, n),
            Pass::CommuteAndCancel => commute_and_cancel(gates, n),
            Pass::Peephole2qResynthesis => peephole(gates, n)?,
        };
        circuit.with_gates(out)
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pass::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown pass `{s}`")))
    }
}

fn with_angle(g: &Gate, angle: f64) -> Gate {
    let kind = match g.kind {
        GateKind::Rx(_) => GateKind::Rx(angle),
        GateKind::Ry(_) => GateKind::Ry(angle),
        GateKind::Rz(_) => GateKind::Rz(angle),
        GateKind::Rxx(_) => GateKind::Rxx(angle),
        ref k => k.clone(),
    };
    Gate { kind, qubits: g.qubits.clone(), controls: Vec::new() }
}

fn same_axis(a: &Gate, b: &Gate) -> bool {
    let same_kind = std::mem::discriminant(&a.kind) == std::mem::discriminant(&b.kind);
    let sa: BTreeSet<_> = a.qubits.iter().collect();
    let sb: BTreeSet<_> = b.qubits.iter().collect();
    same_kind && sa == sb && a.kind.angle().is_some()
}

fn is_x_type(g: &Gate) -> bool {
    matches!(g.kind, GateKind::Rx(_) | GateKind::Rxx(_))
}

/// Output buffer that tracks, per qubit, the gates currently on that wire.
struct Wires {
    slots: Vec<Option<Gate>>,
    stacks: Vec<Vec<usize>>,
}

impl Wires {
    fn new(n: usize) -> Self {
        Self { slots: Vec::new(), stacks: vec![Vec::new(); n] }
    }

    fn push(&mut self, g: Gate) {
        let i = self.slots.len();
        for &q in &g.qubits {
            self.stacks[q].push(i);
        }
        self.slots.push(Some(g));
    }

    /// Index of the gate that is last on every one of `qubits`.
    fn last_common(&self, qubits: &[usize]) -> Option<usize> {
        let first = *self.stacks[qubits[0]].last()?;
        qubits.iter().all(|&q| self.stacks[q].last() == Some(&first)).then_some(first)
    }

    fn remove(&mut self, i: usize) {
        if let Some(g) = self.slots[i].take() {
            for q in g.qubits {
                self.stacks[q].retain(|&j| j != i);
            }
        }
    }

    fn set_angle(&mut self, i: usize, angle: f64) {
        if negligible(angle) {
            self.remove(i);
        } else if let Some(g) = &self.slots[i] {
            self.slots[i] = Some(with_angle(g, wrap(angle)));
        }
    }

    fn angle(&self, i: usize) -> f64 {
        self.slots[i].as_ref().and_then(|g| g.kind.angle()).unwrap_or(0.0)
    }

    fn finish(self) -> Vec<Gate> {
        self.slots.into_iter().flatten().collect()
    }
}

fn drop_identity(g: &Gate) -> bool {
    g.kind.angle().is_some_and(negligible)
}

/// `R(θ)` directly followed on its wires by `R(−θ)`: both removed.
pub fn cancel_inverse_pairs(gates: &[Gate], n: usize) -> Vec<Gate> {
    let mut w = Wires::new(n);
    for g in gates {
        if drop_identity(g) {
            continue;
        }
        if let Some(i) = w.last_common(&g.qubits) {
            let prev = w.slots[i].as_ref().expect("live slot");
            if same_axis(prev, g) && negligible(w.angle(i) + g.kind.angle().unwrap_or(0.0)) {
                w.remove(i);
                continue;
            }
        }
        w.push(g.clone());
    }
    w.finish()
}

/// Adjacent rotations about the same axis on the same qubits are summed.
pub fn merge_rotations(gates: &[Gate], n: usize) -> Vec<Gate> {
    let mut w = Wires::new(n);
    for g in gates {
        if drop_identity(g) {
            continue;
        }
        if let Some(i) = w.last_common(&g.qubits) {
            if same_axis(w.slots[i].as_ref().expect("live slot"), g) {
                w.set_angle(i, w.angle(i) + g.kind.angle().unwrap_or(0.0));
                continue;
            }
        }
        w.push(g.clone());
    }
    w.finish()
}

/// Merges X-axis rotations (`Rx`, `Rxx`) across other X-axis gates, which
/// all commute with each other.
pub fn commute_and_cancel(gates: &[Gate], n: usize) -> Vec<Gate> {
    let mut w = Wires::new(n);
    for g in gates {
        if drop_identity(g) {
            continue;
        }
        if is_x_type(g) {
            let reachable: Vec<BTreeSet<usize>> = g
                .qubits
                .iter()
                .map(|&q| {
                    w.stacks[q]
                        .iter()
                        .rev()
                        .take_while(|&&i| w.slots[i].as_ref().is_some_and(is_x_type))
                        .copied()
                        .collect()
                })
                .collect();
            let target = reachable[0]
                .iter()
                .rev()
                .copied()
                .find(|i| reachable.iter().all(|s| s.contains(i)) && same_axis(w.slots[*i].as_ref().expect("live"), g));
            if let Some(i) = target {
                w.set_angle(i, w.angle(i) + g.kind.angle().unwrap_or(0.0));
                continue;
            }
        }
        w.push(g.clone());
    }
    w.finish()
}

fn local_unitary(gates: &[Gate], support: &[usize]) -> Result<Mat> {
    let mut c = QuantumCircuit::new(support.len());
    for g in gates {
        let qubits = g.qubits.iter().map(|q| support.iter().position(|s| s == q).expect("inside support")).collect();
        c.push(Gate { kind: g.kind.clone(), qubits, controls: Vec::new() })?;
    }
    Ok(circuit_unitary(&c)?.matrix().clone())
}

fn rxx_count(gates: &[Gate]) -> usize {
    gates.iter().filter(|g| g.qubits.len() == 2).count()
}

/// Collapses single-qubit runs longer than their Euler form.
fn collapse_1q_runs(gates: &[Gate], n: usize) -> Vec<Gate> {
    let mut pending: Vec<Vec<Gate>> = vec![Vec::new(); n];
    let mut out = Vec::with_capacity(gates.len());
    let flush = |run: &mut Vec<Gate>, out: &mut Vec<Gate>, q: usize| {
        if run.len() >= 2 {
            let m = run.iter().fold(Mat::identity(2, 2), |acc, g| g.target_matrix() * acc);
            let new = synth_1q(&m, q);
            if new.len() < run.len() {
                out.extend(new);
                run.clear();
                return;
            }
        }
        out.append(run);
    };
    for g in gates {
        if g.qubits.len() == 1 {
            pending[g.qubits[0]].push(g.clone());
            continue;
        }
        for &q in &g.qubits {
            let mut run = std::mem::take(&mut pending[q]);
            flush(&mut run, &mut out, q);
        }
        out.push(g.clone());
    }
    for (q, run) in pending.iter_mut().enumerate() {
        flush(run, &mut out, q);
    }
    out
}

/// Collects maximal two-qubit blocks around each `Rxx` and resynthesizes
/// them when the Cartan form uses fewer interactions or fewer gates.
fn resynthesize_blocks(gates: &[Gate]) -> Result<Vec<Gate>> {
    let n = gates.len();
    let mut consumed = vec![false; n];
    let mut removed = vec![false; n];
    let mut replacement: Vec<Option<Vec<Gate>>> = vec![None; n];
    for i in 0..n {
        if consumed[i] || gates[i].qubits.len() != 2 {
            continue;
        }
        let pair = [gates[i].qubits[0], gates[i].qubits[1]];
        let mut members = vec![i];
        let mut blocked = [false; 2];
        for j in (0..i).rev() {
            let touch: Vec<usize> = (0..2).filter(|&k| gates[j].qubits.contains(&pair[k])).collect();
            if touch.is_empty() {
                continue;
            }
            if !consumed[j] && gates[j].qubits.len() == 1 && !blocked[touch[0]] {
                members.push(j);
            } else {
                touch.iter().for_each(|&k| blocked[k] = true);
            }
            if blocked[0] && blocked[1] {
                break;
            }
        }
        let mut blocked = [false; 2];
        for j in i + 1..n {
            let touch: Vec<usize> = (0..2).filter(|&k| gates[j].qubits.contains(&pair[k])).collect();
            if touch.is_empty() {
                continue;
            }
            let inside = gates[j].qubits.iter().all(|q| pair.contains(q));
            if !consumed[j] && inside && touch.iter().all(|&k| !blocked[k]) {
                members.push(j);
            } else {
                touch.iter().for_each(|&k| blocked[k] = true);
            }
            if blocked[0] && blocked[1] {
                break;
            }
        }
        members.sort_unstable();
        members.iter().for_each(|&m| consumed[m] = true);
        let block: Vec<Gate> = members.iter().map(|&m| gates[m].clone()).collect();
        if rxx_count(&block) < 2 && block.len() <= 3 {
            continue;
        }
        let u = local_unitary(&block, &pair)?;
        let new = synth_2q(&u, pair[0], pair[1])?;
        if (rxx_count(&new), new.len()) < (rxx_count(&block), block.len()) {
            members.iter().for_each(|&m| removed[m] = true);
            replacement[i] = Some(new);
        }
    }
    let mut out = Vec::with_capacity(n);
    for (idx, g) in gates.iter().enumerate() {
        if let Some(rep) = replacement[idx].take() {
            out.extend(rep);
        } else if !removed[idx] {
            out.push(g.clone());
        }
    }
    Ok(out)
}

/// Two-qubit block resynthesis followed by single-qubit run collapsing.
pub fn peephole(gates: &[Gate], n: usize) -> Result<Vec<Gate>> {
    let blocks = resynthesize_blocks(gates)?;
    Ok(collapse_1q_runs(&blocks, n))
}
