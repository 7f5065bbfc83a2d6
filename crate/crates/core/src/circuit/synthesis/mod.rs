//! Lowering of arbitrary gates to the native set {Rx, Ry, Rz, Rxx}.
//!
//! One- and two-qubit supports go through Euler and Cartan synthesis.
//! Larger supports are split first: diagonal gates into Rz multiplexers,
//! multi-controlled single-qubit gates by the square-root recursion, controlled
//! multi-qubit blocks through their eigenbasis, and uncontrolled blocks into
//! Gray-ordered two-level rotations.

pub mod euler;
pub mod kak;
pub mod multiplex;

use super::{Gate, QuantumCircuit};
use crate::error::Result;
use crate::linalg::{cis, frobenius, unitary_eigen, unitary_sqrt, Mat, Vector, C64};
use crate::statevector::Control;
use crate::unitary::{pauli_x, UnitaryBlock};

pub use euler::synth_1q;
pub use kak::synth_2q;
pub use multiplex::{diagonal, state_preparation, ucry, ucrz};

/// Rewrites every gate into native rotations; equal to the input up to global phase.
pub fn decompose_to_native(circuit: &QuantumCircuit) -> Result<QuantumCircuit> {
    let mut lowering = Lowering::default();
    let mut out = Vec::with_capacity(circuit.len() * 4);
    for g in circuit.gates() {
        lowering.lower(g, &mut out)?;
    }
    circuit.with_gates(out)
}

/// Cached syntheses of uncontrolled blocks, keyed on support-local matrices.
/// An adjoint hit replays the cached sequence mirrored, so `W … W†` pairs
/// lower to exactly inverse gate lists.
#[derive(Default)]
struct Lowering {
    cache: Vec<(Mat, Vec<Gate>)>,
    bases: Vec<Mat>,
}

fn is_diagonal(m: &Mat) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)].norm() < 1e-14))
}

fn remap<'a>(gates: &'a [Gate], support: &'a [usize]) -> impl Iterator<Item = Gate> + 'a {
    gates.iter().map(move |g| Gate {
        kind: g.kind.clone(),
        qubits: g.qubits.iter().map(|&q| support[q]).collect(),
        controls: Vec::new(),
    })
}

impl Lowering {
    fn lower(&mut self, g: &Gate, out: &mut Vec<Gate>) -> Result<()> {
        if g.is_native() {
            out.push(g.clone());
            return Ok(());
        }
        let support = g.support();
        match support.len() {
            1 => out.extend(synth_1q(&g.target_matrix(), support[0])),
            2 => {
                let local = self.cached(&g.support_matrix(), 2)?;
                out.extend(remap(&local, &support));
            }
            _ => {
                let target = g.target_matrix();
                if is_diagonal(&target) {
                    let m = g.support_matrix();
                    let phases: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].arg()).collect();
                    for h in diagonal(&phases, &support) {
                        self.lower(&h, out)?;
                    }
                } else if g.qubits.len() == 1 {
                    for h in multi_controlled(&g.controls, g.qubits[0], &target)? {
                        self.lower(&h, out)?;
                    }
                } else if !g.controls.is_empty() {
                    let (values, w) = self.eigen(&target)?;
                    let wb = UnitaryBlock::new_unchecked(w);
                    let phases: Vec<f64> = values.iter().map(|z: &C64| z.arg()).collect();
                    let d = UnitaryBlock::diagonal(&phases)?;
                    self.lower(&Gate::unitary(wb.adjoint(), g.qubits.clone()), out)?;
                    self.lower(&Gate::unitary(d, g.qubits.clone()).controlled_by(g.controls.iter().copied()), out)?;
                    self.lower(&Gate::unitary(wb, g.qubits.clone()), out)?;
                } else {
                    let local = self.cached(&target, support.len())?;
                    out.extend(remap(&local, &support));
                }
            }
        }
        Ok(())
    }

    /// Eigendecomposition that reuses an earlier basis when it still
    /// diagonalizes `u` (commuting blocks such as powers of one unitary).
    fn eigen(&mut self, u: &Mat) -> Result<(Vec<C64>, Mat)> {
        let n = u.nrows();
        for w in self.bases.iter().filter(|w| w.nrows() == n) {
            let d = w.adjoint() * u * w;
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|ij| d[ij].norm_sqr())
                .sum();
            if off.sqrt() < 1e-11 {
                return Ok(((0..n).map(|k| d[(k, k)] / d[(k, k)].norm()).collect(), w.clone()));
            }
        }
        let (values, w) = unitary_eigen(u)?;
        self.bases.push(w.clone());
        Ok((values, w))
    }

    /// Native gates on local qubits `0..k` for an uncontrolled block.
    fn cached(&mut self, m: &Mat, k: usize) -> Result<Vec<Gate>> {
        for (key, gates) in &self.cache {
            if key.nrows() != m.nrows() {
                continue;
            }
            if frobenius(&(key - m)) < 1e-12 {
                return Ok(gates.clone());
            }
            if frobenius(&(key.adjoint() - m)) < 1e-12 {
                return Ok(gates.iter().rev().map(Gate::inverse).collect());
            }
        }
        let local: Vec<usize> = (0..k).collect();
        let gates = if k == 2 {
            synth_2q(m, 0, 1)?
        } else {
            let mut out = Vec::new();
            for h in two_level(m, &local) {
                self.lower(&h, &mut out)?;
            }
            out
        };
        self.cache.push((m.clone(), gates.clone()));
        Ok(gates)
    }
}

/// Square-root recursion for a single-qubit `u` under any number of controls.
pub fn multi_controlled(controls: &[Control], target: usize, u: &Mat) -> Result<Vec<Gate>> {
    let negative: Vec<usize> = controls.iter().filter(|c| !c.polarity).map(|c| c.qubit).collect();
    let positive: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
    let mut out: Vec<Gate> = negative.iter().map(|&q| Gate::x(q)).collect();
    out.extend(positive_controlled(&positive, target, u)?);
    out.extend(negative.iter().map(|&q| Gate::x(q)));
    Ok(out)
}

fn positive_controlled(controls: &[usize], target: usize, u: &Mat) -> Result<Vec<Gate>> {
    let block = |m: &Mat| UnitaryBlock::new_unchecked(m.clone());
    if controls.len() <= 1 {
        return Ok(vec![Gate::unitary(block(u), vec![target]).controlled_by(controls.iter().map(|&q| Control::on(q)))]);
    }
    let (last, rest) = controls.split_last().expect("non-empty");
    let v = unitary_sqrt(u)?;
    let mcx = positive_controlled(rest, *last, &pauli_x())?;
    let mut out = vec![Gate::unitary(block(&v), vec![target]).controlled_by([Control::on(*last)])];
    out.extend(mcx.iter().cloned());
    out.push(Gate::unitary(block(&v.adjoint()), vec![target]).controlled_by([Control::on(*last)]));
    out.extend(mcx);
    out.extend(positive_controlled(rest, target, &v)?);
    Ok(out)
}

/// `U` as a diagonal followed by multi-controlled two-level rotations between
/// Gray-adjacent basis states.
pub fn two_level(u: &Mat, qubits: &[usize]) -> Vec<Gate> {
    let n = u.nrows();
    let gray = |r: usize| r ^ (r >> 1);
    let mut m = Mat::from_fn(n, n, |r, s| u[(gray(r), gray(s))]);
    let mut rotations: Vec<(usize, Mat)> = Vec::new();
    for j in 0..n.saturating_sub(1) {
        for r in (j + 1..n).rev() {
            let b = m[(r, j)];
            if b.norm() < 1e-14 {
                continue;
            }
            let a = m[(r - 1, j)];
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            let g = Mat::from_row_slice(2, 2, &[a.conj() / norm, b.conj() / norm, -b / norm, a / norm]);
            for col in 0..n {
                let (x, y) = (m[(r - 1, col)], m[(r, col)]);
                m[(r - 1, col)] = g[(0, 0)] * x + g[(0, 1)] * y;
                m[(r, col)] = g[(1, 0)] * x + g[(1, 1)] * y;
            }
            rotations.push((r, g));
        }
    }
    let mut phases = vec![0.0; n];
    for r in 0..n {
        phases[gray(r)] = m[(r, r)].arg();
    }
    let mut out = vec![Gate::unitary(
        UnitaryBlock::new_unchecked(Mat::from_diagonal(&Vector::from_iterator(n, phases.iter().map(|&p| cis(p))))),
        qubits.to_vec(),
    )];
    for (r, g) in rotations.into_iter().rev() {
        let (lo_state, hi_state) = (gray(r - 1), gray(r));
        let bit = (lo_state ^ hi_state).trailing_zeros() as usize;
        let mut h = g.adjoint();
        if lo_state >> bit & 1 == 1 {
            let x = pauli_x();
            h = &x * h * &x;
        }
        let controls = (0..qubits.len())
            .filter(|&k| k != bit)
            .map(|k| Control { qubit: qubits[k], polarity: hi_state >> k & 1 == 1 });
        out.push(Gate::unitary(UnitaryBlock::new_unchecked(h), vec![qubits[bit]]).controlled_by(controls));
    }
    out
}
