//! Uniformly controlled rotations, diagonal gates and amplitude encoding.

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Clone, Copy)]
enum Axis {
    Y,
    Z,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Rotation on `target` by `angles[x]` where bit `j` of `x` is `controls[j]`.
/// Emits `2^k` rotations interleaved with `2^k` CX gates (Gray-code order).
fn ucr(axis: Axis, angles: &[f64], controls: &[usize], target: usize) -> Vec<Gate> {
    let k = controls.len();
    assert_eq!(angles.len(), 1 << k, "multiplexer needs 2^k angles");
    let rot = |a: f64| match axis {
        Axis::Y => Gate::ry(target, a),
        Axis::Z => Gate::rz(target, a),
    };
    if k == 0 {
        return if angles[0] == 0.0 { Vec::new() } else { vec![rot(angles[0])] };
    }
    let n = 1usize << k;
    let scale = 1.0 / n as f64;
    let mut out = Vec::with_capacity(2 * n);
    for i in 0..n {
        let g = gray(i);
        let alpha: f64 = angles
            .iter()
            .enumerate()
            .map(|(x, &t)| if (x & g).count_ones() % 2 == 0 { t } else { -t })
            .sum::<f64>()
            * scale;
        if alpha.abs() > 1e-15 {
            out.push(rot(alpha));
        }
        let bit = (g ^ gray((i + 1) % n)).trailing_zeros() as usize;
        out.push(Gate::cx(controls[bit], target));
    }
    out
}

pub fn ucry(angles: &[f64], controls: &[usize], target: usize) -> Vec<Gate> {
    ucr(Axis::Y, angles, controls, target)
}

pub fn ucrz(angles: &[f64], controls: &[usize], target: usize) -> Vec<Gate> {
    ucr(Axis::Z, angles, controls, target)
}

/// `diag(e^{i·phases[x]})` up to global phase; bit `j` of `x` is `qubits[j]`.
pub fn diagonal(phases: &[f64], qubits: &[usize]) -> Vec<Gate> {
    assert_eq!(phases.len(), 1 << qubits.len());
    let mut out = Vec::new();
    let mut current = phases.to_vec();
    for m in (0..qubits.len()).rev() {
        let half = 1usize << m;
        let angles: Vec<f64> = (0..half).map(|x| current[x + half] - current[x]).collect();
        out.extend(ucrz(&angles, &qubits[..m], qubits[m]));
        current = (0..half).map(|x| 0.5 * (current[x] + current[x + half])).collect();
    }
    out
}

/// Prepares `b/‖b‖` from `|0…0⟩` on `qubits` (bit `j` of the amplitude index is `qubits[j]`).
pub fn state_preparation(b: &[C64], qubits: &[usize]) -> Result<Vec<Gate>> {
    let k = qubits.len();
    if b.len() != 1 << k {
        return Err(Error::DimensionMismatch { expected: 1 << k, found: b.len() });
    }
    let norm = crate::linalg::vec_norm(b);
    if norm < 1e-14 {
        return Err(Error::invalid("cannot prepare the zero vector"));
    }
    let real = b.iter().all(|z| z.im.abs() < 1e-15);
    let mags: Vec<f64> = b.iter().map(|z| z.norm()).collect();
    let mut out = Vec::new();
    for m in (0..k).rev() {
        let groups = 1usize << (k - 1 - m);
        let mut angles = Vec::with_capacity(groups);
        for y in 0..groups {
            let base = y << (m + 1);
            if m == 0 && real {
                angles.push(2.0 * b[base + 1].re.atan2(b[base].re));
                continue;
            }
            let w = |bit: usize| -> f64 {
                (0..1usize << m).map(|low| mags[base | bit << m | low].powi(2)).sum::<f64>().sqrt()
            };
            angles.push(2.0 * w(1).atan2(w(0)));
        }
        out.extend(ucry(&angles, &qubits[m + 1..], qubits[m]));
    }
    if !real {
        let phases: Vec<f64> = b.iter().map(|z| if z.norm() > 0.0 { z.arg() } else { 0.0 }).collect();
        out.extend(diagonal(&phases, qubits));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{circuit_unitary, QuantumCircuit};
    use crate::linalg::{c, cis, phase_aligned_distance, Mat, Vector};
    use crate::unitary::ry;

    fn unitary_of(n: usize, gates: Vec<Gate>) -> Mat {
        let mut c = QuantumCircuit::new(n);
        c.extend(gates).unwrap();
        circuit_unitary(&c).unwrap().matrix().clone()
    }

    #[test]
    fn ucry_matches_block_diagonal() {
        let angles = [0.3, -1.2, 2.0, 0.7];
        let u = unitary_of(3, ucry(&angles, &[1, 2], 0));
        let mut expect = Mat::zeros(8, 8);
        for x in 0..4 {
            let r = ry(angles[x]);
            for i in 0..2 {
                for j in 0..2 {
                    expect[(x << 1 | i, x << 1 | j)] = r[(i, j)];
                }
            }
        }
        assert!(phase_aligned_distance(&u, &expect).0 < 1e-12);
    }

    #[test]
    fn diagonal_synthesis() {
        let phases = [0.1, 0.9, -0.4, 2.2, 1.0, 0.0, -3.0, 0.5];
        let u = unitary_of(3, diagonal(&phases, &[0, 1, 2]));
        let expect = Mat::from_diagonal(&Vector::from_iterator(8, phases.iter().map(|&p| cis(p))));
        assert!(phase_aligned_distance(&u, &expect).0 < 1e-12);
    }

    #[test]
    fn prepares_signed_and_complex_vectors() {
        let cases: Vec<Vec<C64>> = vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)],
            vec![c(0.1, 0.0), c(0.0, 0.0), c(-0.7, 0.0), c(0.3, 0.0), c(0.2, 0.0), c(-0.4, 0.0), c(0.0, 0.0), c(0.45, 0.0)],
            vec![c(0.3, 0.2), c(-0.1, 0.5), c(0.0, -0.6), c(0.4, 0.1)],
        ];
        for b in cases {
            let k = b.len().trailing_zeros() as usize;
            let qubits: Vec<usize> = (0..k).collect();
            let mut circ = QuantumCircuit::new(k);
            circ.extend(state_preparation(&b, &qubits).unwrap()).unwrap();
            let out = circ.simulate();
            let norm = crate::linalg::vec_norm(&b);
            let target: Vec<C64> = b.iter().map(|z| z / norm).collect();
            let overlap: C64 = target.iter().zip(out.amplitudes()).map(|(t, o)| t.conj() * o).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-12, "overlap {overlap}");
        }
    }
}
