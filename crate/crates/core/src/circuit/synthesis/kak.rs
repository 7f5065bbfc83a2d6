//! Two-qubit synthesis through the magic-basis Cartan decomposition.
//!
//! `U = e^{iφ}·(K1_hi ⊗ K1_lo)·exp(i(a·XX + b·YY + c·ZZ))·(K2_hi ⊗ K2_lo)`,
//! with each interaction coefficient reduced into `[-π/4, π/4]` so the
//! non-zero ones map to one `Rxx` each.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use super::euler::synth_1q;
use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::linalg::{c, cis, kron, Mat, Vector, ZERO};
use crate::unitary::{pauli_x, pauli_y, pauli_z, ry, rz};

const COEF_EPS: f64 = 1e-11;

struct Magic {
    b: Mat,
    signs: [[f64; 4]; 3],
}

fn magic() -> &'static Magic {
    static M: OnceLock<Magic> = OnceLock::new();
    M.get_or_init(|| {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (o, z, i) = (c(s, 0.0), ZERO, c(0.0, s));
        let b = Mat::from_row_slice(4, 4, &[o, i, z, z, z, z, i, o, z, z, i, -o, o, -i, z, z]);
        let paulis = [pauli_x(), pauli_y(), pauli_z()];
        let mut signs = [[0.0; 4]; 3];
        for (p, row) in paulis.iter().zip(signs.iter_mut()) {
            let d = b.adjoint() * kron(p, p) * &b;
            for k in 0..4 {
                row[k] = d[(k, k)].re.signum();
            }
        }
        Magic { b, signs }
    })
}

#[derive(Clone, Debug)]
pub struct Kak {
    pub k1: (Mat, Mat),
    pub k2: (Mat, Mat),
    pub coeffs: [f64; 3],
}

impl Kak {
    pub fn interaction_count(&self) -> usize {
        self.coeffs.iter().filter(|v| v.abs() > COEF_EPS).count()
    }
}

fn real_orthogonal_diagonalizer(m2: &Mat) -> Option<DMatrix<f64>> {
    const MIXES: [(f64, f64); 5] = [(1.0, 0.0), (0.5773, 0.8165), (0.2143, -0.9768), (-0.8491, 0.5282), (0.1302, 0.3378)];
    for (a, b) in MIXES {
        let r = DMatrix::<f64>::from_fn(4, 4, |i, j| a * m2[(i, j)].re + b * m2[(i, j)].im);
        let p = SymmetricEigen::new(r).eigenvectors;
        let pc = p.map(|x| c(x, 0.0));
        let d = pc.transpose() * m2 * &pc;
        let off: f64 = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|ij| d[ij].norm_sqr()).sum();
        if off.sqrt() < 1e-10 {
            return Some(p);
        }
    }
    None
}

fn permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if (0..4).all(|k| p.contains(&k)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Splits a local 4×4 unitary into `hi ⊗ lo`.
fn split_local(m: &Mat) -> Result<(Mat, Mat)> {
    let block = |i: usize, j: usize| m.view((2 * i, 2 * j), (2, 2)).into_owned();
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n = block(i, j).iter().map(|z| z.norm_sqr()).sum::<f64>();
            if n > best {
                (bi, bj, best) = (i, j, n);
            }
        }
    }
    let blk = block(bi, bj);
    let det = blk[(0, 0)] * blk[(1, 1)] - blk[(0, 1)] * blk[(1, 0)];
    let lo = &blk / det.sqrt();
    let mut hi = Mat::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            hi[(i, j)] = (lo.adjoint() * block(i, j)).trace() / c(2.0, 0.0);
        }
    }
    let err = crate::linalg::frobenius(&(kron(&hi, &lo) - m));
    if err > 1e-8 {
        return Err(Error::invalid(format!("local factor split failed (residual {err:e})")));
    }
    Ok((hi, lo))
}

/// Cartan decomposition with the fewest non-zero interaction coefficients.
pub fn kak(u: &Mat) -> Result<Kak> {
    let mg = magic();
    let det = crate::linalg::Mat::determinant(u);
    let us = u / det.powf(0.25);
    let up = mg.b.adjoint() * &us * &mg.b;
    let m2 = up.transpose() * &up;
    let p = real_orthogonal_diagonalizer(&m2).ok_or_else(|| Error::invalid("KAK diagonalization failed"))?;
    let pc = p.map(|x| c(x, 0.0));
    let d = pc.transpose() * &m2 * &pc;

    let mut best: Option<(usize, [f64; 3], [i64; 3], Mat, Mat)> = None;
    'search: for perm in permutations() {
        let mut pp = Mat::zeros(4, 4);
        for (k, &src) in perm.iter().enumerate() {
            pp.set_column(k, &pc.column(src));
        }
        if pp.determinant().re < 0.0 {
            let col = -pp.column(0).into_owned();
            pp.set_column(0, &col);
        }
        let base: Vec<f64> = perm.iter().map(|&k| d[(k, k)].arg() / 2.0).collect();
        for flips in 0..16u32 {
            let theta: Vec<f64> = (0..4).map(|k| base[k] + if flips >> k & 1 == 1 { PI } else { 0.0 }).collect();
            let phase = Mat::from_diagonal(&Vector::from_iterator(4, theta.iter().map(|&t| cis(-t))));
            let o1 = &up * &pp * phase;
            let imag: f64 = o1.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
            if imag > 1e-8 || o1.map(|z| c(z.re, 0.0)).determinant().re < 0.0 {
                continue;
            }
            let mut coef = [0.0; 4];
            for k in 0..4 {
                coef[0] += theta[k] / 4.0;
                for a in 0..3 {
                    coef[a + 1] += mg.signs[a][k] * theta[k] / 4.0;
                }
            }
            let mut reduced = [0.0; 3];
            let mut shifts = [0i64; 3];
            for a in 0..3 {
                let k = (coef[a + 1] / FRAC_PI_2).round();
                reduced[a] = coef[a + 1] - k * FRAC_PI_2;
                shifts[a] = k as i64;
            }
            let count = reduced.iter().filter(|v| v.abs() > COEF_EPS).count();
            if best.as_ref().is_none_or(|b| count < b.0) {
                let o1r = o1.map(|z| c(z.re, 0.0));
                best = Some((count, reduced, shifts, o1r, pp.clone()));
                if count == 0 {
                    break 'search;
                }
            }
        }
    }
    let (_, coeffs, shifts, o1, pp) = best.ok_or_else(|| Error::invalid("no consistent KAK branch"))?;
    let paulis = [pauli_x(), pauli_y(), pauli_z()];
    let mut k1 = &mg.b * o1 * mg.b.adjoint();
    for (p, s) in paulis.iter().zip(shifts) {
        if s.rem_euclid(2) == 1 {
            k1 *= kron(p, p);
        }
    }
    let k2 = &mg.b * pp.transpose() * mg.b.adjoint();
    Ok(Kak { k1: split_local(&k1)?, k2: split_local(&k2)?, coeffs })
}

/// Native gates realizing a 4×4 unitary whose index bit 0 is `q0` and bit 1 is `q1`.
pub fn synth_2q(u: &Mat, q0: usize, q1: usize) -> Result<Vec<Gate>> {
    let k = kak(u)?;
    let id = Mat::identity(2, 2);
    let (mut hi, mut lo) = (k.k2.0.clone(), k.k2.1.clone());
    let mut out = Vec::new();
    let stages = [
        (k.coeffs[0], id.clone(), id.clone()),
        (k.coeffs[1], rz(-FRAC_PI_2), rz(FRAC_PI_2)),
        (k.coeffs[2], ry(FRAC_PI_2), ry(-FRAC_PI_2)),
    ];
    for (coef, pre, post) in stages {
        if coef.abs() <= COEF_EPS {
            continue;
        }
        lo = &pre * lo;
        hi = &pre * hi;
        out.extend(synth_1q(&lo, q0));
        out.extend(synth_1q(&hi, q1));
        out.push(Gate::rxx(q0, q1, -2.0 * coef));
        lo = post.clone();
        hi = post;
    }
    lo = &k.k1.1 * lo;
    hi = &k.k1.0 * hi;
    out.extend(synth_1q(&lo, q0));
    out.extend(synth_1q(&hi, q1));
    Ok(out)
}
