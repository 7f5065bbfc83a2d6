//! Small dense linear-algebra helpers shared by the simulator and the synthesis code.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// `a ⊗ b`; `a` acts on the high-order index bits.
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn frobenius(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn unitarity_residual(m: &Mat) -> f64 {
    let n = m.nrows();
    frobenius(&(m * m.adjoint() - Mat::identity(n, n)))
}

pub fn hermiticity_residual(m: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Distance between `a` and `b` after optimally aligning the global phase.
/// Returns `(residual, phase)` with `a ≈ e^{i·phase} b`.
pub fn phase_aligned_distance(a: &Mat, b: &Mat) -> (f64, f64) {
    let overlap: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let rot = cis(phase);
    let diff: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - rot * y).norm_sqr()).sum();
    (diff.sqrt(), phase)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &Mat) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Diagonalizes a unitary as `U = V·diag(values)·V†` with unitary `V`.
pub fn unitary_eigen(u: &Mat) -> Result<(Vec<C64>, Mat)> {
    const MIXES: [(f64, f64); 5] =
        [(0.7236, 0.3127), (0.4161, -0.9093), (0.1987, 0.8660), (-0.5403, 0.2113), (0.9211, -0.0374)];
    let n = u.nrows();
    let ua = u.adjoint();
    let re = (u + &ua).scale(0.5);
    let im = (u - &ua) * c(0.0, -0.5);
    for (a, b) in MIXES {
        let h = re.scale(a) + im.scale(b);
        let (_, v) = hermitian_eigen(&h);
        let d = v.adjoint() * u * &v;
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += d[(i, j)].norm_sqr();
                }
            }
        }
        if off.sqrt() < 1e-11 {
            let values = (0..n).map(|k| d[(k, k)] / d[(k, k)].norm()).collect();
            return Ok((values, v));
        }
    }
    Err(Error::invalid("unitary diagonalization did not converge"))
}

pub fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

pub fn log2_exact(n: usize) -> Option<usize> {
    is_power_of_two(n).then(|| n.trailing_zeros() as usize)
}

/// Principal square root of a unitary matrix.
pub fn unitary_sqrt(u: &Mat) -> Result<Mat> {
    let (values, v) = unitary_eigen(u)?;
    let d = Mat::from_diagonal(&Vector::from_iterator(
        values.len(),
        values.iter().map(|z| cis(z.arg() / 2.0)),
    ));
    Ok(&v * d * v.adjoint())
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_unitary() -> Mat {
        let h = Mat::from_row_slice(
            3,
            3,
            &[c(1.0, 0.0), c(0.2, 0.1), c(0.0, -0.3), c(0.2, -0.1), c(-0.5, 0.0), c(0.4, 0.0), c(0.0, 0.3), c(0.4, 0.0), c(0.1, 0.0)],
        );
        let (vals, v) = hermitian_eigen(&h);
        let d = Mat::from_diagonal(&Vector::from_iterator(3, vals.iter().map(|&x| cis(1.3 * x))));
        &v * d * v.adjoint()
    }

    #[test]
    fn unitary_eigen_reconstructs() {
        let u = sample_unitary();
        let (vals, v) = unitary_eigen(&u).unwrap();
        let d = Mat::from_diagonal(&Vector::from_vec(vals));
        assert!(frobenius(&(&v * d * v.adjoint() - &u)) < 1e-10);
    }

    #[test]
    fn sqrt_squares_back() {
        let u = sample_unitary();
        let r = unitary_sqrt(&u).unwrap();
        assert!(frobenius(&(&r * &r - &u)) < 1e-10);
    }

    #[test]
    fn degenerate_unitary_eigen() {
        let mut u = Mat::identity(4, 4);
        u[(3, 3)] = c(-1.0, 0.0);
        let (vals, _) = unitary_eigen(&u).unwrap();
        assert_eq!(vals.iter().filter(|z| (z.re + 1.0).abs() < 1e-12).count(), 1);
    }

    #[test]
    fn phase_alignment() {
        let u = sample_unitary();
        let w = u.map(|z| z * cis(0.4));
        let (res, phase) = phase_aligned_distance(&w, &u);
        assert!(res < 1e-12);
        assert!((phase - 0.4).abs() < 1e-12);
    }
}
