//! Problem instances, the classical oracle and derived metrics.

use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigen, hermitian_eigenvalues, hermiticity_residual, vec_norm, Mat, C64};

const SMALL_2X2: &str = include_str!("../fixtures/small_2x2.json");
const H2_4X4: &str = include_str!("../fixtures/h2_4x4.json");

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(r) => c(r, 0.0),
            Entry::Complex([re, im]) => c(re, im),
        }
    }

    fn from_value(z: C64) -> Self {
        if z.im == 0.0 {
            Entry::Real(z.re)
        } else {
            Entry::Complex([z.re, z.im])
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemFile {
    label: String,
    matrix: Vec<Vec<Entry>>,
    b: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_e_corr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_row: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub label: String,
    pub a: Mat,
    pub b: Vec<C64>,
    pub reference_e_corr: Option<f64>,
    pub reference_row: Option<serde_json::Value>,
    /// Dimension before padding.
    pub original_dim: usize,
    pub warnings: Vec<String>,
}

impl ProblemInstance {
    /// Validates `A = A†` and pads to a power of two (at least 2).
    pub fn new(label: impl Into<String>, a: Mat, b: Vec<C64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        if n == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        let asym = hermiticity_residual(&a);
        if asym > 1e-10 {
            return Err(Error::NonHermitian(asym));
        }
        let dim = n.next_power_of_two().max(2);
        let mut warnings = Vec::new();
        let (a, b) = if dim == n {
            (a, b)
        } else {
            let mut padded = Mat::identity(dim, dim);
            padded.view_mut((0, 0), (n, n)).copy_from(&a);
            let mut pb = b;
            pb.resize(dim, c(0.0, 0.0));
            let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
            let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(lo..=hi).contains(&1.0) {
                warnings.push(format!(
                    "padding adds unit diagonal entries outside [{lo}, {hi}]; they shift d_min/d_max used by scaling"
                ));
            }
            (padded, pb)
        };
        Ok(Self { label: label.into(), a, b, reference_e_corr: None, reference_row: None, original_dim: n, warnings })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_b(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn norm_b(&self) -> f64 {
        vec_norm(&self.b)
    }

    pub fn normalized_b(&self) -> Vec<C64> {
        let n = self.norm_b();
        self.b.iter().map(|z| z / n).collect()
    }

    pub fn d_min(&self) -> f64 {
        (0..self.dim()).map(|i| self.a[(i, i)].re).fold(f64::INFINITY, f64::min)
    }

    pub fn d_max(&self) -> f64 {
        (0..self.dim()).map(|i| self.a[(i, i)].re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn from_json(src: &str) -> Result<Self> {
        let f: ProblemFile = serde_json::from_str(src)?;
        let n = f.matrix.len();
        if let Some((i, row)) = f.matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::invalid(format!("matrix row {i} has {} entries, expected {n}", row.len())));
        }
        let a = Mat::from_fn(n, n, |i, j| f.matrix[i][j].value());
        let b = f.b.iter().map(|e| e.value()).collect();
        let mut p = Self::new(f.label, a, b)?;
        p.reference_e_corr = f.reference_e_corr;
        p.reference_row = f.reference_row;
        Ok(p)
    }

    /// Serializes the (padded) instance.
    pub fn to_json(&self) -> Result<String> {
        let n = self.dim();
        let f = ProblemFile {
            label: self.label.clone(),
            matrix: (0..n).map(|i| (0..n).map(|j| Entry::from_value(self.a[(i, j)])).collect()).collect(),
            b: self.b.iter().map(|&z| Entry::from_value(z)).collect(),
            reference_e_corr: self.reference_e_corr,
            reference_row: self.reference_row.clone(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn with_b(mut self, b: Vec<C64>) -> Result<Self> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: b.len() });
        }
        self.b = b;
        Ok(self)
    }
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    ProblemInstance::from_json(&std::fs::read_to_string(path)?)
}

/// Bundled instances.
pub mod fixtures {
    use super::*;

    /// `[[1.5, 0.1], [0.1, 0.75]]`, `b = |1⟩`.
    pub fn small_2x2() -> ProblemInstance {
        ProblemInstance::from_json(SMALL_2X2).expect("bundled fixture parses")
    }

    /// The H₂ 4×4 matrix with `b = |11⟩`.
    pub fn h2_4x4() -> ProblemInstance {
        ProblemInstance::from_json(H2_4X4).expect("bundled fixture parses")
    }

    pub fn all() -> Vec<ProblemInstance> {
        vec![small_2x2(), h2_4x4()]
    }
}

/// `−b†A⁻¹b` by direct solve.
pub fn oracle_e_corr(problem: &ProblemInstance) -> Result<f64> {
    Ok(-(inner(&problem.b, &oracle_solution(problem)?)).re)
}

/// `A⁻¹b`.
pub fn oracle_solution(problem: &ProblemInstance) -> Result<Vec<C64>> {
    let ev = hermitian_eigenvalues(&problem.a);
    let lo = ev.iter().map(|l| l.abs()).fold(f64::INFINITY, f64::min);
    let hi = ev.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let cond = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    if cond >= 1e12 {
        return Err(Error::NearSingular(cond));
    }
    let rhs = nalgebra::DVector::from_column_slice(&problem.b);
    let x = problem.a.clone().lu().solve(&rhs).ok_or(Error::NearSingular(cond))?;
    Ok(x.iter().copied().collect())
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Percentage fraction difference `(e_o − e_m)/e_o · 100`.
pub fn pfd(e_oracle: f64, e_method: f64) -> Result<f64> {
    if e_oracle == 0.0 {
        return Err(Error::invalid("pfd undefined for a zero oracle energy"));
    }
    Ok((e_oracle - e_method) / e_oracle * 100.0)
}

fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| c(x / norm, 0.0)).collect()
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    g.qr().q()
}

/// Real symmetric, strictly diagonally dominant instance. Diagonal entries
/// are spaced by at least 0.2 (in shuffled order) and every off-diagonal
/// entry is at most `ratio·0.2` in magnitude.
pub fn random_spd_instance(n: usize, ratio: f64, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut diag: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * i as f64 + 0.05 * rng.random::<f64>()).collect();
    diag.shuffle(&mut rng);
    let bound = ratio * 0.2;
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = c(diag[i], 0.0);
        for j in i + 1..n {
            let v = bound * (2.0 * rng.random::<f64>() - 1.0);
            a[(i, j)] = c(v, 0.0);
            a[(j, i)] = c(v, 0.0);
        }
    }
    let b = random_unit_vector(&mut rng, n);
    ProblemInstance::new(format!("random-spd-{n}-{seed}"), a, b).expect("generated instance is valid")
}

/// Instance whose spectrum is `{k_i·unit}` with `k_0 = 1` and integer
/// `k_i ≤ k_max`, so exact scaling places every eigenvalue on the clock grid.
pub fn dyadic_instance(n: usize, k_max: u32, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = 0.5 + rng.random::<f64>();
    let ks: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else { rng.random_range(1..=k_max) as f64 }).collect();
    let q = random_orthogonal(&mut rng, n);
    let d = DMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_iterator(n, ks.iter().map(|k| k * unit)));
    let a = &q * d * q.transpose();
    let a = Mat::from_fn(n, n, |i, j| c(0.5 * (a[(i, j)] + a[(j, i)]), 0.0));
    let b = random_unit_vector(&mut rng, n);
    ProblemInstance::new(format!("dyadic-{n}-{seed}"), a, b).expect("generated instance is valid")
}

/// `−Σ_j |β_j|²/λ_j` from the eigendecomposition; a cross-check for the oracle.
pub fn spectral_e_corr(problem: &ProblemInstance) -> f64 {
    let (ev, v) = hermitian_eigen(&problem.a);
    -(0..ev.len())
        .map(|j| {
            let beta: C64 = (0..problem.dim()).map(|i| v[(i, j)].conj() * problem.b[i]).sum();
            beta.norm_sqr() / ev[j]
        })
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        let p = fixtures::small_2x2();
        assert_eq!((p.d_min(), p.d_max()), (0.75, 1.5));
        assert_eq!(p.n_b(), 1);
        let p = fixtures::h2_4x4();
        assert_eq!((p.d_min(), p.d_max()), (1.12854, 1.94607));
        assert_eq!(p.n_b(), 2);
    }

    #[test]
    fn padding_preserves_energy() {
        let a = Mat::from_row_slice(3, 3, &[c(2.0, 0.0), c(0.3, 0.0), c(0.0, 0.0), c(0.3, 0.0), c(1.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.1, 0.0), c(3.0, 0.0)]);
        let b = vec![c(0.2, 0.0), c(-0.5, 0.0), c(0.7, 0.0)];
        let p = ProblemInstance::new("3x3", a.clone(), b.clone()).unwrap();
        assert_eq!(p.dim(), 4);
        assert_eq!(p.a[(3, 3)], c(1.0, 0.0));
        assert!(!p.warnings.is_empty());
        let x = a.lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
        let direct = -inner(&b, x.as_slice()).re;
        assert!((oracle_e_corr(&p).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn scalar_is_padded_to_two() {
        let p = ProblemInstance::new("scalar", Mat::from_element(1, 1, c(2.0, 0.0)), vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(oracle_e_corr(&p).unwrap(), -0.5);
    }

    #[test]
    fn rejects_bad_input() {
        let a = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.4, 0.0), c(1.0, 0.0)]);
        assert!(matches!(ProblemInstance::new("x", a, vec![c(1.0, 0.0); 2]), Err(Error::NonHermitian(_))));
        assert!(matches!(
            ProblemInstance::new("x", Mat::identity(2, 2), vec![c(1.0, 0.0); 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        let singular = Mat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        let p = ProblemInstance::new("s", singular, vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(oracle_e_corr(&p), Err(Error::NearSingular(_))));
    }

    #[test]
    fn json_round_trip() {
        let src = r#"{"label":"c","matrix":[[2.0,[0.1,0.2]],[[0.1,-0.2],1.0]],"b":[[0.5,0.5],1.0],"reference_e_corr":-1.25}"#;
        let p = ProblemInstance::from_json(src).unwrap();
        assert_eq!(p.reference_e_corr, Some(-1.25));
        let q = ProblemInstance::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(p, q);
        assert!((oracle_e_corr(&p).unwrap() - oracle_e_corr(&q).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn oracle_matches_spectral_sum() {
        for seed in 0..5 {
            let p = random_spd_instance(8, 0.2, seed);
            let e = oracle_e_corr(&p).unwrap();
            assert!(e < 0.0);
            assert!((e - spectral_e_corr(&p)).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_and_scalar_oracles() {
        let p = ProblemInstance::new("id", Mat::identity(2, 2), vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(oracle_e_corr(&p).unwrap(), -1.0);
    }

    #[test]
    fn pfd_formula() {
        assert_eq!(pfd(-10.0, -10.0).unwrap(), 0.0);
        assert!((pfd(-11.546, -11.440).unwrap() - 0.918).abs() < 1e-3);
        assert!((pfd(-26.197, -27.375).unwrap() + 4.497).abs() < 1e-3);
        assert!(pfd(0.0, 1.0).is_err());
    }

    #[test]
    fn dyadic_spectrum() {
        let p = dyadic_instance(4, 6, 3);
        let ev = hermitian_eigenvalues(&p.a);
        for l in &ev {
            let k = l / ev[0];
            assert!((k - k.round()).abs() < 1e-10);
        }
    }
}
