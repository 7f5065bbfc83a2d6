//! Scaling plans that map `A` into the clock register's range.
//!
//! * adapt: `s = 2^{-n_r}/d̃_min`, `c = 2^{-n_r}`, no eigenvalues needed.
//! * perturbed: extreme eigenvalues from first-order perturbation on the
//!   (level-shifted) extreme diagonal entries.
//! * exact: full diagonalization.
//!
//! The perturbed and exact plans both put the smallest eigenvalue estimate
//! on the grid at `δ = ⌊λ_min(2^{n_r}−1)/λ_max⌋/2^{n_r}`, with `s = δ/λ_min`
//! and `c = δ`, so the largest estimate lands at or below `(2^{n_r}−1)/2^{n_r}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, hermiticity_residual, Mat, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Adapt,
    Perturbed,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DTildePolicy {
    UseDMin,
    Explicit(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPlan {
    pub strategy: Strategy,
    pub n_r: usize,
    pub s: f64,
    pub c: f64,
    pub d_tilde_min: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub lambda_est_min: Option<f64>,
    pub lambda_est_max: Option<f64>,
    pub kappa: Option<f64>,
    pub warnings: Vec<String>,
}

impl ScalingPlan {
    /// `sA`.
    pub fn scaled(&self, a: &Mat) -> Mat {
        a * C64::new(self.s, 0.0)
    }
}

fn check_hermitian(a: &Mat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let r = hermiticity_residual(a);
    if r > 1e-10 {
        return Err(Error::NonHermitian(r));
    }
    Ok(())
}

fn diagonal(a: &Mat) -> Vec<f64> {
    (0..a.nrows()).map(|i| a[(i, i)].re).collect()
}

/// `(d_min, index)` and `(d_max, index)`, ties to the lowest index.
fn extremes(d: &[f64]) -> ((f64, usize), (f64, usize)) {
    let mut lo = (d[0], 0);
    let mut hi = (d[0], 0);
    for (i, &v) in d.iter().enumerate().skip(1) {
        if v < lo.0 {
            lo = (v, i);
        }
        if v > hi.0 {
            hi = (v, i);
        }
    }
    (lo, hi)
}

/// Smallest `n_r` with `2^{-n_r}·d_max/d̃ < 1`.
fn required_clock(d_max: f64, d_tilde: f64) -> usize {
    let ratio = d_max / d_tilde;
    if ratio < 1.0 {
        0
    } else {
        ratio.log2().floor() as usize + 1
    }
}

pub fn adapt_scaling(a: &Mat, n_r: usize, policy: DTildePolicy) -> Result<ScalingPlan> {
    check_hermitian(a)?;
    let d = diagonal(a);
    if d.iter().any(|&v| v <= 0.0) {
        return Err(Error::invalid("adapt scaling needs a positive diagonal"));
    }
    let ((d_min, _), (d_max, _)) = extremes(&d);
    let d_tilde = match policy {
        DTildePolicy::UseDMin => d_min,
        DTildePolicy::Explicit(v) if v > 0.0 => v,
        DTildePolicy::Explicit(v) => return Err(Error::invalid(format!("d_tilde_min must be positive, got {v}"))),
    };
    let grid = (-(n_r as f64)).exp2();
    if grid * d_max / d_tilde >= 1.0 {
        return Err(Error::ClockTooSmall { n_r, required: required_clock(d_max, d_tilde) });
    }
    let mut warnings = Vec::new();
    if d_min <= grid * d_max {
        warnings.push(format!(
            "empty d_tilde_min window: d_min = {d_min} <= 2^-{n_r}·d_max = {}",
            grid * d_max
        ));
    } else if d_tilde > d_min {
        warnings.push(format!("d_tilde_min = {d_tilde} lies above d_min = {d_min}"));
    }
    Ok(ScalingPlan {
        strategy: Strategy::Adapt,
        n_r,
        s: grid / d_tilde,
        c: grid,
        d_tilde_min: d_tilde,
        d_min,
        d_max,
        lambda_est_min: None,
        lambda_est_max: None,
        kappa: None,
        warnings,
    })
}

/// First-order estimate at diagonal index `i` with repetitions of `d[i]`
/// after the first shifted down by `m·xi`.
fn perturbed_at(a: &Mat, d: &[f64], i: usize, xi: f64) -> Result<f64> {
    let mut b = d.to_vec();
    let mut m = 0.0;
    for (j, v) in d.iter().enumerate() {
        if *v == d[i] {
            b[j] = v - m * xi;
            m += 1.0;
        }
    }
    let mut est = d[i];
    for j in 0..d.len() {
        if j == i {
            continue;
        }
        let num = a[(i, j)].norm_sqr();
        let den = b[i] - b[j];
        if den == 0.0 {
            if num == 0.0 {
                continue;
            }
            return Err(Error::DegeneratePerturbation { i, j });
        }
        est += num / den;
    }
    Ok(est)
}

/// `(λ̃_min, λ̃_max)` in `O(N)` per estimate.
pub fn perturbed_eigen_estimates(a: &Mat, xi: f64) -> Result<(f64, f64)> {
    check_hermitian(a)?;
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::invalid(format!("xi must lie in (0, 1], got {xi}")));
    }
    let d = diagonal(a);
    let ((_, i_min), (_, i_max)) = extremes(&d);
    Ok((perturbed_at(a, &d, i_min, xi)?, perturbed_at(a, &d, i_max, xi)?))
}

/// Grid value `δ` that the smallest eigenvalue is mapped onto.
fn grid_delta(n_r: usize, lambda_min: f64, lambda_max: f64) -> f64 {
    let n = (1u64 << n_r) as f64;
    let mut k = lambda_min * (n - 1.0) / lambda_max;
    if (k - k.round()).abs() < 1e-7 {
        k = k.round();
    }
    k.floor().max(1.0) / n
}

fn spectral_plan(strategy: Strategy, a: &Mat, n_r: usize, lo: f64, hi: f64) -> ScalingPlan {
    let d = diagonal(a);
    let ((d_min, _), (d_max, _)) = extremes(&d);
    let delta = grid_delta(n_r, lo, hi);
    let s = delta / lo;
    let mut warnings = Vec::new();
    if s * hi >= 1.0 {
        warnings.push(format!("kappa = {} exceeds 2^{n_r} - 1; the top of the spectrum wraps", hi / lo));
    }
    ScalingPlan {
        strategy,
        n_r,
        s,
        c: delta,
        d_tilde_min: lo,
        d_min,
        d_max,
        lambda_est_min: Some(lo),
        lambda_est_max: Some(hi),
        kappa: Some(hi / lo),
        warnings,
    }
}

pub fn perturbed_scaling(a: &Mat, n_r: usize, xi: f64) -> Result<ScalingPlan> {
    let (lo, hi) = perturbed_eigen_estimates(a, xi)?;
    if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid(format!("perturbed estimates must be positive, got ({lo}, {hi})")));
    }
    Ok(spectral_plan(Strategy::Perturbed, a, n_r, lo, hi.max(lo)))
}

pub fn exact_scaling(a: &Mat, n_r: usize) -> Result<ScalingPlan> {
    check_hermitian(a)?;
    let ev = hermitian_eigenvalues(a);
    let lo = ev[0];
    if lo <= 0.0 {
        return Err(Error::NotPositiveDefinite(lo));
    }
    Ok(spectral_plan(Strategy::Exact, a, n_r, lo, *ev.last().expect("non-empty")))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub scaled_eigenvalues: Vec<f64>,
    pub in_range: bool,
    pub max_rounding_error: f64,
    /// Relative `‖x‖` change (percent) when each scaled eigenvalue is
    /// replaced by its nearest grid point, for the reference vector.
    pub predicted_loss_pct: Option<f64>,
}

/// Desk-scale diagnostic: diagonalizes `sA`.
pub fn validate_scaling(a: &Mat, plan: &ScalingPlan, reference_b: Option<&[C64]>) -> Result<ScalingReport> {
    check_hermitian(a)?;
    let (ev, v) = hermitian_eigen(&plan.scaled(a));
    let n = (1u64 << plan.n_r) as f64;
    let in_range = ev.iter().all(|&l| l > 0.0 && l < 1.0);
    let max_rounding_error = ev.iter().map(|&l| (l * n - (l * n).round()).abs() / n).fold(0.0, f64::max);
    let predicted_loss_pct = match reference_b {
        None => None,
        Some(b) => {
            if b.len() != ev.len() {
                return Err(Error::DimensionMismatch { expected: ev.len(), found: b.len() });
            }
            let (mut exact, mut rounded) = (0.0, 0.0);
            for (j, &l) in ev.iter().enumerate() {
                let beta: C64 = (0..b.len()).map(|i| v[(i, j)].conj() * b[i]).sum();
                let r = (l * n).round() / n;
                exact += beta.norm_sqr() / (l * l);
                rounded += if r > 0.0 { beta.norm_sqr() / (r * r) } else { f64::INFINITY };
            }
            Some((rounded.sqrt() - exact.sqrt()).abs() / exact.sqrt() * 100.0)
        }
    };
    Ok(ScalingReport { scaled_eigenvalues: ev, in_range, max_rounding_error, predicted_loss_pct })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn real(rows: &[&[f64]]) -> Mat {
        Mat::from_fn(rows.len(), rows.len(), |i, j| c(rows[i][j], 0.0))
    }

    fn paper_2x2() -> Mat {
        real(&[&[1.5, 0.1], &[0.1, 0.75]])
    }

    #[test]
    fn adapt_on_small_matrix() {
        let p = adapt_scaling(&paper_2x2(), 3, DTildePolicy::UseDMin).unwrap();
        assert!((p.s - 0.125 / 0.75).abs() < 1e-15);
        assert_eq!(p.c, 0.125);
        let sa = p.scaled(&paper_2x2());
        assert!((sa[(0, 0)].re - 0.25).abs() < 1e-15);
        assert!((sa[(0, 1)].re - 0.016667).abs() < 1e-6);
        assert!((sa[(1, 1)].re - 0.125).abs() < 1e-15);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn adapt_identity() {
        let a = Mat::identity(4, 4);
        let p = adapt_scaling(&a, 5, DTildePolicy::UseDMin).unwrap();
        assert_eq!(p.s, 1.0 / 32.0);
        let ev = hermitian_eigenvalues(&p.scaled(&a));
        assert!(ev.iter().all(|&l| l == 1.0 / 32.0));
    }

    #[test]
    fn adapt_reports_required_clock() {
        let a = real(&[&[9.0, 0.0], &[0.0, 1.0]]);
        match adapt_scaling(&a, 3, DTildePolicy::UseDMin) {
            Err(Error::ClockTooSmall { n_r: 3, required: 4 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(adapt_scaling(&a, 4, DTildePolicy::UseDMin).is_ok());
    }

    #[test]
    fn adapt_window_warning() {
        let a = real(&[&[1.0, 0.0], &[0.0, 0.2]]);
        let p = adapt_scaling(&a, 2, DTildePolicy::Explicit(0.3)).unwrap();
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn perturbed_small_matrix() {
        let (lo, hi) = perturbed_eigen_estimates(&paper_2x2(), 1.0).unwrap();
        assert!((lo - (0.75 + 0.01 / (0.75 - 1.5))).abs() < 1e-15);
        assert!((hi - (1.5 + 0.01 / 0.75)).abs() < 1e-15);
        let ev = hermitian_eigenvalues(&paper_2x2());
        assert!((lo - ev[0]).abs() < 1e-3 && (hi - ev[1]).abs() < 1e-3);
    }

    #[test]
    fn perturbed_diagonal_is_exact() {
        let a = real(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        assert_eq!(perturbed_eigen_estimates(&a, 1.0).unwrap(), (1.0, 3.0));
    }

    #[test]
    fn perturbed_degenerate_shift() {
        // B = diag(2, 1): both extremes resolve to index 0, estimate 2 + 0.01/1.
        let a = real(&[&[2.0, 0.1], &[0.1, 2.0]]);
        let (lo, hi) = perturbed_eigen_estimates(&a, 1.0).unwrap();
        assert!((lo - 2.01).abs() < 1e-14 && (hi - 2.01).abs() < 1e-14);
        assert!((lo - 2.1).abs() / 2.1 < 0.05);
    }

    #[test]
    fn repeated_minimum_shifts_the_later_copy() {
        // B_min = diag(1, 0, 3): the repeat at index 1 sits one xi below.
        let a = real(&[&[1.0, 0.1, 0.2], &[0.1, 1.0, 0.0], &[0.2, 0.0, 3.0]]);
        let (lo, hi) = perturbed_eigen_estimates(&a, 1.0).unwrap();
        assert!((lo - (1.0 + 0.01 / 1.0 + 0.04 / -2.0)).abs() < 1e-15);
        assert!((hi - (3.0 + 0.04 / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn exact_scaling_kappa() {
        let a = real(&[&[1.0, 0.0], &[0.0, 4.0]]);
        let p = exact_scaling(&a, 4).unwrap();
        assert!((p.kappa.unwrap() - 4.0).abs() < 1e-12);
        let p = exact_scaling(&paper_2x2(), 3).unwrap();
        let ev = hermitian_eigenvalues(&paper_2x2());
        assert!((p.kappa.unwrap() - ev[1] / ev[0]).abs() < 1e-12);
        assert!((p.kappa.unwrap() - 2.0542).abs() < 1e-3);
        let rep = validate_scaling(&paper_2x2(), &p, None).unwrap();
        assert!(rep.in_range);
        assert!((rep.scaled_eigenvalues[0] - p.c).abs() < 1e-12);
    }

    #[test]
    fn identity_perturbed_equals_exact() {
        let a = Mat::identity(2, 2);
        let e = exact_scaling(&a, 3).unwrap();
        let p = perturbed_scaling(&a, 3, 1.0).unwrap();
        assert_eq!((e.s, e.c), (p.s, p.c));
    }

    #[test]
    fn validate_predicts_small_matrix_loss() {
        let p = adapt_scaling(&paper_2x2(), 3, DTildePolicy::UseDMin).unwrap();
        let b = [c(0.0, 0.0), c(1.0, 0.0)];
        let rep = validate_scaling(&paper_2x2(), &p, Some(&b)).unwrap();
        assert!(rep.in_range);
        assert!((rep.predicted_loss_pct.unwrap() - 1.7).abs() < 0.1);
    }

    #[test]
    fn validate_flags_out_of_range() {
        let a = real(&[&[1.0, 0.9], &[0.9, 1.0]]);
        let mut p = adapt_scaling(&a, 1, DTildePolicy::Explicit(0.8)).unwrap();
        assert!(!validate_scaling(&a, &p, None).unwrap().in_range);
        p.s = 0.1;
        assert!(validate_scaling(&a, &p, None).unwrap().in_range);
    }
}
