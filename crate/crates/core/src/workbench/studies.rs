use rayon::prelude::*;
use serde::Serialize;

use super::{prepare, run_variant, RunConfig, Variant};
use crate::circuit::{decompose_to_native, metrics};
use crate::error::{Error, Result};
use crate::fixing::lmr_module_circuit;
use crate::hhl::{build_hhl_circuit, build_qpe_circuit, run_hhl, HhlConfig, Mode};
use crate::problem::{random_spd_instance, ProblemInstance};
use crate::scaling::exact_scaling;
use crate::statevector::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShotStat {
    pub shots: usize,
    pub repetitions: usize,
    pub mean: f64,
    pub std: f64,
    /// Some repetition clamped a negative overlap estimate.
    pub clamped: bool,
}

/// Mean and spread of sampled `E_corr` for each shot count.
pub fn shot_convergence(problem: &ProblemInstance, config: &RunConfig, shot_grid: &[usize], repetitions: usize) -> Result<Vec<ShotStat>> {
    if config.mode != Mode::Sampled {
        return Err(Error::invalid("shot convergence needs sampled mode"));
    }
    let prepared = prepare(problem, config)?;
    shot_grid
        .par_iter()
        .map(|&shots| {
            let hc = HhlConfig { shots, repetitions, seed: derive_seed(config.seed, shots as u64), ..prepared.hhl_config.clone() };
            let out = run_hhl(prepared.runnable(), &hc, problem, &prepared.scaling).map_err(|e| e.at_stage("run"))?;
            Ok(ShotStat { shots, repetitions, mean: out.e_corr, std: out.e_corr_std.unwrap_or(0.0), clamped: out.clamped })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DminPoint {
    pub d_tilde_min: f64,
    /// `2^{-n_r}·d_max`; points at or below it cannot be scaled.
    pub window_lower: f64,
    /// `d_min`.
    pub window_upper: f64,
    pub valid: bool,
    pub in_window: bool,
    pub pfd: Option<f64>,
    pub p1: Option<f64>,
    /// `√P(1)/d̃_min`.
    pub norm_x: Option<f64>,
    pub error: Option<String>,
}

/// One exact-mode adapt run per grid value of `d̃_min`.
pub fn dmin_sweep(problem: &ProblemInstance, n_r: usize, grid: &[f64]) -> Result<Vec<DminPoint>> {
    let lower = (-(n_r as f64)).exp2() * problem.d_max();
    let upper = problem.d_min();
    Ok(grid
        .par_iter()
        .map(|&d| {
            let valid = d.is_finite() && d > lower;
            let mut point = DminPoint {
                d_tilde_min: d,
                window_lower: lower,
                window_upper: upper,
                valid,
                in_window: valid && d <= upper,
                pfd: None,
                p1: None,
                norm_x: None,
                error: None,
            };
            if valid {
                let config = RunConfig { d_tilde_min: Some(d), ..RunConfig::new(Variant::Adapt, n_r) };
                match run_variant(problem, &config) {
                    Ok(r) => {
                        point.pfd = Some(r.row.pfd);
                        point.p1 = Some(r.outcome.success_probability);
                        point.norm_x = Some(r.outcome.success_probability.sqrt() / d);
                    }
                    Err(e) => point.error = Some(e.to_string()),
                }
            }
            point
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResourceRow {
    pub n_b: usize,
    pub qpe_2q: usize,
    /// Solver part of the HHL circuit (no HOM module).
    pub hhl_2q: usize,
    /// `n_r` LMR modules with `n_e` controls each.
    pub eqpe_2q: usize,
    pub ratio: f64,
}

/// Native two-qubit counts of QPE, HHL and QPE plus LMR fixing modules on a
/// random diagonally dominant instance per `n_b`.
pub fn resource_scan(n_b_grid: &[usize], n_r: usize, n_e: usize, seed: u64) -> Result<Vec<ResourceRow>> {
    let module = metrics(&decompose_to_native(&lmr_module_circuit(n_e)?)?)?.two_qubit_count;
    n_b_grid
        .par_iter()
        .map(|&n_b| {
            if n_b == 0 || n_b > 5 {
                return Err(Error::invalid(format!("n_b must lie in 1..=5, got {n_b}")));
            }
            let problem = random_spd_instance(1 << n_b, 0.5, derive_seed(seed, n_b as u64));
            let plan = exact_scaling(&problem.a, n_r)?;
            let qpe_2q = metrics(&decompose_to_native(&build_qpe_circuit(&problem, &plan, None)?)?)?.two_qubit_count;
            let hhl = build_hhl_circuit(&problem, &plan, &HhlConfig::exact(&plan), None)?;
            let solver = hhl.solver_part().expect("freshly built circuit keeps its HOM boundary");
            let hhl_2q = metrics(&decompose_to_native(&solver)?)?.two_qubit_count;
            let eqpe_2q = n_r * module;
            Ok(ResourceRow { n_b, qpe_2q, hhl_2q, eqpe_2q, ratio: (qpe_2q + eqpe_2q) as f64 / hhl_2q as f64 })
        })
        .collect()
}
