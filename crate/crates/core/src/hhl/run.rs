use serde::Serialize;

use super::hom::finish;
use super::{overlap_from_distribution, HhlCircuit, HhlConfig, Mode};
use crate::circuit::CircuitMetrics;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::scaling::ScalingPlan;
use crate::statevector::{derive_seed, Distribution, Statevector, BRANCH_EPS};

#[derive(Clone, Debug, Serialize)]
pub struct HhlOutcome {
    /// P(1) on the ancilla.
    pub success_probability: f64,
    /// State register conditioned on ancilla = 1 and clock = 0 (exact mode).
    #[serde(skip)]
    pub solution_state: Option<Statevector>,
    pub overlap: f64,
    /// `‖A⁻¹b̂‖` recovered from P(1).
    pub norm_x: f64,
    pub e_corr: f64,
    /// Spread of per-repetition energies (sampled mode).
    pub e_corr_std: Option<f64>,
    /// At least one sampled overlap estimate was negative and clamped.
    pub clamped: bool,
    pub metrics: Option<CircuitMetrics>,
}

/// `−‖x‖·‖b‖²·|⟨b|x⟩|`.
pub fn correlation_energy(overlap: f64, norm_x: f64, norm_b: f64) -> Result<f64> {
    if !(0.0..=1.0 + 1e-12).contains(&overlap) {
        return Err(Error::invalid(format!("overlap must lie in [0, 1], got {overlap}")));
    }
    if norm_x < 0.0 || norm_b <= 0.0 {
        return Err(Error::invalid("norms must be positive"));
    }
    Ok(-norm_x * norm_b * norm_b * overlap)
}

/// `√P(1)/d̃_min`.
pub fn solution_norm(p1: f64, d_tilde_min: f64) -> Result<f64> {
    if !(p1 > 0.0 && p1 <= 1.0 + 1e-12) {
        return Err(Error::invalid(format!("P(1) must lie in (0, 1], got {p1}")));
    }
    if d_tilde_min <= 0.0 {
        return Err(Error::invalid("d_tilde_min must be positive"));
    }
    Ok(p1.sqrt() / d_tilde_min)
}

fn norm_from_p1(p1: f64, plan: &ScalingPlan, config: &HhlConfig) -> f64 {
    p1.sqrt() * plan.s / config.c
}

fn conditioned_solution(state: &Statevector, hhl: &HhlCircuit, problem: &ProblemInstance) -> Option<Statevector> {
    let l = &hhl.layout;
    // the HOM register is in a product state |b⟩; pin it at its largest component
    let j = (0..problem.b.len()).max_by(|&a, &b| problem.b[a].norm().total_cmp(&problem.b[b].norm()))?;
    let mut fixed = vec![(l.ancilla, 1u8)];
    fixed.extend(l.clock.iter().map(|&q| (q, 0u8)));
    fixed.extend(l.hom.iter().enumerate().map(|(k, &q)| (q, (j >> k & 1) as u8)));
    let amps = state.slice(&l.state, &fixed).ok()?;
    Statevector::normalized(amps).ok()
}

/// Runs a circuit from [`super::build_hhl_circuit`] and extracts `E_corr`.
pub fn run_hhl(hhl: &HhlCircuit, config: &HhlConfig, problem: &ProblemInstance, plan: &ScalingPlan) -> Result<HhlOutcome> {
    let l = &hhl.layout;
    let n_b = l.state.len();
    let norm_b = problem.norm_b();
    let mut state = Statevector::zero(hhl.circuit.num_qubits());
    let split = hhl.hom_start.unwrap_or(hhl.circuit.len());
    hhl.circuit.apply_range(&mut state, 0..split)?;
    let mut measured = l.state.clone();
    measured.extend(&l.hom);
    match config.mode {
        Mode::Exact => {
            let p1 = state.marginal_distribution(&[l.ancilla], &[])?.get(1);
            if p1 < BRANCH_EPS {
                return Err(Error::PostselectionFailed(p1));
            }
            // the HOM gates never touch the ancilla, so P(1) is the same before and after them
            let solution_state = hhl.hom_start.and_then(|_| conditioned_solution(&state, hhl, problem));
            hhl.circuit.apply_range(&mut state, split..hhl.circuit.len())?;
            let dist = state.marginal_distribution(&measured, &[(l.ancilla, 1)])?;
            let hom = finish(overlap_from_distribution(&dist, n_b), Mode::Exact, None)?;
            let norm_x = norm_from_p1(p1, plan, config);
            Ok(HhlOutcome {
                success_probability: p1,
                solution_state,
                overlap: hom.overlap,
                norm_x,
                e_corr: correlation_energy(hom.overlap, norm_x, norm_b)?,
                e_corr_std: None,
                clamped: false,
                metrics: None,
            })
        }
        Mode::Sampled => {
            if config.shots == 0 || config.repetitions == 0 {
                return Err(Error::invalid("sampled mode needs shots >= 1 and repetitions >= 1"));
            }
            hhl.circuit.apply_range(&mut state, split..hhl.circuit.len())?;
            let mut qubits = vec![l.ancilla];
            qubits.extend(&measured);
            let full = state.marginal_distribution(&qubits, &[])?;
            let mut p1s = Vec::with_capacity(config.repetitions);
            let mut overlaps = Vec::with_capacity(config.repetitions);
            let mut energies = Vec::with_capacity(config.repetitions);
            let mut clamped = false;
            for r in 0..config.repetitions {
                let counts = crate::statevector::sample_distribution(&full, config.shots, derive_seed(config.seed, r as u64));
                let hits: std::collections::BTreeMap<u64, u64> =
                    counts.iter().filter(|(k, _)| *k & 1 == 1).map(|(k, n)| (k >> 1, *n)).collect();
                let n1: u64 = hits.values().sum();
                if n1 == 0 {
                    return Err(Error::PostselectionFailed(0.0));
                }
                let p1 = n1 as f64 / config.shots as f64;
                let hom = finish(overlap_from_distribution(&Distribution::from_counts(2 * n_b, &hits), n_b), Mode::Sampled, Some(n1 as usize))?;
                clamped |= hom.clamped;
                let norm_x = norm_from_p1(p1, plan, config);
                energies.push(correlation_energy(hom.overlap, norm_x, norm_b)?);
                p1s.push(p1);
                overlaps.push(hom.overlap);
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            let e = mean(&energies);
            let std = if energies.len() > 1 {
                (energies.iter().map(|x| (x - e).powi(2)).sum::<f64>() / (energies.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            let p1 = mean(&p1s);
            Ok(HhlOutcome {
                success_probability: p1,
                solution_state: None,
                overlap: mean(&overlaps),
                norm_x: norm_from_p1(p1, plan, config),
                e_corr: e,
                e_corr_std: Some(std),
                clamped,
                metrics: None,
            })
        }
    }
}
