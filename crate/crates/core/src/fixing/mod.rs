//! Clock-qubit fixing planners.
//!
//! Marginals in the recursive classical planner are conditioned on the
//! values already fixed. The quantum planner estimates each clock qubit's
//! single-bit distribution from its own measurement campaign.

mod lmr;
mod plan;

use rayon::prelude::*;

use crate::circuit::QuantumCircuit;
use crate::error::{Error, Result};
use crate::statevector::{derive_seed, Statevector};

pub use lmr::{lmr_fix, lmr_module_circuit, lmr_plan, lmr_readout, LmrConfig, LmrDecision};
pub use plan::{fixing_report, FixDecision, FixingPlan, FixingReport, Provenance};

fn check_threshold(p_th: f64) -> Result<()> {
    if !(p_th > 0.5 && p_th <= 1.0) {
        return Err(Error::invalid(format!("p_th must lie in (0.5, 1], got {p_th}")));
    }
    Ok(())
}

/// Dominant outcome and its probability for each free clock qubit,
/// conditioned on the bits already fixed in `plan`.
fn conditioned_dominants(state: &Statevector, clock: &[usize], plan: &FixingPlan) -> Result<Vec<(usize, u8, f64)>> {
    let cond: Vec<(usize, u8)> = (0..clock.len()).filter_map(|q| plan.bit(q).map(|b| (clock[q], b))).collect();
    (0..clock.len())
        .filter(|&q| plan.bit(q).is_none())
        .map(|q| {
            let p1 = state.marginal_distribution(&[clock[q]], &cond)?.get(1);
            Ok(if p1 > 0.5 { (q, 1, p1) } else { (q, 0, 1.0 - p1) })
        })
        .collect()
}

/// Recursive classical fixing: repeatedly fix the free qubit whose dominant
/// conditioned outcome is largest, while it reaches `p_th`. Ties go to the
/// lower clock index.
pub fn classical_fix(qpe_state: &Statevector, clock: &[usize], p_th: f64) -> Result<FixingPlan> {
    check_threshold(p_th)?;
    let mut plan = FixingPlan::free(clock.len(), p_th, Provenance::Classical);
    loop {
        let best = conditioned_dominants(qpe_state, clock, &plan)?
            .into_iter()
            .filter(|d| d.2 >= p_th)
            .fold(None::<(usize, u8, f64)>, |acc, d| match acc {
                Some(a) if a.2 >= d.2 => Some(a),
                _ => Some(d),
            });
        match best {
            Some((q, bit, p)) => plan.fix(q, bit, p),
            None => return Ok(plan),
        }
    }
}

/// Order in which the classical planner would fix every qubit if the
/// threshold were ignored. Used to force `n_f` in depth sweeps.
pub fn classical_fix_sequence(qpe_state: &Statevector, clock: &[usize]) -> Result<Vec<(usize, u8, f64)>> {
    let mut plan = FixingPlan::free(clock.len(), 1.0, Provenance::Forced);
    let mut seq = Vec::with_capacity(clock.len());
    while plan.n_f() < clock.len() {
        let d = conditioned_dominants(qpe_state, clock, &plan)?;
        let (q, bit, p) = d
            .into_iter()
            .fold(None::<(usize, u8, f64)>, |acc, d| match acc {
                Some(a) if a.2 >= d.2 => Some(a),
                _ => Some(d),
            })
            .expect("at least one free qubit");
        plan.fix(q, bit, p);
        seq.push((q, bit, p));
    }
    Ok(seq)
}

/// Plan fixing the first `n_f` entries of `sequence`, regardless of threshold.
pub fn forced_plan(n_r: usize, sequence: &[(usize, u8, f64)], n_f: usize) -> FixingPlan {
    let mut plan = FixingPlan::free(n_r, 0.5, Provenance::Forced);
    for &(q, bit, p) in sequence.iter().take(n_f) {
        plan.fix(q, bit, p);
    }
    plan
}

/// Every clock qubit fixed to the given bits.
pub fn all_fixed_plan(bits: &[u8]) -> FixingPlan {
    let mut plan = FixingPlan::free(bits.len(), 0.5, Provenance::Forced);
    for (q, &b) in bits.iter().enumerate() {
        plan.fix(q, b, 1.0);
    }
    plan
}

/// Single-qubit measurement campaigns on the simulated QPE output; every
/// qubit whose dominant frequency reaches `p_th` is fixed at once.
pub fn quantum_fix(qpe_circuit: &QuantumCircuit, clock: &[usize], p_th: f64, shots: usize, seed: u64) -> Result<FixingPlan> {
    check_threshold(p_th)?;
    if shots == 0 {
        return Err(Error::invalid("shots must be at least 1"));
    }
    let state = qpe_circuit.simulate();
    let freqs: Vec<f64> = clock
        .par_iter()
        .enumerate()
        .map(|(q, &qubit)| {
            let counts = state.sample_counts(&[qubit], shots, derive_seed(seed, q as u64))?;
            Ok(counts.get(&1).copied().unwrap_or(0) as f64 / shots as f64)
        })
        .collect::<Result<_>>()?;
    let mut plan = FixingPlan::free(clock.len(), p_th, Provenance::Quantum);
    for (q, f1) in freqs.into_iter().enumerate() {
        if f1 >= p_th {
            plan.fix(q, 1, f1);
        } else if 1.0 - f1 >= p_th {
            plan.fix(q, 0, 1.0 - f1);
        }
    }
    Ok(plan)
}
