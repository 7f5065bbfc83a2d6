use serde::Serialize;

use crate::circuit::CircuitMetrics;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Classical,
    Quantum,
    Lmr,
    Forced,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum FixDecision {
    Free,
    Fixed { bit: u8, probability: f64 },
}

impl FixDecision {
    pub fn bit(&self) -> Option<u8> {
        match self {
            FixDecision::Free => None,
            FixDecision::Fixed { bit, .. } => Some(*bit),
        }
    }
}

/// Per-clock-qubit decisions; entry `q` refers to clock qubit `q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixingPlan {
    pub n_r: usize,
    pub p_th: f64,
    pub provenance: Provenance,
    pub decisions: Vec<FixDecision>,
    /// Clock qubits in the order they were fixed.
    pub order: Vec<usize>,
}

impl FixingPlan {
    pub fn free(n_r: usize, p_th: f64, provenance: Provenance) -> Self {
        Self { n_r, p_th, provenance, decisions: vec![FixDecision::Free; n_r], order: Vec::new() }
    }

    pub fn n_f(&self) -> usize {
        self.decisions.iter().filter(|d| d.bit().is_some()).count()
    }

    pub fn bit(&self, q: usize) -> Option<u8> {
        self.decisions.get(q).and_then(FixDecision::bit)
    }

    pub fn fix(&mut self, q: usize, bit: u8, probability: f64) {
        self.decisions[q] = FixDecision::Fixed { bit, probability };
        self.order.push(q);
    }

    /// Same bits, ignoring probabilities and provenance.
    pub fn same_decisions(&self, other: &FixingPlan) -> bool {
        self.n_r == other.n_r && self.decisions.iter().zip(&other.decisions).all(|(a, b)| a.bit() == b.bit())
    }

    pub fn check(&self, n_r: usize) -> Result<()> {
        if self.n_r != n_r || self.decisions.len() != n_r {
            return Err(Error::invalid(format!("fixing plan covers {} clock qubits, circuit has {n_r}", self.decisions.len())));
        }
        if self.decisions.iter().any(|d| matches!(d, FixDecision::Fixed { bit, .. } if *bit > 1)) {
            return Err(Error::invalid("fixed bits must be 0 or 1"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&SerializedPlan { n_f: self.n_f(), plan: self })?)
    }
}

#[derive(Serialize)]
struct SerializedPlan<'a> {
    n_f: usize,
    #[serde(flatten)]
    plan: &'a FixingPlan,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixingReport {
    pub n_f: usize,
    pub depth_unfixed: usize,
    pub depth_fixed: usize,
    pub compression_pct: f64,
    pub two_q_unfixed: usize,
    pub two_q_fixed: usize,
    pub two_q_reduction: isize,
}

pub fn fixing_report(plan: &FixingPlan, unfixed: &CircuitMetrics, fixed: &CircuitMetrics) -> FixingReport {
    let compression_pct = if unfixed.depth == 0 {
        0.0
    } else {
        (unfixed.depth as f64 - fixed.depth as f64).abs() / unfixed.depth as f64 * 100.0
    };
    FixingReport {
        n_f: plan.n_f(),
        depth_unfixed: unfixed.depth,
        depth_fixed: fixed.depth,
        compression_pct,
        two_q_unfixed: unfixed.two_qubit_count,
        two_q_fixed: fixed.two_qubit_count,
        two_q_reduction: unfixed.two_qubit_count as isize - fixed.two_qubit_count as isize,
    }
}
