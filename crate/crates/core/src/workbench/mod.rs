//! End-to-end runs: scale, fix, build, lower, optimize, simulate, report.
//!
//! Every stage error is wrapped with the stage name (`scale`, `fix`,
//! `build`, `decompose`, `optimize`, `run`, `oracle`).

mod studies;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{metrics, CircuitMetrics};
use crate::error::{Error, Result};
use crate::fixing::{classical_fix, lmr_plan, quantum_fix, FixingPlan, LmrConfig, LmrDecision};
use crate::hhl::{build_hhl_circuit, build_qpe_circuit, run_hhl, HhlCircuit, HhlConfig, HhlOutcome, Mode};
use crate::optimizer::{optimize_verified, OptimizeReport, PassPipeline};
use crate::problem::{oracle_e_corr, pfd, ProblemInstance};
use crate::scaling::{adapt_scaling, exact_scaling, perturbed_scaling, DTildePolicy, ScalingPlan, Strategy};
use crate::statevector::derive_seed;

pub use studies::{dmin_sweep, resource_scan, shot_convergence, DminPoint, ResourceRow, ShotStat};
pub use sweep::{run_sweep, SweepReport, SweepRow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Hhl,
    Hhlite,
    Perturbed,
    Perturbedlite,
    Adapt,
    Adaptlite,
}

impl Variant {
    pub const ALL: [Variant; 6] =
        [Variant::Hhl, Variant::Hhlite, Variant::Perturbed, Variant::Perturbedlite, Variant::Adapt, Variant::Adaptlite];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Hhl => "hhl",
            Variant::Hhlite => "hhlite",
            Variant::Perturbed => "perturbed",
            Variant::Perturbedlite => "perturbedlite",
            Variant::Adapt => "adapt",
            Variant::Adaptlite => "adaptlite",
        }
    }

    pub fn is_lite(&self) -> bool {
        matches!(self, Variant::Hhlite | Variant::Perturbedlite | Variant::Adaptlite)
    }

    pub fn strategy(&self) -> Strategy {
        match self {
            Variant::Hhl | Variant::Hhlite => Strategy::Exact,
            Variant::Perturbed | Variant::Perturbedlite => Strategy::Perturbed,
            Variant::Adapt | Variant::Adaptlite => Strategy::Adapt,
        }
    }

    /// The variant with the same scaling and no fixing.
    pub fn base(&self) -> Variant {
        match self {
            Variant::Hhlite => Variant::Hhl,
            Variant::Perturbedlite => Variant::Perturbed,
            Variant::Adaptlite => Variant::Adapt,
            v => *v,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown variant `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixingMethod {
    Classical,
    Quantum,
    Lmr,
}

impl FromStr for FixingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(FixingMethod::Classical),
            "quantum" => Ok(FixingMethod::Quantum),
            "lmr" => Ok(FixingMethod::Lmr),
            _ => Err(Error::invalid(format!("unknown fixing method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub variant: Variant,
    pub n_r: usize,
    /// Used by lite variants only.
    pub p_th: f64,
    pub mode: Mode,
    pub shots: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub optimize: bool,
    pub fixing: FixingMethod,
    /// Level shift for perturbed scaling.
    pub xi: f64,
    /// Explicit `d̃_min` for adapt scaling; `None` uses `d_min`.
    pub d_tilde_min: Option<f64>,
    /// Control qubits per LMR module.
    pub n_e: usize,
    /// Shots per clock qubit for the quantum planner.
    pub fix_shots: usize,
}

/// 6 clock qubits up to 4×4, 8 above.
pub fn default_n_r(dim: usize) -> usize {
    if dim <= 4 {
        6
    } else {
        8
    }
}

impl RunConfig {
    pub fn new(variant: Variant, n_r: usize) -> Self {
        Self {
            variant,
            n_r,
            p_th: 0.8,
            mode: Mode::Exact,
            shots: 1000,
            repetitions: 10,
            seed: 0,
            optimize: false,
            fixing: FixingMethod::Classical,
            xi: 1.0,
            d_tilde_min: None,
            n_e: 4,
            fix_shots: 10_000,
        }
    }

    pub fn for_problem(variant: Variant, problem: &ProblemInstance) -> Self {
        Self::new(variant, default_n_r(problem.dim()))
    }

    fn hhl_config(&self, plan: &ScalingPlan) -> HhlConfig {
        match self.mode {
            Mode::Exact => HhlConfig::exact(plan),
            Mode::Sampled => HhlConfig::sampled(plan, self.shots, self.repetitions, self.seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub label: String,
    pub variant: Variant,
    /// `2·n_b + n_r + 1`.
    pub n_t: usize,
    pub n_b: usize,
    pub n_r: usize,
    pub e_corr_oracle: f64,
    pub depth: usize,
    pub two_q: usize,
    pub e_corr: f64,
    pub e_diff: f64,
    pub pfd: f64,
    pub n_f: usize,
}

/// A finished run with everything that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub row: ReportRow,
    pub config: RunConfig,
    pub scaling: ScalingPlan,
    pub fixing: Option<FixingPlan>,
    pub lmr: Option<Vec<LmrDecision>>,
    /// Native-circuit metrics before optimization.
    pub native: CircuitMetrics,
    pub optimization: Option<OptimizeReport>,
    pub outcome: HhlOutcome,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Scaling plan for a variant.
pub fn plan_for(problem: &ProblemInstance, config: &RunConfig) -> Result<ScalingPlan> {
    match config.variant.strategy() {
        Strategy::Exact => exact_scaling(&problem.a, config.n_r),
        Strategy::Perturbed => perturbed_scaling(&problem.a, config.n_r, config.xi),
        Strategy::Adapt => {
            let policy = config.d_tilde_min.map_or(DTildePolicy::UseDMin, DTildePolicy::Explicit);
            adapt_scaling(&problem.a, config.n_r, policy)
        }
    }
}

/// Fixing plan for a lite variant from the unfixed QPE circuit.
pub fn plan_fixing(
    problem: &ProblemInstance,
    plan: &ScalingPlan,
    config: &RunConfig,
) -> Result<(FixingPlan, Option<Vec<LmrDecision>>)> {
    let clock: Vec<usize> = (0..config.n_r).collect();
    match config.fixing {
        FixingMethod::Classical => {
            let state = build_qpe_circuit(problem, plan, None)?.simulate();
            Ok((classical_fix(&state, &clock, config.p_th)?, None))
        }
        FixingMethod::Quantum => {
            let qpe = build_qpe_circuit(problem, plan, None)?;
            Ok((quantum_fix(&qpe, &clock, config.p_th, config.fix_shots, derive_seed(config.seed, 0xF1))?, None))
        }
        FixingMethod::Lmr => {
            let builder = || build_qpe_circuit(problem, plan, None);
            let (p, d) = lmr_plan(&builder, &clock, &LmrConfig::new(config.n_e, config.p_th))?;
            Ok((p, Some(d)))
        }
    }
}

/// Circuits for one configuration, ready to run.
pub struct Prepared {
    pub scaling: ScalingPlan,
    pub fixing: Option<FixingPlan>,
    pub lmr: Option<Vec<LmrDecision>>,
    pub hhl_config: HhlConfig,
    /// High-level circuit.
    pub circuit: HhlCircuit,
    pub native: CircuitMetrics,
    pub optimized: Option<(HhlCircuit, OptimizeReport)>,
}

impl Prepared {
    /// The circuit that gets simulated: the optimized one when present.
    pub fn runnable(&self) -> &HhlCircuit {
        self.optimized.as_ref().map_or(&self.circuit, |(c, _)| c)
    }

    pub fn final_metrics(&self) -> CircuitMetrics {
        match &self.optimized {
            Some((_, r)) => CircuitMetrics { depth: r.depth_out, two_qubit_count: r.two_q_out, ..self.native },
            None => self.native,
        }
    }
}

pub fn prepare(problem: &ProblemInstance, config: &RunConfig) -> Result<Prepared> {
    let scaling = plan_for(problem, config).map_err(|e| e.at_stage("scale"))?;
    let (fixing, lmr) = if config.variant.is_lite() {
        let (f, l) = plan_fixing(problem, &scaling, config).map_err(|e| e.at_stage("fix"))?;
        (Some(f), l)
    } else {
        (None, None)
    };
    let hhl_config = config.hhl_config(&scaling);
    let circuit = build_hhl_circuit(problem, &scaling, &hhl_config, fixing.as_ref()).map_err(|e| e.at_stage("build"))?;
    let lowered = circuit.to_native().map_err(|e| e.at_stage("decompose"))?;
    let native = metrics(&lowered.circuit).map_err(|e| e.at_stage("decompose"))?;
    let optimized = if config.optimize {
        let (c, report) = optimize_verified(&lowered.circuit, &PassPipeline::default()).map_err(|e| e.at_stage("optimize"))?;
        Some((lowered.replaced(c)?, report))
    } else {
        None
    };
    Ok(Prepared { scaling, fixing, lmr, hhl_config, circuit, native, optimized })
}

/// Runs one variant end to end.
pub fn run_variant(problem: &ProblemInstance, config: &RunConfig) -> Result<RunResult> {
    let prepared = prepare(problem, config)?;
    let mut outcome = run_hhl(prepared.runnable(), &prepared.hhl_config, problem, &prepared.scaling).map_err(|e| e.at_stage("run"))?;
    let m = prepared.final_metrics();
    outcome.metrics = Some(m);
    let e_oracle = oracle_e_corr(problem).map_err(|e| e.at_stage("oracle"))?;
    let n_b = problem.n_b();
    let row = ReportRow {
        label: problem.label.clone(),
        variant: config.variant,
        n_t: 2 * n_b + config.n_r + 1,
        n_b,
        n_r: config.n_r,
        e_corr_oracle: e_oracle,
        depth: m.depth,
        two_q: m.two_qubit_count,
        e_corr: outcome.e_corr,
        e_diff: outcome.e_corr - e_oracle,
        pfd: pfd(e_oracle, outcome.e_corr).map_err(|e| e.at_stage("oracle"))?,
        n_f: prepared.fixing.as_ref().map_or(0, FixingPlan::n_f),
    };
    let mut warnings = problem.warnings.clone();
    warnings.extend(prepared.scaling.warnings.iter().cloned());
    Ok(RunResult {
        row,
        config: config.clone(),
        scaling: prepared.scaling,
        fixing: prepared.fixing,
        lmr: prepared.lmr,
        native: prepared.native,
        optimization: prepared.optimized.map(|(_, r)| r),
        outcome,
        warnings,
    })
}

#[cfg(test)]
mod tests;
