//! Fixing via phase estimation of a clock qubit's density matrix.
//!
//! The chosen clock qubit is copied onto a fresh ancilla with a CNOT, which
//! leaves its reduced state diagonal, `ρ = diag(p₁, 1 − p₁)`. Controlled
//! `e^{i·SWAP·Δt}` steps between copies of `ρ` and a probe `|ζ⟩ = |0⟩`
//! imprint the phase `e^{i p₁ t}` on each control qubit; an inverse Fourier
//! readout over `n_e` controls gives `p₁` on the `2^{-n_e}` grid.
//!
//! Each step consumes a fresh copy of `ρ`, so after tracing it out the step
//! is a channel on (control, ζ) with Kraus operators
//! `√p_m·(P₀ δ_nm + P₁ ⊗ (cos Δt δ_nm + i sin Δt |m⟩⟨n|))`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{FixDecision, FixingPlan, Provenance};
use crate::circuit::{Gate, QuantumCircuit};
use crate::error::{Error, Result};
use crate::linalg::{c, Mat, C64, ZERO};
use crate::statevector::Control;
use crate::unitary::{swap, UnitaryBlock};

const T_TOTAL: f64 = 2.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LmrConfig {
    pub n_e: usize,
    /// Trotter step; `None` picks `t/ceil(t²/ε)` with `ε = 2^{-(n_e+1)}`.
    pub delta_t: Option<f64>,
    pub p_th: f64,
}

impl LmrConfig {
    pub fn new(n_e: usize, p_th: f64) -> Self {
        Self { n_e, delta_t: None, p_th }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LmrDecision {
    pub clock_qubit: usize,
    /// Estimated probability of reading 0 on the clock qubit.
    pub p_estimate: f64,
    /// Exact value from the reduced density matrix, for diagnostics.
    pub p_exact: f64,
    pub readout: usize,
    pub n_e: usize,
    pub steps_per_unit: usize,
    pub delta_t: f64,
    pub decision: FixDecision,
}

/// Trotter steps for one application of `e^{iρt}`.
fn trotter_steps(n_e: usize, t: f64, delta_t: Option<f64>) -> Result<(usize, f64)> {
    let eps = 0.5f64.powi(n_e as i32 + 1);
    match delta_t {
        None => {
            let r = (t * t / eps).ceil() as usize;
            Ok((r, t / r as f64))
        }
        Some(dt) if dt <= 0.0 => Err(Error::invalid("delta_t must be positive")),
        Some(dt) => {
            if t * dt > eps {
                return Err(Error::TrotterBudget { error: t * dt, limit: eps });
            }
            let r = (t / dt).ceil() as usize;
            Ok((r, t / r as f64))
        }
    }
}

/// Superoperator of one controlled step on (control, ζ), row-major vec
/// convention; local index is `control + 2·ζ`.
fn step_superoperator(p0: f64, dt: f64) -> Mat {
    let (cs, sn) = (dt.cos(), dt.sin());
    let probs = [p0, 1.0 - p0];
    let mut s = Mat::zeros(16, 16);
    for m in 0..2 {
        for n in 0..2 {
            let w = probs[m].max(0.0).sqrt();
            let mut k = Mat::zeros(4, 4);
            for z in 0..2 {
                // control 0 branch
                if n == m {
                    k[(2 * z, 2 * z)] = c(w, 0.0);
                }
                // control 1 branch: cos δ_nm I + i sin |m⟩⟨n|
                if n == m {
                    k[(1 + 2 * z, 1 + 2 * z)] += c(w * cs, 0.0);
                }
            }
            k[(1 + 2 * m, 1 + 2 * n)] += c(0.0, w * sn);
            for a in 0..4 {
                for b in 0..4 {
                    for cc in 0..4 {
                        for d in 0..4 {
                            s[(a * 4 + b, cc * 4 + d)] += k[(a, cc)] * k[(b, d)].conj();
                        }
                    }
                }
            }
        }
    }
    s
}

fn mat_pow(m: &Mat, mut e: usize) -> Mat {
    let n = m.nrows();
    let mut result = Mat::identity(n, n);
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

/// Applies a two-qubit superoperator on qubits `(a, b)` of a density matrix.
fn apply_local_channel(rho: &Mat, sup: &Mat, a: usize, b: usize) -> Mat {
    let dim = rho.nrows();
    let local = |i: usize| (i >> a & 1) | (i >> b & 1) << 1;
    let with_local = |i: usize, l: usize| (i & !(1 << a) & !(1 << b)) | (l & 1) << a | (l >> 1 & 1) << b;
    let mut out = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let (li, lj) = (local(i), local(j));
            let mut acc = ZERO;
            for lc in 0..4 {
                for ld in 0..4 {
                    let coef = sup[(li * 4 + lj, lc * 4 + ld)];
                    if coef != ZERO {
                        acc += coef * rho[(with_local(i, lc), with_local(j, ld))];
                    }
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Phase readout of `e^{i p0 t}` over `n_e` controls. Returns the argmax
/// integer `y` (estimate `y·2π/(t·2^{n_e})`) and the steps per unit time.
fn phase_readout(p0: f64, n_e: usize, t: f64, delta_t: Option<f64>) -> Result<(usize, usize, f64)> {
    let (r, dt) = trotter_steps(n_e, t, delta_t)?;
    let step = step_superoperator(p0, dt);
    let n = n_e + 1;
    let dim = 1usize << n;
    let zeta = n_e;
    // controls in |+⟩, ζ in |0⟩
    let amp = 1.0 / ((1usize << n_e) as f64).sqrt();
    let psi: Vec<C64> = (0..dim).map(|i| if i >> zeta & 1 == 0 { c(amp, 0.0) } else { ZERO }).collect();
    let mut rho = Mat::from_fn(dim, dim, |i, j| psi[i] * psi[j].conj());
    for k in 0..n_e {
        let sup = mat_pow(&step, (1usize << k) * r);
        rho = apply_local_channel(&rho, &sup, k, zeta);
    }
    let nc = 1usize << n_e;
    let rho_c = Mat::from_fn(nc, nc, |i, j| rho[(i, j)] + rho[(i | nc, j | nc)]);
    let prob = |y: usize| -> f64 {
        let f: Vec<C64> = (0..nc).map(|x| C64::from_polar(1.0 / (nc as f64).sqrt(), 2.0 * PI * (x * y) as f64 / nc as f64)).collect();
        let mut acc = ZERO;
        for i in 0..nc {
            for j in 0..nc {
                acc += f[i].conj() * rho_c[(i, j)] * f[j];
            }
        }
        acc.re
    };
    let probs: Vec<f64> = (0..nc).map(prob).collect();
    let best = (0..nc).fold(0, |b, y| if probs[y] > probs[b] + 1e-12 { y } else { b });
    Ok((best, r, dt))
}

/// Estimates `p0` from a diagonal single-qubit density matrix. Readout 0
/// is ambiguous between `p0 = 0` and `p0 = 1`; a one-control run at
/// `t = π` separates them.
pub fn lmr_readout(p0: f64, n_e: usize, delta_t: Option<f64>) -> Result<(f64, usize, usize, f64)> {
    if n_e == 0 || n_e > 10 {
        return Err(Error::invalid(format!("n_e must lie in 1..=10, got {n_e}")));
    }
    let (y, r, dt) = phase_readout(p0, n_e, T_TOTAL, delta_t)?;
    let estimate = if y == 0 {
        let (bit, _, _) = phase_readout(p0, 1, PI, None)?;
        bit as f64
    } else {
        y as f64 / (1usize << n_e) as f64
    };
    Ok((estimate, y, r, dt))
}

/// Reduced 2×2 density matrix of `qubit`.
fn reduced_density(circuit: &QuantumCircuit, qubit: usize) -> Mat {
    let state = circuit.simulate();
    let amps = state.amplitudes();
    let mask = 1usize << qubit;
    let mut rho = Mat::zeros(2, 2);
    for (i, a) in amps.iter().enumerate().filter(|(i, _)| i & mask == 0) {
        let b = amps[i | mask];
        rho[(0, 0)] += a.norm_sqr();
        rho[(1, 1)] += b.norm_sqr();
        rho[(0, 1)] += a * b.conj();
    }
    rho[(1, 0)] = rho[(0, 1)].conj();
    rho
}

/// LMR decision for one clock qubit of the circuit produced by `builder`.
pub fn lmr_fix(
    builder: &(dyn Fn() -> Result<QuantumCircuit> + Sync),
    clock_qubit: usize,
    config: &LmrConfig,
) -> Result<LmrDecision> {
    if !(config.p_th > 0.5 && config.p_th <= 1.0) {
        return Err(Error::invalid(format!("p_th must lie in (0.5, 1], got {}", config.p_th)));
    }
    let base = builder()?;
    if clock_qubit >= base.num_qubits() {
        return Err(Error::IndexOutOfRange { index: clock_qubit, limit: base.num_qubits() });
    }
    let mut circ = QuantumCircuit::new(base.num_qubits() + 1);
    circ.extend(base.gates().iter().cloned())?;
    let anc = base.num_qubits();
    circ.push(Gate::cx(clock_qubit, anc))?;
    let rho = reduced_density(&circ, clock_qubit);
    if rho[(0, 1)].norm() > 1e-10 {
        return Err(Error::invalid("clock density matrix is not diagonal after the CNOT"));
    }
    let p_exact = rho[(0, 0)].re;
    let (p_estimate, readout, steps, delta_t) = lmr_readout(p_exact, config.n_e, config.delta_t)?;
    let decision = if p_estimate >= config.p_th {
        FixDecision::Fixed { bit: 0, probability: p_estimate }
    } else if 1.0 - p_estimate >= config.p_th {
        FixDecision::Fixed { bit: 1, probability: 1.0 - p_estimate }
    } else {
        FixDecision::Free
    };
    Ok(LmrDecision { clock_qubit, p_estimate, p_exact, readout, n_e: config.n_e, steps_per_unit: steps, delta_t, decision })
}

/// Independent LMR decisions for every clock qubit, run in parallel.
/// Entry `q` of `clock` is the circuit qubit of clock bit `q`.
pub fn lmr_plan(
    builder: &(dyn Fn() -> Result<QuantumCircuit> + Sync),
    clock: &[usize],
    config: &LmrConfig,
) -> Result<(FixingPlan, Vec<LmrDecision>)> {
    let decisions: Vec<LmrDecision> = clock.par_iter().map(|&q| lmr_fix(builder, q, config)).collect::<Result<_>>()?;
    let mut plan = FixingPlan::free(clock.len(), config.p_th, Provenance::Lmr);
    for (q, d) in decisions.iter().enumerate() {
        if let FixDecision::Fixed { bit, probability } = d.decision {
            plan.fix(q, bit, probability);
        }
    }
    Ok((plan, decisions))
}

/// Gate-level LMR module attached to one clock qubit, for resource counts.
///
/// Qubits: controls `0..n_e`, probe `ζ = n_e`, copy of `ρ` at `n_e + 1`
/// and the clock qubit at `n_e + 2`. Control `k` applies
/// `e^{i·SWAP·2^k·t}` as a single block; since `SWAP² = I` every power
/// is again a single `cos θ·I + i sin θ·SWAP` gate.
pub fn lmr_module_circuit(n_e: usize) -> Result<QuantumCircuit> {
    if n_e == 0 {
        return Err(Error::invalid("n_e must be at least 1"));
    }
    let (zeta, copy, clock) = (n_e, n_e + 1, n_e + 2);
    let mut circ = QuantumCircuit::new(n_e + 3);
    circ.push(Gate::cx(clock, copy))?;
    for k in 0..n_e {
        circ.push(Gate::h(k))?;
    }
    for k in 0..n_e {
        let theta = T_TOTAL * (1u64 << k) as f64;
        let m = Mat::identity(4, 4) * c(theta.cos(), 0.0) + swap() * c(0.0, theta.sin());
        circ.push(Gate::unitary(UnitaryBlock::new(m)?, vec![zeta, copy]).controlled_by([Control::on(k)]))?;
    }
    for k in (0..n_e).rev() {
        for m in (k + 1..n_e).rev() {
            let phase = -2.0 * PI / (1u64 << (m - k + 1)) as f64;
            circ.push(Gate::unitary(UnitaryBlock::diagonal(&[0.0, phase])?, vec![k]).controlled_by([Control::on(m)]))?;
        }
        circ.push(Gate::h(k))?;
    }
    Ok(circ)
}
