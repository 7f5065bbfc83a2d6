//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use hhlite_core::circuit::{decompose_to_native, metrics, Gate, QuantumCircuit};
use hhlite_core::fixing::{
    classical_fix, classical_fix_sequence, forced_plan, lmr_plan, lmr_readout, quantum_fix, LmrConfig,
};
use hhlite_core::hhl::{build_hhl_circuit, build_qpe_circuit, hom_overlap, run_hhl, HhlConfig, Mode};
use hhlite_core::linalg::{c, hermitian_eigenvalues, vec_norm, C64};
use hhlite_core::optimizer::{depth_compression, optimize, verify_equivalence, PassPipeline};
use hhlite_core::problem::{dyadic_instance, fixtures, oracle_e_corr, oracle_solution, pfd, random_spd_instance, ProblemInstance};
use hhlite_core::scaling::{
    adapt_scaling, exact_scaling, perturbed_eigen_estimates, perturbed_scaling, validate_scaling, DTildePolicy, ScalingPlan,
};
use hhlite_core::statevector::{derive_seed, Statevector};
use hhlite_core::workbench::{run_variant, shot_convergence, RunConfig, Variant};
use hhlite_core::Result;

type Outcome = Result<(bool, String)>;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn scaled_eigenvalues(p: &ProblemInstance, n_r: usize) -> Result<Vec<f64>> {
    let plan = adapt_scaling(&p.a, n_r, DTildePolicy::UseDMin)?;
    Ok(sorted(validate_scaling(&p.a, &plan, None)?.scaled_eigenvalues))
}

fn criterion_1() -> Outcome {
    let got = scaled_eigenvalues(&fixtures::small_2x2(), 3)?;
    let want = [0.122815, 0.252184];
    let err = max_abs_diff(&got, &want);
    Ok((err < 1e-5, format!("eigenvalues {got:.6?}, max error {err:.1e}")))
}

fn criterion_2() -> Outcome {
    let got = scaled_eigenvalues(&fixtures::h2_4x4(), 3)?;
    let want = sorted(vec![0.01560, 0.02697, 0.02118, 0.01886]);
    let err = max_abs_diff(&got, &want);
    Ok((err < 1e-4, format!("eigenvalues {got:.5?} vs {want:.5?}, max error {err:.1e}")))
}

fn norm_loss(p: &ProblemInstance, n_r: usize) -> Result<f64> {
    let plan = adapt_scaling(&p.a, n_r, DTildePolicy::UseDMin)?;
    let cfg = HhlConfig::exact(&plan);
    let out = run_hhl(&build_hhl_circuit(p, &plan, &cfg, None)?, &cfg, p, &plan)?;
    let exact = vec_norm(&oracle_solution(p)?);
    Ok((exact - out.norm_x).abs() / exact * 100.0)
}

fn criterion_3() -> Outcome {
    let small = norm_loss(&fixtures::small_2x2(), 3)?;
    let h2 = norm_loss(&fixtures::h2_4x4(), 3)?;
    let ok = (small - 1.7).abs() <= 0.5 && (h2 - 4.0).abs() <= 1.0;
    Ok((ok, format!("2x2 loss {small:.3}%, 4x4 loss {h2:.3}%")))
}

fn exact_run(p: &ProblemInstance, n_r: usize) -> Result<f64> {
    let plan = exact_scaling(&p.a, n_r)?;
    let cfg = HhlConfig::exact(&plan);
    Ok(run_hhl(&build_hhl_circuit(p, &plan, &cfg, None)?, &cfg, p, &plan)?.e_corr)
}

fn criterion_4() -> Outcome {
    let sizes = [2, 4, 8, 16];
    let errors: Vec<f64> = (0..50u64)
        .map(|k| {
            let p = random_spd_instance(sizes[k as usize % 4], 0.5, 4000 + k);
            let e = exact_run(&p, 10)?;
            let o = oracle_e_corr(&p)?;
            Ok(((e - o) / o).abs())
        })
        .collect::<Result<_>>()?;
    let good = errors.iter().filter(|&&e| e < 0.01).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let mut dyadic_worst = 0.0f64;
    for (k, n) in [2usize, 4, 8, 2, 4, 8].into_iter().enumerate() {
        let p = dyadic_instance(n, 5, 500 + k as u64);
        let o = oracle_e_corr(&p)?;
        dyadic_worst = dyadic_worst.max(((exact_run(&p, 10)? - o) / o).abs());
    }
    let ok = good >= 48 && dyadic_worst < 1e-6;
    Ok((ok, format!("{good}/50 within 1% (worst {worst:.2e}); dyadic worst {dyadic_worst:.1e}")))
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Statevector {
    let amps: Vec<C64> = (0..1usize << n).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    Statevector::normalized(amps).expect("non-zero")
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let exact_cfg = HhlConfig { n_r: 1, c: 0.5, mode: Mode::Exact, shots: 0, repetitions: 1, seed: 0 };
    let (mut exact_worst, mut outside, mut z_worst) = (0.0f64, 0, 0.0f64);
    for k in 0..200u64 {
        let n = 1 + (k as usize % 2);
        let x = random_state(&mut rng, n);
        let b = random_state(&mut rng, n);
        let truth = x.inner_product(&b)?.norm();
        exact_worst = exact_worst.max((hom_overlap(&x, &b, &exact_cfg)?.overlap - truth).abs());
        let sampled_cfg = HhlConfig { mode: Mode::Sampled, shots: 10_000, seed: derive_seed(77, k), ..exact_cfg.clone() };
        let r = hom_overlap(&x, &b, &sampled_cfg)?;
        let q = truth * truth;
        let sigma = ((1.0 - q * q) / 10_000.0).sqrt();
        let z = if sigma > 0.0 { (r.raw_overlap_sq - q).abs() / sigma } else { (r.raw_overlap_sq - q).abs() * 1e12 };
        z_worst = z_worst.max(z);
        if z > 3.0 {
            outside += 1;
        }
    }
    let ok = exact_worst < 1e-10 && outside == 0;
    Ok((ok, format!("exact worst {exact_worst:.1e}; sampled: {outside}/200 beyond 3 sigma (max {z_worst:.2} sigma)")))
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    let mut instances: Vec<ProblemInstance> = fixtures::all();
    instances.extend((0..50u64).map(|k| random_spd_instance([2, 4, 8, 16][k as usize % 4], 0.5, 6000 + k)));
    for p in &instances {
        let (lo, hi) = perturbed_eigen_estimates(&p.a, 1.0)?;
        let ev = sorted(hermitian_eigenvalues(&p.a));
        let (emin, emax) = (ev[0], ev[ev.len() - 1]);
        worst = worst.max(((lo - emin) / emin).abs()).max(((hi - emax) / emax).abs());
    }
    let mut diag_worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for n in [2usize, 4, 8, 16] {
        let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
        let a = hhlite_core::linalg::Mat::from_fn(n, n, |i, j| if i == j { c(d[i], 0.0) } else { c(0.0, 0.0) });
        let (lo, hi) = perturbed_eigen_estimates(&a, 1.0)?;
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        let dmax = d.iter().copied().fold(0.0, f64::max);
        diag_worst = diag_worst.max((lo - dmin).abs()).max((hi - dmax).abs());
    }
    let ok = worst < 0.05 && diag_worst < 1e-12;
    Ok((ok, format!("{} instances, worst relative error {:.3}%; diagonal worst {diag_worst:.1e}", instances.len(), worst * 100.0)))
}

fn corpus() -> Result<Vec<(String, QuantumCircuit, bool)>> {
    let small = fixtures::small_2x2();
    let h2 = fixtures::h2_4x4();
    let adapt = |p: &ProblemInstance, n_r| adapt_scaling(&p.a, n_r, DTildePolicy::UseDMin);
    let mut out = Vec::new();
    let mut qpe = |label: String, p: &ProblemInstance, plan: ScalingPlan| -> Result<()> {
        out.push((label, decompose_to_native(&build_qpe_circuit(p, &plan, None)?)?, false));
        Ok(())
    };
    for n_r in 2..=5 {
        qpe(format!("qpe 2x2 adapt n_r={n_r}"), &small, adapt(&small, n_r)?)?;
    }
    for n_r in 2..=4 {
        qpe(format!("qpe h2 adapt n_r={n_r}"), &h2, adapt(&h2, n_r)?)?;
    }
    for seed in 0..3 {
        let p = random_spd_instance(2, 0.5, 7000 + seed);
        qpe(format!("qpe random-2 exact seed={seed}"), &p, exact_scaling(&p.a, 3)?)?;
    }
    let mut hhl = |label: String, p: &ProblemInstance, plan: ScalingPlan, fixing: bool| -> Result<()> {
        let fix = if fixing {
            let state = build_qpe_circuit(p, &plan, None)?.simulate();
            Some(classical_fix(&state, &(0..plan.n_r).collect::<Vec<_>>(), 0.8)?)
        } else {
            None
        };
        let cfg = HhlConfig::exact(&plan);
        let c = build_hhl_circuit(p, &plan, &cfg, fix.as_ref())?.to_native()?.circuit;
        out.push((label, c, true));
        Ok(())
    };
    for n_r in 2..=5 {
        hhl(format!("hhl 2x2 adapt n_r={n_r}"), &small, adapt(&small, n_r)?, false)?;
    }
    for n_r in 3..=4 {
        hhl(format!("hhl 2x2 exact n_r={n_r}"), &small, exact_scaling(&small.a, n_r)?, false)?;
    }
    hhl("hhl 2x2 perturbed n_r=3".into(), &small, perturbed_scaling(&small.a, 3, 1.0)?, false)?;
    hhl("hhl h2 adapt n_r=3".into(), &h2, adapt(&h2, 3)?, false)?;
    hhl("hhl h2 exact n_r=3".into(), &h2, exact_scaling(&h2.a, 3)?, false)?;
    hhl("hhlite 2x2 exact n_r=4".into(), &small, exact_scaling(&small.a, 4)?, true)?;
    hhl("adaptlite h2 n_r=3".into(), &h2, adapt(&h2, 3)?, true)?;
    Ok(out)
}

fn criterion_7() -> Outcome {
    let circuits = corpus()?;
    let pipeline = PassPipeline::default();
    let (mut worst_residual, mut worst_fidelity, mut best_hhl, mut min_comp) = (0.0f64, 1.0f64, 0.0f64, f64::INFINITY);
    let mut max_qubits = 0;
    for (label, c, is_hhl) in &circuits {
        let out = optimize(c, &pipeline)?;
        let v = verify_equivalence(c, &out).map_err(|e| e.at_stage("verify"))?;
        let residual = v.residual.unwrap_or(f64::INFINITY);
        worst_residual = worst_residual.max(residual);
        worst_fidelity = worst_fidelity.min(v.min_fidelity);
        let d_in = metrics(c)?.depth;
        let d_out = metrics(&out)?.depth;
        let comp = depth_compression(d_in, d_out)?;
        if d_out > d_in {
            min_comp = f64::NEG_INFINITY;
        } else {
            min_comp = min_comp.min(comp);
        }
        if *is_hhl {
            best_hhl = best_hhl.max(comp);
        }
        max_qubits = max_qubits.max(c.num_qubits());
        let _ = label;
    }
    let ok = circuits.len() >= 20 && max_qubits <= 12 && worst_residual < 1e-8 && worst_fidelity >= 0.9999 && min_comp >= 0.0 && best_hhl >= 30.0;
    Ok((
        ok,
        format!(
            "{} circuits (<= {max_qubits} qubits), worst residual {worst_residual:.1e}, worst fidelity {worst_fidelity:.8}, min compression {min_comp:.1}%, best HHL compression {best_hhl:.1}%",
            circuits.len()
        ),
    ))
}

fn criterion_8() -> Outcome {
    let mut worst_dev = 0.0f64;
    for p in fixtures::all() {
        for lite in [Variant::Hhlite, Variant::Perturbedlite, Variant::Adaptlite] {
            let l = run_variant(&p, &RunConfig::for_problem(lite, &p))?.row.e_corr;
            let u = run_variant(&p, &RunConfig::for_problem(lite.base(), &p))?.row.e_corr;
            worst_dev = worst_dev.max(((l - u) / u).abs());
        }
    }
    let mut monotone = true;
    let mut trace = Vec::new();
    for p in fixtures::all() {
        let n_r = 6;
        let plan = adapt_scaling(&p.a, n_r, DTildePolicy::UseDMin)?;
        let clock: Vec<usize> = (0..n_r).collect();
        let seq = classical_fix_sequence(&build_qpe_circuit(&p, &plan, None)?.simulate(), &clock)?;
        let cfg = HhlConfig::exact(&plan);
        let depths: Vec<usize> = (0..=n_r)
            .map(|n_f| {
                let f = forced_plan(n_r, &seq, n_f);
                Ok(metrics(&build_hhl_circuit(&p, &plan, &cfg, Some(&f))?.to_native()?.circuit)?.depth)
            })
            .collect::<Result<_>>()?;
        monotone &= depths.windows(2).all(|w| w[1] < w[0]);
        trace.push(format!("{:?}", depths));
    }
    let ok = worst_dev <= 0.15 && monotone;
    Ok((ok, format!("worst lite/unlite deviation {:.2}%; depth vs n_f {}", worst_dev * 100.0, trace.join(" "))))
}

/// Clock register of `probs.len()` qubits where qubit `q` reads 1 with probability `probs[q]`.
fn product_clock(probs: &[f64]) -> QuantumCircuit {
    let mut c = QuantumCircuit::new(probs.len());
    for (q, &p) in probs.iter().enumerate() {
        c.push(Gate::ry(q, 2.0 * p.sqrt().asin())).expect("in range");
    }
    c
}

fn criterion_9() -> Outcome {
    let cases: [&[f64]; 10] = [
        &[0.0, 1.0, 0.0],
        &[1.0, 1.0, 1.0],
        &[0.5, 0.0, 1.0],
        &[0.95, 0.05, 0.5],
        &[0.3, 0.7, 1.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[0.97, 0.4, 0.02, 0.6],
        &[0.5, 0.5],
        &[0.03, 1.0, 0.65, 0.0, 0.96],
        &[0.9, 0.1, 0.35, 0.99],
    ];
    let mut agree = 0;
    for (k, probs) in cases.iter().enumerate() {
        let circ = product_clock(probs);
        let clock: Vec<usize> = (0..probs.len()).collect();
        let classical = classical_fix(&circ.simulate(), &clock, 0.8)?;
        let quantum = quantum_fix(&circ, &clock, 0.8, 10_000, derive_seed(9, k as u64))?;
        let builder = || Ok(circ.clone());
        let (lmr, _) = lmr_plan(&builder, &clock, &LmrConfig::new(4, 0.8))?;
        if classical.same_decisions(&quantum) && classical.same_decisions(&lmr) {
            agree += 1;
        }
    }
    let (estimate, _, _, dt) = lmr_readout(0.875, 3, None)?;
    let budget = 2.0 * std::f64::consts::PI * dt <= 0.5f64.powi(4);
    let ok = agree == 10 && (estimate - 0.875).abs() < 1e-12 && budget;
    Ok((ok, format!("{agree}/10 product clocks agree; p=7/8 reads {estimate} (t*dt within budget: {budget})")))
}

fn criterion_10() -> Outcome {
    // (E_clc, E_method, printed PFD) from the HHL/HHLite and AdaptHHL/AdaptHHLite tables
    let rows = [
        (-10.207, -10.001, 2.02),
        (-10.813, -10.485, 3.04),
        (-25.394, -24.972, 1.66),
        (-17.464, -16.579, 5.06),
        (-43.947, -43.800, 0.34),
        (-10.207, -10.489, -2.76),
        (-27.423, -31.189, -13.73),
        (-18.536, -18.399, 0.74),
        (-18.224, -20.276, -11.26),
        (-23.391, -22.698, 2.96),
    ];
    let mut worst = 0.0f64;
    for (o, e, printed) in rows {
        worst = worst.max((pfd(o, e)? - printed).abs());
    }
    Ok((worst <= 0.01, format!("10 rows, worst difference {worst:.4}")))
}

fn criterion_11() -> Outcome {
    let p = fixtures::small_2x2();
    let cfg = RunConfig { mode: Mode::Sampled, seed: 1111, ..RunConfig::new(Variant::Adapt, 3) };
    let grid = [100, 300, 1000, 3000, 10_000];
    let stats = shot_convergence(&p, &cfg, &grid, 200)?;
    let stds: Vec<f64> = stats.iter().map(|s| s.std).collect();
    let inversions: Vec<f64> = stds.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[1] - w[0]) / w[0]).collect();
    let ok = inversions.len() <= 1 && inversions.iter().all(|&r| r <= 0.10);
    Ok((ok, format!("std over 200 repetitions {stds:.5?}")))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(u32, Check, Duration); 11] = [
        (1, criterion_1, Duration::from_secs(1)),
        (2, criterion_2, Duration::from_secs(1)),
        (3, criterion_3, Duration::from_secs(10)),
        (4, criterion_4, Duration::from_secs(300)),
        (5, criterion_5, Duration::from_secs(60)),
        (6, criterion_6, Duration::from_secs(10)),
        (7, criterion_7, Duration::from_secs(600)),
        (8, criterion_8, Duration::from_secs(300)),
        (9, criterion_9, Duration::from_secs(120)),
        (10, criterion_10, Duration::from_secs(1)),
        (11, criterion_11, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (n, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit;
        let (pass, detail) = match result {
            Ok((ok, detail)) => (ok && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), limit.as_secs());
        let timing = if in_time { timing } else { format!("{timing}, over the time limit") };
        println!("criterion {n:>2}: {} ({detail}; {timing})", if pass { "PASS" } else { "FAIL" });
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
