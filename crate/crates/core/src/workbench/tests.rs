use super::*;
use crate::linalg::{c, vec_norm, Mat};
use crate::problem::{fixtures, oracle_solution};

fn identity_instance() -> ProblemInstance {
    ProblemInstance::new("identity", Mat::identity(2, 2), vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap()
}

#[test]
fn variant_table() {
    assert_eq!("adaptlite".parse::<Variant>().unwrap(), Variant::Adaptlite);
    assert!("adapthhl".parse::<Variant>().is_err());
    assert_eq!(Variant::Perturbedlite.base(), Variant::Perturbed);
    assert_eq!(Variant::Hhlite.strategy(), Strategy::Exact);
    assert_eq!(Variant::ALL.iter().filter(|v| v.is_lite()).count(), 3);
    assert_eq!(serde_json::to_string(&Variant::Adaptlite).unwrap(), "\"adaptlite\"");
    assert_eq!(default_n_r(4), 6);
    assert_eq!(default_n_r(16), 8);
}

#[test]
fn adapt_two_by_two_loses_about_1_7_percent() {
    let p = fixtures::small_2x2();
    let r = run_variant(&p, &RunConfig::new(Variant::Adapt, 3)).unwrap();
    let exact = vec_norm(&oracle_solution(&p).unwrap());
    let loss = (exact - r.outcome.norm_x).abs() / exact * 100.0;
    assert!((loss - 1.7).abs() < 0.5, "{loss}");
}

#[test]
fn all_fixed_lite_row() {
    let p = fixtures::small_2x2();
    let lite = run_variant(&p, &RunConfig::new(Variant::Adaptlite, 6)).unwrap();
    let full = run_variant(&p, &RunConfig::new(Variant::Adapt, 6)).unwrap();
    assert_eq!(lite.row.n_f, 6);
    // what is left is the ancilla rotation, the state preparations and the HOM CNOT
    assert!(lite.row.two_q <= 1, "{:?}", lite.row);
    assert!(lite.row.depth < full.row.depth / 10);
}

#[test]
fn identity_is_exact_for_every_variant() {
    let p = identity_instance();
    for v in Variant::ALL {
        let r = run_variant(&p, &RunConfig::new(v, 4)).unwrap();
        assert!(r.row.pfd.abs() < 1e-6, "{v}: {}", r.row.pfd);
    }
}

#[test]
fn row_invariants_and_determinism() {
    let p = fixtures::h2_4x4();
    let cfg = RunConfig::new(Variant::Perturbed, 4);
    let a = run_variant(&p, &cfg).unwrap();
    let b = run_variant(&p, &cfg).unwrap();
    assert_eq!(a.row, b.row);
    let r = &a.row;
    assert_eq!(r.n_t, 2 * r.n_b + r.n_r + 1);
    assert_eq!(r.e_diff, r.e_corr - r.e_corr_oracle);
    assert_eq!(r.pfd, (r.e_corr_oracle - r.e_corr) / r.e_corr_oracle * 100.0);
    let json: serde_json::Value = serde_json::from_str(&a.to_json().unwrap()).unwrap();
    assert_eq!(json["scaling"]["strategy"], "perturbed");
    assert_eq!(json["config"]["variant"], "perturbed");
}

#[test]
fn sampled_run_is_seeded() {
    let p = fixtures::small_2x2();
    let cfg = RunConfig { mode: Mode::Sampled, seed: 11, ..RunConfig::new(Variant::Adapt, 3) };
    let a = run_variant(&p, &cfg).unwrap();
    assert_eq!(a.row, run_variant(&p, &cfg).unwrap().row);
    assert!(a.outcome.e_corr_std.is_some());
}

#[test]
fn optimized_run_matches_and_is_shallower() {
    let p = fixtures::small_2x2();
    let plain = run_variant(&p, &RunConfig::new(Variant::Adapt, 3)).unwrap();
    let opt = run_variant(&p, &RunConfig { optimize: true, ..RunConfig::new(Variant::Adapt, 3) }).unwrap();
    assert!((plain.row.e_corr - opt.row.e_corr).abs() < 1e-8);
    assert!(opt.row.depth < plain.row.depth);
    let rep = opt.optimization.unwrap();
    assert_eq!(rep.depth_in, plain.row.depth);
    assert!(rep.fidelity > 0.9999);
}

#[test]
fn errors_carry_their_stage() {
    let p = fixtures::small_2x2();
    let err = run_variant(&p, &RunConfig::new(Variant::Adapt, 1)).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "scale", .. }), "{err}");
    let err = run_variant(&p, &RunConfig { p_th: 0.3, ..RunConfig::new(Variant::Hhlite, 3) }).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "fix", .. }), "{err}");
}

#[test]
fn lite_planners_are_selectable() {
    let p = fixtures::small_2x2();
    let mut rows = Vec::new();
    for fixing in [FixingMethod::Classical, FixingMethod::Quantum, FixingMethod::Lmr] {
        let r = run_variant(&p, &RunConfig { fixing, ..RunConfig::new(Variant::Adaptlite, 3) }).unwrap();
        if fixing == FixingMethod::Lmr {
            assert_eq!(r.lmr.as_ref().unwrap().len(), 3);
        }
        rows.push(r.row.n_f);
    }
    assert!(rows.iter().all(|&n| n == rows[0]), "{rows:?}");
}

#[test]
fn sweep_over_fixtures() {
    let instances = fixtures::all();
    let configs: Vec<RunConfig> = Variant::ALL.iter().map(|&v| RunConfig::new(v, 4)).collect();
    let report = run_sweep(&instances, &configs).unwrap();
    assert_eq!(report.rows.len(), 12);
    for p in &instances {
        let depth = |v| report.get(&p.label, v).unwrap().result.as_ref().unwrap().row.depth;
        assert!(depth(Variant::Hhl) >= depth(Variant::Hhlite));
        assert!(depth(Variant::Hhlite) >= depth(Variant::Adaptlite));
        assert_eq!(report.get(&p.label, Variant::Hhl).unwrap().compression_pct, Some(0.0));
    }
    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("label,variant,n_t,n_b,n_r,e_corr_oracle,depth,two_q,e_corr,e_diff,pfd,n_f,compression_pct,error"));
    let mut heat = Vec::new();
    report.write_heatmap_csv(&mut heat).unwrap();
    assert_eq!(String::from_utf8(heat).unwrap().lines().count(), 13);
}

#[test]
fn sweep_records_failures() {
    let instances = vec![fixtures::small_2x2()];
    let configs = vec![RunConfig::new(Variant::Adapt, 1), RunConfig::new(Variant::Adapt, 3)];
    let report = run_sweep(&instances, &configs).unwrap();
    assert!(report.rows[0].error.as_deref().unwrap().starts_with("scale:"));
    assert!(report.rows[1].result.is_some());
    assert!(run_sweep(&[], &configs).is_err());
}

#[test]
fn deterministic_instance_has_no_shot_spread() {
    // b is the eigenvector of the smallest eigenvalue, which sits on the grid
    // and rotates the ancilla fully under exact scaling
    let a = Mat::from_fn(2, 2, |i, j| if i == j { c([0.5, 0.25][i], 0.0) } else { c(0.0, 0.0) });
    let p = ProblemInstance::new("eigen", a, vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let cfg = RunConfig { mode: Mode::Sampled, seed: 3, ..RunConfig::new(Variant::Hhl, 3) };
    let stats = shot_convergence(&p, &cfg, &[10, 100], 20).unwrap();
    for s in &stats {
        assert!(s.std < 1e-12, "{s:?}");
    }
    assert_eq!(stats, shot_convergence(&p, &cfg, &[10, 100], 20).unwrap());
    assert!(shot_convergence(&p, &RunConfig::new(Variant::Hhl, 3), &[10], 2).is_err());
}

#[test]
fn dmin_sweep_window() {
    let p = fixtures::small_2x2();
    let d_min = p.d_min();
    let grid = [0.05, 0.1875, 0.3, 0.5, d_min, 0.9];
    let pts = dmin_sweep(&p, 3, &grid).unwrap();
    // 2^-3·1.5 = 0.1875 is the open lower bound
    assert!(!pts[0].valid && !pts[1].valid && pts[0].pfd.is_none());
    assert!(pts[2..5].iter().all(|q| q.valid && q.in_window && q.pfd.unwrap().is_finite()));
    assert!(pts[5].valid && !pts[5].in_window);
    let adapt = run_variant(&p, &RunConfig::new(Variant::Adapt, 3)).unwrap();
    assert_eq!(pts[4].pfd, Some(adapt.row.pfd));
    let exact = vec_norm(&oracle_solution(&p).unwrap());
    for q in &pts[2..5] {
        assert!((q.norm_x.unwrap() - exact).abs() / exact < 0.2, "{q:?}");
    }
}

#[test]
fn resource_scan_trend() {
    let rows = resource_scan(&[1, 2, 3], 3, 3, 5).unwrap();
    assert!(rows[0].hhl_2q > rows[0].qpe_2q);
    assert!(rows.windows(2).all(|w| w[1].ratio < w[0].ratio));
    assert!(rows.iter().all(|r| r.ratio > 0.5));
    assert_eq!(rows, resource_scan(&[1, 2, 3], 3, 3, 5).unwrap());
}
