//! `hhlite` command-line front end.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use hhlite_core::circuit::{decompose_to_native, parse_circuit, write_circuit};
use hhlite_core::hhl::{build_qpe_circuit, Mode};
use hhlite_core::optimizer::{optimize_verified, PassPipeline};
use hhlite_core::problem::{fixtures, load_problem, ProblemInstance};
use hhlite_core::scaling::{adapt_scaling, exact_scaling, perturbed_scaling, validate_scaling, DTildePolicy};
use hhlite_core::workbench::{
    default_n_r, dmin_sweep, plan_fixing, plan_for, resource_scan, run_sweep, run_variant, shot_convergence, FixingMethod,
    RunConfig, Variant,
};
use hhlite_core::{Error, Result};

#[derive(Parser)]
#[command(name = "hhlite", version, about = "HHL linear-solver workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one variant end to end and print its report row.
    Solve(SolveArgs),
    /// Print a scaling plan and its diagnostics.
    Scale(ScaleArgs),
    /// Print the fixing plan a lite variant would use.
    Fix(FixArgs),
    /// Optimize a circuit file and print depth and verification figures.
    Optimize(OptimizeArgs),
    /// Run variants over instances and write a report table.
    Sweep(SweepArgs),
    /// Spread of sampled E_corr against shot count.
    Shots(ShotsArgs),
    /// PFD and P(1) across d_tilde_min values.
    DminSweep(DminArgs),
    /// Two-qubit counts of QPE, HHL and LMR fixing modules.
    Resources(ResourceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum FixingArg {
    Classical,
    Quantum,
    Lmr,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Adapt,
    Perturbed,
    Exact,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Variant: hhl, hhlite, perturbed, perturbedlite, adapt, adaptlite.
    #[arg(long, default_value = "hhl")]
    variant: String,
    /// Clock size; defaults to 6 up to 4×4 and 8 above.
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    p_th: f64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1000)]
    shots: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    optimize: bool,
    #[arg(long, value_enum, default_value = "classical")]
    fixing: FixingArg,
    #[arg(long, default_value_t = 1.0)]
    xi: f64,
    #[arg(long)]
    d_tilde_min: Option<f64>,
    /// LMR control qubits.
    #[arg(long, default_value_t = 4)]
    n_e: usize,
    /// Shots per clock qubit for the quantum planner.
    #[arg(long, default_value_t = 10_000)]
    fix_shots: usize,
}

impl RunArgs {
    fn config(&self, problem: &ProblemInstance) -> Result<RunConfig> {
        let variant: Variant = self.variant.parse()?;
        Ok(RunConfig {
            variant,
            n_r: self.n_r.unwrap_or_else(|| default_n_r(problem.dim())),
            p_th: self.p_th,
            mode: match self.mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Sampled => Mode::Sampled,
            },
            shots: self.shots,
            repetitions: self.reps,
            seed: self.seed,
            optimize: self.optimize,
            fixing: match self.fixing {
                FixingArg::Classical => FixingMethod::Classical,
                FixingArg::Quantum => FixingMethod::Quantum,
                FixingArg::Lmr => FixingMethod::Lmr,
            },
            xi: self.xi,
            d_tilde_min: self.d_tilde_min,
            n_e: self.n_e,
            fix_shots: self.fix_shots,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file, or `2x2` / `h2` for the bundled fixtures.
    #[arg(long)]
    instance: String,
    #[command(flatten)]
    run: RunArgs,
    /// Append the report row to this CSV file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the full run record (plans, verification, outcome) as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ScaleArgs {
    #[arg(long)]
    instance: String,
    #[arg(long, value_enum, default_value = "adapt")]
    strategy: StrategyArg,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    d_tilde_min: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    xi: f64,
}

#[derive(Args)]
struct FixArgs {
    #[arg(long)]
    instance: String,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Circuit in the line format; non-native gates are lowered first.
    #[arg(long)]
    circuit: PathBuf,
    /// Write the optimized circuit here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated pass order.
    #[arg(long, value_delimiter = ',')]
    passes: Option<Vec<String>>,
}

#[derive(Args)]
struct SweepArgs {
    /// Instance files; defaults to the bundled fixtures.
    #[arg(long, value_delimiter = ',')]
    instances: Vec<String>,
    /// Variants to run; defaults to all six.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<String>,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long)]
    optimize: bool,
    #[arg(long, default_value_t = 0.8)]
    p_th: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Args)]
struct ShotsArgs {
    #[arg(long)]
    instance: String,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_value = "100,300,1000,3000,10000")]
    grid: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DminArgs {
    #[arg(long)]
    instance: String,
    #[arg(long)]
    n_r: Option<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    grid: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResourceArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    n_b: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    n_r: usize,
    #[arg(long, default_value_t = 3)]
    n_e: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_instance(spec: &str) -> Result<ProblemInstance> {
    match spec {
        "2x2" => Ok(fixtures::small_2x2()),
        "h2" => Ok(fixtures::h2_4x4()),
        path => load_problem(path),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        // reader went away (e.g. piped into `head`)
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn write_rows<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

fn solve(args: SolveArgs) -> Result<()> {
    let problem = load_instance(&args.instance)?;
    let result = run_variant(&problem, &args.run.config(&problem)?)?;
    if let Some(path) = &args.out {
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let file = File::options().create(true).append(true).open(path)?;
        let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
        w.serialize(&result.row).map_err(csv_err)?;
        w.flush()?;
    }
    if let Some(path) = &args.json {
        File::create(path)?.write_all(result.to_json()?.as_bytes())?;
    }
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    print_json(&result.row)
}

fn scale(args: ScaleArgs) -> Result<()> {
    let problem = load_instance(&args.instance)?;
    let n_r = args.n_r.unwrap_or_else(|| default_n_r(problem.dim()));
    let plan = match args.strategy {
        StrategyArg::Adapt => adapt_scaling(&problem.a, n_r, args.d_tilde_min.map_or(DTildePolicy::UseDMin, DTildePolicy::Explicit))?,
        StrategyArg::Perturbed => perturbed_scaling(&problem.a, n_r, args.xi)?,
        StrategyArg::Exact => exact_scaling(&problem.a, n_r)?,
    };
    let report = validate_scaling(&problem.a, &plan, Some(&problem.normalized_b()))?;
    print_json(&json!({ "plan": plan, "report": report }))
}

fn fix(args: FixArgs) -> Result<()> {
    let problem = load_instance(&args.instance)?;
    let config = args.run.config(&problem)?;
    let plan = plan_for(&problem, &config)?;
    let (fixing, lmr) = plan_fixing(&problem, &plan, &config)?;
    // QPE size with and without the plan
    let unfixed = decompose_to_native(&build_qpe_circuit(&problem, &plan, None)?)?;
    let fixed = decompose_to_native(&build_qpe_circuit(&problem, &plan, Some(&fixing))?)?;
    let report = hhlite_core::fixing::fixing_report(
        &fixing,
        &hhlite_core::circuit::metrics(&unfixed)?,
        &hhlite_core::circuit::metrics(&fixed)?,
    );
    print_json(&json!({ "n_f": fixing.n_f(), "plan": fixing, "report": report, "lmr": lmr }))
}

fn optimize(args: OptimizeArgs) -> Result<()> {
    let circuit = parse_circuit(&std::fs::read_to_string(&args.circuit)?)?;
    let native = if circuit.is_native() { circuit } else { decompose_to_native(&circuit)? };
    let pipeline = match &args.passes {
        Some(names) => PassPipeline::new(names.iter().map(|n| n.parse()).collect::<Result<_>>()?, true)?,
        None => PassPipeline::default(),
    };
    let (out, report) = optimize_verified(&native, &pipeline)?;
    if let Some(path) = &args.out {
        std::fs::write(path, write_circuit(&out)?)?;
    }
    print_json(&json!({
        "depth_in": report.depth_in,
        "depth_out": report.depth_out,
        "compression_pct": report.compression_pct,
        "fidelity": report.fidelity,
        "phase": report.phase,
        "residual": report.residual,
        "method": report.method,
    }))
}

fn sweep(args: SweepArgs) -> Result<()> {
    let instances = if args.instances.is_empty() {
        fixtures::all()
    } else {
        args.instances.iter().map(|s| load_instance(s)).collect::<Result<_>>()?
    };
    let variants: Vec<Variant> = if args.variants.is_empty() {
        Variant::ALL.to_vec()
    } else {
        args.variants.iter().map(|v| v.parse()).collect::<Result<_>>()?
    };
    // one n_r for the whole sweep so that rows are comparable
    let n_r = args.n_r.unwrap_or_else(|| default_n_r(instances.iter().map(ProblemInstance::dim).max().unwrap_or(2)));
    let configs: Vec<RunConfig> = variants
        .iter()
        .map(|&v| RunConfig { optimize: args.optimize, p_th: args.p_th, seed: args.seed, ..RunConfig::new(v, n_r) })
        .collect();
    let report = run_sweep(&instances, &configs)?;
    match &args.out {
        Some(path) => report.write_csv(File::create(path)?)?,
        None => report.write_csv(std::io::stdout())?,
    }
    if let Some(path) = &args.heatmap {
        report.write_heatmap_csv(File::create(path)?)?;
    }
    for r in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} {}: {}", r.instance, r.variant, r.error.as_deref().unwrap_or(""));
    }
    Ok(())
}

fn shots(args: ShotsArgs) -> Result<()> {
    let problem = load_instance(&args.instance)?;
    let mut config = args.run.config(&problem)?;
    config.mode = Mode::Sampled;
    let stats = shot_convergence(&problem, &config, &args.grid, args.run.reps)?;
    match &args.out {
        Some(path) => write_rows(path, &stats),
        None => print_json(&stats),
    }
}

fn dmin(args: DminArgs) -> Result<()> {
    let problem = load_instance(&args.instance)?;
    let n_r = args.n_r.unwrap_or_else(|| default_n_r(problem.dim()));
    let points = dmin_sweep(&problem, n_r, &args.grid)?;
    match &args.out {
        Some(path) => write_rows(path, &points),
        None => print_json(&points),
    }
}

fn resources(args: ResourceArgs) -> Result<()> {
    let rows = resource_scan(&args.n_b, args.n_r, args.n_e, args.seed)?;
    match &args.out {
        Some(path) => write_rows(path, &rows),
        None => print_json(&rows),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Scale(a) => scale(a),
        Command::Fix(a) => fix(a),
        Command::Optimize(a) => optimize(a),
        Command::Sweep(a) => sweep(a),
        Command::Shots(a) => shots(a),
        Command::DminSweep(a) => dmin(a),
        Command::Resources(a) => resources(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
