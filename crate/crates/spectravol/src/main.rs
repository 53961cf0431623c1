//! Command-line interface: construct instances, compute analytic centers,
//! evaluate volume formulas, check applicability conditions, run the Monte
//! Carlo oracle, and compare formula against sampling.
//!
//! Exit codes: 0 success, 1 input error, 2 infeasible or precondition
//! violation, 3 numerical non-convergence.

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use spectravol::center::{analytic_center, CenterResult, SolverOptions};
use spectravol::error::Error;
use spectravol::families;
use spectravol::oracle::{mc_volume_rejection, MCEstimate};
use spectravol::spectra::Spectrahedron;
use spectravol::symlin::{MeasureConvention, SymMatrix};
use spectravol::volume::{
    approx_log_volume, check_conditions, min_n_for_main_condition, ConditionReport,
    VolumeReport,
};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "spectravol", version, about = "Volume approximation for spectrahedra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Frobenius,
    #[value(alias = "paper")]
    Entrywise,
}

impl From<ConventionArg> for MeasureConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Frobenius => MeasureConvention::Frobenius,
            ConventionArg::Entrywise => MeasureConvention::Entrywise,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the analytic center of an instance
    Center(CenterArgs),
    /// Solve the center and evaluate the volume approximation formula
    Volume(VolumeArgs),
    /// Evaluate the applicability conditions of the error guarantee
    Check(CheckArgs),
    /// Generate a family instance file
    Family(FamilyArgs),
    /// Monte Carlo volume estimate (rejection sampling)
    Mc(McArgs),
    /// Compare the formula against the Monte Carlo oracle
    Compare(CompareArgs),
}

#[derive(Args)]
struct CenterArgs {
    /// instance file; "-" (the default) reads JSON from stdin
    #[arg(default_value = "-")]
    input: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// write the center matrix to this file as JSON
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VolumeArgs {
    /// instance file; "-" (the default) reads JSON from stdin
    #[arg(default_value = "-")]
    input: PathBuf,
    /// target relative error for the condition check
    #[arg(long, default_value_t = 0.36787944117144233)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Frobenius)]
    convention: ConventionArg,
    /// also run the Monte Carlo oracle and report the discrepancy
    #[arg(long)]
    with_mc: bool,
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// instance file; "-" (the default) reads JSON from stdin
    #[arg(default_value = "-")]
    input: PathBuf,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FamilyArgs {
    #[command(subcommand)]
    kind: FamilyKind,
}

#[derive(Subcommand)]
enum FamilyKind {
    /// trace-one slice of the PSD cone (identity or seeded random PD A)
    Spectraplex {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// one PD constraint plus one rank-one constraint
    RankOne {
        #[arg(long)]
        n: usize,
        /// target xi = v^T A^{-1} v (must exceed 1)
        #[arg(long, default_value_t = 2.0)]
        xi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// two block-trace constraints on 2N x 2N matrices
    DiagBlocks {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// multi-way Birkhoff spectrahedron on (R^n)^{x k}
    Scp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// central section of the spectraplex through I/N
    CentralSection {
        #[arg(long, alias = "N")]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct McArgs {
    /// instance file; "-" (the default) reads JSON from stdin
    #[arg(default_value = "-")]
    input: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// instance file; "-" (the default) reads JSON from stdin
    #[arg(default_value = "-")]
    input: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

fn load_instance(path: &PathBuf) -> Result<Spectrahedron, Error> {
    if path.as_os_str() == "-" {
        use std::io::Read;
        let mut body = String::new();
        std::io::stdin()
            .read_to_string(&mut body)
            .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
        Spectrahedron::from_json_str(&body)
    } else {
        Spectrahedron::from_file(path)
    }
}

fn exit_code_for(e: &Error) -> ExitCode {
    match e {
        Error::InvalidInput(_) | Error::DimensionMismatch { .. } => ExitCode::from(1),
        Error::MaxIterationsExceeded(_)
        | Error::LineSearchStalled(_)
        | Error::ChordSearchFailed => ExitCode::from(3),
        _ => ExitCode::from(2),
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    exit_code_for(&e)
}

#[derive(Serialize)]
struct CenterReport<'a> {
    instance: Option<&'a str>,
    n: usize,
    m: usize,
    phi_star: f64,
    iterations: usize,
    stationarity_residual: f64,
    feasibility_residual: f64,
    center: Vec<Vec<f64>>,
}

fn matrix_rows(p: &SymMatrix) -> Vec<Vec<f64>> {
    let n = p.dim();
    (0..n).map(|i| (0..n).map(|j| p.get(i, j)).collect()).collect()
}

fn print_center_text(r: &CenterResult) {
    println!("phi(P*)              = {:.12e}", r.entropy.value);
    println!("iterations           = {}", r.iterations);
    println!("stationarity residual = {:.3e}", r.stationarity_residual);
    println!("feasibility residual  = {:.3e}", r.feasibility_residual);
    println!("analytic center P*:");
    let n = r.center.dim();
    for i in 0..n {
        let row: Vec<String> =
            (0..n).map(|j| format!("{:+.9e}", r.center.get(i, j))).collect();
        println!("  [{}]", row.join(", "));
    }
}

fn cmd_center(args: &CenterArgs) -> Result<(), Error> {
    let t0 = Instant::now();
    let s = load_instance(&args.input)?;
    let opts = SolverOptions { tol: args.tol, max_iter: args.max_iter, verbosity: 0 };
    let r = analytic_center(&s, &opts)?;
    eprintln!("solve time: {:.3}s", t0.elapsed().as_secs_f64());
    if let Some(out) = &args.out {
        let body = serde_json::to_string_pretty(&matrix_rows(&r.center))
            .expect("serialization cannot fail");
        std::fs::write(out, body)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", out.display())))?;
    }
    if args.json {
        let report = CenterReport {
            instance: s.name(),
            n: s.dim(),
            m: s.num_constraints(),
            phi_star: r.entropy.value,
            iterations: r.iterations,
            stationarity_residual: r.stationarity_residual,
            feasibility_residual: r.feasibility_residual,
            center: matrix_rows(&r.center),
        };
        println!("{}", serde_json::to_string_pretty(&report).expect("serialization"));
    } else {
        print_center_text(&r);
    }
    Ok(())
}

#[derive(Serialize)]
struct VolumeRunReport<'a> {
    instance: Option<&'a str>,
    n: usize,
    m: usize,
    phi_star: f64,
    volume: &'a VolumeReport,
    log10_volume: f64,
    conditions: &'a ConditionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc: Option<&'a MCEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_discrepancy_log: Option<f64>,
}

fn print_volume_text(report: &VolumeRunReport) {
    println!("log volume ({:?})   = {:.12e} nats", report.volume.convention, report.volume.log_volume);
    println!("log10 volume         = {:.12e}", report.log10_volume);
    if let Some(v) = report.volume.linear_volume() {
        println!("volume               = {v:.12e}");
    }
    if let Some(c) = &report.volume.components {
        println!("  (m/2) log((N+1)/4pi) = {:.9e}", c.m_half_log_term);
        println!("  (1/2) log det AA^T   = {:.9e}", c.half_log_det_aat);
        println!("  (1/2) log det BB^T   = {:.9e}", c.half_log_det_bbt);
        println!("  phi(P*)              = {:.9e}", c.phi_star);
    }
    let cond = report.conditions;
    println!(
        "conditions at eps = {}: main {}, A3 {}, A3' {}",
        cond.epsilon_requested,
        verdict(cond.main_condition_applicable, cond.main_condition_satisfied),
        if cond.a3_satisfied { "PASS" } else { "FAIL" },
        if cond.a3_prime_satisfied { "PASS" } else { "FAIL" },
    );
    if let (Some(mc), Some(gap)) = (report.mc, report.mc_discrepancy_log) {
        println!(
            "mc log volume        = {:.9e} +/- {:.3e} ({} / {} accepted)",
            mc.log_volume, mc.std_error_log, mc.samples_accepted, mc.samples_total
        );
        println!(
            "formula - mc         = {:.6e} nats ({:.2} SE)",
            gap,
            gap / mc.std_error_log
        );
    }
}

fn verdict(applicable: bool, satisfied: bool) -> &'static str {
    if !applicable {
        "N/A (eps > 1/e)"
    } else if satisfied {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_volume(args: &VolumeArgs) -> Result<(), Error> {
    let t0 = Instant::now();
    let s = load_instance(&args.input)?;
    let center = analytic_center(&s, &SolverOptions::default())?;
    let convention: MeasureConvention = args.convention.into();
    let volume = approx_log_volume(&s, &center, convention)?;
    let conditions = check_conditions(&s, &center, args.epsilon)?;
    let mc = if args.with_mc {
        // the oracle samples in isometric coordinates: compare in that measure
        Some(mc_volume_rejection(&s, args.mc_samples, args.seed)?)
    } else {
        None
    };
    let mc_discrepancy_log = mc.as_ref().map(|est| {
        let formula_frob =
            approx_log_volume(&s, &center, MeasureConvention::Frobenius)
                .map(|r| r.log_volume)
                .unwrap_or(f64::NAN);
        formula_frob - est.log_volume
    });
    eprintln!("total time: {:.3}s", t0.elapsed().as_secs_f64());
    let report = VolumeRunReport {
        instance: s.name(),
        n: s.dim(),
        m: s.num_constraints(),
        phi_star: center.entropy.value,
        volume: &volume,
        log10_volume: volume.log10_volume(),
        conditions: &conditions,
        mc: mc.as_ref(),
        mc_discrepancy_log,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serialization"));
    } else {
        print_volume_text(&report);
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> Result<(), Error> {
    if !(args.epsilon > 0.0 && args.epsilon <= (-1.0_f64).exp()) {
        return Err(Error::InvalidInput(format!(
            "--epsilon must lie in (0, 1/e], got {}",
            args.epsilon
        )));
    }
    let s = load_instance(&args.input)?;
    let center = analytic_center(&s, &SolverOptions::default())?;
    let report = check_conditions(&s, &center, args.epsilon)?;
    let n_required = min_n_for_main_condition(s.num_constraints(), args.epsilon)?;
    if args.json {
        #[derive(Serialize)]
        struct CheckJson<'a> {
            #[serde(flatten)]
            report: &'a ConditionReport,
            n_required_for_epsilon: f64,
        }
        println!(
            "{}",
            serde_json::to_string_pretty(&CheckJson { report: &report, n_required_for_epsilon: n_required })
                .expect("serialization")
        );
    } else {
        println!("N = {}, m = {}", report.n, report.m);
        println!("lambda               = {:.6e}", report.lambda);
        println!("theta (bound)        = {:.6e}", report.theta.bound);
        if let Some(t) = report.theta.exact_m1 {
            println!("theta (exact, m=1)   = {t:.6e}");
        }
        println!(
            "main condition       : {}",
            verdict(report.main_condition_applicable, report.main_condition_satisfied)
        );
        println!("A3                   : {}", if report.a3_satisfied { "PASS" } else { "FAIL" });
        println!("A3'                  : {}", if report.a3_prime_satisfied { "PASS" } else { "FAIL" });
        match report.min_epsilon_feasible {
            Some(e) => println!("min feasible eps (A3') = {e:.6e}"),
            None => println!("min feasible eps (A3') = none at this (N, m)"),
        }
        println!("N required for eps = {} at m = {}: {:.3e}", args.epsilon, report.m, n_required);
    }
    Ok(())
}

fn random_pd(n: usize, seed: u64) -> SymMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let q = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    SymMatrix::from_dense_symmetrize(&(q.transpose() * &q + DMatrix::identity(n, n)))
}

fn emit_instance(s: &Spectrahedron, out: &Option<PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => s.to_file(path),
        None => {
            println!("{}", s.to_json_string());
            Ok(())
        }
    }
}

fn cmd_family(args: &FamilyArgs) -> Result<(), Error> {
    match &args.kind {
        FamilyKind::Spectraplex { n, seed, out } => {
            let a = match seed {
                Some(sd) => random_pd(*n, *sd),
                None => SymMatrix::identity(*n),
            };
            emit_instance(&families::make_spectraplex(&a)?, out)
        }
        FamilyKind::RankOne { n, xi, seed, out } => {
            use rand::{Rng, SeedableRng};
            let a = SymMatrix::identity(*n);
            if *xi <= 0.0 {
                return Err(Error::XiOutOfRange(*xi));
            }
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut v = DVector::from_fn(*n, |_, _| rng.gen_range(-1.0..1.0));
            v /= v.norm();
            v *= xi.sqrt(); // with A = I, xi = ||v||^2
            emit_instance(&families::make_rank_one(&a, &v)?, out)
        }
        FamilyKind::DiagBlocks { n, alpha, beta, out } => {
            emit_instance(&families::make_diag_blocks(*alpha, *beta, *n)?, out)
        }
        FamilyKind::Scp { n, k, out } => emit_instance(&families::make_scp(*n, *k)?, out),
        FamilyKind::CentralSection { n, seed, out } => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let dense = DMatrix::from_fn(*n, *n, |_, _| rng.gen_range(-1.0..1.0));
            let m = SymMatrix::from_dense_symmetrize(&dense);
            emit_instance(&families::make_central_section(&m)?, out)
        }
    }
}

fn cmd_mc(args: &McArgs) -> Result<(), Error> {
    let t0 = Instant::now();
    let s = load_instance(&args.input)?;
    let est = mc_volume_rejection(&s, args.samples, args.seed)?;
    eprintln!("sampling time: {:.3}s", t0.elapsed().as_secs_f64());
    if args.json {
        println!("{}", serde_json::to_string_pretty(&est).expect("serialization"));
    } else {
        println!(
            "mc log volume (frobenius) = {:.9e} +/- {:.3e}",
            est.log_volume, est.std_error_log
        );
        println!("accepted {} of {}", est.samples_accepted, est.samples_total);
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<(), Error> {
    let s = load_instance(&args.input)?;
    let center = analytic_center(&s, &SolverOptions::default())?;
    let formula = approx_log_volume(&s, &center, MeasureConvention::Frobenius)?;
    let est = mc_volume_rejection(&s, args.samples, args.seed)?;
    let gap = formula.log_volume - est.log_volume;
    if args.json {
        #[derive(Serialize)]
        struct CompareJson<'a> {
            formula_log_volume: f64,
            mc: &'a MCEstimate,
            gap_log: f64,
            gap_in_std_errors: f64,
        }
        let body = CompareJson {
            formula_log_volume: formula.log_volume,
            mc: &est,
            gap_log: gap,
            gap_in_std_errors: gap / est.std_error_log,
        };
        println!("{}", serde_json::to_string_pretty(&body).expect("serialization"));
    } else {
        println!("formula log volume (frobenius) = {:.9e}", formula.log_volume);
        println!(
            "mc      log volume (frobenius) = {:.9e} +/- {:.3e}",
            est.log_volume, est.std_error_log
        );
        println!("gap = {:.6e} nats ({:.2} SE)", gap, gap / est.std_error_log);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Center(a) => cmd_center(a),
        Command::Volume(a) => cmd_volume(a),
        Command::Check(a) => cmd_check(a),
        Command::Family(a) => cmd_family(a),
        Command::Mc(a) => cmd_mc(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
