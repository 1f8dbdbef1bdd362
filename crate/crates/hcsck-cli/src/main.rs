mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hcsck::checks::{self, Check};
use hcsck::grid::TorusGrid;
use hcsck::higgs::{complex_mm_residual, random_solution, HiggsField, HiggsFile};
use hcsck::hk_torus::{hk_energy, solve_real_mm, HKState, SolveOptions};
use hcsck::invariant1d::{solve_inv1d, FMode, Inv1DOptions, Inv1DProblem, Reduction};
use hcsck::potentials::SymplecticPotential;
use hcsck::ruled::{solve_ruled, RuledOptions, Variant};
use hcsck::spectral::C64;
use hcsck::toric::{
    donaldson_functional, futaki_constant, futaki_vector, stability_probe, BoundaryMeasure,
    DelzantPolytope, PLConvexFn, PolytopeFile,
};
use serde::Serialize;
use serde_json::json;

use report::{fmt_f64, to_json, Report};

#[derive(Parser)]
#[command(
    name = "hcsck",
    version,
    about = "Numerical checks and solvers for HcscK moment-map equations"
)]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral identities on seeded random admissible matrices.
    SpectralCheck(SpectralArgs),
    /// Newton solve of the real moment map on the torus.
    TorusSolve(TorusArgs),
    /// Translation-invariant reduction in one variable.
    Inv1d(Inv1dArgs),
    /// Ruled-surface profile equation.
    RuledSolve(RuledArgs),
    /// Donaldson–Futaki functional of a Delzant polygon.
    ToricFutaki(ToricArgs),
    /// Scalar curvature across the Legendre transform.
    LegendreCheck(LegendreArgs),
}

#[derive(Args, Serialize)]
struct SpectralArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct TorusArgs {
    #[arg(long, default_value_t = 16)]
    grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
    /// Higgs field file; a seeded random solution is used when absent.
    #[arg(long = "xi-file")]
    xi_file: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sup of the random Higgs field entries.
    #[arg(long, default_value_t = 0.15)]
    amplitude: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ReductionArg {
    Exact,
    Literal,
}

#[derive(Args, Serialize)]
struct Inv1dArgs {
    #[arg(long = "c-re", allow_hyphen_values = true)]
    c_re: f64,
    #[arg(long = "c-im", default_value_t = 0.0, allow_hyphen_values = true)]
    c_im: f64,
    /// JSON list of `{k, re, im}` modes of F; F ≡ 0 when absent.
    #[arg(long = "F-modes")]
    f_modes: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, value_enum, default_value_t = ReductionArg::Exact)]
    reduction: ReductionArg,
    /// CSV output; a JSON sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum VariantArg {
    Standard,
    Norm,
}

#[derive(Args, Serialize)]
struct RuledArgs {
    #[arg(long)]
    m: f64,
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 40)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MeasureArg {
    InverseSquareNorm,
    InverseNorm,
}

#[derive(Args, Serialize)]
struct ToricArgs {
    #[arg(long)]
    polytope: PathBuf,
    #[arg(long = "probe-samples", default_value_t = 16)]
    probe_samples: usize,
    /// Piecewise-linear convex test function `{ "pieces": [{a, b}…] }`.
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MeasureArg::InverseSquareNorm)]
    measure: MeasureArg,
}

#[derive(Args, Serialize)]
struct LegendreArgs {
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[arg(long)]
    seed: u64,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        let no_convergence = e.chain().any(|c| {
            matches!(
                c.downcast_ref::<hcsck::Error>(),
                Some(hcsck::Error::NoConvergence(_))
            )
        });
        if no_convergence {
            Failure::Solver(e)
        } else {
            Failure::Config(e)
        }
    }
}

impl From<hcsck::Error> for Failure {
    fn from(e: hcsck::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit<C: Serialize, R: Serialize>(
    dest: &Option<PathBuf>,
    config: C,
    results: R,
    checks: Vec<Check>,
) -> Result<bool, Failure> {
    let pass = checks::all_pass(&checks);
    let text = to_json(&Report {
        config,
        results,
        checks,
    })?;
    match dest {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    Ok(pass)
}

fn spectral_check(a: SpectralArgs, dest: &Option<PathBuf>) -> Result<bool, Failure> {
    let checks = checks::spectral_suite(a.trials, a.seed)?;
    let results = json!({ "trials": a.trials, "identities": checks.len() });
    emit(dest, a, results, checks)
}

fn torus_solve(a: TorusArgs, dest: &Option<PathBuf>) -> Result<bool, Failure> {
    let xi = match (&a.xi_file, a.seed) {
        (Some(path), _) => HiggsField::from_file(&read_json::<HiggsFile>(path)?)?,
        (None, Some(seed)) => random_solution(TorusGrid::square(a.grid)?, seed, 3, a.amplitude)?,
        (None, None) => {
            return Err(Failure::Config(anyhow::anyhow!(
                "--seed is required without --xi-file"
            )))
        }
    };
    let grid = xi.grid();
    let opts = SolveOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        ..Default::default()
    };
    let sol = solve_real_mm(&xi, &SymplecticPotential::flat(grid), &opts)?;
    if let Some(out) = &a.out {
        write_file(out, &to_json(&sol.potential.to_json())?)?;
    }
    let energy = hk_energy(&HKState::new(sol.potential.clone(), xi.clone())?)?;
    let checks = vec![
        Check::below(
            "complex moment map residual",
            complex_mm_residual(&xi).sup_norm(),
            1e-10,
        ),
        Check::below("real moment map residual", sol.report.residual_sup, a.tol),
        Check::at_least(
            "admissibility margin",
            sol.report.admissibility_min_margin,
            0.0,
        ),
    ];
    let results = json!({ "grid": [grid.n1, grid.n2], "energy": energy, "report": sol.report });
    emit(dest, a, results, checks)
}

fn inv1d(a: Inv1dArgs, dest: &Option<PathBuf>) -> Result<bool, Failure> {
    let c = C64::new(a.c_re, a.c_im);
    let p = match &a.f_modes {
        Some(path) => Inv1DProblem::from_modes(c, &read_json::<Vec<FMode>>(path)?, a.n)?,
        None => Inv1DProblem::new(c, vec![C64::new(0.0, 0.0); a.n])?,
    };
    let reduction = match a.reduction {
        ReductionArg::Exact => Reduction::Exact,
        ReductionArg::Literal => Reduction::Literal,
    };
    let sol = solve_inv1d(
        &p,
        &Inv1DOptions {
            reduction,
            ..Default::default()
        },
    )?;
    let sidecar = json!({ "k": sol.k, "residual_sup": sol.residual_sup, "bounds": sol.bounds, "scan": sol.scan });
    if let Some(out) = &a.out {
        let mut w =
            csv::Writer::from_path(out).with_context(|| format!("writing {}", out.display()))?;
        w.write_record(["y1", "phi", "F_re", "F_im"])
            .context("writing csv")?;
        for (i, (phi, f)) in sol.phi.iter().zip(&p.f).enumerate() {
            let y = i as f64 / p.n() as f64;
            w.write_record([fmt_f64(y), fmt_f64(*phi), fmt_f64(f.re), fmt_f64(f.im)])
                .context("writing csv")?;
        }
        w.flush().context("writing csv")?;
        write_file(&out.with_extension("json"), &to_json(&sidecar)?)?;
    }
    let checks = vec![
        Check::below("pointwise residual", sol.residual_sup, 1e-10),
        Check::flag("a priori bounds hold", sol.bounds.all_ok()),
    ];
    emit(dest, a, sidecar, checks)
}

fn ruled_solve(a: RuledArgs, dest: &Option<PathBuf>) -> Result<bool, Failure> {
    let variant = match a.variant {
        VariantArg::Standard => Variant::Standard,
        VariantArg::Norm => Variant::Norm,
    };
    let opts = RuledOptions {
        nodes: a.nodes,
        tol: a.tol,
        max_iter: a.max_iter,
        variant,
        ..Default::default()
    };
    let sol = solve_ruled(a.m, &opts)?;
    let samples: Vec<[f64; 2]> = (0..=64)
        .map(|i| i as f64 / 64.0)
        .map(|l| [l, sol.profile.phi(l)])
        .collect();
    let solution = json!({
        "m": a.m,
        "c": sol.c,
        "g_coeffs": sol.profile.g_coeffs(),
        "residual_sup": sol.residual_sup,
        "phi_samples": samples,
    });
    if let Some(out) = &a.out {
        write_file(out, &to_json(&solution)?)?;
    }
    let checks = vec![
        Check::below("residual", sol.residual_sup, a.tol),
        Check::flag("g is positive", sol.min_g() > 0.0),
        Check::flag("c is positive", sol.c > 0.0),
        Check::flag("c within m^2.5 of the leading term", sol.within_radius()),
    ];
    let results = json!({
        "solution": solution,
        "iterations": sol.iterations,
        "residual_trace": sol.residual_trace,
        "min_g": sol.min_g(),
    });
    emit(dest, a, results, checks)
}

fn toric_futaki(a: ToricArgs, dest: &Option<PathBuf>) -> Result<bool, Failure> {
    let p = DelzantPolytope::from_file(&read_json::<PolytopeFile>(&a.polytope)?)?;
    let measure = match a.measure {
        MeasureArg::InverseSquareNorm => BoundaryMeasure::InverseSquareNorm,
        MeasureArg::InverseNorm => BoundaryMeasure::InverseNorm,
    };
    if a.probe_samples == 0 {
        return Err(Failure::Config(anyhow::anyhow!(
            "--probe-samples must be positive"
        )));
    }
    let c = futaki_constant(&p, measure);
    let probe = stability_probe(&p, measure, a.probe_samples);
    let mut results = json!({
        "C": c,
        "futaki_vector": futaki_vector(&p, measure),
        "probe_min": probe.min,
        "probe_argmin": { "a": probe.argmin_a, "b": probe.argmin_b },
        "probe_evaluated": probe.evaluated,
        "measure": measure,
        "vertices": p.vertices(),
    });
    if let Some(path) = &a.f {
        let f: PLConvexFn = read_json(path)?;
        if f.pieces.is_empty() {
            return Err(Failure::Config(anyhow::anyhow!(
                "the test function has no pieces"
            )));
        }
        results["L_f"] = json!(donaldson_functional(&p, &f, c, measure));
    }
    let one = donaldson_functional(&p, &PLConvexFn::affine([0.0, 0.0], 1.0), c, measure);
    let checks = vec![
        Check::below("normalization on constants", one.abs(), 1e-12),
        Check::flag("no destabilizing crease found", !probe.destabilized),
    ];
    emit(dest, a, results, checks)
}

fn legendre_check(a: LegendreArgs, dest: &Option<PathBuf>) -> Result<bool, Failure> {
    let checks = checks::legendre_suite(a.grid, a.seed)?;
    let results = json!({ "grid": a.grid });
    emit(dest, a, results, checks)
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HCSCK_THREADS") {
        let n: usize = v
            .parse()
            .with_context(|| format!("HCSCK_THREADS={v} is not a count"))?;
        if n == 0 {
            bail!("HCSCK_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    configure_threads()?;
    let dest = cli.report;
    match cli.command {
        Command::SpectralCheck(a) => spectral_check(a, &dest),
        Command::TorusSolve(a) => torus_solve(a, &dest),
        Command::Inv1d(a) => inv1d(a, &dest),
        Command::RuledSolve(a) => ruled_solve(a, &dest),
        Command::ToricFutaki(a) => toric_futaki(a, &dest),
        Command::LegendreCheck(a) => legendre_check(a, &dest),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
