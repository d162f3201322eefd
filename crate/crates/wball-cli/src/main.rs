//! Command-line front end for the wball solver library.
//!
//! Four subcommands cover the library surface: `distance` computes exact
//! transport distances between discrete measures, `solve` runs the
//! worst-case expectation solver with certification, `certify` probes
//! objective growth for finiteness evidence, and `diverge` constructs an
//! explicit escaping-mass witness family.
//!
//! Every run prints one human-readable summary to standard output and can
//! emit a full JSON report with `--report <path>` (`-` writes the JSON to
//! standard output and moves the summary to standard error).
//!
//! Exit codes are a stable contract:
//! 0 success (and, for `solve`, certified), 2 bad input, 3 likely
//! unbounded, 4 solve finished but certification failed. Unexpected
//! internal failures exit 1.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use wball::finiteness::{certify_growth, geometric_radii, GrowthVerdict};
use wball::problem::MetricSection;
use wball::report::{OracleSummary, Outputs, Report, WitnessRow};
use wball::{
    build_divergence_sequence, certify, dual_bound, parse_inline_measure, solve_grid_lp,
    solve_primal, DiscreteMeasure, Error, GridSpec, MeasureFile, ProblemFile, SolverSection,
};

/// Lambda-grid refinement level used by `solve` for the dual bound.
const DUAL_REFINEMENTS: usize = 1;
/// Radii ladder probed by the growth check: three decades, thirteen rungs.
const GROWTH_LADDER: (f64, f64, usize) = (1.0, 1000.0, 13);

#[derive(Parser)]
#[command(
    name = "wball",
    version,
    about = "Worst-case expectations over transport balls around discrete measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct ReportArg {
    /// Write the full JSON report to this path (`-` for standard output).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact p-Wasserstein distance between two discrete measures.
    ///
    /// Measures are TOML files or inline `weight@c1,c2;weight@c1,c2`.
    Distance {
        a: String,
        b: String,
        /// Transport cost exponent p >= 1.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Ground metric: euclidean, q-norm, or weighted-euclidean.
        #[arg(long, default_value = "euclidean")]
        metric: String,
        /// Norm exponent for q-norm.
        #[arg(long)]
        q: Option<f64>,
        /// Comma-separated axis weights for weighted-euclidean.
        #[arg(long)]
        weights: Option<String>,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Maximize the objective over the ball described by a problem file.
    Solve {
        file: PathBuf,
        /// Search restarts (overrides the file's [solver] section).
        #[arg(long)]
        restarts: Option<usize>,
        /// Seed for the randomized search (overrides the file).
        #[arg(long)]
        seed: Option<u64>,
        /// Relative duality-gap tolerance for certification (overrides the file).
        #[arg(long)]
        gap_tol: Option<f64>,
        /// Also run the audit LP on a fixed grid and report its value.
        #[arg(long)]
        grid_check: bool,
        /// Points per axis for the audit grid (overrides the file).
        #[arg(long)]
        grid: Option<usize>,
        /// Search even when growth probing reports divergence evidence.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Probe objective growth at the cost exponent and just below it.
    Certify {
        file: PathBuf,
        /// Probe exponent (defaults to the instance's p; 0.9x also runs).
        #[arg(long)]
        p_probe: Option<f64>,
        /// Seed for shell sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        report: ReportArg,
    },
    /// Build the escaping-mass witness family for an instance.
    Diverge {
        file: PathBuf,
        /// Escape direction, comma-separated (defaults to the first axis).
        #[arg(long)]
        direction: Option<String>,
        /// Number of witness steps.
        #[arg(long = "K", default_value_t = 20)]
        steps: usize,
        #[command(flatten)]
        report: ReportArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(cli.command, started) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Input-shaped failures exit 2; anything unexpected exits 1.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Contract(_) | Error::IterationLimit(_) => 1,
        _ => 2,
    }
}

fn run(cmd: Cmd, started: Instant) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Distance {
            a,
            b,
            p,
            metric,
            q,
            weights,
            report,
        } => cmd_distance(&a, &b, p, &metric, q, weights.as_deref(), &report, started),
        Cmd::Solve {
            file,
            restarts,
            seed,
            gap_tol,
            grid_check,
            grid,
            force,
            report,
        } => cmd_solve(
            &file, restarts, seed, gap_tol, grid_check, grid, force, &report, started,
        ),
        Cmd::Certify {
            file,
            p_probe,
            seed,
            report,
        } => cmd_certify(&file, p_probe, seed, &report, started),
        Cmd::Diverge {
            file,
            direction,
            steps,
            report,
        } => cmd_diverge(&file, direction.as_deref(), steps, &report, started),
    }
}

/// Writes a line to standard output, tolerating closed pipes.
fn say(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

/// Prints the summary line, honoring `--report -` JSON-on-stdout mode.
fn emit(report: &Report, target: &ReportArg, summary: &str) -> Result<(), Error> {
    match &target.report {
        Some(path) if path.as_os_str() == "-" => {
            eprintln!("{summary}");
            say(&report.to_json());
        }
        Some(path) => {
            std::fs::write(path, report.to_json()).map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            say(summary);
        }
        None => say(summary),
    }
    Ok(())
}

fn parse_number_list(text: &str, what: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|c| {
            c.trim()
                .parse()
                .map_err(|_| Error::FileFormat(format!("bad {what} entry {c:?}")))
        })
        .collect()
}

fn load_measure(arg: &str) -> Result<DiscreteMeasure, Error> {
    if arg.contains('@') {
        parse_inline_measure(arg)
    } else {
        MeasureFile::load(Path::new(arg))?.to_measure()
    }
}

fn verdict_name(v: GrowthVerdict) -> &'static str {
    match v {
        GrowthVerdict::BoundedEvidence => "bounded-evidence",
        GrowthVerdict::DivergenceEvidence => "divergence-evidence",
        GrowthVerdict::Inconclusive => "inconclusive",
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_distance(
    a: &str,
    b: &str,
    p: f64,
    metric: &str,
    q: Option<f64>,
    weights: Option<&str>,
    report_arg: &ReportArg,
    started: Instant,
) -> Result<ExitCode, Error> {
    let mu = load_measure(a)?;
    let nu = load_measure(b)?;
    let weights = weights
        .map(|w| parse_number_list(w, "metric weight"))
        .transpose()?;
    let spec = MetricSection {
        kind: metric.to_string(),
        q,
        weights,
        p,
    }
    .to_spec()?;
    let plan = wball::solve_transport(&mu, &nu, &spec)?;
    let distance = plan.cost.max(0.0).powf(1.0 / spec.power());
    let mut summary = format!(
        "W_{} = {}  (cost {}, {} plan entries)",
        spec.power(),
        distance,
        plan.cost,
        plan.entries.len()
    );
    for (i, j, mass) in &plan.entries {
        summary.push_str(&format!("\n  {i} -> {j}  mass {mass}"));
    }
    let report = Report::new(
        "distance",
        Outputs::Distance {
            distance,
            cost: plan.cost,
            plan,
        },
    )
    .with_wall_time_ms(started.elapsed().as_millis() as u64);
    emit(&report, report_arg, &summary)?;
    Ok(ExitCode::SUCCESS)
}

fn growth_ladder() -> Result<Vec<f64>, Error> {
    let (lo, hi, count) = GROWTH_LADDER;
    geometric_radii(lo, hi, count)
}

fn echo_with_settings(file: &ProblemFile, settings: &SolverSection) -> ProblemFile {
    let mut echo = file.clone();
    echo.solver = Some(settings.clone());
    echo
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    path: &Path,
    restarts: Option<usize>,
    seed: Option<u64>,
    gap_tol: Option<f64>,
    grid_check: bool,
    grid: Option<usize>,
    force: bool,
    report_arg: &ReportArg,
    started: Instant,
) -> Result<ExitCode, Error> {
    let file = ProblemFile::load(path)?;
    let inst = file.to_instance()?;
    let mut settings = file.solver_settings();
    if let Some(r) = restarts {
        settings.restarts = r;
    }
    if let Some(s) = seed {
        settings.seed = s;
    }
    if let Some(t) = gap_tol {
        settings.gap_tol = t;
    }
    if let Some(g) = grid {
        settings.grid = g;
    }
    if settings.gap_tol < 0.0 || !settings.gap_tol.is_finite() {
        return Err(Error::Input("gap tolerance must be finite and >= 0".into()));
    }
    let echo = echo_with_settings(&file, &settings);

    let growth = certify_growth(
        &inst,
        inst.metric().power(),
        &growth_ladder()?,
        settings.seed,
    )?;
    if growth.verdict == GrowthVerdict::DivergenceEvidence && !force {
        let summary = format!(
            "solve: refused, likely unbounded (growth probe at p = {} found c ~= {:.3e} and a rising trend); use --force to search anyway",
            inst.metric().power(),
            growth.c_estimate,
        );
        let report = Report::new("solve", Outputs::Refused { growth })
            .with_seed(settings.seed)
            .with_instance(echo)
            .with_wall_time_ms(started.elapsed().as_millis() as u64);
        emit(&report, report_arg, &summary)?;
        return Ok(ExitCode::from(3));
    }

    let solve = solve_primal(&inst, settings.restarts, settings.seed)?;
    let dual = dual_bound(&inst, DUAL_REFINEMENTS, settings.seed)?;
    let solve = solve.with_dual(dual);
    // The file-level tolerance is relative; certification takes an absolute
    // gap, so scale by the bound's magnitude (floored at one).
    let abs_tol = settings.gap_tol * dual.abs().max(1.0);
    let certification = certify(&inst, &solve, abs_tol)?;

    let oracle = if grid_check {
        let spec = GridSpec::uniform(inst.dim(), settings.grid)?;
        let sol = solve_grid_lp(&inst, &spec)?;
        Some(OracleSummary::from_solution(settings.grid, &sol)?)
    } else {
        None
    };

    let mut summary = format!(
        "solve: value = {}  dual = {}  gap = {:.3e}  atoms = {}  certified = {}",
        solve.primal_value,
        dual,
        solve.gap.unwrap_or(f64::NAN),
        certification.atom_count,
        if certification.certified { "yes" } else { "no" },
    );
    if let Some(oracle) = &oracle {
        summary.push_str(&format!(
            "  grid value = {} ({} nonzeros)",
            oracle.value, oracle.nonzeros
        ));
    }
    let certified = certification.certified;
    let report = Report::new(
        "solve",
        Outputs::Solve {
            solve,
            certification,
            oracle,
            growth: Some(growth),
            forced: force,
        },
    )
    .with_seed(settings.seed)
    .with_instance(echo)
    .with_wall_time_ms(started.elapsed().as_millis() as u64);
    emit(&report, report_arg, &summary)?;
    Ok(if certified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(4)
    })
}

fn cmd_certify(
    path: &Path,
    p_probe: Option<f64>,
    seed: u64,
    report_arg: &ReportArg,
    started: Instant,
) -> Result<ExitCode, Error> {
    let file = ProblemFile::load(path)?;
    let inst = file.to_instance()?;
    let base = p_probe.unwrap_or_else(|| inst.metric().power());
    let ladder = growth_ladder()?;
    let at_exponent = certify_growth(&inst, base, &ladder, seed)?;
    let at_attainment_probe = certify_growth(&inst, 0.9 * base, &ladder, seed)?;
    let summary = format!(
        "certify: growth at p = {} -> {} (c ~= {:.3e}); at p' = {} -> {}",
        base,
        verdict_name(at_exponent.verdict),
        at_exponent.c_estimate,
        0.9 * base,
        verdict_name(at_attainment_probe.verdict),
    );
    let divergent = at_exponent.verdict == GrowthVerdict::DivergenceEvidence;
    let report = Report::new(
        "certify",
        Outputs::Certify {
            at_exponent,
            at_attainment_probe,
        },
    )
    .with_seed(seed)
    .with_instance(file)
    .with_wall_time_ms(started.elapsed().as_millis() as u64);
    emit(&report, report_arg, &summary)?;
    Ok(if divergent {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_diverge(
    path: &Path,
    direction: Option<&str>,
    steps: usize,
    report_arg: &ReportArg,
    started: Instant,
) -> Result<ExitCode, Error> {
    let file = ProblemFile::load(path)?;
    let inst = file.to_instance()?;
    let direction = match direction {
        Some(text) => parse_number_list(text, "direction")?,
        None => {
            let mut d = vec![0.0; inst.dim()];
            d[0] = 1.0;
            d
        }
    };
    let witnesses = build_divergence_sequence(&inst, &direction, steps)?;
    let rows: Vec<WitnessRow> = witnesses.iter().map(WitnessRow::from_witness).collect();
    let mut summary = String::from("   k       eps_k          objective        W_check");
    for row in &rows {
        summary.push_str(&format!(
            "\n  {:2}  {:.6e}  {:16.8e}  {:.9}",
            row.step, row.shifted_mass, row.objective_value, row.verified_distance
        ));
    }
    summary.push_str(&format!(
        "\ndiverge: {} witnesses along {:?}, objective reached {:.6e}",
        rows.len(),
        direction,
        rows.last().map(|r| r.objective_value).unwrap_or(f64::NAN),
    ));
    let report = Report::new("diverge", Outputs::Diverge { witnesses: rows })
        .with_instance(file)
        .with_wall_time_ms(started.elapsed().as_millis() as u64);
    emit(&report, report_arg, &summary)?;
    Ok(ExitCode::SUCCESS)
}
