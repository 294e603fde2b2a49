//! `cdr`: convergence studies, config-file solves, and M-matrix checks for
//! the compact convection-diffusion-reaction solvers.
//!
//! Exit codes: 0 success, 2 config error, 3 solver failure, 4 golden
//! mismatch (with `--assert-golden`).

use cdr_core::coefficients::Integrator;
use cdr_core::config::{load_config, parse_integrator, parse_tau_rule};
use cdr_core::error::Error;
use cdr_core::problems::{example_settings, TauRule};
use cdr_core::study::{
    assert_golden, check_example, emit, golden_rows, run_study, ConvergenceReport, EmitFormat,
    StudyConfig,
};
use cdr_core::system::SolveConfig;
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cdr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study on one of the built-in problems (1-8).
    Run(RunArgs),
    /// Solve a problem described by a TOML config file.
    Solve(SolveArgs),
    /// Assemble one built-in problem and report its M-matrix diagnostics.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in problem number (1-8).
    #[arg(long)]
    example: u8,
    /// Mesh sizes: "2^-k:3..7" or a comma list like "0.125,0.0625".
    #[arg(long)]
    h: String,
    /// Time integrator for unsteady problems (cn | bdf3 | bdf4).
    #[arg(long)]
    scheme: Option<String>,
    /// Time-step rule: ratio:R | quad:C | fixed:V | table.
    #[arg(long)]
    tau: Option<String>,
    /// Operator setting column (1-based, per example).
    #[arg(long)]
    setting: Option<usize>,
    /// direct | bicgstab[:tol] | gmres[:tol]
    #[arg(long)]
    solver: Option<String>,
    #[arg(long, default_value = "md")]
    format: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Compare against the recorded reference values; mismatch exits 4.
    #[arg(long)]
    assert_golden: bool,
    /// Write per-step diagnostics (JSON lines) for the finest grid of an
    /// unsteady run.
    #[arg(long)]
    diag: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "md")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    example: u8,
    /// Mesh size, e.g. 0.03125 or 2^-5.
    #[arg(long)]
    h: String,
    /// Export the assembled matrix in Matrix Market format.
    #[arg(long)]
    export_matrix: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run(args),
        Command::Solve(args) => solve(args),
        Command::Check(args) => check(args),
    };
    match code {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(classify_error(&e))
        }
    }
}

fn classify_error(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Syntax { .. }
        | Error::UnknownIdentifier { .. }
        | Error::MissingVariable(_)
        | Error::InvalidExtent { .. }
        | Error::InvalidCount(_)
        | Error::MissingExactSolution
        | Error::NonIntegralStartupRatio(_)
        | Error::NonIntegralStepCount { .. } => 2,
        _ => 3,
    }
}

fn parse_h_list(text: &str) -> Result<Vec<f64>, Error> {
    let bad = |t: &str| Error::Config(format!("mesh list `{t}`: expected 2^-k:k1..k2 or comma-separated values"));
    if let Some(range) = text.strip_prefix("2^-k:") {
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| bad(text))?;
        let a: u32 = a.parse().map_err(|_| bad(text))?;
        let b: u32 = b.parse().map_err(|_| bad(text))?;
        if b < a || b > 24 {
            return Err(bad(text));
        }
        return Ok((a..=b).map(|k| (0.5f64).powi(k as i32)).collect());
    }
    text.split(',')
        .map(|t| parse_h_single(t.trim()))
        .collect()
}

fn parse_h_single(t: &str) -> Result<f64, Error> {
    if let Some(k) = t.strip_prefix("2^-") {
        let k: i32 = k
            .parse()
            .map_err(|_| Error::Config(format!("mesh size `{t}`")))?;
        return Ok((0.5f64).powi(k));
    }
    t.parse()
        .map_err(|_| Error::Config(format!("mesh size `{t}`")))
}

fn n1_of(h: f64, l1: f64, l2: f64) -> Result<usize, Error> {
    let n = (l2 - l1) / h;
    let rounded = n.round();
    if rounded < 2.0 || (n - rounded).abs() > 1e-9 * rounded {
        return Err(Error::Config(format!(
            "h = {h} does not divide the domain extent {} into whole cells",
            l2 - l1
        )));
    }
    Ok(rounded as usize)
}

fn format_of(text: &str) -> Result<EmitFormat, Error> {
    Ok(match text {
        "csv" => EmitFormat::Csv,
        "md" | "markdown" => EmitFormat::Markdown,
        "jsonl" => EmitFormat::JsonLines,
        other => return Err(Error::Config(format!("unknown format `{other}`"))),
    })
}

fn solver_of(text: &str) -> Result<SolveConfig, Error> {
    let (method, tol) = match text.split_once(':') {
        Some((m, t)) => {
            let tol: f64 = t
                .parse()
                .map_err(|_| Error::Config(format!("solver tolerance `{t}`")))?;
            (m, Some(tol))
        }
        None => (text, None),
    };
    cdr_core::config::parse_solver(method, tol)
}

fn write_report(
    report: &ConvergenceReport,
    format: EmitFormat,
    out: &Option<PathBuf>,
) -> Result<(), Error> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            emit(report, format, &mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            emit(report, format, stdout.lock())?;
        }
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<ExitCode, Error> {
    if !(1..=8).contains(&args.example) {
        return Err(Error::Config("examples are numbered 1 through 8".into()));
    }
    let mut problem = cdr_core::example(args.example);
    let settings = example_settings(args.example);
    let setting_idx = match args.setting {
        Some(s) => {
            if s == 0 || s > settings.list.len() {
                return Err(Error::Config(format!(
                    "setting {s} out of range 1..={}",
                    settings.list.len()
                )));
            }
            s - 1
        }
        None => settings.default,
    };
    problem.setting = settings.list[setting_idx];

    let scheme: Option<Integrator> = match &args.scheme {
        Some(s) => Some(parse_integrator(s)?),
        None => cdr_core::problems::example_default_scheme(args.example),
    };
    let tau_rule: Option<TauRule> = args.tau.as_deref().map(parse_tau_rule).transpose()?;
    let solver = args.solver.as_deref().map(solver_of).transpose()?;

    let n1_list = parse_h_list(&args.h)?
        .into_iter()
        .map(|h| n1_of(h, problem.l1, problem.l2))
        .collect::<Result<Vec<_>, _>>()?;

    let cfg = StudyConfig {
        scheme,
        tau_rule,
        setting: Some(problem.setting),
        solver,
        fixed_point: None,
    };
    let report = run_study(&problem, &n1_list, &cfg);
    write_report(&report, format_of(&args.format)?, &args.out)?;

    if let Some(diag_path) = &args.diag {
        write_diagnostics(&problem, *n1_list.last().unwrap(), &cfg, diag_path)?;
    }

    if let Some(failure) = &report.failure {
        return Err(Error::Config(format!("study incomplete: {failure}")));
    }
    if args.assert_golden {
        let golden = golden_rows(args.example, report_scheme(&report), setting_idx)
            .ok_or_else(|| {
                Error::Config("no reference rows recorded for this combination".into())
            })?;
        let mismatches = assert_golden(&report, golden);
        if !mismatches.is_empty() {
            for m in &mismatches {
                eprintln!("golden mismatch: {m}");
            }
            return Ok(ExitCode::from(4));
        }
        eprintln!("golden check passed ({} rows compared)", report.rows.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn report_scheme(report: &ConvergenceReport) -> Option<Integrator> {
    report.scheme.as_deref().and_then(|s| parse_integrator(s).ok())
}

fn write_diagnostics(
    problem: &cdr_core::Problem,
    n1: usize,
    cfg: &StudyConfig,
    path: &PathBuf,
) -> Result<(), Error> {
    use cdr_core::timestep::IntegratorPlan;
    if !problem.kind.is_unsteady() {
        return Err(Error::Config("--diag applies to unsteady problems".into()));
    }
    let grid = cdr_core::make_grid(problem.dim, problem.l1, problem.l2, n1)?;
    let scheme = cfg.scheme.unwrap_or(Integrator::Bdf3);
    let tau_rule = cfg.tau_rule.unwrap_or(TauRule::Ratio(1.0));
    let plan = IntegratorPlan { scheme, tau_rule };
    let solver = cfg.solver.unwrap_or_else(|| SolveConfig::auto(&grid));
    let diags = if problem.kind.is_nonlinear() {
        cdr_core::nonlinear::march_nonlinear(
            problem,
            &grid,
            &plan,
            problem.t_end,
            &cdr_core::nonlinear::FixedPointConfig::unsteady(problem.dim),
            &solver,
        )?
        .1
    } else {
        cdr_core::timestep::march(problem, &grid, &plan, problem.t_end, &solver)?.1
    };
    let mut file = std::fs::File::create(path)?;
    for d in &diags {
        writeln!(
            file,
            "{}",
            serde_json_line(d).map_err(Error::Io)?
        )?;
    }
    Ok(())
}

fn serde_json_line(d: &cdr_core::timestep::StepDiag) -> std::io::Result<String> {
    Ok(format!(
        "{{\"step\":{},\"t\":{},\"solver_iterations\":{},\"residual\":{:e},\"interior_min\":{:e},\"interior_max\":{:e}}}",
        d.step, d.t, d.solver_iterations, d.residual, d.interior_min, d.interior_max
    ))
}

fn solve(args: SolveArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let loaded = load_config(&text)?;
    let cfg = StudyConfig {
        scheme: loaded.scheme,
        tau_rule: loaded.tau_rule,
        setting: Some(loaded.problem.setting),
        solver: loaded.solver,
        fixed_point: None,
    };
    let report = run_study(&loaded.problem, &loaded.n1_list, &cfg);
    write_report(&report, format_of(&args.format)?, &args.out)?;
    if let Some(failure) = &report.failure {
        return Err(Error::Config(format!("study incomplete: {failure}")));
    }
    Ok(ExitCode::SUCCESS)
}

fn check(args: CheckArgs) -> Result<ExitCode, Error> {
    if !(1..=8).contains(&args.example) {
        return Err(Error::Config("examples are numbered 1 through 8".into()));
    }
    let problem = cdr_core::example(args.example);
    let h = parse_h_single(&args.h)?;
    let n1 = n1_of(h, problem.l1, problem.l2)?;
    let report = check_example(&problem, n1)?;
    println!("sign condition:     {}", if report.sign_ok { "ok" } else { "VIOLATED" });
    println!("row-sum condition:  {}", if report.rowsum_ok { "ok" } else { "VIOLATED" });
    println!("min diagonal:       {:.6e}", report.min_diagonal);
    println!("max off-diagonal:   {:.6e}", report.max_offdiagonal);
    println!("min row sum:        {:.6e}", report.min_rowsum);
    println!("sign violations:    {}", report.sign_violations);
    println!("row-sum violations: {}", report.rowsum_violations);
    if !report.violating.is_empty() {
        println!("violating nodes (first {}):", report.violating.len());
        for n in &report.violating {
            println!("  ({}, {}, {})", n.i, n.j, n.k);
        }
    }
    if let Some(path) = &args.export_matrix {
        export_matrix(&problem, n1, path)?;
        println!("matrix written to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn export_matrix(
    problem: &cdr_core::Problem,
    n1: usize,
    path: &PathBuf,
) -> Result<(), Error> {
    use cdr_core::coefficients::bundle_steady;
    use cdr_core::system::assemble;
    let grid = cdr_core::make_grid(problem.dim, problem.l1, problem.l2, n1)?;
    let sys = match problem.kind {
        cdr_core::Kind::LinearSteady => {
            let bundle = bundle_steady(problem, &grid, None)?;
            assemble(&grid, &bundle, &|p| problem.g(p, 0.0))?
        }
        _ => {
            let iterate = cdr_core::grid::Field::zeros(&grid);
            match problem.kind {
                cdr_core::Kind::NonlinearSteady => {
                    let bundle = bundle_steady(problem, &grid, Some(&iterate))?;
                    assemble(&grid, &bundle, &|p| problem.g(p, 0.0))?
                }
                _ => {
                    return Err(Error::Config(
                        "matrix export currently covers steady problems".into(),
                    ))
                }
            }
        }
    };
    let file = std::fs::File::create(path)?;
    sys.write_matrix_market(std::io::BufWriter::new(file))?;
    Ok(())
}
