//! Fixed-point (frozen-coefficient) outer iteration wrapping the steady
//! solve and each implicit time step for the nonlinear problem kinds.

use crate::coefficients::{bundle_steady_with_phi, bundle_unsteady_with_phi, Integrator, PhiCache, TimeSliceContext};
use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::problems::Problem;
use crate::system::{assemble, solve_with_guess, SolveConfig, SolveStats};
use crate::timestep::{compose_field, diag_of, integral_steps, startup_schedule, IntegratorPlan, StepDiag};
use std::io::Write;

/// Outer-iteration budget. Early stopping is available but off by default;
/// the reference studies run a fixed count (40 steady, 20 unsteady in 2D,
/// 40 unsteady in 3D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    pub max_iters: usize,
    pub early_stop_tol: Option<f64>,
}

impl FixedPointConfig {
    pub fn steady() -> Self {
        FixedPointConfig { max_iters: 40, early_stop_tol: None }
    }

    pub fn unsteady(dim: usize) -> Self {
        FixedPointConfig {
            max_iters: if dim == 2 { 20 } else { 40 },
            early_stop_tol: None,
        }
    }
}

/// Successive-difference record of one fixed-point run.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub diffs: Vec<f64>,
    pub solves: Vec<SolveStats>,
}

impl IterationTrace {
    /// Line-delimited JSON export, one record per iteration.
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for (k, (d, s)) in self.diffs.iter().zip(&self.solves).enumerate() {
            writeln!(
                w,
                "{}",
                serde_json::json!({
                    "iteration": k + 1,
                    "diff_linf": d,
                    "solver_iterations": s.iterations,
                    "residual": s.residual_inf,
                })
            )?;
        }
        Ok(())
    }

    fn warn_if_not_contracting(&self, context: &str) {
        let d = &self.diffs;
        if d.len() > 4 {
            // Ignore wiggle at the rounding floor once the iteration has
            // effectively converged.
            let floor = 1e-12 * d.iter().copied().fold(0.0, f64::max);
            let tail = &d[3..];
            if tail.windows(2).any(|w| w[1] > w[0] && w[1] > floor) {
                eprintln!(
                    "warning: fixed-point differences not monotone after iteration 3 ({context})"
                );
            }
        }
    }
}

/// Steady nonlinear solve: initial guess 0 in the interior, g on the
/// boundary; a fixed number of frozen-coefficient linear solves.
pub fn fixed_point_steady(
    problem: &Problem,
    grid: &GridSpec,
    fp: &FixedPointConfig,
    solve_cfg: &SolveConfig,
) -> Result<(Field, IterationTrace)> {
    if fp.max_iters == 0 {
        return Err(Error::Config("fixed-point iteration needs max_iters >= 1".into()));
    }
    // The initial guess is the zero field everywhere; Dirichlet data enters
    // through each linear solve, and from the first solve on the iterate
    // carries g on the boundary. Seeding the guess's boundary with g instead
    // would put an O(g/h) artificial gradient into the frozen coefficients
    // and can blow up strongly nonlinear cases.
    let mut iterate = Field::zeros(grid);
    let mut trace = IterationTrace::default();
    let mut prev: Option<Vec<f64>> = None;
    let phi = PhiCache::build(problem, grid, 0.0)?;
    for _k in 0..fp.max_iters {
        let bundle = bundle_steady_with_phi(problem, grid, Some(&iterate), Some(&phi))?;
        let sys = assemble(grid, &bundle, &|p| problem.g(p, 0.0))?;
        let (interior, stats) = solve_with_guess(&sys, solve_cfg, prev.as_deref())?;
        let next = compose_field(problem, grid, &interior, 0.0)?;
        trace.diffs.push(next.linf_diff(&iterate));
        trace.solves.push(stats);
        iterate = next;
        prev = Some(interior);
        if let Some(tol) = fp.early_stop_tol {
            if trace.diffs.last().copied().unwrap_or(f64::INFINITY) < tol {
                break;
            }
        }
    }
    trace.warn_if_not_contracting(&problem.name);
    Ok((iterate, trace))
}

/// One implicit time level of a nonlinear unsteady problem: inner
/// fixed-point loop at the frozen iterate, initial guess = previous level.
/// For CN the converged half level is extrapolated afterwards.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_step_unsteady(
    problem: &Problem,
    grid: &GridSpec,
    integrator: Integrator,
    tau: f64,
    level: usize,
    history: &[&Field],
    fp: &FixedPointConfig,
    solve_cfg: &SolveConfig,
) -> Result<(Field, IterationTrace)> {
    if history.len() < integrator.history_len() {
        return Err(Error::HistoryUnderflow {
            needed: integrator.history_len(),
            got: history.len(),
        });
    }
    let t_star = (level as f64 + integrator.target_offset()) * tau;
    let previous = history[history.len() - 1];
    let mut iterate = previous.clone();
    let mut trace = IterationTrace::default();
    let mut prev: Option<Vec<f64>> = None;
    let phi = PhiCache::build(problem, grid, t_star)?;
    for _k in 0..fp.max_iters {
        let ctx = TimeSliceContext {
            integrator,
            tau,
            level,
            history: history.to_vec(),
        };
        let bundle = bundle_unsteady_with_phi(problem, grid, &ctx, Some(&iterate), Some(&phi))?;
        let sys = assemble(grid, &bundle, &|p| problem.g(p, t_star))?;
        let (interior, stats) = solve_with_guess(&sys, solve_cfg, prev.as_deref())?;
        let next = compose_field(problem, grid, &interior, t_star)?;
        trace.diffs.push(next.linf_diff(&iterate));
        trace.solves.push(stats);
        iterate = next;
        prev = Some(interior);
        if let Some(tol) = fp.early_stop_tol {
            if trace.diffs.last().copied().unwrap_or(f64::INFINITY) < tol {
                break;
            }
        }
    }
    let result = match integrator {
        Integrator::Cn => {
            // The extrapolation acts on the whole field, boundary included;
            // later levels read these values as history.
            let mut next = iterate.clone();
            for (v, prev) in next.values.iter_mut().zip(&previous.values) {
                *v = 2.0 * *v - prev;
            }
            next
        }
        _ => iterate,
    };
    Ok((result, trace))
}

/// March a nonlinear unsteady problem to t_end: CN fixed-point startup with
/// tau = h/2 for the multistep history, then BDF fixed-point steps.
pub fn march_nonlinear(
    problem: &Problem,
    grid: &GridSpec,
    plan: &IntegratorPlan,
    t_end: f64,
    fp: &FixedPointConfig,
    solve_cfg: &SolveConfig,
) -> Result<(Field, Vec<StepDiag>)> {
    let tau = plan.tau(problem, grid.h)?;
    let n2 = integral_steps(t_end, tau)?;
    let mut diags = Vec::new();

    let u0 = {
        let mut f = Field::zeros(grid);
        for node in grid.nodes() {
            let p = grid.point(node);
            let v = match crate::grid::classify(node, grid)? {
                crate::grid::NodeClass::Boundary => problem.g(p, 0.0)?,
                crate::grid::NodeClass::Interior => problem.u0(p)?,
            };
            f.set(grid, node, v);
        }
        f
    };

    let push_diag = |diags: &mut Vec<StepDiag>, t: f64, trace: &IterationTrace, field: &Field| {
        if let Some(stats) = trace.solves.last() {
            let step = diags.len() + 1;
            diags.push(diag_of(step, t, stats, &field.values));
        }
    };

    match plan.scheme {
        Integrator::Cn => {
            let mut u = u0;
            for n in 0..n2 {
                let (next, trace) = fixed_point_step_unsteady(
                    problem,
                    grid,
                    Integrator::Cn,
                    tau,
                    n,
                    &[&u],
                    fp,
                    solve_cfg,
                )?;
                push_diag(&mut diags, (n + 1) as f64 * tau, &trace, &next);
                u = next;
            }
            Ok((u, diags))
        }
        Integrator::Bdf3 | Integrator::Bdf4 => {
            let needed = plan.scheme.history_len() - 1;
            if n2 < needed + 1 {
                return Err(Error::Config(format!(
                    "horizon of {n2} steps is too short for {}",
                    plan.scheme.name()
                )));
            }
            let q = startup_schedule(tau, grid.h)?;
            let tau_start = grid.h / 2.0;
            let mut history: Vec<Field> = vec![u0];
            let mut u = history[0].clone();
            for m in 0..needed {
                for sub in 0..q {
                    let level = m * q + sub;
                    let (next, trace) = fixed_point_step_unsteady(
                        problem,
                        grid,
                        Integrator::Cn,
                        tau_start,
                        level,
                        &[&u],
                        fp,
                        solve_cfg,
                    )?;
                    push_diag(&mut diags, (level + 1) as f64 * tau_start, &trace, &next);
                    u = next;
                }
                history.push(u.clone());
            }
            for n in 0..(n2 - needed) {
                let refs: Vec<&Field> = history.iter().collect();
                let (next, trace) = fixed_point_step_unsteady(
                    problem,
                    grid,
                    plan.scheme,
                    tau,
                    n,
                    &refs,
                    fp,
                    solve_cfg,
                )?;
                let t_star = (n as f64 + plan.scheme.target_offset()) * tau;
                push_diag(&mut diags, t_star, &trace, &next);
                history.remove(0);
                history.push(next);
            }
            Ok((history.pop().unwrap(), diags))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::jet::Jet;
    use crate::problems::{
        example, BoundaryData, Coeff, CoeffSet, DerivMode, Exact, Kind, Source,
        TauRule, UCoeff,
    };
    use crate::coefficients::bundle_steady;
    use crate::study::l_inf_error;
    use std::sync::Arc;

    /// A linear problem dressed in nonlinear clothes: coefficients ignore u.
    fn disguised_linear() -> (Problem, Problem) {
        let kappa_val = 1.7;
        let lambda_val = 0.9;
        let linear = Problem {
            name: "plain-linear".into(),
            dim: 2,
            kind: Kind::LinearSteady,
            l1: 0.0,
            l2: 1.0,
            coeffs: CoeffSet::Linear {
                kappa: Coeff::Closed(Arc::new(move |_, _, _| Jet::constant(kappa_val))),
                alpha: Coeff::Closed(Arc::new(|_, _, _| Jet::constant(0.3))),
                beta: Coeff::Closed(Arc::new(|_, _, _| Jet::constant(-0.2))),
                gamma: None,
                lambda: Coeff::Closed(Arc::new(move |_, _, _| Jet::constant(lambda_val))),
            },
            source: Source::Manufactured,
            exact: Some(Exact::Closed {
                u: Arc::new(|p, _t, ord| {
                    let (x, y, _) = Jet::coords_ord(p, ord);
                    (x * 2.0).sin() * (y * 1.5).cos()
                }),
                u_t: Arc::new(|_, _, _| Jet::constant(0.0)),
            }),
            boundary: BoundaryData::FromExact,
            initial: None,
            deriv_mode: DerivMode::Fd,
            setting: Default::default(),
            t_end: 1.0,
            tau_table: vec![],
        };
        let nonlinear = Problem {
            name: "disguised-linear".into(),
            kind: Kind::NonlinearSteady,
            coeffs: CoeffSet::Nonlinear {
                kappa: UCoeff::Closed(Arc::new(move |_| Jet::constant(kappa_val))),
                kappa_u: UCoeff::Closed(Arc::new(|_| Jet::constant(0.0))),
                alpha: UCoeff::Closed(Arc::new(|_| Jet::constant(0.3))),
                beta: UCoeff::Closed(Arc::new(|_| Jet::constant(-0.2))),
                gamma: None,
                lambda: UCoeff::Closed(Arc::new(move |_| Jet::constant(lambda_val))),
            },
            ..linear.clone()
        };
        (linear, nonlinear)
    }

    #[test]
    fn frozen_linear_equivalence_bit_for_bit() {
        // With u-independent coefficients, iteration 1 solves exactly the
        // linear system; iterations 2.. must reproduce it bit-for-bit.
        let (linear, nonlinear) = disguised_linear();
        let grid = make_grid(2, 0.0, 1.0, 8).unwrap();
        let bundle = bundle_steady(&linear, &grid, None).unwrap();
        let sys = assemble(&grid, &bundle, &|p| linear.g(p, 0.0)).unwrap();
        let (direct, _) = crate::system::solve(&sys, &SolveConfig::direct()).unwrap();

        let fp = FixedPointConfig { max_iters: 5, early_stop_tol: None };
        let (field, trace) =
            fixed_point_steady(&nonlinear, &grid, &fp, &SolveConfig::direct()).unwrap();
        for node in grid.interior_nodes() {
            let idx = crate::grid::lex_index(node, &grid).unwrap();
            assert_eq!(field.at(&grid, node), direct[idx], "node {node:?}");
        }
        // Iterations beyond the first change nothing.
        assert!(trace.diffs[1] <= 1e-12);
        assert!(trace.diffs[2] <= 1e-12);
    }

    #[test]
    fn trace_has_iteration_budget_length() {
        let (_, nonlinear) = disguised_linear();
        let grid = make_grid(2, 0.0, 1.0, 4).unwrap();
        let fp = FixedPointConfig { max_iters: 7, early_stop_tol: None };
        let (_, trace) =
            fixed_point_steady(&nonlinear, &grid, &fp, &SolveConfig::direct()).unwrap();
        assert_eq!(trace.diffs.len(), 7);
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }

    #[test]
    fn early_stop_cuts_iterations() {
        let (_, nonlinear) = disguised_linear();
        let grid = make_grid(2, 0.0, 1.0, 4).unwrap();
        let fp = FixedPointConfig { max_iters: 40, early_stop_tol: Some(1e-13) };
        let (_, trace) =
            fixed_point_steady(&nonlinear, &grid, &fp, &SolveConfig::direct()).unwrap();
        assert!(trace.diffs.len() <= 3, "stopped after {} iterations", trace.diffs.len());
    }

    #[test]
    fn example3_converges_at_coarse_h() {
        // Example 3, Setting 2, h = 1/2^4: reference error 1.8267E-04.
        let p = example(3);
        let grid = make_grid(2, 0.0, 1.0, 16).unwrap();
        let (field, trace) = fixed_point_steady(
            &p,
            &grid,
            &FixedPointConfig::steady(),
            &SolveConfig::direct(),
        )
        .unwrap();
        assert_eq!(trace.diffs.len(), 40);
        let err = l_inf_error(&field, &p, &grid, None).unwrap();
        let expect = 1.8267e-4;
        assert!((err - expect).abs() <= 0.05 * expect, "error {err} vs {expect}");
    }

    #[test]
    fn nonlinear_step_stationary_inner_iterations() {
        // A nonlinear problem held at a constant-in-time exact state: the
        // inner iterations go stationary after the first one.
        let p = {
            let mut p = example(4);
            // Freeze time: u = sin(2x)sin(2y) (no exp(t) factor) and make
            // the problem's exact solution time-independent.
            p.exact = Some(Exact::Closed {
                u: Arc::new(|pt, _t, ord| {
                    let (x, y, _) = Jet::coords_ord(pt, ord);
                    (x * 2.0).sin() * (y * 2.0).sin()
                }),
                u_t: Arc::new(|_, _, _| Jet::constant(0.0)),
            });
            p
        };
        let grid = make_grid(2, 0.0, 1.0, 8).unwrap();
        let u0 = Field::from_fn(&grid, |pt| p.exact_value(pt, 0.0).unwrap());
        let fp = FixedPointConfig { max_iters: 6, early_stop_tol: None };
        let (_, trace) = fixed_point_step_unsteady(
            &p,
            &grid,
            Integrator::Bdf3,
            0.125,
            0,
            &[&u0, &u0, &u0],
            &fp,
            &SolveConfig::direct(),
        )
        .unwrap();
        // After the solution settles, successive differences collapse.
        let last = trace.diffs.last().unwrap();
        assert!(*last < 1e-11, "diffs: {:?}", trace.diffs);
    }

    #[test]
    fn example8_coarse_golden_row() {
        // Example 8, BDF4, tau = h = 1/2^2: reference error 1.2255E-04
        // (10% tolerance: nonlinear iteration + startup sensitivity).
        let p = example(8);
        let grid = make_grid(3, 0.0, 1.0, 4).unwrap();
        let plan = IntegratorPlan {
            scheme: Integrator::Bdf4,
            tau_rule: TauRule::Ratio(1.0),
        };
        let (u, _) = march_nonlinear(
            &p,
            &grid,
            &plan,
            1.0,
            &FixedPointConfig::unsteady(3),
            &SolveConfig::direct(),
        )
        .unwrap();
        let err = l_inf_error(&u, &p, &grid, Some(1.0)).unwrap();
        let expect = 1.2255e-4;
        assert!((err - expect).abs() <= 0.10 * expect, "error {err} vs {expect}");
    }
}
