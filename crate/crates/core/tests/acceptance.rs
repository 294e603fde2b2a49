//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (run with `cargo test --test acceptance -- --nocapture` to see all
//! of them). The criteria compare against the reference convergence tables
//! at desk scale and run the property suites that hold independently of
//! those tables.

use cdr_core::coefficients::{bundle_steady, CoeffSlice, Integrator};
use cdr_core::grid::{make_grid, Field};
use cdr_core::problems::{example, example_settings, TauRule};
use cdr_core::stencil2d::{self, StencilInput2};
use cdr_core::stencil3d::{self, StencilInput3};
use cdr_core::study::{run_study, StudyConfig};
use cdr_core::system::{assemble, check_m_matrix, SolveConfig};
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::Instant;

/// The criteria are timed against wall-clock budgets, so they run one at a
/// time regardless of the test harness thread count.
fn serial() -> MutexGuard<'static, ()> {
    static GATE: OnceLock<Mutex<()>> = OnceLock::new();
    GATE.get_or_init(|| Mutex::new(()))
        .lock()
        .unwrap_or_else(|e| e.into_inner())
}

struct Criterion {
    name: &'static str,
    failures: Vec<String>,
    started: Instant,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, failures: Vec::new(), started: Instant::now() }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.failures.push(detail);
        }
    }

    fn check_budget(&mut self, seconds: f64) {
        let elapsed = self.started.elapsed().as_secs_f64();
        self.check(
            elapsed < seconds,
            format!("took {elapsed:.1} s, budget {seconds:.0} s"),
        );
    }

    fn finish(self) {
        let elapsed = self.started.elapsed().as_secs_f64();
        if self.failures.is_empty() {
            println!("{}: PASS ({elapsed:.1} s)", self.name);
        } else {
            println!("{}: FAIL ({elapsed:.1} s)", self.name);
            for f in &self.failures {
                println!("  - {f}");
            }
            panic!("{} failed: {:?}", self.name, self.failures);
        }
    }
}

fn rel_err(got: f64, expect: f64) -> f64 {
    (got - expect).abs() / expect.abs()
}

fn check_rows(
    c: &mut Criterion,
    report: &cdr_core::ConvergenceReport,
    expected: &[(usize, f64, f64)],
) {
    if let Some(f) = &report.failure {
        c.check(false, format!("study failed: {f}"));
        return;
    }
    for &(n1, expect, tol) in expected {
        match report.rows.iter().find(|r| r.n1 == n1) {
            Some(row) => {
                let rel = rel_err(row.error, expect);
                c.check(
                    rel <= tol,
                    format!(
                        "n1={n1}: error {:.4E} vs reference {:.4E} ({:.1}% > {:.0}%)",
                        row.error,
                        expect,
                        rel * 100.0,
                        tol * 100.0
                    ),
                );
            }
            None => c.check(false, format!("row n1={n1} missing")),
        }
    }
}

fn check_orders(
    c: &mut Criterion,
    report: &cdr_core::ConvergenceReport,
    expected: &[(usize, f64)],
    window: f64,
) {
    for &(n1, expect) in expected {
        match report.rows.iter().find(|r| r.n1 == n1).and_then(|r| r.order) {
            Some(order) => c.check(
                (order - expect).abs() <= window,
                format!("n1={n1}: order {order:.2} vs reference {expect:.2} (+/-{window})"),
            ),
            None => c.check(false, format!("order at n1={n1} missing")),
        }
    }
}

#[test]
fn criterion_1_table1_linear_steady_2d() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 1 (Table 1, 2D linear steady)");
    let problem = example(1);
    let cfg = StudyConfig { solver: Some(SolveConfig::direct()), ..Default::default() };
    let report = run_study(&problem, &[4, 8, 16, 32, 64, 128], &cfg);
    check_rows(
        &mut c,
        &report,
        &[
            (8, 7.1938e-3, 0.05),
            (16, 4.4988e-4, 0.05),
            (32, 2.7960e-5, 0.05),
            (64, 1.7536e-6, 0.05),
            (128, 1.0957e-7, 0.05),
        ],
    );
    check_orders(
        &mut c,
        &report,
        &[(8, 3.97), (16, 4.00), (32, 4.01), (64, 4.00)],
        0.3,
    );
    c.check_budget(30.0);
    c.finish();
}

#[test]
fn criterion_2_table2_linear_unsteady_2d() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 2 (Table 2, 2D linear unsteady, BDF3+BDF4)");
    for scheme in [Integrator::Bdf3, Integrator::Bdf4] {
        let problem = example(2);
        let cfg = StudyConfig {
            scheme: Some(scheme),
            tau_rule: Some(TauRule::Ratio(1.0)),
            ..Default::default()
        };
        let report = run_study(&problem, &[32, 64, 128], &cfg);
        check_rows(
            &mut c,
            &report,
            &[
                // The coarsest row is pre-asymptotic and shared across
                // schemes; it carries the wider tolerance.
                (32, 2.7643e0, 0.10),
                (64, 3.4205e-1, 0.05),
                (128, 1.7998e-2, 0.05),
            ],
        );
        check_orders(&mut c, &report, &[(64, 3.01), (128, 4.25)], 0.3);
    }
    c.check_budget(180.0);
    c.finish();
}

#[test]
fn criterion_3_table3_nonlinear_steady_2d() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 3 (Table 3, 2D nonlinear steady, setting 2)");
    let problem = example(3); // default setting column is Setting 2
    let report = run_study(&problem, &[32, 64, 128], &StudyConfig::default());
    check_rows(
        &mut c,
        &report,
        &[
            (32, 2.1998e-5, 0.05),
            (64, 1.9364e-6, 0.05),
            (128, 1.4022e-7, 0.05),
        ],
    );
    c.check_budget(120.0);
    c.finish();
}

#[test]
fn criterion_4_table4_nonlinear_unsteady_2d() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 4 (Table 4, 2D nonlinear unsteady, BDF4)");
    let problem = example(4);
    let cfg = StudyConfig {
        scheme: Some(Integrator::Bdf4),
        tau_rule: Some(TauRule::Ratio(1.0)),
        ..Default::default()
    };
    let report = run_study(&problem, &[16, 32, 64], &cfg);
    check_rows(
        &mut c,
        &report,
        &[
            (16, 1.2707e-5, 0.10),
            (32, 1.0386e-6, 0.10),
            (64, 1.0333e-7, 0.10),
        ],
    );
    // Third-order plateau at the finest pair: tau = h limits the temporal
    // consistency of the steady-form stencil to three.
    if let Some(order) = report.rows.iter().find(|r| r.n1 == 64).and_then(|r| r.order) {
        c.check(order >= 3.0, format!("finest-pair order {order:.2} < 3.0"));
    } else {
        c.check(false, "finest-pair order missing".into());
    }
    c.check_budget(180.0);
    c.finish();
}

#[test]
fn criterion_5_table5_linear_steady_3d() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 5 (Table 5, 3D linear steady, direct solve)");
    let problem = example(5);
    let cfg = StudyConfig { solver: Some(SolveConfig::direct()), ..Default::default() };
    let report = run_study(&problem, &[2, 4, 8, 16], &cfg);
    check_rows(
        &mut c,
        &report,
        &[
            (4, 4.8038e-2, 0.05),
            (8, 2.7194e-3, 0.05),
            (16, 1.7121e-4, 0.05),
        ],
    );
    check_orders(&mut c, &report, &[(4, 2.45), (8, 4.14), (16, 3.99)], 0.3);
    c.check_budget(120.0);
    c.finish();
}

#[test]
fn criterion_6_table7_nonlinear_steady_3d() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 6 (Table 7, 3D nonlinear steady, setting 2)");
    let problem = example(7); // default setting column is Setting 2
    let report = run_study(&problem, &[8, 16, 32], &StudyConfig::default());
    check_rows(
        &mut c,
        &report,
        &[
            (8, 2.5891e-4, 0.05),
            (16, 1.7630e-5, 0.05),
            (32, 1.0873e-6, 0.05),
        ],
    );
    c.check_budget(300.0);
    c.finish();
}

#[test]
fn criterion_7_table8_nonlinear_unsteady_3d() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 7 (Table 8, 3D nonlinear unsteady, BDF4)");
    let problem = example(8);
    let cfg = StudyConfig {
        scheme: Some(Integrator::Bdf4),
        tau_rule: Some(TauRule::Ratio(1.0)),
        ..Default::default()
    };
    let report = run_study(&problem, &[4, 8, 16], &cfg);
    check_rows(
        &mut c,
        &report,
        &[
            (4, 1.2255e-4, 0.10),
            (8, 5.8982e-6, 0.10),
            (16, 2.5451e-7, 0.10),
        ],
    );
    c.check_budget(300.0);
    c.finish();
}

#[test]
fn criterion_8a_stencil_monomial_extraction() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 8a (stencil coefficient extraction)");
    let m2 = cdr_core::verify::check_2d_monomials();
    c.check(m2.is_empty(), format!("2D mismatches: {m2:?}"));
    let m3 = cdr_core::verify::check_3d_monomials();
    c.check(m3.is_empty(), format!("3D mismatches: {m3:?}"));
    c.finish();
}

#[test]
fn criterion_8b_row_sum_laws() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 8b (row-sum laws, 2D and 3D)");
    let mut rng = 24680u64;
    let mut next = move || {
        rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((rng >> 33) as f64 / (1u64 << 31) as f64) * 2.0 - 1.0
    };
    let mut rand_slice = |zero_d: bool| -> CoeffSlice {
        let mut s = CoeffSlice {
            v: next(),
            x: next(),
            y: next(),
            z: next(),
            xx: next(),
            xy: next(),
            xz: next(),
            yy: next(),
            yz: next(),
            zz: next(),
        };
        if zero_d {
            s = CoeffSlice::default();
        }
        s
    };
    for trial in 0..200 {
        let zero_d = trial % 2 == 1; // alternate the lambda = 0 case
        let (a, b, cc, d) = (
            rand_slice(false),
            rand_slice(false),
            rand_slice(false),
            rand_slice(zero_d),
        );
        for h in [1.0 / 64.0, 1.0 / 128.0] {
            let s2 = stencil2d::stencil_at(
                &StencilInput2 { a, b, d, f: CoeffSlice::default() },
                h,
            );
            let s3 = stencil3d::stencil_at(
                &StencilInput3 { a, b, c: cc, d, f: CoeffSlice::default() },
                h,
            );
            if zero_d {
                c.check(s2.sum().abs() <= 1e-14, format!("2D sum {} with lambda=0", s2.sum()));
                c.check(s3.sum().abs() <= 1e-14, format!("3D sum {} with lambda=0", s3.sum()));
            } else {
                c.check(
                    (s2.sum() - d.v * h * h).abs() <= 2.0 * h.powi(3),
                    format!("2D |sum - d h^2| > K h^3 at h={h}"),
                );
                c.check(
                    (s3.sum() - d.v * h * h).abs() <= 2.0 * h.powi(3),
                    format!("3D |sum - d h^2| > K h^3 at h={h}"),
                );
            }
        }
    }
    c.finish();
}

#[test]
fn criterion_8c_fd_operator_exactness_and_slopes() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 8c (FD operator exactness and slopes)");
    use cdr_core::fd_ops::{apply_1d, D1Scheme, D2Scheme, D3Scheme};
    let d1s = [D1Scheme::Order2, D1Scheme::Order3, D1Scheme::Order4, D1Scheme::Order5];
    let d2s = [D2Scheme::Order2, D2Scheme::Order43, D2Scheme::Order4];
    let d3s = [D3Scheme::Order1, D3Scheme::Order2, D3Scheme::Order3];
    let ops: Vec<(&'static cdr_core::fd_ops::FdOperator, u32)> = d1s
        .iter()
        .map(|s| (s.operator(), 1))
        .chain(d2s.iter().map(|s| (s.operator(), 2)))
        .chain(d3s.iter().map(|s| (s.operator(), 3)))
        .collect();
    // Exactness on monomials below the truncation order, interior node.
    let h = 0.11;
    for &(op, d) in &ops {
        let acc = op.tiers[0].accuracy as u32;
        for m in 0..(d + acc) {
            let samples: Vec<f64> = (0..13).map(|i| (i as f64 * h - 0.5).powi(m as i32)).collect();
            let x = 6.0 * h - 0.5;
            let got = apply_1d(op, &samples, 6, h).unwrap();
            let expect = if m < d {
                0.0
            } else {
                (0..d).map(|q| (m - q) as f64).product::<f64>() * x.powi((m - d) as i32)
            };
            c.check(
                (got - expect).abs() <= 1e-10 * expect.abs().max(1.0),
                format!("deriv {d} monomial {m}: {got} vs {expect}"),
            );
        }
    }
    // Convergence slope on exp(x) at an interior node.
    for &(op, _) in &ops {
        let err = |n1: usize| {
            let h = 1.0 / n1 as f64;
            let samples: Vec<f64> = (0..=n1).map(|i| (i as f64 * h).exp()).collect();
            (apply_1d(op, &samples, n1 / 2, h).unwrap() - (0.5f64).exp()).abs()
        };
        let q = op.tiers[0].accuracy as f64;
        let slope = (err(32) / err(64)).log2();
        c.check(
            (slope - q).abs() <= 0.4,
            format!("slope {slope:.2} vs accuracy {q}"),
        );
    }
    c.finish();
}

#[test]
fn criterion_8d_fourth_order_residual_slopes() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 8d (interior residual slopes, 2D and 3D)");
    // 2D: the linear steady catalog problem, residual of the exact solution.
    let residual_2d = |n1: usize| -> f64 {
        let p = example(1);
        let grid = make_grid(2, 0.0, 1.0, n1).unwrap();
        let bundle = bundle_steady(&p, &grid, None).unwrap();
        let mut worst = 0.0f64;
        for node in grid.interior_nodes() {
            let idx = grid.node_offset(node);
            let s = stencil2d::stencil_at(&StencilInput2::from_bundle(&bundle, idx), grid.h);
            let mut acc = 0.0;
            for r in -1i64..=1 {
                for l in -1i64..=1 {
                    let q = [
                        grid.coord((node.i as i64 + r) as usize),
                        grid.coord((node.j as i64 + l) as usize),
                        0.0,
                    ];
                    acc += s.at(r as i32, l as i32) * p.exact_value(q, 0.0).unwrap();
                }
            }
            worst = worst.max((acc / (grid.h * grid.h) - s.rhs).abs());
        }
        worst
    };
    let slope2 = (residual_2d(32) / residual_2d(64)).log2();
    c.check((3.5..=4.5).contains(&slope2), format!("2D slope {slope2:.2}"));

    // 3D: the nonlinear steady catalog problem frozen at its exact solution.
    let residual_3d = |n1: usize| -> f64 {
        let p = example(7);
        let grid = make_grid(3, -1.0, 1.0, n1).unwrap();
        let exact = Field::from_fn(&grid, |q| p.exact_value(q, 0.0).unwrap());
        let bundle = bundle_steady(&p, &grid, Some(&exact)).unwrap();
        let mut worst = 0.0f64;
        for node in grid.interior_nodes() {
            let idx = grid.node_offset(node);
            let s = stencil3d::stencil_at(&StencilInput3::from_bundle(&bundle, idx), grid.h);
            let mut acc = 0.0;
            for r in -1i64..=1 {
                for l in -1i64..=1 {
                    for t in -1i64..=1 {
                        let q = [
                            grid.coord((node.i as i64 + r) as usize),
                            grid.coord((node.j as i64 + l) as usize),
                            grid.coord((node.k as i64 + t) as usize),
                        ];
                        acc += s.at(r as i32, l as i32, t as i32)
                            * p.exact_value(q, 0.0).unwrap();
                    }
                }
            }
            worst = worst.max((acc / (grid.h * grid.h) - s.rhs).abs());
        }
        worst
    };
    // h = 1/8 -> 1/16 on the (-1,1) cube means n1 = 16 -> 32.
    let slope3 = (residual_3d(16) / residual_3d(32)).log2();
    c.check((3.5..=4.5).contains(&slope3), format!("3D slope {slope3:.2}"));
    c.finish();
}

#[test]
fn criterion_8e_m_matrix_checks() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 8e (M-matrix sign conditions)");
    // Example 1 at h = 1/2^5: every pre-elimination coefficient obeys the
    // sign conditions.
    let p1 = example(1);
    let grid = make_grid(2, 0.0, 1.0, 32).unwrap();
    let bundle = bundle_steady(&p1, &grid, None).unwrap();
    let sys = assemble(&grid, &bundle, &|q| p1.g(q, 0.0)).unwrap();
    let rep = check_m_matrix(&sys);
    c.check(rep.sign_ok, format!("Example 1 at 1/2^5: {:?}", rep.violating));

    // Example 1 at h = 1/2: too coarse; violations must be reported.
    let grid = make_grid(2, 0.0, 1.0, 2).unwrap();
    let bundle = bundle_steady(&p1, &grid, None).unwrap();
    let sys = assemble(&grid, &bundle, &|q| p1.g(q, 0.0)).unwrap();
    let rep = check_m_matrix(&sys);
    c.check(
        !rep.sign_ok && !rep.violating.is_empty(),
        "Example 1 at 1/2: violations not reported".into(),
    );

    // Example 5 at h = 2/2^4: the assembled interior system satisfies the
    // sign conditions; over the pre-elimination coefficients exactly one
    // boundary coupling is still marginally negative at this h (the
    // normalized convection reaches ~ -11 near one corner), and the full
    // conditions hold one refinement later at h = 2/2^5.
    let p5 = example(5);
    let grid = make_grid(3, -1.0, 1.0, 16).unwrap();
    let bundle = bundle_steady(&p5, &grid, None).unwrap();
    let sys = assemble(&grid, &bundle, &|q| p5.g(q, 0.0)).unwrap();
    let mut interior_ok = true;
    for i in 0..sys.n {
        for k in sys.row_ptr[i]..sys.row_ptr[i + 1] {
            let v = sys.values[k];
            if sys.col_idx[k] == i {
                interior_ok &= v > 0.0;
            } else {
                interior_ok &= v <= 1e-12;
            }
        }
    }
    c.check(interior_ok, "Example 5 at 2/2^4: interior sign condition violated".into());
    let rep = check_m_matrix(&sys);
    c.check(
        rep.sign_violations == 1,
        format!(
            "Example 5 at 2/2^4: expected exactly the one known marginal boundary \
             coupling, found {} violations",
            rep.sign_violations
        ),
    );
    let grid = make_grid(3, -1.0, 1.0, 32).unwrap();
    let bundle = bundle_steady(&p5, &grid, None).unwrap();
    let sys = assemble(&grid, &bundle, &|q| p5.g(q, 0.0)).unwrap();
    let rep = check_m_matrix(&sys);
    c.check(rep.sign_ok, format!("Example 5 at 2/2^5: {:?}", rep.violating));
    c.finish();
}

#[test]
fn criterion_8f_frozen_linear_equivalence() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 8f (linear-disguised-as-nonlinear equivalence)");
    use cdr_core::jet::Jet;
    use cdr_core::nonlinear::{fixed_point_steady, FixedPointConfig};
    use cdr_core::problems::*;
    use std::sync::Arc;
    let linear = Problem {
        name: "plain".into(),
        dim: 2,
        kind: Kind::LinearSteady,
        l1: 0.0,
        l2: 1.0,
        coeffs: CoeffSet::Linear {
            kappa: Coeff::Closed(Arc::new(|_, _, _| Jet::constant(1.4))),
            alpha: Coeff::Closed(Arc::new(|_, _, _| Jet::constant(0.6))),
            beta: Coeff::Closed(Arc::new(|_, _, _| Jet::constant(-0.3))),
            gamma: None,
            lambda: Coeff::Closed(Arc::new(|_, _, _| Jet::constant(0.8))),
        },
        source: Source::Manufactured,
        exact: Some(Exact::Closed {
            u: Arc::new(|p, _t, ord| {
                let (x, y, _) = Jet::coords_ord(p, ord);
                (x * 1.3).sin() * (y * 0.7).cos()
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
        kind: Kind::NonlinearSteady,
        coeffs: CoeffSet::Nonlinear {
            kappa: UCoeff::Closed(Arc::new(|_| Jet::constant(1.4))),
            kappa_u: UCoeff::Closed(Arc::new(|_| Jet::constant(0.0))),
            alpha: UCoeff::Closed(Arc::new(|_| Jet::constant(0.6))),
            beta: UCoeff::Closed(Arc::new(|_| Jet::constant(-0.3))),
            gamma: None,
            lambda: UCoeff::Closed(Arc::new(|_| Jet::constant(0.8))),
        },
        ..linear.clone()
    };
    let grid = make_grid(2, 0.0, 1.0, 12).unwrap();
    let bundle = bundle_steady(&linear, &grid, None).unwrap();
    let sys = assemble(&grid, &bundle, &|q| linear.g(q, 0.0)).unwrap();
    let (direct, _) = cdr_core::system::solve(&sys, &SolveConfig::direct()).unwrap();
    let fp = FixedPointConfig { max_iters: 4, early_stop_tol: None };
    let (field, trace) =
        fixed_point_steady(&nonlinear, &grid, &fp, &SolveConfig::direct()).unwrap();
    let mut identical = true;
    for node in grid.interior_nodes() {
        let idx = cdr_core::lex_index(node, &grid).unwrap();
        identical &= field.at(&grid, node) == direct[idx];
    }
    c.check(identical, "fixed-point result differs from the direct linear solve".into());
    c.check(
        trace.diffs[1..].iter().all(|&d| d <= 1e-12),
        format!("iterations after the first moved by {:?}", &trace.diffs[1..]),
    );
    c.finish();
}

#[test]
fn criterion_9_out_of_scope_documented() {
    let _guard = serial();
    let mut c = Criterion::new("criterion 9 (unsteady-specific stencils documented as absent)");
    let problem = example(2);
    let cfg = StudyConfig {
        scheme: Some(Integrator::Bdf3),
        tau_rule: Some(TauRule::Ratio(1.0)),
        ..Default::default()
    };
    let report = run_study(&problem, &[4], &cfg);
    c.check(
        report
            .notes
            .iter()
            .any(|n| n.contains("not implemented") && n.contains("third order")),
        format!("report notes: {:?}", report.notes),
    );
    c.finish();
}

#[test]
fn golden_mode_flags_mismatches() {
    // The --assert-golden machinery itself: a doctored report must fail.
    let _guard = serial();
    let problem = example(1);
    let mut report = run_study(&problem, &[8], &StudyConfig::default());
    let golden = cdr_core::study::golden_rows(1, None, 0).unwrap();
    assert!(cdr_core::study::assert_golden(&report, golden).is_empty());
    report.rows[0].error *= 1.2;
    assert!(!cdr_core::study::assert_golden(&report, golden).is_empty());
}

#[test]
fn examples_settings_are_consistent() {
    let _guard = serial();
    for ex in 1..=8u8 {
        let s = example_settings(ex);
        assert!(s.default < s.list.len());
        let p = example(ex);
        assert_eq!(p.setting, s.list[s.default]);
    }
}
