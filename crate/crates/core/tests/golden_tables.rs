//! Golden regression rows beyond the acceptance criteria: desk-scale
//! reference values for the remaining scheme/setting columns.

use cdr_core::coefficients::Integrator;
use cdr_core::problems::{example, example_settings, TauRule};
use cdr_core::study::{assert_golden, golden_rows, run_study, StudyConfig};

fn run_and_check(
    ex: u8,
    scheme: Option<Integrator>,
    setting_idx: usize,
    tau: Option<TauRule>,
    n1s: &[usize],
) {
    let mut problem = example(ex);
    problem.setting = example_settings(ex).list[setting_idx];
    let cfg = StudyConfig {
        scheme,
        tau_rule: tau,
        setting: Some(problem.setting),
        ..Default::default()
    };
    let report = run_study(&problem, n1s, &cfg);
    assert!(report.failure.is_none(), "example {ex}: {:?}", report.failure);
    let golden = golden_rows(ex, scheme, setting_idx).expect("golden rows recorded");
    let mismatches = assert_golden(&report, golden);
    assert!(mismatches.is_empty(), "example {ex}: {mismatches:?}");
}

#[test]
fn example2_cn_column_with_tabulated_tau() {
    run_and_check(2, Some(Integrator::Cn), 0, Some(TauRule::Table), &[4, 8, 16]);
}

#[test]
fn example2_bdf_columns_coarse() {
    run_and_check(2, Some(Integrator::Bdf3), 0, Some(TauRule::Ratio(1.0)), &[4, 8, 16]);
    run_and_check(2, Some(Integrator::Bdf4), 0, Some(TauRule::Ratio(1.0)), &[4, 8, 16]);
}

#[test]
fn example3_settings_one_and_three() {
    run_and_check(3, None, 0, None, &[4, 8, 16, 32]);
    run_and_check(3, None, 2, None, &[8, 16, 32]);
}

#[test]
fn example4_bdf3_column() {
    run_and_check(4, Some(Integrator::Bdf3), 0, Some(TauRule::Ratio(1.0)), &[4, 8, 16]);
}

#[test]
fn example5_medium_row() {
    run_and_check(5, None, 0, None, &[2, 4, 8, 16]);
}

#[test]
fn example6_setting_columns() {
    run_and_check(6, Some(Integrator::Bdf3), 0, Some(TauRule::Ratio(1.0)), &[4, 8, 16]);
    run_and_check(6, Some(Integrator::Bdf3), 2, Some(TauRule::Ratio(1.0)), &[8, 16, 32]);
}

#[test]
fn example7_setting_one() {
    run_and_check(7, None, 0, None, &[4, 8, 16]);
}

#[test]
fn example8_bdf4_column() {
    run_and_check(8, Some(Integrator::Bdf4), 0, Some(TauRule::Ratio(1.0)), &[4, 8]);
}

#[test]
fn table1_markdown_matches_checked_in_golden() {
    // The markdown emitter output for the first study is pinned byte-for-
    // byte (it carries no wall-time column).
    let problem = example(1);
    let report = run_study(
        &problem,
        &[4, 8, 16, 32, 64, 128],
        &StudyConfig {
            solver: Some(cdr_core::system::SolveConfig::direct()),
            ..Default::default()
        },
    );
    assert!(report.failure.is_none());
    let mut out = Vec::new();
    cdr_core::study::emit(&report, cdr_core::study::EmitFormat::Markdown, &mut out).unwrap();
    let got = String::from_utf8(out).unwrap();
    let expect = include_str!("data/table1_study.md");
    assert_eq!(got, expect);
}

#[test]
fn fixed_point_budgets_match_reference_counts() {
    use cdr_core::nonlinear::FixedPointConfig;
    assert_eq!(FixedPointConfig::steady().max_iters, 40);
    assert_eq!(FixedPointConfig::unsteady(2).max_iters, 20);
    assert_eq!(FixedPointConfig::unsteady(3).max_iters, 40);
    assert!(FixedPointConfig::steady().early_stop_tol.is_none());
}

/// Slow optional rows beyond desk scale; run with
/// `cargo test --release -p cdr-core --test golden_tables -- --ignored`.
#[test]
#[ignore]
fn example2_bdf_finest_tabulated_row() {
    run_and_check(2, Some(Integrator::Bdf3), 0, Some(TauRule::Ratio(1.0)), &[512]);
}
