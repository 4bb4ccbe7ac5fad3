// [0, 6.28] is the corpus interval, not an approximation of 2π
#![allow(clippy::approx_constant)]
use std::collections::HashSet;

use pconvex::bounds::{full_report, ParamKind, TheoremId};
use pconvex::dsl::{FunctionSpec, Interval};
use pconvex::quadrature::WeightedProblem;
use pconvex::report::{
    emit_report, read_records_csv, read_records_jsonl, read_summary, Format, CSV_HEADER,
};
use pconvex::sweep::{run_sweep, summarize, SweepConfig};

fn small() -> SweepConfig {
    let mut c = SweepConfig::new(
        &["x^2", "abs(x - 0.3) + 0.1", "sin(x)", "x - 0.5"],
        &[[0.0, 1.0], [0.0, 6.28]],
        &[0.5, 2.0],
        &[1.0, 3.5],
    );
    c.k_grid = vec![1.5, 4.0];
    c.l_grid = vec![1.5, 2.0];
    c.xy_divisions = 24;
    c.t_divisions = 8;
    c.random_trials = 500;
    c.seed = 7;
    c
}

#[test]
fn every_case_appears_once_in_order() {
    let c = small();
    let out = run_sweep(&c).unwrap();
    let per_point = 1 + 2 + 2 + 1 + 2 + 2;
    assert_eq!(out.records.len(), 4 * 2 * 2 * 2 * per_point);
    let mut seen = HashSet::new();
    for (i, r) in out.records.iter().enumerate() {
        assert_eq!(r.case, i);
        let key = (
            r.function.clone(),
            r.a.to_bits(),
            r.b.to_bits(),
            r.p.to_bits(),
            r.q.to_bits(),
            r.theorem,
            r.param.map(f64::to_bits),
        );
        assert!(seen.insert(key), "duplicate case {i}");
    }
    // function-major ordering
    let first_block = &out.records[..2 * 2 * 2 * per_point];
    assert!(first_block.iter().all(|r| r.function == "x^2"));
    assert_eq!(out.records[0].theorem, TheoremId::QPlain);
    assert_eq!(out.records[1].theorem, TheoremId::QHolder);
}

#[test]
fn sweep_records_match_individual_reports() {
    let c = small();
    let out = run_sweep(&c).unwrap();
    let options = c.report_options();
    for r in out.records.iter().step_by(7) {
        let problem = WeightedProblem::new(
            Interval::new(r.a, r.b).unwrap(),
            r.p,
            r.q,
            FunctionSpec::parse(&r.function).unwrap(),
        )
        .unwrap();
        let report = full_report(&problem, r.theorem, r.param, &options).unwrap();
        assert_eq!(r.bound, Some(report.bound));
        assert_eq!(r.integral, Some(report.integral.value));
        assert_eq!(r.slack, Some(report.slack));
        assert_eq!(
            r.hypothesis_verdict,
            Some(report.hypothesis_certificate.verdict)
        );
        assert_eq!(r.violation, Some(report.violation));
    }
}

#[test]
fn sign_changing_controls_fail_their_hypotheses() {
    let out = run_sweep(&small()).unwrap();
    for r in out
        .records
        .iter()
        .filter(|r| r.function == "sin(x)" && r.b > 6.0)
    {
        if r.theorem == TheoremId::QPlain {
            assert!(!r.hypothesis_satisfied(), "case {}", r.case);
        }
    }
    assert_eq!(out.summary.violations, 0);
}

#[test]
fn reruns_are_identical_and_seed_matters() {
    let c = small();
    let a = run_sweep(&c).unwrap();
    let b = run_sweep(&c).unwrap();
    assert_eq!(a.records, b.records);
    let mut d = c.clone();
    d.seed = 8;
    let e = run_sweep(&d).unwrap();
    assert_eq!(a.records.len(), e.records.len());
}

#[test]
fn emitted_files_round_trip() {
    let out = run_sweep(&small()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for format in [Format::Json, Format::Csv] {
        let sub = dir.path().join(format!("{format:?}"));
        let files = emit_report(&out.summary, &out.records, &sub, format).unwrap();
        let text = std::fs::read_to_string(&files.records).unwrap();
        let records = match format {
            Format::Json => {
                assert_eq!(text.lines().count(), out.records.len());
                read_records_jsonl(&text).unwrap()
            }
            Format::Csv => {
                assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
                assert_eq!(text.lines().count(), out.records.len() + 1);
                read_records_csv(text.as_bytes()).unwrap()
            }
        };
        assert_eq!(records, out.records);
        let summary = read_summary(&files.summary).unwrap();
        assert_eq!(summary, summarize(&records));

        // minimum slack recomputed directly from the file rows
        for t in &summary.per_theorem {
            let min = records
                .iter()
                .filter(|r| r.theorem == t.theorem && r.hypothesis_satisfied())
                .filter_map(|r| r.slack)
                .fold(f64::INFINITY, f64::min);
            assert_eq!(t.min_slack, Some(min).filter(|m| m.is_finite()));
        }
    }
}

#[test]
fn six_case_constant_sweep_emits_six_rows() {
    let mut c = SweepConfig::new(&["1"], &[[0.0, 1.0]], &[1.0], &[1.0]);
    c.k_grid = vec![2.0];
    c.l_grid = vec![2.0];
    let out = run_sweep(&c).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&out.summary, &out.records, dir.path(), Format::Csv).unwrap();
    let text = std::fs::read_to_string(files.records).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert_eq!(out.summary.violations, 0);
    assert!(TheoremId::ALL
        .iter()
        .all(|t| out.records.iter().filter(|r| r.theorem == *t).count() == 1));
    let q = out
        .records
        .iter()
        .find(|r| r.theorem == TheoremId::QPlain)
        .unwrap();
    assert!((q.tightness.unwrap() - 1.0).abs() <= 1e-12);
}

#[test]
fn bundled_config_covers_every_theorem() {
    let c = SweepConfig::bundled();
    assert_eq!(c.theorems.len(), 6);
    for t in TheoremId::ALL {
        match t.param_kind() {
            ParamKind::K => assert_eq!(c.k_grid, vec![1.5, 2.0, 4.0]),
            ParamKind::L => assert_eq!(c.l_grid, vec![1.5, 2.0, 4.0]),
            ParamKind::None => {}
        }
    }
}
