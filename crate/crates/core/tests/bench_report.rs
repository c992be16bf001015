mod common;

use dpkmeans::bench::{aggregate, run_benchmark, BenchConfig, BenchmarkReport};

#[test]
fn aggregates_recompute_from_records() {
    let data = common::iris();
    let out = run_benchmark(&data, &BenchConfig::new(3, 20, 42)).unwrap();
    let report: BenchmarkReport = serde_json::from_str(&out.report.to_json(true)).unwrap();
    for row in &report.rows {
        let again = aggregate(&row.algorithm, row.records.clone(), row.timing_reliable);
        assert_eq!(&again, row);
        assert!(row.accuracy_min <= row.accuracy_avg && row.accuracy_avg <= row.accuracy_max);
        assert!(row.e_min <= row.e_avg && row.e_avg <= row.e_max);
    }
    let improved = report.row("improved").unwrap();
    assert_eq!(improved.accuracy_max, improved.accuracy_min);
    assert_eq!(improved.e_max, improved.e_avg);
    assert_eq!(report.seeds, (42..62).collect::<Vec<u64>>());
}

#[test]
fn records_mirror_raw_results() {
    let data = common::iris();
    let out = run_benchmark(&data, &BenchConfig::new(3, 5, 0)).unwrap();
    let base = out.report.row("k-means").unwrap();
    for (rec, res) in base.records.iter().zip(&out.baseline) {
        assert_eq!(rec.e, res.criterion_e);
        assert_eq!(rec.seed, res.seed);
    }
}

#[test]
fn repeated_reports_are_byte_identical() {
    let data = common::iris();
    let cfg = BenchConfig::new(3, 20, 42);
    let a = run_benchmark(&data, &cfg).unwrap().report.to_json(false);
    let b = run_benchmark(&data, &cfg).unwrap().report.to_json(false);
    assert_eq!(a, b);
}

#[test]
fn parallel_runs_match_sequential_runs() {
    let data = common::iris();
    let seq = BenchConfig::new(3, 10, 7);
    let par = BenchConfig {
        parallel_runs: true,
        ..seq.clone()
    };
    let a = run_benchmark(&data, &seq).unwrap().report;
    let b = run_benchmark(&data, &par).unwrap().report;
    let strip = |r: &BenchmarkReport| r.rows.iter().map(|row| row.records.iter().map(|x| (x.seed, x.e, x.accuracy)).collect::<Vec<_>>()).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    assert!(!b.row("k-means").unwrap().timing_reliable);
}
