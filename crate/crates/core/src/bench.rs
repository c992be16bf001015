//! Benchmark harness: repeated seeded baseline runs against one run of the
//! deterministic density pipeline, summarised as max/min/avg accuracy and E.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::clustering::{self, ClusteringResult, KMeansConfig, PipelineConfig, PipelineOutput};
use crate::dataset::{self, Dataset};
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchConfig {
    pub k: usize,
    pub seeds: Vec<u64>,
    pub max_iter: usize,
    pub tol: f64,
    pub pipeline: PipelineConfig,
    /// Run the seeded baselines concurrently. Per-run timings are then not
    /// comparable with the sequential improved run.
    pub parallel_runs: bool,
}

impl BenchConfig {
    /// `runs` seeds `seed_base, seed_base + 1, ...` and a top-k density pipeline.
    pub fn new(k: usize, runs: usize, seed_base: u64) -> Self {
        Self {
            k,
            seeds: (0..runs as u64).map(|i| seed_base + i).collect(),
            max_iter: clustering::DEFAULT_MAX_ITER,
            tol: clustering::DEFAULT_TOL,
            pipeline: PipelineConfig::top_k(k),
            parallel_runs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: Option<u64>,
    /// Percent.
    pub accuracy: f64,
    pub e: f64,
    pub iterations: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmRow {
    pub algorithm: String,
    pub accuracy_max: f64,
    pub accuracy_min: f64,
    pub accuracy_avg: f64,
    pub e_max: f64,
    pub e_min: f64,
    pub e_avg: f64,
    pub time_avg_ms: f64,
    pub runs: usize,
    pub timing_reliable: bool,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub n: usize,
    pub dim: usize,
    pub k: usize,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    pub rows: Vec<AlgorithmRow>,
    /// Average improved time over average baseline time.
    pub time_ratio: Option<f64>,
}

/// Max/min/avg over a set of runs.
pub fn aggregate(algorithm: &str, records: Vec<RunRecord>, timing_reliable: bool) -> AlgorithmRow {
    let n = records.len() as f64;
    let fold = |f: fn(&RunRecord) -> f64| {
        let max = records.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        let min = records.iter().map(f).fold(f64::INFINITY, f64::min);
        let avg = records.iter().map(f).sum::<f64>() / n;
        // Guard the avg against rounding outside [min, max] for identical runs.
        (max, min, avg.clamp(min, max))
    };
    let (accuracy_max, accuracy_min, accuracy_avg) = fold(|r| r.accuracy);
    let (e_max, e_min, e_avg) = fold(|r| r.e);
    let time_avg_ms = records.iter().map(|r| r.elapsed_ms).sum::<f64>() / n;
    AlgorithmRow {
        algorithm: algorithm.to_string(),
        accuracy_max,
        accuracy_min,
        accuracy_avg,
        e_max,
        e_min,
        e_avg,
        time_avg_ms,
        runs: records.len(),
        timing_reliable,
        records,
    }
}

/// Everything a benchmark produced: the report plus the raw results.
#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub report: BenchmarkReport,
    pub baseline: Vec<ClusteringResult>,
    pub improved: PipelineOutput,
}

fn record(result: &ClusteringResult, labels: &[String]) -> Result<RunRecord> {
    let acc = dataset::accuracy(&result.assignment, labels)?;
    Ok(RunRecord {
        seed: result.seed,
        accuracy: acc.accuracy * 100.0,
        e: result.criterion_e,
        iterations: result.iterations,
        elapsed_ms: result.elapsed_ms,
    })
}

pub fn run_benchmark(data: &Dataset, cfg: &BenchConfig) -> Result<BenchOutcome> {
    let labels = data.labels().ok_or(Error::MissingLabels)?;
    if cfg.seeds.is_empty() {
        return Err(Error::InvalidParameter("need at least one baseline run".into()));
    }
    let (outer, inner) = if cfg.parallel_runs {
        (Exec::Parallel, Exec::Sequential)
    } else {
        (Exec::Sequential, cfg.pipeline.improved.exec)
    };
    let baseline: Vec<ClusteringResult> = outer
        .map_slice(&cfg.seeds, |&seed| {
            let kcfg = KMeansConfig {
                k: cfg.k,
                seed,
                max_iter: cfg.max_iter,
                tol: cfg.tol,
                exec: inner,
            };
            clustering::kmeans_baseline(data, &kcfg)
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let improved = clustering::density_kmeans(data, &cfg.pipeline)?;

    let baseline_records = baseline
        .iter()
        .map(|r| record(r, labels))
        .collect::<Result<Vec<_>>>()?;
    let improved_record = record(&improved.result, labels)?;

    let base_row = aggregate("k-means", baseline_records, !cfg.parallel_runs);
    let improved_row = aggregate("improved", vec![improved_record], true);
    let time_ratio =
        (base_row.time_avg_ms > 0.0).then(|| improved_row.time_avg_ms / base_row.time_avg_ms);

    let report = BenchmarkReport {
        dataset: data.name().to_string(),
        n: data.len(),
        dim: data.dim(),
        k: cfg.k,
        seeds: cfg.seeds.clone(),
        config: serde_json::to_value(cfg).unwrap(),
        rows: vec![base_row, improved_row],
        time_ratio,
    };
    Ok(BenchOutcome {
        report,
        baseline,
        improved,
    })
}

const TIMING_KEYS: [&str; 3] = ["elapsed_ms", "time_avg_ms", "time_ratio"];

fn strip_timing(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            for key in TIMING_KEYS {
                map.remove(key);
            }
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

impl BenchmarkReport {
    /// JSON text; without timing the output is byte-stable for fixed flags.
    pub fn to_json(&self, include_timing: bool) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if !include_timing {
            strip_timing(&mut value);
        }
        serde_json::to_string_pretty(&value).expect("report serializes")
    }

    pub fn row(&self, algorithm: &str) -> Option<&AlgorithmRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm)
    }

    /// Aligned text table: accuracy and E as max/min/avg columns, plus time.
    pub fn text_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dataset {} (N={}, D={}, k={}, k-means runs={})",
            self.dataset,
            self.n,
            self.dim,
            self.k,
            self.seeds.len()
        );
        let _ = writeln!(
            out,
            "{:<10} | {:>8} {:>8} {:>8} | {:>12} {:>12} {:>12} | {:>10}",
            "", "accuracy", "(%)", "", "criterion", "E", "", "time (ms)"
        );
        let _ = writeln!(
            out,
            "{:<10} | {:>8} {:>8} {:>8} | {:>12} {:>12} {:>12} | {:>10}",
            "algorithm", "max", "min", "avg", "E_max", "E_min", "E_avg", "avg"
        );
        let _ = writeln!(out, "{}", "-".repeat(91));
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<10} | {:>8.2} {:>8.2} {:>8.2} | {:>12.4} {:>12.4} {:>12.4} | {:>10.3}{}",
                r.algorithm,
                r.accuracy_max,
                r.accuracy_min,
                r.accuracy_avg,
                r.e_max,
                r.e_min,
                r.e_avg,
                r.time_avg_ms,
                if r.timing_reliable { "" } else { " *" }
            );
        }
        if let Some(ratio) = self.time_ratio {
            let _ = writeln!(out, "time ratio improved / k-means: {ratio:.2}");
        }
        if self.rows.iter().any(|r| !r.timing_reliable) {
            let _ = writeln!(out, "* runs executed concurrently; per-run timing is not comparable");
        }
        out
    }
}
