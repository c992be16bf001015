//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any blocking criterion fails.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dpkmeans::bench::{run_benchmark, BenchConfig};
use dpkmeans::centers;
use dpkmeans::clustering::{density_kmeans, improved_kmeans, ClusteringResult, ImprovedConfig, KMeansConfig, PipelineConfig};
use dpkmeans::dataset::{accuracy, Normalization};
use dpkmeans::density::{build_profile, select_dc, local_density_cutoff, DensityKernel};
use dpkmeans::distance::{kernel_cluster_distance, pairwise_euclidean, squared_euclidean, verify_cpd, KernelSpec};
use dpkmeans::{clustering, synthetic, Exec};

const UCI: [&str; 3] = ["iris.csv", "wine.csv", "hayes-roth.csv"];

struct Suite {
    failed: Vec<&'static str>,
    /// Every baseline run made anywhere in the suite, for the monotonicity check.
    baseline_runs: Vec<ClusteringResult>,
}

impl Suite {
    fn line(&mut self, name: &'static str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(name);
        }
    }

    /// A logged miss that does not fail the suite.
    fn soft_line(&mut self, name: &'static str, pass: bool, detail: String) {
        let status = if pass { "PASS" } else { "FAIL (soft, not blocking)" };
        println!("{status} {name}: {detail}");
    }
}

fn pipeline(q: f64) -> PipelineConfig {
    PipelineConfig {
        improved: ImprovedConfig {
            q: KernelSpec::new(q).unwrap(),
            ..Default::default()
        },
        ..PipelineConfig::top_k(3)
    }
}

fn iris_criterion(s: &mut Suite) {
    let data = common::iris();
    let mut details = Vec::new();
    let mut pass = true;
    for q in [1.5, 2.0] {
        let start = Instant::now();
        let out = density_kmeans(&data, &pipeline(q)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let e = out.result.criterion_e;
        pass &= (77.9..=79.9).contains(&e) && secs < 1.0;
        details.push(format!("q={q} E={e:.4} in {:.1} ms", secs * 1e3));
    }
    s.line("iris criterion E in [77.9, 79.9], < 1 s", pass, details.join("; "));
}

fn iris_baseline(s: &mut Suite) {
    let data = common::iris();
    let out = run_benchmark(&data, &BenchConfig::new(3, 20, 42)).unwrap();
    let base = out.report.row("k-means").unwrap().clone();
    let imp = out.report.row("improved").unwrap().clone();
    s.baseline_runs.extend(out.baseline);

    let spread = (base.e_min - imp.e_min).abs() <= 1.0 && base.e_max >= base.e_min + 10.0;
    s.line(
        "iris baseline spread over 20 seeds",
        spread,
        format!(
            "improved E={:.4}, baseline E_min={:.4} E_max={:.4}",
            imp.e_min, base.e_min, base.e_max
        ),
    );
    let acc = (87.0..=93.0).contains(&imp.accuracy_avg) && (80.0..=92.0).contains(&base.accuracy_avg);
    s.line(
        "iris accuracy",
        acc,
        format!(
            "improved {:.2}% (want 87-93), baseline avg {:.2}% (want 80-92)",
            imp.accuracy_avg, base.accuracy_avg
        ),
    );
}

fn soft_targets(s: &mut Suite) {
    let mut all_hit = true;
    let mut details = Vec::new();
    for (file, target) in [("hayes-roth.csv", 82.45), ("wine.csv", 75.78)] {
        let mut hit = false;
        for (label, norm) in [("raw", Normalization::None), ("min-max", Normalization::MinMax)] {
            let data = common::load(file, norm);
            let out = run_benchmark(&data, &BenchConfig::new(3, 20, 42)).unwrap();
            s.baseline_runs.extend(out.baseline);
            let acc = out.report.row("improved").unwrap().accuracy_avg;
            hit |= (acc - target).abs() <= 8.0;
            details.push(format!("{} {label} {acc:.2}%", data.name()));
        }
        details.push(format!("(target {target}±8 {})", if hit { "hit" } else { "missed" }));
        all_hit &= hit;
    }
    s.soft_line("hayes-roth and wine soft accuracy targets", all_hit, details.join(" "));
}

fn determinism(s: &mut Suite) {
    let mut pass = true;
    for file in UCI {
        let data = common::load(file, Normalization::None);
        let first = density_kmeans(&data, &PipelineConfig::top_k(3)).unwrap().result.to_json(false);
        for _ in 0..4 {
            pass &= density_kmeans(&data, &PipelineConfig::top_k(3)).unwrap().result.to_json(false) == first;
        }
        let cfg = KMeansConfig::new(3, 1234);
        let a = clustering::kmeans_baseline(&data, &cfg).unwrap();
        let b = clustering::kmeans_baseline(&data, &cfg).unwrap();
        pass &= a.to_json(false) == b.to_json(false);
        s.baseline_runs.push(a);
        s.baseline_runs.push(b);
    }
    s.line(
        "determinism",
        pass,
        "5 improved runs byte-identical per UCI dataset; baseline equal under equal seed".into(),
    );
}

fn density_oracle(s: &mut Suite) {
    let start = Instant::now();
    let mut failures = Vec::new();
    for seed in 0..200 {
        let pts = common::random_instance(seed);
        for gaussian in [false, true] {
            if let Err(e) = common::compare_with_oracle(&pts, gaussian) {
                failures.push(format!("seed {seed} gaussian={gaussian}: {e}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = match failures.first() {
        None => format!("200 instances, both kernels, {secs:.2} s"),
        Some(f) => format!("{} mismatches, first {f}", failures.len()),
    };
    s.line("density oracle", failures.is_empty() && secs < 10.0, detail);
}

fn dc_rule(s: &mut Suite) {
    let t = 0.02;
    let data = synthetic::uniform(500, 2, 2024);
    let dist = pairwise_euclidean(&data, Exec::default());
    let dc = select_dc(&dist, t).unwrap();
    let rho = local_density_cutoff(&dist, dc, Exec::default());
    let mean = rho.iter().sum::<f64>() / rho.len() as f64;
    let n = 500.0;
    s.line(
        "dc rule",
        (0.5 * t * n..=2.0 * t * n).contains(&mean),
        format!("mean cutoff rho {mean:.3}, want [{}, {}]", 0.5 * t * n, 2.0 * t * n),
    );
}

fn cpd(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = f64::INFINITY;
    for q in [0.5, 1.0, 1.5, 2.0] {
        let spec = KernelSpec::new(q).unwrap();
        for _ in 0..1000 {
            let n = rng.random_range(2..=10);
            let dim = rng.random_range(1..=4);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
                .collect();
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = raw.iter().sum::<f64>() / n as f64;
            let coeffs: Vec<f64> = raw.iter().map(|c| c - mean).collect();
            worst = worst.min(verify_cpd(&pts, &coeffs, spec).unwrap());
        }
    }
    let spec = KernelSpec::new(2.0).unwrap();
    let mut max_err = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(1..=5);
        let m = rng.random_range(1..=12);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect();
        let members: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let refs: Vec<&[f64]> = members.iter().map(Vec::as_slice).collect();
        let mean: Vec<f64> = (0..dim).map(|j| members.iter().map(|p| p[j]).sum::<f64>() / m as f64).collect();
        let got = kernel_cluster_distance(&x, &refs, spec).unwrap();
        max_err = max_err.max((got - 2.0 * squared_euclidean(&x, &mean)).abs());
    }
    s.line(
        "cpd property",
        worst >= -1e-9 && max_err <= 1e-9,
        format!("min quadratic form {worst:.3e}; q=2 identity max error {max_err:.3e}"),
    );
}

fn synthetic_checks(s: &mut Suite) {
    let mut pass = true;
    let mut k_seen = Vec::new();
    for seed in 0..10 {
        let data = synthetic::two_blobs(10, 1.0, 20.0, seed);
        let dist = pairwise_euclidean(&data, Exec::default());
        let profile = build_profile(&dist, 0.02, DensityKernel::Gaussian, Exec::default()).unwrap();
        let sel = centers::select_by_jump(&profile, 10).unwrap();
        k_seen.push(sel.k());
        let r = improved_kmeans(&data, &sel, &ImprovedConfig::default()).unwrap();
        pass &= sel.k() == 2 && accuracy(&r.assignment, data.labels().unwrap()).unwrap().accuracy == 1.0;
    }
    let arcs = synthetic::two_arcs(50, 0.1, 0);
    let sel = density_kmeans(&arcs, &PipelineConfig::top_k(2)).unwrap().centers;
    let assign = |q: f64| {
        improved_kmeans(&arcs, &sel, &ImprovedConfig { q: KernelSpec::new(q).unwrap(), ..Default::default() })
            .unwrap()
            .assignment
    };
    let quadratic = assign(2.0);
    let changed: Vec<String> = [0.5, 1.0, 1.5]
        .iter()
        .map(|&q| format!("q={q}: {}", assign(q).iter().zip(&quadratic).filter(|(a, b)| a != b).count()))
        .collect();
    let arcs_pass = [0.5, 1.0, 1.5].iter().any(|&q| assign(q) != quadratic);
    s.line(
        "two-blob and two-arc synthetics",
        pass && arcs_pass,
        format!(
            "jump k over 10 blob seeds {k_seen:?}; two-arc assignments changed vs q=2 [{}]",
            changed.join(", ")
        ),
    );
}

fn lloyd_monotone(s: &mut Suite) {
    let bad = s
        .baseline_runs
        .iter()
        .filter(|r| r.e_trace.windows(2).any(|w| w[1] > w[0] + 1e-9 * w[0].abs()))
        .count();
    let detail = format!("{} baseline runs, {bad} with an increasing E step", s.baseline_runs.len());
    s.line("lloyd monotonicity", bad == 0, detail);
}

fn main() {
    let mut s = Suite {
        failed: Vec::new(),
        baseline_runs: Vec::new(),
    };
    iris_criterion(&mut s);
    iris_baseline(&mut s);
    soft_targets(&mut s);
    determinism(&mut s);
    density_oracle(&mut s);
    dc_rule(&mut s);
    cpd(&mut s);
    synthetic_checks(&mut s);
    lloyd_monotone(&mut s);
    if s.failed.is_empty() {
        println!("acceptance: all blocking criteria pass");
    } else {
        println!("acceptance: {} blocking criteria failed: {:?}", s.failed.len(), s.failed);
        std::process::exit(1);
    }
}
