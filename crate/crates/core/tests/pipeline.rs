mod common;

use dpkmeans::centers::{self, CenterSelection};
use dpkmeans::clustering::{
    self, density_kmeans, improved_kmeans, lloyd_from, CenterRule, ImprovedConfig, KMeansConfig,
    PipelineConfig,
};
use dpkmeans::dataset::{accuracy, Normalization};
use dpkmeans::density::{build_profile, DensityKernel};
use dpkmeans::distance::{pairwise_euclidean, KernelSpec};
use dpkmeans::{synthetic, Exec};

fn cfg_q(q: f64) -> ImprovedConfig {
    ImprovedConfig {
        q: KernelSpec::new(q).unwrap(),
        ..Default::default()
    }
}

fn seeds_as_centroids(data: &dpkmeans::Dataset, sel: &CenterSelection) -> Vec<Vec<f64>> {
    sel.indices.iter().map(|&i| data.row(i).to_vec()).collect()
}

#[test]
fn quadratic_kernel_reduces_to_lloyd() {
    for (file, norm) in [
        ("iris.csv", Normalization::None),
        ("wine.csv", Normalization::MinMax),
        ("hayes-roth.csv", Normalization::None),
    ] {
        let data = common::load(file, norm);
        let out = density_kmeans(
            &data,
            &PipelineConfig {
                improved: cfg_q(2.0),
                ..PipelineConfig::top_k(3)
            },
        )
        .unwrap();
        let lloyd = lloyd_from(&data, seeds_as_centroids(&data, &out.centers), 300, 0.0, Exec::Sequential).unwrap();
        assert_eq!(out.result.assignment, lloyd.assignment, "{file}");
        assert!((out.result.criterion_e - lloyd.criterion_e).abs() < 1e-9, "{file}");
    }
}

#[test]
fn criterion_matches_external_recompute() {
    let data = common::iris();
    let out = density_kmeans(&data, &PipelineConfig::top_k(3)).unwrap();
    let r = &out.result;
    let e = clustering::criterion_e(&data, &r.assignment, &r.centroids).unwrap();
    assert!((e - r.criterion_e).abs() < 1e-9);
    let means = clustering::cluster_means(&data, &r.assignment, 3);
    assert_eq!(means, r.centroids);
}

#[test]
fn iris_defaults_reach_reference_criterion() {
    let data = common::iris();
    for q in [1.5, 2.0] {
        let out = density_kmeans(
            &data,
            &PipelineConfig {
                improved: cfg_q(q),
                ..PipelineConfig::top_k(3)
            },
        )
        .unwrap();
        assert!((77.9..=79.9).contains(&out.result.criterion_e), "q={q}: {}", out.result.criterion_e);
        let acc = accuracy(&out.result.assignment, data.labels().unwrap()).unwrap().accuracy;
        assert!((0.87..=0.93).contains(&acc), "q={q}: {acc}");
    }
}

#[test]
fn single_pass_keeps_seed_assignment() {
    let data = common::iris();
    let dist = pairwise_euclidean(&data, Exec::Sequential);
    let profile = build_profile(&dist, 0.02, DensityKernel::Gaussian, Exec::Sequential).unwrap();
    let sel = centers::select_top_k(&profile, 3).unwrap();
    let cfg = ImprovedConfig {
        mode: clustering::IterationMode::SinglePass,
        ..cfg_q(2.0)
    };
    let r = improved_kmeans(&data, &sel, &cfg).unwrap();
    assert_eq!(r.iterations, 1);
    for (i, &a) in r.assignment.iter().enumerate() {
        let nearest = sel
            .indices
            .iter()
            .enumerate()
            .min_by(|x, y| dist.get(i, *x.1).partial_cmp(&dist.get(i, *y.1)).unwrap())
            .unwrap()
            .0;
        assert_eq!(a, nearest, "point {i}");
    }
}

#[test]
fn improved_is_deterministic_across_exec_strategies() {
    let data = common::iris();
    let seq = PipelineConfig {
        improved: ImprovedConfig {
            exec: Exec::Sequential,
            ..Default::default()
        },
        ..PipelineConfig::top_k(3)
    };
    let par = PipelineConfig {
        improved: ImprovedConfig {
            exec: Exec::Parallel,
            ..Default::default()
        },
        ..PipelineConfig::top_k(3)
    };
    let a = density_kmeans(&data, &seq).unwrap().result;
    let b = density_kmeans(&data, &par).unwrap().result;
    assert_eq!(a.to_json(false), b.to_json(false));
}

#[test]
fn baseline_repeats_with_equal_seed() {
    let data = common::iris();
    let a = clustering::kmeans_baseline(&data, &KMeansConfig::new(3, 9)).unwrap();
    let b = clustering::kmeans_baseline(&data, &KMeansConfig::new(3, 9)).unwrap();
    assert_eq!(a.to_json(false), b.to_json(false));
    assert!(a.e_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn two_blobs_jump_and_perfect_partition() {
    for seed in 0..10 {
        let data = synthetic::two_blobs(10, 1.0, 20.0, seed);
        let dist = pairwise_euclidean(&data, Exec::Sequential);
        let profile = build_profile(&dist, 0.02, DensityKernel::Gaussian, Exec::Sequential).unwrap();
        let mut g = profile.gamma.clone();
        g.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(g.iter().filter(|&&v| v > 5.0 * g[2]).count(), 2, "seed {seed}");

        let sel = centers::select_by_jump(&profile, 10).unwrap();
        assert_eq!(sel.k(), 2, "seed {seed}");
        let labels = data.labels().unwrap();
        assert_ne!(labels[sel.indices[0]], labels[sel.indices[1]]);

        // Rectangle between the two gamma tiers picks the same pair.
        let rho_min = sel.indices.iter().map(|&i| profile.rho[i]).fold(f64::INFINITY, f64::min) * 0.999;
        let delta_min = 5.0;
        let rect = centers::select_by_rectangle(&profile, rho_min, delta_min).unwrap();
        let mut jump = sel.indices.clone();
        jump.sort();
        assert_eq!(rect.indices, jump, "seed {seed}");

        let r = improved_kmeans(&data, &sel, &cfg_q(1.5)).unwrap();
        assert_eq!(accuracy(&r.assignment, labels).unwrap().accuracy, 1.0);
    }
}

#[test]
fn two_arcs_fractional_kernel_changes_assignment() {
    let data = synthetic::two_arcs(50, 0.1, 0);
    let sel = density_kmeans(&data, &PipelineConfig::top_k(2)).unwrap().centers;
    let quadratic = improved_kmeans(&data, &sel, &cfg_q(2.0)).unwrap().assignment;
    let changed = [0.5, 1.0, 1.5].iter().any(|&q| {
        let a = improved_kmeans(&data, &sel, &cfg_q(q)).unwrap().assignment;
        a.iter().zip(&quadratic).any(|(x, y)| x != y)
    });
    assert!(changed);
}

#[test]
fn decision_graph_example_peaks_and_outliers() {
    let data = synthetic::decision_graph_example();
    let dist = pairwise_euclidean(&data, Exec::Sequential);
    let p = build_profile(&dist, 0.02, DensityKernel::Gaussian, Exec::Sequential).unwrap();
    let order = p.gamma_order();
    let mut peaks = order[..2].to_vec();
    peaks.sort();
    assert_eq!(peaks, vec![0, 9]);

    let outliers = [3, 12, 14];
    let typical_delta = (0..20)
        .filter(|i| !outliers.contains(i) && !peaks.contains(i))
        .map(|i| p.delta[i])
        .fold(0.0, f64::max);
    let min_peak_rho = p.rho[0].min(p.rho[9]);
    for i in outliers {
        assert!(p.delta[i] > 3.0 * typical_delta, "point {i}");
        assert!(p.rho[i] < 0.1 * min_peak_rho, "point {i}");
    }
    assert_eq!(centers::select_by_jump(&p, 10).unwrap().k(), 2);
}

#[test]
fn jump_rule_in_pipeline() {
    let data = synthetic::two_blobs(10, 1.0, 30.0, 3);
    let out = density_kmeans(
        &data,
        &PipelineConfig {
            centers: CenterRule::Jump { max_k: 10 },
            ..PipelineConfig::top_k(0)
        },
    )
    .unwrap();
    assert_eq!(out.result.k, 2);
    assert_eq!(out.result.criterion_e, clustering::criterion_e(&data, &out.result.assignment, &out.result.centroids).unwrap());
}
