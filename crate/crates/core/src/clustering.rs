//! Random-init Lloyd K-means, the density-initialised kernel K-means, and
//! the within-cluster sum of squared errors `E`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::centers::{self, CenterSelection};
use crate::dataset::Dataset;
use crate::density::{self, DensityKernel, DensityProfile};
use crate::distance::{pairwise_euclidean, squared_euclidean, KernelSpec, PairwiseDistances};
use crate::error::{Error, Result};
use crate::exec::Exec;

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct ClusteringResult {
    pub algorithm: String,
    pub k: usize,
    pub assignment: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub criterion_e: f64,
    pub iterations: usize,
    /// The stopping rule fired before `max_iter` was exhausted.
    pub converged: bool,
    /// Number of times an emptied cluster was reseeded.
    pub reseeds: usize,
    pub seed: Option<u64>,
    pub initial_centers: Vec<usize>,
    /// `E` after every centroid update.
    pub e_trace: Vec<f64>,
    pub config: serde_json::Value,
    pub elapsed_ms: f64,
}

impl ClusteringResult {
    /// JSON text. Wall-clock timing is the only non-deterministic field, so
    /// `include_timing = false` gives byte-stable output for a fixed input.
    pub fn to_json(&self, include_timing: bool) -> String {
        let mut value = serde_json::to_value(self).expect("result serializes");
        if !include_timing {
            value.as_object_mut().unwrap().remove("elapsed_ms");
        }
        serde_json::to_string_pretty(&value).expect("result serializes")
    }
}

/// `E = sum_i sum_{x in C_i} ||x - c_i||^2` against the given centroids.
pub fn criterion_e(data: &Dataset, assignment: &[usize], centroids: &[Vec<f64>]) -> Result<f64> {
    if assignment.len() != data.len() {
        return Err(Error::LengthMismatch {
            what: "assignment",
            found: assignment.len(),
            expected: data.len(),
        });
    }
    let mut e = 0.0;
    for (x, &c) in data.rows().zip(assignment) {
        let centroid = centroids.get(c).ok_or_else(|| {
            Error::InvalidParameter(format!("cluster id {c} has no centroid ({} given)", centroids.len()))
        })?;
        if centroid.len() != x.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: centroid.len(),
            });
        }
        e += squared_euclidean(x, centroid);
    }
    Ok(e)
}

/// Arithmetic means per cluster; empty clusters get a zero vector.
pub fn cluster_means(data: &Dataset, assignment: &[usize], k: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; data.dim()]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in data.rows().zip(assignment) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            s.iter_mut().for_each(|v| *v /= n as f64);
        }
    }
    sums
}

fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, v) in values.enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

fn counts(assignment: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &c in assignment {
        counts[c] += 1;
    }
    counts
}

/// Moves points into empty clusters: each empty cluster takes the point with
/// the largest `cost` among clusters that can spare one. Returns the number
/// of reseeds.
fn reseed_empty(assignment: &mut [usize], k: usize, cost: impl Fn(usize, usize) -> f64) -> usize {
    let mut counts = counts(assignment, k);
    let mut reseeds = 0;
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut pick: Option<(usize, f64)> = None;
        for (i, &c) in assignment.iter().enumerate() {
            if counts[c] > 1 {
                let v = cost(i, c);
                if pick.is_none_or(|(_, best)| v > best) {
                    pick = Some((i, v));
                }
            }
        }
        let (i, _) = pick.expect("k <= N leaves a cluster with a spare point");
        counts[assignment[i]] -= 1;
        assignment[i] = empty;
        counts[empty] = 1;
        reseeds += 1;
    }
    reseeds
}

struct CentroidRun {
    assignment: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    iterations: usize,
    converged: bool,
    reseeds: usize,
    e_trace: Vec<f64>,
}

/// Alternating nearest-centroid assignment and mean update under `metric`.
/// Stops when no assignment changes, the largest centroid shift drops below
/// `tol`, or after `max_iter` rounds.
fn centroid_iterations<M>(
    data: &Dataset,
    initial: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
    single_pass: bool,
    exec: Exec,
    metric: M,
) -> CentroidRun
where
    M: Fn(&[f64], &[f64]) -> f64 + Sync + Send,
{
    let k = initial.len();
    let mut centroids = initial;
    let mut assignment: Option<Vec<usize>> = None;
    let mut run = CentroidRun {
        assignment: Vec::new(),
        centroids: Vec::new(),
        iterations: 0,
        converged: false,
        reseeds: 0,
        e_trace: Vec::new(),
    };
    for _ in 0..max_iter.max(1) {
        run.iterations += 1;
        let mut next = exec.map_range(data.len(), |i| {
            let x = data.row(i);
            argmin(centroids.iter().map(|c| metric(x, c)))
        });
        run.reseeds += reseed_empty(&mut next, k, |i, c| metric(data.row(i), &centroids[c]));
        let changed = assignment.as_ref() != Some(&next);

        let updated = cluster_means(data, &next, k);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_euclidean(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        let e = criterion_e(data, &next, &centroids).expect("shapes agree");
        run.e_trace.push(e);
        assignment = Some(next);

        if single_pass || !changed || shift < tol {
            run.converged = true;
            break;
        }
    }
    run.assignment = assignment.unwrap_or_default();
    run.centroids = centroids;
    run
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            exec: Exec::default(),
        }
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    Ok(())
}

/// Lloyd's algorithm from `k` distinct data points drawn uniformly with a
/// ChaCha8 generator seeded by `cfg.seed`.
pub fn kmeans_baseline(data: &Dataset, cfg: &KMeansConfig) -> Result<ClusteringResult> {
    check_k(cfg.k, data.len())?;
    if cfg.max_iter == 0 || !(cfg.tol >= 0.0) {
        return Err(Error::InvalidParameter("max_iter must be >= 1 and tol >= 0".into()));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let seeds = rand::seq::index::sample(&mut rng, data.len(), cfg.k).into_vec();
    let initial = seeds.iter().map(|&i| data.row(i).to_vec()).collect();
    let run = centroid_iterations(
        data,
        initial,
        cfg.max_iter,
        cfg.tol,
        false,
        cfg.exec,
        squared_euclidean,
    );
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    finish(data, run, "kmeans", Some(cfg.seed), seeds, serde_json::to_value(cfg).unwrap(), elapsed_ms)
}

/// Lloyd's algorithm from explicit starting centroids.
pub fn lloyd_from(
    data: &Dataset,
    initial: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
    exec: Exec,
) -> Result<ClusteringResult> {
    check_k(initial.len(), data.len())?;
    for c in &initial {
        if c.len() != data.dim() {
            return Err(Error::DimensionMismatch {
                left: data.dim(),
                right: c.len(),
            });
        }
    }
    let start = Instant::now();
    let run = centroid_iterations(data, initial, max_iter, tol, false, exec, squared_euclidean);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let config = serde_json::json!({ "max_iter": max_iter, "tol": tol });
    finish(data, run, "lloyd", None, Vec::new(), config, elapsed_ms)
}

fn finish(
    data: &Dataset,
    run: CentroidRun,
    algorithm: &str,
    seed: Option<u64>,
    initial_centers: Vec<usize>,
    config: serde_json::Value,
    elapsed_ms: f64,
) -> Result<ClusteringResult> {
    let k = run.centroids.len();
    // E is always taken against arithmetic means in input space.
    let centroids = cluster_means(data, &run.assignment, k);
    let criterion_e = criterion_e(data, &run.assignment, &centroids)?;
    Ok(ClusteringResult {
        algorithm: algorithm.to_string(),
        k,
        assignment: run.assignment,
        centroids,
        criterion_e,
        iterations: run.iterations,
        converged: run.converged,
        reseeds: run.reseeds,
        seed,
        initial_centers,
        e_trace: run.e_trace,
        config,
        elapsed_ms,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationMode {
    #[default]
    Iterate,
    SinglePass,
}

impl std::str::FromStr for IterationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iterate" => Ok(Self::Iterate),
            "single-pass" | "single_pass" => Ok(Self::SinglePass),
            _ => Err(Error::InvalidParameter(format!("unknown mode {s:?}"))),
        }
    }
}

/// How the kernel turns into a point-to-cluster distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMetric {
    /// Squared distance to the cluster mean in the kernel's feature space.
    #[default]
    FeatureSpace,
    /// `||x - c||^q` against an explicit input-space centroid.
    Point,
}

impl std::str::FromStr for KernelMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feature-space" | "feature_space" => Ok(Self::FeatureSpace),
            "point" => Ok(Self::Point),
            _ => Err(Error::InvalidParameter(format!("unknown kernel metric {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImprovedConfig {
    pub q: KernelSpec,
    pub mode: IterationMode,
    pub metric: KernelMetric,
    pub max_iter: usize,
    /// Centroid-shift tolerance; only the `Point` metric has centroids to move.
    pub tol: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for ImprovedConfig {
    fn default() -> Self {
        Self {
            q: KernelSpec::default(),
            mode: IterationMode::Iterate,
            metric: KernelMetric::FeatureSpace,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            exec: Exec::default(),
        }
    }
}

/// K-means seeded with the selected density peaks, assigning points by the
/// kernel distance. Deterministic.
pub fn improved_kmeans(
    data: &Dataset,
    centers: &CenterSelection,
    cfg: &ImprovedConfig,
) -> Result<ClusteringResult> {
    let dist = pairwise_euclidean(data, cfg.exec);
    improved_kmeans_with_distances(data, &dist, centers, cfg)
}

/// As [`improved_kmeans`], reusing an existing Euclidean distance table.
pub fn improved_kmeans_with_distances(
    data: &Dataset,
    dist: &PairwiseDistances,
    centers: &CenterSelection,
    cfg: &ImprovedConfig,
) -> Result<ClusteringResult> {
    centers.validate(data.len())?;
    if dist.len() != data.len() {
        return Err(Error::LengthMismatch {
            what: "distance table",
            found: dist.len(),
            expected: data.len(),
        });
    }
    let start = Instant::now();
    let single_pass = cfg.mode == IterationMode::SinglePass;
    let q = cfg.q.q();
    let run = match cfg.metric {
        KernelMetric::Point => {
            let initial = centers.indices.iter().map(|&i| data.row(i).to_vec()).collect();
            centroid_iterations(data, initial, cfg.max_iter, cfg.tol, single_pass, cfg.exec, |x, c| {
                squared_euclidean(x, c).sqrt().powf(q)
            })
        }
        KernelMetric::FeatureSpace => {
            let powered = dist.powered(q, cfg.exec);
            feature_space_iterations(data, &powered, &centers.indices, cfg.max_iter, single_pass, cfg.exec)
        }
    };
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let config = serde_json::to_value(cfg).unwrap();
    finish(data, run, "improved", None, centers.indices.clone(), config, elapsed_ms)
}

/// Kernel K-means on the precomputed `||x_i - x_j||^q` table. Clusters start
/// as the singleton seeds; each round assigns every point to the cluster
/// minimising
/// `(2/|C|) sum_{y in C} ||x - y||^q - (1/|C|^2) sum_{y,z in C} ||y - z||^q`.
fn feature_space_iterations(
    data: &Dataset,
    powered: &[f64],
    seeds: &[usize],
    max_iter: usize,
    single_pass: bool,
    exec: Exec,
) -> CentroidRun {
    let n = data.len();
    let k = seeds.len();
    let row = |i: usize| &powered[i * n..(i + 1) * n];

    // First round: distance to a singleton {c} is 2 ||x - c||^q.
    let table: Vec<Vec<f64>> = exec.map_range(n, |i| seeds.iter().map(|&c| 2.0 * row(i)[c]).collect());
    let mut assignment: Vec<usize> = table.iter().map(|d| argmin(d.iter().copied())).collect();
    let mut reseeds = reseed_empty(&mut assignment, k, |i, c| table[i][c]);
    let mut e_trace = vec![{
        let c = cluster_means(data, &assignment, k);
        criterion_e(data, &assignment, &c).expect("shapes agree")
    }];
    let mut iterations = 1;
    let mut converged = single_pass;

    while !single_pass && iterations < max_iter {
        let sizes = counts(&assignment, k);
        let mut within = vec![0.0; k];
        for i in 0..n {
            let ci = assignment[i];
            let r = row(i);
            for j in 0..n {
                if assignment[j] == ci {
                    within[ci] += r[j];
                }
            }
        }
        for c in 0..k {
            within[c] /= (sizes[c] * sizes[c]) as f64;
        }
        let table: Vec<Vec<f64>> = exec.map_range(n, |i| {
            let mut cross = vec![0.0; k];
            for (j, &p) in row(i).iter().enumerate() {
                cross[assignment[j]] += p;
            }
            (0..k)
                .map(|c| 2.0 * cross[c] / sizes[c] as f64 - within[c])
                .collect()
        });
        let mut next: Vec<usize> = table.iter().map(|d| argmin(d.iter().copied())).collect();
        reseeds += reseed_empty(&mut next, k, |i, c| table[i][c]);
        iterations += 1;
        let changed = next != assignment;
        assignment = next;
        let c = cluster_means(data, &assignment, k);
        e_trace.push(criterion_e(data, &assignment, &c).expect("shapes agree"));
        if !changed {
            converged = true;
            break;
        }
    }
    let centroids = cluster_means(data, &assignment, k);
    CentroidRun {
        assignment,
        centroids,
        iterations,
        converged,
        reseeds,
        e_trace,
    }
}

/// How the density pipeline chooses its centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterRule {
    TopK { k: usize },
    Jump { max_k: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub t: f64,
    pub density_kernel: DensityKernel,
    pub centers: CenterRule,
    pub improved: ImprovedConfig,
}

impl PipelineConfig {
    pub fn top_k(k: usize) -> Self {
        Self {
            t: density::DEFAULT_T,
            density_kernel: DensityKernel::Gaussian,
            centers: CenterRule::TopK { k },
            improved: ImprovedConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub profile: DensityProfile,
    pub centers: CenterSelection,
    pub result: ClusteringResult,
}

/// Distances, density profile, center selection and kernel K-means in one
/// call. `result.elapsed_ms` covers the whole pipeline.
pub fn density_kmeans(data: &Dataset, cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let start = Instant::now();
    let exec = cfg.improved.exec;
    let dist = pairwise_euclidean(data, exec);
    let profile = density::build_profile(&dist, cfg.t, cfg.density_kernel, exec)?;
    let centers = match cfg.centers {
        CenterRule::TopK { k } => centers::select_top_k(&profile, k)?,
        CenterRule::Jump { max_k } => {
            centers::select_by_jump(&profile, max_k.min(profile.len().saturating_sub(1)))?
        }
    };
    let mut result = improved_kmeans_with_distances(data, &dist, &centers, &cfg.improved)?;
    result.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    result.config = serde_json::to_value(cfg).unwrap();
    Ok(PipelineOutput {
        profile,
        centers,
        result,
    })
}
