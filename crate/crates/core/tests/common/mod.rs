#![allow(dead_code)]

use std::path::PathBuf;

use dpkmeans::dataset::{self, Dataset, LoadOptions, Normalization};

pub fn data_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(file)
}

pub fn load(file: &str, norm: Normalization) -> Dataset {
    let raw = dataset::load_csv(data_path(file), &LoadOptions::default()).unwrap();
    dataset::normalize(&raw, norm).unwrap()
}

pub fn iris() -> Dataset {
    load("iris.csv", Normalization::None)
}

/// Straight transcription of the density-peaks definitions, cubic time,
/// sharing no code with the library.
pub struct NaiveProfile {
    pub dc: f64,
    pub rho: Vec<f64>,
    pub delta: Vec<f64>,
    pub nneigh: Vec<Option<usize>>,
}

pub fn naive_distances(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
                .collect()
        })
        .collect()
}

pub fn naive_profile(points: &[Vec<f64>], t: f64, gaussian: bool) -> Option<NaiveProfile> {
    let n = points.len();
    let d = naive_distances(points);
    let mut upper = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            upper.push(d[i][j]);
        }
    }
    upper.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = upper.len();
    let pos = ((m as f64 * t).round() as usize).clamp(1, m);
    let dc = upper[pos - 1];
    if dc == 0.0 {
        return None;
    }

    let mut rho = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if gaussian {
                rho[i] += (-(d[i][j] / dc) * (d[i][j] / dc)).exp();
            } else if d[i][j] < dc {
                rho[i] += 1.0;
            }
        }
    }

    // rank(i): number of points ahead of i in the descending-density order.
    let ahead = |j: usize, i: usize| rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
    let rank: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| ahead(j, i)).count()).collect();

    let mut delta = vec![0.0; n];
    let mut nneigh = vec![None; n];
    let mut top = 0;
    for i in 0..n {
        if rank[i] == 0 {
            top = i;
            continue;
        }
        let mut best: Option<usize> = None;
        for j in 0..n {
            if rank[j] >= rank[i] {
                continue;
            }
            best = match best {
                None => Some(j),
                Some(b) if d[i][j] < d[i][b] || (d[i][j] == d[i][b] && rank[j] < rank[b]) => Some(j),
                keep => keep,
            };
        }
        let b = best.unwrap();
        delta[i] = d[i][b];
        nneigh[i] = Some(b);
    }
    delta[top] = (0..n).filter(|&i| i != top).map(|i| delta[i]).fold(0.0, f64::max);
    Some(NaiveProfile { dc, rho, delta, nneigh })
}

/// Random point set with N in 2..=50 and D in 1..=5. Every third instance
/// lives on a coarse integer grid so that distance and density ties occur.
pub fn random_instance(seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=50);
    let dim = rng.random_range(1..=5);
    let grid = seed % 3 == 0;
    (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    if grid {
                        rng.random_range(0..6) as f64
                    } else {
                        rng.random_range(-10.0..10.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Compares the library profile with the naive one. Cutoff must match
/// exactly; gaussian values within `1e-12`.
pub fn compare_with_oracle(points: &[Vec<f64>], gaussian: bool) -> Result<(), String> {
    use dpkmeans::density::{self, DensityKernel};
    use dpkmeans::distance::pairwise_euclidean;
    use dpkmeans::Exec;

    let data = Dataset::new("oracle", points.to_vec(), None, None).map_err(|e| e.to_string())?;
    let dist = pairwise_euclidean(&data, Exec::default());
    let kernel = if gaussian { DensityKernel::Gaussian } else { DensityKernel::Cutoff };
    let ours = density::build_profile(&dist, density::DEFAULT_T, kernel, Exec::default());
    let reference = naive_profile(points, density::DEFAULT_T, gaussian);
    let (ours, reference) = match (ours, reference) {
        (Err(_), None) => return Ok(()),
        (Ok(o), Some(r)) => (o, r),
        (o, r) => return Err(format!("degenerate mismatch: ours {:?}, naive {}", o.err(), r.is_some())),
    };
    let tol = if gaussian { 1e-12 } else { 0.0 };
    let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
    if !close(ours.dc, reference.dc) {
        return Err(format!("dc {} vs {}", ours.dc, reference.dc));
    }
    for i in 0..points.len() {
        if !close(ours.rho[i], reference.rho[i]) {
            return Err(format!("rho[{i}] {} vs {}", ours.rho[i], reference.rho[i]));
        }
        if !close(ours.delta[i], reference.delta[i]) {
            return Err(format!("delta[{i}] {} vs {}", ours.delta[i], reference.delta[i]));
        }
        if ours.nneigh[i] != reference.nneigh[i] {
            return Err(format!("nneigh[{i}] {:?} vs {:?}", ours.nneigh[i], reference.nneigh[i]));
        }
    }
    Ok(())
}
