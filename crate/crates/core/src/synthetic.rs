//! Small labelled synthetic datasets for demos and tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;

fn build(name: &str, rows: Vec<Vec<f64>>, labels: Vec<String>) -> Dataset {
    Dataset::new(name, rows, Some(labels), None).expect("synthetic data is valid")
}

/// `per_blob` points around each of two centers `separation` apart on the x
/// axis, normally distributed with deviation `radius / 2` and redrawn until
/// they fall within `radius` of their center.
pub fn two_blobs(per_blob: usize, radius: f64, separation: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, radius / 2.0).expect("finite deviation");
    let mut rows = Vec::with_capacity(2 * per_blob);
    let mut labels = Vec::with_capacity(2 * per_blob);
    for (label, cx) in [(0, 0.0), (1, separation)] {
        for _ in 0..per_blob {
            let (dx, dy) = loop {
                let (dx, dy): (f64, f64) = (normal.sample(&mut rng), normal.sample(&mut rng));
                if dx.hypot(dy) <= radius {
                    break (dx, dy);
                }
            };
            rows.push(vec![cx + dx, dy]);
            labels.push(label.to_string());
        }
    }
    build("two_blobs", rows, labels)
}

/// Two interleaved half circles (unit radius), evenly spaced along each arc
/// with uniform jitter of at most `noise` per coordinate.
pub fn two_arcs(per_arc: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(2 * per_arc);
    let mut labels = Vec::with_capacity(2 * per_arc);
    for arc in 0..2 {
        for i in 0..per_arc {
            let theta = std::f64::consts::PI * i as f64 / (per_arc - 1).max(1) as f64;
            let (x, y) = if arc == 0 {
                (theta.cos(), theta.sin())
            } else {
                (1.0 - theta.cos(), 0.5 - theta.sin())
            };
            let jx = noise * (2.0 * rng.random::<f64>() - 1.0);
            let jy = noise * (2.0 * rng.random::<f64>() - 1.0);
            rows.push(vec![x + jx, y + jy]);
            labels.push(arc.to_string());
        }
    }
    build("two_arcs", rows, labels)
}

/// `n` points uniform in the unit hypercube of dimension `dim`.
pub fn uniform(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect();
    Dataset::new("uniform", rows, None, None).expect("synthetic data is valid")
}

/// A 20-point layout with two dense groups centred on points 1 and 10
/// (1-based) and three isolated points 4, 13 and 15.
pub fn decision_graph_example() -> Dataset {
    const POINTS: [(f64, f64, &str); 20] = [
        (1.3, 1.1, "a"),
        (1.0, 1.0, "a"),
        (0.8, 1.3, "a"),
        (2.6, -0.6, "outlier"),
        (0.7, 0.8, "a"),
        (1.1, 0.6, "a"),
        (1.5, 0.9, "a"),
        (0.9, 1.6, "a"),
        (1.4, 1.4, "a"),
        (4.0, 4.0, "b"),
        (4.3, 4.1, "b"),
        (3.7, 4.2, "b"),
        (-0.5, 4.5, "outlier"),
        (4.1, 3.6, "b"),
        (6.8, 1.5, "outlier"),
        (3.8, 3.7, "b"),
        (4.5, 4.4, "b"),
        (4.2, 4.6, "b"),
        (3.5, 4.0, "b"),
        (4.4, 3.5, "b"),
    ];
    let rows = POINTS.iter().map(|&(x, y, _)| vec![x, y]).collect();
    let labels = POINTS.iter().map(|&(_, _, l)| l.to_string()).collect();
    build("decision_graph_example", rows, labels)
}
