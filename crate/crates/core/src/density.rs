//! Decision-graph quantities: truncation distance `dc`, local density
//! `rho`, separation `delta` with nearest higher-density neighbour, and
//! `gamma = rho * delta`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::distance::PairwiseDistances;
use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityKernel {
    /// Count of neighbours strictly closer than `dc`.
    Cutoff,
    /// `sum_j exp(-(d_ij / dc)^2)`.
    #[default]
    Gaussian,
}

impl std::str::FromStr for DensityKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cutoff" | "cut-off" => Ok(Self::Cutoff),
            "gaussian" => Ok(Self::Gaussian),
            _ => Err(Error::InvalidParameter(format!("unknown density kernel {s:?}"))),
        }
    }
}

impl std::fmt::Display for DensityKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cutoff => "cutoff",
            Self::Gaussian => "gaussian",
        })
    }
}

pub const DEFAULT_T: f64 = 0.02;

/// Truncation distance: the `round(M t)`-th smallest of the M = N(N-1)/2
/// pairwise distances (1-based, clamped to `[1, M]`).
pub fn select_dc(dist: &PairwiseDistances, t: f64) -> Result<f64> {
    let n = dist.len();
    if n < 2 {
        return Err(Error::TruncationDistance(format!("need at least 2 points, got {n}")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::TruncationDistance(format!("t = {t} is outside (0, 1)")));
    }
    let mut sorted = dist.upper_triangle();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let position = ((m as f64 * t).round() as usize).clamp(1, m);
    let dc = sorted[position - 1];
    if dc <= 0.0 {
        return Err(Error::DegenerateDc);
    }
    Ok(dc)
}

pub fn local_density_cutoff(dist: &PairwiseDistances, dc: f64, exec: Exec) -> Vec<f64> {
    exec.map_range(dist.len(), |i| {
        dist.row(i)
            .iter()
            .enumerate()
            .filter(|&(j, &d)| j != i && d < dc)
            .count() as f64
    })
}

/// Each row is summed in index order, so the result is bitwise identical
/// for any execution strategy.
pub fn local_density_gaussian(dist: &PairwiseDistances, dc: f64, exec: Exec) -> Vec<f64> {
    exec.map_range(dist.len(), |i| {
        dist.row(i)
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &d)| {
                let r = d / dc;
                (-r * r).exp()
            })
            .sum()
    })
}

/// Point indices by descending density, ties by ascending index.
pub fn density_order(rho: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rho.len()).collect();
    order.sort_by(|&a, &b| rho[b].total_cmp(&rho[a]).then(a.cmp(&b)));
    order
}

/// `delta[i]` is the distance to the nearest point ranked above `i` in
/// [`density_order`]; the top point gets the maximum of all other deltas.
pub fn compute_delta(
    dist: &PairwiseDistances,
    rho: &[f64],
    exec: Exec,
) -> Result<(Vec<f64>, Vec<Option<usize>>)> {
    let n = dist.len();
    if rho.len() != n {
        return Err(Error::LengthMismatch {
            what: "rho",
            found: rho.len(),
            expected: n,
        });
    }
    let order = density_order(rho);
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let pairs = exec.map_range(n, |i| {
        let r = rank[i];
        if r == 0 {
            return (0.0, None);
        }
        let row = dist.row(i);
        let mut best = f64::INFINITY;
        let mut neigh = order[0];
        for &j in &order[..r] {
            if row[j] < best {
                best = row[j];
                neigh = j;
            }
        }
        (best, Some(neigh))
    });
    let (mut delta, nneigh): (Vec<f64>, Vec<Option<usize>>) = pairs.into_iter().unzip();
    if let Some(&top) = order.first() {
        delta[top] = delta
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != top)
            .map(|(_, &d)| d)
            .fold(0.0, f64::max);
    }
    Ok((delta, nneigh))
}

pub fn compute_gamma(rho: &[f64], delta: &[f64]) -> Result<Vec<f64>> {
    if rho.len() != delta.len() {
        return Err(Error::LengthMismatch {
            what: "delta",
            found: delta.len(),
            expected: rho.len(),
        });
    }
    Ok(rho.iter().zip(delta).map(|(r, d)| r * d).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub rho: Vec<f64>,
    pub delta: Vec<f64>,
    pub nneigh: Vec<Option<usize>>,
    pub gamma: Vec<f64>,
    pub dc: f64,
    pub t: f64,
    pub kernel: DensityKernel,
}

impl DensityProfile {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Index of the highest-density point.
    pub fn top(&self) -> Option<usize> {
        self.nneigh.iter().position(Option::is_none)
    }

    /// Indices sorted by descending gamma, ties by ascending index.
    pub fn gamma_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.gamma.len()).collect();
        idx.sort_by(|&a, &b| match self.gamma[b].total_cmp(&self.gamma[a]) {
            Ordering::Equal => a.cmp(&b),
            o => o,
        });
        idx
    }

    /// Legacy `DECISION_GRAPH` text: one `%6.2f %6.2f` (rho, delta) line per point.
    pub fn decision_graph_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * 14);
        for (r, d) in self.rho.iter().zip(&self.delta) {
            let _ = writeln!(out, "{r:6.2} {d:6.2}");
        }
        out
    }

    /// Per-point JSON records: `{ i, rho, delta, gamma, nneigh }`.
    pub fn points_json(&self) -> serde_json::Value {
        let points: Vec<_> = (0..self.len())
            .map(|i| {
                serde_json::json!({
                    "i": i,
                    "rho": self.rho[i],
                    "delta": self.delta[i],
                    "gamma": self.gamma[i],
                    "nneigh": self.nneigh[i],
                })
            })
            .collect();
        serde_json::json!({
            "points": points,
            "dc": self.dc,
            "kernel": self.kernel,
        })
    }
}

pub fn build_profile(
    dist: &PairwiseDistances,
    t: f64,
    kernel: DensityKernel,
    exec: Exec,
) -> Result<DensityProfile> {
    let dc = select_dc(dist, t)?;
    let rho = match kernel {
        DensityKernel::Cutoff => local_density_cutoff(dist, dc, exec),
        DensityKernel::Gaussian => local_density_gaussian(dist, dc, exec),
    };
    let (delta, nneigh) = compute_delta(dist, &rho, exec)?;
    let gamma = compute_gamma(&rho, &delta)?;
    Ok(DensityProfile {
        rho,
        delta,
        nneigh,
        gamma,
        dc,
        t,
        kernel,
    })
}
