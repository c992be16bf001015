//! Euclidean distance tables and the kernel `k(x, y) = -||x - y||^q`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Symmetric N×N table of nonnegative distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDistances {
    n: usize,
    data: Vec<f64>,
}

impl PairwiseDistances {
    /// Wraps a row-major matrix, checking symmetry, diagonal and sign.
    pub fn from_matrix(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                what: "distance matrix",
                found: data.len(),
                expected: n * n,
            });
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidData(format!("nonzero diagonal at {i}")));
            }
            for j in i + 1..n {
                let d = data[i * n + j];
                if !d.is_finite() || d < 0.0 || d != data[j * n + i] {
                    return Err(Error::InvalidData(format!(
                        "distance ({i}, {j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    /// The M = N(N-1)/2 distances of the strict upper triangle, row by row.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.row(i)[i + 1..]);
        }
        out
    }

    /// Elementwise `d^q`, the table used by the kernel assignment step.
    pub fn powered(&self, q: f64, exec: Exec) -> Vec<f64> {
        let n = self.n;
        exec.map_range(n, |i| {
            self.row(i)
                .iter()
                .map(|&d| if q == 2.0 { d * d } else { d.powf(q) })
                .collect::<Vec<_>>()
        })
        .concat()
    }
}

#[inline]
pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    squared_euclidean(x, y).sqrt()
}

#[inline]
pub fn squared_euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn pairwise_euclidean(data: &Dataset, exec: Exec) -> PairwiseDistances {
    let n = data.len();
    let rows = exec.map_range(n, |i| {
        let xi = data.row(i);
        (0..n)
            .map(|j| if i == j { 0.0 } else { euclidean(xi, data.row(j)) })
            .collect::<Vec<_>>()
    });
    // Each entry is computed from the same pair in both orders; take the
    // upper value so the table is exactly symmetric.
    let mut m = rows.concat();
    for i in 0..n {
        for j in 0..i {
            m[i * n + j] = m[j * n + i];
        }
    }
    PairwiseDistances { n, data: m }
}

/// Exponent of the conditionally positive definite kernel, `0 < q <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct KernelSpec {
    q: f64,
}

impl KernelSpec {
    pub const DEFAULT_Q: f64 = 1.5;

    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q <= 2.0 {
            Ok(Self { q })
        } else {
            Err(Error::InvalidExponent(q))
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    fn pow(&self, d: f64) -> f64 {
        if self.q == 2.0 {
            d * d
        } else {
            d.powf(self.q)
        }
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self { q: Self::DEFAULT_Q }
    }
}

impl TryFrom<f64> for KernelSpec {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

impl From<KernelSpec> for f64 {
    fn from(k: KernelSpec) -> f64 {
        k.q
    }
}

fn check_dims(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// `-||x - y||^q`.
pub fn cpd_kernel(x: &[f64], y: &[f64], spec: KernelSpec) -> Result<f64> {
    check_dims(x, y)?;
    let d = euclidean(x, y);
    Ok(if d == 0.0 { 0.0 } else { -spec.pow(d) })
}

/// The quadratic form `sum_ij c_i c_j k(x_i, x_j)` for zero-sum `coeffs`.
/// Nonnegative (up to rounding) whenever the kernel is conditionally
/// positive definite.
pub fn verify_cpd(points: &[Vec<f64>], coeffs: &[f64], spec: KernelSpec) -> Result<f64> {
    if points.len() != coeffs.len() {
        return Err(Error::LengthMismatch {
            what: "coeffs",
            found: coeffs.len(),
            expected: points.len(),
        });
    }
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    let sum: f64 = coeffs.iter().sum();
    if sum.abs() > 1e-12 {
        return Err(Error::CoefficientSum(sum));
    }
    let mut total = 0.0;
    for (xi, ci) in points.iter().zip(coeffs) {
        for (xj, cj) in points.iter().zip(coeffs) {
            total += ci * cj * cpd_kernel(xi, xj, spec)?;
        }
    }
    Ok(total)
}

/// Squared feature-space distance from `x` to the mean of `members` under
/// the kernel `-||x - y||^q`:
///
/// `(2/|C|) sum_y ||x - y||^q - (1/|C|^2) sum_{y,z} ||y - z||^q`
///
/// For `q = 2` this is `2 ||x - mean(C)||^2`.
pub fn kernel_cluster_distance(x: &[f64], members: &[&[f64]], spec: KernelSpec) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::InvalidParameter("cluster has no members".into()));
    }
    for m in members {
        check_dims(x, m)?;
    }
    let size = members.len() as f64;
    let cross: f64 = members.iter().map(|y| spec.pow(euclidean(x, y))).sum();
    let mut within = 0.0;
    for y in members {
        for z in members {
            within += spec.pow(euclidean(y, z));
        }
    }
    Ok(2.0 * cross / size - within / (size * size))
}
