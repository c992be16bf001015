//! Picking initial cluster centers from a density profile.

use serde::{Deserialize, Serialize};

use crate::density::DensityProfile;
use crate::error::{Error, Result};

/// Upper bound on the automatically chosen number of clusters.
pub const DEFAULT_MAX_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SelectionMethod {
    GammaTopK { k: usize },
    GammaJump { max_k: usize, ratio: f64 },
    Rectangle { rho_min: f64, delta_min: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterSelection {
    pub indices: Vec<usize>,
    #[serde(flatten)]
    pub method: SelectionMethod,
}

impl CenterSelection {
    pub fn k(&self) -> usize {
        self.indices.len()
    }

    /// Checks the indices are distinct and below `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(Error::InvalidCenters("no centers".into()));
        }
        let mut seen = vec![false; n];
        for &i in &self.indices {
            if i >= n {
                return Err(Error::InvalidCenters(format!("index {i} out of range for {n} points")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidCenters(format!("index {i} repeated")));
            }
        }
        Ok(())
    }
}

/// The `k` points with largest gamma, in descending-gamma order.
pub fn select_top_k(profile: &DensityProfile, k: usize) -> Result<CenterSelection> {
    let n = profile.len();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, n });
    }
    let mut indices = profile.gamma_order();
    indices.truncate(k);
    Ok(CenterSelection {
        indices,
        method: SelectionMethod::GammaTopK { k },
    })
}

/// Chooses k where the descending gamma sequence drops the most, measured as
/// the ratio `g_k / g_{k+1}` for `k` in `1..=max_k`.
pub fn select_by_jump(profile: &DensityProfile, max_k: usize) -> Result<CenterSelection> {
    let n = profile.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("jump selection needs at least 3 points, got {n}")));
    }
    if max_k < 2 || max_k > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "max_k = {max_k} must lie in [2, {}]",
            n - 1
        )));
    }
    let order = profile.gamma_order();
    let sorted: Vec<f64> = order.iter().map(|&i| profile.gamma[i]).collect();
    let (k, ratio) = gamma_jump(&sorted, max_k).ok_or(Error::NoJump)?;
    Ok(CenterSelection {
        indices: order[..k].to_vec(),
        method: SelectionMethod::GammaJump { max_k, ratio },
    })
}

/// `(k, ratio)` maximising `g_k / max(g_{k+1}, eps)` over `k` in
/// `1..=max_k`; `None` when no ratio exceeds 1. Earliest k wins ties.
pub fn gamma_jump(sorted_desc: &[f64], max_k: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for k in 1..=max_k.min(sorted_desc.len().saturating_sub(1)) {
        let ratio = sorted_desc[k - 1] / sorted_desc[k].max(f64::EPSILON);
        if best.is_none_or(|(_, r)| ratio > r) {
            best = Some((k, ratio));
        }
    }
    best.filter(|&(_, r)| r > 1.0)
}

/// Every point with `rho > rho_min` and `delta > delta_min`, in index order.
pub fn select_by_rectangle(
    profile: &DensityProfile,
    rho_min: f64,
    delta_min: f64,
) -> Result<CenterSelection> {
    let indices: Vec<usize> = (0..profile.len())
        .filter(|&i| profile.rho[i] > rho_min && profile.delta[i] > delta_min)
        .collect();
    if indices.is_empty() {
        return Err(Error::EmptySelection);
    }
    Ok(CenterSelection {
        indices,
        method: SelectionMethod::Rectangle { rho_min, delta_min },
    })
}
