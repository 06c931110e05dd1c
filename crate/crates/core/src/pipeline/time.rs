use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_INLIER_THRESHOLD: f64 = 1.0 / 60.0;
pub const DEFAULT_RANSAC_ITERS: usize = 1000;

/// `global = scale · local + offset`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeModel {
    pub scale: f64,
    pub offset: f64,
    pub inlier_count: usize,
    pub inlier_threshold: f64,
    /// Indices of the pairs within the threshold of the final fit.
    pub inliers: Vec<usize>,
}

impl TimeModel {
    pub fn apply(&self, local: f64) -> f64 {
        self.scale * local + self.offset
    }
}

fn consensus(pairs: &[(f64, f64)], a: f64, b: f64, threshold: f64) -> Vec<usize> {
    pairs
        .iter()
        .enumerate()
        .filter(|(_, &(l, g))| (g - (a * l + b)).abs() <= threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Ordinary least squares of `global` on `local` over `subset`.
fn fit(pairs: &[(f64, f64)], subset: &[usize]) -> Option<(f64, f64)> {
    let n = subset.len() as f64;
    let (ml, mg) = subset
        .iter()
        .fold((0.0, 0.0), |(sl, sg), &i| (sl + pairs[i].0, sg + pairs[i].1));
    let (ml, mg) = (ml / n, mg / n);
    let (mut sll, mut slg) = (0.0, 0.0);
    for &i in subset {
        let (dl, dg) = (pairs[i].0 - ml, pairs[i].1 - mg);
        sll += dl * dl;
        slg += dl * dg;
    }
    if sll == 0.0 {
        return None;
    }
    let a = slg / sll;
    Some((a, mg - a * ml))
}

/// Robust affine fit of `(local, global)` timestamp pairs.
///
/// Each iteration draws two distinct pairs, skips samples with equal
/// local times or a non-positive slope, and scores the line by the number
/// of pairs within `threshold`. The best consensus set is refit by least
/// squares. Draws come from a ChaCha8 stream seeded with `seed`.
pub fn ransac_time_align(pairs: &[(f64, f64)], threshold: f64, iters: usize, seed: u64) -> Result<TimeModel> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            got: pairs.len(),
        });
    }
    if !(threshold > 0.0) || iters == 0 {
        return Err(Error::InvalidArgument(format!(
            "need threshold > 0 and iters ≥ 1, got {threshold} and {iters}"
        )));
    }
    if pairs.iter().any(|(l, g)| !l.is_finite() || !g.is_finite()) {
        return Err(Error::InvalidArgument("timestamps must be finite".into()));
    }
    if pairs.iter().all(|p| p.0 == pairs[0].0) {
        return Err(Error::DegenerateSamples);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pairs.len();
    let mut best: Option<Vec<usize>> = None;
    for _ in 0..iters {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let ((l1, g1), (l2, g2)) = (pairs[i], pairs[j]);
        if l1 == l2 {
            continue;
        }
        let a = (g2 - g1) / (l2 - l1);
        if !(a > 0.0) {
            continue;
        }
        let set = consensus(pairs, a, g1 - a * l1, threshold);
        if best.as_ref().is_none_or(|b| set.len() > b.len()) {
            best = Some(set);
        }
    }

    let best = best.ok_or(Error::DegenerateSamples)?;
    if best.len() < 2 {
        return Err(Error::InsufficientConsensus { size: best.len() });
    }
    let (scale, offset) = fit(pairs, &best).ok_or(Error::DegenerateSamples)?;
    if !(scale > 0.0) {
        return Err(Error::DegenerateSamples);
    }
    let inliers = consensus(pairs, scale, offset, threshold);
    Ok(TimeModel {
        scale,
        offset,
        inlier_count: inliers.len(),
        inlier_threshold: threshold,
        inliers,
    })
}
