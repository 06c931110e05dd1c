//! Free-space semantics over multi-layer depth maps.
//!
//! Along each pixel ray the finite layers `Z_0 < Z_1 < …` alternate between
//! entering and leaving solid geometry, so `[Z_0, Z_1]`, `[Z_2, Z_3]`, … are
//! occupied slabs and the open gaps between them are free. A pixel with an
//! odd number of layers is treated as leaking: its last slab extends to
//! `+∞`. A joint on a slab face touches the surface and is valid.
//!
//! The geometric consistency loss of a joint is its penetration depth into
//! the containing slab: the distance to the nearer face, zero outside.

mod encoding;

pub use encoding::{
    encode_depth_features, encode_volumetric, volumetric_samples, FeatureKind, GeometryFeatureMap, NO_SURFACE_OFFSET,
};

use crate::error::{Error, Result};
use crate::mldepth::MultiLayerDepthMap;
use crate::pose::Pose3D;

/// An open depth interval, bounds possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, z: f64) -> bool {
        self.lo < z && z < self.hi
    }

    pub fn contains_closed(&self, z: f64) -> bool {
        self.lo <= z && z <= self.hi
    }
}

/// Sorted, disjoint, nonempty open intervals of legal depths at one pixel.
///
/// The first interval always starts at `−∞`. The last ends at `+∞` unless
/// the pixel has an odd number of surfaces.
#[derive(Clone, Debug, PartialEq)]
pub struct FreeSpaceIntervals(Vec<Interval>);

impl FreeSpaceIntervals {
    /// Free space around the given ordered surface depths.
    pub fn from_surfaces(surfaces: &[f32]) -> Self {
        let mut out = vec![];
        let mut lo = f64::NEG_INFINITY;
        for pair in surfaces.chunks(2) {
            out.push(Interval { lo, hi: pair[0] as f64 });
            lo = match pair.get(1) {
                Some(&exit) => exit as f64,
                None => return FreeSpaceIntervals(out),
            };
        }
        out.push(Interval { lo, hi: f64::INFINITY });
        FreeSpaceIntervals(out)
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    /// True when `z` is free or on a surface.
    pub fn admits(&self, z: f64) -> bool {
        self.0.iter().any(|i| i.contains_closed(z))
    }
}

/// Occupied slabs `(entry, exit)` of a pixel; `exit` may be `+∞`.
pub fn occupied_slabs(surfaces: &[f32]) -> impl Iterator<Item = (f64, f64)> + '_ {
    surfaces.chunks(2).map(|pair| {
        (
            pair[0] as f64,
            pair.get(1).map_or(f64::INFINITY, |&d| d as f64),
        )
    })
}

/// Free intervals at the map pixel nearest to `(x, y)`.
pub fn free_intervals(map: &MultiLayerDepthMap, x: f64, y: f64) -> Result<FreeSpaceIntervals> {
    Ok(FreeSpaceIntervals::from_surfaces(map.surfaces_at(x, y)?))
}

/// Penetration of depth `z` into the slab `[d_lo, d_hi]`.
///
/// `min(max(0, z − d_lo), max(0, d_hi − z))`: zero outside the slab and on
/// its faces, distance to the nearer face inside.
pub fn slab_penetration(z: f64, d_lo: f64, d_hi: f64) -> f64 {
    (z - d_lo).max(0.0).min((d_hi - z).max(0.0))
}

/// Penetration of `z` at one pixel: the max over its slabs.
///
/// Slabs are disjoint, so at most one of them can contribute; a second
/// nonzero term is reported as an internal error.
pub fn depth_penetration(z: f64, surfaces: &[f32]) -> Result<f64> {
    let mut best = 0.0f64;
    let mut nonzero = 0;
    for (lo, hi) in occupied_slabs(surfaces) {
        let p = slab_penetration(z, lo, hi);
        if p > 0.0 {
            nonzero += 1;
            best = best.max(p);
        }
    }
    if nonzero > 1 {
        return Err(Error::Internal(format!(
            "depth {z} penetrates {nonzero} slabs of {surfaces:?}"
        )));
    }
    Ok(best)
}

/// Derivative of [`depth_penetration`] with respect to `z`.
///
/// `+1` in the front half of a slab, `−1` in the back half, `0` in free
/// space and on faces. The midpoint takes `+1`, toward the camera.
pub fn depth_penetration_gradient(z: f64, surfaces: &[f32]) -> f64 {
    for (lo, hi) in occupied_slabs(surfaces) {
        if lo < z && z < hi {
            return if z - lo <= hi - z { 1.0 } else { -1.0 };
        }
    }
    0.0
}

fn joint_surfaces<'m>(pose: &Pose3D, map: &'m MultiLayerDepthMap, j: usize) -> Result<&'m [f32]> {
    let p = pose.joints[j];
    map.surfaces_at(p.x, p.y)
        .map_err(|_| Error::JointOutOfBounds { joint: j, x: p.x, y: p.y })
}

/// Per-joint penetration depths (mm).
pub fn joint_penetrations(pose: &Pose3D, map: &MultiLayerDepthMap) -> Result<Vec<f64>> {
    (0..pose.len())
        .map(|j| depth_penetration(pose.joints[j].z, joint_surfaces(pose, map, j)?))
        .collect()
}

/// Geometric consistency loss of a pose: summed joint penetrations (mm).
///
/// Joint `(x, y)` are pixel coordinates in the map's grid, looked up by
/// nearest neighbor; `z` is camera depth in mm.
pub fn gcl(pose: &Pose3D, map: &MultiLayerDepthMap) -> Result<f64> {
    Ok(joint_penetrations(pose, map)?.iter().sum())
}

/// Per-joint `∂ gcl / ∂ z`. The `x, y` derivatives are identically zero
/// under nearest-neighbor lookup and are not returned.
pub fn gcl_gradient(pose: &Pose3D, map: &MultiLayerDepthMap) -> Result<Vec<f64>> {
    (0..pose.len())
        .map(|j| Ok(depth_penetration_gradient(pose.joints[j].z, joint_surfaces(pose, map, j)?)))
        .collect()
}

/// Per-joint validity: free space or surface contact.
pub fn is_valid(pose: &Pose3D, map: &MultiLayerDepthMap) -> Result<Vec<bool>> {
    (0..pose.len())
        .map(|j| {
            let surfaces = joint_surfaces(pose, map, j)?;
            Ok(FreeSpaceIntervals::from_surfaces(surfaces).admits(pose.joints[j].z))
        })
        .collect()
}

/// Closest depth to `z` in the closure of the free set.
///
/// Free depths are returned unchanged. Inside a slab the nearer face wins;
/// an exact tie picks the smaller depth.
pub fn nearest_valid_depth(z: f64, intervals: &FreeSpaceIntervals) -> f64 {
    let iv = intervals.intervals();
    if intervals.admits(z) {
        return z;
    }
    // z lies in the occupied gap after some interval
    for (k, a) in iv.iter().enumerate() {
        if z > a.hi {
            match iv.get(k + 1) {
                Some(b) if z < b.lo => {
                    return if z - a.hi <= b.lo - z { a.hi } else { b.lo };
                }
                None => return a.hi,
                _ => {}
            }
        }
    }
    // unreachable for well-formed intervals; fall back to the closest endpoint
    iv.iter()
        .flat_map(|i| [i.lo, i.hi])
        .filter(|e| e.is_finite())
        .min_by(|a, b| (a - z).abs().total_cmp(&(b - z).abs()).then(a.total_cmp(b)))
        .unwrap_or(z)
}
