use nalgebra::{Point3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mldepth::MultiLayerDepthMap;
use crate::pose::{Pose3D, PoseSpace};
use crate::scene::TriangleMesh;

/// Thresholds of the test-subset predicates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubsetConfig {
    /// A joint farther than this behind the first surface is occluded (mm).
    pub occlusion_eps: f64,
    pub occlusion_min_joints: usize,
    /// Joint-to-surface distance counted as contact (mm).
    pub close_distance: f64,
    pub close_min_joints: usize,
}

impl Default for SubsetConfig {
    fn default() -> Self {
        SubsetConfig {
            occlusion_eps: 10.0,
            occlusion_min_joints: 10,
            close_distance: 175.0,
            close_min_joints: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OcclusionFlags {
    pub occluded: Vec<bool>,
    pub count: usize,
    pub verdict: bool,
}

/// Marks joints lying more than `eps` behind the first surface of their pixel.
pub fn occlusion_flags(pose: &Pose3D, map: &MultiLayerDepthMap, eps: f64, min_joints: usize) -> Result<OcclusionFlags> {
    if pose.space != PoseSpace::Image {
        return Err(Error::InvalidArgument("occlusion needs an image-space pose".into()));
    }
    let occluded = pose
        .joints
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let s = map
                .surfaces_at(p.x, p.y)
                .map_err(|_| Error::JointOutOfBounds { joint: j, x: p.x, y: p.y })?;
            Ok(s.first().is_some_and(|&d0| p.z > d0 as f64 + eps))
        })
        .collect::<Result<Vec<bool>>>()?;
    let count = occluded.iter().filter(|&&o| o).count();
    Ok(OcclusionFlags {
        occluded,
        count,
        verdict: count >= min_joints,
    })
}

/// Closest point to `p` on triangle `abc`, by Voronoi-region tests.
pub fn closest_point_on_triangle(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }

    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Exact distance from `point` to the nearest triangle of `mesh` (mm).
pub fn point_mesh_distance(point: &Point3<f64>, mesh: &TriangleMesh) -> Result<f64> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok((0..mesh.triangles().len())
        .map(|t| {
            let [a, b, c] = mesh.triangle(t);
            (closest_point_on_triangle(point, &a, &b, &c) - point).norm()
        })
        .fold(f64::INFINITY, f64::min))
}

/// Subset membership of one frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsetReport {
    pub frame_id: usize,
    pub occluded_count: usize,
    pub close_count: usize,
    pub min_surface_dist_mm: f64,
    pub subsets: Vec<String>,
}

/// Classifies a frame into the occlusion and close-to-geometry subsets.
///
/// `pose` is in the map's image space; joints are lifted to world
/// coordinates with the map's camera to measure surface distances.
pub fn classify_frame(
    frame_id: usize,
    pose: &Pose3D,
    map: &MultiLayerDepthMap,
    mesh: &TriangleMesh,
    cfg: &SubsetConfig,
) -> Result<SubsetReport> {
    let occ = occlusion_flags(pose, map, cfg.occlusion_eps, cfg.occlusion_min_joints)?;
    let cam = map.camera();
    let dists = pose
        .joints
        .iter()
        .map(|p: &Vector3<f64>| point_mesh_distance(&cam.back_project(p.x, p.y, p.z), mesh))
        .collect::<Result<Vec<_>>>()?;
    let close_count = dists.iter().filter(|&&d| d < cfg.close_distance).count();
    let mut subsets = vec![];
    if occ.verdict {
        subsets.push("occlusion".to_string());
    }
    if close_count >= cfg.close_min_joints {
        subsets.push("close2geometry".to_string());
    }
    Ok(SubsetReport {
        frame_id,
        occluded_count: occ.count,
        close_count,
        min_surface_dist_mm: dists.iter().copied().fold(f64::INFINITY, f64::min),
        subsets,
    })
}
