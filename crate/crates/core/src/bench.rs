//! Synthetic refinement benchmark.
//!
//! Each scene is a thick backdrop wall with a few non-overlapping boxes in
//! front of it, seen by an axis-aligned camera. Ground-truth skeletons are
//! laid out in the image and pinned to the first visible surface at every
//! joint pixel, as if standing against or touching geometry. Initial
//! estimates add Gaussian noise to every depth; the benchmark compares the
//! initial, refined and projected poses.

use std::fmt::Write as _;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::affordance::gcl;
use crate::error::{Error, Result};
use crate::mldepth::{render_mld, MultiLayerDepthMap};
use crate::pose::{mpjpe, pck3d, Pose3D, PoseSpace, DEFAULT_PCK_THRESHOLD_MM, GPA16_BONES};
use crate::refine::{nearest_valid_projection, refine_pose, RefineConfig};
use crate::scene::{Aabb, Camera, TriangleMesh};

/// Hips-relative joint layout in body units (y down), GPA16 order.
const TEMPLATE: [[f64; 2]; 16] = [
    [-0.12, 0.90],
    [-0.11, 0.45],
    [-0.10, 0.02],
    [0.10, 0.02],
    [0.11, 0.45],
    [0.12, 0.90],
    [0.00, 0.00],
    [0.00, -0.45],
    [0.00, -0.55],
    [0.00, -0.75],
    [-0.45, -0.05],
    [-0.35, -0.25],
    [-0.18, -0.45],
    [0.18, -0.45],
    [0.35, -0.25],
    [0.45, -0.05],
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchConfig {
    pub scenes: usize,
    pub poses: usize,
    pub noise_mm: f64,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    pub layers: usize,
    pub pck_threshold_mm: f64,
    pub refine: RefineConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            scenes: 20,
            poses: 10,
            noise_mm: 80.0,
            seed: 0,
            width: 128,
            height: 96,
            layers: 15,
            pck_threshold_mm: DEFAULT_PCK_THRESHOLD_MM,
            refine: RefineConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Scores {
    pub mpjpe_mm: f64,
    pub pck3d: f64,
    pub gcl_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchCase {
    pub scene: usize,
    pub pose: usize,
    pub initial: Scores,
    pub refined: Scores,
    pub projected: Scores,
}

impl BenchCase {
    pub fn improved(&self) -> bool {
        self.refined.mpjpe_mm < self.initial.mpjpe_mm
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: &'static str,
    pub mpjpe_mm: f64,
    pub pck3d: f64,
    pub gcl_mm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchSummary {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    /// Fraction of cases whose refined MPJPE is strictly below the initial one.
    pub improved_fraction: f64,
    /// Mean of initial minus refined MPJPE (mm).
    pub mean_improvement_mm: f64,
    pub cases: Vec<BenchCase>,
}

impl BenchSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Fixed-width table of the three rows plus the improvement line.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<10} {:>10} {:>8} {:>10}", "method", "MPJPE mm", "PCK3D", "GCL mm");
        for r in &self.rows {
            let _ = writeln!(s, "{:<10} {:>10.3} {:>8.4} {:>10.3}", r.method, r.mpjpe_mm, r.pck3d, r.gcl_mm);
        }
        let _ = writeln!(
            s,
            "improved {:.1}% of {} cases, mean gain {:.3} mm",
            100.0 * self.improved_fraction,
            self.cases.len(),
            self.mean_improvement_mm
        );
        s
    }
}

/// A generated scene: geometry, camera and its rendered depth layers.
pub struct BenchScene {
    pub mesh: TriangleMesh,
    pub map: MultiLayerDepthMap,
}

fn overlaps(a: &Aabb, b: &Aabb, margin: f64) -> bool {
    (0..3).all(|k| a.min[k] - margin < b.max[k] && b.min[k] - margin < a.max[k])
}

/// Random scene number `index` for `cfg`.
pub fn make_scene(cfg: &BenchConfig, index: usize) -> Result<BenchScene> {
    let mut rng = scene_rng(cfg.seed, index, 0);
    let f = cfg.width as f64 * 0.8;
    let cam = Camera::axis_aligned(f, f, (cfg.width / 2) as f64, (cfg.height / 2) as f64, cfg.width, cfg.height)?;
    let wall_z = rng.random_range(4500.0..5000.0);
    let mut boxes = vec![Aabb {
        min: Point3::new(-6000.0, -5000.0, wall_z),
        max: Point3::new(6000.0, 5000.0, wall_z + 1000.0),
    }];
    let n = rng.random_range(1..=3);
    let mut attempts = 0;
    while boxes.len() < n + 1 && attempts < 100 {
        attempts += 1;
        let size = Vector3::new(
            rng.random_range(600.0..1500.0),
            rng.random_range(400.0..1200.0),
            rng.random_range(700.0..1100.0),
        );
        let min = Point3::new(
            rng.random_range(-1800.0..1800.0 - size.x),
            rng.random_range(-1000.0..1500.0 - size.y),
            rng.random_range(1800.0..3200.0),
        );
        let b = Aabb { min, max: min + size };
        if boxes.iter().all(|o| !overlaps(o, &b, 50.0)) {
            boxes.push(b);
        }
    }
    let meshes = boxes
        .iter()
        .map(|b| TriangleMesh::axis_aligned_box(b.min, b.max))
        .collect::<Result<Vec<_>>>()?;
    let mesh = TriangleMesh::merge(&meshes)?;
    let map = render_mld(&mesh, &cam, cfg.layers)?;
    Ok(BenchScene { mesh, map })
}

fn scene_rng(seed: u64, scene: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((scene as u64) << 8) | stream);
    rng
}

/// Ground-truth skeleton in the map's image space, every joint on the
/// first surface of its pixel.
pub fn make_pose(map: &MultiLayerDepthMap, rng: &mut impl Rng) -> Result<Pose3D> {
    let (w, h) = (map.width() as f64, map.height() as f64);
    let scale = rng.random_range(0.25..0.45) * h;
    let cx = rng.random_range(0.5 * scale..w - 0.5 * scale);
    let cy = rng.random_range(0.8 * scale..h - 0.95 * scale);
    let joints = TEMPLATE
        .iter()
        .map(|&[tx, ty]| {
            let x = (cx + scale * (tx + rng.random_range(-0.05..0.05))).round().clamp(0.0, w - 1.0);
            let y = (cy + scale * (ty + rng.random_range(-0.05..0.05))).round().clamp(0.0, h - 1.0);
            let z = map
                .surfaces_at(x, y)?
                .first()
                .map(|&d| d as f64)
                .ok_or_else(|| Error::Internal(format!("no surface behind pixel ({x}, {y})")))?;
            Ok(Vector3::new(x, y, z))
        })
        .collect::<Result<Vec<_>>>()?;
    Pose3D::gpa16(joints, PoseSpace::Image)
}

fn bone_lengths(metric: &Pose3D) -> Vec<f64> {
    GPA16_BONES
        .iter()
        .map(|&(a, b)| (metric.joints[a] - metric.joints[b]).norm())
        .collect()
}

fn scores(pose: &Pose3D, gt_metric: &Pose3D, map: &MultiLayerDepthMap, threshold: f64) -> Result<Scores> {
    let metric = pose.to_metric(map.camera())?;
    Ok(Scores {
        mpjpe_mm: mpjpe(&metric, gt_metric)?,
        pck3d: pck3d(&metric, gt_metric, threshold)?,
        gcl_mm: gcl(pose, map)?,
    })
}

fn run_scene(cfg: &BenchConfig, index: usize) -> Result<Vec<BenchCase>> {
    let scene = make_scene(cfg, index)?;
    let map = &scene.map;
    let mut rng = scene_rng(cfg.seed, index, 1);
    let noise = Normal::new(0.0, cfg.noise_mm.max(0.0))
        .map_err(|e| Error::InvalidArgument(format!("noise: {e}")))?;
    let edges: Vec<(usize, usize)> = GPA16_BONES.to_vec();
    (0..cfg.poses)
        .map(|k| {
            let gt = make_pose(map, &mut rng)?;
            let gt_metric = gt.to_metric(map.camera())?;
            let noisy: Vec<f64> = gt.joints.iter().map(|j| j.z + noise.sample(&mut rng)).collect();
            let init = gt.with_depths(&noisy);
            let refined = refine_pose(&init, map, &edges, &bone_lengths(&gt_metric), &cfg.refine)?.pose;
            let projected = nearest_valid_projection(&init, map)?;
            let t = cfg.pck_threshold_mm;
            Ok(BenchCase {
                scene: index,
                pose: k,
                initial: scores(&init, &gt_metric, map, t)?,
                refined: scores(&refined, &gt_metric, map, t)?,
                projected: scores(&projected, &gt_metric, map, t)?,
            })
        })
        .collect()
}

fn mean(cases: &[BenchCase], f: impl Fn(&BenchCase) -> f64) -> f64 {
    cases.iter().map(f).sum::<f64>() / cases.len() as f64
}

/// Runs the benchmark. Scenes are processed in parallel; results are
/// gathered in scene order, so output does not depend on thread count.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchSummary> {
    if cfg.scenes == 0 || cfg.poses == 0 {
        return Err(Error::InvalidArgument("need at least one scene and one pose".into()));
    }
    if !(cfg.noise_mm >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise must be non-negative, got {}", cfg.noise_mm)));
    }
    cfg.refine.validate()?;
    let per_scene = (0..cfg.scenes)
        .into_par_iter()
        .map(|s| run_scene(cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let cases: Vec<BenchCase> = per_scene.into_iter().flatten().collect();
    let row = |method, pick: fn(&BenchCase) -> &Scores| BenchRow {
        method,
        mpjpe_mm: mean(&cases, |c| pick(c).mpjpe_mm),
        pck3d: mean(&cases, |c| pick(c).pck3d),
        gcl_mm: mean(&cases, |c| pick(c).gcl_mm),
    };
    let rows = vec![
        row("initial", |c| &c.initial),
        row("refined", |c| &c.refined),
        row("projected", |c| &c.projected),
    ];
    Ok(BenchSummary {
        config: cfg.clone(),
        improved_fraction: cases.iter().filter(|c| c.improved()).count() as f64 / cases.len() as f64,
        mean_improvement_mm: mean(&cases, |c| c.initial.mpjpe_mm - c.refined.mpjpe_mm),
        rows,
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affordance::is_valid;

    fn small() -> BenchConfig {
        BenchConfig {
            scenes: 3,
            poses: 4,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn ground_truth_touches_surfaces() {
        let cfg = small();
        let scene = make_scene(&cfg, 0).unwrap();
        let mut rng = scene_rng(0, 0, 1);
        let p = make_pose(&scene.map, &mut rng).unwrap();
        assert!(is_valid(&p, &scene.map).unwrap().into_iter().all(|v| v));
        assert_eq!(gcl(&p, &scene.map).unwrap(), 0.0);
    }

    #[test]
    fn zero_noise_is_exact() {
        let s = run_bench(&BenchConfig {
            noise_mm: 0.0,
            ..small()
        })
        .unwrap();
        for c in &s.cases {
            assert_eq!(c.initial.mpjpe_mm, 0.0);
            assert_eq!(c.refined.mpjpe_mm, 0.0);
            assert_eq!(c.projected.mpjpe_mm, 0.0);
        }
    }

    #[test]
    fn projection_clears_geometry() {
        let s = run_bench(&small()).unwrap();
        assert!(s.cases.iter().all(|c| c.projected.gcl_mm == 0.0));
        assert_eq!(s.rows[2].gcl_mm, 0.0);
        assert!(s.table().contains("projected"));
    }
}
