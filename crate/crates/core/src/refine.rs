//! Depth-only pose refinement against scene free space.
//!
//! The objective over joint depths `z` is
//!
//! ```text
//! λ_d · Σ smooth_l1(z − z_init) + λ_g · gcl(z) + λ_b · Σ (‖bone‖ − L)²
//! ```
//!
//! with the data term in millimeters and bone lengths measured in the
//! camera frame of the map. Joint pixel coordinates never change.
//! Minimization is plain gradient descent with a halving line search.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::affordance::{depth_penetration, depth_penetration_gradient, gcl, nearest_valid_depth, FreeSpaceIntervals};
use crate::error::{Error, Result};
use crate::mldepth::MultiLayerDepthMap;
use crate::pose::{Pose3D, PoseSpace};

const MAX_HALVINGS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineConfig {
    pub lambda_data: f64,
    pub lambda_geom: f64,
    pub lambda_bone: f64,
    /// Initial step length per iteration, mm per unit gradient.
    pub step: f64,
    pub max_iters: usize,
    /// Stop once an accepted step lowers the objective by less than this.
    pub tol: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            lambda_data: 0.5,
            lambda_geom: 1.0,
            lambda_bone: 0.1,
            step: 16.0,
            max_iters: 200,
            tol: 1e-6,
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<()> {
        let weights = [self.lambda_data, self.lambda_geom, self.lambda_bone];
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("weights must be non-negative, got {weights:?}")));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {}", self.step)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Outcome of [`refine_pose`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefineReport {
    #[serde(serialize_with = "serialize_pose")]
    pub pose: Pose3D,
    /// Objective before the first step, then after every accepted step.
    pub objective: Vec<f64>,
    pub iterations: usize,
    /// Final minus initial depth per joint (mm).
    pub corrections: Vec<f64>,
    pub gcl_before: f64,
    pub gcl_after: f64,
}

fn serialize_pose<S: serde::Serializer>(p: &Pose3D, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.to_json_value().serialize(s)
}

impl RefineReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn smooth_l1_1d(d: f64) -> f64 {
    let a = d.abs();
    if a <= 1.0 {
        0.5 * a * a
    } else {
        a - 0.5
    }
}

fn smooth_l1_slope(d: f64) -> f64 {
    d.clamp(-1.0, 1.0)
}

struct Problem<'a> {
    cfg: &'a RefineConfig,
    z0: Vec<f64>,
    surfaces: Vec<&'a [f32]>,
    /// Camera-frame point at unit depth for each joint's pixel.
    rays: Vec<Vector3<f64>>,
    edges: &'a [(usize, usize)],
    lengths: &'a [f64],
}

impl Problem<'_> {
    fn joint_term(&self, j: usize, z: f64) -> f64 {
        self.cfg.lambda_data * smooth_l1_1d(z - self.z0[j])
            + self.cfg.lambda_geom * depth_penetration(z, self.surfaces[j]).unwrap_or(f64::NAN)
    }

    fn joint_slope(&self, j: usize, z: f64) -> f64 {
        self.cfg.lambda_data * smooth_l1_slope(z - self.z0[j])
            + self.cfg.lambda_geom * depth_penetration_gradient(z, self.surfaces[j])
    }

    fn bone_vector(&self, z: &[f64], (a, b): (usize, usize)) -> Vector3<f64> {
        self.rays[a] * z[a] - self.rays[b] * z[b]
    }

    fn objective(&self, z: &[f64]) -> f64 {
        let mut f: f64 = (0..z.len()).map(|j| self.joint_term(j, z[j])).sum();
        if self.cfg.lambda_bone != 0.0 {
            for (&e, &l) in self.edges.iter().zip(self.lengths) {
                let r = self.bone_vector(z, e).norm() - l;
                f += self.cfg.lambda_bone * r * r;
            }
        }
        f
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g: Vec<f64> = (0..z.len()).map(|j| self.joint_slope(j, z[j])).collect();
        if self.cfg.lambda_bone != 0.0 {
            for (&(a, b), &l) in self.edges.iter().zip(self.lengths) {
                let v = self.bone_vector(z, (a, b));
                let n = v.norm();
                if n == 0.0 {
                    continue;
                }
                let c = 2.0 * self.cfg.lambda_bone * (n - l) / n;
                g[a] += c * v.dot(&self.rays[a]);
                g[b] -= c * v.dot(&self.rays[b]);
            }
        }
        g
    }
}

fn check_edges(edges: &[(usize, usize)], lengths: &[f64], joints: usize) -> Result<()> {
    if edges.len() != lengths.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} bones but {} target lengths",
            edges.len(),
            lengths.len()
        )));
    }
    for (k, &(a, b)) in edges.iter().enumerate() {
        for joint in [a, b] {
            if joint >= joints {
                return Err(Error::InvalidEdge {
                    edge: k,
                    joint,
                    count: joints,
                });
            }
        }
    }
    Ok(())
}

/// Minimizes the refinement objective over joint depths.
///
/// `init` must be an image-space pose in the map's pixel grid. `edges` and
/// `target_lengths` (mm) describe the bone prior and may be empty.
///
/// Without the bone term the objective splits into one function per
/// joint, and each joint runs its own line search. A joint never accepts
/// a step that raises its own term, so with `lambda_data = 0` no joint's
/// penetration grows.
pub fn refine_pose(
    init: &Pose3D,
    map: &MultiLayerDepthMap,
    edges: &[(usize, usize)],
    target_lengths: &[f64],
    cfg: &RefineConfig,
) -> Result<RefineReport> {
    cfg.validate()?;
    if init.space != PoseSpace::Image {
        return Err(Error::InvalidArgument("refinement needs an image-space pose".into()));
    }
    check_edges(edges, target_lengths, init.len())?;
    let surfaces = init
        .joints
        .iter()
        .enumerate()
        .map(|(j, p)| {
            map.surfaces_at(p.x, p.y)
                .map_err(|_| Error::JointOutOfBounds { joint: j, x: p.x, y: p.y })
        })
        .collect::<Result<Vec<_>>>()?;
    let cam = map.camera();
    let problem = Problem {
        cfg,
        z0: init.depths(),
        surfaces,
        rays: init
            .joints
            .iter()
            .map(|p| cam.back_project_camera(p.x, p.y, 1.0).coords)
            .collect(),
        edges,
        lengths: target_lengths,
    };

    let mut z = problem.z0.clone();
    let mut f = problem.objective(&z);
    if !f.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    let mut history = vec![f];
    let separable = cfg.lambda_bone == 0.0 || edges.is_empty();
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let g = problem.gradient(&z);
        if g.iter().all(|&v| v == 0.0) {
            break;
        }
        let moved = if separable {
            separable_step(&problem, &mut z, &g)
        } else {
            joint_step(&problem, &mut z, &g, f)
        };
        if !moved {
            break;
        }
        iterations += 1;
        let next = problem.objective(&z);
        if !next.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: iterations });
        }
        let decrease = f - next;
        f = next;
        history.push(f);
        if decrease < cfg.tol {
            break;
        }
    }

    let pose = init.with_depths(&z);
    Ok(RefineReport {
        gcl_before: gcl(init, map)?,
        gcl_after: gcl(&pose, map)?,
        corrections: z.iter().zip(&problem.z0).map(|(a, b)| a - b).collect(),
        pose,
        objective: history,
        iterations,
    })
}

/// One halving line search per joint; returns whether any joint moved.
fn separable_step(problem: &Problem<'_>, z: &mut [f64], g: &[f64]) -> bool {
    let mut moved = false;
    for j in 0..z.len() {
        if g[j] == 0.0 {
            continue;
        }
        let current = problem.joint_term(j, z[j]);
        let mut s = problem.cfg.step;
        for _ in 0..MAX_HALVINGS {
            let candidate = z[j] - s * g[j];
            if candidate != z[j] && problem.joint_term(j, candidate) < current {
                z[j] = candidate;
                moved = true;
                break;
            }
            s *= 0.5;
        }
    }
    moved
}

/// One halving line search along the full gradient.
fn joint_step(problem: &Problem<'_>, z: &mut [f64], g: &[f64], f: f64) -> bool {
    let mut s = problem.cfg.step;
    let mut candidate = z.to_vec();
    for _ in 0..MAX_HALVINGS {
        for ((c, &zj), &gj) in candidate.iter_mut().zip(z.iter()).zip(g) {
            *c = zj - s * gj;
        }
        if problem.objective(&candidate) < f {
            z.copy_from_slice(&candidate);
            return true;
        }
        s *= 0.5;
    }
    false
}

/// Moves every joint to the closest depth outside occupied space.
pub fn nearest_valid_projection(pose: &Pose3D, map: &MultiLayerDepthMap) -> Result<Pose3D> {
    let depths = pose
        .joints
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let surfaces = map
                .surfaces_at(p.x, p.y)
                .map_err(|_| Error::JointOutOfBounds { joint: j, x: p.x, y: p.y })?;
            Ok(nearest_valid_depth(p.z, &FreeSpaceIntervals::from_surfaces(surfaces)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pose.with_depths(&depths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affordance::joint_penetrations;
    use crate::mldepth::SENTINEL;
    use crate::pose::Taxonomy;
    use crate::scene::Camera;

    fn map() -> MultiLayerDepthMap {
        let cam = Camera::axis_aligned(100.0, 100.0, 1.0, 0.0, 3, 1).unwrap();
        let d = vec![
            1000.0, 1400.0, 3000.0, 3100.0, //
            SENTINEL, SENTINEL, SENTINEL, SENTINEL, //
            1000.0, 1400.0, SENTINEL, SENTINEL,
        ];
        MultiLayerDepthMap::from_raw(1, 3, 4, d, cam).unwrap()
    }

    fn pose(joints: &[(f64, f64)]) -> Pose3D {
        Pose3D::new(
            Taxonomy::Other("test".into()),
            0,
            (0..joints.len()).map(|i| format!("j{i}")).collect(),
            joints.iter().map(|&(x, z)| Vector3::new(x, 0.0, z)).collect(),
            PoseSpace::Image,
        )
        .unwrap()
    }

    fn geom_only() -> RefineConfig {
        RefineConfig {
            lambda_data: 0.0,
            lambda_geom: 1.0,
            lambda_bone: 0.0,
            ..RefineConfig::default()
        }
    }

    #[test]
    fn valid_pose_is_fixed_point() {
        let p = pose(&[(0.0, 900.0), (1.0, 1200.0), (0.0, 2000.0), (0.0, 1000.0)]);
        let r = refine_pose(&p, &map(), &[], &[], &geom_only()).unwrap();
        assert_eq!(r.pose, p);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.objective, vec![0.0]);
    }

    #[test]
    fn single_joint_reaches_front_face() {
        let cfg = geom_only();
        for z in [1100.0, 1003.0, 1199.9] {
            let r = refine_pose(&pose(&[(0.0, z)]), &map(), &[], &[], &cfg).unwrap();
            let out = r.pose.joints[0].z;
            assert!(out <= 1000.0 + cfg.tol, "{z} -> {out}");
            assert!(out > 900.0);
            assert_eq!(r.gcl_after, 0.0);
        }
    }

    #[test]
    fn back_half_exits_through_back_face() {
        let r = refine_pose(&pose(&[(0.0, 1350.0)]), &map(), &[], &[], &geom_only()).unwrap();
        let out = r.pose.joints[0].z;
        assert!((1400.0..=1400.0 + 16.0).contains(&out), "{out}");
    }

    #[test]
    fn data_term_holds_free_joints() {
        let p = pose(&[(0.0, 1100.0), (1.0, 1234.0)]);
        let r = refine_pose(&p, &map(), &[], &[], &RefineConfig::default()).unwrap();
        assert_eq!(r.pose.joints[1].z, 1234.0);
        assert!((r.pose.joints[0].z - 1000.0).abs() < 1e-3, "{}", r.pose.joints[0].z);
    }

    #[test]
    fn objective_never_increases() {
        let p = pose(&[(0.0, 1100.0), (0.0, 1390.0), (2.0, 1201.0), (0.0, 3090.0)]);
        let cfg = RefineConfig {
            lambda_bone: 0.01,
            ..RefineConfig::default()
        };
        let edges = [(0, 1), (1, 2), (2, 3)];
        let r = refine_pose(&p, &map(), &edges, &[50.0, 50.0, 50.0], &cfg).unwrap();
        assert!(r.objective.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.objective.len() > 1);
    }

    #[test]
    fn geom_only_never_deepens_a_joint() {
        let p = pose(&[(0.0, 1100.0), (0.0, 1399.0), (0.0, 1201.0), (0.0, 3090.0), (2.0, 1300.0)]);
        let before = joint_penetrations(&p, &map()).unwrap();
        let r = refine_pose(&p, &map(), &[], &[], &geom_only()).unwrap();
        let after = joint_penetrations(&r.pose, &map()).unwrap();
        for (a, b) in after.iter().zip(&before) {
            assert!(a <= b);
        }
        assert!(r.gcl_after < r.gcl_before);
    }

    #[test]
    fn bad_edges() {
        let p = pose(&[(0.0, 900.0), (0.0, 900.0)]);
        let cfg = RefineConfig::default();
        match refine_pose(&p, &map(), &[(0, 2)], &[10.0], &cfg) {
            Err(Error::InvalidEdge { edge: 0, joint: 2, count: 2 }) => {}
            other => panic!("{other:?}"),
        }
        assert!(refine_pose(&p, &map(), &[(0, 1)], &[], &cfg).is_err());
    }

    #[test]
    fn config_checks() {
        let p = pose(&[(0.0, 900.0)]);
        for cfg in [
            RefineConfig { step: 0.0, ..RefineConfig::default() },
            RefineConfig { max_iters: 0, ..RefineConfig::default() },
            RefineConfig { lambda_geom: -1.0, ..RefineConfig::default() },
        ] {
            assert!(refine_pose(&p, &map(), &[], &[], &cfg).is_err());
        }
    }

    #[test]
    fn projection_examples() {
        let m = map();
        let p = pose(&[(0.0, 900.0), (0.0, 1100.0), (0.0, 1300.0), (1.0, 5000.0), (0.0, 3040.0)]);
        let q = nearest_valid_projection(&p, &m).unwrap();
        assert_eq!(q.depths(), vec![900.0, 1000.0, 1400.0, 5000.0, 3000.0]);
        assert_eq!(gcl(&q, &m).unwrap(), 0.0);
        let valid = pose(&[(0.0, 900.0)]);
        assert_eq!(nearest_valid_projection(&valid, &m).unwrap(), valid);
    }

    #[test]
    fn report_json() {
        let r = refine_pose(&pose(&[(0.0, 1100.0)]), &map(), &[], &[], &geom_only()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["gcl_before"], 100.0);
        assert_eq!(v["pose"]["joints"][0]["name"], "j0");
    }
}
