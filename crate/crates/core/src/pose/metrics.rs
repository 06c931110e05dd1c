use serde::Serialize;

use super::{Pose3D, PoseSpace};
use crate::error::{Error, Result};

pub const DEFAULT_PCK_THRESHOLD_MM: f64 = 150.0;

fn check_pair(pred: &Pose3D, gt: &Pose3D) -> Result<()> {
    if pred.taxonomy != gt.taxonomy || pred.len() != gt.len() || pred.root != gt.root {
        return Err(Error::TaxonomyMismatch(format!(
            "prediction {} ({} joints, root {}) vs ground truth {} ({} joints, root {})",
            pred.taxonomy,
            pred.len(),
            pred.root,
            gt.taxonomy,
            gt.len(),
            gt.root
        )));
    }
    if pred.space != PoseSpace::Metric || gt.space != PoseSpace::Metric {
        return Err(Error::InvalidArgument("metrics need metric (mm) poses".into()));
    }
    Ok(())
}

/// Root-relative Euclidean error of every joint, in mm.
pub fn joint_errors(pred: &Pose3D, gt: &Pose3D) -> Result<Vec<f64>> {
    check_pair(pred, gt)?;
    let pr = pred.joints[pred.root];
    let gr = gt.joints[gt.root];
    Ok(pred
        .joints
        .iter()
        .zip(&gt.joints)
        .map(|(p, g)| ((p - pr) - (g - gr)).norm())
        .collect())
}

/// Mean of per-joint errors. The root's error (always 0) is included.
pub fn mpjpe_from_errors(errors: &[f64]) -> f64 {
    errors.iter().sum::<f64>() / errors.len() as f64
}

/// Fraction of errors strictly below `threshold`.
pub fn pck_from_errors(errors: &[f64], threshold: f64) -> f64 {
    errors.iter().filter(|&&d| d < threshold).count() as f64 / errors.len() as f64
}

/// Mean per-joint position error after aligning root joints.
pub fn mpjpe(pred: &Pose3D, gt: &Pose3D) -> Result<f64> {
    Ok(mpjpe_from_errors(&joint_errors(pred, gt)?))
}

/// Fraction of joints with root-relative error strictly below `threshold`.
pub fn pck3d(pred: &Pose3D, gt: &Pose3D, threshold: f64) -> Result<f64> {
    Ok(pck_from_errors(&joint_errors(pred, gt)?, threshold))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointMetrics {
    pub mpjpe_mm: f64,
    pub pck3d: f64,
}

/// Aggregate metrics over a set of prediction/ground-truth pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub mpjpe_mm: f64,
    pub pck3d: f64,
    pub threshold_mm: f64,
    pub poses: usize,
    /// Per joint, in skeleton order.
    pub per_joint: OrderedJoints,
}

impl MetricsReport {
    pub fn evaluate(pairs: &[(Pose3D, Pose3D)], threshold: f64) -> Result<Self> {
        let Some((first, _)) = pairs.first() else {
            return Err(Error::InvalidArgument("no poses to evaluate".into()));
        };
        let j = first.len();
        let mut sum = vec![0.0; j];
        let mut hits = vec![0usize; j];
        for (pred, gt) in pairs {
            if pred.len() != j || pred.taxonomy != first.taxonomy {
                return Err(Error::TaxonomyMismatch("poses in the set use different skeletons".into()));
            }
            for (k, e) in joint_errors(pred, gt)?.into_iter().enumerate() {
                sum[k] += e;
                hits[k] += (e < threshold) as usize;
            }
        }
        let n = pairs.len() as f64;
        let per_joint = first
            .names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                (
                    name.clone(),
                    JointMetrics {
                        mpjpe_mm: sum[k] / n,
                        pck3d: hits[k] as f64 / n,
                    },
                )
            })
            .collect();
        Ok(MetricsReport {
            mpjpe_mm: sum.iter().sum::<f64>() / (n * j as f64),
            pck3d: hits.iter().sum::<usize>() as f64 / (n * j as f64),
            threshold_mm: threshold,
            poses: pairs.len(),
            per_joint: OrderedJoints(per_joint),
        })
    }
}

/// Joint name → metrics, serialized as a JSON object in skeleton order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedJoints(pub Vec<(String, JointMetrics)>);

impl Serialize for OrderedJoints {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn pose(offset: Vector3<f64>) -> Pose3D {
        let joints = (0..16)
            .map(|j| Vector3::new(10.0 * j as f64, -5.0 * j as f64, 3000.0 + j as f64) + offset)
            .collect();
        Pose3D::gpa16(joints, PoseSpace::Metric).unwrap()
    }

    #[test]
    fn identity() {
        let p = pose(Vector3::zeros());
        assert_eq!(mpjpe(&p, &p).unwrap(), 0.0);
        assert_eq!(pck3d(&p, &p, 150.0).unwrap(), 1.0);
    }

    #[test]
    fn three_four_five() {
        let gt = pose(Vector3::zeros());
        let mut pred = gt.clone();
        for (k, j) in pred.joints.iter_mut().enumerate() {
            if k != gt.root {
                *j += Vector3::new(3.0, 4.0, 0.0);
            }
        }
        // root untouched: 15 joints at 5 mm, root at 0
        assert!((mpjpe(&pred, &gt).unwrap() - 5.0 * 15.0 / 16.0).abs() < 1e-12);
        // every joint offset relative to the root
        let mut pred2 = gt.clone();
        pred2.joints[gt.root] -= Vector3::new(3.0, 4.0, 0.0);
        let e = joint_errors(&pred2, &gt).unwrap();
        assert!(e.iter().enumerate().all(|(k, &d)| k == gt.root || (d - 5.0).abs() < 1e-12));
    }

    #[test]
    fn global_translation_invariant() {
        let gt = pose(Vector3::zeros());
        let mut pred = pose(Vector3::new(500.0, 0.0, 0.0));
        pred.joints[3].x += 40.0;
        let base = {
            let mut p = gt.clone();
            p.joints[3].x += 40.0;
            mpjpe(&p, &gt).unwrap()
        };
        assert!((mpjpe(&pred, &gt).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn pck_half() {
        let gt = pose(Vector3::zeros());
        let mut pred = gt.clone();
        for (_, j) in pred.joints.iter_mut().enumerate().filter(|(k, _)| *k != 6).take(8) {
            j.z += 200.0;
        }
        assert_eq!(pck3d(&pred, &gt, 150.0).unwrap(), 0.5);
    }

    #[test]
    fn pck_threshold_is_strict() {
        assert_eq!(pck_from_errors(&[150.0; 16], 150.0), 0.0);
        assert_eq!(pck_from_errors(&[149.999; 16], 150.0), 1.0);
        // pose level: every non-root joint exactly 150 mm off; only the root counts
        let gt = pose(Vector3::zeros());
        let mut pred = gt.clone();
        for (k, j) in pred.joints.iter_mut().enumerate() {
            if k != gt.root {
                j.y += 150.0;
            }
        }
        assert_eq!(pck3d(&pred, &gt, 150.0).unwrap(), 1.0 / 16.0);
    }

    #[test]
    fn mismatched_skeletons() {
        let a = pose(Vector3::zeros());
        let mut b = a.clone();
        b.taxonomy = crate::pose::Taxonomy::Mpii16;
        assert!(mpjpe(&a, &b).is_err());
        let mut c = a.clone();
        c.space = PoseSpace::Image;
        assert!(mpjpe(&c, &a).is_err());
    }

    #[test]
    fn report_structure() {
        let gt = pose(Vector3::zeros());
        let mut pred = gt.clone();
        pred.joints[0].z += 300.0;
        let r = MetricsReport::evaluate(&[(pred, gt)], 150.0).unwrap();
        assert_eq!(r.pck3d, 15.0 / 16.0);
        let v = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v["per_joint"].as_object().unwrap().keys().collect();
        assert_eq!(keys[0], "rightfoot");
        assert_eq!(v["per_joint"]["rightfoot"]["mpjpe_mm"], 300.0);
    }
}
