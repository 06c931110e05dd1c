//! Scores predictions against ground truth with root-relative MPJPE and
//! PCK3D, including the per-joint breakdown.

use geoaff::pose::{MetricsReport, Pose3D, PoseSpace, GPA16_NAMES};
use nalgebra::Vector3;

fn main() -> geoaff::Result<()> {
    let gt_joints: Vec<Vector3<f64>> =
        (0..16).map(|j| Vector3::new((j % 4) as f64 * 150.0, (j / 4) as f64 * 250.0, 4000.0)).collect();
    let gt = Pose3D::gpa16(gt_joints.clone(), PoseSpace::Metric)?;

    let mut pairs = vec![];
    for k in 1..=3 {
        let pred_joints = gt_joints
            .iter()
            .enumerate()
            .map(|(j, p)| p + Vector3::new(0.0, 0.0, 40.0 * k as f64 * ((j % 3) as f64 - 1.0)))
            .collect();
        pairs.push((Pose3D::gpa16(pred_joints, PoseSpace::Metric)?, gt.clone()));
    }

    let report = MetricsReport::evaluate(&pairs, 150.0)?;
    println!("MPJPE {:.1} mm, PCK3D@150 {:.3} over {} poses", report.mpjpe_mm, report.pck3d, report.poses);
    for (name, (_, m)) in GPA16_NAMES.iter().zip(&report.per_joint.0) {
        println!("  {name:>12}  {:6.1} mm  {:.2}", m.mpjpe_mm, m.pck3d);
    }
    Ok(())
}
