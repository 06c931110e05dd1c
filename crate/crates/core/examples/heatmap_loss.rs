//! Builds Gaussian heatmap targets for a crop, decodes them back to source
//! pixels and evaluates the combined training loss.

use geoaff::mldepth::render_mld;
use geoaff::pose::{
    argmax_decode, gaussian_target, total_loss, CropTransform, DepthNormalizer, LossInputs, LossWeights, Pose3D,
    PoseSpace,
};
use geoaff::scene::{Camera, TriangleMesh};
use nalgebra::{Point3, Vector3};

fn main() -> geoaff::Result<()> {
    let crop = CropTransform::square(80.0, 60.0, 64.0, 256)?;
    let joints: Vec<[f64; 2]> = (0..16).map(|j| [40.0 + 12.0 * j as f64, 60.0 + 7.0 * j as f64]).collect();
    let scale = 64.0 / 256.0;
    let target = gaussian_target(&joints.iter().map(|p| [p[0] * scale, p[1] * scale]).collect::<Vec<_>>(), 64, 64, 3.0)?;

    let decoded = argmax_decode(&target, &crop);
    let (sx, sy) = crop.to_source(decoded[5][0], decoded[5][1]);
    println!(
        "joint 5: crop ({:.0}, {:.0}), decoded ({:.0}, {:.0}), source ({sx:.1}, {sy:.1})",
        joints[5][0], joints[5][1], decoded[5][0], decoded[5][1]
    );

    let floor = TriangleMesh::axis_aligned_box(Point3::new(-5000.0, -5000.0, 2800.0), Point3::new(5000.0, 5000.0, 3200.0))?;
    let map = render_mld(&floor, &Camera::axis_aligned(125.0, 125.0, 80.0, 60.0, 160, 120)?, 4)?;

    let normalizer = DepthNormalizer::new(1000.0, 6000.0)?;
    let depth_gt: Vec<f64> = (0..16).map(|j| 2500.0 + 40.0 * j as f64).collect();
    let gt = Pose3D::gpa16(
        joints.iter().zip(&depth_gt).map(|(p, z)| Vector3::new(p[0], p[1], *z)).collect(),
        PoseSpace::Image,
    )?;
    // predicted depths are off by 100 mm, which puts the deeper joints into
    // the slab
    let depth_pred: Vec<f64> = depth_gt.iter().map(|z| normalizer.normalize(z + 100.0)).collect();

    let inputs = LossInputs {
        heatmap: &target,
        depth: &depth_pred,
        gt: &gt,
        crop: &crop,
        normalizer: &normalizer,
        map: Some(&map),
    };
    let loss = total_loss(&inputs, &LossWeights::default())?;
    println!("heatmap {:.3e}  depth {:.4}  geometry {:.4}  total {:.4}", loss.heatmap, loss.depth, loss.geometry, loss.total);
    Ok(())
}
