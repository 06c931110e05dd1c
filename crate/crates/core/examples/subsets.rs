//! Flags frames where the person is heavily occluded by scene geometry or
//! standing close to it.

use geoaff::mldepth::render_mld;
use geoaff::pipeline::{classify_frame, SubsetConfig};
use geoaff::pose::{Pose3D, PoseSpace};
use geoaff::scene::{Camera, TriangleMesh};
use nalgebra::{Point3, Vector3};

fn main() -> geoaff::Result<()> {
    let counter = TriangleMesh::axis_aligned_box(Point3::new(-2000.0, -200.0, 2000.0), Point3::new(2000.0, 1500.0, 2600.0))?;
    let camera = Camera::axis_aligned(100.0, 100.0, 64.0, 48.0, 128, 96)?;
    let map = render_mld(&counter, &camera, 4)?;
    let cfg = SubsetConfig::default();

    // the same skeleton standing behind the counter, then in front of it
    for (id, depth) in [(0, 2800.0), (1, 1900.0), (2, 1200.0)] {
        let joints = (0..16).map(|j| Vector3::new(60.0 + (j % 2) as f64 * 8.0, 10.0 + j as f64 * 4.0, depth)).collect();
        let pose = Pose3D::gpa16(joints, PoseSpace::Image)?;
        let r = classify_frame(id, &pose, &map, &counter, &cfg)?;
        println!(
            "frame {id} at {depth} mm: {} occluded, {} close, nearest surface {:.0} mm, subsets {:?}",
            r.occluded_count, r.close_count, r.min_surface_dist_mm, r.subsets
        );
    }
    Ok(())
}
