//! Checks which joints of a pose sit inside scene geometry and how deep.

use geoaff::affordance::{free_intervals, gcl, is_valid, joint_penetrations};
use geoaff::mldepth::render_mld;
use geoaff::pose::{Pose3D, PoseSpace, GPA16_NAMES};
use geoaff::scene::{Camera, TriangleMesh};
use nalgebra::{Point3, Vector3};

fn main() -> geoaff::Result<()> {
    // a sofa-like block in front of a wall
    let sofa = TriangleMesh::axis_aligned_box(Point3::new(-800.0, 0.0, 2400.0), Point3::new(800.0, 600.0, 3200.0))?;
    let wall = TriangleMesh::axis_aligned_box(Point3::new(-3000.0, -2000.0, 4000.0), Point3::new(3000.0, 2000.0, 4300.0))?;
    let camera = Camera::axis_aligned(200.0, 200.0, 80.0, 60.0, 160, 120)?;
    let map = render_mld(&TriangleMesh::merge([&sofa, &wall])?, &camera, 6)?;

    // a person standing at 2.3 m whose left side leans into the sofa
    let joints = (0..16)
        .map(|j| {
            let x = 70.0 + (j % 4) as f64 * 5.0;
            let y = 62.0 + (j / 4) as f64 * 10.0;
            let z = if j % 4 == 3 { 2550.0 } else { 2300.0 };
            Vector3::new(x, y, z)
        })
        .collect();
    let pose = Pose3D::gpa16(joints, PoseSpace::Image)?;

    let pen = joint_penetrations(&pose, &map)?;
    let ok = is_valid(&pose, &map)?;
    for (j, name) in GPA16_NAMES.iter().enumerate() {
        if !ok[j] {
            let p = pose.joints[j];
            let free = free_intervals(&map, p.x, p.y)?;
            let spans: Vec<String> = free.intervals().iter().map(|i| format!("({}, {})", i.lo, i.hi)).collect();
            println!("{name:>12}: {:6.1} mm inside, free depths {}", pen[j], spans.join(" "));
        }
    }
    println!("geometry consistency loss: {:.1} mm", gcl(&pose, &map)?);
    Ok(())
}
