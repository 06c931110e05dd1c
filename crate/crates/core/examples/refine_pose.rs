//! Pushes a noisy pose out of occupied space with the geometry-aware
//! refinement, then compares it to the closed-form projection.

use geoaff::affordance::gcl;
use geoaff::mldepth::render_mld;
use geoaff::pose::{mpjpe, Pose3D, PoseSpace, GPA16_BONES};
use geoaff::refine::{nearest_valid_projection, refine_pose, RefineConfig};
use geoaff::scene::{Camera, TriangleMesh};
use nalgebra::{Point3, Vector3};

fn main() -> geoaff::Result<()> {
    let wall = TriangleMesh::axis_aligned_box(Point3::new(-4000.0, -3000.0, 3000.0), Point3::new(4000.0, 3000.0, 3800.0))?;
    let camera = Camera::axis_aligned(120.0, 120.0, 64.0, 48.0, 128, 96)?;
    let map = render_mld(&wall, &camera, 4)?;

    // a person pressed flat against the wall, plus depth noise that drives
    // some joints into it
    let noise = [60.0, -20.0, 90.0, 140.0, -40.0, 30.0, 0.0, 75.0, 110.0, -10.0, 55.0, 20.0, 95.0, -5.0, 130.0, 45.0];
    let xy = |j: usize| Vector3::new(52.0 + (j % 4) as f64 * 8.0, 20.0 + (j / 4) as f64 * 14.0, 3000.0);
    let truth = Pose3D::gpa16((0..16).map(xy).collect(), PoseSpace::Image)?;
    let noisy = truth.with_depths(&noise.iter().map(|n| 3000.0 + n).collect::<Vec<_>>());

    let edges: Vec<(usize, usize)> = GPA16_BONES.to_vec();
    let metric = truth.to_metric(&camera)?;
    let lengths: Vec<f64> = edges.iter().map(|&(a, b)| (metric.joints[a] - metric.joints[b]).norm()).collect();

    let report = refine_pose(&noisy, &map, &edges, &lengths, &RefineConfig::default())?;
    let projected = nearest_valid_projection(&noisy, &map)?;

    let err = |p: &Pose3D| -> geoaff::Result<f64> { mpjpe(&p.to_metric(&camera)?, &metric) };
    println!("            gcl (mm)   MPJPE (mm)");
    println!("noisy     {:9.1}   {:10.1}", gcl(&noisy, &map)?, err(&noisy)?);
    println!("refined   {:9.1}   {:10.1}", report.gcl_after, err(&report.pose)?);
    println!("projected {:9.1}   {:10.1}", gcl(&projected, &map)?, err(&projected)?);
    println!("{} iterations, objective {:.1} -> {:.1}", report.iterations, report.objective[0], report.objective.last().unwrap());
    Ok(())
}
