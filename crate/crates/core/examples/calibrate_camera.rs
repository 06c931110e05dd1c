//! Recovers a camera from 3D-2D correspondences with the DLT and checks the
//! result against the camera that generated the image points.

use geoaff::scene::{calibrate_dlt, rotation_about, Camera, Correspondence};
use nalgebra::{Point2, Point3, Vector3};

fn main() -> geoaff::Result<()> {
    let truth = Camera::new(
        900.0,
        880.0,
        640.0,
        360.0,
        1280,
        720,
        rotation_about(Vector3::new(0.2, 1.0, 0.0), 0.3),
        Vector3::new(-200.0, 100.0, 500.0),
    )?;

    let mut points = vec![];
    for i in 0..4 {
        for j in 0..3 {
            for k in 0..3 {
                let world = Point3::new(-600.0 + 400.0 * i as f64, -400.0 + 400.0 * j as f64, 3000.0 + 500.0 * k as f64);
                let (x, y, _) = truth.project(&world)?;
                points.push(Correspondence { world, image: Point2::new(x, y) });
            }
        }
    }

    let calib = calibrate_dlt(&points, 1280, 720)?;
    let cam = &calib.camera;
    let k = cam.intrinsics();
    println!("fx {:.3}  fy {:.3}  cx {:.3}  cy {:.3}", k[(0, 0)], k[(1, 1)], k[(0, 2)], k[(1, 2)]);
    println!("center {:?}", cam.center().coords.as_slice());
    println!("true center {:?}", truth.center().coords.as_slice());
    println!("mean reprojection error {:.2e} px, skew {:.2e}", calib.mean_reprojection_error, calib.skew);
    Ok(())
}
