//! Meshes, cameras, rays and calibration.

mod calib;
mod camera;
mod mesh;

pub use calib::{calibrate_dlt, Calibration, Correspondence};
pub use camera::{rotation_about, Camera, Distortion, Ray};
pub use mesh::{Aabb, TriangleMesh, MIN_TRIANGLE_AREA};
