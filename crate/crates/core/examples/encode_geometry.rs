//! Turns a depth map into the two kinds of network input features: signed
//! offsets of each layer from the root depth, and a penetration volume.

use geoaff::affordance::{encode_depth_features, encode_volumetric, volumetric_samples, NO_SURFACE_OFFSET};
use geoaff::mldepth::render_mld;
use geoaff::pose::CropTransform;
use geoaff::scene::{Camera, TriangleMesh};
use nalgebra::Point3;

fn main() -> geoaff::Result<()> {
    let chair = TriangleMesh::axis_aligned_box(Point3::new(-300.0, -100.0, 2000.0), Point3::new(300.0, 500.0, 2500.0))?;
    let camera = Camera::axis_aligned(250.0, 250.0, 100.0, 75.0, 200, 150)?;
    let map = render_mld(&chair, &camera, 4)?;
    let crop = CropTransform::square(100.0, 75.0, 120.0, 256)?;

    let offsets = encode_depth_features(&map, &crop, 2200.0, 32)?;
    println!("offset grid {}x{}x{}", offsets.height(), offsets.width(), offsets.channels());
    for col in [4, 16, 28] {
        let row: Vec<String> = (0..offsets.channels())
            .map(|c| match offsets.get(20, col, c) {
                v if v == NO_SURFACE_OFFSET => "none".to_string(),
                v => format!("{v:+.0}"),
            })
            .collect();
        println!("  cell (20, {col:2}): [{}]", row.join(", "));
    }

    let samples = volumetric_samples(2200.0, 9, 400.0);
    let volume = encode_volumetric(&map, &crop, 2200.0, 9, 400.0, 32)?;
    let column: Vec<String> = (0..volume.channels()).map(|c| format!("{:.0}", volume.get(20, 16, c))).collect();
    println!("depth samples {samples:?}");
    println!("penetration at cell (20, 16): [{}]", column.join(", "));
    Ok(())
}
