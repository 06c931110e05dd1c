//! Writes each depth layer of a rendered scene as an inverse-depth PNG.

use geoaff::mldepth::{render_mld, visualize_layers};
use geoaff::scene::{Camera, TriangleMesh};
use nalgebra::Point3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pillars: Vec<TriangleMesh> = (-2..=2)
        .map(|i| {
            let x = i as f64 * 700.0;
            let z = 2000.0 + 400.0 * (i as f64).abs();
            TriangleMesh::axis_aligned_box(Point3::new(x - 200.0, -1500.0, z), Point3::new(x + 200.0, 1500.0, z + 400.0))
        })
        .collect::<Result<_, _>>()?;
    let wall = TriangleMesh::axis_aligned_box(Point3::new(-5000.0, -3000.0, 4500.0), Point3::new(5000.0, 3000.0, 4700.0))?;
    let scene = TriangleMesh::merge(pillars.iter().chain([&wall]))?;
    let map = render_mld(&scene, &Camera::axis_aligned(160.0, 160.0, 160.0, 120.0, 320, 240)?, 4)?;

    let dir = std::env::temp_dir().join("geoaff_layers");
    std::fs::create_dir_all(&dir)?;
    for (k, img) in visualize_layers(&map, 4)?.iter().enumerate() {
        let path = dir.join(format!("layer_{k}.png"));
        img.save(&path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
