//! Renders a small room (floor, back wall and a table) into a multi-layer
//! depth map and prints the surfaces behind a few pixels.

use geoaff::mldepth::{render_mld, save_mld};
use geoaff::scene::{Camera, TriangleMesh};
use nalgebra::Point3;

fn main() -> geoaff::Result<()> {
    let table_top = TriangleMesh::axis_aligned_box(Point3::new(-600.0, 200.0, 2500.0), Point3::new(600.0, 240.0, 3300.0))?;
    let back_wall = TriangleMesh::axis_aligned_box(Point3::new(-3000.0, -2000.0, 5000.0), Point3::new(3000.0, 1200.0, 5200.0))?;
    let floor = TriangleMesh::axis_aligned_box(Point3::new(-3000.0, 1000.0, 500.0), Point3::new(3000.0, 1200.0, 5000.0))?;
    let room = TriangleMesh::merge([&table_top, &back_wall, &floor])?;

    let camera = Camera::axis_aligned(320.0, 320.0, 160.0, 120.0, 320, 240)?;
    let map = render_mld(&room, &camera, 8)?;

    for (row, col) in [(120, 160), (140, 160), (230, 160), (10, 10)] {
        let layers: Vec<String> = map.surfaces(row, col).iter().map(|d| format!("{d:.0}")).collect();
        println!("pixel ({row:3}, {col:3}): [{}] mm", layers.join(", "));
    }

    let path = std::env::temp_dir().join("geoaff_room.mld");
    save_mld(&map, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
