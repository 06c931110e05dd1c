//! Traces rays through a mesh with the BVH tracer and with the brute-force
//! loop, and shows that they return the same hit list.

use geoaff::mldepth::{multi_hit_trace, Tracer};
use geoaff::scene::{Ray, TriangleMesh};
use nalgebra::{Point3, Vector3};

fn main() -> geoaff::Result<()> {
    let boxes: Vec<TriangleMesh> = (0..4)
        .map(|k| {
            let z = 1000.0 + 700.0 * k as f64;
            TriangleMesh::axis_aligned_box(Point3::new(-300.0, -300.0, z), Point3::new(300.0, 300.0, z + 250.0))
        })
        .collect::<Result<_, _>>()?;
    let mesh = TriangleMesh::merge(boxes.iter())?;
    let tracer = Tracer::new(&mesh);
    println!("{} triangles, merge tolerance {:.2e} mm", mesh.triangles().len(), tracer.merge_eps());

    for dx in [0.0, 0.05, 0.15] {
        let ray = Ray::new(Point3::origin(), Vector3::new(dx, 0.02, 1.0));
        let fast = tracer.trace(&ray);
        assert_eq!(fast, multi_hit_trace(&mesh, &ray));
        let ts: Vec<String> = fast.as_slice().iter().map(|t| format!("{t:.1}")).collect();
        println!("direction ({dx}, 0.02, 1): {} hits at t = [{}]", fast.len(), ts.join(", "));
    }
    Ok(())
}
