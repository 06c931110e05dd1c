//! Independent reference implementations and random fixtures shared by the
//! integration tests.

#![allow(dead_code)]

use geoaff::mldepth::{MultiLayerDepthMap, SENTINEL};
use geoaff::pose::{Pose3D, PoseSpace, Taxonomy};
use geoaff::scene::{Camera, Ray, TriangleMesh};
use nalgebra::{Point3, Vector3};
use rand::Rng;

/// Ray/plane intersection followed by a barycentric inside test.
pub fn oracle_hit(ray: &Ray, a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> Option<f64> {
    let n = (b - a).cross(&(c - a));
    let n_hat = n / n.norm();
    let d = ray.direction();
    let denom = d.dot(&n_hat);
    if denom.abs() < 1e-12 {
        return None;
    }
    let t = (a - ray.origin).dot(&n_hat) / denom;
    if t <= 1e-6 {
        return None;
    }
    let p = ray.origin + d * t;
    let v0 = b - a;
    let v1 = c - a;
    let v2 = p - a;
    let (d00, d01, d11) = (v0.dot(&v0), v0.dot(&v1), v1.dot(&v1));
    let (d20, d21) = (v2.dot(&v0), v2.dot(&v1));
    let den = d00 * d11 - d01 * d01;
    let v = (d11 * d20 - d01 * d21) / den;
    let w = (d00 * d21 - d01 * d20) / den;
    let u = 1.0 - v - w;
    (u >= 0.0 && v >= 0.0 && w >= 0.0).then_some(t)
}

/// All hits of every triangle, sorted, with runs closer than `1e-6 ×`
/// bounding-box diagonal collapsed to their first member.
pub fn oracle_trace(mesh: &TriangleMesh, ray: &Ray) -> Vec<f64> {
    let verts = mesh.vertices();
    let mut lo = verts[0];
    let mut hi = verts[0];
    for v in verts {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    let eps = 1e-6 * (hi - lo).norm();
    let mut hits: Vec<f64> = mesh
        .triangles()
        .iter()
        .filter_map(|t| oracle_hit(ray, &verts[t[0] as usize], &verts[t[1] as usize], &verts[t[2] as usize]))
        .collect();
    hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = vec![];
    let mut prev = f64::NEG_INFINITY;
    for t in hits {
        if t - prev > eps {
            out.push(t);
        }
        prev = t;
    }
    out
}

pub fn random_point(rng: &mut impl Rng, half: f64) -> Point3<f64> {
    Point3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

/// Up to `max_tris` random non-degenerate triangles in a 2 m cube.
pub fn random_mesh(rng: &mut impl Rng, max_tris: usize) -> TriangleMesh {
    let n = rng.random_range(1..=max_tris);
    let mut vertices = vec![];
    let mut triangles = vec![];
    while triangles.len() < n {
        let [a, b, c] = [(); 3].map(|_| random_point(rng, 1000.0));
        if (b - a).cross(&(c - a)).norm() < 1.0 {
            continue;
        }
        let base = vertices.len() as u32;
        vertices.extend([a, b, c]);
        triangles.push([base, base + 1, base + 2]);
    }
    TriangleMesh::new(vertices, triangles).unwrap()
}

/// A map whose pixels hold random strictly increasing surface lists of
/// any length up to `layers`, including odd counts and empty pixels.
pub fn random_map(rng: &mut impl Rng, height: usize, width: usize, layers: usize) -> MultiLayerDepthMap {
    let cam = Camera::axis_aligned(100.0, 100.0, (width / 2) as f64, (height / 2) as f64, width as u32, height as u32)
        .unwrap();
    let mut values = Vec::with_capacity(height * width * layers);
    for _ in 0..height * width {
        let k = rng.random_range(0..=layers);
        let mut d = rng.random_range(300.0f32..1500.0);
        for l in 0..layers {
            if l < k {
                values.push(d.round());
                d = d.round() + rng.random_range(20.0f32..900.0);
            } else {
                values.push(SENTINEL);
            }
        }
    }
    MultiLayerDepthMap::from_raw(height, width, layers, values, cam).unwrap()
}

/// A 16-joint image-space pose on random pixels of `map`. About a quarter
/// of the depths sit exactly on a surface of their pixel.
pub fn random_pose(rng: &mut impl Rng, map: &MultiLayerDepthMap) -> Pose3D {
    let joints = (0..16)
        .map(|_| {
            let row = rng.random_range(0..map.height());
            let col = rng.random_range(0..map.width());
            let s = map.surfaces(row, col);
            let z = if !s.is_empty() && rng.random_bool(0.25) {
                s[rng.random_range(0..s.len())] as f64
            } else {
                rng.random_range(0.0..s.last().map_or(3000.0, |&d| d as f64 + 500.0))
            };
            Vector3::new(col as f64, row as f64, z)
        })
        .collect();
    Pose3D::gpa16(joints, PoseSpace::Image).unwrap()
}

/// A random 16-joint metric pose within a 2 m cube around `center`.
pub fn random_metric_pose(rng: &mut impl Rng, center: Vector3<f64>) -> Pose3D {
    let joints = (0..16).map(|_| center + random_point(rng, 1000.0).coords).collect();
    Pose3D::new(
        Taxonomy::Gpa16,
        6,
        geoaff::pose::GPA16_NAMES.iter().map(|s| s.to_string()).collect(),
        joints,
        PoseSpace::Metric,
    )
    .unwrap()
}

/// Slab penetration straight from the layer list: entries at even
/// indices, exits at odd ones, a missing exit meaning unbounded.
pub fn oracle_penetration(z: f64, surfaces: &[f32]) -> f64 {
    let mut k = 0;
    while k < surfaces.len() {
        let lo = surfaces[k] as f64;
        let hi = surfaces.get(k + 1).map_or(f64::INFINITY, |&d| d as f64);
        if z > lo && z < hi {
            return (z - lo).min(hi - z);
        }
        k += 2;
    }
    0.0
}
