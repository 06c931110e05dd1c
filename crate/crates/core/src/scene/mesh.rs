use std::path::Path;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

/// Smallest triangle area (mm²) accepted at construction.
pub const MIN_TRIANGLE_AREA: f64 = 1e-9;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x
    }

    pub fn diagonal(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            (self.max - self.min).norm()
        }
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }
}

/// World-space triangle soup in millimeters.
///
/// Every triangle indexes valid vertices and has area above
/// [`MIN_TRIANGLE_AREA`]; both are checked on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let count = vertices.len();
        for tri in &triangles {
            for &i in tri {
                if i as usize >= count {
                    return Err(Error::IndexOutOfRange {
                        line: 0,
                        index: i as i64 + 1,
                        count,
                    });
                }
            }
        }
        let mesh = TriangleMesh {
            vertices,
            triangles,
        };
        for t in 0..mesh.triangles.len() {
            let area = mesh.triangle_area(t);
            if !(area > MIN_TRIANGLE_AREA) {
                return Err(Error::DegenerateTriangle { triangle: t, area });
            }
        }
        Ok(mesh)
    }

    /// Closed axis-aligned box with outward-facing triangles.
    pub fn axis_aligned_box(min: Point3<f64>, max: Point3<f64>) -> Result<Self> {
        let v = |x: bool, y: bool, z: bool| {
            Point3::new(
                if x { max.x } else { min.x },
                if y { max.y } else { min.y },
                if z { max.z } else { min.z },
            )
        };
        let vertices = vec![
            v(false, false, false),
            v(true, false, false),
            v(true, true, false),
            v(false, true, false),
            v(false, false, true),
            v(true, false, true),
            v(true, true, true),
            v(false, true, true),
        ];
        let quads = [
            [0, 3, 2, 1], // -z
            [4, 5, 6, 7], // +z
            [0, 1, 5, 4], // -y
            [3, 7, 6, 2], // +y
            [0, 4, 7, 3], // -x
            [1, 2, 6, 5], // +x
        ];
        let triangles = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        TriangleMesh::new(vertices, triangles)
    }

    /// Concatenates meshes into one soup.
    pub fn merge<'a>(meshes: impl IntoIterator<Item = &'a TriangleMesh>) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for m in meshes {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            triangles.extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        TriangleMesh::new(vertices, triangles)
    }

    pub fn load_obj(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_obj(&text)
    }

    /// Parses Wavefront OBJ `v` and `f` records; everything else is ignored.
    ///
    /// Polygons are fan-triangulated from their first vertex. Face indices
    /// may be negative (relative to the vertices read so far) and may carry
    /// `/vt/vn` suffixes.
    pub fn parse_obj(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        // (line, resolved zero-based index as written)
        let mut faces: Vec<(usize, Vec<i64>)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            let mut tokens = content.split_whitespace();
            match tokens.next() {
                Some("v") => {
                    let coords: Vec<f64> = tokens
                        .map(|t| {
                            t.parse::<f64>().map_err(|_| Error::ObjParse {
                                line,
                                message: format!("bad vertex coordinate {t:?}"),
                            })
                        })
                        .collect::<Result<_>>()?;
                    if coords.len() < 3 || coords.len() > 4 {
                        return Err(Error::ObjParse {
                            line,
                            message: format!("vertex needs 3 coordinates, got {}", coords.len()),
                        });
                    }
                    if coords.iter().any(|c| !c.is_finite()) {
                        return Err(Error::ObjParse {
                            line,
                            message: "non-finite vertex coordinate".into(),
                        });
                    }
                    vertices.push(Point3::new(coords[0], coords[1], coords[2]));
                }
                Some("f") => {
                    let mut idx = Vec::new();
                    for t in tokens {
                        let head = t.split('/').next().unwrap_or("");
                        let i: i64 = head.parse().map_err(|_| Error::ObjParse {
                            line,
                            message: format!("bad face index {t:?}"),
                        })?;
                        let resolved = match i {
                            0 => {
                                return Err(Error::ObjParse {
                                    line,
                                    message: "face index 0 is invalid (OBJ is 1-based)".into(),
                                })
                            }
                            i if i > 0 => i - 1,
                            i => vertices.len() as i64 + i,
                        };
                        if resolved < 0 {
                            return Err(Error::IndexOutOfRange {
                                line,
                                index: i,
                                count: vertices.len(),
                            });
                        }
                        idx.push(resolved);
                    }
                    if idx.len() < 3 {
                        return Err(Error::ObjParse {
                            line,
                            message: format!("face needs at least 3 vertices, got {}", idx.len()),
                        });
                    }
                    faces.push((line, idx));
                }
                _ => {}
            }
        }

        let count = vertices.len();
        let mut triangles = Vec::new();
        for (line, idx) in faces {
            if let Some(&bad) = idx.iter().find(|&&i| i as usize >= count) {
                return Err(Error::IndexOutOfRange {
                    line,
                    index: bad + 1,
                    count,
                });
            }
            for k in 1..idx.len() - 1 {
                triangles.push([idx[0] as u32, idx[k] as u32, idx[k + 1] as u32]);
            }
        }
        TriangleMesh::new(vertices, triangles)
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Point3<f64>; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn triangle_normal(&self, t: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(t);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn bounds(&self) -> Aabb {
        let mut bb = Aabb::empty();
        for tri in &self.triangles {
            for &i in tri {
                bb.grow(&self.vertices[i as usize]);
            }
        }
        bb
    }

    /// Bounding-box diagonal of the referenced vertices.
    pub fn diameter(&self) -> f64 {
        self.bounds().diagonal()
    }

    pub fn to_obj(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE_OBJ: &str = "\
# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
vn 0 0 1
f 1 4 3
f 1 3 2
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 4 8 7
f 4 7 3
f 1 5 8
f 1 8 4
f 2 3 7
f 2 7 6
";

    #[test]
    fn cube_topology() {
        let m = TriangleMesh::parse_obj(CUBE_OBJ).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.triangles().len(), 12);
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let m = TriangleMesh::parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn slash_and_negative_indices() {
        let m = TriangleMesh::parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nf -3/1/1 -2//1 -1\n").unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 2]]);
    }

    #[test]
    fn out_of_range_index_reports_line() {
        let mut obj = String::from(CUBE_OBJ);
        obj.push_str("f 1 2 9\n");
        match TriangleMesh::parse_obj(&obj) {
            Err(Error::IndexOutOfRange { index, count, line }) => {
                assert_eq!(index, 9);
                assert_eq!(count, 8);
                assert_eq!(line, 23);
            }
            other => panic!("expected out-of-range error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_vertex_reports_line() {
        match TriangleMesh::parse_obj("v 0 0 0\nv 1 x 0\n") {
            Err(Error::ObjParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let err = TriangleMesh::parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 4\nf 1 2 3\n")
            .unwrap_err();
        assert!(matches!(err, Error::DegenerateTriangle { triangle: 1, .. }));
    }

    #[test]
    fn box_helper_is_closed_and_outward() {
        let m = TriangleMesh::axis_aligned_box(Point3::origin(), Point3::new(2.0, 3.0, 4.0)).unwrap();
        let c = m.bounds().center();
        for t in 0..m.triangles().len() {
            let [a, _, _] = m.triangle(t);
            assert!(m.triangle_normal(t).dot(&(a - c)) > 0.0);
        }
        // every edge shared by exactly two triangles
        let mut edges = std::collections::HashMap::new();
        for tri in m.triangles() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        assert!(edges.values().all(|&n| n == 2));
    }

    #[test]
    fn obj_round_trip() {
        let m = TriangleMesh::axis_aligned_box(Point3::new(-1.5, 0.0, 2.0), Point3::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(TriangleMesh::parse_obj(&m.to_obj()).unwrap(), m);
    }
}
