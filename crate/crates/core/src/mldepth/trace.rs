use nalgebra::{Point3, Vector3};

use crate::scene::{Aabb, Ray, TriangleMesh};

/// Hits closer than this (mm) along the ray are ignored.
pub const T_MIN: f64 = 1e-6;
/// Coincident hits closer than `MERGE_REL * scene diameter` collapse to one.
pub const MERGE_REL: f64 = 1e-6;
/// Rays with `|direction · normal|` below this are treated as tangent.
pub const PARALLEL_EPS: f64 = 1e-12;

const LEAF_SIZE: usize = 4;

/// Ordered distances `t_1 < t_2 < … < t_k` along a ray.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HitList(Vec<f64>);

impl HitList {
    /// Sorts raw hit distances and collapses runs closer than `merge_eps`.
    pub fn from_raw(mut hits: Vec<f64>, merge_eps: f64) -> Self {
        hits.sort_by(f64::total_cmp);
        let mut out: Vec<f64> = Vec::with_capacity(hits.len());
        let mut last = f64::NEG_INFINITY;
        for t in hits {
            // chained: a run of near-equal hits keeps its first member
            if t - last > merge_eps {
                out.push(t);
            }
            last = t;
        }
        HitList(out)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Watertight ray/triangle test (shear-and-scale formulation).
///
/// Edges are inclusive, so a ray through a shared edge reports a hit on
/// at least one of the adjacent triangles and never slips between them.
/// Returns the distance along the ray, or `None` on a miss, a tangent
/// triangle, or `t <= T_MIN`.
pub fn intersect_triangle(ray: &Ray, tri: &[Point3<f64>; 3]) -> Option<f64> {
    let d = ray.direction();
    let normal = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    let nn = normal.norm();
    if !(nn > 0.0) || (d.dot(&normal) / nn).abs() < PARALLEL_EPS {
        return None;
    }

    let kz = d.iamax();
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if d[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = d[kx] / d[kz];
    let sy = d[ky] / d[kz];
    let sz = 1.0 / d[kz];

    let a = tri[0] - ray.origin;
    let b = tri[1] - ray.origin;
    let c = tri[2] - ray.origin;
    let shear = |v: &Vector3<f64>| (v[kx] - sx * v[kz], v[ky] - sy * v[kz]);
    let (ax, ay) = shear(&a);
    let (bx, by) = shear(&b);
    let (cx, cy) = shear(&c);

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;
    if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
        return None;
    }
    let det = u + v + w;
    if det == 0.0 {
        return None;
    }
    let t_scaled = u * sz * a[kz] + v * sz * b[kz] + w * sz * c[kz];
    let t = t_scaled / det;
    (t > T_MIN && t.is_finite()).then_some(t)
}

fn ray_hits_box(origin: &Point3<f64>, inv_dir: &Vector3<f64>, bb: &Aabb) -> bool {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for k in 0..3 {
        if inv_dir[k].is_infinite() {
            if origin[k] < bb.min[k] || origin[k] > bb.max[k] {
                return false;
            }
            continue;
        }
        let mut near = (bb.min[k] - origin[k]) * inv_dir[k];
        let mut far = (bb.max[k] - origin[k]) * inv_dir[k];
        if near > far {
            std::mem::swap(&mut near, &mut far);
        }
        t0 = t0.max(near);
        t1 = t1.min(far);
        if t0 > t1 {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Multi-hit tracer over a bounding volume hierarchy.
///
/// Produces exactly the same [`HitList`] as testing every triangle; the
/// hierarchy only prunes triangles whose padded boxes the ray misses.
#[derive(Clone, Debug)]
pub struct Tracer<'m> {
    mesh: &'m TriangleMesh,
    nodes: Vec<Node>,
    order: Vec<usize>,
    merge_eps: f64,
}

impl<'m> Tracer<'m> {
    pub fn new(mesh: &'m TriangleMesh) -> Self {
        let diameter = mesh.diameter();
        let pad = 1e-9 * diameter.max(1.0);
        let n = mesh.triangles().len();
        let boxes: Vec<Aabb> = (0..n)
            .map(|t| {
                let mut bb = Aabb::empty();
                for p in mesh.triangle(t) {
                    bb.grow(&p);
                }
                bb.min -= Vector3::repeat(pad);
                bb.max += Vector3::repeat(pad);
                bb
            })
            .collect();
        let centroids: Vec<Point3<f64>> = boxes.iter().map(Aabb::center).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build(&mut nodes, &mut order, 0, n, &boxes, &centroids);
        }
        Tracer {
            mesh,
            nodes,
            order,
            merge_eps: MERGE_REL * diameter,
        }
    }

    pub fn mesh(&self) -> &TriangleMesh {
        self.mesh
    }

    pub fn merge_eps(&self) -> f64 {
        self.merge_eps
    }

    pub fn trace(&self, ray: &Ray) -> HitList {
        let mut hits = Vec::new();
        if self.nodes.is_empty() {
            return HitList::default();
        }
        let inv_dir = ray.direction().map(|d| 1.0 / d);
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if !ray_hits_box(&ray.origin, &inv_dir, node.bounds()) {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &t in &self.order[start..end] {
                        if let Some(d) = intersect_triangle(ray, &self.mesh.triangle(t)) {
                            hits.push(d);
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        HitList::from_raw(hits, self.merge_eps)
    }
}

fn build(
    nodes: &mut Vec<Node>,
    order: &mut [usize],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    centroids: &[Point3<f64>],
) -> usize {
    let bounds = order[start..end]
        .iter()
        .fold(Aabb::empty(), |acc, &t| acc.union(&boxes[t]));
    let index = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start, end });
        return index;
    }
    let mut cb = Aabb::empty();
    for &t in &order[start..end] {
        cb.grow(&centroids[t]);
    }
    let extent = cb.max - cb.min;
    let axis = extent.imax();
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        centroids[a][axis]
            .total_cmp(&centroids[b][axis])
            .then(a.cmp(&b))
    });
    nodes.push(Node::Leaf { bounds, start, end });
    let left = build(nodes, order, start, mid, boxes, centroids);
    let right = build(nodes, order, mid, end, boxes, centroids);
    nodes[index] = Node::Inner { bounds, left, right };
    index
}

/// All surface crossings of `ray` with `mesh`, ascending and deduplicated.
///
/// Tests every triangle. For many rays against one mesh build a [`Tracer`].
pub fn multi_hit_trace(mesh: &TriangleMesh, ray: &Ray) -> HitList {
    let hits = (0..mesh.triangles().len())
        .filter_map(|t| intersect_triangle(ray, &mesh.triangle(t)))
        .collect();
    HitList::from_raw(hits, MERGE_REL * mesh.diameter())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box() -> TriangleMesh {
        TriangleMesh::axis_aligned_box(Point3::origin(), Point3::new(1000.0, 1000.0, 1000.0)).unwrap()
    }

    #[test]
    fn slab_through_box() {
        let m = unit_box();
        let ray = Ray::new(Point3::new(500.0, 500.0, -1000.0), Vector3::z());
        // (500, 500) lies on the diagonal edge of both z faces
        assert_eq!(multi_hit_trace(&m, &ray).as_slice(), &[1000.0, 2000.0]);
        assert_eq!(Tracer::new(&m).trace(&ray).as_slice(), &[1000.0, 2000.0]);
    }

    #[test]
    fn disjoint_ray_misses() {
        let m = unit_box();
        let ray = Ray::new(Point3::new(500.0, 500.0, -1000.0), Vector3::y());
        assert!(multi_hit_trace(&m, &ray).is_empty());
        assert!(Tracer::new(&m).trace(&ray).is_empty());
    }

    #[test]
    fn shared_edge_is_one_hit() {
        // face z=0 is split along its diagonal; aim exactly at it, off-center
        let m = unit_box();
        let ray = Ray::new(Point3::new(250.0, 250.0, -500.0), Vector3::z());
        let raw: Vec<f64> = (0..m.triangles().len())
            .filter_map(|t| intersect_triangle(&ray, &m.triangle(t)))
            .collect();
        assert!(raw.len() >= 3, "edge crossing should be reported by both triangles: {raw:?}");
        assert_eq!(multi_hit_trace(&m, &ray).as_slice(), &[500.0, 1500.0]);
    }

    #[test]
    fn tangent_triangles_skipped() {
        let m = unit_box();
        // grazes along the x=0 face
        let ray = Ray::new(Point3::new(0.0, 300.0, -100.0), Vector3::z());
        let hits = multi_hit_trace(&m, &ray);
        assert!(hits.as_slice().iter().all(|&t| (t - 100.0).abs() < 1e-9 || (t - 1100.0).abs() < 1e-9));
    }

    #[test]
    fn hits_behind_origin_ignored() {
        let m = unit_box();
        let ray = Ray::new(Point3::new(300.0, 400.0, 500.0), Vector3::z());
        assert_eq!(multi_hit_trace(&m, &ray).as_slice(), &[500.0]);
    }

    #[test]
    fn merge_collapses_runs() {
        let h = HitList::from_raw(vec![3.0, 1.0, 1.0 + 1e-9, 2.0], 1e-6);
        assert_eq!(h.as_slice(), &[1.0, 2.0, 3.0]);
    }
}
