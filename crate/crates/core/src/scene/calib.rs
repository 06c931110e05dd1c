//! Linear camera calibration from 2D–3D correspondences.
//!
//! The projection matrix is estimated with the direct linear transform on
//! Hartley-normalized coordinates, then split into intrinsics and a proper
//! rotation by RQ decomposition.

use nalgebra::{DMatrix, Matrix3, Matrix3x4, Matrix4, Point2, Point3, Vector3};

use super::camera::Camera;
use crate::error::{Error, Result};

/// Relative singular-value floor below which the system is rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correspondence {
    pub world: Point3<f64>,
    pub image: Point2<f64>,
}

#[derive(Clone, Debug)]
pub struct Calibration {
    pub camera: Camera,
    /// Projection matrix scaled so that the intrinsic matrix has unit `[2][2]`.
    pub projection: Matrix3x4<f64>,
    /// Skew term discarded when building the pinhole camera.
    pub skew: f64,
    pub mean_reprojection_error: f64,
}

fn normalize_2d(pts: &[Point2<f64>]) -> Matrix3<f64> {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Vector3::zeros(), |acc, p| acc + Vector3::new(p.x, p.y, 0.0)) / n;
    let mean_dist = pts.iter().map(|p| (p.x - c.x).hypot(p.y - c.y)).sum::<f64>() / n;
    let s = if mean_dist > 0.0 { 2f64.sqrt() / mean_dist } else { 1.0 };
    Matrix3::new(s, 0.0, -s * c.x, 0.0, s, -s * c.y, 0.0, 0.0, 1.0)
}

fn normalize_3d(pts: &[Point3<f64>]) -> Matrix4<f64> {
    let n = pts.len() as f64;
    let c = pts.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n;
    let mean_dist = pts.iter().map(|p| (p.coords - c).norm()).sum::<f64>() / n;
    let s = if mean_dist > 0.0 { 3f64.sqrt() / mean_dist } else { 1.0 };
    let mut t = Matrix4::identity() * s;
    t[(3, 3)] = 1.0;
    t.fixed_view_mut::<3, 1>(0, 3).copy_from(&(-s * c));
    t
}

/// Splits a 3×3 matrix into upper-triangular `K` and orthogonal `Q`, `m = K·Q`.
fn rq3(m: &Matrix3<f64>) -> (Matrix3<f64>, Matrix3<f64>) {
    let flip = Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0);
    let qr = (flip * m).transpose().qr();
    let (q, r) = (qr.q(), qr.r());
    let k = flip * r.transpose() * flip;
    let rot = flip * q.transpose();
    (k, rot)
}

/// Estimates a distortion-free camera of the given image size.
///
/// Needs at least six non-coplanar correspondences. Image points are taken
/// to be undistorted already.
pub fn calibrate_dlt(points: &[Correspondence], width: u32, height: u32) -> Result<Calibration> {
    if points.len() < 6 {
        return Err(Error::InsufficientPoints {
            needed: 6,
            got: points.len(),
        });
    }
    let world: Vec<_> = points.iter().map(|c| c.world).collect();
    let image: Vec<_> = points.iter().map(|c| c.image).collect();
    let t3 = normalize_3d(&world);
    let t2 = normalize_2d(&image);

    // Coplanar (or collinear) object points leave the 3D scatter rank deficient.
    let mut scatter = Matrix3::zeros();
    for p in &world {
        let q = (t3 * p.to_homogeneous()).xyz();
        scatter += q * q.transpose();
    }
    let sv = scatter.symmetric_eigenvalues();
    let (lo, hi) = (sv.min(), sv.max());
    if !(lo > RANK_TOL * hi) {
        return Err(Error::DegenerateConfiguration(format!(
            "object points are coplanar (scatter eigenvalue ratio {:e})",
            lo / hi
        )));
    }

    let n = points.len();
    let mut a = DMatrix::zeros(2 * n, 12);
    for (i, (w, im)) in world.iter().zip(&image).enumerate() {
        let x = t3 * w.to_homogeneous();
        let u = t2 * im.to_homogeneous();
        let (u, v) = (u.x / u.z, u.y / u.z);
        for k in 0..4 {
            a[(2 * i, k)] = x[k];
            a[(2 * i, 8 + k)] = -u * x[k];
            a[(2 * i + 1, 4 + k)] = x[k];
            a[(2 * i + 1, 8 + k)] = -v * x[k];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::Internal("SVD did not return V".into()))?;
    let mut sigma: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    sigma.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (smallest, second) = (sigma[0], sigma[1]);
    let largest = sigma[sigma.len() - 1].0;
    if !(second.0 > RANK_TOL * largest) {
        return Err(Error::DegenerateConfiguration(format!(
            "DLT system is rank deficient (singular value ratio {:e})",
            second.0 / largest
        )));
    }
    let coeffs: Vec<f64> = v_t.row(smallest.1).iter().copied().collect();
    let p_norm = Matrix3x4::from_row_slice(&coeffs);
    let t2_inv = t2
        .try_inverse()
        .ok_or_else(|| Error::Internal("image normalization is singular".into()))?;
    let mut p = t2_inv * p_norm * t3;

    let mut m: Matrix3<f64> = p.fixed_view::<3, 3>(0, 0).into_owned();
    if m.determinant() < 0.0 {
        p = -p;
        m = -m;
    }
    let (mut k, mut rot) = rq3(&m);
    let signs = Matrix3::from_diagonal(&k.diagonal().map(|d| if d < 0.0 { -1.0 } else { 1.0 }));
    k *= signs;
    rot = signs * rot;

    let scale = k[(2, 2)];
    let translation = k
        .try_inverse()
        .ok_or_else(|| Error::DegenerateConfiguration("singular intrinsic matrix".into()))?
        * p.column(3);
    k /= scale;
    p /= scale;

    // Re-orthonormalize against round-off before validating the rotation.
    let svd_r = rot.svd(true, true);
    let rot = svd_r.u.unwrap() * svd_r.v_t.unwrap();

    let camera = Camera::new(k[(0, 0)], k[(1, 1)], k[(0, 2)], k[(1, 2)], width, height, rot, translation)?;
    let mut err = 0.0;
    for c in points {
        let (x, y, _) = camera.project(&c.world)?;
        err += (x - c.image.x).hypot(y - c.image.y);
    }
    Ok(Calibration {
        camera,
        projection: p,
        skew: k[(0, 1)],
        mean_reprojection_error: err / n as f64,
    })
}
