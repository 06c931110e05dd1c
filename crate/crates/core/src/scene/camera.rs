use nalgebra::{Matrix3, Matrix3x4, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROTATION_TOL: f64 = 1e-8;
const UNDISTORT_MAX_ITERS: usize = 100;
const UNDISTORT_TOL_PX: f64 = 1e-9;

/// Brown–Conrady coefficients in normalized image coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Distortion {
    pub k1: f64,
    pub k2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl Distortion {
    /// Forward model on normalized coordinates.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let r2 = x * x + y * y;
        let radial = 1.0 + self.k1 * r2 + self.k2 * r2 * r2;
        let xd = x * radial + 2.0 * self.p1 * x * y + self.p2 * (r2 + 2.0 * x * x);
        let yd = y * radial + self.p1 * (r2 + 2.0 * y * y) + 2.0 * self.p2 * x * y;
        (xd, yd)
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0.0 && self.k2 == 0.0 && self.p1 == 0.0 && self.p2 == 0.0
    }
}

/// A ray with unit direction, in world millimeters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Point3<f64>,
    direction: Vector3<f64>,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Self {
        Ray {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn direction(&self) -> &Vector3<f64> {
        &self.direction
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }
}

/// Pinhole camera with world→camera extrinsics.
///
/// Pixel coordinates address pixel centers: the ray for integer `(x, y)`
/// passes through the center of that pixel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraJson", into = "CameraJson")]
pub struct Camera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    pub distortion: Option<Distortion>,
}

#[derive(Serialize, Deserialize)]
struct CameraJson {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
    #[serde(rename = "R")]
    rotation: [f64; 9],
    #[serde(rename = "t")]
    translation: [f64; 3],
    #[serde(rename = "dist", default, skip_serializing_if = "Option::is_none")]
    distortion: Option<[f64; 4]>,
}

impl TryFrom<CameraJson> for Camera {
    type Error = Error;

    fn try_from(j: CameraJson) -> Result<Self> {
        let r = j.rotation;
        let mut cam = Camera::new(
            j.fx,
            j.fy,
            j.cx,
            j.cy,
            j.width,
            j.height,
            Matrix3::new(r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8]),
            Vector3::from(j.translation),
        )?;
        cam.distortion = j.distortion.map(|[k1, k2, p1, p2]| Distortion { k1, k2, p1, p2 });
        Ok(cam)
    }
}

impl From<Camera> for CameraJson {
    fn from(c: Camera) -> Self {
        let r = c.rotation;
        CameraJson {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            rotation: [
                r[(0, 0)],
                r[(0, 1)],
                r[(0, 2)],
                r[(1, 0)],
                r[(1, 1)],
                r[(1, 2)],
                r[(2, 0)],
                r[(2, 1)],
                r[(2, 2)],
            ],
            translation: c.translation.into(),
            distortion: c.distortion.map(|d| [d.k1, d.k2, d.p1, d.p2]),
        }
    }
}

impl Camera {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
    ) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(Error::InvalidCamera(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera("image size must be nonzero".into()));
        }
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return Err(Error::InvalidCamera(format!(
                "principal point ({cx}, {cy}) outside {width}x{height} image"
            )));
        }
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if !(ortho <= ROTATION_TOL) {
            return Err(Error::InvalidCamera(format!(
                "rotation is not orthonormal (max |RᵀR − I| = {ortho:e})"
            )));
        }
        if rotation.determinant() <= 0.0 {
            return Err(Error::InvalidCamera("rotation has negative determinant".into()));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidCamera("non-finite translation".into()));
        }
        Ok(Camera {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            rotation,
            translation,
            distortion: None,
        })
    }

    /// Camera at the world origin looking down +z, with +x right and +y down.
    pub fn axis_aligned(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        Camera::new(fx, fy, cx, cy, width, height, Matrix3::identity(), Vector3::zeros())
    }

    pub fn with_distortion(mut self, distortion: Distortion) -> Self {
        self.distortion = Some(distortion);
        self
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// 3×4 matrix K·[R | t].
    pub fn projection_matrix(&self) -> Matrix3x4<f64> {
        let mut rt = Matrix3x4::zeros();
        rt.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        rt.set_column(3, &self.translation);
        self.intrinsics() * rt
    }

    /// Camera center in world coordinates, −Rᵀt.
    pub fn center(&self) -> Point3<f64> {
        Point3::from(-(self.rotation.transpose() * self.translation))
    }

    /// Unit viewing axis in world coordinates (third row of R).
    pub fn viewing_axis(&self) -> Vector3<f64> {
        self.rotation.row(2).transpose()
    }

    pub fn world_to_camera(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn camera_to_world(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation.transpose() * (p.coords - self.translation))
    }

    /// Ray from the camera center through undistorted pixel `(x, y)`.
    pub fn pixel_ray(&self, x: f64, y: f64) -> Ray {
        let dir_cam = Vector3::new((x - self.cx) / self.fx, (y - self.cy) / self.fy, 1.0);
        Ray::new(self.center(), self.rotation.transpose() * dir_cam)
    }

    /// Projects a world point to undistorted pixel coordinates and camera depth.
    pub fn project(&self, p: &Point3<f64>) -> Result<(f64, f64, f64)> {
        let pc = self.world_to_camera(p);
        if !(pc.z > 0.0) {
            return Err(Error::BehindCamera { depth: pc.z });
        }
        Ok((
            self.fx * pc.x / pc.z + self.cx,
            self.fy * pc.y / pc.z + self.cy,
            pc.z,
        ))
    }

    /// Camera-frame point at pixel `(x, y)` with camera depth `depth`.
    pub fn back_project_camera(&self, x: f64, y: f64, depth: f64) -> Point3<f64> {
        Point3::new(
            (x - self.cx) / self.fx * depth,
            (y - self.cy) / self.fy * depth,
            depth,
        )
    }

    /// World point at pixel `(x, y)` with camera depth `depth`.
    pub fn back_project(&self, x: f64, y: f64, depth: f64) -> Point3<f64> {
        self.camera_to_world(&self.back_project_camera(x, y, depth))
    }

    /// Applies the lens model to an ideal pixel.
    pub fn distort_point(&self, x: f64, y: f64) -> (f64, f64) {
        match self.distortion {
            None => (x, y),
            Some(d) => {
                let (xn, yn) = ((x - self.cx) / self.fx, (y - self.cy) / self.fy);
                let (xd, yd) = d.apply(xn, yn);
                (xd * self.fx + self.cx, yd * self.fy + self.cy)
            }
        }
    }

    /// Inverts [`Camera::distort_point`] by fixed-point iteration.
    pub fn undistort_point(&self, xd: f64, yd: f64) -> Result<(f64, f64)> {
        let d = match self.distortion {
            Some(d) if !d.is_zero() => d,
            _ => return Ok((xd, yd)),
        };
        let (xt, yt) = ((xd - self.cx) / self.fx, (yd - self.cy) / self.fy);
        let (mut x, mut y) = (xt, yt);
        let mut residual = f64::INFINITY;
        for _ in 0..UNDISTORT_MAX_ITERS {
            let r2 = x * x + y * y;
            let radial = 1.0 + d.k1 * r2 + d.k2 * r2 * r2;
            let dx = 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
            let dy = d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y;
            x = (xt - dx) / radial;
            y = (yt - dy) / radial;

            let (fx_, fy_) = d.apply(x, y);
            residual = ((fx_ - xt) * self.fx).hypot((fy_ - yt) * self.fy);
            if residual <= UNDISTORT_TOL_PX {
                return Ok((x * self.fx + self.cx, y * self.fy + self.cy));
            }
            if !residual.is_finite() {
                break;
            }
        }
        Err(Error::UndistortNoConvergence {
            iterations: UNDISTORT_MAX_ITERS,
            residual,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("camera", e))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("camera serializes")
    }
}

/// Rotation by `angle` radians about a unit axis.
pub fn rotation_about(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    *nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).matrix()
}
