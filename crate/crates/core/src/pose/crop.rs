use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic crop-and-resize from a source image into a network input.
///
/// Crop pixel `(u, v)` samples source coordinates
/// `(x0 + u / scale, y0 + v / scale)`; integer coordinates are pixel centers
/// on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CropTransform {
    pub x0: f64,
    pub y0: f64,
    /// Crop pixels per source pixel, equal in x and y.
    pub scale: f64,
    pub target_width: u32,
    pub target_height: u32,
}

impl CropTransform {
    pub const DEFAULT_SIZE: u32 = 256;

    /// Maps a `src_width × src_height` source rectangle at `(x0, y0)` onto
    /// `target_width × target_height`; the two scale factors must agree.
    pub fn new(
        x0: f64,
        y0: f64,
        src_width: f64,
        src_height: f64,
        target_width: u32,
        target_height: u32,
    ) -> Result<Self> {
        if !(src_width > 0.0 && src_height > 0.0) || target_width == 0 || target_height == 0 {
            return Err(Error::EmptyCrop);
        }
        let sx = target_width as f64 / src_width;
        let sy = target_height as f64 / src_height;
        if ((sx - sy) / sx).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "crop must scale isotropically (x {sx}, y {sy})"
            )));
        }
        Ok(CropTransform {
            x0,
            y0,
            scale: sx,
            target_width,
            target_height,
        })
    }

    /// Square source window of side `side` centered on `(cx, cy)`.
    pub fn square(cx: f64, cy: f64, side: f64, target: u32) -> Result<Self> {
        CropTransform::new(cx - side / 2.0, cy - side / 2.0, side, side, target, target)
    }

    /// Identity crop over a `width × height` image.
    pub fn identity(width: u32, height: u32) -> Self {
        CropTransform {
            x0: 0.0,
            y0: 0.0,
            scale: 1.0,
            target_width: width,
            target_height: height,
        }
    }

    pub fn to_source(&self, u: f64, v: f64) -> (f64, f64) {
        (self.x0 + u / self.scale, self.y0 + v / self.scale)
    }

    pub fn to_crop(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) * self.scale, (y - self.y0) * self.scale)
    }
}

/// Affine map of depths in `[z_min, z_max]` millimeters onto `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthNormalizer {
    z_min: f64,
    z_max: f64,
}

impl DepthNormalizer {
    pub fn new(z_min: f64, z_max: f64) -> Result<Self> {
        if !(z_max > z_min) || !z_min.is_finite() || !z_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "depth range needs z_max > z_min, got [{z_min}, {z_max}]"
            )));
        }
        Ok(DepthNormalizer { z_min, z_max })
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    pub fn range(&self) -> f64 {
        self.z_max - self.z_min
    }

    /// Values outside the range map outside `[0, 1]`.
    pub fn normalize(&self, z: f64) -> f64 {
        (z - self.z_min) / self.range()
    }

    pub fn normalize_clamped(&self, z: f64) -> f64 {
        self.normalize(z).clamp(0.0, 1.0)
    }

    pub fn denormalize(&self, u: f64) -> f64 {
        self.z_min + u * self.range()
    }
}
