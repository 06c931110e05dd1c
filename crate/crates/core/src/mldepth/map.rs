use rayon::prelude::*;

use super::trace::Tracer;
use crate::error::{Error, Result};
use crate::scene::{Camera, TriangleMesh};

/// Number of layers rendered when the caller has no reason to pick another.
pub const DEFAULT_LAYERS: usize = 15;

/// Marker for an absent layer. Stored as the canonical quiet NaN.
pub const SENTINEL: f32 = f32::NAN;

/// Per-pixel ordered depths of every surface crossing along the view ray.
///
/// Depths are camera-axis distances in millimeters, stored row-major with
/// the layer axis innermost. Finite values occupy a strictly increasing,
/// positive prefix of each pixel's layer list; the rest is [`SENTINEL`].
#[derive(Clone, Debug)]
pub struct MultiLayerDepthMap {
    height: usize,
    width: usize,
    layers: usize,
    depths: Vec<f32>,
    camera: Camera,
}

impl PartialEq for MultiLayerDepthMap {
    /// Bitwise comparison of the depth grid (sentinels compare equal).
    fn eq(&self, other: &Self) -> bool {
        self.height == other.height
            && self.width == other.width
            && self.layers == other.layers
            && self.camera == other.camera
            && self
                .depths
                .iter()
                .zip(&other.depths)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl MultiLayerDepthMap {
    /// Wraps a raw grid after checking every layer invariant.
    ///
    /// Any NaN is canonicalized to [`SENTINEL`].
    pub fn from_raw(
        height: usize,
        width: usize,
        layers: usize,
        mut depths: Vec<f32>,
        camera: Camera,
    ) -> Result<Self> {
        if depths.len() != height * width * layers {
            return Err(Error::ShapeMismatch(format!(
                "{} depths for a {height}x{width}x{layers} grid",
                depths.len()
            )));
        }
        for d in depths.iter_mut() {
            if d.is_nan() {
                *d = SENTINEL;
            }
        }
        let map = MultiLayerDepthMap {
            height,
            width,
            layers,
            depths,
            camera,
        };
        map.validate()?;
        Ok(map)
    }

    /// Checks prefix, ordering and positivity on every pixel.
    pub fn validate(&self) -> Result<()> {
        for row in 0..self.height {
            for col in 0..self.width {
                let px = self.pixel(row, col);
                let mut seen_sentinel = false;
                let mut prev = 0.0f32;
                for (layer, &d) in px.iter().enumerate() {
                    let fail = |message| Error::LayerInvariant {
                        row,
                        col,
                        layer,
                        message,
                    };
                    if d.is_nan() {
                        seen_sentinel = true;
                        continue;
                    }
                    if seen_sentinel {
                        return Err(fail("finite depth after an absent layer"));
                    }
                    if !d.is_finite() {
                        return Err(fail("infinite depth"));
                    }
                    if !(d > 0.0) {
                        return Err(fail("depth must be positive"));
                    }
                    if layer > 0 && !(d > prev) {
                        return Err(fail("depths must strictly increase"));
                    }
                    prev = d;
                }
            }
        }
        Ok(())
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    /// Raw grid, row-major with the layer axis innermost.
    pub fn raw(&self) -> &[f32] {
        &self.depths
    }

    /// All `layers` entries of one pixel, sentinels included.
    pub fn pixel(&self, row: usize, col: usize) -> &[f32] {
        let start = (row * self.width + col) * self.layers;
        &self.depths[start..start + self.layers]
    }

    /// The finite prefix of one pixel.
    pub fn surfaces(&self, row: usize, col: usize) -> &[f32] {
        let px = self.pixel(row, col);
        let k = px.iter().position(|d| d.is_nan()).unwrap_or(px.len());
        &px[..k]
    }

    pub fn depth(&self, row: usize, col: usize, layer: usize) -> Option<f64> {
        let d = self.pixel(row, col)[layer];
        (!d.is_nan()).then_some(d as f64)
    }

    /// Nearest pixel `(row, col)` to continuous coordinates `(x, y)`.
    pub fn nearest_pixel(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (c, r) = (x.round(), y.round());
        if c >= 0.0 && r >= 0.0 && c < self.width as f64 && r < self.height as f64 {
            Some((r as usize, c as usize))
        } else {
            None
        }
    }

    /// Surfaces at the pixel nearest to `(x, y)`.
    pub fn surfaces_at(&self, x: f64, y: f64) -> Result<&[f32]> {
        let (r, c) = self.nearest_pixel(x, y).ok_or(Error::PixelOutOfBounds {
            x,
            y,
            width: self.width,
            height: self.height,
        })?;
        Ok(self.surfaces(r, c))
    }

    /// Keeps only the first `layers` layers (`1` gives a classical depth map).
    pub fn truncated(&self, layers: usize) -> Self {
        let layers = layers.clamp(1, self.layers);
        let depths = self
            .depths
            .chunks_exact(self.layers)
            .flat_map(|px| px[..layers].iter().copied())
            .collect();
        MultiLayerDepthMap {
            height: self.height,
            width: self.width,
            layers,
            depths,
            camera: self.camera.clone(),
        }
    }
}

/// Renders the multi-layer depth map of `mesh` seen from `camera`.
///
/// Every pixel center is traced; each hit distance `t` becomes the depth
/// `t · (r · v)` along the viewing axis `v`. Depths are rounded to `f32`,
/// and hits that collapse to the same stored value are merged. Pixels are
/// traced in parallel but written to fixed slots, so the result does not
/// depend on scheduling.
pub fn render_mld(mesh: &TriangleMesh, camera: &Camera, layers: usize) -> Result<MultiLayerDepthMap> {
    if layers == 0 {
        return Err(Error::InvalidArgument("layers must be at least 1".into()));
    }
    let tracer = Tracer::new(mesh);
    let (w, h) = (camera.width as usize, camera.height as usize);
    let v = camera.viewing_axis();
    let mut depths = vec![SENTINEL; w * h * layers];
    depths
        .par_chunks_mut(w * layers)
        .enumerate()
        .for_each(|(row, out)| {
            for col in 0..w {
                let ray = camera.pixel_ray(col as f64, row as f64);
                let cos = ray.direction().dot(&v);
                let slots = &mut out[col * layers..(col + 1) * layers];
                let mut k = 0;
                for &t in tracer.trace(&ray).as_slice() {
                    if k == layers {
                        break;
                    }
                    let d = (t * cos) as f32;
                    if !(d > 0.0) || (k > 0 && d <= slots[k - 1]) {
                        continue;
                    }
                    slots[k] = d;
                    k += 1;
                }
            }
        });
    let map = MultiLayerDepthMap {
        height: h,
        width: w,
        layers,
        depths,
        camera: camera.clone(),
    };
    map.validate()
        .map_err(|e| Error::Internal(format!("rendered map: {e}")))?;
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn cam() -> Camera {
        Camera::axis_aligned(100.0, 100.0, 16.0, 16.0, 32, 32).unwrap()
    }

    #[test]
    fn empty_scene_is_all_sentinel() {
        let mesh = TriangleMesh::new(vec![], vec![]).unwrap();
        let map = render_mld(&mesh, &cam(), 4).unwrap();
        assert!(map.raw().iter().all(|d| d.is_nan()));
    }

    #[test]
    fn frontal_plane_depth_is_plane_depth() {
        let wall = TriangleMesh::axis_aligned_box(
            Point3::new(-5000.0, -5000.0, 2000.0),
            Point3::new(5000.0, 5000.0, 2500.0),
        )
        .unwrap();
        let map = render_mld(&wall, &cam(), 3).unwrap();
        for (r, c) in [(0, 0), (3, 29), (31, 31), (16, 16)] {
            assert_eq!(map.depth(r, c, 0), Some(2000.0));
            assert_eq!(map.depth(r, c, 1), Some(2500.0));
            assert_eq!(map.depth(r, c, 2), None);
        }
    }

    #[test]
    fn truncation_to_single_layer() {
        let wall = TriangleMesh::axis_aligned_box(
            Point3::new(-5000.0, -5000.0, 2000.0),
            Point3::new(5000.0, 5000.0, 2500.0),
        )
        .unwrap();
        let map = render_mld(&wall, &cam(), 15).unwrap().truncated(1);
        assert_eq!(map.layers(), 1);
        assert_eq!(map.depth(7, 7, 0), Some(2000.0));
    }

    #[test]
    fn invariant_violations_detected() {
        let mut d = vec![SENTINEL; 2 * 2 * 3];
        d[3] = 1000.0;
        d[4] = 900.0;
        match MultiLayerDepthMap::from_raw(2, 2, 3, d, cam()) {
            Err(Error::LayerInvariant { row: 0, col: 1, layer: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        let mut d = vec![SENTINEL; 3];
        d[1] = 5.0;
        assert!(MultiLayerDepthMap::from_raw(1, 1, 3, d, cam()).is_err());
        assert!(MultiLayerDepthMap::from_raw(1, 1, 3, vec![-1.0, SENTINEL, SENTINEL], cam()).is_err());
    }

    #[test]
    fn nearest_pixel_lookup() {
        let map = MultiLayerDepthMap::from_raw(2, 3, 1, vec![SENTINEL; 6], cam()).unwrap();
        assert_eq!(map.nearest_pixel(1.4, 0.6), Some((1, 1)));
        assert_eq!(map.nearest_pixel(2.49, 1.49), Some((1, 2)));
        assert_eq!(map.nearest_pixel(2.5, 0.0), None);
        assert_eq!(map.nearest_pixel(-0.6, 0.0), None);
    }
}
