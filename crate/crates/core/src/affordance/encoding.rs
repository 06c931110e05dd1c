use super::depth_penetration;
use crate::error::{Error, Result};
use crate::mldepth::{Container, MultiLayerDepthMap};
use crate::pose::CropTransform;

/// Feature value standing in for an absent surface (mm offset).
pub const NO_SURFACE_OFFSET: f32 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    /// Layer depths minus the root depth.
    DepthOffsets,
    /// Penetration depth at samples around the root depth.
    Volumetric { samples: usize },
}

/// Scene geometry resampled onto the heatmap grid, `res × res × channels`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometryFeatureMap {
    pub kind: FeatureKind,
    pub root_depth: f64,
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f32>,
}

impl GeometryFeatureMap {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Row-major, channel innermost.
    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.values[(row * self.width + col) * self.channels + channel]
    }

    /// Packs the features into an MLD1 container (layers = channels).
    pub fn to_container(&self, source: &MultiLayerDepthMap) -> Container {
        Container {
            height: self.height,
            width: self.width,
            layers: self.channels,
            values: self.values.clone(),
            camera_json: source.camera().to_json(),
        }
    }
}

/// Source pixel sampled by each output cell, row-major.
fn sample_grid(map: &MultiLayerDepthMap, crop: &CropTransform, out_res: usize) -> Result<Vec<(usize, usize)>> {
    if out_res == 0 || crop.target_width == 0 || crop.target_height == 0 || !(crop.scale > 0.0) {
        return Err(Error::EmptyCrop);
    }
    let sx = crop.target_width as f64 / out_res as f64;
    let sy = crop.target_height as f64 / out_res as f64;
    let mut cells = Vec::with_capacity(out_res * out_res);
    for v in 0..out_res {
        for u in 0..out_res {
            let (x, y) = crop.to_source(u as f64 * sx, v as f64 * sy);
            let (row, col) = map.nearest_pixel(x, y).ok_or_else(|| {
                Error::InvalidArgument(format!("crop samples source pixel ({x}, {y}) outside the map"))
            })?;
            cells.push((row, col));
        }
    }
    Ok(cells)
}

/// Nearest-neighbor resampling of every layer, offset by the root depth.
///
/// Absent layers become [`NO_SURFACE_OFFSET`].
pub fn encode_depth_features(
    map: &MultiLayerDepthMap,
    crop: &CropTransform,
    root_depth: f64,
    out_res: usize,
) -> Result<GeometryFeatureMap> {
    let cells = sample_grid(map, crop, out_res)?;
    let layers = map.layers();
    let mut values = Vec::with_capacity(cells.len() * layers);
    for (row, col) in cells {
        for &d in map.pixel(row, col) {
            values.push(if d.is_nan() {
                NO_SURFACE_OFFSET
            } else {
                (d as f64 - root_depth) as f32
            });
        }
    }
    Ok(GeometryFeatureMap {
        kind: FeatureKind::DepthOffsets,
        root_depth,
        height: out_res,
        width: out_res,
        channels: layers,
        values,
    })
}

/// Sample depths `root + half_range · (2s/(n−1) − 1)`, `s = 0..n`.
pub fn volumetric_samples(root_depth: f64, n_samples: usize, half_range: f64) -> Vec<f64> {
    (0..n_samples)
        .map(|s| root_depth + half_range * (2.0 * s as f64 / (n_samples - 1) as f64 - 1.0))
        .collect()
}

/// Penetration depth at `n_samples` depths spanning `root ± half_range`.
pub fn encode_volumetric(
    map: &MultiLayerDepthMap,
    crop: &CropTransform,
    root_depth: f64,
    n_samples: usize,
    half_range: f64,
    out_res: usize,
) -> Result<GeometryFeatureMap> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples, got {n_samples}")));
    }
    let cells = sample_grid(map, crop, out_res)?;
    let samples = volumetric_samples(root_depth, n_samples, half_range);
    let mut values = Vec::with_capacity(cells.len() * n_samples);
    for (row, col) in cells {
        let surfaces = map.surfaces(row, col);
        for &z in &samples {
            values.push(depth_penetration(z, surfaces)? as f32);
        }
    }
    Ok(GeometryFeatureMap {
        kind: FeatureKind::Volumetric { samples: n_samples },
        root_depth,
        height: out_res,
        width: out_res,
        channels: n_samples,
        values,
    })
}
