use super::crop::CropTransform;
use crate::error::{Error, Result};

pub const DEFAULT_HEATMAP_RES: usize = 64;
pub const DEFAULT_SIGMA: f64 = 3.0;

/// Per-joint score maps, `channels × height × width`.
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Heatmap {
    pub fn zeros(height: usize, width: usize, channels: usize) -> Self {
        Heatmap {
            height,
            width,
            channels,
            data: vec![0.0; height * width * channels],
        }
    }

    /// Wraps channel-major data; all values must be non-negative.
    pub fn from_data(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != height * width * channels {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {channels}x{height}x{width} heatmap",
                data.len()
            )));
        }
        if data.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument("heatmap values must be non-negative".into()));
        }
        Ok(Heatmap {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn channel(&self, j: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[j * n..(j + 1) * n]
    }

    pub fn get(&self, j: usize, row: usize, col: usize) -> f64 {
        self.data[(j * self.height + row) * self.width + col]
    }

    pub fn set(&mut self, j: usize, row: usize, col: usize, value: f64) {
        debug_assert!(value >= 0.0);
        self.data[(j * self.height + row) * self.width + col] = value;
    }

    fn same_shape(&self, other: &Heatmap) -> bool {
        self.height == other.height && self.width == other.width && self.channels == other.channels
    }
}

/// Unnormalized Gaussian targets, one channel per joint.
///
/// `joints` are `(x, y)` in heatmap cells. Channel `j` holds
/// `exp(−((u − x)² + (v − y)²) / 2σ²)`, peaking at 1. A joint that lies
/// outside the grid of cell centers yields an all-zero channel.
pub fn gaussian_target(joints: &[[f64; 2]], height: usize, width: usize, sigma: f64) -> Result<Heatmap> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let mut hm = Heatmap::zeros(height, width, joints.len());
    let denom = 2.0 * sigma * sigma;
    for (j, &[x, y]) in joints.iter().enumerate() {
        let inside = x >= 0.0 && y >= 0.0 && x <= (width - 1) as f64 && y <= (height - 1) as f64;
        if !inside {
            continue;
        }
        for row in 0..height {
            for col in 0..width {
                let d2 = (col as f64 - x).powi(2) + (row as f64 - y).powi(2);
                hm.set(j, row, col, (-d2 / denom).exp());
            }
        }
    }
    Ok(hm)
}

/// Sum of squared differences.
pub fn heatmap_loss(pred: &Heatmap, target: &Heatmap) -> Result<f64> {
    if !pred.same_shape(target) {
        return Err(Error::ShapeMismatch(format!(
            "prediction {}x{}x{} vs target {}x{}x{}",
            pred.channels, pred.height, pred.width, target.channels, target.height, target.width
        )));
    }
    Ok(pred
        .data
        .iter()
        .zip(&target.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// Most probable cell of each channel, in crop pixels.
///
/// Ties resolve to the first maximum in row-major order. Cell indices are
/// scaled by `crop size / heatmap size` (4 for 256 px crops and 64-cell maps).
pub fn argmax_decode(heatmap: &Heatmap, crop: &CropTransform) -> Vec<[f64; 2]> {
    let sx = crop.target_width as f64 / heatmap.width as f64;
    let sy = crop.target_height as f64 / heatmap.height as f64;
    (0..heatmap.channels)
        .map(|j| {
            let ch = heatmap.channel(j);
            let mut best = 0;
            for (i, &v) in ch.iter().enumerate() {
                if v > ch[best] {
                    best = i;
                }
            }
            let (row, col) = (best / heatmap.width, best % heatmap.width);
            [col as f64 * sx, row as f64 * sy]
        })
        .collect()
}
