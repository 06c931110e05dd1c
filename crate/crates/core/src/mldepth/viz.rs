use image::GrayImage;

use super::map::MultiLayerDepthMap;
use crate::error::{Error, Result};

/// One grayscale image per layer, showing inverse depth.
///
/// Within each layer `1/depth` is rescaled linearly so the nearest surface
/// is 255 and the farthest is 0; a layer with a single distinct depth is
/// 255 wherever finite. Absent layers are 0.
pub fn visualize_layers(map: &MultiLayerDepthMap, n_layers: usize) -> Result<Vec<GrayImage>> {
    if n_layers > map.layers() {
        return Err(Error::InvalidArgument(format!(
            "requested {n_layers} layers, map has {}",
            map.layers()
        )));
    }
    let (w, h) = (map.width(), map.height());
    let mut images = Vec::with_capacity(n_layers);
    for layer in 0..n_layers {
        let inv = |r, c| map.depth(r, c, layer).map(|d| 1.0 / d);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in 0..h {
            for c in 0..w {
                if let Some(v) = inv(r, c) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        let img = GrayImage::from_fn(w as u32, h as u32, |x, y| {
            let value = match inv(y as usize, x as usize) {
                None => 0,
                Some(_) if hi == lo => 255,
                Some(v) => (255.0 * (v - lo) / (hi - lo)).round() as u8,
            };
            image::Luma([value])
        });
        images.push(img);
    }
    Ok(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mldepth::map::SENTINEL;
    use crate::scene::Camera;

    fn map(depths: Vec<f32>, layers: usize) -> MultiLayerDepthMap {
        let cam = Camera::axis_aligned(10.0, 10.0, 1.0, 0.0, 2, 1).unwrap();
        MultiLayerDepthMap::from_raw(1, 2, layers, depths, cam).unwrap()
    }

    #[test]
    fn uniform_layer_is_white() {
        let imgs = visualize_layers(&map(vec![2000.0, 2000.0], 1), 1).unwrap();
        assert!(imgs[0].pixels().all(|p| p.0[0] == 255));
    }

    #[test]
    fn empty_layer_is_black() {
        let imgs = visualize_layers(&map(vec![1000.0, SENTINEL, 1500.0, SENTINEL], 2), 2).unwrap();
        assert!(imgs[1].pixels().all(|p| p.0[0] == 0));
    }

    #[test]
    fn near_is_bright_far_is_dark() {
        let imgs = visualize_layers(&map(vec![1000.0, 2000.0], 1), 1).unwrap();
        assert_eq!(imgs[0].get_pixel(0, 0).0[0], 255);
        assert_eq!(imgs[0].get_pixel(1, 0).0[0], 0);
    }

    #[test]
    fn too_many_layers_requested() {
        assert!(visualize_layers(&map(vec![1000.0, 2000.0], 1), 2).is_err());
    }
}
