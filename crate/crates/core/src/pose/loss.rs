use serde::Serialize;

use super::crop::{CropTransform, DepthNormalizer};
use super::heatmap::{argmax_decode, gaussian_target, heatmap_loss, Heatmap, DEFAULT_SIGMA};
use super::{Pose3D, PoseSpace};
use crate::affordance::gcl;
use crate::error::{Error, Result};
use crate::mldepth::MultiLayerDepthMap;

/// Summed smooth-ℓ1 over joints: `0.5·d²` for `d ≤ 1`, `d − 0.5` beyond.
///
/// Depths are expected in normalized units, where the unit break makes sense.
pub fn smooth_l1(pred: &[f64], gt: &[f64]) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} predicted depths vs {} targets",
            pred.len(),
            gt.len()
        )));
    }
    Ok(pred
        .iter()
        .zip(gt)
        .map(|(p, g)| {
            let d = (p - g).abs();
            if d <= 1.0 {
                0.5 * d * d
            } else {
                d - 0.5
            }
        })
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossWeights {
    pub heatmap: f64,
    pub depth: f64,
    pub geometry: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            heatmap: 1.0,
            depth: 1.0,
            geometry: 1.0,
        }
    }
}

/// Everything one training sample contributes to the loss.
pub struct LossInputs<'a> {
    /// Predicted heatmaps, one channel per joint.
    pub heatmap: &'a Heatmap,
    /// Predicted per-joint depths, normalized.
    pub depth: &'a [f64],
    /// Ground truth with `x, y` in crop pixels and `z` in mm.
    pub gt: &'a Pose3D,
    pub crop: &'a CropTransform,
    pub normalizer: &'a DepthNormalizer,
    /// Scene geometry in the source image grid; without it the geometry
    /// term is zero.
    pub map: Option<&'a MultiLayerDepthMap>,
}

/// Unweighted terms and the weighted total.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub heatmap: f64,
    pub depth: f64,
    /// Penetration in normalized depth units.
    pub geometry: f64,
    pub total: f64,
}

/// Heatmap, depth and geometry loss for one sample.
///
/// The geometry term evaluates the decoded prediction: argmax `(x, y)`
/// mapped back to the source image and denormalized depth, divided by the
/// normalizer's range so it shares units with the depth term.
pub fn total_loss(inputs: &LossInputs<'_>, weights: &LossWeights) -> Result<LossBreakdown> {
    let LossInputs {
        heatmap,
        depth,
        gt,
        crop,
        normalizer,
        map,
    } = *inputs;
    if gt.space != PoseSpace::Image {
        return Err(Error::InvalidArgument("ground truth must be in image space".into()));
    }
    let j = gt.len();
    if heatmap.channels() != j || depth.len() != j {
        return Err(Error::ShapeMismatch(format!(
            "{j} joints, {} heatmap channels, {} depths",
            heatmap.channels(),
            depth.len()
        )));
    }

    let sx = heatmap.width() as f64 / crop.target_width as f64;
    let sy = heatmap.height() as f64 / crop.target_height as f64;
    let cells: Vec<[f64; 2]> = gt.joints.iter().map(|p| [p.x * sx, p.y * sy]).collect();
    let target = gaussian_target(&cells, heatmap.height(), heatmap.width(), DEFAULT_SIGMA)?;
    let l_2d = heatmap_loss(heatmap, &target)?;

    let gt_z: Vec<f64> = gt.joints.iter().map(|p| normalizer.normalize(p.z)).collect();
    let l_depth = smooth_l1(depth, &gt_z)?;

    let l_geom = match map {
        Some(map) if weights.geometry != 0.0 => {
            let mut pred = gt.clone();
            for ((joint, [u, v]), &z) in pred.joints.iter_mut().zip(argmax_decode(heatmap, crop)).zip(depth) {
                let (x, y) = crop.to_source(u, v);
                *joint = nalgebra::Vector3::new(x, y, normalizer.denormalize(z));
            }
            gcl(&pred, map)? / normalizer.range()
        }
        _ => 0.0,
    };

    Ok(LossBreakdown {
        heatmap: l_2d,
        depth: l_depth,
        geometry: l_geom,
        total: weights.heatmap * l_2d + weights.depth * l_depth + weights.geometry * l_geom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mldepth::SENTINEL;
    use crate::pose::Taxonomy;
    use crate::scene::Camera;
    use nalgebra::Vector3;

    #[test]
    fn smooth_l1_branches() {
        assert_eq!(smooth_l1(&[0.3], &[0.3]).unwrap(), 0.0);
        assert_eq!(smooth_l1(&[1.0], &[0.0]).unwrap(), 0.5);
        assert_eq!(smooth_l1(&[0.0], &[3.0]).unwrap(), 2.5);
        assert_eq!(smooth_l1(&[0.5, 0.0], &[0.0, 3.0]).unwrap(), 0.125 + 2.5);
        assert!(smooth_l1(&[1.0], &[]).is_err());
    }

    struct Fixture {
        gt: Pose3D,
        heatmap: Heatmap,
        depth: Vec<f64>,
        crop: CropTransform,
        norm: DepthNormalizer,
        map: MultiLayerDepthMap,
    }

    /// Two joints at crop cells that decode exactly; a 256 px map with a slab
    /// [1000, 1400] over its left half.
    fn fixture(z: [f64; 2]) -> Fixture {
        let crop = CropTransform::identity(256, 256);
        let norm = DepthNormalizer::new(0.0, 5000.0).unwrap();
        let gt = Pose3D::new(
            Taxonomy::Other("pair".into()),
            0,
            vec!["a".into(), "b".into()],
            vec![Vector3::new(40.0, 80.0, z[0]), Vector3::new(200.0, 80.0, z[1])],
            PoseSpace::Image,
        )
        .unwrap();
        let heatmap = gaussian_target(&[[10.0, 20.0], [50.0, 20.0]], 64, 64, DEFAULT_SIGMA).unwrap();
        let depth = z.iter().map(|&z| norm.normalize(z)).collect();
        let cam = Camera::axis_aligned(500.0, 500.0, 128.0, 128.0, 256, 256).unwrap();
        let values = (0..256 * 256)
            .flat_map(|i| if i % 256 < 128 { [1000.0, 1400.0] } else { [SENTINEL, SENTINEL] })
            .collect();
        let map = MultiLayerDepthMap::from_raw(256, 256, 2, values, cam).unwrap();
        Fixture {
            gt,
            heatmap,
            depth,
            crop,
            norm,
            map,
        }
    }

    fn run(f: &Fixture, w: LossWeights) -> LossBreakdown {
        total_loss(
            &LossInputs {
                heatmap: &f.heatmap,
                depth: &f.depth,
                gt: &f.gt,
                crop: &f.crop,
                normalizer: &f.norm,
                map: Some(&f.map),
            },
            &w,
        )
        .unwrap()
    }

    #[test]
    fn perfect_prediction_in_free_space() {
        let f = fixture([900.0, 1200.0]);
        let l = run(&f, LossWeights::default());
        assert_eq!(l.total, 0.0);
    }

    #[test]
    fn geometry_term_isolated() {
        let f = fixture([1100.0, 1200.0]);
        let l = run(&f, LossWeights::default());
        assert_eq!(l.heatmap, 0.0);
        assert_eq!(l.depth, 0.0);
        assert!((l.geometry - 100.0 / 5000.0).abs() < 1e-15);
        assert_eq!(l.total, l.geometry);
    }

    #[test]
    fn masking_geometry() {
        let mut f = fixture([1100.0, 1200.0]);
        f.depth[1] += 0.5;
        f.heatmap.set(0, 0, 0, 0.5);
        let l = run(
            &f,
            LossWeights {
                geometry: 0.0,
                ..LossWeights::default()
            },
        );
        assert_eq!(l.total, l.heatmap + l.depth);
        assert_eq!(l.depth, 0.125);
        let t = (-(10.0f64 * 10.0 + 20.0 * 20.0) / 18.0).exp();
        assert!((l.heatmap - (0.5 - t).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn shape_checks() {
        let f = fixture([900.0, 1200.0]);
        let r = total_loss(
            &LossInputs {
                heatmap: &f.heatmap,
                depth: &f.depth[..1],
                gt: &f.gt,
                crop: &f.crop,
                normalizer: &f.norm,
                map: None,
            },
            &LossWeights::default(),
        );
        assert!(r.is_err());
    }
}
