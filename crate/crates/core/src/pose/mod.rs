//! Skeletons, heatmaps, training losses and evaluation metrics.

mod crop;
mod heatmap;
mod loss;
mod metrics;
mod taxonomy;

pub use crop::{CropTransform, DepthNormalizer};
pub use heatmap::{argmax_decode, gaussian_target, heatmap_loss, Heatmap, DEFAULT_HEATMAP_RES, DEFAULT_SIGMA};
pub use loss::{smooth_l1, total_loss, LossBreakdown, LossInputs, LossWeights};
pub use metrics::{
    joint_errors, mpjpe, mpjpe_from_errors, pck3d, pck_from_errors, JointMetrics, MetricsReport,
    OrderedJoints, DEFAULT_PCK_THRESHOLD_MM,
};
pub use taxonomy::{
    map_taxonomy, Taxonomy, GPA16_BONES, GPA16_NAMES, GPA16_ROOT, GPA16_TO_MPII16, MPII16_NAMES,
};

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Camera;

/// Coordinate convention of a pose's joints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PoseSpace {
    /// `x, y` in pixels, `z` in millimeters along the camera axis.
    Image,
    /// Millimeters in a 3D frame.
    Metric,
}

/// A skeleton of `J` joints.
#[derive(Clone, Debug, PartialEq)]
pub struct Pose3D {
    pub taxonomy: Taxonomy,
    pub root: usize,
    pub names: Vec<String>,
    pub joints: Vec<Vector3<f64>>,
    pub space: PoseSpace,
}

impl Pose3D {
    pub fn new(
        taxonomy: Taxonomy,
        root: usize,
        names: Vec<String>,
        joints: Vec<Vector3<f64>>,
        space: PoseSpace,
    ) -> Result<Self> {
        if names.len() != joints.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} names for {} joints",
                names.len(),
                joints.len()
            )));
        }
        if let Some(j) = taxonomy.joint_count() {
            if joints.len() != j {
                return Err(Error::TaxonomyMismatch(format!(
                    "{taxonomy} needs {j} joints, got {}",
                    joints.len()
                )));
            }
        }
        if root >= joints.len() {
            return Err(Error::InvalidArgument(format!(
                "root {root} out of range for {} joints",
                joints.len()
            )));
        }
        Ok(Pose3D {
            taxonomy,
            root,
            names,
            joints,
            space,
        })
    }

    /// A 16-joint pose with the standard names and the hips as root.
    pub fn gpa16(joints: Vec<Vector3<f64>>, space: PoseSpace) -> Result<Self> {
        Pose3D::new(
            Taxonomy::Gpa16,
            GPA16_ROOT,
            GPA16_NAMES.iter().map(|s| s.to_string()).collect(),
            joints,
            space,
        )
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    pub fn depths(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.z).collect()
    }

    pub fn with_depths(&self, depths: &[f64]) -> Self {
        let mut p = self.clone();
        for (j, &z) in p.joints.iter_mut().zip(depths) {
            j.z = z;
        }
        p
    }

    /// Camera-frame millimeters of an image-space pose whose pixels are in
    /// `camera`'s image grid.
    pub fn to_metric(&self, camera: &Camera) -> Result<Pose3D> {
        if self.space != PoseSpace::Image {
            return Err(Error::InvalidArgument("pose is already metric".into()));
        }
        let mut p = self.clone();
        for j in p.joints.iter_mut() {
            j.copy_from(&camera.back_project_camera(j.x, j.y, j.z).coords);
        }
        p.space = PoseSpace::Metric;
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: PoseJson = serde_json::from_str(text).map_err(|e| Error::json("pose", e))?;
        f.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("pose serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let joints: Vec<_> = self
            .names
            .iter()
            .zip(&self.joints)
            .map(|(name, j)| match self.space {
                PoseSpace::Image => serde_json::json!({"name": name, "x": j.x, "y": j.y, "z": j.z}),
                PoseSpace::Metric => {
                    serde_json::json!({"name": name, "x_mm": j.x, "y_mm": j.y, "z_mm": j.z})
                }
            })
            .collect();
        serde_json::json!({
            "taxonomy": self.taxonomy.name(),
            "root": self.root,
            "joints": joints,
            "units": match self.space { PoseSpace::Image => "px,px,mm", PoseSpace::Metric => "mm" },
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::json(path.display().to_string(), source),
            e => e,
        })
    }

    /// Reads a file holding either one pose object or an array of poses.
    pub fn load_many(path: impl AsRef<Path>) -> Result<Vec<Self>> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ctx = || path.display().to_string();
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(ctx(), e))?;
        let items = match value {
            serde_json::Value::Array(items) => items,
            v => vec![v],
        };
        items
            .into_iter()
            .map(|v| {
                let f: PoseJson = serde_json::from_value(v).map_err(|e| Error::json(ctx(), e))?;
                f.try_into()
            })
            .collect()
    }
}

#[derive(Deserialize, Serialize)]
struct PoseJson {
    taxonomy: Taxonomy,
    root: Option<usize>,
    joints: Vec<JointJson>,
    #[serde(default)]
    units: Option<String>,
}

#[derive(Deserialize, Serialize)]
struct JointJson {
    #[serde(default)]
    name: Option<String>,
    x: Option<f64>,
    y: Option<f64>,
    z: Option<f64>,
    x_mm: Option<f64>,
    y_mm: Option<f64>,
    z_mm: Option<f64>,
}

impl TryFrom<PoseJson> for Pose3D {
    type Error = Error;

    fn try_from(f: PoseJson) -> Result<Self> {
        let metric = match f.units.as_deref() {
            Some("mm") => true,
            Some("px,px,mm") => false,
            Some(u) => return Err(Error::InvalidArgument(format!("unknown pose units {u:?}"))),
            None => f.joints.first().is_some_and(|j| j.x_mm.is_some()),
        };
        let default_names = f.taxonomy.joint_names();
        let mut names = Vec::with_capacity(f.joints.len());
        let mut joints = Vec::with_capacity(f.joints.len());
        for (i, j) in f.joints.into_iter().enumerate() {
            let coords = if metric {
                (j.x_mm, j.y_mm, j.z_mm)
            } else {
                (j.x, j.y, j.z)
            };
            let (Some(x), Some(y), Some(z)) = coords else {
                return Err(Error::InvalidArgument(format!(
                    "joint {i} is missing {} coordinates",
                    if metric { "x_mm/y_mm/z_mm" } else { "x/y/z" }
                )));
            };
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return Err(Error::InvalidArgument(format!("joint {i} has non-finite coordinates")));
            }
            names.push(
                j.name
                    .or_else(|| default_names.and_then(|n| n.get(i)).map(|s| s.to_string()))
                    .unwrap_or_else(|| format!("joint{i}")),
            );
            joints.push(Vector3::new(x, y, z));
        }
        let root = f.root.unwrap_or(if f.taxonomy == Taxonomy::Gpa16 { GPA16_ROOT } else { 0 });
        Pose3D::new(
            f.taxonomy,
            root,
            names,
            joints,
            if metric { PoseSpace::Metric } else { PoseSpace::Image },
        )
    }
}
