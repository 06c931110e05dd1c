use serde::{Deserialize, Serialize};

use super::Pose3D;
use crate::error::{Error, Result};

/// Joint naming scheme of a skeleton.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum Taxonomy {
    /// The 16-joint mocap rig subset used for evaluation, root at `hips`.
    Gpa16,
    /// MPII 16-joint layout.
    Mpii16,
    /// Full 34-joint mocap skeleton.
    Mocap34,
    Other(String),
}

pub const GPA16_NAMES: [&str; 16] = [
    "rightfoot",
    "rightleg",
    "rightupleg",
    "leftupleg",
    "leftleg",
    "leftfoot",
    "hips",
    "spine1",
    "head",
    "site",
    "righthand",
    "rightforearm",
    "rightarm",
    "leftarm",
    "leftforearm",
    "lefthand",
];

pub const MPII16_NAMES: [&str; 16] = [
    "r ankle",
    "r knee",
    "r hip",
    "l hip",
    "l knee",
    "l ankle",
    "pelvis",
    "thorax",
    "upper neck",
    "head top",
    "r wrist",
    "r elbow",
    "r shoulder",
    "l shoulder",
    "l elbow",
    "l wrist",
];

/// `(GPA16 index, MPII16 index)` correspondence.
pub const GPA16_TO_MPII16: [(usize, usize); 16] = [
    (0, 0),
    (1, 1),
    (2, 2),
    (3, 3),
    (4, 4),
    (5, 5),
    (6, 6),
    (7, 7),
    (8, 8),
    (9, 9),
    (10, 10),
    (11, 11),
    (12, 12),
    (13, 13),
    (14, 14),
    (15, 15),
];

/// Kinematic tree of the 16-joint skeleton as `(parent, child)` pairs.
pub const GPA16_BONES: [(usize, usize); 15] = [
    (1, 0),
    (2, 1),
    (6, 2),
    (6, 3),
    (3, 4),
    (4, 5),
    (6, 7),
    (7, 9),
    (9, 8),
    (7, 12),
    (12, 11),
    (11, 10),
    (7, 13),
    (13, 14),
    (14, 15),
];

pub const GPA16_ROOT: usize = 6;

impl From<String> for Taxonomy {
    fn from(s: String) -> Self {
        match s.as_str() {
            "GPA16" => Taxonomy::Gpa16,
            "MPII16" => Taxonomy::Mpii16,
            "MOCAP34" => Taxonomy::Mocap34,
            _ => Taxonomy::Other(s),
        }
    }
}

impl From<Taxonomy> for String {
    fn from(t: Taxonomy) -> Self {
        t.name().to_owned()
    }
}

impl std::fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl Taxonomy {
    pub fn name(&self) -> &str {
        match self {
            Taxonomy::Gpa16 => "GPA16",
            Taxonomy::Mpii16 => "MPII16",
            Taxonomy::Mocap34 => "MOCAP34",
            Taxonomy::Other(s) => s,
        }
    }

    /// Required joint count, if the taxonomy fixes one.
    pub fn joint_count(&self) -> Option<usize> {
        match self {
            Taxonomy::Gpa16 | Taxonomy::Mpii16 => Some(16),
            Taxonomy::Mocap34 => Some(34),
            Taxonomy::Other(_) => None,
        }
    }

    pub fn joint_names(&self) -> Option<&'static [&'static str]> {
        match self {
            Taxonomy::Gpa16 => Some(&GPA16_NAMES),
            Taxonomy::Mpii16 => Some(&MPII16_NAMES),
            _ => None,
        }
    }
}

/// Re-expresses a pose in another joint taxonomy.
///
/// Supported pairs are GPA16 ↔ MPII16 (and identity). Coordinates are
/// carried over unchanged; joints are reordered and renamed.
pub fn map_taxonomy(pose: &Pose3D, from: &Taxonomy, to: &Taxonomy) -> Result<Pose3D> {
    if &pose.taxonomy != from {
        return Err(Error::TaxonomyMismatch(format!(
            "pose is {}, mapping from {from}",
            pose.taxonomy
        )));
    }
    if from == to {
        return Ok(pose.clone());
    }
    let forward = match (from, to) {
        (Taxonomy::Gpa16, Taxonomy::Mpii16) => true,
        (Taxonomy::Mpii16, Taxonomy::Gpa16) => false,
        _ => {
            return Err(Error::UnsupportedTaxonomy {
                from: from.to_string(),
                to: to.to_string(),
            })
        }
    };
    let names = to.joint_names().expect("16-joint taxonomies are named");
    let mut joints = pose.joints.clone();
    let mut root = pose.root;
    for &(gpa, mpii) in &GPA16_TO_MPII16 {
        let (src, dst) = if forward { (gpa, mpii) } else { (mpii, gpa) };
        joints[dst] = pose.joints[src];
        if pose.root == src {
            root = dst;
        }
    }
    Pose3D::new(
        to.clone(),
        root,
        names.iter().map(|s| s.to_string()).collect(),
        joints,
        pose.space,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::PoseSpace;
    use nalgebra::Vector3;

    fn gpa_pose() -> Pose3D {
        let joints = (0..16).map(|j| Vector3::new(j as f64, 2.0 * j as f64, 1000.0 + j as f64)).collect();
        Pose3D::gpa16(joints, PoseSpace::Image).unwrap()
    }

    #[test]
    fn appendix_correspondences() {
        let mpii = map_taxonomy(&gpa_pose(), &Taxonomy::Gpa16, &Taxonomy::Mpii16).unwrap();
        assert_eq!(mpii.names[0], "r ankle");
        assert_eq!(mpii.joints[0], gpa_pose().joints[0]);
        assert_eq!(GPA16_NAMES[9], "site");
        assert_eq!(mpii.names[9], "head top");
        assert_eq!(mpii.joints[9], gpa_pose().joints[9]);
        assert_eq!(mpii.names[mpii.root], "pelvis");
    }

    #[test]
    fn round_trip_is_identity() {
        let p = gpa_pose();
        let back = map_taxonomy(
            &map_taxonomy(&p, &Taxonomy::Gpa16, &Taxonomy::Mpii16).unwrap(),
            &Taxonomy::Mpii16,
            &Taxonomy::Gpa16,
        )
        .unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn mapping_is_a_permutation() {
        let mut a: Vec<_> = GPA16_TO_MPII16.iter().map(|p| p.0).collect();
        let mut b: Vec<_> = GPA16_TO_MPII16.iter().map(|p| p.1).collect();
        a.sort();
        b.sort();
        assert_eq!(a, (0..16).collect::<Vec<_>>());
        assert_eq!(b, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn unsupported_pair() {
        let p = gpa_pose();
        assert!(matches!(
            map_taxonomy(&p, &Taxonomy::Gpa16, &Taxonomy::Mocap34),
            Err(Error::UnsupportedTaxonomy { .. })
        ));
    }

    #[test]
    fn bones_form_a_tree() {
        let mut children: Vec<usize> = GPA16_BONES.iter().map(|b| b.1).collect();
        children.sort();
        children.dedup();
        assert_eq!(children.len(), 15);
        assert!(!children.contains(&GPA16_ROOT));
    }
}
