//! Dataset processing: clock alignment, frame subsampling and the
//! occlusion / close-to-geometry test subsets.

mod sampling;
mod subsets;
mod time;

pub use sampling::{
    adaptive_sample, adaptive_sample_with_threshold, frame_difference, percentile, SampleResult, SkeletonSequence,
    DEFAULT_FRAME_PERCENTILE, DEFAULT_THRESHOLD_PERCENTILE,
};
pub use subsets::{
    classify_frame, closest_point_on_triangle, occlusion_flags, point_mesh_distance, OcclusionFlags, SubsetConfig,
    SubsetReport,
};
pub use time::{ransac_time_align, TimeModel, DEFAULT_INLIER_THRESHOLD, DEFAULT_RANSAC_ITERS};
