//! Multi-hit ray tracing and multi-layer depth maps.

mod io;
mod map;
mod trace;
mod viz;

pub use io::{load_mld, save_mld, Container, MAGIC};
pub use map::{render_mld, MultiLayerDepthMap, DEFAULT_LAYERS, SENTINEL};
pub use trace::{intersect_triangle, multi_hit_trace, HitList, Tracer, MERGE_REL, PARALLEL_EPS, T_MIN};
pub use viz::visualize_layers;
