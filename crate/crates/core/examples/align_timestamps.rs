//! Fits a linear clock mapping between a camera and a motion-capture system
//! from noisy timestamp pairs, some of which are wrong.

use geoaff::pipeline::{ransac_time_align, DEFAULT_INLIER_THRESHOLD, DEFAULT_RANSAC_ITERS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> geoaff::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // video frames at 30 fps, mocap clock at 120 Hz starting at tick 3600
    let pairs: Vec<(f64, f64)> = (0..300)
        .map(|k| {
            let local = k as f64 / 30.0;
            let mut global = 4.0 * local + 30.0;
            if rng.random_bool(0.15) {
                global += rng.random_range(-5.0..5.0);
            }
            (local, global)
        })
        .collect();

    let model = ransac_time_align(&pairs, DEFAULT_INLIER_THRESHOLD, DEFAULT_RANSAC_ITERS, 0)?;
    println!(
        "global = {:.6} * local + {:.6}  ({} of {} pairs agree)",
        model.scale,
        model.offset,
        model.inlier_count,
        pairs.len()
    );
    println!("frame 150 maps to {:.4}", model.apply(150.0 / 30.0));
    Ok(())
}
