//! Thins a skeleton sequence by dropping frames that barely differ from the
//! last kept one, and writes both versions as JSON lines.

use geoaff::pipeline::{adaptive_sample, SkeletonSequence, DEFAULT_THRESHOLD_PERCENTILE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a person who stands still for a second, waves, then stands still
    let frames: Vec<Vec<[f64; 3]>> = (0..360)
        .map(|k| {
            let t = k as f64 / 120.0;
            let wave = if (1.0..2.0).contains(&t) { 300.0 * (6.0 * t).sin() } else { 0.0 };
            (0..34)
                .map(|j| {
                    let jitter = ((k * 31 + j * 17) % 7) as f64 - 3.0;
                    let arm = if j >= 20 { wave } else { 0.0 };
                    [j as f64 * 40.0 + arm + jitter, 900.0 - j as f64 * 50.0, 3000.0]
                })
                .collect()
        })
        .collect();
    let seq = SkeletonSequence::new((0..360).map(|k| k as f64 / 120.0).collect(), frames)?;

    let result = adaptive_sample(&seq, DEFAULT_THRESHOLD_PERCENTILE)?;
    println!(
        "threshold {:.1} mm, kept {} of {} frames ({:.0}%)",
        result.threshold_mm,
        result.kept.len(),
        result.total,
        100.0 * result.kept_fraction()
    );
    let waving = result.kept.iter().filter(|&&k| (120..240).contains(&k)).count();
    println!("{waving} of the kept frames fall in the waving second");

    let path = std::env::temp_dir().join("geoaff_sampled.jsonl");
    std::fs::write(&path, seq.subsequence(&result.kept)?.to_jsonl())?;
    println!("wrote {}", path.display());
    Ok(())
}
