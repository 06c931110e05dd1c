//! Runs the synthetic refinement benchmark and prints its summary table.
//!
//! `cargo run --release --example bench -- [noise_mm] [seed]`

use geoaff::bench::{run_bench, BenchConfig};

fn main() -> geoaff::Result<()> {
    let mut args = std::env::args().skip(1);
    let noise_mm = args.next().and_then(|s| s.parse().ok()).unwrap_or(80.0);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let summary = run_bench(&BenchConfig {
        noise_mm,
        seed,
        ..BenchConfig::default()
    })?;
    print!("{}", summary.table());
    Ok(())
}
