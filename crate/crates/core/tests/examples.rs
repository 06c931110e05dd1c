//! Runs each example binary that `cargo test` built alongside the tests.
//! The benchmark example is left out because of its running time.

use std::path::PathBuf;
use std::process::Command;

const EXAMPLES: &[&str] = &[
    "render_depth_layers",
    "trace_rays",
    "calibrate_camera",
    "validate_pose",
    "refine_pose",
    "evaluate_metrics",
    "heatmap_loss",
    "encode_geometry",
    "align_timestamps",
    "sample_frames",
    "subsets",
    "visualize_layers",
];

fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_geoaff")).parent().unwrap().join("examples")
}

#[test]
fn examples_run_cleanly() {
    let dir = examples_dir();
    let mut ran = 0;
    for name in EXAMPLES {
        let exe = dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX));
        if !exe.exists() {
            eprintln!("skipping {name}: not built (run the whole test suite to build examples)");
            continue;
        }
        let out = Command::new(&exe).output().unwrap();
        assert!(out.status.success(), "{name} failed:\n{}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{name} printed nothing");
        ran += 1;
    }
    eprintln!("ran {ran} of {} examples", EXAMPLES.len());
}
