use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geoaff::scene::TriangleMesh;
use nalgebra::Point3;
use serde_json::Value;
use sha2::{Digest, Sha256};

const CAMERA: &str = r#"{"fx": 100, "fy": 100, "cx": 32, "cy": 24, "width": 64, "height": 48,
 "R": [1,0,0,0,1,0,0,0,1], "t": [0,0,0]}"#;

const POSE: &str = r#"{"taxonomy": "custom", "root": 0, "units": "px,px,mm", "joints": [
 {"name": "a", "x": 32, "y": 24, "z": 900},
 {"name": "b", "x": 33, "y": 24, "z": 1100}]}"#;

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mesh = TriangleMesh::axis_aligned_box(Point3::new(-500.0, -500.0, 1000.0), Point3::new(500.0, 500.0, 1400.0))
            .unwrap();
        std::fs::write(dir.path().join("scene.obj"), mesh.to_obj()).unwrap();
        std::fs::write(dir.path().join("cam.json"), CAMERA).unwrap();
        std::fs::write(dir.path().join("pose.json"), POSE).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str], threads: Option<&str>) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_geoaff"));
        cmd.current_dir(self.dir.path()).args(args);
        if let Some(t) = threads {
            cmd.env("GEOAFF_THREADS", t);
        }
        cmd.output().unwrap()
    }

    fn render(&self, out: &str) {
        let o = self.run(&["render", "--mesh", "scene.obj", "--camera", "cam.json", "--out", out], None);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(std::fs::read(path).unwrap()))
}

#[test]
fn validate_reports_violation_with_exit_one_and_refine_fixes_it() {
    let f = Fixture::new();
    f.render("map.mld");

    let o = f.run(&["validate", "--pose", "pose.json", "--map", "map.mld", "--report", "v.json"], None);
    assert_eq!(o.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&std::fs::read(f.path("v.json")).unwrap()).unwrap();
    assert_eq!(report["valid"], false);
    assert_eq!(report["gcl_mm"], 100.0);
    assert_eq!(report["joints"][1]["penetration_mm"], 100.0);

    let o = f.run(&["refine", "--pose", "pose.json", "--map", "map.mld", "--out", "refined.json"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let o = f.run(&["validate", "--pose", "refined.json", "--map", "map.mld"], None);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bad_inputs_exit_with_two() {
    let f = Fixture::new();
    let missing = f.run(&["validate", "--pose", "nope.json", "--map", "nope.mld"], None);
    assert_eq!(missing.status.code(), Some(2));
    let unknown = f.run(&["frobnicate"], None);
    assert_eq!(unknown.status.code(), Some(2));

    std::fs::write(f.path("junk.mld"), b"not a depth map").unwrap();
    let corrupt = f.run(&["viz", "--map", "junk.mld", "--out-dir", "viz"], None);
    assert_eq!(corrupt.status.code(), Some(2));

    f.render("map.mld");
    let zero_threads = f.run(&["viz", "--map", "map.mld", "--out-dir", "viz"], Some("0"));
    assert_eq!(zero_threads.status.code(), Some(2));
}

#[test]
fn manifest_hashes_match_files() {
    let f = Fixture::new();
    f.render("map.mld");
    let m: Value = serde_json::from_slice(&std::fs::read(f.path("map.mld.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "render");
    for key in ["inputs", "outputs"] {
        for rec in m[key].as_array().unwrap() {
            let p = f.path(rec["path"].as_str().unwrap());
            assert_eq!(rec["sha256"].as_str().unwrap(), sha(&p), "{}", p.display());
        }
    }
    let text = std::fs::read_to_string(f.path("map.mld.manifest.json")).unwrap();
    assert!(!text.contains("time"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let f = Fixture::new();
    let mut digests = vec![];
    for threads in ["1", "4"] {
        let map = format!("map{threads}.mld");
        let bench = format!("bench{threads}.json");
        let o = f.run(&["render", "--mesh", "scene.obj", "--camera", "cam.json", "--out", &map], Some(threads));
        assert_eq!(o.status.code(), Some(0));
        let o = f.run(&["bench", "--scenes", "4", "--poses", "3", "--out", &bench], Some(threads));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        digests.push((sha(&f.path(&map)), sha(&f.path(&bench))));
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn align_and_sample_write_json() {
    let f = Fixture::new();
    let pairs: Vec<[f64; 2]> = (0..40).map(|k| [k as f64, 2.0 * k as f64 + 7.0]).collect();
    std::fs::write(f.path("pairs.json"), serde_json::to_string(&pairs).unwrap()).unwrap();
    let o = f.run(&["align", "--pairs", "pairs.json", "--out", "model.json"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let model: Value = serde_json::from_slice(&std::fs::read(f.path("model.json")).unwrap()).unwrap();
    assert!((model["scale"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((model["offset"].as_f64().unwrap() - 7.0).abs() < 1e-9);

    let lines: Vec<String> = (0..10)
        .map(|k| {
            let x = if k % 2 == 0 { 0.0 } else { 100.0 };
            serde_json::json!({"t": k as f64, "joints": [[x, 0.0, 1000.0]]}).to_string()
        })
        .collect();
    std::fs::write(f.path("seq.jsonl"), lines.join("\n")).unwrap();
    let o = f.run(&["sample", "--sequence", "seq.jsonl", "--out", "kept.json", "--frames-out", "kept.jsonl"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(f.path("kept.jsonl").exists());
}

#[test]
fn viz_and_encode_produce_files() {
    let f = Fixture::new();
    f.render("map.mld");
    let o = f.run(&["viz", "--map", "map.mld", "--layers", "2", "--out-dir", "viz"], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(f.path("viz/manifest.json").exists());
    let pngs = std::fs::read_dir(f.path("viz")).unwrap().filter(|e| {
        e.as_ref().unwrap().path().extension().is_some_and(|x| x == "png")
    });
    assert_eq!(pngs.count(), 2);

    let o = f.run(
        &["encode", "--map", "map.mld", "--root-depth", "1200", "--crop", "32,24,40", "--res", "16", "--out", "feat.mld"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(f.path("feat.mld")).unwrap();
    assert_eq!(&bytes[..4], geoaff::mldepth::MAGIC);
}
