//! The `geoaff` command line.
//!
//! Exit codes: 0 success, 1 a semantic violation was found (for example a
//! pose penetrating geometry), 2 bad input, 3 an internal invariant failed.
//! Commands that write files also write a JSON run manifest listing every
//! input and output with its SHA-256.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::affordance::{encode_depth_features, encode_volumetric, is_valid, joint_penetrations};
use crate::bench::{run_bench, BenchConfig};
use crate::error::{Error, Result};
use crate::mldepth::{load_mld, render_mld, visualize_layers, MultiLayerDepthMap, DEFAULT_LAYERS};
use crate::pipeline::{
    adaptive_sample, classify_frame, ransac_time_align, SkeletonSequence, SubsetConfig, DEFAULT_INLIER_THRESHOLD,
    DEFAULT_RANSAC_ITERS, DEFAULT_THRESHOLD_PERCENTILE,
};
use crate::pose::{CropTransform, MetricsReport, Pose3D, PoseSpace, Taxonomy, DEFAULT_HEATMAP_RES, GPA16_BONES};
use crate::refine::{refine_pose, RefineConfig};
use crate::scene::{Camera, TriangleMesh};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "GEOAFF_THREADS";

#[derive(Parser, Debug)]
#[command(name = "geoaff", version, about = "Multi-layer depth maps and scene-aware pose tools")]
pub struct Cli {
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render an OBJ mesh into an MLD1 multi-layer depth map.
    Render {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        camera: PathBuf,
        #[arg(long, default_value_t = DEFAULT_LAYERS)]
        layers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a pose against scene free space.
    Validate {
        #[arg(long)]
        pose: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Refine joint depths so the pose leaves occupied space.
    Refine {
        #[arg(long)]
        pose: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// JSON object with any of the RefineConfig fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// MPJPE and PCK3D of predictions against ground truth.
    Metrics {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = 150.0)]
        threshold: f64,
        /// Camera for lifting image-space poses to millimeters.
        #[arg(long)]
        camera: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthetic benchmark of initial, refined and projected poses.
    Bench {
        #[arg(long, default_value_t = 20)]
        scenes: usize,
        #[arg(long, default_value_t = 10)]
        poses: usize,
        #[arg(long, default_value_t = 80.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit global = a·local + b to timestamp pairs with RANSAC.
    Align {
        /// JSON array of [local, global] pairs.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = DEFAULT_INLIER_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_RANSAC_ITERS)]
        iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drop redundant frames from a skeleton sequence.
    Sample {
        /// JSON lines, one {"t", "joints"} frame per line.
        #[arg(long)]
        sequence: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_PERCENTILE)]
        percentile: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the kept frames as JSON lines.
        #[arg(long)]
        frames_out: Option<PathBuf>,
    },
    /// Write one inverse-depth PNG per layer.
    Viz {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 4)]
        layers: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Classify frames into the occlusion and close-to-geometry subsets.
    Subsets {
        /// One image-space pose or an array of them, one per frame.
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resample a depth map into network input features.
    Encode {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        root_depth: f64,
        /// Use the penetration volume instead of layer offsets.
        #[arg(long)]
        volumetric: bool,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 1000.0)]
        half_range: f64,
        #[arg(long, default_value_t = DEFAULT_HEATMAP_RES)]
        res: usize,
        /// Square crop as cx,cy,side in source pixels (default: whole map).
        #[arg(long, value_delimiter = ',')]
        crop: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Input or output file with its content hash.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

impl FileRecord {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(FileRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance of one invocation. Contains no timestamps, so identical runs
/// produce identical manifests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub inputs: Vec<FileRecord>,
    pub config: Value,
    pub seed: Option<u64>,
    pub outputs: Vec<FileRecord>,
}

struct Run {
    command: &'static str,
    inputs: Vec<PathBuf>,
    config: Value,
    seed: Option<u64>,
    outputs: Vec<PathBuf>,
    manifest: Option<PathBuf>,
    code: i32,
}

impl Run {
    fn new(command: &'static str, inputs: &[&Path], config: Value) -> Self {
        Run {
            command,
            inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
            config,
            seed: None,
            outputs: vec![],
            manifest: None,
            code: EXIT_OK,
        }
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
        self.outputs.push(path.to_path_buf());
        Ok(())
    }

    fn write_json(&mut self, path: &Path, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json("output", e))?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }

    fn manifest(&self) -> Result<RunManifest> {
        Ok(RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: self.inputs.iter().map(|p| FileRecord::of(p)).collect::<Result<_>>()?,
            config: self.config.clone(),
            seed: self.seed,
            outputs: self.outputs.iter().map(|p| FileRecord::of(p)).collect::<Result<_>>()?,
        })
    }
}

/// Exit code for an error: 3 for broken internal invariants, 2 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Internal(_) | Error::NonFiniteObjective { .. } => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match configure_threads().and_then(|_| execute(cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

fn manifest_path(explicit: Option<PathBuf>, run: &Run) -> Option<PathBuf> {
    explicit.or_else(|| run.manifest.clone()).or_else(|| {
        run.outputs.first().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

fn execute(cli: Cli) -> Result<i32> {
    let run = dispatch(cli.command)?;
    if let Some(path) = manifest_path(cli.manifest, &run) {
        let m = run.manifest()?;
        let mut text = serde_json::to_string_pretty(&m).map_err(|e| Error::json("manifest", e))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(run.code)
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).map_err(|e| Error::json("output", e))?);
    Ok(())
}

fn dispatch(command: Command) -> Result<Run> {
    match command {
        Command::Render {
            mesh,
            camera,
            layers,
            out,
        } => {
            let m = TriangleMesh::load_obj(&mesh)?;
            let cam = Camera::load(&camera)?;
            let map = render_mld(&m, &cam, layers)?;
            let mut run = Run::new("render", &[&mesh, &camera], json!({ "layers": layers }));
            run.write(&out, &map.to_bytes())?;
            Ok(run)
        }
        Command::Validate { pose, map, report } => cmd_validate(&pose, &map, report.as_deref()),
        Command::Refine {
            pose,
            map,
            config,
            seed,
            out,
            report,
        } => {
            let cfg: RefineConfig = match &config {
                Some(p) => read_json(p)?,
                None => RefineConfig::default(),
            };
            let init = Pose3D::load(&pose)?;
            let m = load_mld(&map)?;
            let (edges, lengths) = bone_prior(&init, &m)?;
            let r = refine_pose(&init, &m, &edges, &lengths, &cfg)?;
            let mut inputs: Vec<&Path> = vec![&pose, &map];
            if let Some(c) = &config {
                inputs.push(c);
            }
            let mut run = Run::new("refine", &inputs, serde_json::to_value(cfg).expect("config serializes"));
            run.seed = Some(seed);
            let mut text = r.pose.to_json();
            text.push('\n');
            run.write(&out, text.as_bytes())?;
            if let Some(p) = report {
                run.write_json(&p, &r)?;
            }
            Ok(run)
        }
        Command::Metrics {
            pred,
            gt,
            threshold,
            camera,
            out,
        } => {
            let cam = camera.as_deref().map(Camera::load).transpose()?;
            let lift = |poses: Vec<Pose3D>| -> Result<Vec<Pose3D>> {
                poses
                    .into_iter()
                    .map(|p| match (p.space, &cam) {
                        (PoseSpace::Metric, _) => Ok(p),
                        (PoseSpace::Image, Some(c)) => p.to_metric(c),
                        (PoseSpace::Image, None) => {
                            Err(Error::InvalidArgument("image-space poses need --camera".into()))
                        }
                    })
                    .collect()
            };
            let preds = lift(Pose3D::load_many(&pred)?)?;
            let gts = lift(Pose3D::load_many(&gt)?)?;
            if preds.len() != gts.len() {
                return Err(Error::ShapeMismatch(format!(
                    "{} predictions for {} ground-truth poses",
                    preds.len(),
                    gts.len()
                )));
            }
            let pairs: Vec<_> = preds.into_iter().zip(gts).collect();
            let report = MetricsReport::evaluate(&pairs, threshold)?;
            let mut inputs: Vec<&Path> = vec![&pred, &gt];
            if let Some(c) = &camera {
                inputs.push(c);
            }
            let mut run = Run::new("metrics", &inputs, json!({ "threshold_mm": threshold }));
            match out {
                Some(p) => run.write_json(&p, &report)?,
                None => print_json(&report)?,
            }
            Ok(run)
        }
        Command::Bench {
            scenes,
            poses,
            noise,
            seed,
            config,
            out,
        } => {
            let refine = match &config {
                Some(p) => read_json(p)?,
                None => RefineConfig::default(),
            };
            let cfg = BenchConfig {
                scenes,
                poses,
                noise_mm: noise,
                seed,
                refine,
                ..BenchConfig::default()
            };
            let summary = run_bench(&cfg)?;
            print!("{}", summary.table());
            let inputs: Vec<&Path> = config.iter().map(|p| p.as_path()).collect();
            let mut run = Run::new("bench", &inputs, serde_json::to_value(&cfg).expect("config serializes"));
            run.seed = Some(seed);
            if let Some(p) = out {
                run.write_json(&p, &summary)?;
            }
            Ok(run)
        }
        Command::Align {
            pairs,
            threshold,
            iters,
            seed,
            out,
        } => {
            let data: Vec<(f64, f64)> = read_json(&pairs)?;
            let model = ransac_time_align(&data, threshold, iters, seed)?;
            let mut run = Run::new("align", &[&pairs], json!({ "threshold": threshold, "iters": iters }));
            run.seed = Some(seed);
            match out {
                Some(p) => run.write_json(&p, &model)?,
                None => print_json(&model)?,
            }
            Ok(run)
        }
        Command::Sample {
            sequence,
            percentile,
            out,
            frames_out,
        } => {
            let seq = SkeletonSequence::load(&sequence)?;
            let result = adaptive_sample(&seq, percentile)?;
            let mut run = Run::new("sample", &[&sequence], json!({ "percentile": percentile }));
            match out {
                Some(p) => run.write_json(&p, &result)?,
                None => print_json(&result)?,
            }
            if let Some(p) = frames_out {
                run.write(&p, seq.subsequence(&result.kept)?.to_jsonl().as_bytes())?;
            }
            Ok(run)
        }
        Command::Viz { map, layers, out_dir } => {
            let m = load_mld(&map)?;
            let images = visualize_layers(&m, layers)?;
            let mut run = Run::new("viz", &[&map], json!({ "layers": layers }));
            run.manifest = Some(out_dir.join("manifest.json"));
            for (k, img) in images.iter().enumerate() {
                let mut png = std::io::Cursor::new(Vec::new());
                img.write_to(&mut png, image::ImageFormat::Png)
                    .map_err(|e| Error::Internal(format!("PNG encoding: {e}")))?;
                run.write(&out_dir.join(format!("layer_{k:02}.png")), png.get_ref())?;
            }
            Ok(run)
        }
        Command::Subsets { poses, map, mesh, out } => {
            let ps = Pose3D::load_many(&poses)?;
            let m = load_mld(&map)?;
            let tm = TriangleMesh::load_obj(&mesh)?;
            let cfg = SubsetConfig::default();
            let reports = ps
                .iter()
                .enumerate()
                .map(|(k, p)| classify_frame(k, p, &m, &tm, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let mut run = Run::new("subsets", &[&poses, &map, &mesh], serde_json::to_value(cfg).expect("config serializes"));
            match out {
                Some(p) => run.write_json(&p, &reports)?,
                None => print_json(&reports)?,
            }
            Ok(run)
        }
        Command::Encode {
            map,
            root_depth,
            volumetric,
            samples,
            half_range,
            res,
            crop,
            out,
        } => {
            let m = load_mld(&map)?;
            let c = match crop.as_deref() {
                Some([cx, cy, side]) => CropTransform::square(*cx, *cy, *side, CropTransform::DEFAULT_SIZE)?,
                Some(_) => return Err(Error::InvalidArgument("--crop takes cx,cy,side".into())),
                None => CropTransform::identity(m.width() as u32, m.height() as u32),
            };
            let features = if volumetric {
                encode_volumetric(&m, &c, root_depth, samples, half_range, res)?
            } else {
                encode_depth_features(&m, &c, root_depth, res)?
            };
            let mut run = Run::new(
                "encode",
                &[&map],
                json!({
                    "root_depth": root_depth,
                    "volumetric": volumetric,
                    "samples": samples,
                    "half_range": half_range,
                    "res": res,
                    "crop": crop,
                }),
            );
            run.write(&out, &features.to_container(&m).to_bytes())?;
            Ok(run)
        }
    }
}

/// Skeleton edges and their current metric lengths, used to keep bone
/// lengths stable during refinement. Only known skeletons get a prior.
fn bone_prior(pose: &Pose3D, map: &MultiLayerDepthMap) -> Result<(Vec<(usize, usize)>, Vec<f64>)> {
    if pose.taxonomy != Taxonomy::Gpa16 || pose.space != PoseSpace::Image {
        return Ok((vec![], vec![]));
    }
    let metric = pose.to_metric(map.camera())?;
    let edges = GPA16_BONES.to_vec();
    let lengths = edges
        .iter()
        .map(|&(a, b)| (metric.joints[a] - metric.joints[b]).norm())
        .collect();
    Ok((edges, lengths))
}

fn cmd_validate(pose: &Path, map: &Path, report: Option<&Path>) -> Result<Run> {
    let p = Pose3D::load(pose)?;
    if p.space != PoseSpace::Image {
        return Err(Error::InvalidArgument("validate needs an image-space pose (units px,px,mm)".into()));
    }
    let m = load_mld(map)?;
    let valid = is_valid(&p, &m)?;
    let pen = joint_penetrations(&p, &m)?;
    let joints: Vec<Value> = p
        .names
        .iter()
        .zip(valid.iter().zip(&pen))
        .map(|(name, (&v, &d))| json!({ "name": name, "valid": v, "penetration_mm": d }))
        .collect();
    let violations: Vec<&String> = p.names.iter().zip(&valid).filter(|(_, v)| !**v).map(|(n, _)| n).collect();
    let all_valid = violations.is_empty();
    let body = json!({
        "valid": all_valid,
        "gcl_mm": pen.iter().sum::<f64>(),
        "violations": violations,
        "joints": joints,
    });
    let mut run = Run::new("validate", &[pose, map], json!({}));
    match report {
        Some(r) => run.write_json(r, &body)?,
        None => print_json(&body)?,
    }
    run.code = if all_valid { EXIT_OK } else { EXIT_VIOLATION };
    Ok(run)
}
