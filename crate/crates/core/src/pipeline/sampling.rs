use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_FRAME_PERCENTILE: f64 = 75.0;
pub const DEFAULT_THRESHOLD_PERCENTILE: f64 = 55.0;

/// Timestamped skeleton frames, each `J × 3` mm.
#[derive(Clone, Debug, PartialEq)]
pub struct SkeletonSequence {
    timestamps: Vec<f64>,
    frames: Vec<Vec<[f64; 3]>>,
}

#[derive(Serialize, Deserialize)]
struct FrameLine {
    t: f64,
    joints: Vec<[f64; 3]>,
}

impl SkeletonSequence {
    pub fn new(timestamps: Vec<f64>, frames: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        if timestamps.len() != frames.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} timestamps for {} frames",
                timestamps.len(),
                frames.len()
            )));
        }
        if let Some(k) = timestamps.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSequence(format!(
                "timestamps not strictly increasing at frame {}",
                k + 1
            )));
        }
        if let Some(first) = frames.first() {
            if let Some(k) = frames.iter().position(|f| f.len() != first.len()) {
                return Err(Error::InvalidSequence(format!(
                    "frame {k} has {} joints, frame 0 has {}",
                    frames[k].len(),
                    first.len()
                )));
            }
        }
        Ok(SkeletonSequence { timestamps, frames })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn frames(&self) -> &[Vec<[f64; 3]>] {
        &self.frames
    }

    /// The frames at `indices`, in the given order.
    pub fn subsequence(&self, indices: &[usize]) -> Result<Self> {
        SkeletonSequence::new(
            indices.iter().map(|&i| self.timestamps[i]).collect(),
            indices.iter().map(|&i| self.frames[i].clone()).collect(),
        )
    }

    /// One `{"t": …, "joints": [[x, y, z], …]}` object per line; blank
    /// lines are skipped.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut ts = vec![];
        let mut frames = vec![];
        for (k, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: FrameLine = serde_json::from_str(line).map_err(|e| Error::json(format!("sequence line {}", k + 1), e))?;
            ts.push(f.t);
            frames.push(f.joints);
        }
        SkeletonSequence::new(ts, frames)
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (t, joints) in self.timestamps.iter().zip(&self.frames) {
            let line = FrameLine { t: *t, joints: joints.clone() };
            out.push_str(&serde_json::to_string(&line).expect("frame serializes"));
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}

/// Nearest-rank percentile: the `⌈p/100 · n⌉`-th smallest value.
///
/// `p = 0` returns the minimum. An empty slice has no percentile.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=100.0).contains(&p) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let x = p / 100.0 * v.len() as f64;
    // guard against 0.55·100 = 55.000000000000007 style rounding
    let rank = if (x - x.round()).abs() < 1e-9 { x.round() } else { x.ceil() };
    Some(v[(rank as usize).max(1) - 1])
}

/// 75th-percentile per-joint distance between two frames (mm).
pub fn frame_difference(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!("{} joints vs {}", a.len(), b.len())));
    }
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(p, q)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt())
        .collect();
    percentile(&d, DEFAULT_FRAME_PERCENTILE).ok_or(Error::InvalidSequence("frames have no joints".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleResult {
    pub kept: Vec<usize>,
    pub threshold_mm: f64,
    pub total: usize,
}

impl SampleResult {
    pub fn kept_fraction(&self) -> f64 {
        self.kept.len() as f64 / self.total as f64
    }
}

/// Keeps a frame when it differs from the last kept frame by more than
/// `threshold` mm. Frame 0 is always kept.
pub fn adaptive_sample_with_threshold(seq: &SkeletonSequence, threshold: f64) -> Result<Vec<usize>> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let frames = seq.frames();
    let mut kept = vec![0];
    let mut last = 0;
    for k in 1..frames.len() {
        if frame_difference(&frames[k], &frames[last])? > threshold {
            kept.push(k);
            last = k;
        }
    }
    Ok(kept)
}

/// Adaptive frame sampling with the threshold set to the given percentile
/// of all raw adjacent-frame differences.
pub fn adaptive_sample(seq: &SkeletonSequence, threshold_percentile: f64) -> Result<SampleResult> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !(0.0..=100.0).contains(&threshold_percentile) {
        return Err(Error::InvalidArgument(format!(
            "percentile {threshold_percentile} outside [0, 100]"
        )));
    }
    let diffs = seq
        .frames()
        .windows(2)
        .map(|w| frame_difference(&w[1], &w[0]))
        .collect::<Result<Vec<_>>>()?;
    let threshold = percentile(&diffs, threshold_percentile).unwrap_or(0.0);
    Ok(SampleResult {
        kept: adaptive_sample_with_threshold(seq, threshold)?,
        threshold_mm: threshold,
        total: seq.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifted(frame: &[[f64; 3]], d: f64) -> Vec<[f64; 3]> {
        frame.iter().map(|p| [p[0] + d, p[1], p[2]]).collect()
    }

    #[test]
    fn nearest_rank() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(percentile(&v, 75.0), Some(8.0));
        assert_eq!(percentile(&v, 55.0), Some(6.0));
        assert_eq!(percentile(&v, 50.0), Some(5.0));
        assert_eq!(percentile(&v, 0.0), Some(1.0));
        assert_eq!(percentile(&v, 100.0), Some(10.0));
        let h: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&h, 55.0), Some(55.0));
        assert_eq!(percentile(&[], 50.0), None);
    }

    #[test]
    fn frame_difference_examples() {
        let a = vec![[0.0; 3]; 34];
        assert_eq!(frame_difference(&a, &a).unwrap(), 0.0);
        let mut b = shifted(&a, 10.0);
        b[5][0] = 100.0;
        assert_eq!(frame_difference(&a, &b).unwrap(), 10.0);
        assert_eq!(frame_difference(&a, &shifted(&a, 7.0)).unwrap(), 7.0);
        assert!(frame_difference(&a, &a[..3]).is_err());
    }

    #[test]
    fn constant_sequence_keeps_first() {
        let f = vec![[1.0, 2.0, 3.0]; 4];
        let seq = SkeletonSequence::new((0..6).map(f64::from).collect(), vec![f; 6]).unwrap();
        assert_eq!(adaptive_sample(&seq, 55.0).unwrap().kept, vec![0]);
    }

    #[test]
    fn steady_motion() {
        let base = vec![[0.0; 3]; 4];
        let frames: Vec<_> = (0..8).map(|k| shifted(&base, 20.0 * k as f64)).collect();
        let seq = SkeletonSequence::new((0..8).map(f64::from).collect(), frames).unwrap();
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(adaptive_sample_with_threshold(&seq, 10.0).unwrap(), all);
        // threshold equals each step, so a frame needs two steps of motion
        let r = adaptive_sample(&seq, 55.0).unwrap();
        assert_eq!(r.threshold_mm, 20.0);
        assert_eq!(r.kept, vec![0, 2, 4, 6]);
    }

    #[test]
    fn sequence_validation() {
        let f = vec![[0.0; 3]; 2];
        assert!(SkeletonSequence::new(vec![0.0, 0.0], vec![f.clone(), f.clone()]).is_err());
        assert!(SkeletonSequence::new(vec![0.0, 1.0], vec![f.clone(), vec![[0.0; 3]]]).is_err());
        let empty = SkeletonSequence::new(vec![], vec![]).unwrap();
        assert!(matches!(adaptive_sample(&empty, 55.0), Err(Error::EmptySequence)));
    }

    #[test]
    fn jsonl_round_trip() {
        let seq = SkeletonSequence::new(
            vec![0.5, 1.25],
            vec![vec![[1.0, 2.0, 3.0]], vec![[0.1, -2.0, 1e4]]],
        )
        .unwrap();
        let text = seq.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(SkeletonSequence::from_jsonl(&text).unwrap(), seq);
        assert!(SkeletonSequence::from_jsonl("{\"t\": 1}\n").is_err());
    }
}
