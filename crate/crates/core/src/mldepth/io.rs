//! The MLD1 container.
//!
//! ```text
//! "MLD1" | u32 height | u32 width | u32 layers
//!        | f32 × (height·width·layers), row-major, layer innermost
//!        | u32 camera-JSON length | camera JSON (UTF-8)
//! ```
//!
//! All integers and floats are little endian; absent layers are quiet NaN.

use std::path::Path;

use super::map::MultiLayerDepthMap;
use crate::error::{Error, Result};
use crate::scene::Camera;

pub const MAGIC: &[u8; 4] = b"MLD1";

/// Undecoded contents of an MLD1 file.
#[derive(Clone, Debug)]
pub struct Container {
    pub height: usize,
    pub width: usize,
    pub layers: usize,
    pub values: Vec<f32>,
    pub camera_json: String,
}

impl Container {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + self.values.len() * 4 + self.camera_json.len());
        out.extend_from_slice(MAGIC);
        for dim in [self.height, self.width, self.layers] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for v in &self.values {
            let v = if v.is_nan() { f32::NAN } else { *v };
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.camera_json.len() as u32).to_le_bytes());
        out.extend_from_slice(self.camera_json.as_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic: [u8; 4] = cur.take(4, "magic")?.try_into().unwrap();
        if &magic != MAGIC {
            return Err(Error::BadMagic { found: magic });
        }
        let height = cur.u32("height")? as usize;
        let width = cur.u32("width")? as usize;
        let layers = cur.u32("layers")? as usize;
        let count = height
            .checked_mul(width)
            .and_then(|n| n.checked_mul(layers))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Truncated("grid size overflows".into()))?;
        let values = cur
            .take(count, "depth grid")?
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        let json_len = cur.u32("camera length")? as usize;
        let camera_json = std::str::from_utf8(cur.take(json_len, "camera JSON")?)
            .map_err(|_| Error::Truncated("camera JSON is not UTF-8".into()))?
            .to_owned();
        if cur.pos != bytes.len() {
            return Err(Error::Truncated(format!(
                "{} trailing bytes after camera JSON",
                bytes.len() - cur.pos
            )));
        }
        Ok(Container {
            height,
            width,
            layers,
            values,
            camera_json,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| {
                Error::Truncated(format!(
                    "{what}: need {n} bytes at offset {}, file has {}",
                    self.pos,
                    self.bytes.len()
                ))
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

impl MultiLayerDepthMap {
    pub fn to_bytes(&self) -> Vec<u8> {
        Container {
            height: self.height(),
            width: self.width(),
            layers: self.layers(),
            values: self.raw().to_vec(),
            camera_json: self.camera().to_json(),
        }
        .to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let c = Container::from_bytes(bytes)?;
        let camera = Camera::from_json(&c.camera_json)?;
        MultiLayerDepthMap::from_raw(c.height, c.width, c.layers, c.values, camera)
    }
}

pub fn save_mld(map: &MultiLayerDepthMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, map.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_mld(path: impl AsRef<Path>) -> Result<MultiLayerDepthMap> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    MultiLayerDepthMap::from_bytes(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mldepth::map::SENTINEL;

    fn small_map() -> MultiLayerDepthMap {
        let cam = Camera::axis_aligned(50.0, 50.0, 1.0, 1.0, 2, 2).unwrap();
        let d = vec![
            1000.0, 1400.0, SENTINEL, //
            SENTINEL, SENTINEL, SENTINEL, //
            2000.0, SENTINEL, SENTINEL, //
            1.5, 2.5, 3.5,
        ];
        MultiLayerDepthMap::from_raw(2, 2, 3, d, cam).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = small_map();
        let bytes = m.to_bytes();
        let back = MultiLayerDepthMap::from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn layout_is_little_endian_layer_innermost() {
        let bytes = small_map().to_bytes();
        assert_eq!(&bytes[..4], b"MLD1");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &3u32.to_le_bytes());
        assert_eq!(&bytes[16..20], &1000f32.to_le_bytes());
        assert_eq!(&bytes[20..24], &1400f32.to_le_bytes());
        assert_eq!(&bytes[24..28], &0x7fc0_0000u32.to_le_bytes());
    }

    #[test]
    fn bad_magic() {
        let mut bytes = small_map().to_bytes();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(MultiLayerDepthMap::from_bytes(&bytes), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn truncated_payload() {
        let bytes = small_map().to_bytes();
        for cut in [2, 10, 30, bytes.len() - 1] {
            assert!(matches!(
                MultiLayerDepthMap::from_bytes(&bytes[..cut]),
                Err(Error::Truncated(_))
            ));
        }
    }

    #[test]
    fn corrupted_order_names_pixel() {
        let mut bytes = small_map().to_bytes();
        // pixel (row 1, col 1), layer 1: 2.5 -> 1.0
        let offset = 16 + ((3 * 3) + 1) * 4;
        bytes[offset..offset + 4].copy_from_slice(&1.0f32.to_le_bytes());
        match MultiLayerDepthMap::from_bytes(&bytes) {
            Err(Error::LayerInvariant { row: 1, col: 1, layer: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
