//! Parameter wire/checkpoint format.
//!
//! Identical bytes on disk (`.fsyn` files) and on the simulated wire,
//! little-endian throughout:
//!
//! ```text
//! magic "FSYN" | version u32 = 1 | entry count u32 |
//! per entry: name len u16 | name bytes (UTF-8) | ndims u8 | each dim u32 |
//!            values as f32 array, row-major
//! ```

use crate::error::{Error, Result};
use crate::nn::{ParamEntry, ParamSet};

pub const MAGIC: &[u8; 4] = b"FSYN";
pub const VERSION: u32 = 1;

/// File extension for checkpoint files.
pub const CHECKPOINT_EXT: &str = "fsyn";

pub fn serialize_params(params: &ParamSet) -> Result<Vec<u8>> {
    if !params.is_finite() {
        return Err(Error::NumericDomain(
            "cannot serialize non-finite parameters".into(),
        ));
    }
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for entry in params.entries() {
        let name = entry.name.as_bytes();
        if name.len() > u16::MAX as usize {
            return Err(Error::Format {
                offset: out.len() as u64,
                message: format!("entry name '{}' too long", entry.name),
            });
        }
        if entry.shape.len() > u8::MAX as usize {
            return Err(Error::Format {
                offset: out.len() as u64,
                message: "too many dimensions".into(),
            });
        }
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name);
        out.push(entry.shape.len() as u8);
        for &d in &entry.shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &v in &entry.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            offset: self.pos as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| self.err(format!("truncated: need {n} more bytes")))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn deserialize_params(bytes: &[u8]) -> Result<ParamSet> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4)?;
    if magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad magic {magic:?}, expected {MAGIC:?}"),
        });
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            message: format!("unsupported format version {version}"),
        });
    }
    let count = cur.u32()? as usize;
    let mut params = ParamSet::new();
    for _ in 0..count {
        let name_len = cur.u16()? as usize;
        let name_pos = cur.pos;
        let name = std::str::from_utf8(cur.take(name_len)?)
            .map_err(|e| Error::Format {
                offset: name_pos as u64,
                message: format!("entry name is not UTF-8: {e}"),
            })?
            .to_string();
        let ndims = cur.take(1)?[0] as usize;
        let mut shape = Vec::with_capacity(ndims);
        let mut scalar_count: usize = 1;
        for _ in 0..ndims {
            let d = cur.u32()? as usize;
            scalar_count = scalar_count
                .checked_mul(d)
                .ok_or_else(|| cur.err("shape product overflows"))?;
            shape.push(d);
        }
        let raw = cur.take(scalar_count.checked_mul(4).ok_or_else(|| cur.err("value byte count overflows"))?)?;
        let values: Vec<f64> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        let entry_pos = cur.pos;
        let entry = ParamEntry::new(name, shape, values).map_err(|e| Error::Format {
            offset: entry_pos as u64,
            message: e.to_string(),
        })?;
        params.push(entry).map_err(|e| Error::Format {
            offset: entry_pos as u64,
            message: e.to_string(),
        })?;
    }
    if cur.pos != bytes.len() {
        return Err(cur.err("trailing bytes after last entry"));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> ParamSet {
        let mut s = ParamSet::new();
        s.push(ParamEntry::new("g.w0", vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap())
            .unwrap();
        s
    }

    #[test]
    fn empty_set_round_trips() {
        let bytes = serialize_params(&ParamSet::new()).unwrap();
        assert_eq!(bytes.len(), 12); // magic + version + count
        let back = deserialize_params(&bytes).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn single_entry_round_trips_exactly() {
        let s = sample_set();
        let back = deserialize_params(&serialize_params(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn reserialization_is_byte_identical() {
        let s = sample_set();
        let b1 = serialize_params(&s).unwrap();
        let b2 = serialize_params(&deserialize_params(&b1).unwrap()).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn corrupt_header_reports_format_error() {
        let bytes = serialize_params(&sample_set()).unwrap();
        for i in 0..12.min(bytes.len()) {
            let mut corrupted = bytes.clone();
            corrupted[i] ^= 0xff;
            assert!(
                matches!(deserialize_params(&corrupted), Err(Error::Format { .. })),
                "header byte {i} corruption went unnoticed"
            );
        }
    }

    #[test]
    fn truncation_rejected() {
        let bytes = serialize_params(&sample_set()).unwrap();
        assert!(matches!(
            deserialize_params(&bytes[..bytes.len() - 1]),
            Err(Error::Format { .. })
        ));
    }
}
