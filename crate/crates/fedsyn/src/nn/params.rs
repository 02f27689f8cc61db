use crate::error::{Error, Result};

/// One named, shaped array of parameters. Values are flattened row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

impl ParamEntry {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::Alignment(format!(
                "entry '{name}': shape {shape:?} implies {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Self { name, shape, values })
    }
}

/// Ordered collection of named parameter arrays — the unit exchanged between
/// clients and the aggregation server.
///
/// Two sets are *aligned* when their (name, shape) sequences are identical;
/// all arithmetic here requires alignment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    entries: Vec<ParamEntry>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: ParamEntry) -> Result<()> {
        if self.entries.iter().any(|e| e.name == entry.name) {
            return Err(Error::Alignment(format!(
                "duplicate entry name '{}'",
                entry.name
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[ParamEntry] {
        &self.entries
    }

    /// Mutable entry access; callers must keep names unique and value counts
    /// consistent with the shapes.
    pub fn entries_mut(&mut self) -> &mut [ParamEntry] {
        &mut self.entries
    }

    pub fn get(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total scalar count across all entries.
    pub fn scalar_count(&self) -> usize {
        self.entries.iter().map(|e| e.values.len()).sum()
    }

    pub fn is_aligned_with(&self, other: &ParamSet) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.name == b.name && a.shape == b.shape)
    }

    pub fn check_aligned(&self, other: &ParamSet) -> Result<()> {
        if self.is_aligned_with(other) {
            Ok(())
        } else {
            Err(Error::Alignment(
                "parameter sets have different (name, shape) sequences".into(),
            ))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.values.iter().all(|v| v.is_finite()))
    }

    /// Same structure, all values zero.
    pub fn zeros_like(&self) -> ParamSet {
        ParamSet {
            entries: self
                .entries
                .iter()
                .map(|e| ParamEntry {
                    name: e.name.clone(),
                    shape: e.shape.clone(),
                    values: vec![0.0; e.values.len()],
                })
                .collect(),
        }
    }

    /// Elementwise combination of two aligned sets.
    pub fn zip_with(&self, other: &ParamSet, mut f: impl FnMut(f64, f64) -> f64) -> Result<ParamSet> {
        self.check_aligned(other)?;
        Ok(ParamSet {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| ParamEntry {
                    name: a.name.clone(),
                    shape: a.shape.clone(),
                    values: a
                        .values
                        .iter()
                        .zip(&b.values)
                        .map(|(&x, &y)| f(x, y))
                        .collect(),
                })
                .collect(),
        })
    }

    /// Elementwise map.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ParamSet {
        ParamSet {
            entries: self
                .entries
                .iter()
                .map(|e| ParamEntry {
                    name: e.name.clone(),
                    shape: e.shape.clone(),
                    values: e.values.iter().map(|&x| f(x)).collect(),
                })
                .collect(),
        }
    }

    /// Iterate mutably over every scalar value in entry order.
    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.entries.iter_mut().flat_map(|e| e.values.iter_mut())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().flat_map(|e| e.values.iter().copied())
    }

    /// FNV-1a digest of the 32-bit serialized values; used in round histories
    /// to fingerprint a broadcast model without storing it.
    pub fn digest(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for e in &self.entries {
            eat(e.name.as_bytes());
            for &d in &e.shape {
                eat(&(d as u32).to_le_bytes());
            }
            for &v in &e.values {
                eat(&(v as f32).to_le_bytes());
            }
        }
        hash
    }
}
