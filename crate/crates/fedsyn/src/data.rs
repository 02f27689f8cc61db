//! Dataset provisioning: a procedurally generated Gaussian-ring mixture as
//! the desk-scale analog of a 10-label image dataset, plus an IDX reader for
//! real image data.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Samples (rows = examples) paired with integer labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub samples: Array2<f64>,
    pub labels: Vec<u32>,
    pub label_count: usize,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.samples.ncols()
    }
}

/// Centers of a ring mixture: mode k at angle 2*pi*k/modes on the circle.
pub fn ring_centers(modes: usize, radius: f64) -> Vec<[f64; 2]> {
    (0..modes)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / modes as f64;
            [radius * theta.cos(), radius * theta.sin()]
        })
        .collect()
}

/// Generate `n` points from a ring of isotropic Gaussian modes, assigned
/// round-robin so the per-mode histogram is balanced to within one.
pub fn generate_ring(
    rng: &mut ChaCha8Rng,
    n: usize,
    modes: usize,
    radius: f64,
    sigma: f64,
) -> Result<LabeledDataset> {
    if modes < 2 {
        return Err(Error::Config("ring needs at least 2 modes".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::NumericDomain(format!("sigma {sigma} must be > 0")));
    }
    if n < modes {
        return Err(Error::Config(format!(
            "n = {n} smaller than mode count {modes}"
        )));
    }
    let centers = ring_centers(modes, radius);
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut samples = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % modes;
        samples[[i, 0]] = centers[k][0] + normal.sample(rng);
        samples[[i, 1]] = centers[k][1] + normal.sample(rng);
        labels.push(k as u32);
    }
    Ok(LabeledDataset {
        samples,
        labels,
        label_count: modes,
    })
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

struct IdxReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl<'a> IdxReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let start = self.pos as usize;
        let end = start
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| self.err(format!("truncated: need {n} more bytes")))?;
        self.pos = end as u64;
        Ok(&self.bytes[start..end])
    }

    // IDX headers are big-endian.
    fn read_u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Load an IDX image/label file pair (the MNIST on-disk layout). Pixels are
/// scaled by 1/255 into [0, 1] and flattened row-major.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<LabeledDataset> {
    let mut images = Vec::new();
    File::open(images_path)?.read_to_end(&mut images)?;
    let mut labels = Vec::new();
    File::open(labels_path)?.read_to_end(&mut labels)?;
    parse_idx_bytes(&images, &labels)
}

/// Parse an IDX image/label pair already in memory.
pub fn parse_idx_bytes(images: &[u8], labels: &[u8]) -> Result<LabeledDataset> {
    let mut img = IdxReader::new(images);
    let magic = img.read_u32()?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad images magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"),
        });
    }
    let count = img.read_u32()? as usize;
    let rows = img.read_u32()? as usize;
    let cols = img.read_u32()? as usize;
    let dim = rows
        .checked_mul(cols)
        .ok_or_else(|| img.err("image dimensions overflow"))?;
    let pixels = img.take(count.checked_mul(dim).ok_or_else(|| img.err("image count overflows"))?)?;
    let samples = Array2::from_shape_vec(
        (count, dim),
        pixels.iter().map(|&b| b as f64 / 255.0).collect(),
    )
    .expect("length checked above");
    if img.pos < img.bytes.len() as u64 {
        return Err(img.err("trailing bytes after image data"));
    }

    let mut lab = IdxReader::new(labels);
    let magic = lab.read_u32()?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: format!("bad labels magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"),
        });
    }
    let label_count_file = lab.read_u32()? as usize;
    if label_count_file != count {
        return Err(lab.err(format!(
            "label count {label_count_file} does not match image count {count}"
        )));
    }
    let labels: Vec<u32> = lab.take(count)?.iter().map(|&b| b as u32).collect();
    if lab.pos < lab.bytes.len() as u64 {
        return Err(lab.err("trailing bytes after label data"));
    }

    let label_count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0).max(10);
    Ok(LabeledDataset {
        samples,
        labels,
        label_count,
    })
}
