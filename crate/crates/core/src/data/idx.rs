//! IDX files as distributed for MNIST: big-endian headers, unsigned bytes.
//!
//! Images: magic `0x00000803`, then count, rows, cols (u32 each), then
//! `count·rows·cols` pixel bytes. Labels: magic `0x00000801`, count, then
//! `count` label bytes.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::{Dataset, Split};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

const NUM_DIGITS: usize = 10;

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(Error::Truncated {
                path: self.path.to_path_buf(),
                offset: self.bytes.len() as u64,
            });
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn magic(&mut self, expected: u32) -> Result<()> {
        let offset = self.pos as u64;
        let found = self.u32()?;
        if found != expected {
            return Err(Error::BadMagic {
                path: self.path.to_path_buf(),
                offset,
                expected,
                found,
            });
        }
        Ok(())
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Reads an image/label file pair. Pixels are scaled by `1/255`.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let (images_path, labels_path) = (images_path.as_ref(), labels_path.as_ref());
    let image_bytes = read_file(images_path)?;
    let label_bytes = read_file(labels_path)?;

    let mut img = Reader {
        path: images_path,
        bytes: &image_bytes,
        pos: 0,
    };
    img.magic(IDX_IMAGES_MAGIC)?;
    let count = img.u32()? as usize;
    let rows = img.u32()? as usize;
    let cols = img.u32()? as usize;

    let mut lab = Reader {
        path: labels_path,
        bytes: &label_bytes,
        pos: 0,
    };
    lab.magic(IDX_LABELS_MAGIC)?;
    let label_count = lab.u32()? as usize;
    if label_count != count {
        return Err(Error::CountMismatch {
            images_path: images_path.to_path_buf(),
            labels_path: labels_path.to_path_buf(),
            images: count as u64,
            labels: label_count as u64,
        });
    }

    let dim = rows * cols;
    let pixels = img.take(count * dim)?;
    let labels = lab.take(count)?;
    let features = Array2::from_shape_fn((count, dim), |(s, p)| f64::from(pixels[s * dim + p]) / 255.0);
    let labels = labels.iter().map(|&l| usize::from(l)).collect();
    Dataset::new(features, labels, NUM_DIGITS, Split::Train)
}

/// Writes `data` as an IDX pair with `rows × cols` images. Features are
/// quantized to `round(255·x)`.
pub fn write_idx(
    data: &Dataset,
    rows: usize,
    cols: usize,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    if rows * cols != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            got: rows * cols,
        });
    }
    let count = data.len() as u32;
    let mut images = Vec::with_capacity(16 + data.features.len());
    images.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    for v in [count, rows as u32, cols as u32] {
        images.extend_from_slice(&v.to_be_bytes());
    }
    images.extend(data.features.iter().map(|&x| (x.clamp(0.0, 1.0) * 255.0).round() as u8));

    let mut labels = Vec::with_capacity(8 + data.len());
    labels.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    labels.extend_from_slice(&count.to_be_bytes());
    for &l in &data.labels {
        let byte = u8::try_from(l).map_err(|_| {
            Error::InvalidParameter(format!("label {l} does not fit in an IDX byte"))
        })?;
        labels.push(byte);
    }

    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    fs::write(images_path, images).map_err(|e| Error::io(images_path, e))?;
    fs::write(labels_path, labels).map_err(|e| Error::io(labels_path, e))?;
    Ok(())
}
