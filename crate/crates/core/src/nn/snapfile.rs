//! Binary weight-snapshot files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "QLSNAP1"            7 bytes
//! M                    u64, parameters per snapshot
//! count                u64, number of records
//! count × { iteration: u64, M × f64 }
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::arch::WeightSnapshot;

pub const SNAPSHOT_MAGIC: &[u8; 7] = b"QLSNAP1";
const HEADER_LEN: u64 = 7 + 8 + 8;
const COUNT_OFFSET: u64 = 7 + 8;

/// Destination for snapshots taken during training.
pub trait SnapshotSink {
    fn push(&mut self, snapshot: &WeightSnapshot) -> Result<()>;
}

impl SnapshotSink for Vec<WeightSnapshot> {
    fn push(&mut self, snapshot: &WeightSnapshot) -> Result<()> {
        Vec::push(self, snapshot.clone());
        Ok(())
    }
}

impl<A: SnapshotSink, B: SnapshotSink> SnapshotSink for (A, B) {
    fn push(&mut self, snapshot: &WeightSnapshot) -> Result<()> {
        self.0.push(snapshot)?;
        self.1.push(snapshot)
    }
}

pub struct SnapshotWriter {
    path: PathBuf,
    out: BufWriter<File>,
    m: usize,
    count: u64,
}

impl SnapshotWriter {
    pub fn create(path: impl AsRef<Path>, m: usize) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(&path, e);
        out.write_all(SNAPSHOT_MAGIC).map_err(io)?;
        out.write_all(&(m as u64).to_le_bytes()).map_err(io)?;
        out.write_all(&0u64.to_le_bytes()).map_err(io)?;
        Ok(Self {
            path,
            out,
            m,
            count: 0,
        })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Flushes records and writes the final count into the header.
    pub fn finish(mut self) -> Result<PathBuf> {
        let path = self.path.clone();
        let io = |e| Error::io(&path, e);
        self.out.flush().map_err(io)?;
        let file = self.out.get_mut();
        file.seek(SeekFrom::Start(COUNT_OFFSET)).map_err(io)?;
        file.write_all(&self.count.to_le_bytes()).map_err(io)?;
        file.flush().map_err(io)?;
        Ok(path)
    }
}

impl SnapshotSink for SnapshotWriter {
    fn push(&mut self, snapshot: &WeightSnapshot) -> Result<()> {
        if snapshot.w.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: snapshot.w.len(),
            });
        }
        let path = &self.path;
        let io = |e| Error::io(path, e);
        self.out.write_all(&snapshot.iteration.to_le_bytes()).map_err(io)?;
        for v in &snapshot.w {
            self.out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        self.count += 1;
        Ok(())
    }
}

/// Random-access reader over a snapshot file.
pub struct SnapshotReader {
    path: PathBuf,
    file: BufReader<File>,
    m: usize,
    count: u64,
}

impl SnapshotReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let len = file.metadata().map_err(|e| Error::io(&path, e))?.len();
        let mut file = BufReader::new(file);
        let mut header = [0u8; HEADER_LEN as usize];
        file.read_exact(&mut header).map_err(|_| Error::Truncated {
            path: path.clone(),
            offset: len,
        })?;
        if &header[..7] != SNAPSHOT_MAGIC {
            return Err(Error::BadSnapshotFile {
                path,
                reason: "magic mismatch".into(),
            });
        }
        let m = u64::from_le_bytes(header[7..15].try_into().expect("8 bytes")) as usize;
        let count = u64::from_le_bytes(header[15..23].try_into().expect("8 bytes"));
        let expected = HEADER_LEN + count * Self::record_len(m);
        if len < expected {
            return Err(Error::Truncated { path, offset: len });
        }
        Ok(Self {
            path,
            file,
            m,
            count,
        })
    }

    fn record_len(m: usize) -> u64 {
        8 + 8 * m as u64
    }

    pub fn num_params(&self) -> usize {
        self.m
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn read(&mut self, index: u64) -> Result<WeightSnapshot> {
        if index >= self.count {
            return Err(Error::InvalidParameter(format!(
                "snapshot {index} out of range ({} records)",
                self.count
            )));
        }
        let path = &self.path;
        let io = |e| Error::io(path, e);
        self.file
            .seek(SeekFrom::Start(HEADER_LEN + index * Self::record_len(self.m)))
            .map_err(io)?;
        let mut buf = vec![0u8; Self::record_len(self.m) as usize];
        self.file.read_exact(&mut buf).map_err(io)?;
        let iteration = u64::from_le_bytes(buf[..8].try_into().expect("8 bytes"));
        let w = buf[8..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(WeightSnapshot { w, iteration })
    }

    /// Iteration stamps of every record, without reading the weights.
    pub fn iterations(&mut self) -> Result<Vec<u64>> {
        let path = &self.path;
        let mut out = Vec::with_capacity(self.count as usize);
        for i in 0..self.count {
            self.file
                .seek(SeekFrom::Start(HEADER_LEN + i * Self::record_len(self.m)))
                .map_err(|e| Error::io(path, e))?;
            let mut b = [0u8; 8];
            self.file.read_exact(&mut b).map_err(|e| Error::io(path, e))?;
            out.push(u64::from_le_bytes(b));
        }
        Ok(out)
    }

    pub fn read_all(&mut self) -> Result<Vec<WeightSnapshot>> {
        (0..self.count).map(|i| self.read(i)).collect()
    }
}
