//! File formats: spectral snapshots, CSV tables and checksums.
//!
//! # Snapshot layout (version 1, little endian)
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `SEBMSNAP` |
//! | 4     | format version (u32) |
//! | 4     | modes (u32) |
//! | 4     | record count (u32) |
//! | 4     | output stride in steps (u32) |
//! | 8     | dt (f64) |
//! | 8     | critical temperature `u_c` (f64) |
//! | 32    | SHA-256 of the run configuration |
//! | records | `path (u32)`, `step (u32)`, `t (f64)`, `modes x f64` coefficients of `X = u - u_c` |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::legendre::SpectralField;

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SEBMSNAP";
pub const SNAPSHOT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 * 4 + 8 * 2 + 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub path: u32,
    pub step: u32,
    pub t: f64,
    pub field: SpectralField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub modes: usize,
    pub stride: usize,
    pub dt: f64,
    pub critical_temperature: f64,
    pub config_hash: [u8; 32],
    pub records: Vec<Snapshot>,
}

impl SnapshotFile {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&(self.modes as u32).to_le_bytes())?;
        w.write_all(&(self.records.len() as u32).to_le_bytes())?;
        w.write_all(&(self.stride as u32).to_le_bytes())?;
        w.write_all(&self.dt.to_le_bytes())?;
        w.write_all(&self.critical_temperature.to_le_bytes())?;
        w.write_all(&self.config_hash)?;
        for r in &self.records {
            if r.field.truncation() != self.modes {
                return Err(Error::LengthMismatch { expected: self.modes, got: r.field.truncation() });
            }
            w.write_all(&r.path.to_le_bytes())?;
            w.write_all(&r.step.to_le_bytes())?;
            w.write_all(&r.t.to_le_bytes())?;
            for c in r.field.coeffs() {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut r = BufReader::new(r);
        let mut h = [0u8; HEADER_LEN];
        r.read_exact(&mut h).map_err(|_| Error::Format("snapshot file shorter than its header".into()))?;
        if &h[..8] != SNAPSHOT_MAGIC {
            return Err(Error::Format("not a snapshot file (bad magic)".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(h[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(h[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != SNAPSHOT_VERSION {
            return Err(Error::Format(format!("unsupported snapshot version {version}")));
        }
        let modes = u32_at(12) as usize;
        let count = u32_at(16) as usize;
        let stride = u32_at(20) as usize;
        let dt = f64_at(24);
        let critical_temperature = f64_at(32);
        let config_hash: [u8; 32] = h[40..72].try_into().unwrap();
        let mut records = Vec::with_capacity(count);
        let mut buf = vec![0u8; 16 + 8 * modes];
        for _ in 0..count {
            r.read_exact(&mut buf).map_err(|_| Error::Format("snapshot file truncated".into()))?;
            let path = u32::from_le_bytes(buf[0..4].try_into().unwrap());
            let step = u32::from_le_bytes(buf[4..8].try_into().unwrap());
            let t = f64::from_le_bytes(buf[8..16].try_into().unwrap());
            let coeffs = buf[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            records.push(Snapshot { path, step, t, field: SpectralField::new(coeffs) });
        }
        Ok(SnapshotFile { modes, stride, dt, critical_temperature, config_hash, records })
    }

    pub fn write_path(&self, path: &Path) -> Result<()> {
        self.write_to(File::create(path)?)
    }

    pub fn read_path(path: &Path) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}

/// Lowercase hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = BufReader::new(File::open(path)?);
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Writes a CSV table with a header row.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SnapshotFile {
        SnapshotFile {
            modes: 3,
            stride: 2,
            dt: 0.125,
            critical_temperature: -10.0,
            config_hash: [7u8; 32],
            records: (0..4)
                .map(|i| Snapshot {
                    path: i / 2,
                    step: 2 * (i % 2),
                    t: 0.25 * (i % 2) as f64,
                    field: SpectralField::new(vec![i as f64, -1.5, 1e-300]),
                })
                .collect(),
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 4 * (16 + 24));
        assert_eq!(SnapshotFile::read_from(buf.as_slice()).unwrap(), s);
        assert!(SnapshotFile::read_from(&buf[..buf.len() - 1]).is_err());
        buf[3] = 0;
        assert!(matches!(SnapshotFile::read_from(buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn csv_and_checksum() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, &["a", "b"], vec![vec!["1".to_string(), "x".to_string()]]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "a,b\n1,x\n");
        assert_eq!(
            sha256_file(&p).unwrap(),
            hex::encode(Sha256::digest(b"a,b\n1,x\n"))
        );
    }
}
