//! Raw matrix exchange format.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "MPRB"
//! 4       2     version (u16 LE) = 1
//! 6       8     n_points (u64 LE)
//! 14      8     n_dims (u64 LE)
//! 22      8·N·d values, f64 LE, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::knn::DataMatrix;
use crate::{Error, Result};

pub const MATRIX_MAGIC: [u8; 4] = *b"MPRB";
pub const MATRIX_VERSION: u16 = 1;

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DataMatrix<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix_from(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } if source.kind() != std::io::ErrorKind::UnexpectedEof => {
            Error::io(path, source)
        }
        Error::Io { .. } => Error::InconsistentDims(format!(
            "{}: file shorter than its header declares",
            path.display()
        )),
        other => other,
    })
}

pub fn read_matrix_from<R: Read>(mut r: R) -> Result<DataMatrix<f64>> {
    let mut header = [0u8; 22];
    r.read_exact(&mut header)
        .map_err(|e| Error::io("<matrix>", e))?;
    if header[..4] != MATRIX_MAGIC {
        return Err(Error::InconsistentDims(
            "bad magic, not an MPRB matrix".into(),
        ));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != MATRIX_VERSION {
        return Err(Error::InconsistentDims(format!(
            "unsupported matrix version {version}"
        )));
    }
    let n = u64::from_le_bytes(header[6..14].try_into().unwrap());
    let d = u64::from_le_bytes(header[14..22].try_into().unwrap());
    let count = usize::try_from(n)
        .ok()
        .zip(usize::try_from(d).ok())
        .and_then(|(n, d)| n.checked_mul(d))
        .filter(|c| c.checked_mul(8).is_some())
        .ok_or_else(|| Error::InconsistentDims(format!("{n} x {d} matrix is too large")))?;

    let mut values = Vec::with_capacity(count.min(1 << 28));
    let mut buf = vec![0u8; 8 * 8192];
    let mut remaining = count;
    while remaining > 0 {
        let take = remaining.min(8192);
        let bytes = &mut buf[..take * 8];
        r.read_exact(bytes).map_err(|e| Error::io("<matrix>", e))?;
        values.extend(
            bytes
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap())),
        );
        remaining -= take;
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe).map_err(|e| Error::io("<matrix>", e))? != 0 {
        return Err(Error::InconsistentDims(
            "trailing bytes after matrix payload".into(),
        ));
    }
    DataMatrix::new(n as usize, d as usize, values)
}

pub fn write_matrix(path: impl AsRef<Path>, data: &DataMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_matrix_to(&mut w, data).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_matrix_to<W: Write>(w: &mut W, data: &DataMatrix<f64>) -> std::io::Result<()> {
    w.write_all(&MATRIX_MAGIC)?;
    w.write_all(&MATRIX_VERSION.to_le_bytes())?;
    w.write_all(&(data.n_points() as u64).to_le_bytes())?;
    w.write_all(&(data.n_dims() as u64).to_le_bytes())?;
    for v in data.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}
