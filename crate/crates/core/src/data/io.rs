//! GTEN v1: `b"GTEN"`, version u8 = 1, dtype u8 = 1 (f64), order u8,
//! reserved u8 = 0, `order` little-endian u64 dims, then the column-major
//! little-endian f64 payload.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::tensor::DenseTensor;

const MAGIC: &[u8; 4] = b"GTEN";
const VERSION: u8 = 1;
const DTYPE_F64: u8 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unsupported dtype {0}")]
    BadDtype(u8),
    #[error("order-0 header")]
    ZeroOrder,
    #[error("truncated {section}: expected {expected} bytes, got {got}")]
    Truncated {
        section: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid tensor: {0}")]
    Invalid(#[from] crate::error::Error),
}

fn read_exact_or_truncated<R: Read>(r: &mut R, buf: &mut [u8], section: &'static str) -> Result<(), FormatError> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) => {
                return Err(FormatError::Truncated {
                    section,
                    expected: buf.len(),
                    got,
                })
            }
            Ok(n) => got += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

pub fn write_tensor_to<W: Write>(w: &mut W, x: &DenseTensor) -> Result<(), FormatError> {
    let order = u8::try_from(x.order())
        .map_err(|_| crate::error::Error::InvalidDims(format!("order {} exceeds 255", x.order())))?;
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION, DTYPE_F64, order, 0])?;
    for &n in x.dims() {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &v in x.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor_from<R: Read>(r: &mut R) -> Result<DenseTensor, FormatError> {
    let mut head = [0u8; 8];
    read_exact_or_truncated(r, &mut head, "header")?;
    let magic = [head[0], head[1], head[2], head[3]];
    if &magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    if head[4] != VERSION {
        return Err(FormatError::BadVersion(head[4]));
    }
    if head[5] != DTYPE_F64 {
        return Err(FormatError::BadDtype(head[5]));
    }
    let d = head[6] as usize;
    if d == 0 {
        return Err(FormatError::ZeroOrder);
    }
    let mut dim_bytes = vec![0u8; 8 * d];
    read_exact_or_truncated(r, &mut dim_bytes, "dims")?;
    let dims: Vec<usize> = dim_bytes
        .chunks_exact(8)
        .map(|c| u64::from_le_bytes(c.try_into().unwrap()) as usize)
        .collect();
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .ok_or_else(|| crate::error::Error::InvalidDims(format!("{dims:?} overflows")))?;
    if n == 0 {
        return Err(crate::error::Error::InvalidDims(format!("{dims:?} has a zero extent")).into());
    }
    let mut payload = vec![0u8; 8 * n];
    read_exact_or_truncated(r, &mut payload, "payload")?;
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DenseTensor::new(dims, data)?)
}

pub fn write_tensor(path: impl AsRef<Path>, x: &DenseTensor) -> Result<(), FormatError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor_to(&mut w, x)?;
    w.flush()?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor, FormatError> {
    read_tensor_from(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn bytes_of(x: &DenseTensor) -> Vec<u8> {
        let mut buf = Vec::new();
        write_tensor_to(&mut buf, x).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = SeededRng::new(3);
        let x = rng.normal_tensor(&[4, 3, 2, 2]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.gten");
        write_tensor(&p, &x).unwrap();
        let y = read_tensor(&p).unwrap();
        assert_eq!(y.dims(), x.dims());
        for (a, b) in x.data().iter().zip(y.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn header_errors_are_distinct() {
        let x = DenseTensor::filled(&[2, 2], 1.5).unwrap();
        let good = bytes_of(&x);

        let mut b = good.clone();
        b[0] = b'X';
        assert!(matches!(read_tensor_from(&mut b.as_slice()), Err(FormatError::BadMagic(_))));
        let mut b = good.clone();
        b[4] = 2;
        assert!(matches!(read_tensor_from(&mut b.as_slice()), Err(FormatError::BadVersion(2))));
        let mut b = good.clone();
        b[5] = 7;
        assert!(matches!(read_tensor_from(&mut b.as_slice()), Err(FormatError::BadDtype(7))));
        let mut b = good.clone();
        b[6] = 0;
        assert!(matches!(read_tensor_from(&mut b.as_slice()), Err(FormatError::ZeroOrder)));
        let b = &good[..good.len() - 3];
        assert!(matches!(
            read_tensor_from(&mut &b[..]),
            Err(FormatError::Truncated { section: "payload", .. })
        ));
        assert!(matches!(
            read_tensor_from(&mut &good[..5]),
            Err(FormatError::Truncated { section: "header", .. })
        ));
    }
}
