//! On-disk tensor container: the magic string `TNR1`, the order as a
//! little-endian u32, the dimensions as u64s, then the entries as f64s in
//! linearization order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, TenrecError};
use crate::tensor::DenseTensor;

const MAGIC: &[u8; 4] = b"TNR1";

pub fn write_tensor<W: Write>(mut out: W, x: &DenseTensor) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(x.order() as u32).to_le_bytes())?;
    for &dim in x.shape() {
        out.write_all(&(dim as u64).to_le_bytes())?;
    }
    for &v in x.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_tensor<R: Read>(mut input: R) -> Result<DenseTensor> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(TenrecError::BadContainer(format!(
            "bad magic {:?}, expected \"TNR1\"",
            magic
        )));
    }
    let mut buf4 = [0u8; 4];
    input.read_exact(&mut buf4)?;
    let order = u32::from_le_bytes(buf4) as usize;
    if order < 2 || order > 64 {
        return Err(TenrecError::BadContainer(format!("implausible order {order}")));
    }
    let mut shape = Vec::with_capacity(order);
    let mut buf8 = [0u8; 8];
    for _ in 0..order {
        input.read_exact(&mut buf8)?;
        shape.push(u64::from_le_bytes(buf8) as usize);
    }
    let total: usize = shape.iter().product();
    let mut data = Vec::with_capacity(total);
    for _ in 0..total {
        input.read_exact(&mut buf8)?;
        data.push(f64::from_le_bytes(buf8));
    }
    // must be at end of stream
    if input.read(&mut buf8)? != 0 {
        return Err(TenrecError::BadContainer("trailing bytes after data".into()));
    }
    DenseTensor::new(shape, data)
}

pub fn write_tensor_file<P: AsRef<Path>>(path: P, x: &DenseTensor) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_tensor(&mut w, x)?;
    w.flush()?;
    Ok(())
}

pub fn read_tensor_file<P: AsRef<Path>>(path: P) -> Result<DenseTensor> {
    read_tensor(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_bits() {
        let x = DenseTensor::new(
            vec![3, 2, 2],
            vec![
                1.0,
                -2.5,
                f64::MIN_POSITIVE,
                0.1 + 0.2,
                1e300,
                -0.0,
                3.7,
                0.0,
                9.9,
                -1e-300,
                2.0,
                5.5,
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_tensor(&mut buf, &x).unwrap();
        assert_eq!(&buf[0..4], b"TNR1");
        let back = read_tensor(buf.as_slice()).unwrap();
        assert_eq!(back.shape(), x.shape());
        for (a, b) in back.data().iter().zip(x.data()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let x = DenseTensor::zeros(&[2, 2]).unwrap();
        let mut buf = Vec::new();
        write_tensor(&mut buf, &x).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            read_tensor(bad.as_slice()),
            Err(TenrecError::BadContainer(_))
        ));

        let truncated = &buf[..buf.len() - 4];
        assert!(read_tensor(truncated).is_err());

        let mut trailing = buf.clone();
        trailing.push(0);
        assert!(matches!(
            read_tensor(trailing.as_slice()),
            Err(TenrecError::BadContainer(_))
        ));
    }
}
