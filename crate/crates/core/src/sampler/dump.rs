//! Flat binary sample files: a 40-byte header (`CVLW`, format version, rows, cols, seed,
//! trial as little-endian integers) followed by row-major little-endian `f64` entries.

use std::io::{Read, Write};

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CVLW";
const VERSION: u32 = 1;

pub fn write_sample<W: Write>(out: &mut W, m: MatRef<'_, f64>, seed: u64, trial: u64) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    for v in [m.nrows() as u64, m.ncols() as u64, seed, trial] {
        out.write_all(&v.to_le_bytes())?;
    }
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.write_all(&m[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a sample back as `(matrix, seed, trial)`.
pub fn read_sample<R: Read>(input: &mut R) -> Result<(Mat<f64>, u64, u64)> {
    let io = |e: std::io::Error| Error::Dimension(format!("corrupt sample file: {e}"));
    let mut head = [0u8; 40];
    input.read_exact(&mut head).map_err(io)?;
    if &head[..4] != MAGIC || u32::from_le_bytes(head[4..8].try_into().unwrap()) != VERSION {
        return Err(Error::Dimension("not a sample file".into()));
    }
    let word = |k: usize| u64::from_le_bytes(head[8 + 8 * k..16 + 8 * k].try_into().unwrap());
    let (rows, cols, seed, trial) = (word(0) as usize, word(1) as usize, word(2), word(3));
    let mut buf = vec![0u8; rows * cols * 8];
    input.read_exact(&mut buf).map_err(io)?;
    let at = |i: usize, j: usize| {
        let k = 8 * (i * cols + j);
        f64::from_le_bytes(buf[k..k + 8].try_into().unwrap())
    };
    Ok((Mat::from_fn(rows, cols, at), seed, trial))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = Mat::from_fn(3, 4, |i, j| i as f64 - 0.5 * j as f64);
        let mut bytes = Vec::new();
        write_sample(&mut bytes, m.as_ref(), 42, 7).unwrap();
        assert_eq!(bytes.len(), 40 + 12 * 8);
        let (back, seed, trial) = read_sample(&mut bytes.as_slice()).unwrap();
        assert!(back == m && seed == 42 && trial == 7);
    }
}
