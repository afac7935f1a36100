//! Binary container for block operators.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic   8 bytes   "SPHDOP01"
//! lmax    u64
//! then for l = 0 ..= lmax:
//!   kind  u8        0 = diagonal, 1 = dense
//!   data  f64 × n   n = 2l+1 (diagonal) or (2l+1)² in row-major order (dense)
//! ```
//!
//! Values are stored bit for bit, so a round trip is exact.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use sphdeconv_core::{Block, BlockOperator};

pub const MAGIC: &[u8; 8] = b"SPHDOP01";

/// Refuses headers that would allocate absurd amounts of memory.
const MAX_LMAX: u64 = 1 << 14;

#[derive(Debug, thiserror::Error)]
pub enum OpFileError {
    #[error("not an operator file (bad magic)")]
    BadMagic,
    #[error("unknown block kind {kind} at degree {degree}")]
    BadKind { degree: usize, kind: u8 },
    #[error("lmax {0} is too large")]
    TooLarge(u64),
    #[error("unexpected data after the last block")]
    TrailingData,
    #[error(transparent)]
    Invalid(#[from] sphdeconv_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_operator<W: Write>(mut out: W, op: &BlockOperator) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(op.lmax() as u64).to_le_bytes())?;
    for block in op.blocks() {
        match block {
            Block::Diagonal(d) => {
                out.write_all(&[0])?;
                for v in d {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
            Block::Dense(m) => {
                out.write_all(&[1])?;
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        out.write_all(&m[(i, j)].to_le_bytes())?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn read_f64s<R: Read>(input: &mut R, n: usize) -> std::io::Result<Vec<f64>> {
    let mut buf = vec![0u8; 8 * n];
    input.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn read_operator<R: Read>(mut input: R) -> Result<BlockOperator, OpFileError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(OpFileError::BadMagic);
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let lmax = u64::from_le_bytes(word);
    if lmax > MAX_LMAX {
        return Err(OpFileError::TooLarge(lmax));
    }
    let mut blocks = Vec::with_capacity(lmax as usize + 1);
    for l in 0..=lmax as usize {
        let n = 2 * l + 1;
        let mut kind = [0u8];
        input.read_exact(&mut kind)?;
        blocks.push(match kind[0] {
            0 => Block::Diagonal(read_f64s(&mut input, n)?),
            1 => Block::Dense(DMatrix::from_row_slice(n, n, &read_f64s(&mut input, n * n)?)),
            k => return Err(OpFileError::BadKind { degree: l, kind: k }),
        });
    }
    if input.read(&mut [0u8])? != 0 {
        return Err(OpFileError::TrailingData);
    }
    Ok(BlockOperator::new(blocks)?)
}
