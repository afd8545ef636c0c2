//! Binary matrix files.
//!
//! Layout: magic "FPCM", version u8 (currently 1), carrier tag u8
//! (0 = prime, 1 = gf2, 2 = rational, 3 = real64), carrier parameter u64
//! little-endian (q, w, or 0), rows u64, cols u64, then the row-major
//! payload. Finite-field entries are u64 residues / bit patterns, real64
//! entries are IEEE-754 doubles, rationals are numerator and denominator
//! in sign-magnitude form (sign u8, length u32, magnitude bytes, all
//! little-endian).

use std::fs;
use std::path::Path;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::DenseMatrix;

const MAGIC: &[u8; 4] = b"FPCM";
const VERSION: u8 = 1;

fn carrier_tag(spec: &FieldSpec) -> (u8, u64) {
    match spec {
        FieldSpec::Prime { q } => (0, *q),
        FieldSpec::Binary { w } => (1, *w as u64),
        FieldSpec::Rational => (2, 0),
        FieldSpec::Real64 => (3, 0),
    }
}

pub fn matrix_to_bytes(m: &DenseMatrix) -> Vec<u8> {
    let (tag, param) = carrier_tag(m.spec());
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(tag);
    out.extend_from_slice(&param.to_le_bytes());
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for i in 0..m.rows() {
        for e in m.row(i) {
            write_element(&mut out, e);
        }
    }
    out
}

fn write_element(out: &mut Vec<u8>, e: &FieldElement) {
    match e.spec() {
        FieldSpec::Prime { .. } | FieldSpec::Binary { .. } => {
            out.extend_from_slice(&e.as_u64().unwrap().to_le_bytes());
        }
        FieldSpec::Rational => {
            let r = e.as_rational().unwrap();
            write_bigint(out, r.numer());
            write_bigint(out, r.denom());
        }
        FieldSpec::Real64 => {
            out.extend_from_slice(&e.as_f64().unwrap().to_le_bytes());
        }
    }
}

fn write_bigint(out: &mut Vec<u8>, n: &BigInt) {
    out.push(u8::from(n.is_negative()));
    let bytes = n.magnitude().to_bytes_le();
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&bytes);
}

pub fn matrix_from_bytes(bytes: &[u8]) -> Result<DenseMatrix> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4)?;
    if magic != MAGIC {
        return Err(Error::MalformedMatrixFile("bad magic".into()));
    }
    let version = cur.u8()?;
    if version != VERSION {
        return Err(Error::MalformedMatrixFile(format!(
            "unsupported version {version}"
        )));
    }
    let tag = cur.u8()?;
    let param = cur.u64()?;
    let spec = match tag {
        0 => FieldSpec::prime(param)
            .map_err(|e| Error::MalformedMatrixFile(format!("bad modulus: {e}")))?,
        1 => FieldSpec::binary(param as u32)
            .map_err(|e| Error::MalformedMatrixFile(format!("bad degree: {e}")))?,
        2 => FieldSpec::Rational,
        3 => FieldSpec::Real64,
        _ => return Err(Error::MalformedMatrixFile(format!("unknown carrier {tag}"))),
    };
    let rows = cur.u64()? as usize;
    let cols = cur.u64()? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::MalformedMatrixFile("empty shape".into()));
    }
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::MalformedMatrixFile("shape overflow".into()))?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        entries.push(read_element(&mut cur, &spec)?);
    }
    if cur.pos != bytes.len() {
        return Err(Error::MalformedMatrixFile("trailing bytes".into()));
    }
    let data: Vec<Vec<FieldElement>> = entries.chunks(cols).map(|chunk| chunk.to_vec()).collect();
    Ok(DenseMatrix::from_rows(data))
}

fn read_element(cur: &mut Cursor<'_>, spec: &FieldSpec) -> Result<FieldElement> {
    match spec {
        FieldSpec::Prime { q } => {
            let v = cur.u64()?;
            if v >= *q {
                return Err(Error::MalformedMatrixFile(format!(
                    "residue {v} out of range for modulus {q}"
                )));
            }
            Ok(spec.from_u64(v))
        }
        FieldSpec::Binary { w } => {
            let v = cur.u64()?;
            if *w < 64 && v >> w != 0 {
                return Err(Error::MalformedMatrixFile(format!(
                    "bit pattern {v:#x} out of range for degree {w}"
                )));
            }
            Ok(spec.from_u64(v))
        }
        FieldSpec::Rational => {
            let numer = read_bigint(cur)?;
            let denom = read_bigint(cur)?;
            if denom.is_zero() {
                return Err(Error::MalformedMatrixFile("zero denominator".into()));
            }
            spec.from_rational(BigRational::new(numer, denom))
        }
        FieldSpec::Real64 => {
            let bits = cur.u64()?;
            spec.from_f64(f64::from_le_bytes(bits.to_le_bytes()))
        }
    }
}

fn read_bigint(cur: &mut Cursor<'_>) -> Result<BigInt> {
    let sign = match cur.u8()? {
        0 => Sign::Plus,
        1 => Sign::Minus,
        b => {
            return Err(Error::MalformedMatrixFile(format!(
                "invalid sign byte {b}"
            )))
        }
    };
    let len = cur.u32()? as usize;
    let bytes = cur.take(len)?;
    Ok(BigInt::from_bytes_le(sign, bytes))
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::MalformedMatrixFile("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    fs::write(path, matrix_to_bytes(m))?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let bytes = fs::read(path)?;
    matrix_from_bytes(&bytes)
}
