//! Dense matrices over any [`FieldSpec`] carrier, block partitioning, and
//! the exact/float linear algebra used by the decoders.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

mod io;
mod solve;
mod svd;

pub use io::{matrix_from_bytes, matrix_to_bytes, read_matrix, write_matrix};
pub use solve::{determinant, independent_rows, lu_factor, rank, solve, LuFactors};
pub use svd::{condition_number, singular_values};

/// Multiplication and addition tallies for the decode cost model. Field
/// divisions count as multiplies, subtractions as adds.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct OpCount {
    pub mults: u64,
    pub adds: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.mults + self.adds
    }

    pub fn absorb(&mut self, other: OpCount) {
        self.mults += other.mults;
        self.adds += other.adds;
    }
}

/// Row-major dense matrix; every entry shares one field spec.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    spec: FieldSpec,
    entries: Vec<FieldElement>,
}

impl DenseMatrix {
    pub fn zeros(spec: FieldSpec, rows: usize, cols: usize) -> Self {
        let entries = vec![spec.zero(); rows * cols];
        DenseMatrix {
            rows,
            cols,
            spec,
            entries,
        }
    }

    pub fn identity(spec: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.set(i, i, spec.one());
        }
        m
    }

    /// Build from a generator over (row, col).
    pub fn from_fn(
        spec: FieldSpec,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElement,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        DenseMatrix {
            rows,
            cols,
            spec,
            entries,
        }
    }

    /// # Panics
    /// Panics on ragged rows, empty input, or mixed specs.
    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty(), "empty matrix");
        let cols = rows[0].len();
        let spec = *rows[0][0].spec();
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for row in &rows {
            assert_eq!(row.len(), cols, "ragged rows");
            for e in row {
                assert_eq!(*e.spec(), spec, "mixed specs in matrix literal");
                entries.push(e.clone());
            }
        }
        DenseMatrix {
            rows: rows.len(),
            cols,
            spec,
            entries,
        }
    }

    /// Convenience for tests and examples: embed signed machine integers.
    pub fn from_i64_rows(spec: FieldSpec, rows: &[&[i64]]) -> Self {
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&n| spec.from_i64(n)).collect())
            .collect();
        Self::from_rows(data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        debug_assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        debug_assert!(i < self.rows && j < self.cols);
        debug_assert_eq!(*v.spec(), self.spec);
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.spec, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.spec != rhs.spec {
            return Err(Error::MixedField);
        }
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self::from_fn(self.spec, self.rows, self.cols, |i, j| {
            self.get(i, j).add(rhs.get(i, j))
        }))
    }

    pub fn scale(&self, c: &FieldElement) -> Self {
        Self::from_fn(self.spec, self.rows, self.cols, |i, j| {
            self.get(i, j).mul(c)
        })
    }

    pub fn is_symmetric(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                if self.get(i, j) != self.get(j, i) {
                    return false;
                }
            }
        }
        true
    }

    /// Entrywise comparison with relative tolerance on real64, exact
    /// equality elsewhere.
    pub fn approx_eq(&self, rhs: &Self, rel_tol: f64) -> bool {
        self.rows == rhs.rows
            && self.cols == rhs.cols
            && self
                .entries
                .iter()
                .zip(&rhs.entries)
                .all(|(a, b)| a.approx_eq(b, rel_tol))
    }

    /// Append zero columns on the right. A * A^T is unchanged by this, which
    /// is how callers make a column count divisible by p.
    pub fn pad_cols(&self, new_cols: usize) -> Self {
        assert!(new_cols >= self.cols);
        Self::from_fn(self.spec, self.rows, new_cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                self.spec.zero()
            }
        })
    }
}

/// An m x p grid of equal-sized blocks cut from one matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    m: usize,
    p: usize,
    block_rows: usize,
    block_cols: usize,
    blocks: Vec<DenseMatrix>,
}

impl BlockGrid {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    pub fn block(&self, k: usize, j: usize) -> &DenseMatrix {
        debug_assert!(k < self.m && j < self.p);
        &self.blocks[k * self.p + j]
    }
}

/// Cut A into an m x p grid of contiguous equal blocks.
pub fn partition(a: &DenseMatrix, m: usize, p: usize) -> Result<BlockGrid> {
    if m == 0 || p == 0 || a.rows % m != 0 || a.cols % p != 0 {
        return Err(Error::IndivisibleShape {
            rows: a.rows,
            cols: a.cols,
            m,
            p,
        });
    }
    let block_rows = a.rows / m;
    let block_cols = a.cols / p;
    let mut blocks = Vec::with_capacity(m * p);
    for k in 0..m {
        for j in 0..p {
            blocks.push(DenseMatrix::from_fn(
                a.spec,
                block_rows,
                block_cols,
                |r, c| a.get(k * block_rows + r, j * block_cols + c).clone(),
            ));
        }
    }
    Ok(BlockGrid {
        m,
        p,
        block_rows,
        block_cols,
        blocks,
    })
}

/// Inverse of [`partition`]: paste the blocks back together.
pub fn assemble(grid: &BlockGrid) -> DenseMatrix {
    let spec = *grid.blocks[0].spec();
    let rows = grid.m * grid.block_rows;
    let cols = grid.p * grid.block_cols;
    DenseMatrix::from_fn(spec, rows, cols, |i, j| {
        grid.block(i / grid.block_rows, j / grid.block_cols)
            .get(i % grid.block_rows, j % grid.block_cols)
            .clone()
    })
}

/// Classical cubic product with a row-accumulation inner loop.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.spec != b.spec {
        return Err(Error::MixedField);
    }
    if a.cols != b.rows {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = DenseMatrix::zeros(a.spec, a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.get(i, k);
            if aik.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let cur = out.get(i, j).add(&aik.mul(b.get(k, j)));
                out.set(i, j, cur);
            }
        }
    }
    Ok(out)
}
