//! Exact and partial-pivoted elimination: LU factorization with reusable
//! factors, one-shot solve, rank, and determinant.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{DenseMatrix, OpCount};

/// Relative pivot floor for real64 elimination: a pivot counts as zero when
/// its magnitude drops below this times the row's infinity norm.
const REAL_PIVOT_RTOL: f64 = 1e-12;

/// Packed LU factors of a square matrix with row pivoting.
///
/// The factorization is computed once per recovery subset and then reused
/// for every right-hand side, so pivot inverses are cached: on exact
/// carriers an inversion is a full exponentiation, and back-substitution
/// should pay one multiply per row instead.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    spec: FieldSpec,
    /// L below the diagonal (unit diagonal implicit), U on and above.
    lu: Vec<FieldElement>,
    inv_pivots: Vec<FieldElement>,
    /// perm[r] = source row of step r; row swaps already applied to `lu`.
    perm: Vec<usize>,
    swaps: usize,
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    fn at(&self, i: usize, j: usize) -> &FieldElement {
        &self.lu[i * self.n + j]
    }

    /// Solve M x = b for one right-hand side.
    pub fn solve_vec(&self, b: &[FieldElement], ops: &mut OpCount) -> Vec<FieldElement> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // Forward substitution on the permuted rhs (L has unit diagonal).
        let mut y: Vec<FieldElement> = (0..n).map(|r| b[self.perm[r]].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                if !self.at(i, j).is_zero() {
                    y[i] = y[i].sub(&self.at(i, j).mul(&y[j]));
                    ops.mults += 1;
                    ops.adds += 1;
                }
            }
        }
        // Back substitution against U, dividing by cached pivot inverses.
        for i in (0..n).rev() {
            for j in i + 1..n {
                if !self.at(i, j).is_zero() {
                    y[i] = y[i].sub(&self.at(i, j).mul(&y[j]));
                    ops.mults += 1;
                    ops.adds += 1;
                }
            }
            y[i] = y[i].mul(&self.inv_pivots[i]);
            ops.mults += 1;
        }
        y
    }

    /// Row `idx` of M^-1, obtained by solving M^T w = e_idx against the
    /// same factors (M^T = U^T L^T P).
    pub fn inverse_row(&self, idx: usize, ops: &mut OpCount) -> Vec<FieldElement> {
        assert!(idx < self.n);
        let n = self.n;
        let mut z = vec![self.spec.zero(); n];
        z[idx] = self.spec.one();
        // Forward: U^T z' = e (U^T is lower triangular with pivot diagonal).
        for i in 0..n {
            for j in 0..i {
                if !self.at(j, i).is_zero() && !z[j].is_zero() {
                    z[i] = z[i].sub(&self.at(j, i).mul(&z[j]));
                    ops.mults += 1;
                    ops.adds += 1;
                }
            }
            if !z[i].is_zero() {
                z[i] = z[i].mul(&self.inv_pivots[i]);
                ops.mults += 1;
            }
        }
        // Backward: L^T v = z' (unit diagonal).
        for i in (0..n).rev() {
            for j in i + 1..n {
                if !self.at(j, i).is_zero() && !z[j].is_zero() {
                    z[i] = z[i].sub(&self.at(j, i).mul(&z[j]));
                    ops.mults += 1;
                    ops.adds += 1;
                }
            }
        }
        // Undo the permutation: w[perm[r]] = v[r].
        let mut w = vec![self.spec.zero(); n];
        for r in 0..n {
            w[self.perm[r]] = z[r].clone();
        }
        w
    }

    /// Determinant from the pivot product and swap parity.
    pub fn det(&self) -> FieldElement {
        let mut d = self.spec.one();
        for i in 0..self.n {
            d = d.mul(self.at(i, i));
        }
        if self.swaps % 2 == 1 {
            d = d.neg();
        }
        d
    }
}

/// LU-factor a square matrix. Exact carriers take the first nonzero pivot;
/// real64 uses scaled partial pivoting and reports [`Error::SingularMatrix`]
/// when the best pivot falls below `1e-12` relative to its row norm.
pub fn lu_factor(m: &DenseMatrix, ops: &mut OpCount) -> Result<LuFactors> {
    if m.rows() != m.cols() {
        return Err(Error::ShapeMismatch(format!(
            "LU needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let spec = *m.spec();
    let mut lu: Vec<FieldElement> = Vec::with_capacity(n * n);
    for i in 0..n {
        lu.extend(m.row(i).iter().cloned());
    }
    let real = !spec.is_exact();
    let row_scale: Vec<f64> = if real {
        (0..n)
            .map(|i| {
                m.row(i)
                    .iter()
                    .map(|e| e.pivot_weight())
                    .fold(0.0f64, f64::max)
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0usize;
    let mut inv_pivots = Vec::with_capacity(n);

    for k in 0..n {
        // Pick the pivot row.
        let mut pivot_row = None;
        if real {
            let mut best = -1.0f64;
            for r in k..n {
                let scale = row_scale[perm[r]];
                if scale == 0.0 {
                    continue;
                }
                let w = lu[r * n + k].pivot_weight() / scale;
                if w > best {
                    best = w;
                    pivot_row = Some(r);
                }
            }
            if let Some(r) = pivot_row {
                let scale = row_scale[perm[r]];
                if lu[r * n + k].pivot_weight() < REAL_PIVOT_RTOL * scale {
                    return Err(Error::SingularMatrix);
                }
            }
        } else {
            pivot_row = (k..n).find(|&r| !lu[r * n + k].is_zero());
        }
        let Some(r) = pivot_row else {
            return Err(Error::SingularMatrix);
        };
        if r != k {
            for j in 0..n {
                lu.swap(k * n + j, r * n + j);
            }
            perm.swap(k, r);
            swaps += 1;
        }
        let pivot_inv = lu[k * n + k].inv().map_err(|_| Error::SingularMatrix)?;
        ops.mults += 1;
        for i in k + 1..n {
            if lu[i * n + k].is_zero() {
                continue;
            }
            let factor = lu[i * n + k].mul(&pivot_inv);
            ops.mults += 1;
            for j in k + 1..n {
                if !lu[k * n + j].is_zero() {
                    let delta = factor.mul(&lu[k * n + j]);
                    lu[i * n + j] = lu[i * n + j].sub(&delta);
                    ops.mults += 1;
                    ops.adds += 1;
                }
            }
            lu[i * n + k] = factor;
        }
        inv_pivots.push(pivot_inv);
    }
    Ok(LuFactors {
        n,
        spec,
        lu,
        inv_pivots,
        perm,
        swaps,
    })
}

/// Indices of the lexicographically first `count` linearly independent rows
/// of `m`, or None when the row rank falls short of `count`.
///
/// Real64 rows count as dependent once elimination drops every remaining
/// entry below `1e-12` relative to the row's original infinity norm.
pub fn independent_rows(
    m: &DenseMatrix,
    count: usize,
    ops: &mut OpCount,
) -> Option<Vec<usize>> {
    let cols = m.cols();
    let spec = *m.spec();
    let real = !spec.is_exact();
    // Chosen rows kept in reduced form: (pivot column, row, pivot inverse).
    let mut reduced: Vec<(usize, Vec<FieldElement>, FieldElement)> = Vec::new();
    let mut picked = Vec::new();
    for w in 0..m.rows() {
        if picked.len() == count {
            break;
        }
        let mut row: Vec<FieldElement> = m.row(w).to_vec();
        let floor = if real {
            let norm = row.iter().map(|e| e.pivot_weight()).fold(0.0f64, f64::max);
            REAL_PIVOT_RTOL * norm
        } else {
            0.0
        };
        for (pc, prow, pinv) in &reduced {
            if row[*pc].is_zero() {
                continue;
            }
            let factor = row[*pc].mul(pinv);
            ops.mults += 1;
            for j in 0..cols {
                if !prow[j].is_zero() {
                    row[j] = row[j].sub(&factor.mul(&prow[j]));
                    ops.mults += 1;
                    ops.adds += 1;
                }
            }
            row[*pc] = spec.zero();
        }
        let pivot = if real {
            let mut best = None;
            let mut best_weight = floor;
            for (j, e) in row.iter().enumerate() {
                let weight = e.pivot_weight();
                if weight > best_weight {
                    best_weight = weight;
                    best = Some(j);
                }
            }
            best
        } else {
            row.iter().position(|e| !e.is_zero())
        };
        let Some(pc) = pivot else {
            continue;
        };
        let pivot_inv = row[pc].inv().ok()?;
        ops.mults += 1;
        reduced.push((pc, row, pivot_inv));
        picked.push(w);
    }
    (picked.len() == count).then_some(picked)
}

/// Solve M X = rhs for a block of right-hand-side columns.
pub fn solve(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    if m.spec() != rhs.spec() {
        return Err(Error::MixedField);
    }
    if rhs.rows() != m.rows() {
        return Err(Error::ShapeMismatch(format!(
            "rhs has {} rows, matrix is {}x{}",
            rhs.rows(),
            m.rows(),
            m.cols()
        )));
    }
    let mut ops = OpCount::default();
    let factors = lu_factor(m, &mut ops)?;
    let n = m.rows();
    let mut out = DenseMatrix::zeros(*m.spec(), n, rhs.cols());
    for c in 0..rhs.cols() {
        let col: Vec<FieldElement> = (0..n).map(|r| rhs.get(r, c).clone()).collect();
        let x = factors.solve_vec(&col, &mut ops);
        for r in 0..n {
            out.set(r, c, x[r].clone());
        }
    }
    Ok(out)
}

/// Row-echelon rank over an exact carrier.
pub fn rank(m: &DenseMatrix) -> Result<usize> {
    if !m.spec().is_exact() {
        return Err(Error::UnsupportedCarrier(
            "rank is only defined on exact carriers",
        ));
    }
    let rows = m.rows();
    let cols = m.cols();
    let mut work: Vec<Vec<FieldElement>> = (0..rows).map(|i| m.row(i).to_vec()).collect();
    let mut r = 0usize;
    for c in 0..cols {
        let Some(pivot) = (r..rows).find(|&i| !work[i][c].is_zero()) else {
            continue;
        };
        work.swap(r, pivot);
        let inv = work[r][c].inv().expect("nonzero pivot");
        for i in r + 1..rows {
            if work[i][c].is_zero() {
                continue;
            }
            let factor = work[i][c].mul(&inv);
            for j in c..cols {
                let delta = factor.mul(&work[r][j]);
                work[i][j] = work[i][j].sub(&delta);
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    Ok(r)
}

/// Exact determinant: modular elimination on finite fields, fraction-free
/// Bareiss on rationals (after clearing denominators row by row).
pub fn determinant(m: &DenseMatrix) -> Result<FieldElement> {
    if !m.spec().is_exact() {
        return Err(Error::UnsupportedCarrier(
            "exact determinant is not defined on real64",
        ));
    }
    if m.rows() != m.cols() {
        return Err(Error::ShapeMismatch(format!(
            "determinant needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    match m.spec() {
        FieldSpec::Rational => determinant_bareiss(m),
        _ => {
            let mut ops = OpCount::default();
            match lu_factor(m, &mut ops) {
                Ok(f) => Ok(f.det()),
                Err(Error::SingularMatrix) => Ok(m.spec().zero()),
                Err(e) => Err(e),
            }
        }
    }
}

fn determinant_bareiss(m: &DenseMatrix) -> Result<FieldElement> {
    let n = m.rows();
    let spec = *m.spec();
    if n == 0 {
        return Ok(spec.one());
    }
    // Scale each row to integers, remembering the divisor it contributes.
    let mut b: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    let mut scale = BigInt::one();
    for i in 0..n {
        let mut lcm = BigInt::one();
        for e in m.row(i) {
            let d = e.as_rational().expect("rational carrier").denom();
            lcm = num_integer::lcm(lcm, d.clone());
        }
        let row = m
            .row(i)
            .iter()
            .map(|e| {
                let r = e.as_rational().unwrap();
                // denom divides lcm, so this stays integral.
                r.numer() * (&lcm / r.denom())
            })
            .collect();
        b.push(row);
        scale *= &lcm;
    }

    let mut sign_flip = false;
    let mut denom = BigInt::one();
    for k in 0..n - 1 {
        if b[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !b[r][k].is_zero()) else {
                return spec.from_rational(BigRational::zero());
            };
            b.swap(k, r);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &b[i][j] * &b[k][k] - &b[i][k] * &b[k][j];
                // Bareiss guarantees exact division by the previous pivot.
                b[i][j] = num / &denom;
            }
            b[i][k] = BigInt::zero();
        }
        denom = b[k][k].clone();
    }
    let mut det = b[n - 1][n - 1].clone();
    if sign_flip {
        det = -det;
    }
    spec.from_rational(BigRational::new(det, scale))
}
