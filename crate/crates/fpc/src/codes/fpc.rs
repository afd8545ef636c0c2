//! Folded-code encoder and decoder.
//!
//! Encoding evaluates f_A and g_A blockwise at each worker's point. Decoding
//! reconstructs the Gram blocks C_{k,s} of A * A^T from the first R worker
//! products by solving small per-entry linear systems whose matrices depend
//! only on the point subset, so each system matrix is factorized once and
//! reused across all entry pairs.
//!
//! Routes:
//! - characteristic != 2: the symmetrized evaluations (i,j)+(j,i) live in
//!   the span of the R-element "full" basis (plain diagonal monomials
//!   x^sigma_C(k,k), the paired off-diagonal terms g(k,s,0,+), and a plus
//!   family basis); the antisymmetrized evaluations live in the smaller
//!   "sum" basis with minus signs. Half-sum/half-difference yields the
//!   off-diagonal blocks; diagonal entries need the full system only.
//! - characteristic = 2: the symmetrized system is solved completely, its
//!   coefficients build the auxiliary polynomial h, and (i,j) evaluations
//!   plus h(alpha) form a polynomial over the full basis whose C rows are
//!   read off directly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::folded::{
    reduced_basis, sigma2, sigma_c, term_poly, Sign, TermIndex, TermPoly,
};
use crate::linalg::{condition_number, independent_rows, partition, DenseMatrix, OpCount};

use super::{
    common_block_dim, eval_matrix_counted, factor_or_singular, pow_counted, recovery_slice,
    recovery_threshold, CodeInstance, DecodeStats, EncodedTask, Scheme, WorkerResult,
};

/// acc * x + next, entrywise over equal-shaped blocks.
fn horner_step(acc: DenseMatrix, x: &FieldElement, next: &DenseMatrix) -> DenseMatrix {
    acc.scale(x)
        .add(next)
        .expect("partition blocks share one shape")
}

/// Encode A into one task per worker: A~ = f_A(alpha), B~ = g_A(alpha).
///
/// f_A places block A_{k,j} at exponent kp + j, a dense run, so a single
/// Horner pass over the flattened grid suffices. g_A places transposed
/// block A_{s,i} at exponent smp + p - 1 - i: an inner Horner per block row
/// and an outer Horner with step alpha^(mp).
pub fn fpc_encode(a: &DenseMatrix, instance: &CodeInstance) -> Result<Vec<EncodedTask>> {
    let params = &instance.params;
    if *a.spec() != params.spec {
        return Err(Error::MixedField);
    }
    let (m, p) = (params.m, params.p);
    let grid = partition(a, m, p)?;
    let transposed: Vec<Vec<DenseMatrix>> = (0..m)
        .map(|s| (0..p).map(|i| grid.block(s, i).transpose()).collect())
        .collect();
    let tasks = instance
        .points
        .par_iter()
        .enumerate()
        .map(|(idx, alpha)| {
            let mut a_tilde = grid.block(m - 1, p - 1).clone();
            for e in (0..m * p - 1).rev() {
                a_tilde = horner_step(a_tilde, alpha, grid.block(e / p, e % p));
            }
            let row_eval = |s: usize| {
                let mut acc = transposed[s][0].clone();
                for block in &transposed[s][1..] {
                    acc = horner_step(acc, alpha, block);
                }
                acc
            };
            let step = alpha.pow((m * p) as u64);
            let mut b_tilde = row_eval(m - 1);
            for s in (0..m - 1).rev() {
                b_tilde = horner_step(b_tilde, &step, &row_eval(s));
            }
            EncodedTask {
                worker_id: idx + 1,
                a_tilde,
                b_tilde,
            }
        })
        .collect();
    Ok(tasks)
}

/// The two linear systems the folded decoder factorizes, fixed by
/// (m, p, field) alone.
pub(crate) struct DecodePlan {
    char2: bool,
    r: usize,
    sum_size: usize,
    /// Whether the decoder factorizes the sum system at all. False for
    /// m = 1 away from characteristic 2 (one symmetric block, recovered
    /// from the full system alone) and when the sum basis is empty.
    use_sum: bool,
    full_polys: Vec<TermPoly>,
    sum_polys: Vec<TermPoly>,
    /// Off-diagonal block pairs (k, s), s < k, in lexicographic order;
    /// pair q occupies row m + q of the full basis and row q of the sum
    /// basis.
    offdiag: Vec<(usize, usize)>,
    /// Lower-monomial exponent of each sum-basis row, the exponents the
    /// auxiliary polynomial h is built on.
    sum_sigma2: Vec<u64>,
}

impl DecodePlan {
    pub(crate) fn new(m: usize, p: usize, spec: &FieldSpec) -> Self {
        let characteristic = spec.characteristic();
        let char2 = characteristic == 2;
        let r = recovery_threshold(Scheme::Fpc, m, p);
        let one = spec.one();

        let mut full_polys = Vec::with_capacity(r);
        for k in 0..m {
            full_polys.push(TermPoly::monomial(sigma_c(k, k, m, p), one.clone()));
        }
        let mut offdiag = Vec::new();
        for k in 1..m {
            for s in 0..k {
                offdiag.push((k, s));
                full_polys.push(term_poly(&TermIndex::new(k, s, 0, Sign::Plus), m, p, spec));
            }
        }
        let gamma_full = reduced_basis(m, p, characteristic, Sign::Plus);
        for idx in &gamma_full.kept {
            full_polys.push(term_poly(idx, m, p, spec));
        }
        if char2 && m % 2 == 0 && p % 2 == 0 {
            // Dropping the special-loop head leaves its lower monomial
            // uncovered by any kept term; the basis regains it as a plain
            // monomial so the auxiliary-augmented polynomial still fits.
            full_polys.push(TermPoly::monomial(
                sigma2(m - 1, m / 2 - 1, p / 2, m, p),
                one.clone(),
            ));
        }
        assert_eq!(
            full_polys.len(),
            r,
            "full decode basis must have exactly R elements"
        );

        let sum_sign = if char2 { Sign::Plus } else { Sign::Minus };
        let mut sum_polys = Vec::new();
        let mut sum_sigma2 = Vec::new();
        for &(k, s) in &offdiag {
            sum_polys.push(term_poly(&TermIndex::new(k, s, 0, sum_sign), m, p, spec));
            sum_sigma2.push(sigma2(k, s, 0, m, p));
        }
        let gamma_sum = reduced_basis(m, p, characteristic, sum_sign);
        for idx in &gamma_sum.kept {
            sum_polys.push(term_poly(idx, m, p, spec));
            sum_sigma2.push(sigma2(idx.k, idx.s, idx.t, m, p));
        }
        let use_sum = if char2 {
            !sum_polys.is_empty()
        } else {
            m >= 2
        };
        let sum_size = sum_polys.len();
        DecodePlan {
            char2,
            r,
            sum_size,
            use_sum,
            full_polys,
            sum_polys,
            offdiag,
            sum_sigma2,
        }
    }

    /// Whether this recovery subset decodes: the R x R full system must
    /// factor and the sum polynomials must reach full column rank over the
    /// subset's points. The decoder picks the sum system's rows the same
    /// way (`independent_rows`), so this check is exact, not heuristic.
    pub(crate) fn subset_invertible(&self, points: &[FieldElement], subset: &[usize]) -> bool {
        let pts: Vec<FieldElement> = subset.iter().map(|&i| points[i].clone()).collect();
        let mut ops = OpCount::default();
        let spec = *pts[0].spec();
        let m_full = eval_matrix_counted(&self.full_polys, &pts, &spec, &mut ops);
        if crate::linalg::lu_factor(&m_full, &mut ops).is_err() {
            return false;
        }
        if self.use_sum {
            let wide = eval_matrix_counted(&self.sum_polys, &pts, &spec, &mut ops);
            if independent_rows(&wide, self.sum_size, &mut ops).is_none() {
                return false;
            }
        }
        true
    }
}

/// The row polynomials of the decoder's two systems (full, sum) for the
/// given shape and field. Exposed for structural inspection and tests.
pub fn decode_bases(m: usize, p: usize, spec: &FieldSpec) -> (Vec<TermPoly>, Vec<TermPoly>) {
    let plan = DecodePlan::new(m, p, spec);
    (plan.full_polys, plan.sum_polys)
}

/// Evaluations of the auxiliary polynomial h at `points_used`, built from
/// the recovered sum-system coefficients: h(x) = sum_r c_r x^(sigma2 of
/// row r). Adding h(alpha) to the raw (i, j) worker evaluations makes them
/// interpolable over the decoder's full basis.
pub fn build_auxiliary(
    sum_coeffs: &[FieldElement],
    instance: &CodeInstance,
    points_used: &[FieldElement],
) -> Result<Vec<FieldElement>> {
    let params = &instance.params;
    let spec = params.spec;
    let plan = DecodePlan::new(params.m, params.p, &spec);
    if sum_coeffs.len() != plan.sum_size {
        return Err(Error::ShapeMismatch(format!(
            "expected {} sum coefficients, got {}",
            plan.sum_size,
            sum_coeffs.len()
        )));
    }
    Ok(points_used
        .iter()
        .map(|pt| {
            let mut h = spec.zero();
            for (c, e) in sum_coeffs.iter().zip(&plan.sum_sigma2) {
                h = h.add(&c.mul(&pt.pow(*e)));
            }
            h
        })
        .collect())
}

fn dot(row: &[FieldElement], y: &[FieldElement], ops: &mut OpCount) -> FieldElement {
    let spec = *row[0].spec();
    let mut acc = spec.zero();
    for (a, b) in row.iter().zip(y) {
        if a.is_zero() {
            continue;
        }
        acc = acc.add(&a.mul(b));
        ops.mults += 1;
        ops.adds += 1;
    }
    acc
}

pub fn fpc_decode(results: &[WorkerResult], instance: &CodeInstance) -> Result<DenseMatrix> {
    fpc_decode_with_stats(results, instance).map(|(c, _)| c)
}

pub fn fpc_decode_with_stats(
    results: &[WorkerResult],
    instance: &CodeInstance,
) -> Result<(DenseMatrix, DecodeStats)> {
    let params = &instance.params;
    if params.scheme != Scheme::Fpc {
        return Err(Error::InvalidParams(format!(
            "fpc_decode called on a {} instance",
            params.scheme
        )));
    }
    let spec = params.spec;
    let (m, p) = (params.m, params.p);
    let plan = DecodePlan::new(m, p, &spec);
    let r = plan.r;
    let (used, pts) = recovery_slice(results, instance, r)?;
    let b = common_block_dim(&used)?;
    let mu = b * m;
    let real = matches!(spec, FieldSpec::Real64);

    let mut ops = OpCount::default();
    let mut conds = Vec::new();
    let m_full = eval_matrix_counted(&plan.full_polys, &pts, &spec, &mut ops);
    let lu_full = factor_or_singular(&m_full, &mut ops)?;
    if real {
        conds.push(condition_number(&m_full)?);
    }
    // The sum system takes the first linearly independent rows of the
    // collocation of the sum polynomials over all R points; a singular
    // fixed prefix would otherwise reject subsets the code can decode.
    let (lu_sum, sum_rows) = if plan.use_sum {
        let wide = eval_matrix_counted(&plan.sum_polys, &pts, &spec, &mut ops);
        let rows = independent_rows(&wide, plan.sum_size, &mut ops)
            .ok_or(Error::SingularRecoverySubset)?;
        let m_sum = DenseMatrix::from_fn(spec, plan.sum_size, plan.sum_size, |i, j| {
            wide.get(rows[i], j).clone()
        });
        let lu = factor_or_singular(&m_sum, &mut ops)?;
        if real {
            conds.push(condition_number(&m_sum)?);
        }
        (Some(lu), rows)
    } else {
        (None, Vec::new())
    };

    // Coefficient-extraction rows of the full system's inverse: row k for
    // the diagonal block C_{k,k}, row m + q for off-diagonal pair q.
    let w_diag: Vec<Vec<FieldElement>> = (0..m)
        .map(|k| lu_full.inverse_row(k, &mut ops))
        .collect();
    let w_off: Vec<Vec<FieldElement>> = (0..plan.offdiag.len())
        .map(|q| lu_full.inverse_row(m + q, &mut ops))
        .collect();

    fn scale_rows(
        rows: &[Vec<FieldElement>],
        c: &FieldElement,
        ops: &mut OpCount,
    ) -> Vec<Vec<FieldElement>> {
        rows.iter()
            .map(|row| {
                row.iter()
                    .map(|x| {
                        ops.mults += 1;
                        x.mul(c)
                    })
                    .collect()
            })
            .collect()
    }

    // Characteristic != 2: the symmetrized right-hand side carries 2*C_kk
    // on diagonal rows and the off-diagonal recovery averages the sum and
    // difference systems, so the 1/2 folds into the extraction rows once.
    let (w_diag_half, w_off_half, w_sum_half) = if !plan.char2 {
        let inv2 = spec.from_u64(2).inv()?;
        let diag_half = scale_rows(&w_diag, &inv2, &mut ops);
        let off_half = scale_rows(&w_off, &inv2, &mut ops);
        let sum_half = match &lu_sum {
            Some(lu) => {
                let raw: Vec<Vec<FieldElement>> = (0..plan.offdiag.len())
                    .map(|q| lu.inverse_row(q, &mut ops))
                    .collect();
                scale_rows(&raw, &inv2, &mut ops)
            }
            None => Vec::new(),
        };
        (diag_half, off_half, sum_half)
    } else {
        (Vec::new(), Vec::new(), Vec::new())
    };

    // Characteristic 2: h evaluations need every point raised to every
    // sum-row exponent; computed once, shared across entry pairs.
    let hpow: Vec<Vec<FieldElement>> = if plan.char2 && plan.use_sum {
        plan.sum_sigma2
            .iter()
            .map(|&e| pts.iter().map(|pt| pow_counted(pt, e, &mut ops)).collect())
            .collect()
    } else {
        Vec::new()
    };

    let mut pairs = Vec::with_capacity(b * (b + 1) / 2);
    for li in 0..b {
        for lj in li..b {
            pairs.push((li, lj));
        }
    }

    // Entry pairs are independent given the shared factorizations.
    let per_pair: Vec<(Vec<(usize, usize, FieldElement)>, OpCount)> = pairs
        .par_iter()
        .map(|&(li, lj)| {
            let mut ops = OpCount::default();
            let mut writes = Vec::new();
            if li == lj {
                let y: Vec<FieldElement> = used
                    .iter()
                    .map(|res| res.product.get(li, li).clone())
                    .collect();
                for (k, row) in w_diag.iter().enumerate() {
                    let v = dot(row, &y, &mut ops);
                    writes.push((k * b + li, k * b + li, v));
                }
                for (q, &(k, s)) in plan.offdiag.iter().enumerate() {
                    let v = dot(&w_off[q], &y, &mut ops);
                    writes.push((k * b + li, s * b + li, v.clone()));
                    writes.push((s * b + li, k * b + li, v));
                }
            } else if !plan.char2 {
                let y_plus: Vec<FieldElement> = used
                    .iter()
                    .map(|res| {
                        ops.adds += 1;
                        res.product.get(li, lj).add(res.product.get(lj, li))
                    })
                    .collect();
                for (k, row) in w_diag_half.iter().enumerate() {
                    let v = dot(row, &y_plus, &mut ops);
                    writes.push((k * b + li, k * b + lj, v.clone()));
                    writes.push((k * b + lj, k * b + li, v));
                }
                if plan.use_sum {
                    let y_minus: Vec<FieldElement> = sum_rows
                        .iter()
                        .map(|&w| {
                            ops.adds += 1;
                            used[w].product.get(li, lj).sub(used[w].product.get(lj, li))
                        })
                        .collect();
                    for (q, &(k, s)) in plan.offdiag.iter().enumerate() {
                        let half_sum = dot(&w_off_half[q], &y_plus, &mut ops);
                        let half_diff = dot(&w_sum_half[q], &y_minus, &mut ops);
                        ops.adds += 2;
                        let vij = half_sum.add(&half_diff);
                        let vji = half_sum.sub(&half_diff);
                        writes.push((k * b + li, s * b + lj, vij.clone()));
                        writes.push((s * b + lj, k * b + li, vij));
                        writes.push((k * b + lj, s * b + li, vji.clone()));
                        writes.push((s * b + li, k * b + lj, vji));
                    }
                }
            } else {
                let c_sum: Vec<FieldElement> = match &lu_sum {
                    Some(lu) => {
                        let y_sum: Vec<FieldElement> = sum_rows
                            .iter()
                            .map(|&w| {
                                ops.adds += 1;
                                used[w].product.get(li, lj).add(used[w].product.get(lj, li))
                            })
                            .collect();
                        lu.solve_vec(&y_sum, &mut ops)
                    }
                    None => Vec::new(),
                };
                let y_full: Vec<FieldElement> = (0..r)
                    .map(|w| {
                        let mut h = spec.zero();
                        for (row, c) in c_sum.iter().enumerate() {
                            if c.is_zero() {
                                continue;
                            }
                            ops.mults += 1;
                            ops.adds += 1;
                            h = h.add(&c.mul(&hpow[row][w]));
                        }
                        ops.adds += 1;
                        used[w].product.get(li, lj).add(&h)
                    })
                    .collect();
                for (k, row) in w_diag.iter().enumerate() {
                    let v = dot(row, &y_full, &mut ops);
                    writes.push((k * b + li, k * b + lj, v.clone()));
                    writes.push((k * b + lj, k * b + li, v));
                }
                for (q, &(k, s)) in plan.offdiag.iter().enumerate() {
                    let vij = dot(&w_off[q], &y_full, &mut ops);
                    ops.adds += 1;
                    let vji = c_sum[q].sub(&vij);
                    writes.push((k * b + li, s * b + lj, vij.clone()));
                    writes.push((s * b + lj, k * b + li, vij));
                    writes.push((k * b + lj, s * b + li, vji.clone()));
                    writes.push((s * b + li, k * b + lj, vji));
                }
            }
            (writes, ops)
        })
        .collect();

    let mut out = DenseMatrix::zeros(spec, mu, mu);
    for (writes, pair_ops) in per_pair {
        ops.absorb(pair_ops);
        for (gi, gj, v) in writes {
            out.set(gi, gj, v);
        }
    }
    Ok((out, DecodeStats { ops, conds }))
}
