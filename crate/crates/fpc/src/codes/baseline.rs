//! Interpolation baselines: MatDot (m = 1) and the entangled-polynomial
//! scheme (any m, shared encoder with the folded code).
//!
//! Both decode by Lagrange coefficient extraction: with R distinct points
//! the degree-(R-1) product polynomial is determined, and any coefficient
//! is a fixed linear combination of the evaluations. The weights come from
//! synthetic division of the node polynomial, so no linear system is ever
//! factorized.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::folded::sigma_c;
use crate::linalg::{partition, DenseMatrix, OpCount};

use super::{
    common_block_dim, recovery_slice, recovery_threshold, CodeInstance, DecodeStats, EncodedTask,
    Scheme, WorkerResult,
};

/// Encode for MatDot: p_A(x) = sum_j A_j x^j and
/// p_B(x) = sum_j A_j^T x^(p-1-j), so the x^(p-1) coefficient of
/// p_A * p_B is sum_j A_j A_j^T = A * A^T.
pub fn matdot_encode(a: &DenseMatrix, instance: &CodeInstance) -> Result<Vec<EncodedTask>> {
    let params = &instance.params;
    if *a.spec() != params.spec {
        return Err(Error::MixedField);
    }
    let p = params.p;
    let grid = partition(a, 1, p)?;
    let transposed: Vec<DenseMatrix> = (0..p).map(|j| grid.block(0, j).transpose()).collect();
    let tasks = instance
        .points
        .par_iter()
        .enumerate()
        .map(|(idx, alpha)| {
            let mut a_tilde = grid.block(0, p - 1).clone();
            for j in (0..p - 1).rev() {
                a_tilde = a_tilde
                    .scale(alpha)
                    .add(grid.block(0, j))
                    .expect("partition blocks share one shape");
            }
            let mut b_tilde = transposed[0].clone();
            for block in &transposed[1..] {
                b_tilde = b_tilde
                    .scale(alpha)
                    .add(block)
                    .expect("partition blocks share one shape");
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

/// Extraction weights: weights[e][w] such that the coefficient of
/// x^exps[e] in the unique interpolant through (alpha_w, y_w) equals
/// sum_w weights[e][w] * y_w. Derived from the node polynomial
/// G(x) = prod_w (x - alpha_w) by synthetic division: the quotient
/// G / (x - alpha_w) is the unnormalized Lagrange basis polynomial at w.
fn coefficient_weights(
    pts: &[FieldElement],
    exps: &[u64],
    ops: &mut OpCount,
) -> Result<Vec<Vec<FieldElement>>> {
    let r = pts.len();
    let spec = *pts[0].spec();
    let one = spec.one();
    let mut g = vec![one.clone()];
    for alpha in pts {
        let mut next = vec![spec.zero(); g.len() + 1];
        for (i, c) in g.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(&c.mul(alpha));
            ops.mults += 1;
            ops.adds += 2;
        }
        g = next;
    }
    let mut weights = vec![Vec::with_capacity(r); exps.len()];
    for (w, alpha) in pts.iter().enumerate() {
        // q = G / (x - alpha), coefficients from the top down.
        let mut q = vec![spec.zero(); r];
        q[r - 1] = g[r].clone();
        for i in (1..r).rev() {
            q[i - 1] = g[i].add(&alpha.mul(&q[i]));
            ops.mults += 1;
            ops.adds += 1;
        }
        let mut denom = one.clone();
        for (v, beta) in pts.iter().enumerate() {
            if v == w {
                continue;
            }
            denom = denom.mul(&alpha.sub(beta));
            ops.mults += 1;
            ops.adds += 1;
        }
        if denom.is_zero() {
            return Err(Error::SingularRecoverySubset);
        }
        let denom_inv = denom.inv()?;
        ops.mults += 1;
        for (e, &exp) in exps.iter().enumerate() {
            weights[e].push(q[exp as usize].mul(&denom_inv));
            ops.mults += 1;
        }
    }
    Ok(weights)
}

pub fn matdot_decode(results: &[WorkerResult], instance: &CodeInstance) -> Result<DenseMatrix> {
    matdot_decode_with_stats(results, instance).map(|(c, _)| c)
}

pub fn matdot_decode_with_stats(
    results: &[WorkerResult],
    instance: &CodeInstance,
) -> Result<(DenseMatrix, DecodeStats)> {
    let params = &instance.params;
    if params.scheme != Scheme::MatDot {
        return Err(Error::InvalidParams(format!(
            "matdot_decode called on a {} instance",
            params.scheme
        )));
    }
    let r = recovery_threshold(Scheme::MatDot, 1, params.p);
    let (used, pts) = recovery_slice(results, instance, r)?;
    let mu = common_block_dim(&used)?;
    let spec = params.spec;
    let mut ops = OpCount::default();
    let weights = coefficient_weights(&pts, &[(params.p - 1) as u64], &mut ops)?;
    let lambda = &weights[0];
    let mut out = DenseMatrix::zeros(spec, mu, mu);
    for i in 0..mu {
        for j in i..mu {
            let mut acc = spec.zero();
            for (w, res) in used.iter().enumerate() {
                acc = acc.add(&lambda[w].mul(res.product.get(i, j)));
                ops.mults += 1;
                ops.adds += 1;
            }
            out.set(i, j, acc.clone());
            out.set(j, i, acc);
        }
    }
    Ok((out, DecodeStats { ops, conds: Vec::new() }))
}

pub fn ep_decode(results: &[WorkerResult], instance: &CodeInstance) -> Result<DenseMatrix> {
    ep_decode_with_stats(results, instance).map(|(c, _)| c)
}

/// Interpolate the full product polynomial and read the Gram block C_{k,s}
/// from the coefficient of x^sigma_C(k,s); the mirror block is its
/// transpose.
pub fn ep_decode_with_stats(
    results: &[WorkerResult],
    instance: &CodeInstance,
) -> Result<(DenseMatrix, DecodeStats)> {
    let params = &instance.params;
    if params.scheme != Scheme::Ep {
        return Err(Error::InvalidParams(format!(
            "ep_decode called on a {} instance",
            params.scheme
        )));
    }
    let (m, p) = (params.m, params.p);
    let r = recovery_threshold(Scheme::Ep, m, p);
    let (used, pts) = recovery_slice(results, instance, r)?;
    let b = common_block_dim(&used)?;
    let spec = params.spec;
    let mut ops = OpCount::default();
    let mut block_ids = Vec::new();
    let mut exps = Vec::new();
    for k in 0..m {
        for s in 0..=k {
            block_ids.push((k, s));
            exps.push(sigma_c(k, s, m, p));
        }
    }
    let weights = coefficient_weights(&pts, &exps, &mut ops)?;
    let mut out = DenseMatrix::zeros(spec, b * m, b * m);
    for (idx, &(k, s)) in block_ids.iter().enumerate() {
        let lambda = &weights[idx];
        for bi in 0..b {
            for bj in 0..b {
                let mut acc = spec.zero();
                for (w, res) in used.iter().enumerate() {
                    acc = acc.add(&lambda[w].mul(res.product.get(bi, bj)));
                    ops.mults += 1;
                    ops.adds += 1;
                }
                if k != s {
                    out.set(s * b + bj, k * b + bi, acc.clone());
                }
                out.set(k * b + bi, s * b + bj, acc);
            }
        }
    }
    Ok((out, DecodeStats { ops, conds: Vec::new() }))
}
