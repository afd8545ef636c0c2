//! Dense linear algebra checked against cofactor, elimination, and Jacobi
//! oracles, plus the binary matrix format.

mod common;

use fpc::error::Error;
use fpc::field::{FieldElement, FieldSpec};
use fpc::linalg::{
    condition_number, determinant, independent_rows, lu_factor, matmul, matrix_from_bytes,
    matrix_to_bytes, partition, rank, singular_values, solve, DenseMatrix, OpCount,
};
use proptest::prelude::*;

fn specs_exact() -> [FieldSpec; 3] {
    [
        FieldSpec::prime(101).unwrap(),
        FieldSpec::binary(8).unwrap(),
        FieldSpec::rational(),
    ]
}

#[test]
fn matmul_matches_integer_oracle() {
    // Products of small integers stay far below i64 range, so the plain
    // integer product embeds exactly into every carrier.
    let a_int: Vec<Vec<i64>> = (0..4)
        .map(|i| (0..5).map(|j| (7 * i + 3 * j) as i64 - 9).collect())
        .collect();
    let b_int: Vec<Vec<i64>> = (0..5)
        .map(|i| (0..3).map(|j| (5 * i) as i64 - 2 * j as i64).collect())
        .collect();
    let mut c_int = vec![vec![0i64; 3]; 4];
    for i in 0..4 {
        for j in 0..3 {
            for k in 0..5 {
                c_int[i][j] += a_int[i][k] * b_int[k][j];
            }
        }
    }
    for spec in [FieldSpec::prime(101).unwrap(), FieldSpec::rational()] {
        let a = DenseMatrix::from_fn(spec, 4, 5, |i, j| spec.from_i64(a_int[i][j]));
        let b = DenseMatrix::from_fn(spec, 5, 3, |i, j| spec.from_i64(b_int[i][j]));
        let c = DenseMatrix::from_fn(spec, 4, 3, |i, j| spec.from_i64(c_int[i][j]));
        assert_eq!(matmul(&a, &b).unwrap(), c);
    }
}

#[test]
fn matmul_rejects_bad_shapes_and_mixed_fields() {
    let spec = FieldSpec::prime(101).unwrap();
    let a = DenseMatrix::zeros(spec, 2, 3);
    let b = DenseMatrix::zeros(spec, 2, 3);
    assert!(matches!(matmul(&a, &b), Err(Error::ShapeMismatch(_))));
    let c = DenseMatrix::zeros(FieldSpec::binary(8).unwrap(), 3, 2);
    assert!(matches!(matmul(&a, &c), Err(Error::MixedField)));
}

#[test]
fn determinant_matches_cofactor_oracle() {
    for spec in specs_exact() {
        for n in 1..=5usize {
            for seed in 0..6u64 {
                let m = common::random_matrix(spec, n, n, 1000 * n as u64 + seed);
                assert_eq!(
                    determinant(&m).unwrap(),
                    common::det_cofactor(&m),
                    "{spec} n={n} seed={seed}"
                );
            }
        }
    }
}

#[test]
fn lu_solve_reproduces_right_hand_sides() {
    for spec in specs_exact() {
        for seed in 0..8u64 {
            let n = 4 + (seed as usize % 3);
            let m = common::random_matrix(spec, n, n, 31 * seed + 1);
            if common::det_cofactor(&m).is_zero() {
                continue;
            }
            let b = common::random_matrix(spec, n, 2, 77 * seed + 5);
            let x = solve(&m, &b).unwrap();
            assert_eq!(common::matmul_oracle(&m, &x), b, "{spec} seed={seed}");
        }
    }
}

/// inverse_row(i) is the i-th row of M^-1: dotted against column j of M it
/// gives the Kronecker delta.
#[test]
fn inverse_row_extracts_rows_of_the_inverse() {
    let spec = FieldSpec::prime(101).unwrap();
    let m = common::random_matrix(spec, 5, 5, 42);
    assert!(!common::det_cofactor(&m).is_zero());
    let mut ops = OpCount::default();
    let lu = lu_factor(&m, &mut ops).unwrap();
    for i in 0..5 {
        let w = lu.inverse_row(i, &mut ops);
        for j in 0..5 {
            let mut dot = spec.zero();
            for (k, wk) in w.iter().enumerate() {
                dot = dot.add(&wk.mul(m.get(k, j)));
            }
            let expect = if i == j { spec.one() } else { spec.zero() };
            assert_eq!(dot, expect, "row {i} column {j}");
        }
    }
}

#[test]
fn singular_systems_are_reported() {
    for spec in specs_exact() {
        let m = DenseMatrix::from_fn(spec, 3, 3, |i, _| spec.from_u64(i as u64 + 1));
        let mut ops = OpCount::default();
        assert!(matches!(lu_factor(&m, &mut ops), Err(Error::SingularMatrix)));
        let b = DenseMatrix::zeros(spec, 3, 1);
        assert!(matches!(solve(&m, &b), Err(Error::SingularMatrix)));
        assert!(determinant(&m).unwrap().is_zero());
    }
}

proptest! {
    /// Planting r independent rows and filling the rest with their random
    /// combinations yields rank exactly r.
    #[test]
    fn rank_of_planted_combinations(r in 1usize..4, extra in 0usize..3, seed in 0u64..500) {
        let spec = FieldSpec::prime(101).unwrap();
        let cols = r + 2;
        let basis = common::random_matrix(spec, r, cols, seed);
        prop_assume!(rank_oracle_prime(&basis) == r);
        let mut rows: Vec<Vec<FieldElement>> = (0..r).map(|i| basis.row(i).to_vec()).collect();
        let coeffs = common::random_matrix(spec, extra + 1, r, seed ^ 0xabcd);
        for e in 0..extra {
            let mut combo = vec![spec.zero(); cols];
            for (i, c) in (0..r).map(|i| (i, coeffs.get(e, i))) {
                for (j, slot) in combo.iter_mut().enumerate() {
                    *slot = slot.add(&c.mul(basis.get(i, j)));
                }
            }
            rows.push(combo);
        }
        let m = DenseMatrix::from_rows(rows);
        prop_assert_eq!(rank(&m).unwrap(), r);
    }

    #[test]
    fn transpose_is_an_involution(rows in 1usize..5, cols in 1usize..5, seed: u64) {
        let spec = FieldSpec::binary(8).unwrap();
        let m = common::random_matrix(spec, rows, cols, seed);
        prop_assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn matrix_bytes_round_trip(rows in 1usize..5, cols in 1usize..5, seed: u64, which in 0usize..4) {
        let spec = [
            FieldSpec::prime((1 << 31) - 1).unwrap(),
            FieldSpec::binary(8).unwrap(),
            FieldSpec::rational(),
            FieldSpec::real64(),
        ][which];
        let m = common::random_matrix(spec, rows, cols, seed);
        let bytes = matrix_to_bytes(&m);
        prop_assert_eq!(matrix_from_bytes(&bytes).unwrap(), m);
    }
}

/// Independent rank oracle over F_101: forward elimination on u64 residues.
fn rank_oracle_prime(m: &DenseMatrix) -> usize {
    let q = 101u64;
    let mut rows: Vec<Vec<u64>> = (0..m.rows())
        .map(|i| m.row(i).iter().map(|e| e.as_u64().unwrap()).collect())
        .collect();
    let mut r = 0;
    for col in 0..m.cols() {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = common::mod_inv(rows[r][col], q).unwrap();
        for i in r + 1..rows.len() {
            let factor = common::mod_mul(rows[i][col], inv, q);
            for j in col..m.cols() {
                let sub = common::mod_mul(factor, rows[r][j], q);
                rows[i][j] = common::mod_sub(rows[i][j], sub, q);
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// The chosen rows must be the greedy-first independent set: every selected
/// row is independent of its predecessors and every skipped row is a
/// combination of the selections before it.
#[test]
fn independent_rows_picks_the_lexicographically_first_basis() {
    let spec = FieldSpec::prime(101).unwrap();
    for seed in 0..40u64 {
        let tall = common::random_matrix(spec, 8, 3, seed);
        // Duplicate some rows to force skips.
        let mut rows: Vec<Vec<FieldElement>> = Vec::new();
        for i in 0..8 {
            rows.push(tall.row(i).to_vec());
            if i % 3 == 0 {
                rows.push(tall.row(i).to_vec());
            }
        }
        let m = DenseMatrix::from_rows(rows);
        let total_rank = rank_oracle_prime(&m);
        let mut ops = OpCount::default();
        match independent_rows(&m, 3, &mut ops) {
            Some(chosen) => {
                assert_eq!(total_rank, 3);
                assert_eq!(chosen.len(), 3);
                let mut greedy = Vec::new();
                for i in 0..m.rows() {
                    let mut attempt = greedy.clone();
                    attempt.push(i);
                    let sub = DenseMatrix::from_rows(
                        attempt.iter().map(|&r| m.row(r).to_vec()).collect(),
                    );
                    if rank_oracle_prime(&sub) == attempt.len() {
                        greedy = attempt;
                    }
                    if greedy.len() == 3 {
                        break;
                    }
                }
                assert_eq!(chosen, greedy, "seed {seed}");
            }
            None => assert!(total_rank < 3, "seed {seed}"),
        }
    }
}

#[test]
fn independent_rows_detects_rank_deficiency() {
    let spec = FieldSpec::prime(101).unwrap();
    let m = DenseMatrix::from_fn(spec, 4, 3, |i, j| spec.from_u64((i + j) as u64));
    // Rows are arithmetic progressions, rank 2.
    assert_eq!(rank(&m).unwrap(), 2);
    let mut ops = OpCount::default();
    assert!(independent_rows(&m, 2, &mut ops).is_some());
    assert!(independent_rows(&m, 3, &mut ops).is_none());
}

#[test]
fn pad_cols_preserves_the_gram_matrix() {
    for spec in specs_exact() {
        let a = common::random_matrix(spec, 4, 7, 11);
        let padded = a.pad_cols(9);
        assert_eq!(padded.rows(), 4);
        assert_eq!(padded.cols(), 9);
        assert_eq!(common::aat_oracle(&a), common::aat_oracle(&padded));
    }
}

#[test]
fn partition_blocks_match_index_arithmetic() {
    let spec = FieldSpec::prime((1 << 31) - 1).unwrap();
    let a = common::random_matrix(spec, 6, 8, 3);
    let grid = partition(&a, 3, 2).unwrap();
    assert_eq!(grid.block_rows(), 2);
    assert_eq!(grid.block_cols(), 4);
    for k in 0..3 {
        for j in 0..2 {
            let block = grid.block(k, j);
            for r in 0..2 {
                for c in 0..4 {
                    assert_eq!(block.get(r, c), a.get(k * 2 + r, j * 4 + c));
                }
            }
        }
    }
    assert!(matches!(
        partition(&a, 4, 2),
        Err(Error::IndivisibleShape { rows: 6, cols: 8, m: 4, p: 2 })
    ));
}

#[test]
fn malformed_matrix_bytes_are_rejected() {
    let spec = FieldSpec::prime(101).unwrap();
    let good = matrix_to_bytes(&common::random_matrix(spec, 2, 2, 0));

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    assert!(matches!(
        matrix_from_bytes(&bad_magic),
        Err(Error::MalformedMatrixFile(_))
    ));

    let truncated = &good[..good.len() - 3];
    assert!(matches!(
        matrix_from_bytes(truncated),
        Err(Error::MalformedMatrixFile(_))
    ));

    let mut trailing = good.clone();
    trailing.push(0);
    assert!(matches!(
        matrix_from_bytes(&trailing),
        Err(Error::MalformedMatrixFile(_))
    ));

    // Residue >= q in the payload.
    let mut out_of_range = good;
    let len = out_of_range.len();
    out_of_range[len - 8..].copy_from_slice(&200u64.to_le_bytes());
    assert!(matches!(
        matrix_from_bytes(&out_of_range),
        Err(Error::MalformedMatrixFile(_))
    ));
}

#[test]
fn big_rationals_survive_the_byte_format() {
    let spec = FieldSpec::rational();
    let huge = spec.from_u64(u64::MAX).mul(&spec.from_u64(u64::MAX));
    let tiny = spec.one().div(&huge).unwrap();
    let m = DenseMatrix::from_rows(vec![vec![huge.neg(), tiny]]);
    let bytes = matrix_to_bytes(&m);
    assert_eq!(matrix_from_bytes(&bytes).unwrap(), m);
}

#[test]
fn condition_number_matches_jacobi_oracle() {
    let spec = FieldSpec::real64();
    for seed in 0..10u64 {
        let n = 3 + (seed as usize % 4);
        let m = common::random_matrix(spec, n, n, seed);
        let got = condition_number(&m).unwrap();
        let want = common::cond_oracle(&m);
        if want.is_infinite() {
            continue;
        }
        assert!(
            (got - want).abs() <= 1e-6 * want,
            "seed {seed}: {got} vs {want}"
        );
    }
}

#[test]
fn singular_values_of_diagonal_matrices() {
    let spec = FieldSpec::real64();
    let m = DenseMatrix::from_fn(spec, 3, 3, |i, j| {
        let v = if i == j { [3.0, -7.0, 0.5][i] } else { 0.0 };
        spec.from_f64(v).unwrap()
    });
    let sv = singular_values(&m).unwrap();
    assert_eq!(sv.len(), 3);
    assert!((sv[0] - 7.0).abs() < 1e-12);
    assert!((sv[1] - 3.0).abs() < 1e-12);
    assert!((sv[2] - 0.5).abs() < 1e-12);
    assert!((condition_number(&m).unwrap() - 14.0).abs() < 1e-9);
}

#[test]
fn exact_carriers_have_no_singular_values() {
    let spec = FieldSpec::prime(101).unwrap();
    let m = DenseMatrix::identity(spec, 2);
    assert!(matches!(
        singular_values(&m),
        Err(Error::UnsupportedCarrier(_))
    ));
}
