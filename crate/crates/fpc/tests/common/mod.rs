//! Shared oracles for the integration suite.
//!
//! Everything here is computed from first principles with algorithms
//! deliberately different from the library's (extended Euclid instead of
//! Fermat inverses, widening carry-less multiply with long division instead
//! of inline reduction, cofactor expansion instead of elimination, two-sided
//! Jacobi on the Gram matrix instead of one-sided column rotations), so an
//! agreement is evidence and not a tautology.

#![allow(dead_code)]

use fpc::field::{FieldElement, FieldSpec};
use fpc::linalg::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Modular arithmetic over u64 moduli, all through i128/u128 widening.

/// (g, x, y) with a*x + b*y = g = gcd(a, b).
pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        return (a, 1, 0);
    }
    let (g, x, y) = egcd(b, a % b);
    (g, y, x - (a / b) * y)
}

pub fn mod_mul(a: u64, b: u64, q: u64) -> u64 {
    (a as u128 * b as u128 % q as u128) as u64
}

pub fn mod_add(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + b as u128) % q as u128) as u64
}

pub fn mod_sub(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + q as u128 - b as u128) % q as u128) as u64
}

/// Inverse by extended Euclid; None for a = 0 mod q.
pub fn mod_inv(a: u64, q: u64) -> Option<u64> {
    let a = a % q;
    if a == 0 {
        return None;
    }
    let (g, x, _) = egcd(a as i128, q as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(q as i128) as u64)
}

pub fn mod_pow(mut base: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64 % q;
    base %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(acc, base, q);
        }
        base = mod_mul(base, base, q);
        e >>= 1;
    }
    acc
}

/// Primality by trial division up to the square root.
pub fn is_prime_trial(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

// ---------------------------------------------------------------------------
// GF(2)[x] arithmetic on u128 bit patterns (bit i = coefficient of x^i).

/// Widening carry-less multiply.
pub fn clmul(a: u64, b: u64) -> u128 {
    let mut acc = 0u128;
    for i in 0..64 {
        if b >> i & 1 == 1 {
            acc ^= (a as u128) << i;
        }
    }
    acc
}

pub fn poly_degree(x: u128) -> i32 {
    127 - x.leading_zeros() as i32
}

/// Remainder of long division by `poly` (which must include its leading
/// bit, degree w).
pub fn poly_rem(mut x: u128, poly: u128) -> u128 {
    let dp = poly_degree(poly);
    assert!(dp >= 0);
    while poly_degree(x) >= dp {
        x ^= poly << (poly_degree(x) - dp);
    }
    x
}

pub fn poly_gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = poly_rem(a, b);
        a = b;
        b = r;
    }
    a
}

/// Field multiply in GF(2^w): widen, then reduce by the degree-w modulus.
pub fn gf2_mul(a: u64, b: u64, poly: u64, w: u32) -> u64 {
    assert!(w >= 1 && w < 64 && poly >> w == 1);
    poly_rem(clmul(a, b), poly as u128) as u64
}

/// Rabin irreducibility test for a degree-w polynomial over GF(2):
/// x^(2^w) = x mod f, and x^(2^(w/d)) - x is coprime to f for every prime
/// divisor d of w.
pub fn rabin_irreducible(poly: u64, w: u32) -> bool {
    if poly >> w != 1 {
        return false;
    }
    let sq = |x: u64| gf2_mul(x, x, poly, w);
    let frobenius = |mut x: u64, times: u32| {
        for _ in 0..times {
            x = sq(x);
        }
        x
    };
    // The residue of x itself; for w = 1 the monomial x is not reduced.
    let x0 = poly_rem(0b10, poly as u128) as u64;
    // x^(2^w) mod f must equal x.
    if frobenius(x0, w) != x0 {
        return false;
    }
    let mut rest = w;
    let mut d = 2;
    while d * d <= w {
        if rest % d == 0 {
            while rest % d == 0 {
                rest /= d;
            }
            let g = poly_gcd((frobenius(x0, w / d) ^ x0) as u128, poly as u128);
            if g != 1 {
                return false;
            }
        }
        d += 1;
    }
    if rest > 1 && rest < w {
        let g = poly_gcd((frobenius(x0, w / rest) ^ x0) as u128, poly as u128);
        if g != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Index-cube successor by brute-force exponent matching.

/// The unique cube triple whose lower exponent k'mp + s'p + p-1 - t' equals
/// the upper exponent smp + kp + p-1 + t of the argument, if any.
pub fn phi_search(k: usize, s: usize, t: usize, m: usize, p: usize) -> Option<(usize, usize, usize)> {
    let target = s * m * p + k * p + p - 1 + t;
    let mut found = None;
    for k2 in 0..m {
        for s2 in 0..m {
            for t2 in 1..p {
                if k2 * m * p + s2 * p + p - 1 - t2 == target {
                    assert!(found.is_none(), "exponent {target} matched twice");
                    found = Some((k2, s2, t2));
                }
            }
        }
    }
    found
}

// ---------------------------------------------------------------------------
// Matrix oracles over FieldElement.

/// Determinant by cofactor expansion along the first row. Exponential;
/// intended for n <= 8.
pub fn det_cofactor(m: &DenseMatrix) -> FieldElement {
    assert_eq!(m.rows(), m.cols());
    let n = m.rows();
    let spec = *m.spec();
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut det = spec.zero();
    for j in 0..n {
        if m.get(0, j).is_zero() {
            continue;
        }
        let minor = DenseMatrix::from_fn(spec, n - 1, n - 1, |r, c| {
            m.get(r + 1, if c < j { c } else { c + 1 }).clone()
        });
        let term = m.get(0, j).mul(&det_cofactor(&minor));
        det = if j % 2 == 0 { det.add(&term) } else { det.sub(&term) };
    }
    det
}

/// A * A^T by direct entry sums, no blockwise shortcuts.
pub fn aat_oracle(a: &DenseMatrix) -> DenseMatrix {
    let spec = *a.spec();
    DenseMatrix::from_fn(spec, a.rows(), a.rows(), |i, j| {
        let mut acc = spec.zero();
        for k in 0..a.cols() {
            acc = acc.add(&a.get(i, k).mul(a.get(j, k)));
        }
        acc
    })
}

/// General product by direct entry sums.
pub fn matmul_oracle(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    let spec = *a.spec();
    DenseMatrix::from_fn(spec, a.rows(), b.cols(), |i, j| {
        let mut acc = spec.zero();
        for k in 0..a.cols() {
            acc = acc.add(&a.get(i, k).mul(b.get(k, j)));
        }
        acc
    })
}

// ---------------------------------------------------------------------------
// Real symmetric eigenvalues for the condition-number oracle.

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi rotations.
pub fn sym_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + frobenius_norm(&a)) {
            break;
        }
        assert!(sweep < 99, "Jacobi sweep did not converge");
        for i in 0..n {
            for j in i + 1..n {
                if a[i][j] == 0.0 {
                    continue;
                }
                let theta = (a[j][j] - a[i][i]) / (2.0 * a[i][j]);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..n {
                    let (ri, rj) = (a[r][i], a[r][j]);
                    a[r][i] = c * ri - s * rj;
                    a[r][j] = s * ri + c * rj;
                }
                for r in 0..n {
                    let (ir, jr) = (a[i][r], a[j][r]);
                    a[i][r] = c * ir - s * jr;
                    a[j][r] = s * ir + c * jr;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
    eig
}

fn frobenius_norm(a: &[Vec<f64>]) -> f64 {
    a.iter()
        .flat_map(|row| row.iter().map(|x| x * x))
        .sum::<f64>()
        .sqrt()
}

/// 2-norm condition number via the eigenvalues of M^T M.
pub fn cond_oracle(m: &DenseMatrix) -> f64 {
    let entry = |i: usize, j: usize| m.get(i, j).as_f64().expect("real64 matrix");
    let raw: Vec<Vec<f64>> = (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| entry(i, j)).collect())
        .collect();
    cond_oracle_raw(&raw)
}

/// `cond_oracle` on plain row-major f64 data.
pub fn cond_oracle_raw(m: &[Vec<f64>]) -> f64 {
    let rows = m.len();
    let cols = m[0].len();
    let gram: Vec<Vec<f64>> = (0..cols)
        .map(|i| {
            (0..cols)
                .map(|j| (0..rows).map(|r| m[r][i] * m[r][j]).sum())
                .collect()
        })
        .collect();
    let eig = sym_eigenvalues(gram);
    let max = eig.first().copied().unwrap();
    let min = eig.last().copied().unwrap();
    if min <= 0.0 {
        return f64::INFINITY;
    }
    (max / min).sqrt()
}

// ---------------------------------------------------------------------------
// Seeded matrix generation.

/// Seeded random matrix: uniform residues and bit patterns on the finite
/// carriers, small signed integers on rationals, uniform (-1, 1) on real64.
pub fn random_matrix(spec: FieldSpec, rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(spec, rows, cols, |_, _| match spec {
        FieldSpec::Prime { q } => spec.from_u64(rng.gen_range(0..q)),
        FieldSpec::Binary { .. } => spec.from_u64(rng.gen()),
        FieldSpec::Rational => spec.from_i64(rng.gen_range(-50..=50)),
        FieldSpec::Real64 => spec
            .from_f64(rng.gen_range(-1.0..1.0))
            .expect("real64 injection"),
    })
}
