//! Term-polynomial combinatorics behind the folded decoder.
//!
//! The product f_A(x) * g_A(x) groups its cross-term monomials into pairs
//!
//!   g(k,s,t,+) = x^(smp+kp+p-1+t) + x^(kmp+sp+p-1-t)
//!   g(k,s,t,-) = x^(smp+kp+p-1+t) - x^(kmp+sp+p-1-t)
//!
//! indexed over the cube [0,m-1] x [0,m-1] x [1,p-1]. The successor map
//! `phi` links indices whose polynomials share a monomial; its orbits split
//! the cube into loops and single chains, each loop contributing exactly one
//! linear dependency. This module materializes that structure: the chain
//! decomposition, the span dimensions, reduced bases with the eliminated
//! heads' expansion coefficients, evaluation matrices, and the closed-form
//! determinants of the two m = 1 system matrices.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::DenseMatrix;

pub type Triple = (usize, usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// Index of one term polynomial g(k,s,t,sign).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermIndex {
    pub k: usize,
    pub s: usize,
    pub t: usize,
    pub sign: Sign,
}

impl TermIndex {
    pub fn new(k: usize, s: usize, t: usize, sign: Sign) -> Self {
        TermIndex { k, s, t, sign }
    }

    pub fn triple(&self) -> Triple {
        (self.k, self.s, self.t)
    }
}

/// Exponent of the upper monomial of g(k,s,t,.).
pub fn sigma1(k: usize, s: usize, t: usize, m: usize, p: usize) -> u64 {
    (s * m * p + k * p + p - 1 + t) as u64
}

/// Exponent of the lower monomial of g(k,s,t,.).
pub fn sigma2(k: usize, s: usize, t: usize, m: usize, p: usize) -> u64 {
    (k * m * p + s * p + p - 1 - t) as u64
}

/// Exponent carrying the Gram block C_{k,s} in f_A * g_A.
pub fn sigma_c(k: usize, s: usize, m: usize, p: usize) -> u64 {
    (s * m * p + k * p + p - 1) as u64
}

/// Successor map on term indices: the upper monomial of (k,s,t) is the
/// lower monomial of phi(k,s,t). Undefined at the terminals (m-1, m-1, t).
pub fn phi(k: usize, s: usize, t: usize, m: usize, p: usize) -> Result<Triple> {
    assert!(
        k < m && s < m && t >= 1 && t <= p.saturating_sub(1),
        "triple ({k},{s},{t}) outside the index cube for m={m}, p={p}"
    );
    if k == m - 1 && s == m - 1 {
        return Err(Error::UndefinedAtTerminal(k, s, t));
    }
    if k == m - 1 {
        Ok((s + 1, 0, p - t))
    } else {
        Ok((s, k + 1, p - t))
    }
}

/// Loop/chain decomposition of the index cube under `phi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStructure {
    m: usize,
    p: usize,
    /// Keyed by the canonical representative (a, b) in D; each loop is the
    /// phi-orbit of its head (m-1, a, b), listed head first.
    loops: BTreeMap<(usize, usize), Vec<Triple>>,
    /// Chains Y_{0,0,t}, t = 1..p-1, each running from (0,0,t) to the
    /// terminal (m-1, m-1, t).
    single_chains: Vec<Vec<Triple>>,
    special: Option<(usize, usize)>,
}

impl ChainStructure {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn loops(&self) -> &BTreeMap<(usize, usize), Vec<Triple>> {
        &self.loops
    }

    pub fn single_chains(&self) -> &[Vec<Triple>] {
        &self.single_chains
    }

    pub fn special_loop_present(&self) -> bool {
        self.special.is_some()
    }

    /// The (a, b) key of the short loop that exists when m and p are both
    /// even.
    pub fn special_key(&self) -> Option<(usize, usize)> {
        self.special
    }

    /// Total number of triples covered, which must equal m^2 (p-1).
    pub fn covered(&self) -> usize {
        self.loops.values().map(Vec::len).sum::<usize>()
            + self.single_chains.iter().map(Vec::len).sum::<usize>()
    }
}

/// Parity indicator: 1 for even, 0 for odd.
fn chi(x: usize) -> usize {
    1 - (x & 1)
}

/// Canonical loop representatives D. Deduplication uses the rotation
/// identity Y_{s,t} = Y_{m-2-s, p-t}; when m and p are both even the pair
/// (m/2-1, p/2) is its own mirror and induces the short loop.
fn loop_representatives(m: usize, p: usize) -> Vec<(usize, usize)> {
    let mut d = Vec::new();
    if m == 1 || p == 1 {
        return d;
    }
    if m % 2 == 1 {
        // m >= 3 here, so (m-3)/2 is a valid upper bound for s.
        for s in 0..=(m - 3) / 2 {
            for t in 1..p {
                d.push((s, t));
            }
        }
    } else {
        for s in 0..m / 2 {
            if 2 * s + 4 <= m {
                for t in 1..p {
                    d.push((s, t));
                }
            } else if 2 * s + 2 == m {
                // Half of the t range survives deduplication; the midpoint
                // t = p/2 (p even) is the self-mirrored special loop.
                for t in 1..=(p - 1 + chi(p)) / 2 {
                    d.push((s, t));
                }
            }
        }
    }
    d.sort_unstable();
    d
}

/// Build the full loop/chain decomposition.
///
/// For p = 1 the cube is empty; for m = 1 every chain degenerates to the
/// single terminal triple (0, 0, t).
pub fn build_chain_structure(m: usize, p: usize) -> ChainStructure {
    assert!(m >= 1 && p >= 1);
    let special = if m % 2 == 0 && p % 2 == 0 && p >= 2 {
        Some((m / 2 - 1, p / 2))
    } else {
        None
    };
    let mut loops = BTreeMap::new();
    for (a, b) in loop_representatives(m, p) {
        let head = (m - 1, a, b);
        let mut orbit = vec![head];
        loop {
            let (k, s, t) = *orbit.last().unwrap();
            let next = phi(k, s, t, m, p).expect("loop orbits avoid terminals");
            if next == head {
                break;
            }
            orbit.push(next);
        }
        loops.insert((a, b), orbit);
    }
    let mut single_chains = Vec::new();
    for t in 1..p {
        let mut chain = vec![(0, 0, t)];
        loop {
            let (k, s, tt) = *chain.last().unwrap();
            if k == m - 1 && s == m - 1 {
                break;
            }
            chain.push(phi(k, s, tt, m, p).expect("chain interior"));
        }
        single_chains.push(chain);
    }
    ChainStructure {
        m,
        p,
        loops,
        single_chains,
        special,
    }
}

/// Closed-form span dimensions (dim_plus, dim_minus) of the two term
/// families over a field of the given characteristic.
pub fn span_dims(m: usize, p: usize, characteristic: u64) -> (usize, usize) {
    let x = (p - 1) * (2 * m * m - m + 1);
    let chi2 = chi(m) * chi(p);
    let plus = if characteristic == 2 {
        (x - chi2) / 2
    } else {
        (x + chi2) / 2
    };
    let minus = (x - chi2) / 2;
    (plus, minus)
}

/// A basis of the span of one term family, with the dropped loop heads'
/// expansion coefficients over the kept terms.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    pub sign: Sign,
    pub kept: Vec<TermIndex>,
    /// (head, expansion): head = sum of coeff * kept-term, with coefficients
    /// in {-1, +1} interpreted in the target field. An empty expansion means
    /// the head polynomial is identically zero in this characteristic.
    pub eliminated: Vec<(TermIndex, Vec<(TermIndex, i64)>)>,
}

/// Pick a basis of Span(Omega_sign):
/// all single-chain terms survive; every loop drops its head (m-1, a, b),
/// except that the plus family keeps the entire special loop when the
/// characteristic is not 2 (its alternating dependency needs -1 = +1 to
/// close, because the orbit length m-1 is odd).
///
/// Head expansions: generic loops alternate signs for plus and carry all
/// minus-ones for minus; the special loop (when dropped) expands with all
/// plus-ones in characteristic 2 and all minus-ones for the minus family.
pub fn reduced_basis(m: usize, p: usize, characteristic: u64, sign: Sign) -> ReducedBasis {
    let structure = build_chain_structure(m, p);
    let char2 = characteristic == 2;
    let mut kept = Vec::new();
    let mut eliminated = Vec::new();
    for chain in structure.single_chains() {
        for &(k, s, t) in chain {
            kept.push(TermIndex::new(k, s, t, sign));
        }
    }
    for (&key, orbit) in structure.loops() {
        let is_special = structure.special_key() == Some(key);
        let keep_whole = is_special && sign == Sign::Plus && !char2;
        if keep_whole {
            for &(k, s, t) in orbit {
                kept.push(TermIndex::new(k, s, t, sign));
            }
            continue;
        }
        let head = orbit[0];
        let tail = &orbit[1..];
        for &(k, s, t) in tail {
            kept.push(TermIndex::new(k, s, t, sign));
        }
        let expansion: Vec<(TermIndex, i64)> = tail
            .iter()
            .enumerate()
            .map(|(i, &(k, s, t))| {
                let j = i + 1;
                let coeff = match sign {
                    // Alternating for plus on generic loops; all-ones
                    // closes the odd special orbit in characteristic 2.
                    Sign::Plus if is_special => 1,
                    Sign::Plus => {
                        if j % 2 == 1 {
                            1
                        } else {
                            -1
                        }
                    }
                    Sign::Minus => -1,
                };
                (TermIndex::new(k, s, t, sign), coeff)
            })
            .collect();
        eliminated.push((TermIndex::new(head.0, head.1, head.2, sign), expansion));
    }
    ReducedBasis {
        sign,
        kept,
        eliminated,
    }
}

/// Sparse polynomial as an increasing list of (exponent, coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct TermPoly {
    terms: Vec<(u64, FieldElement)>,
}

impl TermPoly {
    /// Merge duplicate exponents and drop zero coefficients.
    pub fn new(mut raw: Vec<(u64, FieldElement)>) -> Self {
        raw.sort_by_key(|(e, _)| *e);
        let mut terms: Vec<(u64, FieldElement)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match terms.last_mut() {
                Some((last_e, last_c)) if *last_e == e => {
                    *last_c = last_c.add(&c);
                }
                _ => terms.push((e, c)),
            }
        }
        terms.retain(|(_, c)| !c.is_zero());
        TermPoly { terms }
    }

    pub fn monomial(exp: u64, coeff: FieldElement) -> Self {
        TermPoly::new(vec![(exp, coeff)])
    }

    pub fn zero() -> Self {
        TermPoly { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(u64, FieldElement)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exponents(&self) -> Vec<u64> {
        self.terms.iter().map(|(e, _)| *e).collect()
    }

    /// Evaluate by Horner over the exponent gaps.
    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let spec = x.spec();
        let mut rev = self.terms.iter().rev();
        let Some((top_e, top_c)) = rev.next() else {
            return spec.zero();
        };
        let mut acc = top_c.clone();
        let mut exp = *top_e;
        for (e, c) in rev {
            acc = acc.mul(&x.pow(exp - e)).add(c);
            exp = *e;
        }
        acc.mul(&x.pow(exp))
    }

    /// Sum of this polynomial and `other`.
    pub fn add(&self, other: &TermPoly) -> TermPoly {
        let mut raw = self.terms.clone();
        raw.extend(other.terms.iter().cloned());
        TermPoly::new(raw)
    }

    /// Multiply every coefficient by a small signed integer.
    pub fn scale_i64(&self, c: i64, spec: &FieldSpec) -> TermPoly {
        let factor = spec.from_i64(c);
        TermPoly::new(
            self.terms
                .iter()
                .map(|(e, coeff)| (*e, coeff.mul(&factor)))
                .collect(),
        )
    }
}

/// Materialize g(k,s,t,sign) over a field. Coinciding exponents merge, so
/// the result may be a doubled monomial (plus, sigma1 = sigma2) or the zero
/// polynomial (that doubled monomial in characteristic 2, or minus with
/// sigma1 = sigma2).
pub fn term_poly(idx: &TermIndex, m: usize, p: usize, spec: &FieldSpec) -> TermPoly {
    let e1 = sigma1(idx.k, idx.s, idx.t, m, p);
    let e2 = sigma2(idx.k, idx.s, idx.t, m, p);
    let c2 = match idx.sign {
        Sign::Plus => spec.one(),
        Sign::Minus => spec.one().neg(),
    };
    TermPoly::new(vec![(e1, spec.one()), (e2, c2)])
}

/// All of Omega_sign in cube order (k, s, t ascending, t >= 1).
pub fn omega_polys(m: usize, p: usize, sign: Sign, spec: &FieldSpec) -> Vec<TermPoly> {
    let mut polys = Vec::new();
    for k in 0..m {
        for s in 0..m {
            for t in 1..p {
                polys.push(term_poly(&TermIndex::new(k, s, t, sign), m, p, spec));
            }
        }
    }
    polys
}

/// Monomial coefficient matrix of Omega_sign: one row per cube triple, one
/// column per exponent in [0, (m^2+1)p - 2]. Its rank realizes the span
/// dimension.
pub fn omega_coefficient_matrix(m: usize, p: usize, sign: Sign, spec: &FieldSpec) -> DenseMatrix {
    let cols = (m * m + 1) * p - 1;
    let polys = omega_polys(m, p, sign, spec);
    let mut out = DenseMatrix::zeros(*spec, polys.len(), cols);
    for (i, poly) in polys.iter().enumerate() {
        for (e, c) in poly.terms() {
            out.set(i, *e as usize, c.clone());
        }
    }
    out
}

/// Collocation matrix: entry (i, j) = polys[j](points[i]), one row per
/// evaluation point. Solving it against a vector of point evaluations
/// yields the coefficients over `polys`.
pub fn eval_matrix(polys: &[TermPoly], points: &[FieldElement]) -> Result<DenseMatrix> {
    let Some(first) = points.first() else {
        return Err(Error::ShapeMismatch("no evaluation points".into()));
    };
    let spec = *first.spec();
    for pt in points {
        if *pt.spec() != spec {
            return Err(Error::MixedField);
        }
    }
    for poly in polys {
        for (_, c) in poly.terms() {
            if *c.spec() != spec {
                return Err(Error::MixedField);
            }
        }
    }
    let mut out = DenseMatrix::zeros(spec, points.len(), polys.len());
    for (i, pt) in points.iter().enumerate() {
        for (j, poly) in polys.iter().enumerate() {
            out.set(i, j, poly.eval(pt));
        }
    }
    Ok(out)
}

/// The two closed-form m = 1 system bases.
///
/// Symmetric (diagonal route): { x^(p-1) } plus the folded pairs
/// x^(p-1-l) + x^(p-1+l); antisymmetric: the differences
/// x^(p-1+l) - x^(p-1-l).
pub fn symmetric_m1_basis(p: usize, spec: &FieldSpec) -> Vec<TermPoly> {
    let n = (p - 1) as u64;
    let mut basis = vec![TermPoly::monomial(n, spec.one())];
    for l in 1..=n {
        basis.push(TermPoly::new(vec![
            (n - l, spec.one()),
            (n + l, spec.one()),
        ]));
    }
    basis
}

pub fn antisymmetric_m1_basis(p: usize, spec: &FieldSpec) -> Vec<TermPoly> {
    let n = (p - 1) as u64;
    (1..=n)
        .map(|l| {
            TermPoly::new(vec![
                (n - l, spec.one().neg()),
                (n + l, spec.one()),
            ])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuredKind {
    /// Lemma-8 shape: basis { x^(n-1), x^(n-1-l) + x^(n-1+l) }.
    SymmetricM1,
    /// Lemma-9 shape: basis { x^(n+i) - x^(n-i) }.
    AntisymmetricM1,
}

/// Closed-form determinant of the m = 1 evaluation matrices.
///
/// Symmetric: prod_{i<j} (b_j - b_i)(b_i b_j - 1).
/// Antisymmetric: prod_i (b_i^2 - 1) * prod_{i<j} (b_j - b_i)(b_j b_i - 1).
/// The antisymmetric form carries the extra prod(b_i^2 - 1) factor; the
/// 1x1 case det [b^2 - 1] shows it cannot be dropped.
pub fn structured_det_prediction(
    kind: StructuredKind,
    betas: &[FieldElement],
) -> Result<FieldElement> {
    let Some(first) = betas.first() else {
        return Err(Error::ConstraintViolated("empty point list".into()));
    };
    let spec = *first.spec();
    for (i, bi) in betas.iter().enumerate() {
        for bj in &betas[i..] {
            if bi.mul(bj).is_one() {
                return Err(Error::ConstraintViolated(format!(
                    "points {bi} and {bj} multiply to 1"
                )));
            }
        }
        if betas[i + 1..].contains(bi) {
            return Err(Error::ConstraintViolated(format!("repeated point {bi}")));
        }
    }
    let one = spec.one();
    let mut det = one.clone();
    if kind == StructuredKind::AntisymmetricM1 {
        for b in betas {
            det = det.mul(&b.mul(b).sub(&one));
        }
    }
    for i in 0..betas.len() {
        for j in i + 1..betas.len() {
            let diff = betas[j].sub(&betas[i]);
            let prod = betas[i].mul(&betas[j]).sub(&one);
            det = det.mul(&diff.mul(&prod));
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_small_cases() {
        assert_eq!(phi(1, 0, 1, 2, 2).unwrap(), (1, 0, 1));
        assert_eq!(phi(0, 0, 1, 2, 2).unwrap(), (0, 1, 1));
        assert_eq!(phi(0, 1, 1, 2, 2).unwrap(), (1, 1, 1));
        assert!(matches!(
            phi(1, 1, 1, 2, 2),
            Err(Error::UndefinedAtTerminal(1, 1, 1))
        ));
    }

    #[test]
    fn sparse_eval_matches_dense() {
        let spec = FieldSpec::prime(101).unwrap();
        let poly = TermPoly::new(vec![
            (0, spec.from_u64(3)),
            (2, spec.from_u64(5)),
            (7, spec.from_u64(2)),
        ]);
        let x = spec.from_u64(4);
        // 3 + 5*16 + 2*4^7 mod 101
        let direct = spec
            .from_u64(3)
            .add(&spec.from_u64(5).mul(&x.pow(2)))
            .add(&spec.from_u64(2).mul(&x.pow(7)));
        assert_eq!(poly.eval(&x), direct);
    }
}
