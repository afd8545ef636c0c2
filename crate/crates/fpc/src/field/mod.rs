//! Field carriers: prime fields F_q, binary extensions GF(2^w), exact
//! rationals, and IEEE f64.
//!
//! A [`FieldSpec`] names the field, a [`FieldElement`] is a value tagged
//! with its spec. Arithmetic between elements of different specs is a
//! programming error and panics in the operator-style methods; the
//! `try_*` variants report [`Error::MixedField`] instead.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub mod gf2;

/// Largest accepted prime modulus is just below 2^62 so that sums of two
/// residues never overflow u64 and products fit in u128.
pub const MAX_PRIME: u64 = 1 << 62;

/// Default relative tolerance for comparing decoded f64 values.
pub const DEFAULT_REAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    /// Integers modulo an odd prime q, 3 <= q < 2^62.
    Prime { q: u64 },
    /// GF(2^w) with the reduction polynomial from [`gf2::REDUCTION_POLYS`].
    Binary { w: u32 },
    /// Exact arbitrary-precision rationals.
    Rational,
    /// IEEE double precision floats.
    Real64,
}

impl FieldSpec {
    pub fn prime(q: u64) -> Result<Self> {
        if q < 3 || q >= MAX_PRIME {
            return Err(Error::InvalidFieldSpec(format!(
                "prime modulus must satisfy 3 <= q < 2^62, got {q}"
            )));
        }
        if !is_prime_u64(q) {
            return Err(Error::InvalidFieldSpec(format!("{q} is not an odd prime")));
        }
        Ok(FieldSpec::Prime { q })
    }

    pub fn binary(w: u32) -> Result<Self> {
        if w < 1 || w > 63 {
            return Err(Error::InvalidFieldSpec(format!(
                "binary extension degree must be in [1, 63], got {w}"
            )));
        }
        Ok(FieldSpec::Binary { w })
    }

    pub fn rational() -> Self {
        FieldSpec::Rational
    }

    pub fn real64() -> Self {
        FieldSpec::Real64
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Prime { q } => *q,
            FieldSpec::Binary { .. } => 2,
            FieldSpec::Rational | FieldSpec::Real64 => 0,
        }
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<u64> {
        match self {
            FieldSpec::Prime { q } => Some(*q),
            FieldSpec::Binary { w } => Some(1u64 << w),
            _ => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, FieldSpec::Real64)
    }

    fn reduction_poly(&self) -> u64 {
        match self {
            FieldSpec::Binary { w } => gf2::REDUCTION_POLYS[*w as usize],
            _ => unreachable!("reduction polynomial only exists for binary fields"),
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.from_u64(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_u64(1)
    }

    /// Embed a machine integer. Prime fields reduce modulo q, binary fields
    /// keep the low w bits, rationals and reals embed exactly.
    pub fn from_u64(&self, n: u64) -> FieldElement {
        let value = match self {
            FieldSpec::Prime { q } => Value::Prime(n % q),
            FieldSpec::Binary { w } => Value::Binary(n & mask(*w)),
            FieldSpec::Rational => Value::Rational(BigRational::from_integer(BigInt::from(n))),
            FieldSpec::Real64 => Value::Real(n as f64),
        };
        FieldElement { spec: *self, value }
    }

    pub fn from_i64(&self, n: i64) -> FieldElement {
        if n >= 0 {
            self.from_u64(n as u64)
        } else {
            self.from_u64(n.unsigned_abs()).neg()
        }
    }

    pub fn from_f64(&self, x: f64) -> Result<FieldElement> {
        match self {
            FieldSpec::Real64 => Ok(FieldElement {
                spec: *self,
                value: Value::Real(x),
            }),
            _ => Err(Error::InvalidValue(format!(
                "cannot inject float {x} into {self}"
            ))),
        }
    }

    pub fn from_rational(&self, r: BigRational) -> Result<FieldElement> {
        match self {
            FieldSpec::Rational => Ok(FieldElement {
                spec: *self,
                value: Value::Rational(r),
            }),
            _ => Err(Error::InvalidValue(
                "rational payloads only embed into the rational carrier".into(),
            )),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Prime { q } => write!(f, "prime:{q}"),
            FieldSpec::Binary { w } => write!(f, "gf2:{w}"),
            FieldSpec::Rational => write!(f, "rational"),
            FieldSpec::Real64 => write!(f, "real64"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "rational" {
            return Ok(FieldSpec::Rational);
        }
        if s == "real64" {
            return Ok(FieldSpec::Real64);
        }
        if let Some(q) = s.strip_prefix("prime:") {
            let q: u64 = q
                .parse()
                .map_err(|_| Error::InvalidFieldSpec(format!("bad modulus in {s:?}")))?;
            return FieldSpec::prime(q);
        }
        if let Some(w) = s.strip_prefix("gf2:") {
            let w: u32 = w
                .parse()
                .map_err(|_| Error::InvalidFieldSpec(format!("bad degree in {s:?}")))?;
            return FieldSpec::binary(w);
        }
        Err(Error::InvalidFieldSpec(format!(
            "expected prime:<q>, gf2:<w>, rational or real64, got {s:?}"
        )))
    }
}

fn mask(w: u32) -> u64 {
    if w == 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Prime(u64),
    Binary(u64),
    Rational(BigRational),
    Real(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldElement {
    spec: FieldSpec,
    value: Value,
}

impl FieldElement {
    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Prime(v) | Value::Binary(v) => *v == 0,
            Value::Rational(r) => r.is_zero(),
            Value::Real(x) => *x == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Prime(v) | Value::Binary(v) => *v == 1,
            Value::Rational(r) => r.is_one(),
            Value::Real(x) => *x == 1.0,
        }
    }

    /// Residue or bit pattern for the finite carriers.
    pub fn as_u64(&self) -> Option<u64> {
        match &self.value {
            Value::Prime(v) | Value::Binary(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match &self.value {
            Value::Real(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.value {
            Value::Rational(r) => Some(r),
            _ => None,
        }
    }

    fn assert_same_spec(&self, rhs: &Self) {
        assert_eq!(
            self.spec, rhs.spec,
            "mixed-field arithmetic: {} vs {}",
            self.spec, rhs.spec
        );
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.assert_same_spec(rhs);
        let value = match (&self.value, &rhs.value) {
            (Value::Prime(a), Value::Prime(b)) => {
                let q = self.modulus();
                Value::Prime((a + b) % q)
            }
            (Value::Binary(a), Value::Binary(b)) => Value::Binary(a ^ b),
            (Value::Rational(a), Value::Rational(b)) => Value::Rational(a + b),
            (Value::Real(a), Value::Real(b)) => Value::Real(a + b),
            _ => unreachable!(),
        };
        FieldElement {
            spec: self.spec,
            value,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.assert_same_spec(rhs);
        let value = match (&self.value, &rhs.value) {
            (Value::Prime(a), Value::Prime(b)) => {
                let q = self.modulus();
                Value::Prime((a + q - b) % q)
            }
            (Value::Binary(a), Value::Binary(b)) => Value::Binary(a ^ b),
            (Value::Rational(a), Value::Rational(b)) => Value::Rational(a - b),
            (Value::Real(a), Value::Real(b)) => Value::Real(a - b),
            _ => unreachable!(),
        };
        FieldElement {
            spec: self.spec,
            value,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.assert_same_spec(rhs);
        let value = match (&self.value, &rhs.value) {
            (Value::Prime(a), Value::Prime(b)) => {
                let q = self.modulus() as u128;
                Value::Prime((*a as u128 * *b as u128 % q) as u64)
            }
            (Value::Binary(a), Value::Binary(b)) => {
                let (poly, w) = self.binary_params();
                Value::Binary(gf2::mul(*a, *b, poly, w))
            }
            (Value::Rational(a), Value::Rational(b)) => Value::Rational(a * b),
            (Value::Real(a), Value::Real(b)) => Value::Real(a * b),
            _ => unreachable!(),
        };
        FieldElement {
            spec: self.spec,
            value,
        }
    }

    pub fn neg(&self) -> Self {
        let value = match &self.value {
            Value::Prime(a) => {
                let q = self.modulus();
                Value::Prime((q - a) % q)
            }
            Value::Binary(a) => Value::Binary(*a),
            Value::Rational(a) => Value::Rational(-a),
            Value::Real(a) => Value::Real(-a),
        };
        FieldElement {
            spec: self.spec,
            value,
        }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let value = match &self.value {
            Value::Prime(a) => {
                let q = self.modulus();
                Value::Prime(mod_pow(*a, q - 2, q))
            }
            Value::Binary(a) => {
                let (poly, w) = self.binary_params();
                Value::Binary(gf2::inv(*a, poly, w))
            }
            Value::Rational(a) => Value::Rational(a.recip()),
            Value::Real(a) => Value::Real(1.0 / a),
        };
        Ok(FieldElement {
            spec: self.spec,
            value,
        })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        self.assert_same_spec(rhs);
        Ok(self.mul(&rhs.inv()?))
    }

    /// Repeated-square exponentiation; pow(0, 0) = 1.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.spec.one();
        let mut base = self.clone();
        while e != 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        if self.spec != rhs.spec {
            return Err(Error::MixedField);
        }
        Ok(self.add(rhs))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        if self.spec != rhs.spec {
            return Err(Error::MixedField);
        }
        Ok(self.sub(rhs))
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.spec != rhs.spec {
            return Err(Error::MixedField);
        }
        Ok(self.mul(rhs))
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self> {
        if self.spec != rhs.spec {
            return Err(Error::MixedField);
        }
        self.div(rhs)
    }

    /// Exact equality on exact carriers, relative-tolerance comparison on
    /// real64.
    pub fn approx_eq(&self, rhs: &Self, rel_tol: f64) -> bool {
        if self.spec != rhs.spec {
            return false;
        }
        match (&self.value, &rhs.value) {
            (Value::Real(a), Value::Real(b)) => {
                let scale = a.abs().max(b.abs()).max(1.0);
                (a - b).abs() <= rel_tol * scale
            }
            _ => self == rhs,
        }
    }

    /// Magnitude used for pivot selection; exact carriers only distinguish
    /// zero from nonzero.
    pub(crate) fn pivot_weight(&self) -> f64 {
        match &self.value {
            Value::Real(x) => x.abs(),
            _ => {
                if self.is_zero() {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    fn modulus(&self) -> u64 {
        match self.spec {
            FieldSpec::Prime { q } => q,
            _ => unreachable!(),
        }
    }

    fn binary_params(&self) -> (u64, u32) {
        match self.spec {
            FieldSpec::Binary { w } => (self.spec.reduction_poly(), w),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Prime(v) | Value::Binary(v) => write!(f, "{v}"),
            Value::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            // {:?} prints the shortest representation that round-trips.
            Value::Real(x) => write!(f, "{x:?}"),
        }
    }
}

/// Deterministic Miller-Rabin, valid for all u64 inputs with this witness
/// set.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n % small == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mod_pow(mut base: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    base %= q;
    while e != 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % q as u128) as u64;
        }
        base = (base as u128 * base as u128 % q as u128) as u64;
        e >>= 1;
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointConstraint {
    /// Pairwise distinct and nonzero.
    DistinctNonzero,
    /// Additionally alpha_i * alpha_j != 1 for all i, j, including i = j,
    /// so alpha != +-1 as well.
    NoReciprocalPairs,
}

/// Seeded rejection sampler for evaluation points.
///
/// Finite fields draw uniform nonzero elements; rationals draw distinct
/// small integers >= 2 (pairwise products are then >= 4, so the reciprocal
/// constraint holds for free); real64 draws from the open interval (-1, 1)
/// excluding 0, where products of two points always stay below 1 in
/// magnitude.
pub fn sample_distinct_points(
    spec: &FieldSpec,
    count: usize,
    constraint: PointConstraint,
    seed: u64,
) -> Result<Vec<FieldElement>> {
    let capacity = match (spec, constraint) {
        (FieldSpec::Prime { q }, PointConstraint::DistinctNonzero) => Some(q - 1),
        // Exclude 0, 1, q-1, then at most one element per reciprocal pair.
        (FieldSpec::Prime { q }, PointConstraint::NoReciprocalPairs) => Some((q - 3) / 2),
        (FieldSpec::Binary { w }, PointConstraint::DistinctNonzero) => Some((1u64 << w) - 1),
        // Exclude 0 and 1 (the only self-inverse), then one per pair.
        (FieldSpec::Binary { w }, PointConstraint::NoReciprocalPairs) => Some((1u64 << (w - 1)) - 1),
        _ => None,
    };
    if let Some(cap) = capacity {
        if (count as u64) > cap {
            return Err(Error::FieldTooSmall {
                needed: count,
                available: cap.min(usize::MAX as u64) as usize,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<FieldElement> = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let max_attempts = 10_000 + 200 * count;
    while chosen.len() < count {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::PointSelectionFailed(max_attempts));
        }
        let candidate = match spec {
            FieldSpec::Prime { q } => spec.from_u64(rng.gen_range(1..*q)),
            FieldSpec::Binary { w } => {
                let v = rng.gen_range(1..(1u64 << *w));
                spec.from_u64(v)
            }
            FieldSpec::Rational => {
                let hi = 1000u64.max(4 * count as u64 + 16);
                spec.from_u64(rng.gen_range(2..=hi))
            }
            FieldSpec::Real64 => {
                let x = rng.gen::<f64>() * 2.0 - 1.0;
                if x == 0.0 || x == -1.0 || x == 1.0 {
                    continue;
                }
                spec.from_f64(x).expect("real64 spec")
            }
        };
        if chosen.contains(&candidate) {
            continue;
        }
        if constraint == PointConstraint::NoReciprocalPairs {
            let self_product = candidate.mul(&candidate);
            if self_product.is_one() {
                continue;
            }
            if chosen.iter().any(|c| c.mul(&candidate).is_one()) {
                continue;
            }
        }
        chosen.push(candidate);
    }
    Ok(chosen)
}
