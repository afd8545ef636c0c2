//! Coding schemes for distributed computation of A * A^T.
//!
//! Three schemes share one worker protocol: the master encodes A into N
//! tasks (one per worker), every worker multiplies its two encoded blocks,
//! and the master decodes the product from the first R answers. The folded
//! scheme (`fpc`) exploits the symmetry of A * A^T to push R below the
//! generic interpolation thresholds of the `matdot` and `ep` baselines.
//!
//! Worker w in [1, N] always evaluates at `instance.points[w - 1]`.

mod baseline;
mod fpc;

pub use baseline::{ep_decode, ep_decode_with_stats, matdot_decode, matdot_decode_with_stats, matdot_encode};
pub use fpc::{build_auxiliary, decode_bases, fpc_decode, fpc_decode_with_stats, fpc_encode};

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{sample_distinct_points, FieldElement, FieldSpec, PointConstraint};
use crate::linalg::{lu_factor, matmul, DenseMatrix, OpCount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Fpc,
    MatDot,
    Ep,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scheme::Fpc => "fpc",
            Scheme::MatDot => "matdot",
            Scheme::Ep => "ep",
        };
        write!(f, "{name}")
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fpc" => Ok(Scheme::Fpc),
            "matdot" => Ok(Scheme::MatDot),
            "ep" => Ok(Scheme::Ep),
            other => Err(Error::InvalidValue(format!(
                "unknown scheme {other:?}, expected fpc, matdot, or ep"
            ))),
        }
    }
}

/// Minimum number of worker answers the scheme can always decode from.
pub fn recovery_threshold(scheme: Scheme, m: usize, p: usize) -> usize {
    assert!(m >= 1 && p >= 1);
    match scheme {
        Scheme::Fpc => {
            let x = (p - 1) * (2 * m * m - m + 1);
            let chi2 = (1 - m % 2) * (1 - p % 2);
            m * (m + 1) / 2 + (x + chi2) / 2
        }
        Scheme::MatDot => 2 * p - 1,
        Scheme::Ep => p * m * m + p - 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeParams {
    pub scheme: Scheme,
    pub m: usize,
    pub p: usize,
    /// Worker count N.
    pub n: usize,
    pub spec: FieldSpec,
}

impl CodeParams {
    pub fn new(scheme: Scheme, m: usize, p: usize, n: usize, spec: FieldSpec) -> Result<Self> {
        let params = CodeParams { scheme, m, p, n, spec };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p == 0 {
            return Err(Error::InvalidParams("m and p must be at least 1".into()));
        }
        if self.scheme == Scheme::MatDot && self.m != 1 {
            return Err(Error::InvalidParams(format!(
                "matdot splits columns only and requires m = 1, got m = {}",
                self.m
            )));
        }
        let r = recovery_threshold(self.scheme, self.m, self.p);
        if self.n < r {
            return Err(Error::InvalidParams(format!(
                "need at least {} workers for {} with m={}, p={}, got {}",
                r, self.scheme, self.m, self.p, self.n
            )));
        }
        Ok(())
    }

    pub fn threshold(&self) -> usize {
        recovery_threshold(self.scheme, self.m, self.p)
    }
}

/// How thoroughly the instance's recovery subsets were checked at selection
/// time. `Lazy` defers everything to the per-decode factorization, which
/// reports `SingularRecoverySubset` on failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verified {
    Exhaustive,
    Sampled,
    Lazy,
}

impl fmt::Display for Verified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Verified::Exhaustive => "exhaustive",
            Verified::Sampled => "sampled",
            Verified::Lazy => "lazy",
        };
        write!(f, "{name}")
    }
}

impl FromStr for Verified {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Verified::Exhaustive),
            "sampled" => Ok(Verified::Sampled),
            "lazy" => Ok(Verified::Lazy),
            other => Err(Error::InvalidValue(format!(
                "unknown verification mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CodeInstance {
    pub params: CodeParams,
    /// Evaluation points, one per worker; worker w uses points[w - 1].
    pub points: Vec<FieldElement>,
    pub verified: Verified,
}

impl CodeInstance {
    pub fn threshold(&self) -> usize {
        self.params.threshold()
    }
}

#[derive(Debug, Clone)]
pub struct EncodedTask {
    pub worker_id: usize,
    pub a_tilde: DenseMatrix,
    pub b_tilde: DenseMatrix,
}

#[derive(Debug, Clone)]
pub struct WorkerResult {
    pub worker_id: usize,
    pub product: DenseMatrix,
}

/// The worker side of the protocol: multiply the two encoded blocks.
pub fn worker_compute(task: &EncodedTask) -> Result<WorkerResult> {
    let product = matmul(&task.a_tilde, &task.b_tilde)?;
    Ok(WorkerResult {
        worker_id: task.worker_id,
        product,
    })
}

/// Encode under the instance's scheme. `ep` shares the folded encoder; the
/// schemes differ only in threshold and decoding.
pub fn encode(a: &DenseMatrix, instance: &CodeInstance) -> Result<Vec<EncodedTask>> {
    match instance.params.scheme {
        Scheme::Fpc | Scheme::Ep => fpc_encode(a, instance),
        Scheme::MatDot => matdot_encode(a, instance),
    }
}

/// Decode statistics: exact field-operation counts over everything from
/// raw worker results to the assembled output, plus the condition numbers
/// of the factorized system matrices (real64 carrier only).
#[derive(Debug, Clone, Default)]
pub struct DecodeStats {
    pub ops: OpCount,
    pub conds: Vec<f64>,
}

pub fn decode(results: &[WorkerResult], instance: &CodeInstance) -> Result<DenseMatrix> {
    decode_with_stats(results, instance).map(|(c, _)| c)
}

pub fn decode_with_stats(
    results: &[WorkerResult],
    instance: &CodeInstance,
) -> Result<(DenseMatrix, DecodeStats)> {
    match instance.params.scheme {
        Scheme::Fpc => fpc_decode_with_stats(results, instance),
        Scheme::MatDot => matdot_decode_with_stats(results, instance),
        Scheme::Ep => ep_decode_with_stats(results, instance),
    }
}

/// C(n, r), saturating at u128::MAX on overflow.
pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 1..=r {
        acc = match acc.checked_mul((n - r + i) as u128) {
            Some(v) => v / i as u128,
            None => return u128::MAX,
        };
    }
    acc
}

/// Every r-subset of [0, n) in lexicographic order.
pub fn all_subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r > n {
        return Vec::new();
    }
    if r == 0 {
        return vec![Vec::new()];
    }
    let mut idx: Vec<usize> = (0..r).collect();
    let mut out = Vec::new();
    loop {
        out.push(idx.clone());
        let mut i = r;
        while i > 0 && idx[i - 1] == n - r + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Deterministic stream of `count` distinct sorted r-subsets of [0, n).
/// Falls back to full enumeration when there are at most `count` subsets.
///
/// Point selection and any test replaying its sampled verification must
/// call this with the same (n, r, count, seed) to see the same subsets.
pub fn subset_stream(n: usize, r: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    if binomial(n, r) <= count as u128 {
        return all_subsets(n, r);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    while out.len() < count {
        for i in 0..r {
            let j = rng.gen_range(i..n);
            pool.swap(i, j);
        }
        let mut sub = pool[..r].to_vec();
        sub.sort_unstable();
        if seen.insert(sub.clone()) {
            out.push(sub);
        }
    }
    out
}

const SELECTION_ROUNDS: usize = 64;

/// Choose N evaluation points for the scheme.
///
/// matdot/ep need only pairwise-distinct points: every recovery subset then
/// yields a Vandermonde system, invertible unconditionally, so the instance
/// is `Exhaustive` without enumeration. The same certificate covers fpc with
/// m = 1 once no two points (including a point with itself) multiply to 1:
/// the two closed-form determinants of `folded::structured_det_prediction`
/// are products of point differences and of such pair products.
///
/// For fpc with m >= 2 no closed form is known, so candidates are drawn and
/// the exact matrices the decoder would factor are checked per recovery
/// subset: all subsets when C(N, R) <= verify_budget, else `verify_budget`
/// subsets from `subset_stream(N, R, verify_budget, seed)`. A budget of 0
/// skips verification (`Lazy`); decoding still detects a bad subset.
pub fn select_points(params: &CodeParams, seed: u64, verify_budget: usize) -> Result<CodeInstance> {
    params.validate()?;
    let spec = params.spec;
    let n = params.n;
    match params.scheme {
        Scheme::MatDot | Scheme::Ep => {
            let points = sample_distinct_points(&spec, n, PointConstraint::DistinctNonzero, seed)?;
            Ok(CodeInstance {
                params: *params,
                points,
                verified: Verified::Exhaustive,
            })
        }
        Scheme::Fpc if params.m == 1 => {
            let points =
                sample_distinct_points(&spec, n, PointConstraint::NoReciprocalPairs, seed)?;
            Ok(CodeInstance {
                params: *params,
                points,
                verified: Verified::Exhaustive,
            })
        }
        Scheme::Fpc => {
            let r = params.threshold();
            let (subsets, verified) = if verify_budget == 0 {
                (Vec::new(), Verified::Lazy)
            } else if binomial(n, r) <= verify_budget as u128 {
                (all_subsets(n, r), Verified::Exhaustive)
            } else {
                (subset_stream(n, r, verify_budget, seed), Verified::Sampled)
            };
            let plan = fpc::DecodePlan::new(params.m, params.p, &spec);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..SELECTION_ROUNDS {
                let candidate_seed = rng.gen::<u64>();
                let points = sample_distinct_points(
                    &spec,
                    n,
                    PointConstraint::DistinctNonzero,
                    candidate_seed,
                )?;
                let ok = subsets
                    .par_iter()
                    .all(|subset| plan.subset_invertible(&points, subset));
                if ok {
                    return Ok(CodeInstance {
                        params: *params,
                        points,
                        verified,
                    });
                }
            }
            Err(Error::PointSelectionFailed(SELECTION_ROUNDS))
        }
    }
}

/// Plain-text instance manifest, one `key value` pair per line, points
/// space-separated on the final line. Round-trips through `read_manifest`.
pub fn write_manifest(instance: &CodeInstance) -> String {
    let p = &instance.params;
    let mut out = String::from("fpc-instance v1\n");
    out.push_str(&format!("scheme {}\n", p.scheme));
    out.push_str(&format!("m {}\n", p.m));
    out.push_str(&format!("p {}\n", p.p));
    out.push_str(&format!("workers {}\n", p.n));
    out.push_str(&format!("field {}\n", p.spec));
    out.push_str(&format!("verified {}\n", instance.verified));
    out.push_str(&format!("threshold {}\n", instance.threshold()));
    out.push_str("points");
    for pt in &instance.points {
        out.push(' ');
        out.push_str(&pt.to_string());
    }
    out.push('\n');
    out
}

fn manifest_field<'a>(lines: &mut std::str::Lines<'a>, key: &str) -> Result<&'a str> {
    let line = lines
        .next()
        .ok_or_else(|| Error::MalformedManifest(format!("missing {key} line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::MalformedManifest(format!("expected `{key} ...`, got {line:?}")))
}

pub fn read_manifest(text: &str) -> Result<CodeInstance> {
    let mut lines = text.lines();
    match lines.next() {
        Some("fpc-instance v1") => {}
        other => {
            return Err(Error::MalformedManifest(format!(
                "bad header line {other:?}"
            )))
        }
    }
    let parse_usize = |s: &str, key: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::MalformedManifest(format!("bad {key} value {s:?}")))
    };
    let scheme: Scheme = manifest_field(&mut lines, "scheme")?.parse()?;
    let m = parse_usize(manifest_field(&mut lines, "m")?, "m")?;
    let p = parse_usize(manifest_field(&mut lines, "p")?, "p")?;
    let n = parse_usize(manifest_field(&mut lines, "workers")?, "workers")?;
    let spec: FieldSpec = manifest_field(&mut lines, "field")?.parse()?;
    let verified: Verified = manifest_field(&mut lines, "verified")?.parse()?;
    let threshold = parse_usize(manifest_field(&mut lines, "threshold")?, "threshold")?;
    let points_line = manifest_field(&mut lines, "points")?;
    if lines.next().is_some() {
        return Err(Error::MalformedManifest("trailing lines".into()));
    }
    let params = CodeParams::new(scheme, m, p, n, spec)?;
    if threshold != params.threshold() {
        return Err(Error::MalformedManifest(format!(
            "threshold {} does not match the scheme's {}",
            threshold,
            params.threshold()
        )));
    }
    let mut points = Vec::new();
    for token in points_line.split(' ') {
        points.push(parse_point(&spec, token)?);
    }
    if points.len() != n {
        return Err(Error::MalformedManifest(format!(
            "expected {} points, got {}",
            n,
            points.len()
        )));
    }
    for (i, pt) in points.iter().enumerate() {
        if points[i + 1..].contains(pt) {
            return Err(Error::ConstraintViolated(format!("repeated point {pt}")));
        }
    }
    if scheme == Scheme::Fpc && m == 1 {
        for (i, a) in points.iter().enumerate() {
            for b in &points[i..] {
                if a.mul(b).is_one() {
                    return Err(Error::ConstraintViolated(format!(
                        "points {a} and {b} multiply to 1"
                    )));
                }
            }
        }
    }
    Ok(CodeInstance {
        params,
        points,
        verified,
    })
}

fn parse_point(spec: &FieldSpec, token: &str) -> Result<FieldElement> {
    let bad = || Error::MalformedManifest(format!("bad point token {token:?}"));
    match spec {
        FieldSpec::Prime { q } => {
            let v: u64 = token.parse().map_err(|_| bad())?;
            if v >= *q {
                return Err(Error::MalformedManifest(format!(
                    "point {v} is not a residue mod {q}"
                )));
            }
            Ok(spec.from_u64(v))
        }
        FieldSpec::Binary { w } => {
            let v: u64 = token.parse().map_err(|_| bad())?;
            if *w < 64 && v >= (1u64 << w) {
                return Err(Error::MalformedManifest(format!(
                    "point {v} outside GF(2^{w})"
                )));
            }
            Ok(spec.from_u64(v))
        }
        FieldSpec::Rational => {
            let (numer, denom) = match token.split_once('/') {
                Some((a, b)) => (a, b),
                None => (token, "1"),
            };
            let n: i64 = numer.parse().map_err(|_| bad())?;
            let d: i64 = denom.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            spec.from_i64(n).div(&spec.from_i64(d))
        }
        FieldSpec::Real64 => {
            let v: f64 = token.parse().map_err(|_| bad())?;
            if !v.is_finite() {
                return Err(bad());
            }
            spec.from_f64(v)
        }
    }
}

/// Raise `x^e`, charging every executed multiply to `ops`.
pub(crate) fn pow_counted(x: &FieldElement, e: u64, ops: &mut OpCount) -> FieldElement {
    let mut result = x.spec().one();
    let mut base = x.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base);
            ops.mults += 1;
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
            ops.mults += 1;
        }
    }
    result
}

/// Counted sparse-Horner evaluation of a term polynomial.
pub(crate) fn eval_poly_counted(
    poly: &crate::folded::TermPoly,
    x: &FieldElement,
    ops: &mut OpCount,
) -> FieldElement {
    let mut rev = poly.terms().iter().rev();
    let Some((top_e, top_c)) = rev.next() else {
        return x.spec().zero();
    };
    let mut acc = top_c.clone();
    let mut exp = *top_e;
    for (e, c) in rev {
        acc = acc.mul(&pow_counted(x, exp - e, ops)).add(c);
        ops.mults += 1;
        ops.adds += 1;
        exp = *e;
    }
    if exp > 0 {
        acc = acc.mul(&pow_counted(x, exp, ops));
        ops.mults += 1;
    }
    acc
}

/// Counted collocation matrix: entry (i, j) = polys[j](points[i]), one row
/// per evaluation point, matching [`crate::folded::eval_matrix`].
pub(crate) fn eval_matrix_counted(
    polys: &[crate::folded::TermPoly],
    points: &[FieldElement],
    spec: &FieldSpec,
    ops: &mut OpCount,
) -> DenseMatrix {
    let mut out = DenseMatrix::zeros(*spec, points.len(), polys.len());
    for (i, pt) in points.iter().enumerate() {
        for (j, poly) in polys.iter().enumerate() {
            out.set(i, j, eval_poly_counted(poly, pt, ops));
        }
    }
    out
}

/// Shared decode preamble: take the first `r` results by arrival order,
/// reject duplicates and unknown worker ids, and return them sorted by
/// worker id together with their evaluation points.
pub(crate) fn recovery_slice<'a>(
    results: &'a [WorkerResult],
    instance: &CodeInstance,
    r: usize,
) -> Result<(Vec<&'a WorkerResult>, Vec<FieldElement>)> {
    if results.len() < r {
        return Err(Error::InsufficientResults {
            needed: r,
            got: results.len(),
        });
    }
    let mut used: Vec<&WorkerResult> = results[..r].iter().collect();
    used.sort_by_key(|res| res.worker_id);
    let n = instance.params.n;
    for pair in used.windows(2) {
        if pair[0].worker_id == pair[1].worker_id {
            return Err(Error::InvalidParams(format!(
                "duplicate result from worker {}",
                pair[0].worker_id
            )));
        }
    }
    let mut points = Vec::with_capacity(r);
    for res in &used {
        if res.worker_id == 0 || res.worker_id > n {
            return Err(Error::InvalidParams(format!(
                "worker id {} outside [1, {}]",
                res.worker_id, n
            )));
        }
        points.push(instance.points[res.worker_id - 1].clone());
    }
    Ok((used, points))
}

/// Check that every used product is square and of one common size, and
/// return that size.
pub(crate) fn common_block_dim(used: &[&WorkerResult]) -> Result<usize> {
    let mut dim = None;
    for res in used {
        if res.product.rows() != res.product.cols() {
            return Err(Error::ShapeMismatch(format!(
                "worker {} returned a {}x{} product, expected square",
                res.worker_id,
                res.product.rows(),
                res.product.cols()
            )));
        }
        match dim {
            None => dim = Some(res.product.rows()),
            Some(d) if d != res.product.rows() => {
                return Err(Error::ShapeMismatch(format!(
                    "worker {} returned a {}x{} product, expected {d}x{d}",
                    res.worker_id,
                    res.product.rows(),
                    res.product.cols()
                )))
            }
            _ => {}
        }
    }
    dim.ok_or_else(|| Error::InsufficientResults { needed: 1, got: 0 })
}

pub(crate) fn factor_or_singular(
    m: &DenseMatrix,
    ops: &mut OpCount,
) -> Result<crate::linalg::LuFactors> {
    lu_factor(m, ops).map_err(|e| match e {
        Error::SingularMatrix => Error::SingularRecoverySubset,
        other => other,
    })
}
