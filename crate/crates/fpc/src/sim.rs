//! Deterministic master/worker straggler simulation.
//!
//! Worker products are genuinely computed (in parallel), but time is
//! simulated in abstract cost units: a worker's finish time is its multiply
//! count times `base_unit`, jittered, and multiplied by `slowdown` if the
//! worker is a designated straggler. An infinite slowdown models fail-stop
//! workers that never answer. All randomness is seeded, so runs with equal
//! inputs produce identical reports.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codes::{
    decode_with_stats, encode, worker_compute, CodeInstance, Scheme, WorkerResult,
};
use crate::error::{Error, Result};
use crate::field::{sample_distinct_points, FieldSpec, PointConstraint};
use crate::folded::{antisymmetric_m1_basis, eval_matrix, symmetric_m1_basis};
use crate::linalg::{condition_number, DenseMatrix};

pub const CSV_HEADER: &str =
    "scheme,m,p,N,s,R,overall_time,worker_time_avg,decode_time,decode_mults,decode_adds,worst_cond,status";

#[derive(Debug, Clone)]
pub struct LatencyModel {
    /// Abstract time per field multiply-add of worker (and decode) work.
    pub base_unit: f64,
    pub straggler_ids: BTreeSet<usize>,
    /// Slowdown factor for stragglers; `f64::INFINITY` means fail-stop.
    pub slowdown: f64,
    /// Relative uniform noise amplitude in [0, 1): each worker's time is
    /// scaled by 1 + jitter * u with u drawn per worker id from `seed`, so
    /// a worker's draw does not depend on which workers straggle.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            base_unit: 1.0,
            straggler_ids: BTreeSet::new(),
            slowdown: 5.0,
            jitter: 0.0,
            seed: 0,
        }
    }
}

impl LatencyModel {
    fn finish_time(&self, worker_id: usize, work: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(worker_id as u64);
        let u: f64 = rng.gen_range(-1.0..1.0);
        let mut t = work as f64 * self.base_unit * (1.0 + self.jitter * u);
        if self.straggler_ids.contains(&worker_id) {
            t *= self.slowdown;
        }
        t
    }
}

/// Field multiplies one worker spends on its block product.
pub fn worker_multiply_count(mu: usize, nu: usize, m: usize, p: usize) -> u64 {
    let b = (mu / m) as u64;
    b * b * (nu / p) as u64
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scheme: Scheme,
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub straggler_count: usize,
    pub threshold: usize,
    /// (worker_id, finish time) for every worker, id-ascending; infinite
    /// for fail-stop stragglers.
    pub finish_times: Vec<(usize, f64)>,
    /// Worker ids of the recovery subset in arrival order.
    pub recovery_subset: Vec<usize>,
    pub overall_time: f64,
    pub worker_time_avg: f64,
    pub decode_time: f64,
    pub worker_multiply_count: u64,
    pub decode_multiply_count: u64,
    pub decode_add_count: u64,
    /// Condition numbers of the factorized decode matrices (real64 only).
    pub conds: Vec<f64>,
}

impl RunReport {
    pub fn worst_cond(&self) -> Option<f64> {
        self.conds
            .iter()
            .copied()
            .fold(None, |acc, c| Some(acc.map_or(c, |a: f64| a.max(c))))
    }

    pub fn to_row(&self) -> SweepRow {
        SweepRow {
            scheme: self.scheme.to_string(),
            m: self.m,
            p: self.p,
            n: self.n,
            s: self.straggler_count,
            r: self.threshold,
            overall_time: Some(self.overall_time),
            worker_time_avg: Some(self.worker_time_avg),
            decode_time: Some(self.decode_time),
            decode_mults: Some(self.decode_multiply_count),
            decode_adds: Some(self.decode_add_count),
            worst_cond: self.worst_cond(),
            status: "ok".into(),
        }
    }
}

/// One CSV row of a sweep; `None` fields serialize as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: String,
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub s: usize,
    pub r: usize,
    pub overall_time: Option<f64>,
    pub worker_time_avg: Option<f64>,
    pub decode_time: Option<f64>,
    pub decode_mults: Option<u64>,
    pub decode_adds: Option<u64>,
    pub worst_cond: Option<f64>,
    pub status: String,
}

impl SweepRow {
    fn failure(instance: &CodeInstance, s: usize, status: &str) -> Self {
        SweepRow {
            scheme: instance.params.scheme.to_string(),
            m: instance.params.m,
            p: instance.params.p,
            n: instance.params.n,
            s,
            r: instance.threshold(),
            overall_time: None,
            worker_time_avg: None,
            decode_time: None,
            decode_mults: None,
            decode_adds: None,
            worst_cond: None,
            status: status.into(),
        }
    }

    pub fn csv(&self) -> String {
        fn cell<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.m,
            self.p,
            self.n,
            self.s,
            self.r,
            cell(&self.overall_time),
            cell(&self.worker_time_avg),
            cell(&self.decode_time),
            cell(&self.decode_mults),
            cell(&self.decode_adds),
            cell(&self.worst_cond),
            self.status
        )
    }
}

/// Run the full protocol once and report timing under the latency model.
pub fn run_distributed(
    a: &DenseMatrix,
    instance: &CodeInstance,
    latency: &LatencyModel,
) -> Result<(DenseMatrix, RunReport)> {
    let params = &instance.params;
    let n = params.n;
    for &id in &latency.straggler_ids {
        if id == 0 || id > n {
            return Err(Error::InvalidParams(format!(
                "straggler id {id} outside [1, {n}]"
            )));
        }
    }
    let r = instance.threshold();
    let survivors = n - latency.straggler_ids.len();
    if latency.slowdown.is_infinite() && survivors < r {
        return Err(Error::StragglerOverload {
            survivors,
            threshold: r,
        });
    }
    let tasks = encode(a, instance)?;
    let mut results: Vec<WorkerResult> = tasks
        .par_iter()
        .map(worker_compute)
        .collect::<Result<_>>()?;

    let work = worker_multiply_count(a.rows(), a.cols(), params.m, params.p);
    let finish_times: Vec<(usize, f64)> = (1..=n)
        .map(|id| (id, latency.finish_time(id, work)))
        .collect();
    // Arrival order: finish time, ties by worker id; unfinished last.
    results.sort_by(|x, y| {
        let tx = finish_times[x.worker_id - 1].1;
        let ty = finish_times[y.worker_id - 1].1;
        tx.partial_cmp(&ty)
            .unwrap()
            .then(x.worker_id.cmp(&y.worker_id))
    });
    let subset: Vec<usize> = results[..r.min(results.len())]
        .iter()
        .map(|res| res.worker_id)
        .collect();
    if subset
        .iter()
        .any(|&id| finish_times[id - 1].1.is_infinite())
    {
        return Err(Error::StragglerOverload {
            survivors,
            threshold: r,
        });
    }

    let (product, stats) = decode_with_stats(&results, instance)?;
    let arrival = subset
        .iter()
        .map(|&id| finish_times[id - 1].1)
        .fold(0.0_f64, f64::max);
    let decode_time = (stats.ops.mults + stats.ops.adds) as f64 * latency.base_unit;
    let worker_time_avg =
        subset.iter().map(|&id| finish_times[id - 1].1).sum::<f64>() / r as f64;
    let report = RunReport {
        scheme: params.scheme,
        m: params.m,
        p: params.p,
        n,
        straggler_count: latency.straggler_ids.len(),
        threshold: r,
        finish_times,
        recovery_subset: subset,
        overall_time: arrival + decode_time,
        worker_time_avg,
        decode_time,
        worker_multiply_count: work,
        decode_multiply_count: stats.ops.mults,
        decode_add_count: stats.ops.adds,
        conds: stats.conds,
    };
    Ok((product, report))
}

/// Seeded permutation of worker ids 1..=n; straggler sets of growing size
/// are prefixes of it, so they grow by inclusion.
pub fn seeded_straggler_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        ids.swap(i, j);
    }
    ids
}

fn status_of(err: &Error) -> &'static str {
    match err {
        Error::StragglerOverload { .. } => "overload",
        Error::InsufficientResults { .. } => "insufficient",
        Error::SingularRecoverySubset => "singular",
        other => other.class(),
    }
}

/// One row per (straggler count, instance). Stragglers with count s are the
/// first s entries of the seeded permutation shared across all instances,
/// so rows are comparable across schemes. Failures become status rows.
pub fn sweep_stragglers(
    a: &DenseMatrix,
    instances: &[CodeInstance],
    s_range: &[usize],
    latency: &LatencyModel,
) -> Result<Vec<SweepRow>> {
    let Some(first) = instances.first() else {
        return Ok(Vec::new());
    };
    let n = first.params.n;
    if instances.iter().any(|inst| inst.params.n != n) {
        return Err(Error::InvalidParams(
            "sweep instances must share one worker count".into(),
        ));
    }
    let perm = seeded_straggler_permutation(n, latency.seed);
    let mut rows = Vec::new();
    for &s in s_range {
        if s > n {
            return Err(Error::InvalidParams(format!(
                "cannot pick {s} stragglers out of {n} workers"
            )));
        }
        let ids: BTreeSet<usize> = perm[..s].iter().copied().collect();
        for instance in instances {
            let model = LatencyModel {
                straggler_ids: ids.clone(),
                ..latency.clone()
            };
            let row = match run_distributed(a, instance, &model) {
                Ok((_, report)) => report.to_row(),
                Err(err) => SweepRow::failure(instance, s, status_of(&err)),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointMode {
    Chebyshev,
    RandomBestOf20,
}

/// Chebyshev points cos((2i-1)pi / 2n), i = 1..n; all lie strictly inside
/// (-1, 1) and are pairwise distinct with no two multiplying to 1.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| ((2 * i - 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

/// Worst-case conditioning of the m = 1 decode systems over every recovery
/// subset of the given points: the p x p symmetric-basis matrix on the full
/// subset and the (p-1)-point antisymmetric-basis matrix on its prefix.
fn worst_condition(p: usize, points: &[f64]) -> Result<f64> {
    let spec = FieldSpec::real64();
    let elems: Vec<_> = points
        .iter()
        .map(|&x| spec.from_f64(x))
        .collect::<Result<_>>()?;
    let sym = symmetric_m1_basis(p, &spec);
    let anti = antisymmetric_m1_basis(p, &spec);
    let mut worst = 0.0_f64;
    for subset in super::codes::all_subsets(points.len(), p) {
        let pts: Vec<_> = subset.iter().map(|&i| elems[i].clone()).collect();
        let m_sym = eval_matrix(&sym, &pts)?;
        worst = worst.max(condition_number(&m_sym)?);
        if p >= 2 {
            let m_anti = eval_matrix(&anti, &pts[..p - 1])?;
            worst = worst.max(condition_number(&m_anti)?);
        }
    }
    Ok(worst)
}

/// Condition-number sweep over p for the m = 1 folded code on real64.
///
/// `n_rule` maps p to the point count N; `s` is recorded in the output for
/// provenance (callers typically use N = p + s). Chebyshev mode evaluates
/// one deterministic point set per p; random mode draws `trials` seeded
/// sets and keeps the one with minimal worst condition number.
pub fn condition_sweep(
    p_range: &[usize],
    s: usize,
    n_rule: &dyn Fn(usize) -> usize,
    trials: usize,
    mode: PointMode,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let spec = FieldSpec::real64();
    let mut rows = Vec::new();
    for &p in p_range {
        if p == 0 {
            return Err(Error::InvalidParams("p must be at least 1".into()));
        }
        let n = n_rule(p);
        if n < p {
            return Err(Error::InvalidParams(format!(
                "N = {n} points cannot cover recovery subsets of size {p}"
            )));
        }
        let worst = match mode {
            PointMode::Chebyshev => worst_condition(p, &chebyshev_points(n))?,
            PointMode::RandomBestOf20 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut best = f64::INFINITY;
                for _ in 0..trials.max(1) {
                    let pts = sample_distinct_points(
                        &spec,
                        n,
                        PointConstraint::NoReciprocalPairs,
                        rng.gen(),
                    )?;
                    let raw: Vec<f64> = pts
                        .iter()
                        .map(|x| x.as_f64().expect("real64 sampling yields reals"))
                        .collect();
                    best = best.min(worst_condition(p, &raw)?);
                }
                best
            }
        };
        rows.push(SweepRow {
            scheme: Scheme::Fpc.to_string(),
            m: 1,
            p,
            n,
            s,
            r: p,
            overall_time: None,
            worker_time_avg: None,
            decode_time: None,
            decode_mults: None,
            decode_adds: None,
            worst_cond: Some(worst),
            status: "ok".into(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_points_are_valid() {
        let pts = chebyshev_points(9);
        assert_eq!(pts.len(), 9);
        for (i, a) in pts.iter().enumerate() {
            assert!(a.abs() < 1.0);
            for b in &pts[i + 1..] {
                assert!(a != b);
                assert!((a * b - 1.0).abs() > 1e-12);
            }
        }
    }

    #[test]
    fn straggler_permutation_is_a_permutation() {
        let perm = seeded_straggler_permutation(18, 3);
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (1..=18).collect::<Vec<_>>());
        assert_eq!(perm, seeded_straggler_permutation(18, 3));
    }
}
