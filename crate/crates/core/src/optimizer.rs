//! Exhaustive tiling search: stream covers from the enumerator, score each
//! one against every cached drop channel, keep the best one that meets
//! coverage.
//!
//! A producer thread runs the enumerator and hands chunks of covers to the
//! caller's thread, which evaluates each chunk on a rayon pool. Results are
//! collected in enumeration order, so the ledger and the selected tiling do
//! not depend on scheduling.

use std::path::PathBuf;
use std::sync::mpsc::sync_channel;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{aggregate_channel, ChannelMatrix, ChannelSource, LinkBudget};
use crate::error::{Error, Result};
use crate::ledger::{LedgerHeader, LedgerRow, LedgerWriter};
use crate::linalg;
use crate::metrics::{average_capacity, port_powers, sum_rate, EvaluationRecord, PortPowerReport};
use crate::scenario::{drops_fingerprint, UeDrop};
use crate::tiling::AggregationVector;
use crate::zf::{normalize_beams, zero_forcing, PrecodingMatrix, ZfOptions};

/// Channels of every drop plus the link constants, shared read-only by all
/// evaluations.
#[derive(Debug, Clone)]
pub struct EvaluationContext {
    channels: Vec<ChannelMatrix>,
    budget: LinkBudget,
    zf: ZfOptions,
    drop_set: String,
}

impl EvaluationContext {
    pub fn new(
        channels: Vec<ChannelMatrix>,
        budget: LinkBudget,
        zf: ZfOptions,
        drop_set: String,
    ) -> Result<Self> {
        let first = channels.first().ok_or(Error::Empty("drop channels"))?;
        let shape = first.matrix().shape();
        if let Some(bad) = channels.iter().find(|g| g.matrix().shape() != shape) {
            return Err(Error::Dimension(format!(
                "drop {} channel is {:?}, expected {:?}",
                bad.drop,
                bad.matrix().shape(),
                shape
            )));
        }
        Ok(Self {
            channels,
            budget,
            zf,
            drop_set,
        })
    }

    /// Build every drop's channel exactly once.
    pub fn assemble<S: ChannelSource + ?Sized>(
        source: &S,
        drops: &[UeDrop],
        budget: LinkBudget,
        zf: ZfOptions,
    ) -> Result<Self> {
        let channels = drops
            .iter()
            .map(|d| source.channel(d))
            .collect::<Result<Vec<_>>>()?;
        Self::new(channels, budget, zf, drops_fingerprint(drops))
    }

    pub fn channels(&self) -> &[ChannelMatrix] {
        &self.channels
    }

    pub fn budget(&self) -> &LinkBudget {
        &self.budget
    }

    pub fn zf_options(&self) -> &ZfOptions {
        &self.zf
    }

    pub fn drop_set(&self) -> &str {
        &self.drop_set
    }

    pub fn port_count(&self) -> usize {
        self.channels[0].port_count()
    }

    pub fn element_count(&self) -> usize {
        self.channels[0].element_count()
    }
}

/// Everything computed for one drop under one tiling.
#[derive(Debug, Clone, PartialEq)]
pub struct DropOutcome {
    pub reports: Vec<PortPowerReport>,
    pub precoder: PrecodingMatrix,
}

impl DropOutcome {
    pub fn sum_rate(&self) -> f64 {
        sum_rate(&self.reports)
    }

    /// Capacity of each UE, both of its ports summed.
    pub fn ue_capacities(&self) -> Vec<f64> {
        self.reports
            .chunks(2)
            .map(|pair| pair.iter().map(PortPowerReport::capacity).sum())
            .collect()
    }
}

/// Aggregate, zero-force, normalize and split powers for one drop. Every
/// transmitted beam gets `Psi / B` with `B = U`, the number of beams per
/// polarization.
pub fn evaluate_drop(
    g: &ChannelMatrix,
    s: &AggregationVector,
    budget: &LinkBudget,
    zf: &ZfOptions,
) -> Result<DropOutcome> {
    let h = aggregate_channel(g, s)?;
    let v = normalize_beams(&zero_forcing(&h, zf)?, s)?;
    let hv = linalg::mul(h.matrix(), v.matrix());
    let ports = g.port_count();
    let beams = ports / 2;
    let reports = (0..ports).map(|a| port_powers(&hv, budget, beams, a)).collect();
    Ok(DropOutcome { reports, precoder: v })
}

/// A tiling with its record and per-drop detail.
#[derive(Debug, Clone, PartialEq)]
pub struct TilingEvaluation {
    pub tiling: AggregationVector,
    pub record: EvaluationRecord,
    /// `None` where zero forcing failed for that drop.
    pub outcomes: Vec<Option<DropOutcome>>,
}

impl TilingEvaluation {
    /// Per-UE capacities over all feasible drops, drop-major.
    pub fn ue_capacities(&self) -> Vec<f64> {
        self.outcomes
            .iter()
            .flatten()
            .flat_map(DropOutcome::ue_capacities)
            .collect()
    }
}

fn is_numerical_failure(e: &Error) -> bool {
    matches!(e, Error::IllConditioned { .. } | Error::ZeroColumn(_))
}

pub fn evaluate_tiling_detailed(
    t: u64,
    s: &AggregationVector,
    ctx: &EvaluationContext,
) -> Result<TilingEvaluation> {
    if s.labels().len() != ctx.element_count() {
        return Err(Error::Dimension(format!(
            "tiling covers {} pixels, array has {} elements",
            s.labels().len(),
            ctx.element_count()
        )));
    }
    let ports = ctx.port_count();
    let mut outcomes = Vec::with_capacity(ctx.channels.len());
    let mut drop_sum_rates = Vec::with_capacity(ctx.channels.len());
    let mut infeasible_drops = Vec::new();
    let mut port_min_power = vec![f64::INFINITY; ports];
    for (p, g) in ctx.channels.iter().enumerate() {
        match evaluate_drop(g, s, &ctx.budget, &ctx.zf) {
            Ok(o) => {
                for (m, r) in port_min_power.iter_mut().zip(&o.reports) {
                    *m = m.min(r.desired);
                }
                drop_sum_rates.push(o.sum_rate());
                outcomes.push(Some(o));
            }
            Err(e) if is_numerical_failure(&e) => {
                drop_sum_rates.push(f64::NAN);
                infeasible_drops.push(p);
                outcomes.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    let feasible: Vec<f64> = drop_sum_rates.iter().copied().filter(|c| !c.is_nan()).collect();
    let average = average_capacity(&feasible).unwrap_or(f64::NAN);
    let min_desired = port_min_power.iter().copied().fold(f64::INFINITY, f64::min);
    let coverage = !feasible.is_empty() && min_desired >= ctx.budget.coverage_threshold;
    let record = EvaluationRecord {
        t,
        drop_sum_rates,
        average_capacity: average,
        min_desired_power: min_desired,
        coverage,
        port_min_power,
        infeasible_drops,
        drop_set: ctx.drop_set.clone(),
    };
    Ok(TilingEvaluation {
        tiling: s.clone(),
        record,
        outcomes,
    })
}

pub fn evaluate_tiling(t: u64, s: &AggregationVector, ctx: &EvaluationContext) -> Result<EvaluationRecord> {
    Ok(evaluate_tiling_detailed(t, s, ctx)?.record)
}

#[derive(Debug, Clone)]
pub struct LedgerOutput {
    pub path: PathBuf,
    pub header: LedgerHeader,
    /// Continue an existing ledger at `path` instead of truncating it.
    pub resume: bool,
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Covers handed to the pool at a time.
    pub chunk_size: usize,
    /// Evaluate tilings `t = 1, 1 + stride, ...`; 1 is exhaustive.
    pub stride: usize,
    pub ledger: Option<LedgerOutput>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            workers: 0,
            chunk_size: 2048,
            stride: 1,
            ledger: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    /// Covers produced by the enumerator.
    pub total_tilings: u64,
    pub stride: usize,
    /// One row per evaluated tiling, ascending `t`.
    pub ledger: Vec<LedgerRow>,
    /// Best tiling among those meeting coverage with every drop solved.
    pub best: Option<TilingEvaluation>,
    /// Best tiling ignoring coverage, kept for diagnosis.
    pub unconstrained_best: Option<TilingEvaluation>,
    pub baseline: TilingEvaluation,
    pub drop_set: String,
}

impl OptimizationResult {
    pub fn exhaustive(&self) -> bool {
        self.stride == 1
    }

    pub fn is_infeasible(&self) -> bool {
        self.best.is_none()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Leader {
    t: u64,
    capacity: f64,
}

impl Leader {
    fn offer(slot: &mut Option<Leader>, row: &LedgerRow) {
        // strict improvement only: equal capacity keeps the earlier tiling
        if slot.is_none_or(|l| row.capacity > l.capacity) {
            *slot = Some(Leader {
                t: row.t,
                capacity: row.capacity,
            });
        }
    }
}

fn track(best: &mut Option<Leader>, unconstrained: &mut Option<Leader>, row: &LedgerRow) {
    if row.feasible && !row.capacity.is_nan() {
        Leader::offer(unconstrained, row);
        if row.coverage {
            Leader::offer(best, row);
        }
    }
}

/// Score every cover in `covers` and select the constrained argmax.
///
/// `baseline` is scored on the same channels. `progress` is called after each
/// chunk with the number of tilings seen so far.
pub fn optimize<I, F>(
    covers: I,
    baseline: &AggregationVector,
    ctx: &EvaluationContext,
    options: &OptimizeOptions,
    mut progress: F,
) -> Result<OptimizationResult>
where
    I: Iterator<Item = AggregationVector> + Send,
    F: FnMut(u64),
{
    let stride = options.stride.max(1) as u64;
    let chunk = options.chunk_size.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let baseline_eval = pool.install(|| evaluate_tiling_detailed(0, baseline, ctx))?;

    let (mut writer, mut ledger) = match &options.ledger {
        None => (None, Vec::new()),
        Some(out) if out.resume => {
            let (w, rows) = LedgerWriter::resume(&out.path, &out.header)?;
            (Some(w), rows)
        }
        Some(out) => (Some(LedgerWriter::create(&out.path, &out.header)?), Vec::new()),
    };
    let done = ledger.last().map_or(0, |r| r.t);
    let mut best = None;
    let mut unconstrained = None;
    for row in &ledger {
        track(&mut best, &mut unconstrained, row);
    }
    let mut best_tiling: Option<AggregationVector> = None;
    let mut unconstrained_tiling: Option<AggregationVector> = None;
    let mut total = 0u64;

    let outcome = std::thread::scope(|scope| -> Result<()> {
        let (tx, rx) = sync_channel::<Vec<(u64, AggregationVector)>>(4);
        let producer = scope.spawn(move || {
            let mut seen = 0u64;
            let mut buf = Vec::with_capacity(chunk);
            for s in covers {
                seen += 1;
                if !(seen - 1).is_multiple_of(stride) {
                    continue;
                }
                buf.push((seen, s));
                if buf.len() == chunk && tx.send(std::mem::take(&mut buf)).is_err() {
                    return seen;
                }
            }
            if !buf.is_empty() {
                let _ = tx.send(buf);
            }
            seen
        });

        for batch in rx {
            let last_t = batch.last().map_or(0, |(t, _)| *t);
            // rows before `done` come from the checkpoint; only their tilings
            // are needed, to recover the leaders' layouts
            for (t, s) in batch.iter().filter(|(t, _)| *t <= done) {
                if best.is_some_and(|l| l.t == *t) {
                    best_tiling = Some(s.clone());
                }
                if unconstrained.is_some_and(|l| l.t == *t) {
                    unconstrained_tiling = Some(s.clone());
                }
            }
            let pending: Vec<&(u64, AggregationVector)> = batch.iter().filter(|(t, _)| *t > done).collect();
            let records: Vec<EvaluationRecord> = pool.install(|| {
                pending
                    .par_iter()
                    .map(|(t, s)| evaluate_tiling(*t, s, ctx))
                    .collect::<Result<Vec<_>>>()
            })?;
            let rows: Vec<LedgerRow> = records.iter().map(LedgerRow::from).collect();
            for ((_, s), row) in pending.iter().zip(&rows) {
                let before = (best.map(|l| l.t), unconstrained.map(|l| l.t));
                track(&mut best, &mut unconstrained, row);
                if best.map(|l| l.t) != before.0 {
                    best_tiling = Some(s.clone());
                }
                if unconstrained.map(|l| l.t) != before.1 {
                    unconstrained_tiling = Some(s.clone());
                }
            }
            if let Some(w) = writer.as_mut() {
                w.append(&rows)?;
            }
            ledger.extend(rows);
            progress(last_t);
        }
        total = producer
            .join()
            .map_err(|_| Error::Config("tiling enumerator panicked".into()))?;
        Ok(())
    });
    outcome?;

    if let Some(last) = ledger.last() {
        if last.t > total {
            return Err(Error::Config(format!(
                "checkpoint has tiling {} but the enumerator produced {}",
                last.t, total
            )));
        }
    }

    let detail =
        |leader: Option<Leader>, tiling: Option<AggregationVector>| -> Result<Option<TilingEvaluation>> {
            match (leader, tiling) {
                (Some(l), Some(s)) => Ok(Some(pool.install(|| evaluate_tiling_detailed(l.t, &s, ctx))?)),
                (Some(l), None) => Err(Error::Config(format!("tiling {} missing from enumeration", l.t))),
                _ => Ok(None),
            }
        };
    let best = detail(best, best_tiling)?;
    let unconstrained_best = detail(unconstrained, unconstrained_tiling)?;

    Ok(OptimizationResult {
        total_tilings: total,
        stride: stride as usize,
        ledger,
        best,
        unconstrained_best,
        baseline: baseline_eval,
        drop_set: ctx.drop_set.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineComparison {
    pub baseline_capacity: f64,
    pub best_capacity: Option<f64>,
    /// `(best - baseline) / baseline`, as a fraction.
    pub delta: Option<f64>,
    /// Feasible tilings with capacity strictly above the baseline.
    pub beating: u64,
    /// Of those, the ones that also meet coverage.
    pub beating_with_coverage: u64,
    pub evaluated: u64,
}

impl BaselineComparison {
    pub fn beating_fraction(&self) -> f64 {
        if self.evaluated == 0 {
            0.0
        } else {
            self.beating as f64 / self.evaluated as f64
        }
    }
}

pub fn compare_to_baseline(
    result: &OptimizationResult,
    baseline: &EvaluationRecord,
) -> Result<BaselineComparison> {
    if result.drop_set != baseline.drop_set {
        return Err(Error::Config(format!(
            "baseline was evaluated on drop set {}, result on {}",
            baseline.drop_set, result.drop_set
        )));
    }
    let c = baseline.average_capacity;
    let best = result.best.as_ref().map(|b| b.record.average_capacity);
    let beats = |r: &&LedgerRow| r.feasible && r.capacity > c;
    Ok(BaselineComparison {
        baseline_capacity: c,
        best_capacity: best,
        delta: best.map(|b| (b - c) / c),
        beating: result.ledger.iter().filter(beats).count() as u64,
        beating_with_coverage: result.ledger.iter().filter(beats).filter(|r| r.coverage).count() as u64,
        evaluated: result.ledger.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CMatrix;
    use crate::tiling::{enumerate_exact_covers, Alphabet, AlphabetEntry, Aperture, PolyominoShape};
    use num_complex::Complex64;

    /// Two UEs, a 3x2 aperture of six elements, random channels.
    fn toy_context(threshold: f64) -> EvaluationContext {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut channels = Vec::new();
        for p in 0..2 {
            let g = CMatrix::from_fn(4, 12, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 1e-4
            });
            channels.push(ChannelMatrix::new(p, "synthetic", g).unwrap());
        }
        let budget = LinkBudget::new(1.0, 1e-9, threshold).unwrap();
        EvaluationContext::new(channels, budget, ZfOptions::default(), "toy".into()).unwrap()
    }

    fn domino_covers() -> Vec<AggregationVector> {
        let a = Aperture::new(3, 2).unwrap();
        let alpha = Alphabet::new(vec![AlphabetEntry::new(PolyominoShape::domino(0), true, true)]).unwrap();
        enumerate_exact_covers(&alpha.incidence_matrix(&a).unwrap(), a).collect()
    }

    #[test]
    fn picks_hand_checked_argmax() {
        let ctx = toy_context(1e-30);
        let covers = domino_covers();
        let caps: Vec<f64> = covers
            .iter()
            .enumerate()
            .map(|(k, s)| evaluate_tiling(k as u64 + 1, s, &ctx).unwrap().average_capacity)
            .collect();
        let mut want = 0;
        for k in 1..caps.len() {
            if caps[k] > caps[want] {
                want = k;
            }
        }
        let r = optimize(
            covers.clone().into_iter(),
            &covers[0],
            &ctx,
            &OptimizeOptions::default(),
            |_| {},
        )
        .unwrap();
        assert_eq!(r.ledger.len(), 3);
        assert_eq!(r.total_tilings, 3);
        let best = r.best.unwrap();
        assert_eq!(best.record.t, want as u64 + 1);
        assert_eq!(best.tiling, covers[want]);
    }

    #[test]
    fn no_covering_tiling_is_reported_infeasible() {
        let ctx = toy_context(1.0);
        let covers = domino_covers();
        let r = optimize(
            covers.clone().into_iter(),
            &covers[0],
            &ctx,
            &OptimizeOptions::default(),
            |_| {},
        )
        .unwrap();
        assert!(r.is_infeasible());
        assert!(r.unconstrained_best.is_some());
        assert!(r.ledger.iter().all(|row| !row.coverage));
    }

    #[test]
    fn stride_subsamples() {
        let ctx = toy_context(1e-30);
        let covers = domino_covers();
        let opts = OptimizeOptions {
            stride: 2,
            ..Default::default()
        };
        let r = optimize(covers.clone().into_iter(), &covers[0], &ctx, &opts, |_| {}).unwrap();
        assert_eq!(r.ledger.iter().map(|row| row.t).collect::<Vec<_>>(), vec![1, 3]);
        assert!(!r.exhaustive());
    }

    #[test]
    fn relabelled_tiling_scores_the_same() {
        let ctx = toy_context(1e-30);
        let s = &domino_covers()[1];
        let a = evaluate_tiling(1, s, &ctx).unwrap();
        let b = evaluate_tiling(1, &s.canonical(), &ctx).unwrap();
        assert!((a.average_capacity - b.average_capacity).abs() <= 1e-12 * a.average_capacity);
    }

    #[test]
    fn baseline_comparison_counts() {
        let ctx = toy_context(1e-30);
        let covers = domino_covers();
        let r = optimize(
            covers.clone().into_iter(),
            &covers[0],
            &ctx,
            &OptimizeOptions::default(),
            |_| {},
        )
        .unwrap();
        let c = compare_to_baseline(&r, &r.baseline.record).unwrap();
        let expected = r
            .ledger
            .iter()
            .filter(|row| row.capacity > r.baseline.record.average_capacity)
            .count();
        assert_eq!(c.beating as usize, expected);
        let mut other = r.baseline.record.clone();
        other.drop_set = "elsewhere".into();
        assert!(compare_to_baseline(&r, &other).is_err());
        // identical record
        let same = BaselineComparison { ..c };
        assert_eq!(same.evaluated, 3);
    }
}
