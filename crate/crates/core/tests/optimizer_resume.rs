use std::fs;
use std::io::Write;
use std::path::Path;

use tilecap_core::array::{ArrayGeometry, ElementPattern};
use tilecap_core::channel::{LinkBudget, LosChannel, Propagation};
use tilecap_core::ledger::{render_ledger, Ledger, LedgerHeader};
use tilecap_core::optimizer::{
    compare_to_baseline, evaluate_tiling, optimize, EvaluationContext, LedgerOutput, OptimizationResult,
    OptimizeOptions,
};
use tilecap_core::scenario::{generate_drops, ScenarioKind, ScenarioParams};
use tilecap_core::tiling::{baseline_tiling, enumerate_exact_covers, Alphabet, Aperture, IncidenceMatrix};
use tilecap_core::zf::ZfOptions;

fn setup() -> (Aperture, IncidenceMatrix, EvaluationContext) {
    let a = Aperture::new(6, 12).unwrap();
    let l = Alphabet::p_hexomino().incidence_matrix(&a).unwrap();
    let params = ScenarioParams::preset(ScenarioKind::Uma, 3, 6, 42);
    let drops = generate_drops(&params).unwrap();
    let src = LosChannel {
        geometry: ArrayGeometry::from_wavelengths(6, 12, 0.5, 0.7, 25.0, 3.5e9).unwrap(),
        pattern: ElementPattern::default(),
        propagation: Propagation::default(),
    };
    let budget = LinkBudget::from_dbm(43.0, -92.0, -120.0).unwrap();
    (
        a,
        l,
        EvaluationContext::assemble(&src, &drops, budget, ZfOptions::default()).unwrap(),
    )
}

fn header(ctx: &EvaluationContext, stride: usize) -> LedgerHeader {
    LedgerHeader {
        config_hash: "test".into(),
        seed: 42,
        drop_set: ctx.drop_set().into(),
        channel: "free-space-los".into(),
        stride,
    }
}

fn run(path: &Path, workers: usize, chunk: usize, stride: usize, resume: bool) -> OptimizationResult {
    let (a, l, ctx) = setup();
    let opts = OptimizeOptions {
        workers,
        chunk_size: chunk,
        stride,
        ledger: Some(LedgerOutput {
            path: path.to_path_buf(),
            header: header(&ctx, stride),
            resume,
        }),
    };
    optimize(
        enumerate_exact_covers(&l, a),
        &baseline_tiling(&a).unwrap(),
        &ctx,
        &opts,
        |_| {},
    )
    .unwrap()
}

#[test]
fn ledgers_do_not_depend_on_workers_or_chunking() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&dir.path().join("a.csv"), 1, 7, 1, false);
    let b = run(&dir.path().join("b.csv"), 3, 500, 1, false);
    assert_eq!(a.total_tilings, 4410);
    let fa = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(fa, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a.best.unwrap().record, b.best.unwrap().record);
    let parsed = Ledger::read(&dir.path().join("a.csv")).unwrap();
    assert_eq!(parsed.rows, a.ledger);
}

#[test]
fn best_is_the_first_strict_maximum_of_the_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let r = run(&dir.path().join("l.csv"), 0, 256, 1, false);
    let (_, l, ctx) = setup();
    let mut want: Option<(u64, f64)> = None;
    for row in r.ledger.iter().filter(|r| r.admissible() && !r.capacity.is_nan()) {
        if want.is_none_or(|(_, c)| row.capacity > c) {
            want = Some((row.t, row.capacity));
        }
    }
    let best = r.best.as_ref().unwrap();
    assert_eq!(Some((best.record.t, best.record.average_capacity)), want);
    // the stored layout really is tiling t
    let a = best.tiling.aperture();
    let nth = enumerate_exact_covers(&l, a)
        .nth(best.record.t as usize - 1)
        .unwrap();
    assert_eq!(nth, best.tiling);
    assert_eq!(evaluate_tiling(best.record.t, &nth, &ctx).unwrap(), best.record);
    let cmp = compare_to_baseline(&r, &r.baseline.record).unwrap();
    let beating = r
        .ledger
        .iter()
        .filter(|x| x.feasible && x.capacity > r.baseline.record.average_capacity)
        .count();
    assert_eq!(cmp.beating as usize, beating);
}

#[test]
fn interrupted_run_resumes_to_identical_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let full_path = dir.path().join("full.csv");
    let full = run(&full_path, 1, 64, 1, false);
    let full_bytes = fs::read_to_string(&full_path).unwrap();
    let (_, _, ctx) = setup();
    let best_t = full.best.as_ref().unwrap().record.t as usize;

    // cut before and after the leader so both recovery paths run
    for keep in [10, best_t.saturating_sub(1), best_t + 3, full.ledger.len() - 1] {
        let keep = keep.min(full.ledger.len());
        let path = dir.path().join(format!("cut{keep}.csv"));
        let mut partial = render_ledger(&header(&ctx, 1), &full.ledger[..keep]);
        partial.push_str("99999,12.5,-7"); // torn write
        fs::write(&path, partial).unwrap();
        let resumed = run(&path, 2, 100, 1, true);
        assert_eq!(fs::read_to_string(&path).unwrap(), full_bytes, "keep {keep}");
        assert_eq!(resumed.ledger, full.ledger);
        assert_eq!(resumed.best, full.best);
        assert_eq!(resumed.unconstrained_best, full.unconstrained_best);
    }

    // a finished ledger resumes to itself
    let again = run(&full_path, 1, 64, 1, true);
    assert_eq!(fs::read_to_string(&full_path).unwrap(), full_bytes);
    assert_eq!(again.best, full.best);
}

#[test]
fn resume_refuses_a_foreign_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let (a, l, ctx) = setup();
    let mut other = header(&ctx, 1);
    other.seed = 7;
    let mut f = fs::File::create(&path).unwrap();
    f.write_all(other.render().as_bytes()).unwrap();
    drop(f);
    let opts = OptimizeOptions {
        ledger: Some(LedgerOutput {
            path: path.clone(),
            header: header(&ctx, 1),
            resume: true,
        }),
        ..OptimizeOptions::default()
    };
    let r = optimize(
        enumerate_exact_covers(&l, a),
        &baseline_tiling(&a).unwrap(),
        &ctx,
        &opts,
        |_| {},
    );
    assert!(matches!(r, Err(tilecap_core::Error::Config(_))));
}

#[test]
fn strided_run_is_a_subsample_of_the_full_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = run(&dir.path().join("f.csv"), 1, 128, 1, false);
    let strided = run(&dir.path().join("s.csv"), 1, 128, 10, false);
    assert!(!strided.exhaustive());
    assert_eq!(strided.total_tilings, full.total_tilings);
    assert_eq!(strided.ledger.len(), 441);
    for row in &strided.ledger {
        assert_eq!(row.t % 10, 1);
        assert_eq!(*row, full.ledger[row.t as usize - 1]);
    }
}
