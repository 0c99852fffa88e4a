//! Subcommand implementations. Human-readable output goes to `out`; files go
//! under the configured output directory.

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::Serialize;
use tilecap_core::array::{expand_dual_weights, far_field, ArrayGeometry, ElementPattern, Polarization};
use tilecap_core::channel::{channel_to_json, ComplexTensor, PORT_ORDER, TILE_ORDER};
use tilecap_core::ledger::{Ledger, LedgerHeader, LedgerRow};
use tilecap_core::metrics::{distribution_in, summarize, Summary};
use tilecap_core::optimizer::{
    compare_to_baseline, evaluate_tiling_detailed, optimize, EvaluationContext, LedgerOutput,
    OptimizeOptions, TilingEvaluation,
};
use tilecap_core::scenario::{drops_to_json, generate_drops, UeDrop};
use tilecap_core::tiling::{baseline_tiling, count_exact_covers, enumerate_exact_covers, Alphabet};
use tilecap_core::units::linear_to_db;

use crate::config::RunConfig;
use crate::output::{
    load_tiling, to_json, write_file, ComparisonReport, ConfigurationReport, EvaluationDocument, Provenance,
    RunResult, TilingDocument,
};
use crate::render::{self, OrientationKey};
use crate::{ConfigError, Status};

pub const LEDGER_FILE: &str = "ledger.csv";
pub const RESULT_FILE: &str = "result.json";
pub const DISTRIBUTION_FILE: &str = "capacity_distribution.csv";
pub const DROPS_FILE: &str = "drops.json";

const LOS_NOTE: &str =
    "deterministic line-of-sight channel; capacities are not comparable to stochastic channel-model results";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFormat {
    Ascii,
    Json,
}

#[derive(Debug, Clone, Default)]
pub struct EnumerateOptions {
    pub dump: Option<DumpFormat>,
    /// Stop after this many tilings when dumping.
    pub limit: Option<u64>,
}

/// Count the tilings of the configured aperture and optionally write them out.
pub fn enumerate(cfg: &RunConfig, opts: &EnumerateOptions, out: &mut dyn Write) -> anyhow::Result<Status> {
    let aperture = cfg.aperture()?;
    let alphabet = cfg.alphabet()?;
    let l = alphabet
        .incidence_matrix(&aperture)
        .map_err(|e| ConfigError(e.to_string()))?;
    let total = count_exact_covers(&l);
    writeln!(
        out,
        "aperture {aperture}, {} placements, {total} tilings",
        l.row_count()
    )?;
    let Some(format) = opts.dump else {
        return Ok(if total == 0 {
            Status::Infeasible
        } else {
            Status::Ok
        });
    };
    let provenance = Provenance::new(cfg);
    let limit = opts.limit.unwrap_or(u64::MAX);
    let covers = enumerate_exact_covers(&l, aperture).take(limit.min(total) as usize);
    let path = match format {
        DumpFormat::Ascii => {
            let mut s = provenance.comment_lines("# ");
            for (k, t) in covers.enumerate() {
                s.push_str(&format!("# t={}\n", k + 1));
                s.push_str(&t.to_ascii());
                s.push('\n');
            }
            let p = cfg.run.output_dir.join("tilings.txt");
            write_file(&p, s)?;
            p
        }
        DumpFormat::Json => {
            #[derive(Serialize)]
            struct Dump {
                provenance: Provenance,
                columns: usize,
                rows: usize,
                tilings: Vec<Vec<u32>>,
            }
            let d = Dump {
                provenance,
                columns: aperture.columns(),
                rows: aperture.rows(),
                tilings: covers.map(|t| t.labels().to_vec()).collect(),
            };
            let p = cfg.run.output_dir.join("tilings.json");
            write_file(&p, serde_json::to_string(&d)?)?;
            p
        }
    };
    writeln!(out, "wrote {}", path.display())?;
    Ok(Status::Ok)
}

#[derive(Debug, Clone)]
pub struct OptimizeCommand {
    pub resume: bool,
    pub progress: bool,
    pub export_channels: bool,
    pub export_precoders: bool,
    pub bins: usize,
}

impl Default for OptimizeCommand {
    fn default() -> Self {
        Self {
            resume: false,
            progress: false,
            export_channels: false,
            export_precoders: false,
            bins: 20,
        }
    }
}

struct Prepared {
    drops: Vec<UeDrop>,
    ctx: EvaluationContext,
    geometry: ArrayGeometry,
    pattern: ElementPattern,
    provenance: Provenance,
}

fn prepare(cfg: &RunConfig) -> anyhow::Result<Prepared> {
    let params = cfg.scenario_params();
    params.validate().map_err(|e| ConfigError(e.to_string()))?;
    let drops = generate_drops(&params)?;
    let source = cfg.channel_source()?;
    let ctx = EvaluationContext::assemble(&source, &drops, cfg.budget()?, cfg.zf_options())?;
    let provenance = Provenance::new(cfg).with_drop_set(ctx.drop_set());
    Ok(Prepared {
        drops,
        ctx,
        geometry: source.geometry,
        pattern: source.pattern,
        provenance,
    })
}

/// Exhaustive (or strided) search for the capacity-maximizing tiling.
pub fn optimize_run(cfg: &RunConfig, opts: &OptimizeCommand, out: &mut dyn Write) -> anyhow::Result<Status> {
    let aperture = cfg.aperture()?;
    let alphabet = cfg.alphabet()?;
    let l = alphabet
        .incidence_matrix(&aperture)
        .map_err(|e| ConfigError(e.to_string()))?;
    let baseline = baseline_tiling(&aperture).map_err(|e| ConfigError(format!("baseline tiling: {e}")))?;
    let prep = prepare(cfg)?;
    let dir = &cfg.run.output_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_file(
        &dir.join(DROPS_FILE),
        drops_document(&prep.provenance, &prep.drops)?,
    )?;
    if opts.export_channels {
        export_channels(&prep, dir)?;
    }

    let header = LedgerHeader {
        config_hash: prep.provenance.config_hash.clone(),
        seed: cfg.scenario.seed,
        drop_set: prep.ctx.drop_set().to_string(),
        channel: prep.provenance.channel.clone(),
        stride: cfg.tiling.stride,
    };
    let options = OptimizeOptions {
        workers: cfg.run.workers,
        chunk_size: cfg.run.chunk_size,
        stride: cfg.tiling.stride,
        ledger: Some(LedgerOutput {
            path: dir.join(LEDGER_FILE),
            header,
            resume: opts.resume,
        }),
    };
    let show = opts.progress;
    let result = optimize(
        enumerate_exact_covers(&l, aperture),
        &baseline,
        &prep.ctx,
        &options,
        |n| {
            if show {
                eprint!("\r{n} tilings");
            }
        },
    )?;
    if show {
        eprintln!();
    }
    let comparison = compare_to_baseline(&result, &result.baseline.record)?;
    let status = if result.is_infeasible() {
        Status::Infeasible
    } else {
        Status::Ok
    };

    let key = OrientationKey::from_alphabets(&[&alphabet, &Alphabet::baseline()], &aperture);
    let mut named: Vec<(&str, &TilingEvaluation)> = vec![("baseline", &result.baseline)];
    if let Some(b) = &result.best {
        named.push(("best", b));
    }
    if let Some(u) = &result.unconstrained_best {
        if result.best.as_ref().map(|b| b.record.t) != Some(u.record.t) {
            named.push(("unconstrained_best", u));
        }
    }
    for (name, e) in &named {
        let title = format!("{name} tiling (t={})", e.record.t);
        write_file(
            &dir.join(format!("{name}.txt")),
            render::ascii(&e.tiling, &prep.provenance, &title),
        )?;
        write_file(
            &dir.join(format!("{name}.svg")),
            render::svg(&e.tiling, &key, &prep.provenance, &title),
        )?;
    }
    let best_or_top = result.best.as_ref().or(result.unconstrained_best.as_ref());
    let mut curves: Vec<(&str, &TilingEvaluation)> = vec![("baseline", &result.baseline)];
    if let Some(b) = best_or_top {
        curves.insert(0, ("best", b));
    }
    if let Some(csv) = distribution_csv(&prep.provenance, &curves, opts.bins)? {
        write_file(&dir.join(DISTRIBUTION_FILE), csv)?;
    }
    if opts.export_precoders {
        if let Some(b) = best_or_top {
            write_file(
                &dir.join("precoders_best.json"),
                precoders_document(&prep.provenance, b),
            )?;
        }
        write_file(
            &dir.join("precoders_baseline.json"),
            precoders_document(&prep.provenance, &result.baseline),
        )?;
    }

    let mut notes = vec![LOS_NOTE.to_string()];
    if !result.exhaustive() {
        notes.push(format!(
            "strided search: every {}th tiling evaluated, the optimum may be missed",
            result.stride
        ));
    }
    if status == Status::Infeasible {
        notes.push("no tiling meets the coverage threshold".into());
    }
    let doc = RunResult {
        provenance: prep.provenance.clone(),
        status: if status == Status::Ok { "ok" } else { "infeasible" }.into(),
        alphabet: serde_json::to_value(cfg.tiling.alphabet)?
            .as_str()
            .unwrap_or_default()
            .to_string(),
        total_tilings: result.total_tilings,
        stride: result.stride,
        exhaustive: result.exhaustive(),
        best: result.best.as_ref().map(ConfigurationReport::new),
        unconstrained_best: result.unconstrained_best.as_ref().map(ConfigurationReport::new),
        baseline: ConfigurationReport::new(&result.baseline),
        comparison: ComparisonReport::from(&comparison),
        notes,
    };
    write_file(&dir.join(RESULT_FILE), to_json(&doc))?;

    writeln!(
        out,
        "{} tilings, {} evaluated",
        result.total_tilings, comparison.evaluated
    )?;
    writeln!(out, "baseline C = {:.4} bps/Hz", comparison.baseline_capacity)?;
    match (&result.best, comparison.delta) {
        (Some(b), Some(d)) => writeln!(
            out,
            "best t={} C = {:.4} bps/Hz ({:+.2}% vs baseline), beating baseline: {} of {} ({:.2}%)",
            b.record.t,
            b.record.average_capacity,
            100.0 * d,
            comparison.beating,
            comparison.evaluated,
            100.0 * comparison.beating_fraction()
        )?,
        _ => writeln!(out, "no tiling meets the coverage threshold")?,
    }
    writeln!(out, "results in {}", dir.display())?;
    Ok(status)
}

#[derive(Debug, Clone, Default)]
pub struct EvaluateCommand {
    /// Tiling file; the vertical-bar baseline when absent.
    pub tiling: Option<PathBuf>,
    pub far_field: bool,
    pub export_channels: bool,
    pub export_precoders: bool,
    pub bins: usize,
    /// Output file stem.
    pub name: String,
}

/// Score one tiling on the configured drops.
pub fn evaluate_run(cfg: &RunConfig, opts: &EvaluateCommand, out: &mut dyn Write) -> anyhow::Result<Status> {
    let aperture = cfg.aperture()?;
    let tiling = match &opts.tiling {
        Some(p) => load_tiling(p)?,
        None => baseline_tiling(&aperture).map_err(|e| ConfigError(format!("baseline tiling: {e}")))?,
    };
    if tiling.aperture() != aperture {
        bail!(ConfigError(format!(
            "tiling is {}, configured array is {aperture}",
            tiling.aperture()
        )));
    }
    let prep = prepare(cfg)?;
    let e = evaluate_tiling_detailed(0, &tiling, &prep.ctx)?;
    let dir = &cfg.run.output_dir;
    let name = if opts.name.is_empty() {
        "evaluation"
    } else {
        &opts.name
    };
    let doc = EvaluationDocument {
        provenance: prep.provenance.clone(),
        evaluation: ConfigurationReport::new(&e),
        notes: vec![LOS_NOTE.to_string()],
    };
    write_file(&dir.join(format!("{name}.json")), to_json(&doc))?;
    if let Some(csv) = distribution_csv(&prep.provenance, &[(name, &e)], opts.bins.max(1))? {
        write_file(&dir.join(format!("{name}_distribution.csv")), csv)?;
    }
    if opts.export_channels {
        export_channels(&prep, dir)?;
    }
    if opts.export_precoders {
        write_file(
            &dir.join(format!("{name}_precoders.json")),
            precoders_document(&prep.provenance, &e),
        )?;
    }
    if opts.far_field {
        match far_field_csv(&prep, &e)? {
            Some(csv) => write_file(&dir.join(format!("{name}_far_field.csv")), csv)?,
            None => writeln!(out, "no feasible drop, far field skipped")?,
        }
    }
    let r = &e.record;
    writeln!(
        out,
        "C = {:.4} bps/Hz, min desired power {:.2} dBm, coverage {}, infeasible drops {}",
        r.average_capacity,
        r.min_desired_power_dbm(),
        if r.coverage { "met" } else { "missed" },
        r.infeasible_drops.len()
    )?;
    Ok(if r.feasible() && r.coverage {
        Status::Ok
    } else {
        Status::Infeasible
    })
}

/// Statistics table over a ledger, plus the per-configuration table when a
/// result file is available.
pub fn report(ledger_path: &Path, result_path: Option<&Path>, out: &mut dyn Write) -> anyhow::Result<Status> {
    let ledger =
        Ledger::read(ledger_path).map_err(|e| ConfigError(format!("{}: {e}", ledger_path.display())))?;
    let default_result = ledger_path.with_file_name(RESULT_FILE);
    let result_path = result_path.or_else(|| default_result.exists().then_some(default_result.as_path()));
    let result: Option<RunResult> = match result_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?)
        }
        None => None,
    };
    if let Some(r) = &result {
        if ledger.get("config_hash") != Some(r.provenance.config_hash.as_str()) {
            bail!(ConfigError(
                "ledger and result come from different configurations".into()
            ));
        }
    }

    writeln!(out, "ledger {}", ledger_path.display())?;
    for (k, v) in &ledger.metadata {
        writeln!(out, "  {k} = {v}")?;
    }
    let rows = &ledger.rows;
    let feasible: Vec<&LedgerRow> = rows
        .iter()
        .filter(|r| r.feasible && r.capacity.is_finite())
        .collect();
    let covered = rows.iter().filter(|r| r.admissible()).count();
    writeln!(
        out,
        "{} tilings, {} feasible, {} meet coverage",
        rows.len(),
        feasible.len(),
        covered
    )?;
    writeln!(out)?;
    writeln!(
        out,
        "{:<28}{:>12}{:>12}{:>12}{:>12}",
        "over tilings", "min", "max", "avg", "var"
    )?;
    let c: Vec<f64> = feasible.iter().map(|r| r.capacity).collect();
    let eta: Vec<f64> = feasible
        .iter()
        .map(|r| r.min_power_dbm)
        .filter(|p| p.is_finite())
        .collect();
    table_row(out, "C [bps/Hz]", summarize(&c).ok())?;
    table_row(out, "eta_min [dBm]", summarize(&eta).ok())?;

    if let Some(r) = &result {
        writeln!(out)?;
        writeln!(
            out,
            "{:<28}{:>12}{:>12}{:>12}{:>12}",
            "over drops", "min", "max", "avg", "var"
        )?;
        let mut configs = vec![("baseline", &r.baseline)];
        if let Some(b) = &r.best {
            configs.push(("best", b));
        }
        for (name, cfg) in configs {
            table_row(out, &format!("{name} C [bps/Hz]"), cfg.drop_capacity_bps_hz)?;
            table_row(out, &format!("{name} eta [dBm]"), cfg.eta_dbm)?;
        }
    }
    let baseline = result.as_ref().map(|r| r.comparison.baseline_capacity_bps_hz);
    if let Some(b) = baseline {
        let beating = feasible.iter().filter(|r| r.capacity > b).count();
        let beating_cov = feasible.iter().filter(|r| r.capacity > b && r.coverage).count();
        writeln!(out)?;
        writeln!(out, "baseline C = {b:.4} bps/Hz")?;
        writeln!(
            out,
            "beating baseline: {beating} of {} ({:.2}%), {beating_cov} also meeting coverage",
            rows.len(),
            100.0 * beating as f64 / rows.len().max(1) as f64
        )?;
    }
    if let Some(best) = rows
        .iter()
        .filter(|r| r.admissible() && r.capacity.is_finite())
        .fold(None::<&LedgerRow>, |acc, r| match acc {
            Some(a) if a.capacity >= r.capacity => Some(a),
            _ => Some(r),
        })
    {
        writeln!(
            out,
            "best admissible: t={} C = {:.4} bps/Hz",
            best.t, best.capacity
        )?;
        Ok(Status::Ok)
    } else {
        writeln!(out, "no tiling meets the coverage threshold")?;
        Ok(Status::Infeasible)
    }
}

fn table_row(out: &mut dyn Write, name: &str, s: Option<Summary>) -> anyhow::Result<()> {
    match s {
        Some(s) => writeln!(
            out,
            "{name:<28}{:>12.4}{:>12.4}{:>12.4}{:>12.4}",
            s.min, s.max, s.mean, s.variance
        )?,
        None => writeln!(out, "{name:<28}{:>12}", "n/a")?,
    }
    Ok(())
}

/// Write ASCII and SVG pictures of a tiling file.
pub fn render_file(
    cfg: &RunConfig,
    tiling_path: &Path,
    stem: Option<&str>,
    out: &mut dyn Write,
) -> anyhow::Result<Status> {
    let tiling = load_tiling(tiling_path)?;
    let alphabet = cfg.alphabet()?;
    let key = OrientationKey::from_alphabets(&[&alphabet, &Alphabet::baseline()], &tiling.aperture());
    let provenance = Provenance::new(cfg);
    let stem = stem.map(str::to_string).unwrap_or_else(|| {
        tiling_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "tiling".into())
    });
    let title = format!("{stem} ({} tiles)", tiling.tile_count());
    let dir = &cfg.run.output_dir;
    let txt = dir.join(format!("{stem}.txt"));
    let svg = dir.join(format!("{stem}.svg"));
    write_file(&txt, render::ascii(&tiling, &provenance, &title))?;
    write_file(&svg, render::svg(&tiling, &key, &provenance, &title))?;
    writeln!(out, "wrote {} and {}", txt.display(), svg.display())?;
    Ok(Status::Ok)
}

fn drops_document(p: &Provenance, drops: &[UeDrop]) -> anyhow::Result<String> {
    let rows: serde_json::Value = serde_json::from_str(&drops_to_json(drops)?)?;
    Ok(to_json(&serde_json::json!({
        "provenance": p,
        "units": "metres; x along boresight, z up, base station foot at the origin",
        "rows": rows,
    })))
}

fn export_channels(prep: &Prepared, dir: &Path) -> anyhow::Result<()> {
    let sub = dir.join("channels");
    for g in prep.ctx.channels() {
        let tensor: serde_json::Value = serde_json::from_str(&channel_to_json(g)?)?;
        let doc = serde_json::json!({ "provenance": prep.provenance, "tensor": tensor });
        write_file(
            &sub.join(format!("drop_{:04}.json", g.drop)),
            serde_json::to_string(&doc)?,
        )?;
    }
    Ok(())
}

fn precoders_document(p: &Provenance, e: &TilingEvaluation) -> String {
    let tensors: Vec<Option<ComplexTensor>> = e
        .outcomes
        .iter()
        .enumerate()
        .map(|(d, o)| {
            o.as_ref().map(|o| {
                let mut t =
                    ComplexTensor::from_matrix("precoder", o.precoder.matrix(), TILE_ORDER, PORT_ORDER);
                t.drop = Some(d);
                t
            })
        })
        .collect();
    to_json(&serde_json::json!({
        "provenance": p,
        "t": e.record.t,
        "tiling": TilingDocument::new(&e.tiling),
        "precoders": tensors,
    }))
}

/// Shared-bin PDF/CDF columns for each named evaluation's per-drop sum rates.
fn distribution_csv(
    p: &Provenance,
    curves: &[(&str, &TilingEvaluation)],
    bins: usize,
) -> anyhow::Result<Option<String>> {
    let samples: Vec<(&str, Vec<f64>)> = curves
        .iter()
        .map(|(n, e)| {
            let v = e
                .record
                .drop_sum_rates
                .iter()
                .copied()
                .filter(|c| c.is_finite())
                .collect();
            (*n, v)
        })
        .filter(|(_, v): &(&str, Vec<f64>)| !v.is_empty())
        .collect();
    if samples.is_empty() {
        return Ok(None);
    }
    let all = samples.iter().flat_map(|(_, v)| v.iter().copied());
    let lo = all.clone().fold(f64::INFINITY, f64::min);
    let hi = all.fold(f64::NEG_INFINITY, f64::max);
    let dists = samples
        .iter()
        .map(|(_, v)| distribution_in(v, bins.max(1), lo, hi))
        .collect::<Result<Vec<_>, _>>()?;
    let mut s = p.comment_lines("# ");
    s.push_str("# sample=per-drop sum rate\n");
    s.push_str("bin_lower_bps_hz,bin_upper_bps_hz");
    for (n, _) in &samples {
        s.push_str(&format!(",pdf_{n},cdf_{n}"));
    }
    s.push('\n');
    for v in 0..dists[0].pdf.len() {
        s.push_str(&format!("{},{}", dists[0].lower_edge(v), dists[0].upper_edge(v)));
        for d in &dists {
            s.push_str(&format!(",{},{}", d.pdf[v], d.cdf[v]));
        }
        s.push('\n');
    }
    Ok(Some(s))
}

/// Horizontal cut of every beam of the first feasible drop, both ports summed.
fn far_field_csv(prep: &Prepared, e: &TilingEvaluation) -> anyhow::Result<Option<String>> {
    let Some((d, o)) = e
        .outcomes
        .iter()
        .enumerate()
        .find_map(|(d, o)| o.as_ref().map(|o| (d, o)))
    else {
        return Ok(None);
    };
    let v = o.precoder.matrix();
    let mn = prep.geometry.element_count();
    let mut weights = Vec::with_capacity(v.ncols());
    for b in 0..v.ncols() {
        let col: Vec<Complex64> = v.column(b).iter().copied().collect();
        weights.push(expand_dual_weights(&e.tiling, &col)?);
    }
    let mut s = prep.provenance.comment_lines("# ");
    s.push_str(&format!(
        "# drop={d}\n# cut=theta 90 deg, power relative to a unit isotropic source\n"
    ));
    s.push_str("azimuth_deg");
    for b in 0..v.ncols() {
        s.push_str(&format!(",beam_{b}_db"));
    }
    s.push('\n');
    for k in 0..=360 {
        let az = -180.0 + k as f64;
        s.push_str(&format!("{az}"));
        for w in &weights {
            let mut p = 0.0;
            let fv = far_field(
                &prep.geometry,
                &prep.pattern,
                &w[..mn],
                PI / 2.0,
                az.to_radians(),
                Polarization::V,
            )?;
            let fh = far_field(
                &prep.geometry,
                &prep.pattern,
                &w[mn..],
                PI / 2.0,
                az.to_radians(),
                Polarization::H,
            )?;
            for i in 0..2 {
                p += (fv[i] + fh[i]).norm_sqr();
            }
            s.push_str(&format!(",{:.4}", linear_to_db(p.max(1e-30))));
        }
        s.push('\n');
    }
    Ok(Some(s))
}
