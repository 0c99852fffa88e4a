//! Output documents and the tiling file reader.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use tilecap_core::metrics::{eta_statistics, summarize, Summary};
use tilecap_core::optimizer::{BaselineComparison, TilingEvaluation};
use tilecap_core::tiling::{AggregationVector, Aperture};

use crate::config::RunConfig;
use crate::ConfigError;

pub const TOOL: &str = concat!("tilecap ", env!("CARGO_PKG_VERSION"));

/// Stamped on every output file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub config_hash: String,
    pub seed: u64,
    pub channel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drop_set: Option<String>,
}

impl Provenance {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: TOOL.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.scenario.seed,
            channel: cfg.channel_label(),
            drop_set: None,
        }
    }

    pub fn with_drop_set(mut self, drop_set: &str) -> Self {
        self.drop_set = Some(drop_set.to_string());
        self
    }

    /// `key=value` lines, each behind `prefix`.
    pub fn comment_lines(&self, prefix: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{prefix}tool={}", self.tool);
        let _ = writeln!(s, "{prefix}config_hash={}", self.config_hash);
        let _ = writeln!(s, "{prefix}seed={}", self.seed);
        let _ = writeln!(s, "{prefix}channel={}", self.channel);
        if let Some(d) = &self.drop_set {
            let _ = writeln!(s, "{prefix}drop_set={d}");
        }
        s
    }
}

/// A tiling as labels in pixel order plus a readable grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingDocument {
    pub columns: usize,
    pub rows: usize,
    /// 1-based tile id of pixel `i = m + n*columns`.
    pub labels: Vec<u32>,
    /// Same tiling as text, highest row first. Informational.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<String>,
}

impl TilingDocument {
    pub fn new(t: &AggregationVector) -> Self {
        let a = t.aperture();
        Self {
            columns: a.columns(),
            rows: a.rows(),
            labels: t.labels().to_vec(),
            grid: t.to_ascii().lines().map(str::to_string).collect(),
        }
    }

    pub fn to_tiling(&self) -> anyhow::Result<AggregationVector> {
        let a = Aperture::new(self.columns, self.rows).map_err(|e| ConfigError(e.to_string()))?;
        let t =
            AggregationVector::from_labels(a, self.labels.clone()).map_err(|e| ConfigError(e.to_string()))?;
        if !t.check_tiles_connected() {
            return Err(ConfigError("tiling has a disconnected tile".into()).into());
        }
        Ok(t)
    }
}

/// Read a tiling from a tiling JSON, a result JSON (its best tiling) or an
/// ASCII grid with one symbol per element, highest row first.
pub fn load_tiling(path: &Path) -> anyhow::Result<AggregationVector> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let t = if text.trim_start().starts_with('{') {
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let doc = if v.get("labels").is_some() {
            v
        } else if let Some(best) = v.get("best").and_then(|b| b.get("tiling")) {
            best.clone()
        } else {
            return Err(ConfigError(format!("{} holds no tiling", path.display())).into());
        };
        let doc: TilingDocument =
            serde_json::from_value(doc).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        doc.to_tiling()
    } else {
        parse_ascii_tiling(&text)
    };
    t.with_context(|| format!("reading tiling {}", path.display()))
}

pub fn parse_ascii_tiling(text: &str) -> anyhow::Result<AggregationVector> {
    let lines: Vec<Vec<char>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.chars().filter(|c| !c.is_whitespace()).collect())
        .collect();
    let Some(width) = lines.first().map(Vec::len) else {
        return Err(ConfigError("empty tiling grid".into()).into());
    };
    if lines.iter().any(|l| l.len() != width) {
        return Err(ConfigError("tiling grid rows differ in length".into()).into());
    }
    let a = Aperture::new(width, lines.len()).map_err(|e| ConfigError(e.to_string()))?;
    let mut ids: Vec<char> = Vec::new();
    let mut labels = vec![0u32; a.pixel_count()];
    for n in 0..a.rows() {
        for m in 0..a.columns() {
            let c = lines[a.rows() - 1 - n][m];
            let id = match ids.iter().position(|&x| x == c) {
                Some(k) => k,
                None => {
                    ids.push(c);
                    ids.len() - 1
                }
            };
            labels[a.pixel(m, n)] = id as u32 + 1;
        }
    }
    let t = AggregationVector::from_labels(a, labels).map_err(|e| ConfigError(e.to_string()))?;
    if !t.check_tiles_connected() {
        return Err(ConfigError(
            "a grid symbol marks a disconnected tile; symbols must be unique per tile".into(),
        )
        .into());
    }
    Ok(t)
}

/// Scores and statistics for one tiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationReport {
    /// Enumeration index, 1-based; 0 for the baseline.
    pub t: u64,
    pub capacity_bps_hz: Option<f64>,
    pub min_power_dbm: Option<f64>,
    pub coverage: bool,
    pub feasible: bool,
    pub infeasible_drops: Vec<usize>,
    /// Sum rate per drop.
    pub drop_capacity_bps_hz: Option<Summary>,
    /// Minimum desired power per port over the drops, in dBm.
    pub eta_dbm: Option<Summary>,
    pub tiling: TilingDocument,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl ConfigurationReport {
    pub fn new(e: &TilingEvaluation) -> Self {
        let r = &e.record;
        let rates: Vec<f64> = r
            .drop_sum_rates
            .iter()
            .copied()
            .filter(|c| c.is_finite())
            .collect();
        Self {
            t: r.t,
            capacity_bps_hz: finite(r.average_capacity),
            min_power_dbm: finite(r.min_desired_power_dbm()),
            coverage: r.coverage,
            feasible: r.feasible(),
            infeasible_drops: r.infeasible_drops.clone(),
            drop_capacity_bps_hz: summarize(&rates).ok(),
            eta_dbm: if r.port_min_power.iter().all(|p| p.is_finite() && *p > 0.0) {
                eta_statistics(&r.port_min_power).ok()
            } else {
                None
            },
            tiling: TilingDocument::new(&e.tiling),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub baseline_capacity_bps_hz: f64,
    pub best_capacity_bps_hz: Option<f64>,
    /// `100 * (best - baseline) / baseline`.
    pub improvement_percent: Option<f64>,
    pub beating: u64,
    pub beating_with_coverage: u64,
    pub evaluated: u64,
    pub beating_fraction: f64,
}

impl From<&BaselineComparison> for ComparisonReport {
    fn from(c: &BaselineComparison) -> Self {
        Self {
            baseline_capacity_bps_hz: c.baseline_capacity,
            best_capacity_bps_hz: c.best_capacity,
            improvement_percent: c.delta.map(|d| 100.0 * d),
            beating: c.beating,
            beating_with_coverage: c.beating_with_coverage,
            evaluated: c.evaluated,
            beating_fraction: c.beating_fraction(),
        }
    }
}

/// `result.json` written by `optimize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub provenance: Provenance,
    /// `ok`, or `infeasible` when no tiling meets coverage.
    pub status: String,
    pub alphabet: String,
    pub total_tilings: u64,
    pub stride: usize,
    pub exhaustive: bool,
    pub best: Option<ConfigurationReport>,
    /// Highest capacity ignoring coverage.
    pub unconstrained_best: Option<ConfigurationReport>,
    pub baseline: ConfigurationReport,
    pub comparison: ComparisonReport,
    pub notes: Vec<String>,
}

/// `evaluation.json` written by `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationDocument {
    pub provenance: Provenance,
    pub evaluation: ConfigurationReport,
    pub notes: Vec<String>,
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}
