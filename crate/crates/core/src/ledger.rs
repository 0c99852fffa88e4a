//! Capacity ledger: one CSV row per evaluated tiling, preceded by `#`
//! provenance lines.
//!
//! ```text
//! # tilecap capacity ledger
//! # config_hash=3f2a9c0d11e4b7a8
//! # seed=1
//! # drop_set=9d1c2b7e00aa4f31
//! # channel=free-space-los
//! # stride=1
//! t,capacity_bps_hz,min_power_dbm,coverage,feasible
//! 1,118.20431,-97.5512,1,1
//! ```
//!
//! Floats use the shortest representation that parses back to the same value,
//! so a ledger read back and re-written is byte-identical.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EvaluationRecord;

pub const COLUMNS: &str = "t,capacity_bps_hz,min_power_dbm,coverage,feasible";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: u64,
    pub capacity: f64,
    pub min_power_dbm: f64,
    pub coverage: bool,
    pub feasible: bool,
}

impl LedgerRow {
    pub fn admissible(&self) -> bool {
        self.feasible && self.coverage
    }

    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.t,
            self.capacity,
            self.min_power_dbm,
            u8::from(self.coverage),
            u8::from(self.feasible)
        )
    }

    pub fn parse(line: &str) -> Result<Self> {
        let bad = |why: &str| Error::format("ledger row", format!("'{line}': {why}"));
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 5 {
            return Err(bad("expected 5 fields"));
        }
        let flag = |s: &str| match s {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            _ => Err(bad("flag must be 0 or 1")),
        };
        Ok(Self {
            t: f[0].parse().map_err(|_| bad("bad tiling index"))?,
            capacity: f[1].parse().map_err(|_| bad("bad capacity"))?,
            min_power_dbm: f[2].parse().map_err(|_| bad("bad power"))?,
            coverage: flag(f[3])?,
            feasible: flag(f[4])?,
        })
    }
}

impl From<&EvaluationRecord> for LedgerRow {
    fn from(r: &EvaluationRecord) -> Self {
        Self {
            t: r.t,
            capacity: r.average_capacity,
            min_power_dbm: r.min_desired_power_dbm(),
            coverage: r.coverage,
            feasible: r.feasible(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerHeader {
    pub config_hash: String,
    pub seed: u64,
    pub drop_set: String,
    pub channel: String,
    pub stride: usize,
}

impl LedgerHeader {
    pub fn render(&self) -> String {
        let mut s = String::from("# tilecap capacity ledger\n");
        let _ = writeln!(s, "# config_hash={}", self.config_hash);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# drop_set={}", self.drop_set);
        let _ = writeln!(s, "# channel={}", self.channel);
        let _ = writeln!(s, "# stride={}", self.stride);
        s.push_str(COLUMNS);
        s.push('\n');
        s
    }
}

/// Parsed ledger: `key=value` metadata in file order, then the rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ledger {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<LedgerRow>,
}

impl Ledger {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut ledger = Ledger::default();
        let mut seen_columns = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if let Some((k, v)) = meta.trim().split_once('=') {
                    ledger.metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !seen_columns {
                if line != COLUMNS {
                    return Err(Error::format(
                        "ledger",
                        format!("unexpected column line '{line}'"),
                    ));
                }
                seen_columns = true;
                continue;
            }
            ledger.rows.push(LedgerRow::parse(line)?);
        }
        if !seen_columns {
            return Err(Error::format("ledger", "missing column line"));
        }
        Ok(ledger)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Append-only ledger file used as the run checkpoint.
#[derive(Debug)]
pub struct LedgerWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl LedgerWriter {
    /// Start a fresh ledger, truncating any existing file.
    pub fn create(path: &Path, header: &LedgerHeader) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(header.render().as_bytes())?;
        out.flush()?;
        Ok(Self {
            path: path.to_path_buf(),
            out,
        })
    }

    /// Reopen an existing ledger written under the same header and return the
    /// rows already in it. A torn final line is discarded. Falls back to
    /// [`LedgerWriter::create`] when the file does not exist.
    pub fn resume(path: &Path, header: &LedgerHeader) -> Result<(Self, Vec<LedgerRow>)> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok((Self::create(path, header)?, Vec::new()));
            }
            Err(e) => return Err(e.into()),
        };
        let complete = match text.rfind('\n') {
            Some(k) => &text[..=k],
            None => "",
        };
        let expected = header.render();
        if !complete.starts_with(&expected) {
            return Err(Error::Config(format!(
                "checkpoint {} was written for a different configuration",
                path.display()
            )));
        }
        let ledger = Ledger::parse(complete)?;
        if ledger.rows.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::format("ledger", "tiling indices not increasing"));
        }
        let file = OpenOptions::new().write(true).open(path)?;
        file.set_len(complete.len() as u64)?;
        drop(file);
        let out = BufWriter::new(OpenOptions::new().append(true).open(path)?);
        Ok((
            Self {
                path: path.to_path_buf(),
                out,
            },
            ledger.rows,
        ))
    }

    pub fn append(&mut self, rows: &[LedgerRow]) -> Result<()> {
        for r in rows {
            self.out.write_all(r.to_line().as_bytes())?;
            self.out.write_all(b"\n")?;
        }
        self.out.flush()?;
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

pub fn render_ledger(header: &LedgerHeader, rows: &[LedgerRow]) -> String {
    let mut s = header.render();
    for r in rows {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> LedgerHeader {
        LedgerHeader {
            config_hash: "abc".into(),
            seed: 5,
            drop_set: "d".into(),
            channel: "free-space-los".into(),
            stride: 1,
        }
    }

    fn row(t: u64, c: f64) -> LedgerRow {
        LedgerRow {
            t,
            capacity: c,
            min_power_dbm: -95.25,
            coverage: true,
            feasible: t % 2 == 1,
        }
    }

    #[test]
    fn row_roundtrip_is_exact() {
        for c in [0.1 + 0.2, 118.204_311_7, f64::NAN, 1e-300] {
            let r = row(3, c);
            let back = LedgerRow::parse(&r.to_line()).unwrap();
            assert_eq!(back.to_line(), r.to_line());
        }
    }

    #[test]
    fn parse_rendered_ledger() {
        let rows = vec![row(1, 10.0), row(2, 11.5)];
        let text = render_ledger(&header(), &rows);
        let l = Ledger::parse(&text).unwrap();
        assert_eq!(l.rows, rows);
        assert_eq!(l.get("seed"), Some("5"));
        assert!(Ledger::parse("t,c\n1,2\n").is_err());
    }

    #[test]
    fn resume_drops_torn_line_and_checks_header() {
        let dir = std::env::temp_dir().join(format!("tilecap-ledger-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ledger.csv");
        let mut w = LedgerWriter::create(&path, &header()).unwrap();
        w.append(&[row(1, 1.0), row(2, 2.0)]).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"3,4.5,-9").unwrap();
        drop(f);
        let (mut w, rows) = LedgerWriter::resume(&path, &header()).unwrap();
        assert_eq!(rows.len(), 2);
        w.append(&[row(3, 3.0)]).unwrap();
        drop(w);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            render_ledger(&header(), &[row(1, 1.0), row(2, 2.0), row(3, 3.0)])
        );
        let mut other = header();
        other.seed = 6;
        assert!(LedgerWriter::resume(&path, &other).is_err());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
