//! Hexagonal cell, scenario presets and UE drop generation.
//!
//! The cell is a flat-top regular hexagon of edge `d_H = ISD / 3`. The array
//! sits at the origin on the cell's western vertex, so the hexagon centre is
//! `(d_H, 0)` and the boresight (`+x`) bisects the cell. `cell_azimuth_deg`
//! rotates the whole cell about the array.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Uma,
    Umi,
}

impl ScenarioKind {
    pub fn bs_height(self) -> f64 {
        match self {
            ScenarioKind::Uma => 25.0,
            ScenarioKind::Umi => 10.0,
        }
    }

    pub fn isd(self) -> f64 {
        match self {
            ScenarioKind::Uma => 500.0,
            ScenarioKind::Umi => 200.0,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioKind::Uma => "uma",
            ScenarioKind::Umi => "umi",
        })
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uma" => Ok(ScenarioKind::Uma),
            "umi" => Ok(ScenarioKind::Umi),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum UeHeight {
    /// Every UE at the same height (ground level drops).
    Fixed { height_m: f64 },
    /// Random floor of a random-height building.
    Floors,
}

pub const GROUND_UE_HEIGHT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub kind: ScenarioKind,
    pub isd: f64,
    pub bs_height: f64,
    pub ue_height: UeHeight,
    pub cell_azimuth_deg: f64,
    pub drops: usize,
    pub users: usize,
    pub seed: u64,
}

impl ScenarioParams {
    pub fn preset(kind: ScenarioKind, drops: usize, users: usize, seed: u64) -> Self {
        Self {
            kind,
            isd: kind.isd(),
            bs_height: kind.bs_height(),
            ue_height: UeHeight::Fixed {
                height_m: GROUND_UE_HEIGHT,
            },
            cell_azimuth_deg: 0.0,
            drops,
            users,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.isd > 0.0 && self.isd.is_finite()) {
            return Err(Error::Config(format!("ISD must be positive, got {}", self.isd)));
        }
        if self.drops == 0 || self.users == 0 {
            return Err(Error::Config("drop and user counts must be at least 1".into()));
        }
        if let UeHeight::Fixed { height_m } = self.ue_height {
            if !height_m.is_finite() {
                return Err(Error::Config("UE height must be finite".into()));
            }
        }
        Ok(())
    }

    /// Hexagon edge `d_H`.
    pub fn edge(&self) -> f64 {
        self.isd / 3.0
    }

    pub fn hexagon(&self) -> Hexagon {
        let r = self.edge();
        let az = self.cell_azimuth_deg.to_radians();
        Hexagon {
            center: [r * az.cos(), r * az.sin()],
            edge: r,
            rotation: az,
        }
    }
}

/// Regular hexagon; with `rotation = 0` it is flat-top (vertices on the
/// local x axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hexagon {
    pub center: [f64; 2],
    pub edge: f64,
    pub rotation: f64,
}

impl Hexagon {
    pub fn flat_top(center: [f64; 2], edge: f64) -> Self {
        Self {
            center,
            edge,
            rotation: 0.0,
        }
    }

    /// Closed-set membership. The angular distance to the nearest edge normal
    /// fixes how far out the boundary is in that direction.
    pub fn contains(&self, point: [f64; 2]) -> bool {
        let dx = point[0] - self.center[0];
        let dy = point[1] - self.center[1];
        let r = dx.hypot(dy);
        if r == 0.0 {
            return true;
        }
        let apothem = self.edge * 3f64.sqrt() / 2.0;
        // Edge normals of a flat-top hexagon sit at 30 + 60k degrees.
        let t = (dy.atan2(dx) - self.rotation - PI / 6.0).rem_euclid(PI / 3.0);
        let off = t.min(PI / 3.0 - t);
        r * off.cos() <= apothem * (1.0 + 1e-12)
    }
}

pub fn point_in_hexagon(point: [f64; 2], center: [f64; 2], edge: f64) -> bool {
    Hexagon::flat_top(center, edge).contains(point)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeDrop {
    pub index: usize,
    pub positions: Vec<[f64; 3]>,
}

/// `3 (n_floor - 1) + 1.5` with `Omega ~ U{4..8}` and `n_floor ~ U{1..Omega}`.
pub fn floor_height<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let floors: u32 = rng.random_range(4..=8);
    let floor: u32 = rng.random_range(1..=floors);
    floor_to_height(floor)
}

pub fn floor_to_height(floor: u32) -> f64 {
    3.0 * (f64::from(floor) - 1.0) + GROUND_UE_HEIGHT
}

/// Uniform radius in `[0, d_H]`, uniform angle, redrawn until inside the
/// cell. This is not area-uniform: points crowd towards the centre.
pub fn sample_position<R: Rng + ?Sized>(hex: &Hexagon, rng: &mut R) -> [f64; 2] {
    loop {
        let r: f64 = rng.random_range(0.0..=hex.edge);
        let a: f64 = rng.random_range(0.0..2.0 * PI);
        let p = [hex.center[0] + r * a.cos(), hex.center[1] + r * a.sin()];
        if hex.contains(p) {
            return p;
        }
    }
}

pub fn sample_drop<R: Rng + ?Sized>(params: &ScenarioParams, p: usize, rng: &mut R) -> UeDrop {
    let hex = params.hexagon();
    let positions = (0..params.users)
        .map(|_| {
            let [x, y] = sample_position(&hex, rng);
            let z = match params.ue_height {
                UeHeight::Fixed { height_m } => height_m,
                UeHeight::Floors => floor_height(rng),
            };
            [x, y, z]
        })
        .collect();
    UeDrop { index: p, positions }
}

/// All `P` drops from the scenario seed, generated in order from one stream.
pub fn generate_drops(params: &ScenarioParams) -> Result<Vec<UeDrop>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    Ok((0..params.drops)
        .map(|p| sample_drop(params, p, &mut rng))
        .collect())
}

#[derive(Serialize, Deserialize)]
struct DropRow {
    p: usize,
    u: usize,
    x: f64,
    y: f64,
    z: f64,
}

/// Flat `(p, u, x, y, z)` records, 0-based indices.
pub fn drops_to_json(drops: &[UeDrop]) -> Result<String> {
    let rows: Vec<DropRow> = drops
        .iter()
        .flat_map(|d| {
            d.positions.iter().enumerate().map(move |(u, r)| DropRow {
                p: d.index,
                u,
                x: r[0],
                y: r[1],
                z: r[2],
            })
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows)?)
}

pub fn drops_from_json(text: &str) -> Result<Vec<UeDrop>> {
    let rows: Vec<DropRow> = serde_json::from_str(text)?;
    let mut drops: Vec<UeDrop> = Vec::new();
    for row in rows {
        if row.p > drops.len() {
            return Err(Error::format("drops", format!("drop {} out of order", row.p)));
        }
        if row.p == drops.len() {
            drops.push(UeDrop {
                index: row.p,
                positions: Vec::new(),
            });
        }
        let d = &mut drops[row.p];
        if row.u != d.positions.len() {
            return Err(Error::format(
                "drops",
                format!("user {} of drop {} out of order", row.u, row.p),
            ));
        }
        d.positions.push([row.x, row.y, row.z]);
    }
    Ok(drops)
}

/// Order-sensitive fingerprint of a drop set, used to refuse comparisons
/// between results computed on different drops.
pub fn drops_fingerprint(drops: &[UeDrop]) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for d in drops {
        h.update((d.index as u64).to_le_bytes());
        for r in &d.positions {
            for c in r {
                h.update(c.to_bits().to_le_bytes());
            }
        }
    }
    hex16(&h.finalize())
}

pub(crate) fn hex16(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}
