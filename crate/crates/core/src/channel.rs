//! Deterministic line-of-sight channel between every element port and every
//! UE port, and its per-tile aggregation.
//!
//! Row `a = 2u + pol` with `V = 0`, `H = 1`. Columns are the `V` element block
//! followed by the `H` block, each in pixel order `i = m + n M`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, ElementPattern, Polarization};
use crate::error::{Error, Result};
use crate::scenario::{ScenarioKind, UeDrop};
use crate::tiling::AggregationVector;
use crate::units::{db_to_linear, dbm_to_watts};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Total transmit power `Psi`, watts.
    pub tx_power: f64,
    /// Noise power per RX port `sigma^2`, watts.
    pub noise_power: f64,
    /// Coverage threshold on desired power, watts.
    pub coverage_threshold: f64,
}

impl LinkBudget {
    pub fn new(tx_power: f64, noise_power: f64, coverage_threshold: f64) -> Result<Self> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !(ok(tx_power) && ok(noise_power) && ok(coverage_threshold)) {
            return Err(Error::Config("link budget powers must be positive".into()));
        }
        Ok(Self {
            tx_power,
            noise_power,
            coverage_threshold,
        })
    }

    pub fn from_dbm(tx_dbm: f64, noise_dbm: f64, threshold_dbm: f64) -> Result<Self> {
        Self::new(
            dbm_to_watts(tx_dbm),
            dbm_to_watts(noise_dbm),
            dbm_to_watts(threshold_dbm),
        )
    }
}

/// Large-scale attenuation law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PathLoss {
    /// `(lambda / (4 pi d))^2`.
    FreeSpace,
    /// `A + 10 n log10(d) + 20 log10(f_GHz)` with the scenario's LOS constants.
    ThreeGppLos { scenario: ScenarioKind },
}

impl PathLoss {
    /// Power gain (linear, <= 1 in practice) at distance `d` meters.
    pub fn gain(&self, d: f64, frequency: f64) -> f64 {
        match *self {
            PathLoss::FreeSpace => {
                let wl = crate::array::SPEED_OF_LIGHT / frequency;
                (wl / (4.0 * PI * d)).powi(2)
            }
            PathLoss::ThreeGppLos { scenario } => {
                let (a, n) = match scenario {
                    ScenarioKind::Uma => (28.0, 2.2),
                    ScenarioKind::Umi => (32.4, 2.1),
                };
                let pl = a + 10.0 * n * d.log10() + 20.0 * (frequency / 1e9).log10();
                db_to_linear(-pl)
            }
        }
    }
}

impl fmt::Display for PathLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathLoss::FreeSpace => f.write_str("free-space-los"),
            PathLoss::ThreeGppLos { scenario } => write!(f, "3gpp-los-{scenario}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Propagation {
    pub path_loss: PathLoss,
    /// Extra flat loss, e.g. for indoor users. 0 dB by default.
    pub penetration_loss_db: f64,
}

impl Default for Propagation {
    fn default() -> Self {
        Self {
            path_loss: PathLoss::FreeSpace,
            penetration_loss_db: 0.0,
        }
    }
}

impl Propagation {
    pub fn amplitude(&self, d: f64, frequency: f64) -> f64 {
        (self.path_gain(d, frequency)).sqrt()
    }

    pub fn path_gain(&self, d: f64, frequency: f64) -> f64 {
        self.path_loss.gain(d, frequency) * db_to_linear(-self.penetration_loss_db)
    }

    /// Tag written into every output that carries channel-derived numbers.
    pub fn label(&self) -> String {
        if self.penetration_loss_db == 0.0 {
            self.path_loss.to_string()
        } else {
            format!("{}+{}dB", self.path_loss, self.penetration_loss_db)
        }
    }
}

/// Complex gain from element port `(m, n, tx_port)` to a UE port at
/// `rx_position` with polarization `rx_port`.
pub fn los_green(
    geometry: &ArrayGeometry,
    pattern: &ElementPattern,
    propagation: &Propagation,
    tx: (usize, usize, Polarization),
    rx_position: [f64; 3],
    rx_port: Polarization,
) -> Result<Complex64> {
    let (m, n, tx_port) = tx;
    let r = geometry.element_position(m, n)?;
    green_from(geometry, pattern, propagation, r, tx_port, rx_position, rx_port)
}

#[inline]
fn green_from(
    geometry: &ArrayGeometry,
    pattern: &ElementPattern,
    propagation: &Propagation,
    tx_position: [f64; 3],
    tx_port: Polarization,
    rx_position: [f64; 3],
    rx_port: Polarization,
) -> Result<Complex64> {
    let d = [
        rx_position[0] - tx_position[0],
        rx_position[1] - tx_position[1],
        rx_position[2] - tx_position[2],
    ];
    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if !(dist > 0.0) {
        return Err(Error::ZeroDistance);
    }
    let theta = (d[2] / dist).clamp(-1.0, 1.0).acos();
    let phi = d[1].atan2(d[0]);
    let e = pattern.field(theta, phi, tx_port);
    let p = rx_port.basis_vector();
    let coupling = e[0] * p[0] + e[1] * p[1];
    let amp = propagation.amplitude(dist, geometry.frequency);
    Ok(coupling * amp * Complex64::from_polar(1.0, -geometry.wavenumber() * dist))
}

/// Element-level channel of one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub drop: usize,
    pub propagation: String,
    data: CMatrix,
}

impl ChannelMatrix {
    pub fn new(drop: usize, propagation: impl Into<String>, data: CMatrix) -> Result<Self> {
        if !data.nrows().is_multiple_of(2) || !data.ncols().is_multiple_of(2) {
            return Err(Error::Dimension(format!(
                "channel {}x{} is not dual-polarized on both sides",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Dimension("channel has non-finite entries".into()));
        }
        Ok(Self {
            drop,
            propagation: propagation.into(),
            data,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    /// `A = 2U`.
    pub fn port_count(&self) -> usize {
        self.data.nrows()
    }

    pub fn element_count(&self) -> usize {
        self.data.ncols() / 2
    }
}

pub fn assemble_channel(
    geometry: &ArrayGeometry,
    pattern: &ElementPattern,
    propagation: &Propagation,
    drop: &UeDrop,
) -> Result<ChannelMatrix> {
    if drop.positions.is_empty() {
        return Err(Error::Empty("UE drop"));
    }
    let elements = geometry.positions();
    let mn = elements.len();
    let a = 2 * drop.positions.len();
    let mut g = CMatrix::zeros(a, 2 * mn);
    for (u, &rx) in drop.positions.iter().enumerate() {
        for chi in Polarization::BOTH {
            let row = 2 * u + chi.index();
            for psi in Polarization::BOTH {
                let base = psi.index() * mn;
                for (i, &tx) in elements.iter().enumerate() {
                    g[(row, base + i)] = green_from(geometry, pattern, propagation, tx, psi, rx, chi)?;
                }
            }
        }
    }
    ChannelMatrix::new(drop.index, propagation.label(), g)
}

/// Something that can produce the element-level channel of a drop.
pub trait ChannelSource: Sync {
    fn channel(&self, drop: &UeDrop) -> Result<ChannelMatrix>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosChannel {
    pub geometry: ArrayGeometry,
    pub pattern: ElementPattern,
    pub propagation: Propagation,
}

impl ChannelSource for LosChannel {
    fn channel(&self, drop: &UeDrop) -> Result<ChannelMatrix> {
        assemble_channel(&self.geometry, &self.pattern, &self.propagation, drop)
    }
}

/// Per-tile channel, `(2U) x (2Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    data: CMatrix,
}

impl EffectiveChannel {
    pub fn from_matrix(data: CMatrix) -> Self {
        Self { data }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix {
        self.data
    }
}

pub fn aggregate_channel(g: &ChannelMatrix, s: &AggregationVector) -> Result<EffectiveChannel> {
    let mn = g.element_count();
    if s.labels().len() != mn {
        return Err(Error::Dimension(format!(
            "tiling of {} pixels against a channel of {} elements",
            s.labels().len(),
            mn
        )));
    }
    let q = s.tile_count();
    let mut h = CMatrix::zeros(g.port_count(), 2 * q);
    for psi in 0..2 {
        for (i, &label) in s.labels().iter().enumerate() {
            let src = g.data.column(psi * mn + i);
            let mut dst = h.column_mut(psi * q + label as usize - 1);
            dst += src;
        }
    }
    Ok(EffectiveChannel { data: h })
}

/// JSON form of a complex matrix with its index conventions spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexTensor {
    pub kind: String,
    pub drop: Option<usize>,
    pub propagation: Option<String>,
    pub rows: usize,
    pub columns: usize,
    pub row_order: String,
    pub column_order: String,
    /// Row-major real parts.
    pub re: Vec<Vec<f64>>,
    /// Row-major imaginary parts.
    pub im: Vec<Vec<f64>>,
}

pub const PORT_ORDER: &str = "a = 2u + pol, pol V=0 H=1, u 0-based";
pub const ELEMENT_ORDER: &str = "pol block (V then H), then pixel i = m + n*M";
pub const TILE_ORDER: &str = "pol block (V then H), then tile q-1";

impl ComplexTensor {
    pub fn from_matrix(kind: &str, m: &CMatrix, row_order: &str, column_order: &str) -> Self {
        let rows = m.nrows();
        let cols = m.ncols();
        Self {
            kind: kind.to_string(),
            drop: None,
            propagation: None,
            rows,
            columns: cols,
            row_order: row_order.to_string(),
            column_order: column_order.to_string(),
            re: (0..rows)
                .map(|r| (0..cols).map(|c| m[(r, c)].re).collect())
                .collect(),
            im: (0..rows)
                .map(|r| (0..cols).map(|c| m[(r, c)].im).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let shape_ok = self.re.len() == self.rows
            && self.im.len() == self.rows
            && self.re.iter().chain(&self.im).all(|r| r.len() == self.columns);
        if !shape_ok {
            return Err(Error::format("tensor", "row/column counts disagree with data"));
        }
        Ok(CMatrix::from_fn(self.rows, self.columns, |r, c| {
            Complex64::new(self.re[r][c], self.im[r][c])
        }))
    }
}

pub fn channel_to_json(g: &ChannelMatrix) -> Result<String> {
    let mut t = ComplexTensor::from_matrix("channel", &g.data, PORT_ORDER, ELEMENT_ORDER);
    t.drop = Some(g.drop);
    t.propagation = Some(g.propagation.clone());
    Ok(serde_json::to_string(&t)?)
}

pub fn channel_from_json(text: &str) -> Result<ChannelMatrix> {
    let t: ComplexTensor = serde_json::from_str(text)?;
    if t.kind != "channel" {
        return Err(Error::format(
            "tensor",
            format!("expected a channel, found '{}'", t.kind),
        ));
    }
    ChannelMatrix::new(
        t.drop.unwrap_or(0),
        t.propagation.clone().unwrap_or_default(),
        t.to_matrix()?,
    )
}
