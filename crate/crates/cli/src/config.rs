//! Run configuration, read from TOML. Every dimensional key names its unit.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tilecap_core::array::{ArrayGeometry, ElementPattern};
use tilecap_core::channel::{LinkBudget, LosChannel, PathLoss, Propagation};
use tilecap_core::scenario::{ScenarioKind, ScenarioParams, UeHeight, GROUND_UE_HEIGHT};
use tilecap_core::tiling::{Alphabet, Aperture};
use tilecap_core::units::thermal_noise_dbm;
use tilecap_core::zf::{ZfOptions, DEFAULT_CONDITION_CAP};

use crate::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub array: ArrayConfig,
    pub element: ElementConfig,
    pub scenario: ScenarioConfig,
    pub link: LinkConfig,
    pub channel: ChannelConfig,
    pub tiling: TilingConfig,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub columns: usize,
    pub rows: usize,
    pub spacing_y_wavelengths: f64,
    pub spacing_z_wavelengths: f64,
    pub frequency_ghz: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            columns: 8,
            rows: 12,
            spacing_y_wavelengths: 0.5,
            spacing_z_wavelengths: 0.7,
            frequency_ghz: 3.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementConfig {
    pub gain_dbi: f64,
    pub beamwidth_azimuth_deg: f64,
    pub beamwidth_elevation_deg: f64,
    pub front_to_back_db: f64,
    pub side_lobe_vertical_db: f64,
}

impl Default for ElementConfig {
    fn default() -> Self {
        let p = ElementPattern::default();
        Self {
            gain_dbi: p.gain_dbi,
            beamwidth_azimuth_deg: p.beamwidth_azimuth_deg,
            beamwidth_elevation_deg: p.beamwidth_elevation_deg,
            front_to_back_db: p.front_to_back_db,
            side_lobe_vertical_db: p.side_lobe_vertical_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightMode {
    Fixed,
    Floors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub isd_m: f64,
    pub bs_height_m: f64,
    pub ue_height: HeightMode,
    /// Used when `ue_height = "fixed"`.
    pub ue_height_m: f64,
    pub cell_azimuth_deg: f64,
    pub drops: usize,
    pub users: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::preset(ScenarioKind::Uma)
    }
}

impl ScenarioConfig {
    pub fn preset(kind: ScenarioKind) -> Self {
        Self {
            kind,
            isd_m: kind.isd(),
            bs_height_m: kind.bs_height(),
            ue_height: HeightMode::Fixed,
            ue_height_m: GROUND_UE_HEIGHT,
            cell_azimuth_deg: 0.0,
            drops: 200,
            users: 16,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    pub coverage_threshold_dbm: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            tx_power_dbm: 43.0,
            noise_power_dbm: (thermal_noise_dbm(20e6, 9.0) * 100.0).round() / 100.0,
            coverage_threshold_dbm: -120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    FreeSpace,
    #[serde(rename = "3gpp-los")]
    ThreeGppLos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub mode: ChannelMode,
    pub penetration_loss_db: f64,
    pub condition_cap: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            mode: ChannelMode::FreeSpace,
            penetration_loss_db: 0.0,
            condition_cap: DEFAULT_CONDITION_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphabetChoice {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "l")]
    L,
    #[serde(rename = "p+l")]
    PL,
    #[serde(rename = "baseline")]
    Baseline,
    #[serde(rename = "custom")]
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TilingConfig {
    pub alphabet: AlphabetChoice,
    /// Shape file for `alphabet = "custom"`, relative to the working directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphabet_file: Option<PathBuf>,
    /// Evaluate every `stride`-th tiling; 1 is exhaustive.
    pub stride: usize,
}

impl Default for TilingConfig {
    fn default() -> Self {
        Self {
            alphabet: AlphabetChoice::P,
            alphabet_file: None,
            stride: 1,
        }
    }
}

/// Execution settings. They never change results and are left out of the
/// configuration hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// 0 uses every available core.
    pub workers: usize,
    pub chunk_size: usize,
    pub output_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            workers: 0,
            chunk_size: 2048,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn for_scenario(kind: ScenarioKind) -> Self {
        Self {
            scenario: ScenarioConfig::preset(kind),
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the result-relevant sections.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.run = RunSection::default();
        let digest = Sha256::digest(canonical.to_toml_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let err = |m: String| -> anyhow::Result<()> { Err(ConfigError(m).into()) };
        let a = &self.array;
        if a.columns == 0 || a.rows == 0 {
            return err("array needs at least one column and one row".into());
        }
        if !(a.frequency_ghz > 0.0 && a.spacing_y_wavelengths > 0.0 && a.spacing_z_wavelengths > 0.0) {
            return err("frequency and element spacings must be positive".into());
        }
        self.pattern()
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        let s = &self.scenario;
        if s.drops == 0 || s.users == 0 {
            return err("scenario needs at least one drop and one user".into());
        }
        if !(s.isd_m > 0.0) {
            return err("isd_m must be positive".into());
        }
        if self.tiling.stride == 0 {
            return err("tiling.stride must be at least 1".into());
        }
        if self.run.chunk_size == 0 {
            return err("run.chunk_size must be at least 1".into());
        }
        if !(self.channel.condition_cap > 1.0) {
            return err("channel.condition_cap must exceed 1".into());
        }
        if self.tiling.alphabet == AlphabetChoice::Custom && self.tiling.alphabet_file.is_none() {
            return err("alphabet = \"custom\" needs tiling.alphabet_file".into());
        }
        if self.tiling.alphabet != AlphabetChoice::Custom {
            let k = 6;
            let pixels = a.columns * a.rows;
            if !pixels.is_multiple_of(k) {
                return err(format!("{} elements cannot be split into hexomino tiles", pixels));
            }
            let q = pixels / k;
            if s.users > q {
                return err(format!(
                    "{} users exceed the {} sub-arrays available for zero forcing",
                    s.users, q
                ));
            }
        }
        Ok(())
    }

    pub fn aperture(&self) -> anyhow::Result<Aperture> {
        Ok(Aperture::new(self.array.columns, self.array.rows).map_err(|e| ConfigError(e.to_string()))?)
    }

    pub fn geometry(&self) -> anyhow::Result<ArrayGeometry> {
        Ok(ArrayGeometry::from_wavelengths(
            self.array.columns,
            self.array.rows,
            self.array.spacing_y_wavelengths,
            self.array.spacing_z_wavelengths,
            self.scenario.bs_height_m,
            self.array.frequency_ghz * 1e9,
        )
        .map_err(|e| ConfigError(e.to_string()))?)
    }

    pub fn pattern(&self) -> ElementPattern {
        let e = &self.element;
        ElementPattern {
            gain_dbi: e.gain_dbi,
            beamwidth_azimuth_deg: e.beamwidth_azimuth_deg,
            beamwidth_elevation_deg: e.beamwidth_elevation_deg,
            front_to_back_db: e.front_to_back_db,
            side_lobe_vertical_db: e.side_lobe_vertical_db,
        }
    }

    pub fn propagation(&self) -> Propagation {
        Propagation {
            path_loss: match self.channel.mode {
                ChannelMode::FreeSpace => PathLoss::FreeSpace,
                ChannelMode::ThreeGppLos => PathLoss::ThreeGppLos {
                    scenario: self.scenario.kind,
                },
            },
            penetration_loss_db: self.channel.penetration_loss_db,
        }
    }

    pub fn channel_source(&self) -> anyhow::Result<LosChannel> {
        Ok(LosChannel {
            geometry: self.geometry()?,
            pattern: self.pattern(),
            propagation: self.propagation(),
        })
    }

    pub fn budget(&self) -> anyhow::Result<LinkBudget> {
        let l = &self.link;
        Ok(
            LinkBudget::from_dbm(l.tx_power_dbm, l.noise_power_dbm, l.coverage_threshold_dbm)
                .map_err(|e| ConfigError(e.to_string()))?,
        )
    }

    pub fn zf_options(&self) -> ZfOptions {
        ZfOptions {
            condition_cap: self.channel.condition_cap,
        }
    }

    pub fn scenario_params(&self) -> ScenarioParams {
        let s = &self.scenario;
        ScenarioParams {
            kind: s.kind,
            isd: s.isd_m,
            bs_height: s.bs_height_m,
            ue_height: match s.ue_height {
                HeightMode::Fixed => UeHeight::Fixed {
                    height_m: s.ue_height_m,
                },
                HeightMode::Floors => UeHeight::Floors,
            },
            cell_azimuth_deg: s.cell_azimuth_deg,
            drops: s.drops,
            users: s.users,
            seed: s.seed,
        }
    }

    pub fn alphabet(&self) -> anyhow::Result<Alphabet> {
        Ok(match self.tiling.alphabet {
            AlphabetChoice::P => Alphabet::p_hexomino(),
            AlphabetChoice::L => Alphabet::l_hexomino(),
            AlphabetChoice::PL => Alphabet::p_and_l_hexominoes(),
            AlphabetChoice::Baseline => Alphabet::baseline(),
            AlphabetChoice::Custom => {
                let Some(path) = &self.tiling.alphabet_file else {
                    bail!(ConfigError("custom alphabet without a file".into()));
                };
                let text = std::fs::read_to_string(path)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
                Alphabet::from_toml_str(&text).map_err(|e| ConfigError(e.to_string()))?
            }
        })
    }

    pub fn channel_label(&self) -> String {
        self.propagation().label()
    }
}
