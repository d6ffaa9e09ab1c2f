//! TOML run configuration: schema, defaults and validation.
//!
//! Every section rejects unknown keys. Paths are resolved against the
//! directory of the config file.

use crate::CliError;
use qot_core::units::nm_to_thz;
use qot_core::{build_channel_plan, BandGap, ChannelPlan, Constellation, FiberSpec, GridRequest, Pump, PumpSet, Table};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seeds the optimizer, the random suite and the SSFM symbols
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub fiber: FiberSection,
    pub grid: GridSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub pumps: Vec<PumpEntry>,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub nli: NliSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSection>,
    #[serde(default)]
    pub ssfm: SsfmSection,
    #[serde(default)]
    pub validate: ValidateSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_seed() -> u64 {
    1
}

/// Fiber scalars; the spectra default to the built-in G.652.D-like tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberSection {
    /// CSV: wavelength_nm, attenuation_db_per_km
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attenuation_csv: Option<PathBuf>,
    /// CSV: delta_frequency_thz, raman_gain_per_w_per_km
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raman_gain_csv: Option<PathBuf>,
    /// Pump wavelength the gain table was measured with
    pub raman_reference_nm: f64,
    /// 1/(W km)
    pub gamma: f64,
    /// ps/(nm km)
    pub dispersion: f64,
    /// ps/(nm² km)
    pub dispersion_slope: f64,
    pub reference_nm: f64,
    pub span_km: f64,
}

impl Default for FiberSection {
    fn default() -> Self {
        let f = FiberSpec::g652d_like();
        Self {
            attenuation_csv: None,
            raman_gain_csv: None,
            raman_reference_nm: qot_core::fiber::G652D_RAMAN_REFERENCE_NM,
            gamma: f.gamma,
            dispersion: f.dispersion_d,
            dispersion_slope: f.dispersion_slope,
            reference_nm: f.reference_wavelength_nm,
            span_km: f.span_length_km,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub center_nm: f64,
    pub channels: usize,
    pub symbol_rate_gbd: f64,
    pub spacing_ghz: f64,
    #[serde(default)]
    pub power_dbm: f64,
    #[serde(default = "default_constellation")]
    pub constellation: String,
    #[serde(default)]
    pub gaps: Vec<GapEntry>,
}

fn default_constellation() -> String {
    "gaussian".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapEntry {
    pub boundary_nm: f64,
    pub width_nm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub spans: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_ase_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_trx_db: Option<f64>,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self { spans: 1, snr_ase_db: None, snr_trx_db: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PumpDirection {
    #[default]
    Backward,
    Forward,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpEntry {
    pub wavelength_nm: f64,
    pub power_mw: f64,
    #[serde(default)]
    pub direction: PumpDirection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    /// z samples of the solved profile
    pub z_samples: usize,
    /// Channels fitted worse than this (dB RMS) raise a warning
    pub ceiling_db: f64,
}

impl Default for FitSection {
    fn default() -> Self {
        Self { z_samples: 101, ceiling_db: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendTag {
    #[default]
    Closed,
    Integral,
}

impl BackendTag {
    pub fn backend(self) -> qot_nli::Backend {
        match self {
            BackendTag::Closed => qot_nli::Backend::Closed,
            BackendTag::Integral => qot_nli::Backend::Integral,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolarizationTag {
    #[default]
    Dual,
    Single,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NliSection {
    pub backend: BackendTag,
    pub polarization: PolarizationTag,
    /// Relative tolerance of the integral backend
    pub rel_tol: f64,
}

impl Default for NliSection {
    fn default() -> Self {
        Self { backend: BackendTag::Closed, polarization: PolarizationTag::Dual, rel_tol: 1e-5 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryTag {
    #[default]
    PerChannel,
    BandAverage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    /// Candidate wavelengths; empty means those of `[[pumps]]`
    #[serde(default)]
    pub wavelengths_nm: Vec<f64>,
    #[serde(default = "default_cap")]
    pub max_power_mw: f64,
    /// Target band as [short, long] wavelength
    pub band_nm: [f64; 2],
    #[serde(default = "default_tolerance")]
    pub tolerance_db: f64,
    #[serde(default)]
    pub recovery: RecoveryTag,
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_evaluations")]
    pub max_evaluations: usize,
    /// Neighbouring channels merged per search-plan channel
    #[serde(default = "default_bin")]
    pub search_bin: usize,
}

fn default_cap() -> f64 {
    250.0
}
fn default_tolerance() -> f64 {
    0.1
}
fn default_population() -> usize {
    16
}
fn default_evaluations() -> usize {
    800
}
fn default_bin() -> usize {
    3
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SsfmGain {
    /// Solved Raman profile (pumps and SRS)
    #[default]
    Profile,
    /// Fiber attenuation only
    Loss,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SsfmSection {
    pub symbols: usize,
    pub samples_per_symbol: usize,
    pub max_phase_rad: f64,
    pub gain: SsfmGain,
}

impl Default for SsfmSection {
    fn default() -> Self {
        let d = qot_ssfm::SsfmConfig::default();
        Self {
            symbols: d.symbols_per_channel,
            samples_per_symbol: d.samples_per_symbol,
            max_phase_rad: d.max_phase_rad,
            gain: SsfmGain::Profile,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Random suite size; 0 checks only the configured link
    pub suite_cases: usize,
    pub tolerance_db: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self { suite_cases: 0, tolerance_db: 0.3 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv }
    }
}

/// The physical link a config describes, built and validated.
#[derive(Clone, Debug)]
pub struct Link {
    pub fiber: FiberSpec,
    pub plan: ChannelPlan,
    pub pumps: PumpSet,
    pub n_spans: usize,
}

/// A parsed config, the directory its paths are relative to, and the SHA-256
/// of its canonical form plus any referenced spectra.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub link: Link,
    pub sha256: String,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve(&self, base: &Path, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }

    fn spectra(&self, base: &Path) -> Vec<PathBuf> {
        [&self.fiber.attenuation_csv, &self.fiber.raman_gain_csv]
            .into_iter()
            .flatten()
            .map(|p| self.resolve(base, p))
            .collect()
    }

    pub fn build_fiber(&self, base: &Path) -> Result<FiberSpec, CliError> {
        let s = &self.fiber;
        let mut f = FiberSpec::g652d_like();
        if let Some(p) = &s.attenuation_csv {
            f.attenuation = Table::from_csv(self.resolve(base, p), "attenuation")?;
        }
        if let Some(p) = &s.raman_gain_csv {
            f.raman_gain = Table::from_csv(self.resolve(base, p), "raman gain")?;
        }
        f.raman_reference_thz = nm_to_thz(s.raman_reference_nm);
        f.gamma = s.gamma;
        f.dispersion_d = s.dispersion;
        f.dispersion_slope = s.dispersion_slope;
        f.reference_wavelength_nm = s.reference_nm;
        f.span_length_km = s.span_km;
        f.validate()?;
        Ok(f)
    }

    pub fn build_plan(&self) -> Result<ChannelPlan, CliError> {
        let g = &self.grid;
        let constellation = Constellation::from_tag(&g.constellation)
            .ok_or_else(|| CliError::Config(format!("grid.constellation: unknown tag `{}`", g.constellation)))?;
        Ok(build_channel_plan(&GridRequest {
            center_nm: g.center_nm,
            n_channels: g.channels,
            symbol_rate_gbd: g.symbol_rate_gbd,
            spacing_ghz: g.spacing_ghz,
            gaps: g.gaps.iter().map(|x| BandGap { boundary_nm: x.boundary_nm, gap_nm: x.width_nm }).collect(),
            power_dbm: g.power_dbm,
            constellation,
        })?)
    }

    pub fn build_pumps(&self) -> Result<PumpSet, CliError> {
        let pumps = self
            .pumps
            .iter()
            .map(|p| match p.direction {
                PumpDirection::Backward => Pump::backward(p.wavelength_nm, p.power_mw),
                PumpDirection::Forward => Pump::forward(p.wavelength_nm, p.power_mw),
            })
            .collect();
        Ok(PumpSet::new(pumps)?)
    }

    pub fn build_link(&self, base: &Path) -> Result<Link, CliError> {
        if self.link.spans == 0 {
            return Err(CliError::Config("link.spans must be >= 1".into()));
        }
        if self.fit.z_samples < 64 {
            return Err(CliError::Config("fit.z_samples must be >= 64".into()));
        }
        if let Some(o) = &self.optimize {
            if !(o.band_nm[0] <= o.band_nm[1]) {
                return Err(CliError::Config("optimize.band_nm must be [short, long]".into()));
            }
            if o.search_bin == 0 || o.population < 4 {
                return Err(CliError::Config("optimize: search_bin >= 1 and population >= 4".into()));
            }
        }
        Ok(Link {
            fiber: self.build_fiber(base)?,
            plan: self.build_plan()?,
            pumps: self.build_pumps()?,
            n_spans: self.link.spans,
        })
    }

    /// Validate against `base` and fingerprint the result.
    pub fn load(self, base: &Path) -> Result<Loaded, CliError> {
        for p in self.spectra(base) {
            if !p.is_file() {
                return Err(CliError::Io {
                    path: p.display().to_string(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file does not exist"),
                });
            }
        }
        let link = self.build_link(base)?;
        // where the results go does not change them
        let canonical = RunConfig { output: OutputSection::default(), ..self.clone() };
        let mut h = Sha256::new();
        h.update(canonical.to_toml().as_bytes());
        for p in self.spectra(base) {
            let bytes = std::fs::read(&p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
            h.update(&bytes);
        }
        let sha256 = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Ok(Loaded { config: self, base_dir: base.to_path_buf(), link, sha256 })
    }
}

/// Read, parse and validate a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<Loaded, CliError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    RunConfig::from_toml(&text)
        .map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            e => e,
        })?
        .load(&base)
}
