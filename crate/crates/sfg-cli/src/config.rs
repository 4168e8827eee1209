//! Configuration file schema, unit-suffix parsing and validation.
//!
//! Configs are TOML with dotted sections. Every physical value may be given
//! either as a plain number in SI base units (Hz, s, s², rad) or as a string
//! with an explicit scale suffix (`"113 THz"`, `"-300 fs2"`, `"0.41 pi"`).
//! Values are resolved to SI immediately after parsing so the simulation
//! never mixes scales; validation reports the dotted path of the offending
//! field. The resolved form serializes back out (in the run summary) as the
//! same schema with plain numbers, which is itself a loadable config.

use std::f64::consts::PI;
use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sfg_core::lockin::{DemodMode, SeedConfig};
use sfg_core::pump::ParametricConfig;
use sfg_core::spectral::{DensityShape, FrequencyConvention, ModeGrid, PhaseProfile};

use crate::error::{CliError, CliResult};

/// A config value: plain SI number or a string with a unit suffix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    Frequency,
    Time,
    SquaredTime,
    QuarticTime,
    Angle,
    Dimensionless,
}

impl UnitKind {
    fn table(self) -> &'static [(&'static str, f64)] {
        match self {
            UnitKind::Frequency => &[
                ("THz", 1e12),
                ("GHz", 1e9),
                ("MHz", 1e6),
                ("kHz", 1e3),
                ("Hz", 1.0),
            ],
            UnitKind::Time => &[
                ("fs", 1e-15),
                ("ps", 1e-12),
                ("ns", 1e-9),
                ("us", 1e-6),
                ("ms", 1e-3),
                ("s", 1.0),
            ],
            UnitKind::SquaredTime => &[
                ("fs²", 1e-30),
                ("fs^2", 1e-30),
                ("fs2", 1e-30),
                ("ps²", 1e-24),
                ("ps^2", 1e-24),
                ("ps2", 1e-24),
                ("s²", 1.0),
                ("s^2", 1.0),
                ("s2", 1.0),
            ],
            UnitKind::QuarticTime => &[
                ("fs⁴", 1e-60),
                ("fs^4", 1e-60),
                ("fs4", 1e-60),
                ("s⁴", 1.0),
                ("s^4", 1.0),
                ("s4", 1.0),
            ],
            UnitKind::Angle => &[("pi", PI), ("rad", 1.0), ("deg", PI / 180.0)],
            UnitKind::Dimensionless => &[],
        }
    }

    fn name(self) -> &'static str {
        match self {
            UnitKind::Frequency => "frequency",
            UnitKind::Time => "time",
            UnitKind::SquaredTime => "squared-time",
            UnitKind::QuarticTime => "quartic-time",
            UnitKind::Angle => "angle",
            UnitKind::Dimensionless => "dimensionless",
        }
    }
}

fn parse_quantity(text: &str, kind: UnitKind) -> Result<f64, String> {
    let trimmed = text.trim();
    if let Ok(v) = trimmed.parse::<f64>() {
        return Ok(v);
    }
    for (suffix, scale) in kind.table() {
        if let Some(rest) = trimmed.strip_suffix(suffix) {
            let rest = rest.trim();
            let value = if rest.is_empty() {
                1.0
            } else {
                rest.parse::<f64>()
                    .map_err(|_| format!("cannot parse '{trimmed}' as a number with unit {suffix}"))?
            };
            return Ok(value * scale);
        }
    }
    let known: Vec<&str> = kind.table().iter().map(|(s, _)| *s).collect();
    Err(format!(
        "cannot parse '{trimmed}' as a {} quantity (known suffixes: {known:?})",
        kind.name()
    ))
}

fn resolve(raw: &Option<RawValue>, default: f64, kind: UnitKind, field: &str) -> CliResult<f64> {
    match raw {
        None => Ok(default),
        Some(RawValue::Number(v)) => Ok(*v),
        Some(RawValue::Text(s)) => {
            parse_quantity(s, kind).map_err(|e| CliError::Config(format!("{field}: {e}")))
        }
    }
}

fn resolve_optional(raw: &Option<RawValue>, kind: UnitKind, field: &str) -> CliResult<Option<f64>> {
    match raw {
        None => Ok(None),
        Some(_) => resolve(raw, 0.0, kind, field).map(Some),
    }
}

// ---------------------------------------------------------------------------
// Raw (on-disk) schema. All fields optional; defaults are the experiment's
// headline parameters: 113 THz bandwidth at 0.5 THz resolution, g = 0.03,
// residue amplitude 0.1, seeded pair locked at π.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    grid: RawGrid,
    phase: RawPhase,
    dither: RawDither,
    parametric: RawParametric,
    seed: RawSeed,
    scan: RawScan,
    matched_filter: RawMatchedFilter,
    separability: RawSeparability,
    oracle: RawOracle,
    output: RawOutput,
    run: RawRun,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGrid {
    bandwidth: Option<RawValue>,
    resolution: Option<RawValue>,
    center: Option<RawValue>,
    density: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPhase {
    global: Option<RawValue>,
    gdd: Option<RawValue>,
    quartic: Option<RawValue>,
    convention: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDither {
    amplitude: Option<RawValue>,
    frequency: Option<RawValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawParametric {
    pump_amplitude: Option<RawValue>,
    pump_phase: Option<RawValue>,
    coupling: Option<RawValue>,
    shaper_transmission: Option<RawValue>,
    residue_amplitude: Option<RawValue>,
    residue_phase: Option<RawValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSeed {
    amplitude: Option<RawValue>,
    pair_phase: Option<RawValue>,
    mode_offset: Option<RawValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawScan {
    points: Option<usize>,
    min: Option<RawValue>,
    max: Option<RawValue>,
    mode: Option<String>,
    samples: Option<usize>,
    compensate_seed: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMatchedFilter {
    bins: Option<usize>,
    amplitude: Option<RawValue>,
    spacing: Option<RawValue>,
    noise_power: Option<RawValue>,
    draws: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSeparability {
    time_uncertainty: Option<RawValue>,
    frequency_sum_uncertainty: Option<RawValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOracle {
    pump_amplitude: Option<RawValue>,
    chi_t: Option<RawValue>,
    pairs: Option<usize>,
    seed_amplitude: Option<RawValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    directory: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRun {
    rng_seed: Option<u64>,
    workers: Option<usize>,
}

// ---------------------------------------------------------------------------
// Resolved configuration: everything in SI base units. Serializing this is
// the run snapshot; the snapshot parses back through the raw schema.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub grid: GridSection,
    pub phase: PhaseSection,
    pub dither: DitherSection,
    pub parametric: ParametricSection,
    pub seed: SeedSection,
    pub scan: ScanSection,
    pub matched_filter: MatchedFilterSection,
    pub separability: SeparabilitySection,
    pub oracle: OracleSection,
    pub output: OutputSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSection {
    pub bandwidth: f64,
    pub resolution: f64,
    pub center: f64,
    pub density: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseSection {
    pub global: f64,
    pub gdd: f64,
    pub quartic: f64,
    pub convention: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DitherSection {
    /// Dither amplitude, rad.
    pub amplitude: f64,
    /// Dither frequency, Hz (converted to angular internally).
    pub frequency: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParametricSection {
    pub pump_amplitude: f64,
    pub pump_phase: f64,
    pub coupling: f64,
    pub shaper_transmission: f64,
    pub residue_amplitude: f64,
    pub residue_phase: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedSection {
    pub amplitude: f64,
    pub pair_phase: f64,
    pub mode_offset: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanSection {
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub mode: String,
    pub samples: usize,
    pub compensate_seed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchedFilterSection {
    pub bins: usize,
    pub amplitude: f64,
    pub spacing: f64,
    pub noise_power: f64,
    pub draws: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparabilitySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_uncertainty: Option<f64>,
    pub frequency_sum_uncertainty: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSection {
    pub pump_amplitude: f64,
    pub chi_t: f64,
    pub pairs: usize,
    pub seed_amplitude: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSection {
    pub directory: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSection {
    pub rng_seed: u64,
    pub workers: usize,
}

impl RawConfig {
    /// Reads a config file, or returns defaults when no path is given.
    ///
    /// TOML is the primary format. A JSON document is also accepted — either
    /// a bare config object or a run summary, whose embedded `config`
    /// snapshot then reproduces the original run exactly.
    pub fn load(path: Option<&Path>) -> CliResult<RawConfig> {
        let Some(p) = path else {
            return Ok(RawConfig::default());
        };
        let text = fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
        if text.trim_start().starts_with('{') {
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?;
            if let Some(snapshot) = value.get_mut("config") {
                value = snapshot.take();
            }
            serde_json::from_value(value)
                .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))
        }
    }

    /// Scan lower bound in the axis units of the requested experiment.
    pub fn scan_min(&self, kind: UnitKind, default: f64) -> CliResult<f64> {
        resolve(&self.scan.min, default, kind, "scan.min")
    }

    /// Scan upper bound in the axis units of the requested experiment.
    pub fn scan_max(&self, kind: UnitKind, default: f64) -> CliResult<f64> {
        resolve(&self.scan.max, default, kind, "scan.max")
    }

    /// Resolves all quantities to SI and validates field constraints.
    pub fn resolve(&self) -> CliResult<Config> {
        use UnitKind::*;

        let grid = GridSection {
            bandwidth: resolve(&self.grid.bandwidth, 113e12, Frequency, "grid.bandwidth")?,
            resolution: resolve(&self.grid.resolution, 0.5e12, Frequency, "grid.resolution")?,
            center: resolve(&self.grid.center, 169.4e12, Frequency, "grid.center")?,
            density: self
                .grid
                .density
                .clone()
                .unwrap_or_else(|| "flat".to_string()),
        };
        if !grid.bandwidth.is_finite() || grid.bandwidth <= 0.0 {
            return Err(CliError::Config(format!(
                "grid.bandwidth: must be positive, got {}",
                grid.bandwidth
            )));
        }
        if !grid.resolution.is_finite() || grid.resolution <= 0.0 || grid.resolution > grid.bandwidth {
            return Err(CliError::Config(format!(
                "grid.resolution: must be in (0, bandwidth], got {}",
                grid.resolution
            )));
        }
        if !matches!(grid.density.as_str(), "flat" | "gaussian") {
            return Err(CliError::Config(format!(
                "grid.density: expected 'flat' or 'gaussian', got '{}'",
                grid.density
            )));
        }

        let phase = PhaseSection {
            global: resolve(&self.phase.global, 0.0, Angle, "phase.global")?,
            gdd: resolve(&self.phase.gdd, 0.0, SquaredTime, "phase.gdd")?,
            quartic: resolve(&self.phase.quartic, 0.0, QuarticTime, "phase.quartic")?,
            convention: self
                .phase
                .convention
                .clone()
                .unwrap_or_else(|| "angular".to_string()),
        };
        if !matches!(phase.convention.as_str(), "angular" | "ordinary") {
            return Err(CliError::Config(format!(
                "phase.convention: expected 'angular' or 'ordinary', got '{}'",
                phase.convention
            )));
        }

        let dither = DitherSection {
            amplitude: resolve(&self.dither.amplitude, 0.5, Angle, "dither.amplitude")?,
            frequency: resolve(&self.dither.frequency, 173e3, Frequency, "dither.frequency")?,
        };
        if dither.amplitude.is_nan() || dither.amplitude < 0.0 {
            return Err(CliError::Config(format!(
                "dither.amplitude: must be >= 0, got {}",
                dither.amplitude
            )));
        }
        if dither.frequency.is_nan() || dither.frequency < 0.0 {
            return Err(CliError::Config(format!(
                "dither.frequency: must be >= 0, got {}",
                dither.frequency
            )));
        }

        let parametric = ParametricSection {
            pump_amplitude: resolve(
                &self.parametric.pump_amplitude,
                1000.0,
                Dimensionless,
                "parametric.pump_amplitude",
            )?,
            pump_phase: resolve(&self.parametric.pump_phase, 0.0, Angle, "parametric.pump_phase")?,
            coupling: resolve(
                &self.parametric.coupling,
                3e-5,
                Dimensionless,
                "parametric.coupling",
            )?,
            shaper_transmission: resolve(
                &self.parametric.shaper_transmission,
                1.0,
                Dimensionless,
                "parametric.shaper_transmission",
            )?,
            residue_amplitude: resolve(
                &self.parametric.residue_amplitude,
                0.1,
                Dimensionless,
                "parametric.residue_amplitude",
            )?,
            residue_phase: resolve(
                &self.parametric.residue_phase,
                0.0,
                Angle,
                "parametric.residue_phase",
            )?,
        };
        if parametric.pump_amplitude.is_nan() || parametric.pump_amplitude < 0.0 {
            return Err(CliError::Config(format!(
                "parametric.pump_amplitude: must be >= 0, got {}",
                parametric.pump_amplitude
            )));
        }
        if parametric.coupling.is_nan() || parametric.coupling < 0.0 {
            return Err(CliError::Config(format!(
                "parametric.coupling: must be >= 0, got {}",
                parametric.coupling
            )));
        }
        if !(0.0..=1.0).contains(&parametric.shaper_transmission) {
            return Err(CliError::Config(format!(
                "parametric.shaper_transmission: must be within [0, 1], got {}",
                parametric.shaper_transmission
            )));
        }
        if parametric.residue_amplitude.is_nan() || parametric.residue_amplitude < 0.0 {
            return Err(CliError::Config(format!(
                "parametric.residue_amplitude: must be >= 0, got {}",
                parametric.residue_amplitude
            )));
        }

        let seed = SeedSection {
            amplitude: resolve(
                &self.seed.amplitude,
                10.0f64.sqrt(),
                Dimensionless,
                "seed.amplitude",
            )?,
            pair_phase: resolve(&self.seed.pair_phase, PI, Angle, "seed.pair_phase")?,
            mode_offset: resolve(&self.seed.mode_offset, 22.75e12, Frequency, "seed.mode_offset")?,
        };
        if seed.amplitude.is_nan() || seed.amplitude < 0.0 {
            return Err(CliError::Config(format!(
                "seed.amplitude: must be >= 0, got {}",
                seed.amplitude
            )));
        }

        let scan = ScanSection {
            points: self.scan.points.unwrap_or(401),
            min: None, // resolved per experiment kind
            max: None,
            mode: self
                .scan
                .mode
                .clone()
                .unwrap_or_else(|| "analytic".to_string()),
            samples: self.scan.samples.unwrap_or(256),
            compensate_seed: self.scan.compensate_seed.unwrap_or(true),
        };
        if scan.points < 2 {
            return Err(CliError::Config(format!(
                "scan.points: must be at least 2, got {}",
                scan.points
            )));
        }
        if !matches!(scan.mode.as_str(), "analytic" | "numeric") {
            return Err(CliError::Config(format!(
                "scan.mode: expected 'analytic' or 'numeric', got '{}'",
                scan.mode
            )));
        }
        if scan.mode == "numeric" && scan.samples < 64 {
            return Err(CliError::Config(format!(
                "scan.samples: numeric demodulation needs at least 64, got {}",
                scan.samples
            )));
        }

        let matched_filter = MatchedFilterSection {
            bins: self.matched_filter.bins.unwrap_or(100),
            amplitude: resolve(
                &self.matched_filter.amplitude,
                1.0,
                Dimensionless,
                "matched_filter.amplitude",
            )?,
            spacing: resolve(
                &self.matched_filter.spacing,
                1.0,
                Frequency,
                "matched_filter.spacing",
            )?,
            noise_power: resolve(
                &self.matched_filter.noise_power,
                1.0,
                Dimensionless,
                "matched_filter.noise_power",
            )?,
            draws: self.matched_filter.draws.unwrap_or(10_000),
        };
        if matched_filter.bins == 0 {
            return Err(CliError::Config(
                "matched_filter.bins: must be at least 1".to_string(),
            ));
        }
        if !matched_filter.spacing.is_finite() || matched_filter.spacing <= 0.0 {
            return Err(CliError::Config(format!(
                "matched_filter.spacing: must be positive, got {}",
                matched_filter.spacing
            )));
        }
        if matched_filter.noise_power.is_nan() || matched_filter.noise_power < 0.0 {
            return Err(CliError::Config(format!(
                "matched_filter.noise_power: must be >= 0, got {}",
                matched_filter.noise_power
            )));
        }
        if matched_filter.draws == 0 {
            return Err(CliError::Config(
                "matched_filter.draws: must be at least 1".to_string(),
            ));
        }

        let separability = SeparabilitySection {
            time_uncertainty: resolve_optional(
                &self.separability.time_uncertainty,
                Time,
                "separability.time_uncertainty",
            )?,
            frequency_sum_uncertainty: resolve(
                &self.separability.frequency_sum_uncertainty,
                20.0,
                Frequency,
                "separability.frequency_sum_uncertainty",
            )?,
        };

        let oracle = OracleSection {
            pump_amplitude: resolve(
                &self.oracle.pump_amplitude,
                4.0,
                Dimensionless,
                "oracle.pump_amplitude",
            )?,
            chi_t: resolve(&self.oracle.chi_t, 0.0125, Dimensionless, "oracle.chi_t")?,
            pairs: self.oracle.pairs.unwrap_or(1),
            seed_amplitude: resolve(
                &self.oracle.seed_amplitude,
                0.0,
                Dimensionless,
                "oracle.seed_amplitude",
            )?,
        };
        if !(1..=2).contains(&oracle.pairs) {
            return Err(CliError::Config(format!(
                "oracle.pairs: must be 1 or 2, got {}",
                oracle.pairs
            )));
        }
        if !oracle.pump_amplitude.is_finite() || oracle.pump_amplitude <= 0.0 {
            return Err(CliError::Config(format!(
                "oracle.pump_amplitude: must be positive, got {}",
                oracle.pump_amplitude
            )));
        }

        Ok(Config {
            grid,
            phase,
            dither,
            parametric,
            seed,
            scan,
            matched_filter,
            separability,
            oracle,
            output: OutputSection {
                directory: self
                    .output
                    .directory
                    .clone()
                    .unwrap_or_else(|| "out".to_string()),
            },
            run: RunSection {
                rng_seed: self.run.rng_seed.unwrap_or(42),
                workers: self.run.workers.unwrap_or(0),
            },
        })
    }
}

impl Config {
    pub fn mode_grid(&self) -> CliResult<ModeGrid> {
        let shape = match self.grid.density.as_str() {
            "gaussian" => DensityShape::Gaussian,
            _ => DensityShape::Flat,
        };
        Ok(ModeGrid::build(
            self.grid.bandwidth,
            self.grid.resolution,
            self.grid.center,
            shape,
        )?)
    }

    pub fn phase_profile(&self) -> PhaseProfile {
        PhaseProfile {
            global_phase: self.phase.global,
            gdd: self.phase.gdd,
            quartic: self.phase.quartic,
            dither_amplitude: self.dither.amplitude,
            dither_frequency: TAU * self.dither.frequency,
            convention: self.frequency_convention(),
        }
    }

    pub fn frequency_convention(&self) -> FrequencyConvention {
        match self.phase.convention.as_str() {
            "ordinary" => FrequencyConvention::Ordinary,
            _ => FrequencyConvention::Angular,
        }
    }

    pub fn parametric(&self) -> CliResult<ParametricConfig> {
        Ok(ParametricConfig::from_polar(
            self.parametric.pump_amplitude,
            self.parametric.pump_phase,
            self.parametric.coupling,
            self.parametric.shaper_transmission,
            self.parametric.residue_amplitude,
            self.parametric.residue_phase,
        )?)
    }

    /// Seed config, or `None` when the amplitude is zero.
    pub fn seed_config(&self) -> Option<SeedConfig> {
        if self.seed.amplitude > 0.0 {
            Some(SeedConfig {
                amplitude: self.seed.amplitude,
                pair_phase_setpoint: self.seed.pair_phase,
                mode_offset: self.seed.mode_offset,
            })
        } else {
            None
        }
    }

    pub fn demod_mode(&self) -> DemodMode {
        match self.scan.mode.as_str() {
            "numeric" => DemodMode::Numeric {
                samples: self.scan.samples,
            },
            _ => DemodMode::Analytic,
        }
    }

    /// Width scale of the central coherence feature, `4π/W²` with `W` the
    /// full bandwidth in the configured phase convention.
    pub fn predicted_peak_width(&self) -> f64 {
        let w = self.frequency_convention().phase_variable(self.grid.bandwidth);
        4.0 * PI / (w * w)
    }

    /// Fourier-limited pair time correlation, `1/Δν`.
    pub fn predicted_time_correlation(&self) -> f64 {
        sfg_core::filter::bandwidth_to_time(self.grid.bandwidth)
    }
}
