//! Experiment dispatch: builds the simulation inputs from the resolved
//! config, runs the requested experiment and writes the CSV/JSON artifacts.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sfg_core::filter::{
    background_peak_power_mc, matched_filter, separability, snr_peak, ClassicalField,
};
use sfg_core::fock::{validate_perturbation, OracleSpace, Scenario};
use sfg_core::lockin::{gdd_scan, loss_scan, residue_scan, su11_fringe_contrast, su11_spectrum};
use sfg_core::pump::PERTURBATIVE_GAIN_BOUND;

use crate::config::{Config, RawConfig, UnitKind};
use crate::error::{CliError, CliResult};
use crate::output::{
    write_json, write_matched_filter_csv, write_scan_csv, write_su11_csv,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    GddScan,
    LossScan,
    ResidueScan,
    Su11Spectrum,
    OracleValidate,
    MatchedFilter,
    Separability,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::GddScan => "gdd-scan",
            Experiment::LossScan => "loss-scan",
            Experiment::ResidueScan => "residue-scan",
            Experiment::Su11Spectrum => "su11-spectrum",
            Experiment::OracleValidate => "oracle-validate",
            Experiment::MatchedFilter => "matched-filter",
            Experiment::Separability => "separability",
        }
    }

    fn csv_name(self) -> Option<&'static str> {
        match self {
            Experiment::GddScan => Some("gdd_scan.csv"),
            Experiment::LossScan => Some("loss_scan.csv"),
            Experiment::ResidueScan => Some("residue_scan.csv"),
            Experiment::Su11Spectrum => Some("su11_spectrum.csv"),
            Experiment::MatchedFilter => Some("matched_filter.csv"),
            Experiment::OracleValidate | Experiment::Separability => None,
        }
    }

    fn scan_axis(self) -> Option<UnitKind> {
        match self {
            Experiment::GddScan => Some(UnitKind::SquaredTime),
            Experiment::LossScan => Some(UnitKind::Dimensionless),
            Experiment::ResidueScan => Some(UnitKind::Angle),
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct Derived {
    gain: f64,
    mode_count: usize,
    predicted_peak_width_s2: f64,
    predicted_time_correlation_s: f64,
}

#[derive(Serialize)]
struct Outputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    csv: Option<&'static str>,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'static str,
    derived: Derived,
    warnings: &'a [String],
    results: serde_json::Value,
    outputs: Outputs,
    config: &'a Config,
}

#[derive(Serialize)]
struct ScanSummary {
    points: usize,
    parameter_min: f64,
    parameter_max: f64,
    demod_signal_min: f64,
    demod_signal_max: f64,
    rf_power_max: f64,
}

#[derive(Serialize)]
struct Su11Summary {
    mode_count: usize,
    fringe_contrast: f64,
    intensity_min: f64,
    intensity_max: f64,
}

#[derive(Serialize)]
struct OracleSummary {
    scenario: &'static str,
    pump_amplitude: f64,
    chi_t: f64,
    gain: f64,
    pairs: usize,
    dimension: usize,
    oracle_correction: [f64; 2],
    prediction_full: [f64; 2],
    prediction_low_gain: [f64; 2],
    error_full: f64,
    error_low_gain: f64,
    tolerance: f64,
    passed: bool,
    truncation_warning: bool,
}

#[derive(Serialize)]
struct MatchedFilterSummary {
    bins: usize,
    correlation_peak: f64,
    total_signal_power: f64,
    expected_background_power: f64,
    mc_background_power: f64,
    snr: f64,
}

#[derive(Serialize)]
struct SeparabilitySummary {
    time_uncertainty_s: f64,
    frequency_sum_uncertainty_hz: f64,
    product: f64,
    violation_factor: f64,
    classical_compatible: bool,
}

/// Fills `scan.min`/`scan.max` for scan experiments from the raw values (with
/// per-axis units) or the documented defaults.
pub fn resolve_scan_range(
    raw: &RawConfig,
    config: &mut Config,
    experiment: Experiment,
) -> CliResult<()> {
    let Some(axis) = experiment.scan_axis() else {
        return Ok(());
    };
    let (default_min, default_max) = match experiment {
        Experiment::GddScan => {
            let width = config.predicted_peak_width();
            (-10.0 * width, 10.0 * width)
        }
        Experiment::LossScan => (0.2, 1.0),
        Experiment::ResidueScan => (-PI, PI),
        _ => unreachable!(),
    };
    let min = raw.scan_min(axis, default_min)?;
    let max = raw.scan_max(axis, default_max)?;
    if min.is_nan() || max.is_nan() || min >= max {
        return Err(CliError::Config(format!(
            "scan.min/scan.max: range must be increasing, got [{min}, {max}]"
        )));
    }
    if experiment == Experiment::LossScan && (min <= 0.0 || max > 1.0) {
        return Err(CliError::Config(format!(
            "scan.min/scan.max: loss-scan transmissions must lie in (0, 1], got [{min}, {max}]"
        )));
    }
    config.scan.min = Some(min);
    config.scan.max = Some(max);
    Ok(())
}

/// Runs one experiment and writes its artifacts under `out_dir`.
pub fn execute(experiment: Experiment, config: &mut Config, out_dir: &Path) -> CliResult<()> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;

    let grid = config.mode_grid()?;
    let parametric = config.parametric()?;
    let mut warnings = Vec::new();
    let relevant_gain = match experiment {
        Experiment::OracleValidate => config.oracle.pump_amplitude * config.oracle.chi_t,
        _ => parametric.gain(),
    };
    if relevant_gain > PERTURBATIVE_GAIN_BOUND {
        warnings.push(format!(
            "parametric gain {relevant_gain:.4} exceeds the low-order validity bound {PERTURBATIVE_GAIN_BOUND}"
        ));
    }

    let derived = Derived {
        gain: parametric.gain(),
        mode_count: grid.mode_count(),
        predicted_peak_width_s2: config.predicted_peak_width(),
        predicted_time_correlation_s: config.predicted_time_correlation(),
    };
    println!("experiment: {}", experiment.name());
    println!(
        "g = {:.6}, M = {}, predicted peak width = {:.6e} s^2, predicted time correlation = {:.6e} s",
        derived.gain, derived.mode_count, derived.predicted_peak_width_s2,
        derived.predicted_time_correlation_s
    );
    for warning in &warnings {
        eprintln!("warning: {warning}");
    }

    let seed = config.seed_config();
    let profile = config.phase_profile();
    let mode = config.demod_mode();

    let results: serde_json::Value = match experiment {
        Experiment::GddScan | Experiment::LossScan | Experiment::ResidueScan => {
            let range = (
                config.scan.min.expect("scan range resolved"),
                config.scan.max.expect("scan range resolved"),
            );
            let scan = match experiment {
                Experiment::GddScan => gdd_scan(
                    range,
                    config.scan.points,
                    &parametric,
                    &grid,
                    &profile,
                    seed.as_ref(),
                    mode,
                )?,
                Experiment::LossScan => loss_scan(
                    range,
                    config.scan.points,
                    &parametric,
                    &grid,
                    &profile,
                    seed.as_ref(),
                    config.scan.compensate_seed,
                    mode,
                )?,
                Experiment::ResidueScan => residue_scan(
                    range,
                    config.scan.points,
                    &parametric,
                    &grid,
                    &profile,
                    seed.as_ref(),
                    mode,
                )?,
                _ => unreachable!(),
            };
            let csv = experiment.csv_name().unwrap();
            write_scan_csv(&out_dir.join(csv), &scan)?;
            println!("wrote {}", out_dir.join(csv).display());
            let signals: Vec<f64> = scan.results.iter().map(|r| r.demodulated_signal).collect();
            let rf_max = scan
                .results
                .iter()
                .map(|r| r.rf_power)
                .fold(0.0f64, f64::max);
            serde_json::to_value(ScanSummary {
                points: scan.parameters.len(),
                parameter_min: scan.parameters[0],
                parameter_max: *scan.parameters.last().unwrap(),
                demod_signal_min: signals.iter().cloned().fold(f64::INFINITY, f64::min),
                demod_signal_max: signals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                rf_power_max: rf_max,
            })
            .expect("summary is serializable")
        }
        Experiment::Su11Spectrum => {
            let intensities = su11_spectrum(&parametric, &grid, &profile);
            let csv = experiment.csv_name().unwrap();
            write_su11_csv(&out_dir.join(csv), grid.half_offsets(), &intensities)?;
            println!("wrote {}", out_dir.join(csv).display());
            serde_json::to_value(Su11Summary {
                mode_count: grid.mode_count(),
                fringe_contrast: su11_fringe_contrast(parametric.shaper_transmission()),
                intensity_min: intensities.iter().cloned().fold(f64::INFINITY, f64::min),
                intensity_max: intensities.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            })
            .expect("summary is serializable")
        }
        Experiment::OracleValidate => {
            let space = OracleSpace::recommended(config.oracle.pairs, config.oracle.pump_amplitude)?;
            let scenario = if config.oracle.seed_amplitude > 0.0 {
                Scenario::Seeded {
                    amplitude: config.oracle.seed_amplitude,
                }
            } else {
                Scenario::Vacuum
            };
            let report = validate_perturbation(
                &space,
                scenario,
                config.oracle.chi_t,
                config.oracle.pump_amplitude,
            )?;
            if report.truncation_warning {
                warnings.push("oracle truncation left population in the top levels".to_string());
            }
            serde_json::to_value(OracleSummary {
                scenario: match scenario {
                    Scenario::Vacuum => "vacuum",
                    Scenario::Seeded { .. } => "seeded",
                },
                pump_amplitude: report.pump_amplitude,
                chi_t: report.chi_t,
                gain: report.gain,
                pairs: report.pair_count,
                dimension: space.dimension(),
                oracle_correction: [report.oracle_correction.re, report.oracle_correction.im],
                prediction_full: [report.prediction_full.re, report.prediction_full.im],
                prediction_low_gain: [
                    report.prediction_low_gain.re,
                    report.prediction_low_gain.im,
                ],
                error_full: report.error_full,
                error_low_gain: report.error_low_gain,
                tolerance: report.tolerance,
                passed: report.passed,
                truncation_warning: report.truncation_warning,
            })
            .expect("summary is serializable")
        }
        Experiment::MatchedFilter => {
            let section = &config.matched_filter;
            let signal =
                ClassicalField::flat(section.bins, section.amplitude, section.spacing)?;
            let filter = signal.conjugate_mirrored();
            let output = matched_filter(&signal, &signal.zeros_like(), &filter)?;
            let mc = background_peak_power_mc(
                &signal,
                section.noise_power,
                section.draws,
                config.run.rng_seed,
            )?;
            let csv = experiment.csv_name().unwrap();
            write_matched_filter_csv(&out_dir.join(csv), &output)?;
            println!("wrote {}", out_dir.join(csv).display());
            serde_json::to_value(MatchedFilterSummary {
                bins: section.bins,
                correlation_peak: output.correlation_peak().re,
                total_signal_power: signal.total_power(),
                expected_background_power: output.expected_background_power(section.noise_power),
                mc_background_power: mc,
                snr: snr_peak(&output, section.noise_power),
            })
            .expect("summary is serializable")
        }
        Experiment::Separability => {
            let dt = config
                .separability
                .time_uncertainty
                .unwrap_or_else(|| config.predicted_time_correlation());
            // Materialize the default so the snapshot reproduces the run.
            config.separability.time_uncertainty = Some(dt);
            let report = separability(dt, config.separability.frequency_sum_uncertainty)?;
            serde_json::to_value(SeparabilitySummary {
                time_uncertainty_s: report.time_uncertainty,
                frequency_sum_uncertainty_hz: report.frequency_sum_uncertainty,
                product: report.product,
                violation_factor: report.violation_factor,
                classical_compatible: report.classical_compatible,
            })
            .expect("summary is serializable")
        }
    };

    let summary = Summary {
        experiment: experiment.name(),
        derived,
        warnings: &warnings,
        results,
        outputs: Outputs {
            csv: experiment.csv_name(),
        },
        config,
    };
    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, &summary)?;
    println!("wrote {}", summary_path.display());
    Ok(())
}
