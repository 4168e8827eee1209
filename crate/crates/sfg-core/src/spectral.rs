//! Discretized signal/idler mode-pair grid and spectral phase profiles.
//!
//! The broadband pair spectrum is discretized into `M` symmetric mode pairs at
//! offsets `±ν_m` around the degeneracy frequency, with `M = round(Δν/(2·δν))`
//! for full bandwidth `Δν` and spectral bin `δν` (the time-bandwidth product
//! with effective measurement time `1/δν`). Each pair carries a density weight
//! `ρ_m`, normalized so the weights sum to `M`; the flat default makes every
//! weight exactly 1.

use crate::error::{Error, Result};

/// Spectral density assigned to the mode pairs of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityShape {
    /// Uniform weight 1 per pair.
    Flat,
    /// Gaussian envelope with FWHM equal to the grid bandwidth, renormalized
    /// so the weights sum to the pair count.
    Gaussian,
}

/// Whether spectral-phase coefficients multiply angular (`2πν`) or ordinary
/// (`ν`) frequency offsets.
///
/// Quadratic and quartic pair-phase coefficients are quoted in `s²` and `s⁴`;
/// the phase they produce depends on whether the offset enters as `2πν` or
/// `ν`. The angular convention is the default: with it, a quadratic
/// coefficient of `4π/Δω²` (`Δω = 2πΔν`) produces exactly `π` of pair phase at
/// the band edge, which matches the observed width of the central coherence
/// peak in dispersion scans. The ordinary reading is kept for sensitivity
/// checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyConvention {
    #[default]
    Angular,
    Ordinary,
}

impl FrequencyConvention {
    /// Converts an ordinary frequency offset (Hz) into the variable the phase
    /// polynomial is evaluated at.
    #[inline]
    pub fn phase_variable(self, offset_hz: f64) -> f64 {
        match self {
            FrequencyConvention::Angular => 2.0 * std::f64::consts::PI * offset_hz,
            FrequencyConvention::Ordinary => offset_hz,
        }
    }
}

/// Symmetric signal/idler mode-pair grid around the degeneracy frequency.
///
/// Offsets are placed at bin midpoints `(m − ½)·δν`, `m = 1..=M`, so no pair
/// sits exactly at degeneracy (the pairwise interaction sum excludes it) and
/// the largest offset stays within half the bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    center_frequency: f64,
    bandwidth: f64,
    resolution: f64,
    half_offsets: Vec<f64>,
    density: Vec<f64>,
}

impl ModeGrid {
    /// Builds a grid from full bandwidth `Δν`, spectral bin `δν` (both Hz) and
    /// the degeneracy frequency.
    ///
    /// Pair count is `M = round(Δν/(2·δν))` — the time-bandwidth product with
    /// effective measurement time `1/δν`, taken at face value. Effective mode
    /// counts quoted for real instruments are sometimes smaller by an O(1)
    /// factor (partial fringe visibility, uneven phase matching); the
    /// density weights, not `M`, are the knob for modeling that.
    pub fn build(
        bandwidth: f64,
        resolution: f64,
        center_frequency: f64,
        shape: DensityShape,
    ) -> Result<Self> {
        if !bandwidth.is_finite() || bandwidth <= 0.0 {
            return Err(Error::invalid(format!(
                "grid bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        if !resolution.is_finite() || resolution <= 0.0 {
            return Err(Error::invalid(format!(
                "grid resolution must be positive and finite, got {resolution}"
            )));
        }
        if resolution > bandwidth {
            return Err(Error::invalid(format!(
                "grid resolution ({resolution} Hz) exceeds bandwidth ({bandwidth} Hz)"
            )));
        }

        let mode_count = (bandwidth / (2.0 * resolution)).round() as usize;
        let mode_count = mode_count.max(1);
        let half_offsets: Vec<f64> = (1..=mode_count)
            .map(|m| (m as f64 - 0.5) * resolution)
            .collect();

        let density = match shape {
            DensityShape::Flat => vec![1.0; mode_count],
            DensityShape::Gaussian => {
                // FWHM of the envelope equals the full bandwidth.
                let coeff = 4.0 * std::f64::consts::LN_2 / (bandwidth * bandwidth);
                let raw: Vec<f64> = half_offsets
                    .iter()
                    .map(|&nu| (-coeff * nu * nu).exp())
                    .collect();
                let total: f64 = raw.iter().sum();
                let scale = mode_count as f64 / total;
                raw.into_iter().map(|w| w * scale).collect()
            }
        };

        Ok(ModeGrid {
            center_frequency,
            bandwidth,
            resolution,
            half_offsets,
            density,
        })
    }

    /// Degeneracy frequency (half the pump frequency), Hz.
    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    /// Full spectral width Δν, Hz.
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    /// Spectral bin δν, Hz.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Pair offsets ν_m > 0, strictly increasing, Hz.
    pub fn half_offsets(&self) -> &[f64] {
        &self.half_offsets
    }

    /// Per-pair density weights ρ_m (sum equals the pair count).
    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// Number of interacting mode pairs M.
    pub fn mode_count(&self) -> usize {
        self.half_offsets.len()
    }

    /// Index of the pair whose offset matches `offset_hz` to within half a
    /// bin.
    pub fn pair_index(&self, offset_hz: f64) -> Result<usize> {
        let idx = ((offset_hz / self.resolution) - 0.5).round() as isize;
        let idx = idx.clamp(0, self.mode_count() as isize - 1) as usize;
        if (self.half_offsets[idx] - offset_hz).abs() <= 0.5 * self.resolution {
            Ok(idx)
        } else {
            Err(Error::invalid(format!(
                "offset {offset_hz} Hz lies outside the grid (0, {}]",
                self.bandwidth / 2.0
            )))
        }
    }
}

/// Spectral phase applied to each mode pair by the shaper, plus the uniform
/// pair dither used for lock-in readout.
///
/// The pair phase is `φ0 + β2·w² + β4·w⁴ + D·sin(ω·t)` where `w` is the pair
/// offset in the configured [`FrequencyConvention`]. The dither term is
/// identical for every pair: a mirror displacement advances the phase of each
/// photon in proportion to its optical frequency, and the frequency sum of a
/// pair is fixed, so every pair is dithered by the same amount.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseProfile {
    /// Global pair-phase offset φ0, rad.
    pub global_phase: f64,
    /// Quadratic (group-delay-dispersion) coefficient β2, s².
    pub gdd: f64,
    /// Quartic coefficient β4, s⁴.
    pub quartic: f64,
    /// Dither amplitude D, rad.
    pub dither_amplitude: f64,
    /// Dither angular frequency ω, rad/s.
    pub dither_frequency: f64,
    /// Frequency convention for the polynomial terms.
    pub convention: FrequencyConvention,
}

impl Default for PhaseProfile {
    fn default() -> Self {
        PhaseProfile {
            global_phase: 0.0,
            gdd: 0.0,
            quartic: 0.0,
            dither_amplitude: 0.0,
            dither_frequency: 0.0,
            convention: FrequencyConvention::Angular,
        }
    }
}

impl PhaseProfile {
    /// Validates the dither parameters (amplitude and frequency must be
    /// non-negative and finite).
    pub fn validate(&self) -> Result<()> {
        if !self.dither_amplitude.is_finite() || self.dither_amplitude < 0.0 {
            return Err(Error::invalid(format!(
                "dither amplitude must be >= 0, got {}",
                self.dither_amplitude
            )));
        }
        if !self.dither_frequency.is_finite() || self.dither_frequency < 0.0 {
            return Err(Error::invalid(format!(
                "dither frequency must be >= 0, got {}",
                self.dither_frequency
            )));
        }
        Ok(())
    }

    /// Same profile with a different quadratic coefficient; used by scans.
    pub fn with_gdd(mut self, gdd: f64) -> Self {
        self.gdd = gdd;
        self
    }

    /// Pair phase without the dither contribution, rad.
    pub fn static_pair_phase(&self, offset_hz: f64) -> f64 {
        let w = self.convention.phase_variable(offset_hz);
        let w2 = w * w;
        self.global_phase + self.gdd * w2 + self.quartic * w2 * w2
    }

    /// Instantaneous dither phase `D·sin(ω·t)`, rad.
    pub fn dither_phase(&self, time: f64) -> f64 {
        if self.dither_amplitude == 0.0 {
            0.0
        } else {
            self.dither_amplitude * (self.dither_frequency * time).sin()
        }
    }

    /// Total pair phase at `offset_hz` and time `time`, rad. Pure and even in
    /// the offset.
    pub fn pair_phase(&self, offset_hz: f64, time: f64) -> f64 {
        self.static_pair_phase(offset_hz) + self.dither_phase(time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const THZ: f64 = 1e12;

    #[test]
    fn headline_grid_has_113_pairs() {
        let grid = ModeGrid::build(113.0 * THZ, 0.5 * THZ, 169.4 * THZ, DensityShape::Flat)
            .unwrap();
        assert_eq!(grid.mode_count(), 113);
        assert!(grid.density().iter().all(|&rho| rho == 1.0));
        let sum: f64 = grid.density().iter().sum();
        assert_relative_eq!(sum, 113.0, max_relative = 1e-9);
    }

    #[test]
    fn single_pair_grid_sits_at_bin_midpoint() {
        let grid = ModeGrid::build(1.0 * THZ, 0.5 * THZ, 169.4 * THZ, DensityShape::Flat)
            .unwrap();
        assert_eq!(grid.mode_count(), 1);
        assert_eq!(grid.half_offsets(), &[0.25 * THZ]);
    }

    #[test]
    fn gaussian_density_renormalizes_to_mode_count() {
        let grid = ModeGrid::build(113.0 * THZ, 0.5 * THZ, 169.4 * THZ, DensityShape::Gaussian)
            .unwrap();
        let sum: f64 = grid.density().iter().sum();
        assert_relative_eq!(sum, 113.0, max_relative = 1e-9);
        // Envelope decreases away from degeneracy.
        assert!(grid.density()[0] > grid.density()[112]);
    }

    #[test]
    fn offsets_strictly_increasing_within_half_bandwidth() {
        for &(bw, res) in &[(113.0, 0.5), (1.5, 0.5), (2.2, 0.7), (10.0, 3.0)] {
            let grid =
                ModeGrid::build(bw * THZ, res * THZ, 100.0 * THZ, DensityShape::Flat).unwrap();
            let offs = grid.half_offsets();
            assert!(offs.windows(2).all(|w| w[0] < w[1]));
            assert!(offs[0] > 0.0);
            assert!(offs[offs.len() - 1] <= bw * THZ / 2.0 + 1e-6);
        }
    }

    #[test]
    fn invalid_grid_parameters_rejected() {
        assert!(ModeGrid::build(0.0, 1.0, 1.0, DensityShape::Flat).is_err());
        assert!(ModeGrid::build(1.0, -1.0, 1.0, DensityShape::Flat).is_err());
        assert!(ModeGrid::build(1.0, 2.0, 1.0, DensityShape::Flat).is_err());
    }

    #[test]
    fn grid_construction_is_deterministic() {
        let a = ModeGrid::build(113.0 * THZ, 0.5 * THZ, 169.4 * THZ, DensityShape::Gaussian)
            .unwrap();
        let b = ModeGrid::build(113.0 * THZ, 0.5 * THZ, 169.4 * THZ, DensityShape::Gaussian)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pair_index_maps_offsets_to_bins() {
        let grid = ModeGrid::build(113.0 * THZ, 0.5 * THZ, 169.4 * THZ, DensityShape::Flat)
            .unwrap();
        assert_eq!(grid.pair_index(22.75 * THZ).unwrap(), 45);
        assert_eq!(grid.pair_index(0.3 * THZ).unwrap(), 0);
        assert!(grid.pair_index(80.0 * THZ).is_err());
    }

    #[test]
    fn zero_profile_gives_zero_phase() {
        let profile = PhaseProfile::default();
        assert_eq!(profile.pair_phase(56.5 * THZ, 0.0), 0.0);
        assert_eq!(profile.pair_phase(0.25 * THZ, 1.0), 0.0);
    }

    #[test]
    fn constant_offset_passes_through() {
        let profile = PhaseProfile {
            global_phase: PI,
            ..PhaseProfile::default()
        };
        assert_eq!(profile.pair_phase(37.0 * THZ, 0.0), PI);
    }

    #[test]
    fn band_edge_quadratic_phase_reaches_pi() {
        // β2 = 4π/Δω² evaluated at the half-bandwidth offset of the 113 THz
        // band gives β2·(2πν)² ≈ π in the angular convention.
        let profile = PhaseProfile {
            gdd: 2.49e-29,
            ..PhaseProfile::default()
        };
        let phase = profile.pair_phase(56.5 * THZ, 0.0);
        let expected = 2.49e-29 * (2.0 * PI * 56.5 * THZ).powi(2);
        assert_relative_eq!(phase, expected, max_relative = 1e-15);
        assert_relative_eq!(phase, PI, max_relative = 5e-3);
    }

    #[test]
    fn ordinary_convention_drops_two_pi() {
        let angular = PhaseProfile {
            gdd: 1e-29,
            ..PhaseProfile::default()
        };
        let ordinary = PhaseProfile {
            gdd: 1e-29,
            convention: FrequencyConvention::Ordinary,
            ..PhaseProfile::default()
        };
        let ratio = angular.pair_phase(10.0 * THZ, 0.0) / ordinary.pair_phase(10.0 * THZ, 0.0);
        assert_relative_eq!(ratio, (2.0 * PI).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn dither_time_average_equals_static_phase() {
        let profile = PhaseProfile {
            global_phase: 0.3,
            gdd: 5e-30,
            dither_amplitude: 0.8,
            dither_frequency: 2.0 * PI * 173e3,
            ..PhaseProfile::default()
        };
        let period = 2.0 * PI / profile.dither_frequency;
        let n = 4096;
        let mean: f64 = (0..n)
            .map(|k| profile.pair_phase(20.0 * THZ, (k as f64 + 0.5) / n as f64 * period))
            .sum::<f64>()
            / n as f64;
        assert_abs_diff_eq!(mean, profile.static_pair_phase(20.0 * THZ), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn pair_phase_is_even_in_offset(
            offset in 1e9f64..60e12,
            gdd in -1e-28f64..1e-28,
            quartic in -1e-58f64..1e-58,
            global in -10.0f64..10.0,
        ) {
            let profile = PhaseProfile {
                global_phase: global,
                gdd,
                quartic,
                ..PhaseProfile::default()
            };
            let plus = profile.pair_phase(offset, 0.0);
            let minus = profile.pair_phase(-offset, 0.0);
            prop_assert_eq!(plus, minus);
        }
    }
}
