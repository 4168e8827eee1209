//! Closed-form perturbative solutions for the pump field.
//!
//! The pump solution is built as a power series in the weak signal/idler
//! fields. The first order reproduces parametric amplification under an
//! undepleted pump; the second order gives the pump correction from pair
//! recombination (the coherent SFG signal) and is valid at arbitrary
//! parametric gain. A further low-gain reduction keeps terms through second
//! order in the gain and is the form used by the lock-in readout model.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lockin::SeedConfig;
use crate::spectral::{ModeGrid, PhaseProfile};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Parameters of the parametric interaction and of the dark-port residue.
///
/// The parametric gain per pass is `g = |α_p|·χt` with `α_p` the coherent
/// pump amplitude (√photons) and `χt` the dimensionless coupling. The
/// second-order pump correction holds at arbitrary `g`; the lock-in readout
/// approximations assume `g ≲ 0.2` (see [`ParametricConfig::is_perturbative`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametricConfig {
    pump_amplitude: Complex64,
    coupling: f64,
    shaper_transmission: f64,
    residue_amplitude: f64,
    residue_phase: f64,
}

/// Soft validity bound on the gain for the low-order readout formulas.
pub const PERTURBATIVE_GAIN_BOUND: f64 = 0.2;

impl ParametricConfig {
    /// Creates a configuration from a complex pump amplitude.
    pub fn new(
        pump_amplitude: Complex64,
        coupling: f64,
        shaper_transmission: f64,
        residue_amplitude: f64,
        residue_phase: f64,
    ) -> Result<Self> {
        if !pump_amplitude.re.is_finite() || !pump_amplitude.im.is_finite() {
            return Err(Error::invalid("pump amplitude must be finite"));
        }
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::invalid(format!(
                "coupling must be >= 0, got {coupling}"
            )));
        }
        if !(0.0..=1.0).contains(&shaper_transmission) {
            return Err(Error::invalid(format!(
                "shaper_transmission must be within [0, 1], got {shaper_transmission}"
            )));
        }
        if !residue_amplitude.is_finite() || residue_amplitude < 0.0 {
            return Err(Error::invalid(format!(
                "residue_amplitude must be >= 0, got {residue_amplitude}"
            )));
        }
        Ok(ParametricConfig {
            pump_amplitude,
            coupling,
            shaper_transmission,
            residue_amplitude,
            residue_phase,
        })
    }

    /// Creates a configuration from pump magnitude and phase.
    pub fn from_polar(
        pump_magnitude: f64,
        pump_phase: f64,
        coupling: f64,
        shaper_transmission: f64,
        residue_amplitude: f64,
        residue_phase: f64,
    ) -> Result<Self> {
        if pump_magnitude.is_nan() || pump_magnitude < 0.0 {
            return Err(Error::invalid(format!(
                "pump magnitude must be >= 0, got {pump_magnitude}"
            )));
        }
        Self::new(
            Complex64::from_polar(pump_magnitude, pump_phase),
            coupling,
            shaper_transmission,
            residue_amplitude,
            residue_phase,
        )
    }

    pub fn pump_amplitude(&self) -> Complex64 {
        self.pump_amplitude
    }

    pub fn pump_magnitude(&self) -> f64 {
        self.pump_amplitude.norm()
    }

    pub fn pump_phase(&self) -> f64 {
        self.pump_amplitude.arg()
    }

    /// Dimensionless coupling χt.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Shaper power transmission T ∈ [0, 1].
    pub fn shaper_transmission(&self) -> f64 {
        self.shaper_transmission
    }

    pub fn residue_amplitude(&self) -> f64 {
        self.residue_amplitude
    }

    pub fn residue_phase(&self) -> f64 {
        self.residue_phase
    }

    /// Complex residue field at the dark port.
    pub fn residue_field(&self) -> Complex64 {
        Complex64::from_polar(self.residue_amplitude, self.residue_phase)
    }

    /// Parametric gain per pass, `g = |α_p|·χt`.
    pub fn gain(&self) -> f64 {
        self.pump_amplitude.norm() * self.coupling
    }

    /// Whether the gain is within the soft validity bound of the low-order
    /// readout formulas. Larger gains are allowed everywhere; this is a
    /// warning flag, not an error.
    pub fn is_perturbative(&self) -> bool {
        self.gain() <= PERTURBATIVE_GAIN_BOUND
    }

    /// Same configuration with a different shaper transmission; used by loss
    /// scans.
    pub fn with_transmission(mut self, transmission: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmission) {
            return Err(Error::invalid(format!(
                "shaper_transmission must be within [0, 1], got {transmission}"
            )));
        }
        self.shaper_transmission = transmission;
        Ok(self)
    }
}

/// Per-pair second moments `⟨a_ν a_−ν⟩` and mean photon numbers at the
/// intermediate plane (after the shaper, before the second pass).
///
/// Moments are weighted by the grid density, so their sum approximates the
/// continuum pair-amplitude integral; on a flat grid each entry is exactly the
/// single-pair moment. The seeded pair additionally carries a stimulated
/// component proportional to the seed photon number, tracked separately so the
/// readout can split stimulated from spontaneous contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAmplitudeSet {
    offsets: Vec<f64>,
    moments: Vec<Complex64>,
    signal_photons: Vec<f64>,
    idler_photons: Vec<f64>,
    stimulated: Option<StimulatedComponent>,
}

/// Stimulated (seeded) part of one pair's second moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StimulatedComponent {
    pub pair_index: usize,
    pub moment: Complex64,
}

impl PairAmplitudeSet {
    /// Builds a set from raw spontaneous per-pair values (no stimulated
    /// component). Lengths must match.
    pub fn from_parts(
        offsets: Vec<f64>,
        moments: Vec<Complex64>,
        signal_photons: Vec<f64>,
        idler_photons: Vec<f64>,
    ) -> Result<Self> {
        let n = offsets.len();
        if moments.len() != n || signal_photons.len() != n || idler_photons.len() != n {
            return Err(Error::invalid("pair amplitude set fields must have equal length"));
        }
        Ok(PairAmplitudeSet {
            offsets,
            moments,
            signal_photons,
            idler_photons,
            stimulated: None,
        })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Spontaneous moment of pair `i` (density-weighted).
    pub fn spontaneous_moment(&self, i: usize) -> Complex64 {
        self.moments[i]
    }

    /// Total moment of pair `i`, including the stimulated component if this
    /// is the seeded pair.
    pub fn pair_moment(&self, i: usize) -> Complex64 {
        match self.stimulated {
            Some(stim) if stim.pair_index == i => self.moments[i] + stim.moment,
            _ => self.moments[i],
        }
    }

    /// Mean signal-mode photon number of pair `i`.
    pub fn signal_photons(&self, i: usize) -> f64 {
        self.signal_photons[i]
    }

    /// Mean idler-mode photon number of pair `i`.
    pub fn idler_photons(&self, i: usize) -> f64 {
        self.idler_photons[i]
    }

    /// Stimulated component, if a seeded pair is present.
    pub fn stimulated(&self) -> Option<StimulatedComponent> {
        self.stimulated
    }

    /// Stimulated moment (zero if no seeded pair).
    pub fn stimulated_moment(&self) -> Complex64 {
        self.stimulated.map_or(Complex64::new(0.0, 0.0), |s| s.moment)
    }

    /// Sum of the spontaneous moments only.
    pub fn spontaneous_sum(&self) -> Complex64 {
        self.moments.iter().sum()
    }

    /// `Σ_ν ⟨a_ν a_−ν⟩` over all pairs, including the stimulated component.
    pub fn moment_sum(&self) -> Complex64 {
        self.spontaneous_sum() + self.stimulated_moment()
    }

    /// Total mean photon number over all signal and idler modes,
    /// `⟨N_s + N_i⟩`.
    pub fn total_photon_number(&self) -> f64 {
        self.signal_photons.iter().sum::<f64>() + self.idler_photons.iter().sum::<f64>()
    }
}

/// Input-state expectation values entering the arbitrary-gain pump
/// correction: the pair-moment sum, the total signal+idler photon number and
/// the expectation of the dimensionless interaction Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationBundle {
    /// `⟨Σ_ν a_ν a_−ν⟩`.
    pub pair_moment_sum: Complex64,
    /// `⟨N_s + N_i⟩`.
    pub photon_number: f64,
    /// `⟨H'⟩` (real; the interaction Hamiltonian is Hermitian).
    pub interaction: f64,
}

impl ExpectationBundle {
    /// All-zero bundle (vacuum signal/idler input).
    pub fn vacuum() -> Self {
        ExpectationBundle {
            pair_moment_sum: Complex64::new(0.0, 0.0),
            photon_number: 0.0,
            interaction: 0.0,
        }
    }

    /// Builds the bundle from intermediate-plane pair moments, treating the
    /// pump classically: `⟨H'⟩ ≈ 2·Re(α_p* Σ⟨a_ν a_−ν⟩)`.
    pub fn from_pairs(pairs: &PairAmplitudeSet, config: &ParametricConfig) -> Self {
        let sum = pairs.moment_sum();
        ExpectationBundle {
            pair_moment_sum: sum,
            photon_number: pairs.total_photon_number(),
            interaction: 2.0 * (config.pump_amplitude().conj() * sum).re,
        }
    }
}

/// First-order pair moments at the intermediate plane.
///
/// Each vacuum pair contributes
/// `⟨a_ν a_−ν⟩ = −i·e^{iφ_p}·cosh(g)·sinh(g)·T·ρ_ν·e^{iΦ_ν(t)}` and
/// `⟨N_ν⟩ = ⟨N_−ν⟩ = sinh²(g)·T·ρ_ν`, with `Φ_ν(t)` the shaper pair phase
/// including the dither. The seeded pair additionally carries the stimulated
/// moment with weight `|α_sd|²` at the locked set-point phase (the feedback
/// loop pins the seeded pair's phase regardless of the shaper polynomial, so
/// the set-point — not the profile — determines the stimulated phase), and
/// its photon numbers gain `|α_sd|²·cosh²g·T` (signal) and `|α_sd|²·sinh²g·T`
/// (idler).
///
/// Loss is modeled as a beam splitter with power transmission `T`; the vacuum
/// entering through the loss port leaves these moments untouched.
pub fn opa_pair_moments(
    config: &ParametricConfig,
    grid: &ModeGrid,
    profile: &PhaseProfile,
    seed: Option<&SeedConfig>,
    time: f64,
) -> Result<PairAmplitudeSet> {
    profile.validate()?;
    let g = config.gain();
    let t = config.shaper_transmission();
    let cosh_g = g.cosh();
    let sinh_g = g.sinh();
    let pair_scale =
        Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, config.pump_phase()) * cosh_g
            * sinh_g
            * t;
    let spont_photons = sinh_g * sinh_g * t;

    let n = grid.mode_count();
    let mut moments = Vec::with_capacity(n);
    let mut signal_photons = Vec::with_capacity(n);
    let mut idler_photons = Vec::with_capacity(n);
    for (idx, &offset) in grid.half_offsets().iter().enumerate() {
        let rho = grid.density()[idx];
        let phase = profile.pair_phase(offset, time);
        moments.push(pair_scale * rho * Complex64::from_polar(1.0, phase));
        signal_photons.push(spont_photons * rho);
        idler_photons.push(spont_photons * rho);
    }

    let mut stimulated = None;
    if let Some(seed) = seed {
        seed.validate()?;
        let pair_index = grid.pair_index(seed.mode_offset)?;
        if seed.amplitude > 0.0 {
            let photons = seed.amplitude * seed.amplitude;
            let phase = seed.pair_phase_setpoint + profile.dither_phase(time);
            stimulated = Some(StimulatedComponent {
                pair_index,
                moment: pair_scale * photons * Complex64::from_polar(1.0, phase),
            });
            signal_photons[pair_index] += photons * cosh_g * cosh_g * t;
            idler_photons[pair_index] += photons * sinh_g * sinh_g * t;
        }
    }

    Ok(PairAmplitudeSet {
        offsets: grid.half_offsets().to_vec(),
        moments,
        signal_photons,
        idler_photons,
        stimulated,
    })
}

/// Second-order pump-field correction at arbitrary gain.
///
/// For input expectations `S = ⟨Σ a_ν a_−ν⟩`, `N = ⟨N_s + N_i⟩`, `W = ⟨H'⟩`
/// and `M` interacting pairs:
///
/// `⟨a_p⁽²⁾⟩ = −i·S·sinh(2g)/(2|α_p|) − α_p·(N+M)·sinh²(g)/(2|α_p|²)
///            + i·α_p·W·(sinh(2g) − 2g)/(4|α_p|³)`
///
/// The third term is one gain order below the others and is retained; the
/// input operators are evaluated against explicit state moments so the
/// function stays comparable with the exact number-state evolution.
pub fn pump_correction_full(
    config: &ParametricConfig,
    bundle: &ExpectationBundle,
    mode_count: usize,
) -> Result<Complex64> {
    let mag = config.pump_magnitude();
    if mag == 0.0 {
        return Err(Error::invalid(
            "pump correction requires a nonzero pump amplitude",
        ));
    }
    let g = config.gain();
    let sinh_2g = (2.0 * g).sinh();
    let sinh_g = g.sinh();
    let alpha = config.pump_amplitude();

    let recombination = Complex64::new(0.0, -1.0) * bundle.pair_moment_sum * sinh_2g / (2.0 * mag);
    let depletion =
        -alpha * (bundle.photon_number + mode_count as f64) * sinh_g * sinh_g / (2.0 * mag * mag);
    let interaction = alpha
        * Complex64::new(0.0, 1.0)
        * bundle.interaction
        * (sinh_2g - 2.0 * g)
        / (4.0 * mag * mag * mag);
    Ok(recombination + depletion + interaction)
}

/// Low-gain (second order in `g`) pump-field correction:
/// `−i·χt·Σ⟨a_ν a_−ν⟩ − α_p·(⟨N_s+N_i⟩+M)·(χt)²/2`.
///
/// Agrees with [`pump_correction_full`] to relative order `g²` termwise.
pub fn pump_correction_low_gain(
    config: &ParametricConfig,
    pairs: &PairAmplitudeSet,
    mode_count: usize,
) -> Complex64 {
    pump_correction_low_gain_from_moments(
        config,
        pairs.moment_sum(),
        pairs.total_photon_number(),
        mode_count,
    )
}

/// Low-gain correction from raw input moments (used when the moments come
/// from a source other than [`opa_pair_moments`], e.g. an exact state).
pub fn pump_correction_low_gain_from_moments(
    config: &ParametricConfig,
    pair_moment_sum: Complex64,
    photon_number: f64,
    mode_count: usize,
) -> Complex64 {
    let chi_t = config.coupling();
    let recombination = Complex64::new(0.0, -1.0) * pair_moment_sum * chi_t;
    let depletion = -config.pump_amplitude() * (photon_number + mode_count as f64) * chi_t * chi_t
        / 2.0;
    recombination + depletion
}

/// Field at the interferometer dark port: residue, local-oscillator depletion
/// from the first-pass interaction with the seed and vacuum, and the pump
/// correction transmitted through the output beam splitter.
///
/// `a_out = α_r·e^{iφ_r} − α_p·(|α_sd|² + M)·(χt)²/(2√2) + ⟨a_p⁽²⁾⟩/√2`
pub fn sagnac_output(
    config: &ParametricConfig,
    correction: Complex64,
    seed: Option<&SeedConfig>,
    mode_count: usize,
) -> Complex64 {
    let seed_photons = seed.map_or(0.0, |s| s.amplitude * s.amplitude);
    let chi_t = config.coupling();
    let depletion = -config.pump_amplitude() * (seed_photons + mode_count as f64) * chi_t * chi_t
        / (2.0 * SQRT_2);
    config.residue_field() + depletion + correction / SQRT_2
}
