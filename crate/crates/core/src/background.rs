//! Isotropic random gravitational background.
//!
//! The distribution of modes is otherwise unconstrained by the model, so the
//! sampler uses the flattest choice that is random and isotropic: frequencies
//! uniform in a band, phases uniform on the circle, propagation directions
//! uniform on the sphere, and a common strain.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::{MetricPerturbation, MAX_STRAIN};
use crate::numeric::reduce_angle;
use crate::rng;
use crate::{HBAR, SPEED_OF_LIGHT};

const OMEGA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    /// Lower edge of the frequency band, rad/s.
    pub omega_min: f64,
    /// Upper edge of the frequency band, rad/s.
    pub omega_max: f64,
    /// Dimensionless strain of every mode.
    pub strain: f64,
    pub mode_count: usize,
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.omega_min.is_finite() || !self.omega_max.is_finite() {
            return Err(Error::InvalidSpectrum("frequency band must be finite".into()));
        }
        if !(self.omega_min > 0.0 && self.omega_min <= self.omega_max) {
            return Err(Error::InvalidSpectrum(format!(
                "need 0 < omega_min <= omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if !(0.0..=MAX_STRAIN).contains(&self.strain) {
            return Err(Error::StrainOutOfRange(self.strain));
        }
        if self.mode_count == 0 {
            return Err(Error::InvalidSpectrum("mode_count must be >= 1".into()));
        }
        Ok(())
    }
}

/// One sampled hidden-variable mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundMode {
    riemann: f64,
    omega: f64,
    phase: f64,
    direction: [f64; 3],
    source: MetricPerturbation,
}

impl BackgroundMode {
    /// Builds a mode and checks `omega = c √riemann`.
    ///
    /// `riemann` is the frequency-equivalent curvature `(ω/c)²`; the strained
    /// physical curvature of the generating wave is available through
    /// [`crate::geometry::riemann_0101`] on [`BackgroundMode::source`].
    pub fn new(omega: f64, phase: f64, direction: [f64; 3], strain: f64) -> Result<Self> {
        ensure_finite(omega, "omega")?;
        ensure_finite(phase, "phase")?;
        if omega < 0.0 {
            return Err(Error::InvalidSpectrum(format!("negative omega {omega}")));
        }
        if !(0.0..TAU).contains(&phase) {
            return Err(Error::InvalidSpectrum(format!("phase {phase} outside [0, 2pi)")));
        }
        let source = MetricPerturbation::plus_polarized(direction, omega, strain)?;
        let riemann = (omega / SPEED_OF_LIGHT).powi(2);
        let check = SPEED_OF_LIGHT * riemann.sqrt();
        if (check - omega).abs() > OMEGA_TOLERANCE * omega {
            return Err(Error::InvalidSpectrum(format!("omega {omega} inconsistent with riemann {riemann}")));
        }
        Ok(BackgroundMode { riemann, omega, phase, direction, source })
    }

    pub fn riemann(&self) -> f64 {
        self.riemann
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Initial phase `Φ₀` in `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    pub fn source(&self) -> &MetricPerturbation {
        &self.source
    }

    pub fn strain(&self) -> f64 {
        self.source.amplitude()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundEnsemble {
    pub modes: Vec<BackgroundMode>,
    pub seed: u64,
    pub spectrum: SpectrumConfig,
}

#[derive(Serialize, Deserialize)]
struct ModeRecord {
    omega: f64,
    phase: f64,
    direction: [f64; 3],
}

#[derive(Serialize, Deserialize)]
struct EnsembleRecord {
    seed: u64,
    spectrum: SpectrumConfig,
    modes: Vec<ModeRecord>,
}

impl BackgroundEnsemble {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    fn record(&self) -> EnsembleRecord {
        EnsembleRecord {
            seed: self.seed,
            spectrum: self.spectrum,
            modes: self
                .modes
                .iter()
                .map(|m| ModeRecord { omega: m.omega, phase: m.phase, direction: m.direction })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.record())?)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.record())?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: EnsembleRecord = serde_json::from_str(text)?;
        record.spectrum.validate()?;
        let modes = record
            .modes
            .into_iter()
            .map(|m| BackgroundMode::new(m.omega, m.phase, m.direction, record.spectrum.strain))
            .collect::<Result<Vec<_>>>()?;
        Ok(BackgroundEnsemble { modes, seed: record.seed, spectrum: record.spectrum })
    }
}

/// Draws a phase uniformly on `[0, 2π)`.
pub fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    reduce_angle(rng.random::<f64>() * TAU)
}

/// Samples `spectrum.mode_count` modes from the root stream of `seed`.
pub fn sample_ensemble(spectrum: &SpectrumConfig, seed: u64) -> Result<BackgroundEnsemble> {
    spectrum.validate()?;
    let mut rng = rng::seeded(seed);
    let band = spectrum.omega_max - spectrum.omega_min;
    let mut modes = Vec::with_capacity(spectrum.mode_count);
    for _ in 0..spectrum.mode_count {
        let omega = if band == 0.0 {
            spectrum.omega_min
        } else {
            (spectrum.omega_min + band * rng.random::<f64>()).min(spectrum.omega_max)
        };
        let phase = uniform_phase(&mut rng);
        let direction: [f64; 3] = UnitSphere.sample(&mut rng);
        modes.push(BackgroundMode::new(omega, phase, direction, spectrum.strain)?);
    }
    Ok(BackgroundEnsemble { modes, seed, spectrum: *spectrum })
}

/// Planar hidden-variable direction `λ = (cos α, sin α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HiddenVariable {
    alpha: f64,
}

impl HiddenVariable {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(HiddenVariable { alpha: reduce_angle(ensure_finite(alpha, "alpha")?) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn unit_vector(&self) -> [f64; 2] {
        [self.alpha.cos(), self.alpha.sin()]
    }
}

pub fn sample_lambda<R: Rng + ?Sized>(rng: &mut R) -> HiddenVariable {
    HiddenVariable { alpha: uniform_phase(rng) }
}

/// `Φ₀ + ω t` reduced to `[0, 2π)`.
pub fn mode_phase(mode: &BackgroundMode, t: f64) -> f64 {
    reduce_angle(mode.phase + mode.omega * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergDiagnostic {
    /// Displacement amplitude `ε ℓ₀`, m.
    pub delta_x: f64,
    /// Momentum scale `m ω Δx`, kg·m/s.
    pub delta_p: f64,
    pub product_over_hbar: f64,
}

/// Reports how the mode's displacement response compares to `ħ`. No
/// filtering is applied on the result.
pub fn heisenberg_diagnostic(mode: &BackgroundMode, particle_mass: f64, ell0: f64) -> Result<HeisenbergDiagnostic> {
    if !(particle_mass > 0.0 && particle_mass.is_finite()) {
        return Err(Error::InvalidMass(particle_mass));
    }
    if !(ell0 > 0.0 && ell0.is_finite()) {
        return Err(Error::InvalidSeparation(ell0));
    }
    let delta_x = mode.strain() * ell0;
    let delta_p = particle_mass * mode.omega * delta_x;
    Ok(HeisenbergDiagnostic { delta_x, delta_p, product_over_hbar: delta_x * delta_p / HBAR })
}
