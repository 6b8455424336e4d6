//! Geodesic-deviation oscillator for a particle pair.
//!
//! In a single mode the relative separation obeys `ℓ̈ + ω² ℓ = 0` with
//! `ω = c √R`. Nothing here takes a particle mass: the response depends on
//! curvature alone.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::background::{mode_phase, BackgroundEnsemble};
use crate::error::{ensure_finite, Error, Result};
use crate::numeric::{fmt_f64, pairwise_sum};
use crate::SPEED_OF_LIGHT;

/// Largest accepted `ω dt`.
pub const MAX_OMEGA_DT: f64 = 0.1;

/// Constant `C` in the global error bound `C (ω dt)⁴ · steps · (ω dt)`.
///
/// The RK4 amplification factor for the harmonic oscillator has phase error
/// `(ω dt)⁵ / 120` per step; `1/60` leaves a factor two for the amplitude
/// term and higher orders.
pub const RK4_ERROR_CONSTANT: f64 = 1.0 / 60.0;

pub fn omega_from_riemann(riemann: f64) -> Result<f64> {
    ensure_finite(riemann, "riemann")?;
    if riemann < 0.0 {
        return Err(Error::ImaginaryFrequency(riemann));
    }
    Ok(SPEED_OF_LIGHT * riemann.sqrt())
}

/// How the spatial term of `ℓ₀ exp(k·x + iωt)` is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialExponent {
    /// `ℓ₀ exp(i(k·x + ωt))`, a travelling plane wave.
    #[default]
    Phase,
    /// `ℓ₀ exp(k·x) exp(iωt)`, the real exponent taken literally.
    Literal,
}

/// `ℓ₀ exp(i(k·x + ωt))` as `(re, im)`.
pub fn analytic_solution(ell0: f64, omega: f64, k_dot_x: f64, t: f64) -> (f64, f64) {
    analytic_solution_with(SpatialExponent::Phase, ell0, omega, k_dot_x, t)
}

pub fn analytic_solution_with(reading: SpatialExponent, ell0: f64, omega: f64, k_dot_x: f64, t: f64) -> (f64, f64) {
    let (modulus, phase) = match reading {
        SpatialExponent::Phase => (ell0, k_dot_x + omega * t),
        SpatialExponent::Literal => (ell0 * k_dot_x.exp(), omega * t),
    };
    let (s, c) = phase.sin_cos();
    (modulus * c, modulus * s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationState {
    /// Relative separation, m.
    pub ell: f64,
    /// m/s.
    pub ell_dot: f64,
    /// s.
    pub t: f64,
}

impl DeviationState {
    pub fn new(ell: f64, ell_dot: f64, t: f64) -> Result<Self> {
        ensure_finite(ell, "ell")?;
        ensure_finite(ell_dot, "ell_dot")?;
        ensure_finite(t, "t")?;
        Ok(DeviationState { ell, ell_dot, t })
    }

    /// `E = ℓ̇² + ω² ℓ²`.
    pub fn energy(&self, omega: f64) -> f64 {
        self.ell_dot * self.ell_dot + omega * omega * self.ell * self.ell
    }
}

/// Uniformly spaced samples `t_i = t_0 + i dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<DeviationState>,
    pub omega: f64,
    pub dt: f64,
}

impl Trajectory {
    pub fn first(&self) -> &DeviationState {
        &self.states[0]
    }

    pub fn last(&self) -> &DeviationState {
        self.states.last().expect("trajectory is never empty")
    }

    /// `max_t |E(t) - E(0)| / E(0)`, or 0 when `E(0) = 0`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.first().energy(self.omega);
        if e0 == 0.0 {
            return 0.0;
        }
        self.states.iter().map(|s| (s.energy(self.omega) - e0).abs() / e0).fold(0.0, f64::max)
    }

    /// CSV with header `t,ell,ell_dot`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,ell,ell_dot")?;
        for s in &self.states {
            writeln!(out, "{},{},{}", fmt_f64(s.t), fmt_f64(s.ell), fmt_f64(s.ell_dot))?;
        }
        Ok(())
    }
}

/// One classical fourth-order Runge–Kutta step of `ℓ̇ = v, v̇ = -ω² ℓ`.
pub fn rk4_step(state: &DeviationState, omega: f64, dt: f64) -> DeviationState {
    let w2 = omega * omega;
    let (l, v) = (state.ell, state.ell_dot);

    let (k1l, k1v) = (v, -w2 * l);
    let (k2l, k2v) = (v + 0.5 * dt * k1v, -w2 * (l + 0.5 * dt * k1l));
    let (k3l, k3v) = (v + 0.5 * dt * k2v, -w2 * (l + 0.5 * dt * k2l));
    let (k4l, k4v) = (v + dt * k3v, -w2 * (l + dt * k3l));

    DeviationState {
        ell: l + dt / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l),
        ell_dot: v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        t: state.t + dt,
    }
}

fn check_step(omega_max: f64, dt: f64, steps: usize) -> Result<()> {
    ensure_finite(omega_max, "omega")?;
    ensure_finite(dt, "dt")?;
    if omega_max < 0.0 {
        return Err(Error::InvalidIntegration(format!("omega must be >= 0, got {omega_max}")));
    }
    if dt <= 0.0 {
        return Err(Error::InvalidIntegration(format!("dt must be > 0, got {dt}")));
    }
    if steps == 0 {
        return Err(Error::InvalidIntegration("steps must be >= 1".into()));
    }
    let omega_dt = omega_max * dt;
    // tolerate rounding when the caller picks dt = 0.1 / ω exactly
    if omega_dt > MAX_OMEGA_DT * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { omega_dt, max_dt: MAX_OMEGA_DT / omega_max });
    }
    Ok(())
}

/// Integrates `steps` fixed RK4 steps; the trajectory holds `steps + 1` states.
///
/// Requires `ω dt <= 0.1`. The final state then agrees with the closed-form
/// solution to within [`rk4_error_bound`] relative to the orbit amplitude.
pub fn integrate_deviation(initial: &DeviationState, omega: f64, dt: f64, steps: usize) -> Result<Trajectory> {
    check_step(omega, dt, steps)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(*initial);
    let mut current = *initial;
    for i in 1..=steps {
        current = rk4_step(&current, omega, dt);
        current.t = initial.t + i as f64 * dt;
        states.push(current);
    }
    Ok(Trajectory { states, omega, dt })
}

/// `C (ω dt)⁴ · steps · (ω dt)`.
pub fn rk4_error_bound(omega: f64, dt: f64, steps: usize) -> f64 {
    let h = omega * dt;
    RK4_ERROR_CONSTANT * h.powi(4) * steps as f64 * h
}

/// Linear superposition `Σ ℓ₀ ε cos Φ_n(t)` of per-mode displacement responses.
pub fn superpose_background(ensemble: &BackgroundEnsemble, ell0: f64, t: f64) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    let terms: Vec<f64> = ensemble.modes.iter().map(|m| ell0 * m.strain() * mode_phase(m, t).cos()).collect();
    Ok(pairwise_sum(&terms))
}

/// Result of integrating every mode of an ensemble in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundTrajectory {
    /// Separation `ℓ₀ + Σ δℓ_n` and its rate.
    pub trajectory: Trajectory,
    /// Largest per-mode relative energy drift.
    pub max_energy_drift: f64,
}

/// Integrates the response of a pair at rest separation `ell0` to every
/// mode of `ensemble` starting at `t = 0`.
///
/// Mode `n` starts at `δℓ = ℓ₀ ε cos Φ₀`, `δℓ̇ = -ℓ₀ ε ω sin Φ₀`, so that in
/// exact arithmetic `δℓ_n(t) = ℓ₀ ε cos Φ_n(t)`. The step guard applies to
/// the fastest mode.
pub fn integrate_background(
    ensemble: &BackgroundEnsemble,
    ell0: f64,
    dt: f64,
    steps: usize,
) -> Result<BackgroundTrajectory> {
    if ensemble.is_empty() {
        return Err(Error::Empty("ensemble"));
    }
    ensure_finite(ell0, "ell0")?;
    let omega_max = ensemble.modes.iter().map(|m| m.omega()).fold(0.0, f64::max);
    check_step(omega_max, dt, steps)?;

    let mut modes: Vec<DeviationState> = ensemble
        .modes
        .iter()
        .map(|m| {
            let amp = ell0 * m.strain();
            let (s, c) = m.phase().sin_cos();
            DeviationState { ell: amp * c, ell_dot: -amp * m.omega() * s, t: 0.0 }
        })
        .collect();
    let initial_energy: Vec<f64> = modes.iter().zip(&ensemble.modes).map(|(s, m)| s.energy(m.omega())).collect();

    let collapse = |modes: &[DeviationState], t: f64| {
        let ell: Vec<f64> = modes.iter().map(|s| s.ell).collect();
        let ell_dot: Vec<f64> = modes.iter().map(|s| s.ell_dot).collect();
        DeviationState { ell: ell0 + pairwise_sum(&ell), ell_dot: pairwise_sum(&ell_dot), t }
    };

    let mut states = Vec::with_capacity(steps + 1);
    states.push(collapse(&modes, 0.0));
    let mut max_drift: f64 = 0.0;
    for i in 1..=steps {
        for ((state, mode), &e0) in modes.iter_mut().zip(&ensemble.modes).zip(&initial_energy) {
            *state = rk4_step(state, mode.omega(), dt);
            if e0 > 0.0 {
                max_drift = max_drift.max((state.energy(mode.omega()) - e0).abs() / e0);
            }
        }
        states.push(collapse(&modes, i as f64 * dt));
    }
    Ok(BackgroundTrajectory { trajectory: Trajectory { states, omega: omega_max, dt }, max_energy_drift: max_drift })
}
