//! Weak-field metric machinery.
//!
//! A background mode is a single plane-wave perturbation
//! `h_{μν}(x) = 2 ε e_{μν} cos(k·x + φ₀)`, the real form of
//! `ε e exp(i k·x) + c.c.` for a real polarization tensor. The metric is
//! `g = δ + h`, and the curvature seen by a separated particle pair is the
//! linearized `R₀₁₀₁ = -½ ∂₀∂₀ h₁₁`.
//!
//! Index 0 is the time component with `x⁰ = ct`; the phase contraction uses
//! the (+,-,-,-) signature so that the wave actually propagates.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::SPEED_OF_LIGHT;

/// Upper bound on the strain of a single mode.
pub const MAX_STRAIN: f64 = 1e-3;

const NULL_TOLERANCE: f64 = 1e-12;
const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct FourVector([f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub fn new(components: [f64; 4]) -> Result<Self> {
        for c in components {
            ensure_finite(c, "four-vector component")?;
        }
        Ok(FourVector(components))
    }

    /// Event at time `t` (seconds) and position `r` (meters).
    pub fn event(t: f64, r: [f64; 3]) -> Result<Self> {
        Self::new([SPEED_OF_LIGHT * t, r[0], r[1], r[2]])
    }

    pub fn components(&self) -> [f64; 4] {
        self.0
    }

    pub fn get(&self, mu: usize) -> f64 {
        self.0[mu]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// `a⁰b⁰ - a·b`.
    pub fn minkowski_dot(&self, other: &FourVector) -> f64 {
        self.0[0] * other.0[0] - self.0[1] * other.0[1] - self.0[2] * other.0[2] - self.0[3] * other.0[3]
    }
}

impl TryFrom<[f64; 4]> for FourVector {
    type Error = Error;

    fn try_from(value: [f64; 4]) -> Result<Self> {
        Self::new(value)
    }
}

impl From<FourVector> for [f64; 4] {
    fn from(v: FourVector) -> Self {
        v.0
    }
}

/// Position of `(mu, nu)` in the packed upper triangle.
const PACKED: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 4, 5, 6], [2, 5, 7, 8], [3, 6, 8, 9]];

const fn packed(mu: usize, nu: usize) -> usize {
    PACKED[mu][nu]
}

/// Symmetric 4x4 tensor stored as its upper triangle, so `t[μ][ν] = t[ν][μ]`
/// holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor4 {
    upper: [f64; 10],
}

impl SymTensor4 {
    pub const fn zero() -> Self {
        SymTensor4 { upper: [0.0; 10] }
    }

    pub fn identity() -> Self {
        Self::diagonal_unchecked([1.0, 1.0, 1.0, 1.0])
    }

    /// Flat metric with signature (+,-,-,-).
    pub fn minkowski() -> Self {
        Self::diagonal_unchecked([1.0, -1.0, -1.0, -1.0])
    }

    fn diagonal_unchecked(d: [f64; 4]) -> Self {
        let mut t = Self::zero();
        for (mu, v) in d.into_iter().enumerate() {
            t.upper[packed(mu, mu)] = v;
        }
        t
    }

    pub fn diagonal(d: [f64; 4]) -> Result<Self> {
        for v in d {
            ensure_finite(v, "tensor component")?;
        }
        Ok(Self::diagonal_unchecked(d))
    }

    /// Builds the tensor from `f(μ, ν)` evaluated on `μ <= ν` only.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(mut f: F) -> Result<Self> {
        let mut t = Self::zero();
        for mu in 0..4 {
            for nu in mu..4 {
                t.upper[packed(mu, nu)] = ensure_finite(f(mu, nu), "tensor component")?;
            }
        }
        Ok(t)
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.upper[packed(mu, nu)]
    }

    /// Copy with `t[μ][ν] = t[ν][μ] = value`.
    pub fn with_component(mut self, mu: usize, nu: usize, value: f64) -> Result<Self> {
        self.upper[packed(mu, nu)] = ensure_finite(value, "tensor component")?;
        Ok(self)
    }

    pub fn to_matrix(&self) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for (mu, row) in m.iter_mut().enumerate() {
            for (nu, v) in row.iter_mut().enumerate() {
                *v = self.get(mu, nu);
            }
        }
        m
    }

    pub fn scale(&self, factor: f64) -> Self {
        SymTensor4 { upper: self.upper.map(|v| v * factor) }
    }

    pub fn add(&self, other: &SymTensor4) -> Self {
        let mut upper = self.upper;
        for (u, o) in upper.iter_mut().zip(other.upper) {
            *u += o;
        }
        SymTensor4 { upper }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                sum += self.get(mu, nu).powi(2);
            }
        }
        sum.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Background metric `δ` in `g = δ + h`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSignature {
    /// Euclidean identity, `g = 1 + h` as written in the model.
    #[default]
    Kronecker,
    /// Flat spacetime `η = diag(1, -1, -1, -1)`.
    Minkowski,
}

impl MetricSignature {
    pub fn background(self) -> SymTensor4 {
        match self {
            MetricSignature::Kronecker => SymTensor4::identity(),
            MetricSignature::Minkowski => SymTensor4::minkowski(),
        }
    }
}

/// One plane-wave mode: polarization `e_{μν}` (unit Frobenius norm),
/// null wave vector `k_γ` in 1/m, and strain `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricPerturbation {
    polarization: SymTensor4,
    wave_vector: FourVector,
    amplitude: f64,
}

impl MetricPerturbation {
    pub fn new(polarization: SymTensor4, wave_vector: FourVector, amplitude: f64) -> Result<Self> {
        ensure_finite(amplitude, "amplitude")?;
        if !(0.0..=MAX_STRAIN).contains(&amplitude) {
            return Err(Error::StrainOutOfRange(amplitude));
        }
        let k = wave_vector.components();
        let time_sq = k[0] * k[0];
        let space_sq = k[1] * k[1] + k[2] * k[2] + k[3] * k[3];
        if (time_sq - space_sq).abs() > NULL_TOLERANCE * time_sq.max(space_sq) {
            return Err(Error::WaveVectorNotNull { time_sq, space_sq });
        }
        let norm = polarization.frobenius_norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::PolarizationNorm(norm));
        }
        Ok(MetricPerturbation { polarization, wave_vector, amplitude })
    }

    /// Plus-polarized wave of angular frequency `omega` travelling along the
    /// unit vector `direction`.
    ///
    /// The polarization is `(p⊗p - q⊗q)/√2` for an orthonormal pair `p, q`
    /// spanning the plane transverse to `direction`.
    pub fn plus_polarized(direction: [f64; 3], omega: f64, amplitude: f64) -> Result<Self> {
        ensure_finite(omega, "omega")?;
        let n = unit(direction)?;
        let (p, q) = transverse_basis(n);
        let polarization = SymTensor4::from_fn(|mu, nu| {
            if mu == 0 || nu == 0 {
                0.0
            } else {
                (p[mu - 1] * p[nu - 1] - q[mu - 1] * q[nu - 1]) / std::f64::consts::SQRT_2
            }
        })?;
        let k0 = omega / SPEED_OF_LIGHT;
        let wave_vector = FourVector::new([k0, k0 * n[0], k0 * n[1], k0 * n[2]])?;
        Self::new(polarization, wave_vector, amplitude)
    }

    pub fn polarization(&self) -> &SymTensor4 {
        &self.polarization
    }

    pub fn wave_vector(&self) -> &FourVector {
        &self.wave_vector
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Angular frequency `c k⁰` in rad/s.
    pub fn omega(&self) -> f64 {
        SPEED_OF_LIGHT * self.wave_vector.get(0)
    }

    /// `k_γ x^γ + φ₀` with the (+,-,-,-) contraction.
    pub fn phase(&self, x: &FourVector, phase_offset: f64) -> f64 {
        self.wave_vector.minkowski_dot(x) + phase_offset
    }
}

fn unit(v: [f64; 3]) -> Result<[f64; 3]> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::DirectionNorm(norm));
    }
    Ok(v)
}

/// Orthonormal pair spanning the plane perpendicular to the unit vector `n`.
pub(crate) fn transverse_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    // seed with the axis least aligned with n
    let axis = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let p = normalize(cross(n, axis));
    let q = cross(n, p);
    (p, q)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// `h_{μν}(x) = 2 ε e_{μν} cos(k·x + φ₀)`.
pub fn perturbation_at(mode: &MetricPerturbation, x: &FourVector, phase_offset: f64) -> Result<SymTensor4> {
    ensure_finite(phase_offset, "phase offset")?;
    let weight = 2.0 * mode.amplitude * mode.phase(x, phase_offset).cos();
    Ok(mode.polarization.scale(weight))
}

/// `g = δ + h` with the literal Kronecker background.
///
/// Intended for weak fields, `|h_{μν}| <= 1e-3`.
pub fn metric_at(h: &SymTensor4) -> SymTensor4 {
    metric_with_signature(h, MetricSignature::Kronecker)
}

pub fn metric_with_signature(h: &SymTensor4, signature: MetricSignature) -> SymTensor4 {
    signature.background().add(h)
}

/// `g_{μν} A^μ B^ν`.
///
/// Off-diagonal terms are accumulated as `g_{μν}(A^μ B^ν + A^ν B^μ)`, which
/// makes the result bit-identical under `A ↔ B`.
pub fn scalar_product(g: &SymTensor4, a: &FourVector, b: &FourVector) -> f64 {
    let mut sum = 0.0;
    for mu in 0..4 {
        sum += g.get(mu, mu) * (a.get(mu) * b.get(mu));
        for nu in mu + 1..4 {
            sum += g.get(mu, nu) * (a.get(mu) * b.get(nu) + a.get(nu) * b.get(mu));
        }
    }
    sum
}

/// Linearized `R₀₁₀₁ = -½ ∂₀∂₀ h₁₁` for a plane-wave mode, in 1/m².
///
/// Differentiating `2 ε e₁₁ cos(k·x + φ₀)` twice in `x⁰` gives
/// `(k⁰)² ε e₁₁ cos(k·x + φ₀)`, which is non-negative at antinodes when
/// `e₁₁ > 0`.
pub fn riemann_0101(mode: &MetricPerturbation, x: &FourVector, phase_offset: f64) -> Result<f64> {
    ensure_finite(phase_offset, "phase offset")?;
    let k0 = mode.wave_vector.get(0);
    let e11 = mode.polarization.get(1, 1);
    Ok(k0 * k0 * mode.amplitude * e11 * mode.phase(x, phase_offset).cos())
}
