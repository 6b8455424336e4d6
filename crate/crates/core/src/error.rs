use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("strain {0} outside the weak-field range [0, 1e-3]")]
    StrainOutOfRange(f64),

    #[error("wave vector is not null: k0^2 = {time_sq}, |k|^2 = {space_sq}")]
    WaveVectorNotNull { time_sq: f64, space_sq: f64 },

    #[error("polarization must have unit Frobenius norm, got {0}")]
    PolarizationNorm(f64),

    #[error("direction must be a unit 3-vector, got norm {0}")]
    DirectionNorm(f64),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("imaginary frequency: mode evaluated outside oscillatory regime (riemann = {0})")]
    ImaginaryFrequency(f64),

    #[error("omega*dt = {omega_dt} exceeds 0.1; reduce dt to at most {max_dt} s")]
    StepTooLarge { omega_dt: f64, max_dt: f64 },

    #[error("invalid integration parameters: {0}")]
    InvalidIntegration(String),

    #[error("panels must be even and >= 8, got {0}")]
    InvalidPanels(usize),

    #[error("at least 100 samples are required, got {0}")]
    TooFewSamples(usize),

    #[error("particle mass must be positive, got {0}")]
    InvalidMass(f64),

    #[error("separation must be positive, got {0}")]
    InvalidSeparation(f64),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
