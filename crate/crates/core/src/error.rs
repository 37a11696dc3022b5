use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The point sits on (or numerically next to) the light cone `|x|² = t²`,
    /// where the inversion is undefined.
    #[error("point is on the light cone (|x|^2 - t^2 = {interval:e})")]
    LightConeSingular { interval: f64 },

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("CFL violation: dtau = {dtau} exceeds {limit} (0.9 * dxi / sqrt(n))")]
    Cfl { dtau: f64, limit: f64 },

    #[error("point lies outside the grid bounding box")]
    OutOfGrid,

    #[error("numeric blow-up at step {step}: |V| = {value:e}")]
    NumericBlowUp { step: usize, value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed frame file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
