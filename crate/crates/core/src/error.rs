use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "index distribution truncated: n={n}, tail_eps={tail_eps:e}, \
         {terms} support points reached the cap with mass {mass_reached}"
    )]
    Truncation {
        n: u32,
        tail_eps: f64,
        terms: usize,
        mass_reached: f64,
    },

    #[error("negative probability {value:e} at k={k} for n={n}")]
    NegativeMass { n: u32, k: u64, value: f64 },

    #[error("doubling solver diverged at t={t} (f(t/2)^2 = {g})")]
    Divergence { t: f64, g: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "scale",
            format!("must be positive and finite, got {scale}"),
        ))
    }
}
