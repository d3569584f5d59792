use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: non-antisymmetric matrix, complex coefficients where
    /// real ones are required, coincident arguments.
    #[error("validation error: {0}")]
    Validation(String),

    /// A parameter outside the domain of the ensemble family.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error(
        "ill-conditioned skew-product matrix (condition estimate {condition:.3e} > {limit:.1e}); \
         use scaled variables or a smaller basis"
    )]
    IllConditioned { condition: f64, limit: f64 },

    #[error("degenerate weight: pivot r_{index} = {pivot:.3e} vanishes relative to scale {scale:.3e}")]
    DegenerateWeight { index: usize, pivot: f64, scale: f64 },

    #[error(
        "coincident masses m[{i}] and m[{j}] (separation {separation:.3e}); \
         rerun with a symmetric perturbation, e.g. --perturb-masses {suggested_eps:.1e}"
    )]
    DegenerateMasses {
        i: usize,
        j: usize,
        separation: f64,
        suggested_eps: f64,
    },

    #[error("near-singular denominator Pfaffian {value:.3e} (scale {scale:.3e})")]
    NearSingular { value: f64, scale: f64 },

    #[error("quadrature accuracy estimate {estimate:.3e} exceeds tolerance {tolerance:.1e}")]
    Accuracy { estimate: f64, tolerance: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_)
            | Error::Domain(_)
            | Error::Config(_)
            | Error::Unsupported(_)
            | Error::Size(_)
            | Error::DegenerateMasses { .. }
            | Error::Json(_) => 2,
            Error::Numeric(_)
            | Error::IllConditioned { .. }
            | Error::DegenerateWeight { .. }
            | Error::Accuracy { .. }
            | Error::Io(_) => 3,
            Error::NearSingular { .. } => 4,
        }
    }
}
