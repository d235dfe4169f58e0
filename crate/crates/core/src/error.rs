use std::fmt;

use thiserror::Error;

/// One violated parameter constraint, tagged with the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: &'static str,
    pub message: String,
}

impl Violation {
    pub fn new(key: &'static str, message: impl Into<String>) -> Self {
        Self {
            key,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SenseError {
    #[error("invalid parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),

    #[error("covariance is not physical: symplectic eigenvalue {nu} exceeds 1")]
    NonPhysicalGamma { nu: f64 },

    #[error("block of {l} sites exceeds the explicit reconstruction cap of {cap}")]
    BlockTooLarge { l: usize, cap: usize },

    #[error("thermal mode states have no Floquet overlaps")]
    MixedInitialState,

    #[error("SLD undefined: eigenvalue pair sums to {sum:e} with derivative element {element:e}")]
    DegenerateSld { sum: f64, element: f64 },

    #[error("expected a {expected} matrix, got {rows}x{cols}")]
    Shape {
        expected: String,
        rows: usize,
        cols: usize,
    },

    #[error("scaling fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("scaling fit requires positive inputs")]
    NonPositiveInput,

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("every grid point has zero likelihood")]
    AllZeroLikelihood,

    #[error("eigendecomposition did not converge")]
    Eigen,
}

pub type Result<T> = std::result::Result<T, SenseError>;
