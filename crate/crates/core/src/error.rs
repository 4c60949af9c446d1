use thiserror::Error;

/// Every failure the toolkit can report, tagged with the subsystem that raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group_rep: unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("group_rep: element {0} is the identity; its fixed set is the whole space")]
    IdentityElement(usize),
    #[error("group_rep: invalid group element: {0}")]
    InvalidElement(String),

    #[error("lattice_domain: no grid points inside the domain at spacing h = {0}")]
    EmptyDiscretization(f64),
    #[error("lattice_domain: grid is not closed under the element {0}")]
    GridNotClosed(String),
    #[error("lattice_domain: the fixed set of the trivial group is empty")]
    TrivialGroup,
    #[error("lattice_domain: invalid domain: {0}")]
    InvalidDomain(String),

    #[error("operator_disc: coefficient is not positive ({value}) at grid point {index}")]
    NonPositiveCoefficient { index: usize, value: f64 },
    #[error("operator_disc: dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("isotypic_solver: character {chi} has {built} basis vectors, trace formula says {expected}")]
    RankMismatch { chi: usize, built: usize, expected: usize },
    #[error("isotypic_solver: eigensolver did not converge: {0}")]
    ConvergenceFailure(String),
    #[error(
        "isotypic_solver: spectrum of character {chi} is only complete below {complete_below}, asked for {lambda}"
    )]
    IncompleteSpectrum { chi: usize, complete_below: f64, lambda: f64 },
    #[error("isotypic_solver: factorization broke down at pivot {0}")]
    SingularPivot(usize),

    #[error("weyl_volume: symbol is not elliptic (lower bound {0})")]
    SymbolNotElliptic(f64),
    #[error("weyl_volume: bounding radius {given} is below the required {required}")]
    BoundingRadiusTooSmall { given: f64, required: f64 },
    #[error("weyl_volume: fewer than 3 usable points for the log-log fit ({0})")]
    DegenerateFit(usize),
    #[error("weyl_volume: invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("experiment: configuration error: {0}")]
    Config(String),
    #[error("experiment: no closed-form oracle for {0}")]
    OracleUnavailable(String),
    #[error("experiment: io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("experiment: json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status: 2 for bad input or environment, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::NonPositiveCoefficient { .. }
            | Self::RankMismatch { .. }
            | Self::ConvergenceFailure(_)
            | Self::IncompleteSpectrum { .. }
            | Self::SingularPivot(_)
            | Self::SymbolNotElliptic(_)
            | Self::DegenerateFit(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
