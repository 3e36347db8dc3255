use thiserror::Error;

/// Errors raised anywhere in the crate. Messages carry the module name.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("contfrac: tail θ_{0} undefined, expansion terminated earlier")]
    TailUndefined(usize),
    #[error("contfrac: identity violated at n = {n}: {what} (residual {residual:e})")]
    IdentityViolation { n: i64, what: String, residual: f64 },
    #[error("contfrac: cannot parse θ expression: {0}")]
    Parse(String),
    #[error("contfrac: invalid parameter: {0}")]
    InvalidParam(String),

    #[error("hyperbolic: reduction overflow for point ({x}, {y})")]
    ReductionOverflow { x: f64, y: f64 },
    #[error("hyperbolic: degenerate map, determinant {0} is not positive")]
    DegenerateMap(f64),

    #[error("phyllo: set reaches radius {have}, need {need}")]
    InsufficientPoints { have: f64, need: f64 },

    #[error("linearize: expansion of θ ends before index {0} is available")]
    IndexUnavailable(i64),
    #[error("linearize: no matching within slack {0}")]
    MatchingInfeasible(f64),

    #[error("voronoi: degenerate input: {0}")]
    DegenerateInput(String),
    #[error("voronoi: no cells in annulus ({0}, {1})")]
    EmptyAnnulus(f64, f64),
    #[error("voronoi: chain counts at radius {radius}: {dipoles} dipoles, {hexagons} hexagons, expected {a} and {expected_hex}")]
    CountMismatch { radius: f64, dipoles: usize, hexagons: usize, a: u64, expected_hex: u64 },

    #[error("parastichy: step resolution failed: {0}")]
    MeasurementFailure(String),
    #[error("parastichy: loop broken: {0}")]
    LoopBroken(String),

    #[error("colouring: rounding failure at site {site}")]
    RoundingFailure { site: usize },
    #[error("colouring: vertex of degree 4 near ({0}, {1})")]
    Degree4Vertex(f64, f64),
    #[error("colouring: region contains the origin cell")]
    OriginCell,

    #[error("fitgeo: degenerate data: {0}")]
    DegenerateData(String),
    #[error("fitgeo: no convergence after {0} iterations")]
    NonConvergence(usize),
    #[error("fitgeo: lift ambiguous at samples {0:?}")]
    LiftAmbiguous(Vec<usize>),
    #[error("fitgeo: underdetermined, {0} points")]
    Underdetermined(usize),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
