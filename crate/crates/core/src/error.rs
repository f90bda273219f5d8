use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point ({x}, {y}) is not strictly inside the unit disk")]
    OutsideDisk { x: f64, y: f64 },

    #[error("tangent vectors are based at different points")]
    MismatchedBase,

    #[error("immersion degenerates at (u, v) = ({u}, {v}): |phi_u x phi_v| = {norm:e}")]
    ImmersionFailure { u: f64, v: f64, norm: f64 },

    #[error("Gaussian curvature {k} >= 0 at (u, v) = ({u}, {v}); asymptotic directions are undefined")]
    NotHyperbolic { u: f64, v: f64, k: f64 },

    #[error("principal curvatures too close at (u, v) = ({u}, {v}): gap {gap:e}")]
    CurvatureGap { u: f64, v: f64, gap: f64 },

    #[error("(u, v) = ({u}, {v}) lies outside the parameter domain")]
    OutOfDomain { u: f64, v: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("frame orientation jumps by more than a quarter turn between ({0}, {1}) and ({2}, {3}); refine the grid")]
    Resolution(usize, usize, usize, usize),

    #[error("net origin flows leave the patch immediately; no lattice point is valid")]
    EmptyGrid,

    #[error("grid has too few valid points: {0}")]
    InsufficientGrid(String),

    #[error("net corners are missing; largest valid half-width is {largest_valid_a}")]
    MissingCorners { largest_valid_a: f64 },

    #[error("expression error at byte {pos}: {msg}")]
    Expr { pos: usize, msg: String },
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
