use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("point ({u}, {v}) lies outside the chart domain")]
    OutOfDomain { u: f64, v: f64 },
    #[error("immersion degenerates at ({u}, {v})")]
    DegenerateImmersion { u: f64, v: f64 },
    #[error("frame rule undefined at stencil point ({u}, {v})")]
    MaskViolation { u: f64, v: f64 },
    #[error("operation requires an isothermal chart")]
    NonIsothermalChart,
    #[error("directions undefined at ({u}, {v}): {reason}")]
    UndefinedDirections { u: f64, v: f64, reason: &'static str },
    #[error("mask for sign {sign} is empty: every sample is pseudo-umbilic")]
    EmptyMask { sign: char },
    #[error("loop of radius {radius} passes through a singular point")]
    LoopThroughSingularity { radius: f64 },
    #[error("global integrals need a doubly periodic chart")]
    NotCompactChart,
    #[error("system is not involutive: sup |A| = {sup_a:.3e} exceeds {limit:.3e}")]
    NotInvolutive { sup_a: f64, limit: f64 },
    #[error("angle left [0, 2pi] at ({u}, {v}): {value}")]
    RangeEscape { u: f64, v: f64, value: f64 },
    #[error("compatibility residual {residual:.3e} exceeds {limit:.3e}")]
    CompatibilityViolation { residual: f64, limit: f64 },
    #[error("frame integration blew up (orthonormality defect {defect:.3e})")]
    FrameBlowup { defect: f64 },
    #[error("surface is not isotropically isothermic for the required sign: sup |d*Omega| = {sup:.3e}")]
    NotIsothermic { sup: f64 },
    #[error("path integral does not close: residual {residual:.3e}")]
    NonSimplyConnectedPath { residual: f64 },
    #[error("path integration closure failure: residual {residual:.3e}")]
    ClosureFailure { residual: f64 },
    #[error("unknown zoo entry '{0}'")]
    UnknownEntry(String),
    #[error("bad parameter '{name}': {reason}")]
    BadParameter { name: String, reason: String },
    #[error("no smooth normal gauge available on this grid")]
    GaugeUnavailable,
    #[error("grid too small: {0}")]
    BadGrid(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
