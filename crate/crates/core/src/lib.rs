//! Numerical curvature toolkit for gravitational instantons.
//!
//! The crate evaluates explicit Ricci-flat 4-metrics (Kerr, Taub-NUT,
//! Taub-bolt, Eguchi-Hanson, ...) together with exact coordinate
//! derivatives to high order, computes the full curvature stack and the
//! self-dual/anti-self-dual Weyl split, carries out the conformal
//! rescaling that turns a Wu-positive metric into a Kähler one, and
//! verifies the curvature identities, inequalities, fall-off rates and
//! boundary-flux limits that this construction rests on.
//!
//! All differentiation is Taylor-mode: metric components are evaluated in
//! truncated multivariate jet arithmetic ([`jet::Jet`]), so third and
//! fourth derivatives of curvature-derived fields are exact to machine
//! rounding. Finite differences appear only as independent test oracles.

pub mod asymptotics;
pub mod chart;
pub mod curvature;
pub mod identities;
pub mod jet;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod tensor;
pub mod wu;
pub mod zoo;

use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the '{chart}' chart domain")]
    OutsideDomain { chart: &'static str, point: [f64; 4] },

    #[error("metric not positive definite at {point:?} (Cholesky pivot {pivot:.3e})")]
    NotPositiveDefinite { point: [f64; 4], pivot: f64 },

    #[error("jet order {available} is too low (need {needed})")]
    InsufficientOrder { needed: usize, available: usize },

    #[error("Wu criterion fails: det W+ = {det:.6e} is not positive")]
    WuFailure { det: f64 },

    #[error("top eigenvalue gap {gap:.3e} too small relative to |W| = {scale:.3e}")]
    DegenerateGap { gap: f64, scale: f64 },

    #[error("matrix asymmetry {0:.3e} exceeds tolerance")]
    NotSymmetric(f64),

    #[error("matrix trace {0:.3e} exceeds trace-free tolerance")]
    NotTraceFree(f64),

    #[error("cubic radicand {radicand:.6e} below clamp floor {floor:.6e}; inconsistent input")]
    NegativeRadicand { radicand: f64, floor: f64 },

    #[error("inadmissible parameters: {0}")]
    InvalidParams(String),

    #[error("metric is not Einstein at {point:?}: |Ric|/|Riem| = {rel:.3e}")]
    NotEinstein { point: [f64; 4], rel: f64 },

    #[error("conformal factor requires alpha > 0, got {0:.6e}")]
    NonPositiveAlpha(f64),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("field must be positive near the base point, got {0:.6e}")]
    NonPositiveField(f64),

    #[error("degenerate asymptotic scale estimate c = {0:.3e}")]
    DegenerateScale(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
