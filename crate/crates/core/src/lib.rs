//! Numerical toolkit for Menshov's correction theorem over arbitrary finite
//! Borel measures on `[0, 2π]`.
//!
//! The crate is organized bottom-up:
//!
//! - [`measure`]: CDF-backed finite measures (atoms plus a continuous part),
//!   closed-interval masses and affine normalization onto `[0, 1]`.
//! - [`fourier`]: Fourier–Stieltjes coefficients of probability measures on
//!   `[0, 1]`, Cesàro averages of `|ν̂(nk)|²`, and certified index sets
//!   `Λ_{j,k}`, `Λ̃`.
//! - [`equidistribution`]: M-sets, their masses, circle pushforwards and the
//!   convergence scan `μ(A_n) → τ μ(I)` along `Λ̃`.
//! - [`pwl`] and [`corrector`]: continuous piecewise-linear functions, the
//!   corrector layout and the corrector `ψ` with its property checks.
//! - [`assembly`]: equal-cell step functions, the two-scale search that
//!   certifies `μ(E) ≥ (1 − 7/ν) μ([0, 2π])`, a one-round demo of the
//!   correction theorem, and Fourier partial-sum diagnostics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod corrector;
pub mod equidistribution;
pub mod error;
pub mod fourier;
pub mod interval;
pub mod measure;
pub mod pwl;
pub mod quadrature;

pub use assembly::{
    claim_run, partial_sum_diagnostics, subdivide, theorem_demo, CellResult, ClaimParams,
    ClaimResult, DemoParams, DemoResult, EpsSchedule, PartialSumRow, SearchLimits, StepFunction,
};
pub use corrector::{
    build_psi, check_properties, choose_r, kernel_sup, layout, CorrectorLayout, CorrectorParams,
    KernelSweep, PropertyChecks,
};
pub use equidistribution::{
    mset_intervals, mset_mass, proposition_scan, pushforward_arc_mass, ArcSpec, ConvergenceTable,
    MSetSpec,
};
pub use error::{Error, Result};
pub use fourier::{
    build_lambda, coefficient, lambda_jk, wiener_average, Coefficient, CoefficientTable, IndexSet,
    LambdaParams,
};
pub use interval::{AffineMap, Interval};
pub use measure::{Atom, Measure, MeasureKind, MeasureSpec};
pub use pwl::PiecewiseLinearFn;

/// Length of the base period `[0, 2π]`.
pub const TWO_PI: f64 = std::f64::consts::TAU;
