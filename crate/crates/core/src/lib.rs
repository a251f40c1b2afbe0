//! Passive static networks for dual-NOPA EPR entanglement: closed-loop
//! modelling, two-mode squeezing spectra, gradient descent over the unitary
//! group, and beam-splitter synthesis.
//!
//! ```
//! use eprnet::{build_state_space, squeezing_at_dc, NopaParams, PassiveNetwork};
//!
//! let ss = build_state_space(&PassiveNetwork::coherent_feedback(), &NopaParams::reference())?;
//! let report = squeezing_at_dc(&ss)?;
//! assert!((report.db + 26.235).abs() < 1e-3);
//! # Ok::<(), eprnet::Error>(())
//! ```

// `!(x > tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod linalg;
pub mod network;
pub mod optimizer;
pub mod spectra;
pub mod synthesis;

pub use error::{Error, Result};
pub use linalg::{CMatrix6, RMatrix12, RMatrix8, C64};
pub use network::{
    build_state_space, complex_form, quadrature_form, stability_check, NopaParams, PassiveNetwork,
    QuadratureMap, QuadratureNetwork, StabilityReport, StateSpace, DEFAULT_GAMMA_REF,
};
pub use optimizer::{
    descent_direction, euclidean_gradient, feasibility, feasible, inner_product, optimize, retract,
    squeezing_cost, GradientMatrix, IterationRecord, OptimizationResult, OptimizerConfig, Status,
};
pub use spectra::{
    selectors, squeezing_at_dc, sweep_spectrum, transfer_matrix, two_mode_squeezing, SelectorPair,
    SqueezingReport, Sweep, VACUUM_LEVEL,
};
pub use synthesis::{
    classify, decompose, quantize_sensitivity, reconstruct, FactorKind, PermutationVector,
    ProductOrder, SynthesisReport, TwoLevelFactor,
};
