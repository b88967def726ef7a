//! Numerics for the Hardy space of the upper half-plane: outer functions,
//! boundary measures and their transforms, matrix-valued rational Pick
//! functions, Hankel operators from Carleson measures and reflection
//! positivity checks.

pub mod error;
pub mod hankel;
pub mod hardy;
pub mod kernels_appendix;
pub mod measures;
pub mod numerics;
pub mod pick;
pub mod plot;
pub mod symbols;

pub use nalgebra::DMatrix;
pub use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMatrix = DMatrix<Complex64>;

pub use error::{Error, Result};
pub use hankel::{HankelGram, Verdict};
pub use hardy::{BoundaryGrid, KernelCombination, SymbolFunction};
pub use kernels_appendix::{ApproxIdentity, KernelParams, SandwichFactors};
pub use measures::BoundaryMeasure;
pub use numerics::{CurveSample, QuadratureConfig};
pub use pick::{BlaschkePotapovProduct, MobiusTransform, RationalPickFunction};
pub use symbols::{BoundaryModulus, OuterFunction};

/// Formats a float with 17 significant digits, the precision that makes
/// output round-trip exactly. Negative zero prints as zero.
pub fn fmt17(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}
