//! Exact-arithmetic toolkit for holomorphic Engel structures on `C^4`.
//!
//! The crate is organised around a small tower of layers:
//!
//! - [`exactnum`]: Gaussian-rational scalars (exact) and complex floats,
//!   with exact modulus-versus-power-of-two comparisons.
//! - [`poly`]: multivariate polynomials over Gaussian rationals, univariate
//!   polynomial curves and polynomial self-maps, with calculus primitives.
//! - [`distcalc`]: vector fields, differential forms, Lie brackets, rank
//!   computations, even-contact/Engel verification and the characteristic
//!   line field.
//! - [`horizontal`]: construction and exact verification of curves tangent
//!   to the flag `W ⊂ D ⊂ E` of the standard Engel structure.
//! - [`obstacles`]: dyadic shell obstacle families, exact membership,
//!   certified disc avoidance and the W-line intersection search.
//! - [`estimates`]: Cauchy-estimate verdicts for shell-avoiding horizontal
//!   discs and the Finsler lower bounds they imply.
//! - [`steering`]: constructive horizontal path planning through the 2-jet
//!   normal form of the standard Engel structure.
//! - [`kobayashi`]: extremal-disc search for Finsler upper bounds and
//!   directed-distance estimates along steering paths.
//! - [`transport`]: polynomial shear automorphisms, pullback of fields and
//!   flags, and Cartan prolongation of contact frames.
//! - [`moduli`]: the affine-bijection obstruction distinguishing the
//!   triple families `{0, 1, R·i}`.
//!
//! All symbolic identities are established in exact Gaussian-rational
//! arithmetic; floating point only enters search heuristics and certified
//! numeric bounds.

pub mod distcalc;
pub mod estimates;
pub mod exactnum;
pub mod horizontal;
pub mod kobayashi;
pub mod moduli;
pub mod obstacles;
pub mod poly;
pub mod sample;
pub mod steering;
pub mod suite;
pub mod transport;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
