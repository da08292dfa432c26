//! Limit laws of the hierarchy of freeness.
//!
//! The crate is organised bottom-up:
//!
//! * [`partitions`] enumerates set partitions and counts non-crossing
//!   partitions by depth and number of blocks.
//! * [`ratfun`] provides exact polynomial and rational-function arithmetic over
//!   the rationals, univariate in `z` or with coefficients in `Q[λ]`.
//! * [`cauchy`] builds the continued-fraction hierarchy of Cauchy transforms and
//!   the Poisson generating functions and extracts their moments.
//! * [`measures`] constructs the discrete limit measures and their moments.
//! * [`fock`] realises the truncated m-free Fock space.
//! * [`hierarchy_sim`] simulates the tensor-product/GNS construction on a
//!   finite number of sites.

pub mod cauchy;
mod error;
pub mod fock;
pub mod hierarchy_sim;
pub mod measures;
pub mod partitions;
pub mod ratfun;

pub use error::{Error, Result};

pub use cauchy::{CauchyHierarchy, ClosedFormReport, PoissonHierarchy};
pub use fock::{FockSpace, FockVector, OneParticleVector, OpKind, OperatorWord};
pub use hierarchy_sim::{GnsData, Observable, PyramidReport, SimConfig};
pub use measures::{DiscreteMeasure, MeasureFamily, MeasureRecord};
pub use partitions::{DepthCountTable, PairPartition, SetPartition};
pub use ratfun::{BiPoly, LaurentSeries, Polynomial, RationalFunction, Ring, Q};

/// Default number of vector entries a simulated tensor state may hold.
pub const DEFAULT_ENTRY_CAP: usize = 1_000_000;
/// Default maximal length of an operator word in the tensor simulator.
pub const DEFAULT_WORD_CAP: usize = 8;
/// Largest ground set accepted by [`partitions::enumerate_partitions`].
pub const ENUMERATION_CAP: usize = 14;
