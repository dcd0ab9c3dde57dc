//! Computable Wiener amalgam spaces `W(B, Y)` over `ℝⁿ`, `ℤⁿ` and the
//! `ax+b` group.
//!
//! Functions are tabulated on group-adapted grids ([`grid`]); control
//! functions and amalgam quasi-norms live in [`amalgam`], global components
//! and weights in [`components`], point sets and partitions of unity in
//! [`discretization`], group convolution in [`convolution`], and the
//! mixed-norm machinery of the `ax+b` group in [`axb`].

pub mod amalgam;
pub mod axb;
pub mod cli;
pub mod components;
pub mod convolution;
pub mod discretization;
pub mod error;
pub mod family;
pub mod grid;
pub mod group;
pub mod window;

pub use error::{Error, Result};
pub use grid::{haar_integral, AxisSpec, Grid, GridMetadata, SampledFunction};
pub use group::{GroupElement, GroupSpec};
pub use window::Window;

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
