//! Scalar waves on unbounded spacetime.
//!
//! The Minkowski inversion maps the forward causality cone of compactly
//! supported initial data onto a bounded region. After the Kelvin weighting
//! the wave equation is unchanged there, so an ordinary leapfrog scheme on a
//! finite grid covers all of `t ∈ [t0, ∞)`; [`query::query_point`] maps
//! back.
//!
//! ```
//! use std::sync::Arc;
//! use kelvin_wave::{field::*, kelvin::*, obstacle::ObstacleSpec, query::*, solver::run};
//! use kelvin_wave::minkowski::SpacetimePoint;
//!
//! let spec = ProblemSpec::new(
//!     1, 2.0, 1.0,
//!     Arc::new(GaussianPulse::new(1.0, 0.1, vec![0.0])),
//!     Arc::new(ZeroField),
//!     ObstacleSpec::None,
//! )?;
//! let grid = size_grid(1.0, 2.0, 1.0 / 200.0, 0.5 / 200.0, 1)?;
//! let frames = run(&spec, &grid)?;
//!
//! // half of the pulse, a long way out
//! let u = query_point(&frames, &spec, &SpacetimePoint::new(&[98.0], 100.0));
//! assert!((u.value - 0.5).abs() < 0.05);
//! # Ok::<(), kelvin_wave::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod field;
pub mod frames;
pub mod io;
pub mod kelvin;
pub mod lattice;
pub mod minkowski;
pub mod obstacle;
pub mod oracle;
pub mod query;
pub mod solver;

pub use error::{Error, Result};
pub use frames::{FrameSet, LatticeGeometry};
pub use kelvin::{GridSpec, ProblemSpec};
pub use minkowski::SpacetimePoint;
pub use query::{QueryResult, Region};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/bounded-domain.md")]
    mod bounded_domain {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/queries.md")]
    mod queries {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
