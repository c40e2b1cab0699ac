//! Dixmier traces, Marcinkiewicz quasi-norms and noncommutative residues of
//! Fourier multipliers, computed from global symbols.
//!
//! The pipeline is: enumerate the dual of a [`geometry::Geometry`], evaluate
//! a [`symbol::SymbolSpec`] on every point, accumulate partial sums over a
//! cutoff grid ([`summation`]) and extrapolate the log-averages
//! ([`trace`]). [`boundary`] covers the interval model with boundary
//! conditions and [`oracle`] checks the symbol side against singular values
//! of the truncated operator.

pub mod error;
pub mod geometry;
pub mod symbol;
pub mod summation;
pub mod trace;
pub mod boundary;
pub mod oracle;

pub use error::{Error, Result};
pub use geometry::{DualPoint, Geometry, GeometryKind, Label};
pub use summation::{PartialSumSeries, Picture};
pub use symbol::{MatrixSymbolValue, SymbolSpec};
pub use trace::{TraceEstimate, Verdict};
