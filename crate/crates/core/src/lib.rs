//! Meshless Nyström solvers for 2D Fredholm integral equations of the
//! second kind.
//!
//! The classical method collocates at the quadrature nodes. The decoupled
//! method solves for values at an independent set of solution nodes `X` and
//! reaches the quadrature nodes `Y` through a moving least squares
//! reconstruction, so the linear system has size `|X|` however fine `Y` is.

pub mod error;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod nodes;
pub mod problems;
pub mod quadrature;
pub mod reconstruction;
pub mod solver;
pub mod study;

pub use error::{Error, Result};
pub use geometry::{Curve, Disk, Domain, Point, Rect, Shape};
pub use kernel::{Field, Kernel, KernelFlags};
pub use nodes::{generate_nodes, NodeSet};
pub use quadrature::{FitMode, QuadratureRule};
pub use reconstruction::{build_mls, ReconstructionOperator};
