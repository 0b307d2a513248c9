//! Spectral solver and verification suite for the oblique (tilted-frame)
//! paraxial wave equation
//!
//! ```text
//! i(kx∂x + ky∂y)u + (ε/2)(kx²∂yy − 2kxky∂xy + ky²∂xx)u + iνu = 0
//! ```
//!
//! posed on the half-space `x ≥ 0` and on the quadrant `x, y ≥ 0`.

pub mod diagnostics;
pub mod fractional;
pub mod io;
pub mod model;
pub mod solvers;
pub mod spectral;
pub mod symbols;

pub use model::{BoundaryData, BoundaryKind, ComplexField2D, Grid1D, PhysicalParams, SpectralGrid};
pub use solvers::{solve_halfspace, solve_quadrant, HalfSpaceSolution, QuadrantSolution};
pub use spectral::{Dft, Spectrum};
pub use symbols::SymbolTable;
