//! Numerical toolkit for planar quasiconformal maps whose Laplacian is
//! controlled: disc grids and quadrature, Poisson/Green solvers, Beltrami
//! principal solutions, explicit example maps, composition identities, the
//! half-plane extension of line homeomorphisms, and boundary diagnostics.

pub mod beltrami;
pub mod composite;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod halfplane;
pub mod greenpoisson;
pub mod maps;

pub use error::{QcError, Result};
pub use grid::{C64, DiscGrid, Field, Grid, SquareGrid};
