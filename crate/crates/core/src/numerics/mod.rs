//! Numerical substrate: grids, quadrature, dense and tridiagonal linear
//! algebra, and reproducible random streams.

mod grid;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod tridiag;

pub use grid::Grid1D;
pub use linalg::{gen_eig_max, solve_spd, sym_eig, Cholesky, SymEig, SymMatrix};
pub use quadrature::{integrate, QuadratureKind, QuadratureRule};
pub use rng::RngStream;
pub use tridiag::SymTridiagonal;
