//! Small linear-algebra kernels: CSR storage, dense symmetric eigenvalues, GMRES.

mod csr;
mod dense;
mod gmres;

pub use csr::{CsrMatrix, TripletBuilder};
pub use dense::{cholesky_solve, symmetric_eigenvalues};
pub use gmres::{gmres, GmresOptions, SolveStats};
