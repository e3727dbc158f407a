//! Hamiltonians `Phi = x^2/2 + Psi` on `R^Lambda`, their derivatives, and convexity checks.

mod assumptions;
mod certificate;
mod hamiltonian;
mod weights;

pub use assumptions::{check_assumptions, AssumptionReport, ConvexityWitness, GrowthWitness, ShellWitness};
pub use certificate::{
    certificate_for, derivative_bounds, max_admissible_kappa, min_weighted_hessian_eig,
    schur_certificate, ConvexityCertificate, DerivativeBounds,
};
pub use hamiltonian::{Hamiltonian, Hessian, ModelKind};
pub use weights::WeightSpec;
