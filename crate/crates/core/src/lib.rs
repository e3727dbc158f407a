//! Decay of correlations for convex lattice spin models through the
//! Helffer-Sjostrand representation.
//!
//! The core types are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod decay;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod model;
pub mod observable;
pub mod sampler;
pub mod scalar;
pub mod witten_grid;

pub use error::{Error, Result};
pub use lattice::{Lattice, SiteSet};
pub use observable::Observable;
pub use scalar::Real;

pub type Hamiltonian64 = model::Hamiltonian<f64>;
pub type ModelKind64 = model::ModelKind<f64>;
pub type WeightSpec64 = model::WeightSpec<f64>;
pub type ConvexityCertificate64 = model::ConvexityCertificate<f64>;
pub type GridSpec64 = witten_grid::GridSpec<f64>;
pub type GridFunction64 = witten_grid::GridFunction<f64>;
pub type GridVectorField64 = witten_grid::GridVectorField<f64>;
pub type WittenGrid64 = witten_grid::WittenGrid<f64>;

pub type Hamiltonian32 = model::Hamiltonian<f32>;
pub type GridSpec32 = witten_grid::GridSpec<f32>;
pub type WittenGrid32 = witten_grid::WittenGrid<f32>;
