use crate::error::{Error, Result};
use crate::lattice::{Lattice, SiteSet};
use crate::scalar::Real;

/// Site weights `rho(i) = exp(kappa * d(i, S))` anchored at a support `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec<T> {
    kappa: T,
    anchor: SiteSet,
    rho: Vec<T>,
}

impl<T: Real> WeightSpec<T> {
    pub fn new(lattice: &Lattice, kappa: T, anchor: SiteSet) -> Result<Self> {
        if !(kappa >= T::zero()) || !kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa must be finite and >= 0, got {kappa}")));
        }
        let rho = (0..lattice.len())
            .map(|i| {
                lattice
                    .distance_to_set(i, &anchor)
                    .map(|d| (kappa * T::from_count(d)).exp())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightSpec { kappa, anchor, rho })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn anchor(&self) -> &SiteSet {
        &self.anchor
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    /// `|x|_{2,rho} = (sum_i rho(i)^2 x_i^2)^{1/2}`.
    pub fn weighted_norm(&self, x: &[T]) -> T {
        x.iter()
            .zip(&self.rho)
            .map(|(&v, &r)| (v * r) * (v * r))
            .sum::<T>()
            .sqrt()
    }

    /// Largest `|ln(rho(i) / rho(j))|` over lattice edges.
    pub fn max_neighbor_log_ratio(&self, lattice: &Lattice) -> T {
        lattice
            .edges()
            .map(|(i, j)| (self.rho[i] / self.rho[j]).ln().abs())
            .fold(T::zero(), T::max)
    }
}
