//! Tensor-grid discretization of `R^Lambda`: Helffer-Sjostrand operators, the
//! zero-mean equation, one-form solves and Gibbs covariances.

mod covariance;
mod grid;
mod operators;
mod solve;

pub use covariance::{
    brascamp_lieb_check, covariance_direct, covariance_hs, solve_one_form, solve_zero_mean,
    witten_equivalence_check, BrascampLieb,
};
pub use grid::{GridFunction, GridSpec, GridVectorField, DEFAULT_NODE_BUDGET, MAX_GRID_DIM};
pub use solve::{Solution, SolverOptions};

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigenvalues, CsrMatrix};
use crate::model::Hamiltonian;
use crate::scalar::Real;

/// Product-weight quadrature for the Gibbs measure `Z^{-1} e^{-Phi} dx` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsQuadrature<T> {
    /// Normalized node weights `Z^{-1} e^{-Phi(x_p)} h^m`, summing to one.
    pub weights: Vec<T>,
    /// `ln Z` with `Z = sum_p e^{-Phi(x_p)} h^m`.
    pub log_z: T,
}

impl<T: Real> GibbsQuadrature<T> {
    pub fn mean(&self, f: &[T]) -> T {
        self.weights.iter().zip(f).map(|(&w, &v)| w * v).sum()
    }

    pub fn inner(&self, f: &[T], g: &[T]) -> T {
        self.weights
            .iter()
            .zip(f.iter().zip(g))
            .map(|(&w, (&a, &b))| w * a * b)
            .sum()
    }

    pub fn norm(&self, f: &[T]) -> T {
        self.inner(f, f).sqrt()
    }
}

/// A Hamiltonian sampled on a grid, with every node-local quantity precomputed.
#[derive(Debug, Clone)]
pub struct WittenGrid<T> {
    model: Hamiltonian<T>,
    spec: GridSpec<T>,
    phi: Vec<T>,
    phi_min: T,
    /// Component-major `grad Phi`.
    grad: Vec<T>,
    /// Row-major `m x m` Hessian per node.
    hess: Vec<T>,
    quadrature: GibbsQuadrature<T>,
}

impl<T: Real> WittenGrid<T> {
    pub fn new(model: &Hamiltonian<T>, spec: GridSpec<T>) -> Result<Self> {
        let m = spec.dim();
        if model.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                got: m,
            });
        }
        let n = spec.node_count();
        let mut phi = vec![T::zero(); n];
        let mut grad = vec![T::zero(); m * n];
        let mut hess = vec![T::zero(); m * m * n];
        let mut x = vec![T::zero(); m];
        let mut g = vec![T::zero(); m];
        for p in 0..n {
            spec.coords_into(p, &mut x);
            phi[p] = model.value_unchecked(&x);
            model.gradient_into(&x, &mut g);
            for k in 0..m {
                grad[k * n + p] = g[k];
            }
            hess[p * m * m..(p + 1) * m * m].copy_from_slice(&model.hessian_unchecked(&x).to_dense());
        }
        if let Some(p) = phi.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("Phi is not finite at grid node {p}")));
        }
        let phi_min = phi.iter().copied().fold(T::infinity(), T::min);
        let hm = spec.spacing().powi(m as i32);
        let raw: Vec<T> = phi.iter().map(|&v| (phi_min - v).exp()).collect();
        let total: T = raw.iter().copied().sum();
        let log_z = total.ln() - phi_min + hm.ln();
        if !(total > T::zero()) || !log_z.is_finite() {
            return Err(Error::DegenerateNormalizer(log_z.to_f64_lossy()));
        }
        let weights = raw.into_iter().map(|w| w / total).collect();
        Ok(WittenGrid {
            model: model.clone(),
            spec,
            phi,
            phi_min,
            grad,
            hess,
            quadrature: GibbsQuadrature { weights, log_z },
        })
    }

    pub fn model(&self) -> &Hamiltonian<T> {
        &self.model
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn quadrature(&self) -> &GibbsQuadrature<T> {
        &self.quadrature
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn hess_entry(&self, node: usize, i: usize, k: usize) -> T {
        let m = self.spec.dim();
        self.hess[node * m * m + i * m + k]
    }

    pub fn hessian_at(&self, node: usize) -> &[T] {
        let m = self.spec.dim();
        &self.hess[node * m * m..(node + 1) * m * m]
    }

    /// `e^{-(Phi - min Phi)/2}` per node.
    pub(crate) fn half_density(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.phi.iter().map(|&v| ((self.phi_min - v) * half).exp()).collect()
    }

    /// Interior nodes where the Gibbs density is within `e^{-L^2/4}` of its peak
    /// and the cell Peclet number `(h/2) max_k |d_k Phi|` is at most one.
    ///
    /// Outside this region the discrete solutions are dominated by the box
    /// truncation or by the oscillations of centered convection, and carry no
    /// pointwise information about `R^Lambda`.
    pub fn core_nodes(&self) -> Vec<usize> {
        let l = self.spec.half_width();
        let level = l * l / T::lit(4.0);
        let (n, m) = (self.spec.node_count(), self.spec.dim());
        let half_h = self.spec.spacing() * T::lit(0.5);
        (0..n)
            .filter(|&p| self.spec.is_interior(p) && self.phi[p] - self.phi_min <= level)
            .filter(|&p| (0..m).all(|k| self.grad[k * n + p].abs() * half_h <= T::one()))
            .collect()
    }

    /// Smallest eigenvalue of `Hess Phi` over all nodes.
    pub fn min_hessian_eigenvalue(&self) -> Result<T> {
        let m = self.spec.dim();
        let mut best = T::infinity();
        for p in 0..self.spec.node_count() {
            best = best.min(symmetric_eigenvalues(self.hessian_at(p), m)?[0]);
        }
        Ok(best)
    }

    /// `|| W0 e^{-Phi/2} ||_mu / || e^{-Phi/2} ||_mu`.
    pub fn kernel_residual(&self) -> T {
        let w0 = self.assemble_w0();
        let ground = self.half_density();
        let image = w0.mul_vec(&ground);
        self.quadrature.norm(&image) / self.quadrature.norm(&ground)
    }

    /// `max |W0(e^{-Phi/2} v) - e^{-Phi/2} A0 v|` over interior nodes.
    pub fn witten_equivalence_check(&self, v: &GridFunction<T>) -> T {
        let half = T::lit(0.5);
        let factor: Vec<T> = self.phi.iter().map(|&p| (-p * half).exp()).collect();
        let conj: Vec<T> = v.values().iter().zip(&factor).map(|(&a, &b)| a * b).collect();
        let lhs = self.assemble_w0().mul_vec(&conj);
        let a0v = self.assemble_a0().mul_vec(v.values());
        (0..self.spec.node_count())
            .filter(|&p| self.spec.is_interior(p))
            .map(|p| (lhs[p] - factor[p] * a0v[p]).abs())
            .fold(T::zero(), T::max)
    }

    /// `<A1 w, w>_mu / <w, w>_mu`.
    pub fn a1_rayleigh_quotient(&self, a1: &CsrMatrix<T>, w: &GridVectorField<T>) -> T {
        let n = self.spec.node_count();
        let aw = a1.mul_vec(w.data());
        let q = &self.quadrature;
        let (mut num, mut den) = (T::zero(), T::zero());
        for k in 0..self.spec.dim() {
            let (a, b) = (&aw[k * n..(k + 1) * n], w.component(k));
            num += q.inner(a, b);
            den += q.inner(b, b);
        }
        num / den
    }
}

pub fn assemble_a0<T: Real>(h: &Hamiltonian<T>, spec: GridSpec<T>) -> Result<CsrMatrix<T>> {
    Ok(WittenGrid::new(h, spec)?.assemble_a0())
}

pub fn assemble_a1<T: Real>(h: &Hamiltonian<T>, spec: GridSpec<T>) -> Result<CsrMatrix<T>> {
    Ok(WittenGrid::new(h, spec)?.assemble_a1())
}

pub fn assemble_w0<T: Real>(h: &Hamiltonian<T>, spec: GridSpec<T>) -> Result<CsrMatrix<T>> {
    Ok(WittenGrid::new(h, spec)?.assemble_w0())
}

pub fn gibbs_quadrature<T: Real>(h: &Hamiltonian<T>, spec: GridSpec<T>) -> Result<GibbsQuadrature<T>> {
    Ok(WittenGrid::new(h, spec)?.quadrature)
}
