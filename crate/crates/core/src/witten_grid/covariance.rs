use crate::error::Result;
use crate::linalg::cholesky_solve;
use crate::model::Hamiltonian;
use crate::scalar::Real;

use super::{GridFunction, GridSpec, GridVectorField, SolverOptions, WittenGrid};

/// Variance of `g` next to its Brascamp-Lieb bound `<grad g . (Hess Phi)^{-1} grad g>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrascampLieb<T> {
    pub variance: T,
    pub bl_bound: T,
}

impl<T: Real> BrascampLieb<T> {
    pub fn holds(&self, rel_tol: T) -> bool {
        self.variance <= self.bl_bound * (T::one() + rel_tol)
    }
}

impl<T: Real> WittenGrid<T> {
    /// `<(g - <g>)(h - <h>)>_mu` by quadrature.
    pub fn covariance_direct(&self, g: &GridFunction<T>, h: &GridFunction<T>) -> Result<T> {
        self.check_spec(g.spec())?;
        self.check_spec(h.spec())?;
        let q = &self.quadrature;
        let (mg, mh) = (q.mean(g.values()), q.mean(h.values()));
        Ok(q
            .weights
            .iter()
            .zip(g.values().iter().zip(h.values()))
            .map(|(&w, (&a, &b))| w * (a - mg) * (b - mh))
            .sum())
    }

    /// `<(A1^{-1} grad g) . grad h>_mu` with discrete gradients.
    pub fn covariance_hs(
        &self,
        g: &GridFunction<T>,
        h: &GridFunction<T>,
        opts: &SolverOptions<T>,
    ) -> Result<T> {
        self.check_spec(h.spec())?;
        let w = self.solve_one_form(&g.gradient(), opts)?.field;
        let gh = h.gradient();
        let q = &self.quadrature;
        Ok((0..self.spec.dim())
            .map(|k| q.inner(w.component(k), gh.component(k)))
            .sum())
    }

    pub fn brascamp_lieb_check(&self, g: &GridFunction<T>) -> Result<BrascampLieb<T>> {
        let variance = self.covariance_direct(g, g)?;
        let (n, m) = (self.spec.node_count(), self.spec.dim());
        let grad = g.gradient();
        let mut v = vec![T::zero(); m];
        let mut bl = T::zero();
        for p in 0..n {
            grad.at(p, &mut v);
            if v.iter().all(|&c| c == T::zero()) {
                continue;
            }
            let y = cholesky_solve(self.hessian_at(p), &v, m)?;
            let quad: T = v.iter().zip(&y).map(|(&a, &b)| a * b).sum();
            bl += self.quadrature.weights[p] * quad;
        }
        Ok(BrascampLieb {
            variance,
            bl_bound: bl,
        })
    }
}

pub fn covariance_direct<T: Real>(
    model: &Hamiltonian<T>,
    spec: GridSpec<T>,
    g: &GridFunction<T>,
    h: &GridFunction<T>,
) -> Result<T> {
    WittenGrid::new(model, spec)?.covariance_direct(g, h)
}

pub fn covariance_hs<T: Real>(
    model: &Hamiltonian<T>,
    spec: GridSpec<T>,
    g: &GridFunction<T>,
    h: &GridFunction<T>,
) -> Result<T> {
    WittenGrid::new(model, spec)?.covariance_hs(g, h, &SolverOptions::default())
}

pub fn brascamp_lieb_check<T: Real>(
    model: &Hamiltonian<T>,
    spec: GridSpec<T>,
    g: &GridFunction<T>,
) -> Result<BrascampLieb<T>> {
    WittenGrid::new(model, spec)?.brascamp_lieb_check(g)
}

pub fn solve_zero_mean<T: Real>(
    model: &Hamiltonian<T>,
    spec: GridSpec<T>,
    g: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    Ok(WittenGrid::new(model, spec)?
        .solve_zero_mean(g, &SolverOptions::default())?
        .field)
}

pub fn solve_one_form<T: Real>(
    model: &Hamiltonian<T>,
    spec: GridSpec<T>,
    q: &GridVectorField<T>,
) -> Result<GridVectorField<T>> {
    Ok(WittenGrid::new(model, spec)?
        .solve_one_form(q, &SolverOptions::default())?
        .field)
}

pub fn witten_equivalence_check<T: Real>(
    model: &Hamiltonian<T>,
    spec: GridSpec<T>,
    v: &GridFunction<T>,
) -> Result<T> {
    let grid = WittenGrid::new(model, spec)?;
    grid.check_spec(v.spec())?;
    Ok(grid.witten_equivalence_check(v))
}
