use crate::error::{Error, Result};
use crate::linalg::{gmres, GmresOptions, SolveStats};
use crate::scalar::{dot, Real};

use super::{GridFunction, GridVectorField, WittenGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Relative residual target in the `L^2(mu)` norm.
    pub tol: T,
    /// Iteration cap; `None` uses `20 sqrt(n^m)`.
    pub max_iter: Option<usize>,
    pub restart: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            tol: T::lit(1e-8),
            max_iter: None,
            restart: 60,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    fn gmres(&self, nodes: usize) -> GmresOptions<T> {
        let cap = self
            .max_iter
            .unwrap_or_else(|| (20.0 * (nodes as f64).sqrt()).ceil() as usize);
        GmresOptions {
            tol: self.tol,
            max_iter: cap.max(1),
            restart: self.restart,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<F, T> {
    pub field: F,
    pub stats: SolveStats<T>,
}

fn jacobi<T: Real>(diag: &[T]) -> impl Fn(&[T], &mut [T]) + '_ {
    move |r, z| {
        for ((zi, &ri), &d) in z.iter_mut().zip(r).zip(diag) {
            *zi = ri / d;
        }
    }
}

impl<T: Real> WittenGrid<T> {
    /// Solves `A0 v = g - <g>_mu` with `<v>_mu = 0`.
    ///
    /// Works on `u = e^{-Phi/2} v`, where the `mu` inner product becomes the
    /// Euclidean one, and deflates the kernel direction `e^{-Phi/2}` inside the
    /// Krylov iteration. The reported residual is the mean-free part of
    /// `A0 v - (g - <g>)` relative to `||g - <g>||_mu`.
    pub fn solve_zero_mean(
        &self,
        g: &GridFunction<T>,
        opts: &SolverOptions<T>,
    ) -> Result<Solution<GridFunction<T>, T>> {
        self.check_spec(g.spec())?;
        let n = self.spec.node_count();
        let q = &self.quadrature;
        let mean = q.mean(g.values());
        let rhs: Vec<T> = g.values().iter().map(|&v| v - mean).collect();
        let rhs_norm = q.norm(&rhs);
        // constants up to rounding of the mean
        if rhs_norm <= T::lit(16.0) * T::epsilon() * q.norm(g.values()) {
            return Ok(Solution {
                field: GridFunction::constant(self.spec, T::zero()),
                stats: SolveStats {
                    iterations: 0,
                    residual: T::zero(),
                    converged: true,
                },
            });
        }
        let phi = self.half_density();
        let phi_norm = dot(&phi, &phi).sqrt();
        let unit: Vec<T> = phi.iter().map(|&v| v / phi_norm).collect();
        let project = |x: &mut [T]| {
            let c = dot(&unit, x);
            for (xi, &ui) in x.iter_mut().zip(&unit) {
                *xi -= c * ui;
            }
        };
        let s = self.conjugate(&self.assemble_a0());
        let diag = s.diagonal();
        let mut b: Vec<T> = rhs.iter().zip(&phi).map(|(&r, &f)| r * f).collect();
        project(&mut b);
        let op = |x: &[T], y: &mut [T]| {
            let mut xp = x.to_vec();
            project(&mut xp);
            s.apply(&xp, y);
            project(y);
        };
        let mut inner = opts.gmres(n);
        inner.tol = opts.tol * T::lit(0.1);
        let (mut u, gstats) = gmres(op, jacobi(&diag), &b, inner);
        project(&mut u);
        let mut v: Vec<T> = u.iter().zip(&phi).map(|(&a, &f)| a / f).collect();
        let vmean = q.mean(&v);
        v.iter_mut().for_each(|x| *x -= vmean);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotConverged {
                iterations: 0,
                residual: f64::NAN,
            });
        }
        let stats = self.zero_mean_residual(&v, &rhs, rhs_norm, opts, gstats.iterations)?;
        Ok(Solution {
            field: GridFunction::new(self.spec, v)?,
            stats,
        })
    }

    fn zero_mean_residual(
        &self,
        v: &[T],
        rhs: &[T],
        rhs_norm: T,
        opts: &SolverOptions<T>,
        iterations: usize,
    ) -> Result<SolveStats<T>> {
        let q = &self.quadrature;
        let mut res = self.assemble_a0().mul_vec(v);
        for (r, &b) in res.iter_mut().zip(rhs) {
            *r -= b;
        }
        let rm = q.mean(&res);
        res.iter_mut().for_each(|r| *r -= rm);
        let residual = q.norm(&res) / rhs_norm;
        if residual <= opts.tol {
            Ok(SolveStats {
                iterations,
                residual,
                converged: true,
            })
        } else {
            Err(Error::NotConverged {
                iterations,
                residual: residual.to_f64_lossy(),
            })
        }
    }

    /// Solves `A1 w = q` (`(-Delta + grad Phi . grad) w + Hess Phi w = q`).
    ///
    /// Refuses when `Hess Phi` fails to be positive definite at some node.
    pub fn solve_one_form(
        &self,
        rhs: &GridVectorField<T>,
        opts: &SolverOptions<T>,
    ) -> Result<Solution<GridVectorField<T>, T>> {
        self.check_spec(rhs.spec())?;
        let lo = self.min_hessian_eigenvalue()?;
        if !(lo > T::zero()) {
            return Err(Error::Indefinite(format!(
                "Hess Phi has eigenvalue {lo:e} on the grid"
            )));
        }
        let (n, m) = (self.spec.node_count(), self.spec.dim());
        let phi = self.half_density();
        let b: Vec<T> = rhs
            .data()
            .iter()
            .enumerate()
            .map(|(k, &v)| v * phi[k % n])
            .collect();
        let s = self.conjugate(&self.assemble_a1());
        let diag = s.diagonal();
        let (u, mut stats) = gmres(|x, y| s.apply(x, y), jacobi(&diag), &b, opts.gmres(n));
        if !stats.converged {
            return Err(Error::NotConverged {
                iterations: stats.iterations,
                residual: stats.residual.to_f64_lossy(),
            });
        }
        let w: Vec<T> = u.iter().enumerate().map(|(k, &v)| v / phi[k % n]).collect();
        let field = GridVectorField::new(self.spec, w)?;
        if !field.is_finite() {
            return Err(Error::NotConverged {
                iterations: stats.iterations,
                residual: f64::NAN,
            });
        }
        // residual in L^2(mu), measured on the returned field
        let a1 = self.assemble_a1();
        let aw = a1.mul_vec(field.data());
        let q = &self.quadrature;
        let (mut num, mut den) = (T::zero(), T::zero());
        for k in 0..m {
            let r: Vec<T> = (0..n).map(|p| aw[k * n + p] - rhs.data()[k * n + p]).collect();
            num += q.inner(&r, &r);
            den += q.inner(rhs.component(k), rhs.component(k));
        }
        if den > T::zero() {
            stats.residual = (num / den).sqrt();
        }
        let rq = self.a1_rayleigh_quotient(&a1, &field);
        if den > T::zero() && !(rq > T::zero()) {
            return Err(Error::Indefinite(format!("solution has Rayleigh quotient {rq:e}")));
        }
        Ok(Solution { field, stats })
    }

    pub(crate) fn check_spec(&self, other: &super::GridSpec<T>) -> Result<()> {
        if *other == self.spec {
            Ok(())
        } else {
            Err(Error::InvalidParameter("grid function lives on a different grid".into()))
        }
    }
}
