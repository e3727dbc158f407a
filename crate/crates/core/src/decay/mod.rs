//! Weighted gradient bounds, covariance decay checks, and fitted decay rates.

mod profile;

pub use profile::{correlation_profile, fit_decay_rate, Aggregation, DecayFit, DecayProfile, ProfileEntry};

use crate::error::{Error, Result};
use crate::lattice::SiteSet;
use crate::model::{certificate_for, ConvexityCertificate, Hamiltonian, WeightSpec};
use crate::observable::Observable;
use crate::sampler::{estimate_cross, estimate_mean, Chain};
use crate::scalar::Real;
use crate::witten_grid::{GridFunction, GridVectorField, SolverOptions, WittenGrid};

/// Relative slack in `sup_weighted_norm <= rhs_bound`.
pub const WEIGHTED_BOUND_RTOL: f64 = 1e-6;
/// Relative slack in `lhs <= rhs` for covariance decay checks.
pub const DECAY_CHECK_RTOL: f64 = 1e-9;
/// Error-bar multiplier for sampled covariances and the profile noise floor.
pub const NOISE_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGradientReport<T> {
    pub kappa: T,
    pub delta0: T,
    /// `sup_x (sum_i f_{x_i}^2 e^{2 kappa d(i, S_g)})^{1/2}` over the core nodes.
    pub sup_weighted_norm: T,
    /// `(1/delta0) sup_x |grad g|_{2,rho}` over the same nodes.
    pub rhs_bound: T,
    pub pass: bool,
}

fn admissible_certificate<T: Real>(grid: &WittenGrid<T>, kappa: T) -> Result<ConvexityCertificate<T>> {
    let cert = certificate_for(grid.model(), kappa);
    if cert.admissible {
        Ok(cert)
    } else {
        Err(Error::Inadmissible {
            delta0: cert.delta0.to_f64_lossy(),
        })
    }
}

fn sup_weighted<T: Real>(grid: &WittenGrid<T>, field: &GridVectorField<T>, w: &WeightSpec<T>) -> T {
    let mut v = vec![T::zero(); grid.spec().dim()];
    grid.core_nodes()
        .into_iter()
        .map(|p| {
            field.at(p, &mut v);
            w.weighted_norm(&v)
        })
        .fold(T::zero(), T::max)
}

/// Evaluates the weighted gradient bound from precomputed gradients of `f` and `g`.
///
/// Lets one zero-mean solve serve a whole sweep of `kappa`.
pub fn weighted_gradient_report<T: Real>(
    grid: &WittenGrid<T>,
    grad_f: &GridVectorField<T>,
    grad_g: &GridVectorField<T>,
    s_g: &SiteSet,
    kappa: T,
) -> Result<WeightedGradientReport<T>> {
    let cert = admissible_certificate(grid, kappa)?;
    let w = WeightSpec::new(grid.model().lattice(), kappa, s_g.clone())?;
    let sup = sup_weighted(grid, grad_f, &w);
    let rhs = sup_weighted(grid, grad_g, &w) / cert.delta0;
    Ok(WeightedGradientReport {
        kappa,
        delta0: cert.delta0,
        sup_weighted_norm: sup,
        rhs_bound: rhs,
        pass: sup <= rhs * (T::one() + T::lit(WEIGHTED_BOUND_RTOL)),
    })
}

/// Solves `A0 f = g - <g>` and compares the weighted sup of `grad f` with its bound.
///
/// Refuses inadmissible `kappa` before solving.
pub fn weighted_gradient_bound<T: Real>(
    grid: &WittenGrid<T>,
    g: &GridFunction<T>,
    s_g: &SiteSet,
    kappa: T,
    opts: &SolverOptions<T>,
) -> Result<WeightedGradientReport<T>> {
    admissible_certificate(grid, kappa)?;
    let f = grid.solve_zero_mean(g, opts)?.field;
    weighted_gradient_report(grid, &f.gradient(), &g.gradient(), s_g, kappa)
}

/// Where `cov(g, h)` comes from.
#[derive(Debug, Clone, Copy)]
pub enum CovarianceRoute<'a, T> {
    Grid(&'a WittenGrid<T>),
    Chain(&'a Chain<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheck {
    pub kappa: f64,
    pub delta0: f64,
    pub distance: usize,
    pub cov: f64,
    /// Zero on the grid route.
    pub cov_stderr: f64,
    /// `|cov|`, reduced by `3 stderr` on the chain route and floored at zero.
    pub lhs: f64,
    pub c_ref: f64,
    /// `c_ref e^{-kappa d(S_g, S_h)}`.
    pub rhs: f64,
    pub pass: bool,
}

/// Checks `|cov(g, h)| <= c_ref e^{-kappa d(S_g, S_h)}`.
///
/// Without an explicit `c_ref` the constant is
/// `(1/delta0) (sup sum_{S_g} g_{x_i}^2)^{1/2} <sum_{S_h} h_{x_i}^2>^{1/2}`,
/// with the sup and mean taken over the grid or over the chain samples.
/// Supports must be disjoint or identical (the variance case).
pub fn covariance_decay_check<T: Real>(
    model: &Hamiltonian<T>,
    route: CovarianceRoute<'_, T>,
    g: &Observable,
    h: &Observable,
    kappa: T,
    c_ref: Option<f64>,
) -> Result<DecayCheck> {
    let (s_g, s_h) = (g.support(), h.support());
    if s_g.is_empty() || s_h.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    if !s_g.is_disjoint(&s_h) && s_g != s_h {
        return Err(Error::OverlappingSupports);
    }
    g.check(model.lattice())?;
    h.check(model.lattice())?;
    let cert = certificate_for(model, kappa);
    if !cert.admissible {
        return Err(Error::Inadmissible {
            delta0: cert.delta0.to_f64_lossy(),
        });
    }
    let dim = model.dim();
    let distance = model.lattice().set_distance(&s_g, &s_h)?;
    let grad_sq = |obs: &Observable, support: &SiteSet, x: &[T]| -> f64 {
        let mut buf = vec![T::zero(); dim];
        obs.gradient_into(x, &mut buf);
        support.iter().map(|i| buf[i].to_f64_lossy().powi(2)).sum()
    };
    let (cov, stderr, lhs, sup_g, mean_h) = match route {
        CovarianceRoute::Grid(grid) => {
            if grid.model() != model {
                return Err(Error::InvalidParameter("grid was built for a different model".into()));
            }
            let spec = *grid.spec();
            let gf = GridFunction::from_fn(spec, |x| g.value(x));
            let hf = GridFunction::from_fn(spec, |x| h.value(x));
            let cov = grid.covariance_direct(&gf, &hf)?.to_f64_lossy();
            let mut sup_g = 0.0f64;
            let mut mean_h = 0.0f64;
            for (p, &w) in grid.quadrature().weights.iter().enumerate() {
                let x = spec.coords(p);
                sup_g = sup_g.max(grad_sq(g, &s_g, &x));
                mean_h += w.to_f64_lossy() * grad_sq(h, &s_h, &x);
            }
            (cov, 0.0, cov.abs(), sup_g, mean_h)
        }
        CovarianceRoute::Chain(chain) => {
            if chain.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: chain.dim(),
                });
            }
            let e = estimate_cross(chain, |x| g.value(x).to_f64_lossy(), |x| h.value(x).to_f64_lossy())?;
            let sup_g = chain.samples().map(|x| grad_sq(g, &s_g, x)).fold(0.0, f64::max);
            let mean_h = estimate_mean(chain, |x| grad_sq(h, &s_h, x))?.estimate;
            let lhs = (e.estimate.abs() - NOISE_SIGMAS * e.stderr).max(0.0);
            (e.estimate, e.stderr, lhs, sup_g, mean_h)
        }
    };
    let delta0 = cert.delta0.to_f64_lossy();
    let kappa = kappa.to_f64_lossy();
    let c_ref = c_ref.unwrap_or_else(|| sup_g.sqrt() * mean_h.sqrt() / delta0);
    let rhs = c_ref * (-kappa * distance as f64).exp();
    Ok(DecayCheck {
        kappa,
        delta0,
        distance,
        cov,
        cov_stderr: stderr,
        lhs,
        c_ref,
        rhs,
        pass: lhs <= rhs * (1.0 + DECAY_CHECK_RTOL),
    })
}
