//! Metropolis chains on the Gibbs measure and estimators with batch-means error bars.

mod estimate;

pub use estimate::{
    correlation_matrix, estimate_covariance, estimate_cross, estimate_mean, CorrelationEstimate,
    CorrelationMatrix, MeanEstimate, MIN_SAMPLES,
};

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::Hamiltonian;
use crate::scalar::Real;

/// How a chain step perturbs the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Proposal {
    /// Gaussian random walk on all coordinates at once.
    #[default]
    FullVector,
    /// One random-walk update per site in lattice order; a step is one sweep.
    SingleSite,
    /// Independent `N(0, s^2)` draw per site in lattice order, accepted with
    /// the Metropolis-Hastings ratio; a step is one sweep. Close to a heat-bath
    /// sweep when the interaction is weak.
    SingleSiteIndependent,
    /// Metropolis-adjusted Langevin proposal `x - s^2/2 grad Phi + s xi`.
    Langevin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig<T> {
    pub n_steps: usize,
    pub burn_in: usize,
    pub proposal_scale: T,
    pub seed: u64,
    pub thin: usize,
    pub proposal: Proposal,
}

impl<T: Real> ChainConfig<T> {
    /// Full-vector proposal with scale `2.4/sqrt(m)` and 10% burn-in.
    pub fn new(dim: usize, n_steps: usize, seed: u64) -> Self {
        ChainConfig {
            n_steps,
            burn_in: n_steps / 10,
            proposal_scale: T::lit(2.4) / T::from_count(dim.max(1)).sqrt(),
            seed,
            thin: 1,
            proposal: Proposal::FullVector,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.n_steps {
            return Err(Error::InvalidParameter(format!(
                "burn_in {} must be below n_steps {}",
                self.burn_in, self.n_steps
            )));
        }
        if !(self.proposal_scale > T::zero()) || !self.proposal_scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "proposal_scale must be positive, got {}",
                self.proposal_scale
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be at least 1".into()));
        }
        Ok(())
    }
}

/// Post burn-in, thinned samples of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain<T> {
    pub config: ChainConfig<T>,
    dim: usize,
    samples: Vec<T>,
    pub accepted: u64,
    pub proposed: u64,
}

impl<T: Real> Chain<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn sample(&self, k: usize) -> &[T] {
        &self.samples[k * self.dim..(k + 1) * self.dim]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.samples.chunks_exact(self.dim)
    }

    /// The trace of one coordinate as `f64`.
    pub fn coordinate(&self, site: usize) -> Vec<f64> {
        self.samples().map(|x| x[site].to_f64_lossy()).collect()
    }

    /// One row per retained sample, one column per coordinate.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (0..self.dim).map(|i| format!("x_{i}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for x in self.samples() {
            let row: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn normal<T: Real>(rng: &mut ChaCha8Rng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// `u < e^{-delta}` for `u` uniform on `[0, 1)`; `delta <= 0` always accepts.
fn accept<T: Real>(rng: &mut ChaCha8Rng, log_ratio: T) -> bool {
    let u: f64 = rng.random();
    u < (log_ratio.to_f64_lossy()).exp()
}

fn non_finite<T: Real>(step: usize, x: &[T]) -> Error {
    Error::NonFiniteEnergy {
        step,
        state: x.iter().map(|v| v.to_f64_lossy()).collect(),
    }
}

/// Runs a Metropolis chain from `x = 0`.
pub fn run_chain<T: Real>(h: &Hamiltonian<T>, cfg: &ChainConfig<T>) -> Result<Chain<T>> {
    cfg.validate()?;
    let m = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut x = vec![T::zero(); m];
    let mut y = vec![T::zero(); m];
    let mut phi = h.value(&x)?;
    let s = cfg.proposal_scale;
    let half_s2 = s * s * T::lit(0.5);
    let mut grad_x = if cfg.proposal == Proposal::Langevin {
        h.gradient(&x)?
    } else {
        Vec::new()
    };
    let kept = (cfg.n_steps - cfg.burn_in).div_ceil(cfg.thin);
    let mut samples = Vec::with_capacity(kept * m);
    let (mut accepted, mut proposed) = (0u64, 0u64);
    for step in 0..cfg.n_steps {
        match cfg.proposal {
            Proposal::FullVector => {
                for (yi, &xi) in y.iter_mut().zip(&x) {
                    *yi = xi + s * normal(&mut rng);
                }
                let phi_y = h.value(&y)?;
                if !phi_y.is_finite() {
                    return Err(non_finite(step, &y));
                }
                proposed += 1;
                if accept(&mut rng, phi - phi_y) {
                    std::mem::swap(&mut x, &mut y);
                    phi = phi_y;
                    accepted += 1;
                }
            }
            Proposal::SingleSite => {
                for site in 0..m {
                    let new = x[site] + s * normal(&mut rng);
                    let delta = h.delta_single_site(&x, site, new);
                    if !delta.is_finite() {
                        x[site] = new;
                        return Err(non_finite(step, &x));
                    }
                    proposed += 1;
                    if accept(&mut rng, -delta) {
                        x[site] = new;
                        phi += delta;
                        accepted += 1;
                    }
                }
            }
            Proposal::SingleSiteIndependent => {
                let inv = T::one() / (s * s * T::lit(2.0));
                for site in 0..m {
                    let new = s * normal(&mut rng);
                    let delta = h.delta_single_site(&x, site, new);
                    if !delta.is_finite() {
                        x[site] = new;
                        return Err(non_finite(step, &x));
                    }
                    proposed += 1;
                    let old = x[site];
                    // q(x) / q(x') for q = N(0, s^2)
                    let log_q = (new * new - old * old) * inv;
                    if accept(&mut rng, log_q - delta) {
                        x[site] = new;
                        phi += delta;
                        accepted += 1;
                    }
                }
            }
            Proposal::Langevin => {
                for k in 0..m {
                    y[k] = x[k] - half_s2 * grad_x[k] + s * normal(&mut rng);
                }
                let phi_y = h.value(&y)?;
                let grad_y = h.gradient(&y)?;
                if !phi_y.is_finite() || grad_y.iter().any(|g| !g.is_finite()) {
                    return Err(non_finite(step, &y));
                }
                // log q(x | y) - log q(y | x)
                let inv = T::one() / (T::lit(4.0) * half_s2);
                let mut back = T::zero();
                let mut fwd = T::zero();
                for k in 0..m {
                    let b = x[k] - y[k] + half_s2 * grad_y[k];
                    let f = y[k] - x[k] + half_s2 * grad_x[k];
                    back += b * b;
                    fwd += f * f;
                }
                proposed += 1;
                if accept(&mut rng, phi - phi_y - (back - fwd) * inv) {
                    std::mem::swap(&mut x, &mut y);
                    phi = phi_y;
                    grad_x = grad_y;
                    accepted += 1;
                }
            }
        }
        if step >= cfg.burn_in && (step - cfg.burn_in).is_multiple_of(cfg.thin) {
            samples.extend_from_slice(&x);
        }
    }
    Ok(Chain {
        config: *cfg,
        dim: m,
        samples,
        accepted,
        proposed,
    })
}
