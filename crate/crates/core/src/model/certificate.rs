use crate::error::Result;
use crate::linalg::symmetric_eigenvalues;
use crate::model::{Hamiltonian, ModelKind, WeightSpec};
use crate::scalar::Real;

/// Closed-form bounds on the Kac interaction derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBounds<T> {
    /// `|Psi_{x_i}| <= 4 d sqrt(nu/2)`.
    pub grad_bound: T,
    /// `|Psi_{x_i x_i}| <= 2 d nu`.
    pub diag_bound: T,
    /// `|Psi_{x_i x_k}| <= nu` for `k ~ i`.
    pub offdiag_bound: T,
}

pub fn derivative_bounds<T: Real>(nu: T, dim: usize) -> DerivativeBounds<T> {
    let d = T::from_count(dim);
    DerivativeBounds {
        grad_bound: T::lit(4.0) * d * (nu * T::lit(0.5)).sqrt(),
        diag_bound: T::lit(2.0) * d * nu,
        offdiag_bound: nu,
    }
}

/// Schur row/column-sum certificate for `M^{-1} Hess Phi M >= delta0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCertificate<T> {
    /// Coupling strength entering the bound (Kac `nu`; `|a|/w^2` for the bump; 0 if quadratic).
    pub nu: T,
    pub dim: usize,
    pub kappa: T,
    pub row_bound: T,
    pub col_bound: T,
    pub delta0: T,
    pub admissible: bool,
}

fn admissible<T: Real>(delta0: T) -> bool {
    delta0 > T::zero() && delta0 <= T::one()
}

/// Kac certificate: `R = C = 2 d nu (1 + e^kappa)` and `delta0 = 1 - 2 d nu (2 + e^kappa)`.
///
/// The weighted quadratic form is bounded below by the diagonal lower bound
/// `1 - 2 d nu` minus `sqrt(R C)`, which gives `delta0` above.
pub fn schur_certificate<T: Real>(nu: T, dim: usize, kappa: T) -> ConvexityCertificate<T> {
    let two_d_nu = T::lit(2.0) * T::from_count(dim) * nu;
    let ek = kappa.exp();
    let r = two_d_nu * (T::one() + ek);
    let delta0 = T::one() - two_d_nu * (T::lit(2.0) + ek);
    ConvexityCertificate {
        nu,
        dim,
        kappa,
        row_bound: r,
        col_bound: r,
        delta0,
        admissible: admissible(delta0),
    }
}

/// Certificate for any supported Hamiltonian at weight rate `kappa`.
///
/// For the Gaussian bump every entry of `M^{-1} Hess Psi M` is bounded by
/// `(|a|/w^2) e^{-s} (|x_i||x_j| e^{kappa D} / w^2 + delta_ij)` with
/// `s = |x|^2/(2w^2)` and `D` the lattice diameter; row sums are then at most
/// `(|a|/w^2)(1 + 2 sqrt(m) e^{kappa D - 1})`.
pub fn certificate_for<T: Real>(h: &Hamiltonian<T>, kappa: T) -> ConvexityCertificate<T> {
    let dim = h.lattice().dim();
    match h.kind() {
        ModelKind::Kac { nu } => schur_certificate(nu, dim, kappa),
        ModelKind::Quadratic => ConvexityCertificate {
            nu: T::zero(),
            dim,
            kappa,
            row_bound: T::zero(),
            col_bound: T::zero(),
            delta0: T::one(),
            admissible: true,
        },
        ModelKind::GaussianBump { amplitude, width } => {
            let lat = h.lattice();
            let diameter = lat
                .extents()
                .iter()
                .map(|&e| e - 1)
                .sum::<usize>();
            let c = amplitude.abs() / (width * width);
            let m = T::from_count(lat.len());
            let r = c * (T::one() + T::lit(2.0) * m.sqrt() * (kappa * T::from_count(diameter) - T::one()).exp());
            let delta0 = T::one() - r;
            ConvexityCertificate {
                nu: c,
                dim,
                kappa,
                row_bound: r,
                col_bound: r,
                delta0,
                admissible: admissible(delta0),
            }
        }
    }
}

/// Largest `kappa` whose Kac certificate still has `delta0 >= delta_floor`.
///
/// `None` when no positive `kappa` qualifies.
pub fn max_admissible_kappa<T: Real>(nu: T, dim: usize, delta_floor: T) -> Option<T> {
    if nu == T::zero() {
        return Some(T::infinity());
    }
    let two_d_nu = T::lit(2.0) * T::from_count(dim) * nu;
    let arg = (T::one() - delta_floor) / two_d_nu - T::lit(2.0);
    if arg > T::one() {
        Some(arg.ln())
    } else {
        None
    }
}

/// Minimum over `points` of the smallest eigenvalue of the symmetric part of `M^{-1} Hess Phi(x) M`.
pub fn min_weighted_hessian_eig<T: Real>(
    h: &Hamiltonian<T>,
    w: &WeightSpec<T>,
    points: &[Vec<T>],
) -> Result<T> {
    let m = h.dim();
    let rho = w.rho();
    let half = T::lit(0.5);
    let mut best = T::infinity();
    for x in points {
        let mut a = h.hessian(x)?.to_dense();
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = a[i * m + j] * half * (rho[j] / rho[i] + rho[i] / rho[j]);
            }
        }
        let ev = symmetric_eigenvalues(&a, m)?;
        best = best.min(ev[0]);
    }
    Ok(best)
}
