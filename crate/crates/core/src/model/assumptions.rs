use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::symmetric_eigenvalues;
use crate::model::Hamiltonian;
use crate::scalar::{norm2, Real};

/// Growth factor tolerated between inner and outer sampling shells before a
/// derivative is declared unbounded.
const SHELL_GROWTH: f64 = 2.0;

/// `|grad Phi|` along random rays, one row per ray, one column per radius.
///
/// Passes when the outermost radius gives the largest norm on every ray.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthWitness<T> {
    pub norms: Vec<Vec<T>>,
    pub pass: bool,
}

/// Per-radius maxima of a sampled derivative quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellWitness<T> {
    /// Derivative order `|alpha|`.
    pub order: usize,
    pub shell_max: Vec<T>,
    /// Largest sampled value over all shells (the `C_alpha` estimate for ratio witnesses).
    pub constant: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityWitness<T> {
    /// Smallest sampled Hessian eigenvalue (the `delta` witness).
    pub min_eigenvalue: T,
    pub argmin: Vec<T>,
    pub pass: bool,
}

/// Sampled evidence for the standing hypotheses on `Phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport<T> {
    pub seed: u64,
    pub n_samples: usize,
    pub radii: Vec<T>,
    /// `|grad Phi| -> infinity`.
    pub gradient_growth: GrowthWitness<T>,
    /// Second derivatives of `Phi` stay bounded.
    pub bounded_derivative: ShellWitness<T>,
    /// `|d^alpha Phi| / (1 + |grad Phi|^2)^{1/2}` for `|alpha| = 1, 2, 3`.
    pub derivative_ratios: Vec<ShellWitness<T>>,
    /// `Hess Phi >= delta > 0`.
    pub convexity: ConvexityWitness<T>,
}

impl<T: Real> AssumptionReport<T> {
    pub fn all_pass(&self) -> bool {
        self.gradient_growth.pass
            && self.bounded_derivative.pass
            && self.derivative_ratios.iter().all(|w| w.pass)
            && self.convexity.pass
    }
}

fn shell_pass<T: Real>(shell_max: &[T]) -> bool {
    let split = shell_max.len().div_ceil(2);
    let inner = shell_max[..split].iter().copied().fold(T::zero(), T::max);
    let outer = shell_max[split..].iter().copied().fold(T::zero(), T::max);
    outer <= T::lit(SHELL_GROWTH) * inner + T::lit(1e-12)
}

fn third_derivative_max<T: Real>(h: &Hamiltonian<T>, x: &[T]) -> T {
    let m = x.len();
    let scale = x.iter().fold(T::one(), |s, v| s.max(v.abs()));
    let step = T::epsilon().cbrt() * scale;
    let mut best = T::zero();
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for k in 0..m {
        xp[k] = x[k] + step;
        xm[k] = x[k] - step;
        let hp = h.hessian_unchecked(&xp).to_dense();
        let hm = h.hessian_unchecked(&xm).to_dense();
        xp[k] = x[k];
        xm[k] = x[k];
        for (a, b) in hp.iter().zip(&hm) {
            best = best.max(((*a - *b) / (step + step)).abs());
        }
    }
    best
}

/// Checks the four hypotheses on random shells `|x| = r` for `r` in `radii`.
///
/// Convexity is also evaluated at the origin. The report is a function of
/// `(h, seed, n_samples, radii)`.
pub fn check_assumptions<T: Real>(
    h: &Hamiltonian<T>,
    seed: u64,
    n_samples: usize,
    radii: &[T],
) -> AssumptionReport<T> {
    assert!(n_samples >= 1, "need at least one sample direction");
    assert!(!radii.is_empty(), "need at least one radius");
    let m = h.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directions: Vec<Vec<T>> = (0..n_samples)
        .map(|_| {
            let v: Vec<T> = (0..m)
                .map(|_| T::lit(StandardNormal.sample(&mut rng)))
                .collect();
            let n = norm2(&v);
            v.into_iter().map(|c| c / n).collect()
        })
        .collect();

    let nr = radii.len();
    let mut norms = vec![vec![T::zero(); nr]; n_samples];
    let mut hess_max = vec![T::zero(); nr];
    let mut ratio_max = vec![vec![T::zero(); nr]; 3];
    let mut min_eig = T::infinity();
    let mut argmin = vec![T::zero(); m];
    let mut grad = vec![T::zero(); m];

    let mut visit = |x: &[T], shell: Option<(usize, usize)>| {
        h.gradient_into(x, &mut grad);
        let gnorm = norm2(&grad);
        let hs = h.hessian_unchecked(x);
        let dense = hs.to_dense();
        let ev = symmetric_eigenvalues(&dense, m).map_or(T::neg_infinity(), |e| e[0]);
        if ev < min_eig {
            min_eig = ev;
            argmin = x.to_vec();
        }
        if let Some((ray, r)) = shell {
            norms[ray][r] = gnorm;
            let hmax = dense.iter().fold(T::zero(), |s, v| s.max(v.abs()));
            hess_max[r] = hess_max[r].max(hmax);
            let denom = (T::one() + gnorm * gnorm).sqrt();
            let g1 = grad.iter().fold(T::zero(), |s, v| s.max(v.abs()));
            let g3 = third_derivative_max(h, x);
            for (k, v) in [g1, hmax, g3].into_iter().enumerate() {
                ratio_max[k][r] = ratio_max[k][r].max(v / denom);
            }
        }
    };

    visit(&vec![T::zero(); m], None);
    for (ray, u) in directions.iter().enumerate() {
        for (r, &radius) in radii.iter().enumerate() {
            let x: Vec<T> = u.iter().map(|&c| c * radius).collect();
            visit(&x, Some((ray, r)));
        }
    }

    // the outermost shell must dominate every inner shell on every ray
    let growth_pass = norms.iter().all(|row| {
        let (last, inner) = row.split_last().expect("radii nonempty");
        inner.iter().all(|v| v < last)
    });
    let bounded_derivative = ShellWitness {
        order: 2,
        constant: hess_max.iter().copied().fold(T::zero(), T::max),
        pass: shell_pass(&hess_max),
        shell_max: hess_max,
    };
    let derivative_ratios = ratio_max
        .into_iter()
        .enumerate()
        .map(|(k, shell_max)| ShellWitness {
            order: k + 1,
            constant: shell_max.iter().copied().fold(T::zero(), T::max),
            pass: shell_pass(&shell_max),
            shell_max,
        })
        .collect();

    AssumptionReport {
        seed,
        n_samples,
        radii: radii.to_vec(),
        gradient_growth: GrowthWitness {
            norms,
            pass: growth_pass,
        },
        bounded_derivative,
        derivative_ratios,
        convexity: ConvexityWitness {
            pass: min_eig > T::zero(),
            min_eigenvalue: min_eig,
            argmin,
        },
    }
}
