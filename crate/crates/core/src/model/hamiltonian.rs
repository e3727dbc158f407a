use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::scalar::{ln_cosh, sech2, Real};

/// The interaction part `Psi` of `Phi = x^2/2 + Psi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind<T> {
    /// `Psi = 0`.
    Quadratic,
    /// `Psi = -2 sum_{i~j} ln cosh(sqrt(nu/2) (x_i + x_j))`, one term per edge.
    Kac { nu: T },
    /// `Psi = amplitude * exp(-|x|^2 / (2 width^2))`, a smooth concentrated bump.
    GaussianBump { amplitude: T, width: T },
}

/// A Hamiltonian on the configuration space of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian<T> {
    lattice: Lattice,
    kind: ModelKind<T>,
}

/// Symmetric Hessian stored as a diagonal plus upper off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Hessian<T> {
    pub diag: Vec<T>,
    /// `(i, j, value)` with `i < j`.
    pub off: Vec<(usize, usize, T)>,
}

impl<T: Real> Hessian<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            return self.diag[i];
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.off
            .iter()
            .find(|&&(p, q, _)| p == a && q == b)
            .map_or(T::zero(), |&(_, _, v)| v)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dim();
        let mut d = vec![T::zero(); n * n];
        for (i, &v) in self.diag.iter().enumerate() {
            d[i * n + i] = v;
        }
        for &(i, j, v) in &self.off {
            d[i * n + j] += v;
            d[j * n + i] += v;
        }
        d
    }

    pub fn trace(&self) -> T {
        self.diag.iter().copied().sum()
    }
}

impl<T: Real> Hamiltonian<T> {
    pub fn new(lattice: Lattice, kind: ModelKind<T>) -> Result<Self> {
        match kind {
            ModelKind::Kac { nu } if !(nu > T::zero()) => {
                return Err(Error::InvalidParameter(format!("Kac coupling must be positive, got {nu}")))
            }
            ModelKind::GaussianBump { amplitude, width } if !(width > T::zero()) || !amplitude.is_finite() => {
                return Err(Error::InvalidParameter(format!(
                    "bump needs finite amplitude and positive width, got ({amplitude}, {width})"
                )))
            }
            _ => {}
        }
        Ok(Hamiltonian { lattice, kind })
    }

    pub fn quadratic(lattice: Lattice) -> Self {
        Hamiltonian {
            lattice,
            kind: ModelKind::Quadratic,
        }
    }

    pub fn kac(lattice: Lattice, nu: T) -> Result<Self> {
        Self::new(lattice, ModelKind::Kac { nu })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn kind(&self) -> ModelKind<T> {
        self.kind
    }

    /// Number of coordinates `|Lambda|`.
    pub fn dim(&self) -> usize {
        self.lattice.len()
    }

    fn check(&self, x: &[T]) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            })
        }
    }

    fn kac_scale(nu: T) -> T {
        (nu * T::lit(0.5)).sqrt()
    }

    pub fn value(&self, x: &[T]) -> Result<T> {
        self.check(x)?;
        Ok(self.value_unchecked(x))
    }

    pub(crate) fn value_unchecked(&self, x: &[T]) -> T {
        let half = T::lit(0.5);
        let quad: T = x.iter().map(|&v| v * v).sum::<T>() * half;
        quad + self.psi_unchecked(x)
    }

    fn psi_unchecked(&self, x: &[T]) -> T {
        match self.kind {
            ModelKind::Quadratic => T::zero(),
            ModelKind::Kac { nu } => {
                let a = Self::kac_scale(nu);
                let s: T = self.lattice.edges().map(|(i, j)| ln_cosh(a * (x[i] + x[j]))).sum();
                -(s + s)
            }
            ModelKind::GaussianBump { amplitude, width } => {
                let r2: T = x.iter().map(|&v| v * v).sum();
                amplitude * (-r2 / (T::lit(2.0) * width * width)).exp()
            }
        }
    }

    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        self.check(x)?;
        let mut g = vec![T::zero(); x.len()];
        self.gradient_into(x, &mut g);
        Ok(g)
    }

    pub(crate) fn gradient_into(&self, x: &[T], g: &mut [T]) {
        g.copy_from_slice(x);
        match self.kind {
            ModelKind::Quadratic => {}
            ModelKind::Kac { nu } => {
                let a = Self::kac_scale(nu);
                let two_a = a + a;
                for (i, j) in self.lattice.edges() {
                    let t = two_a * (a * (x[i] + x[j])).tanh();
                    g[i] -= t;
                    g[j] -= t;
                }
            }
            ModelKind::GaussianBump { amplitude, width } => {
                let w2 = width * width;
                let r2: T = x.iter().map(|&v| v * v).sum();
                let c = amplitude / w2 * (-r2 / (T::lit(2.0) * w2)).exp();
                for (gi, &xi) in g.iter_mut().zip(x) {
                    *gi -= c * xi;
                }
            }
        }
    }

    pub fn hessian(&self, x: &[T]) -> Result<Hessian<T>> {
        self.check(x)?;
        Ok(self.hessian_unchecked(x))
    }

    pub(crate) fn hessian_unchecked(&self, x: &[T]) -> Hessian<T> {
        let m = x.len();
        let mut diag = vec![T::one(); m];
        let mut off = Vec::new();
        match self.kind {
            ModelKind::Quadratic => {}
            ModelKind::Kac { nu } => {
                let a = Self::kac_scale(nu);
                for (i, j) in self.lattice.edges() {
                    let v = nu * sech2(a * (x[i] + x[j]));
                    diag[i] -= v;
                    diag[j] -= v;
                    off.push((i, j, -v));
                }
            }
            ModelKind::GaussianBump { amplitude, width } => {
                let w2 = width * width;
                let r2: T = x.iter().map(|&v| v * v).sum();
                let c = amplitude / w2 * (-r2 / (T::lit(2.0) * w2)).exp();
                for i in 0..m {
                    diag[i] += c * (x[i] * x[i] / w2 - T::one());
                    for j in i + 1..m {
                        off.push((i, j, c * x[i] * x[j] / w2));
                    }
                }
            }
        }
        Hessian { diag, off }
    }

    /// `Delta Phi(x)`, the trace of the Hessian.
    pub fn laplacian(&self, x: &[T]) -> Result<T> {
        Ok(self.hessian(x)?.trace())
    }

    /// `Phi(x') - Phi(x)` where `x'` differs from `x` only in coordinate `site`.
    pub fn delta_single_site(&self, x: &[T], site: usize, new_value: T) -> T {
        let old = x[site];
        let half = T::lit(0.5);
        let dq = (new_value * new_value - old * old) * half;
        match self.kind {
            ModelKind::Quadratic => dq,
            ModelKind::Kac { nu } => {
                let a = Self::kac_scale(nu);
                let mut d = T::zero();
                for &j in self.lattice.neighbors(site) {
                    d += ln_cosh(a * (new_value + x[j])) - ln_cosh(a * (old + x[j]));
                }
                dq - (d + d)
            }
            ModelKind::GaussianBump { .. } => {
                let mut y = x.to_vec();
                y[site] = new_value;
                self.value_unchecked(&y) - self.value_unchecked(x)
            }
        }
    }

    /// `grad Psi = grad Phi - x`.
    pub fn psi_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        let mut g = self.gradient(x)?;
        for (gi, &xi) in g.iter_mut().zip(x) {
            *gi -= xi;
        }
        Ok(g)
    }
}
