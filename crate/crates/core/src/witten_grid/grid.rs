use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest lattice the grid route accepts.
pub const MAX_GRID_DIM: usize = 4;
pub const DEFAULT_NODE_BUDGET: usize = 2_000_000;

/// Uniform tensor grid on `[-L, L]^m` with `n` (odd) points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    half_width: T,
    points_per_axis: usize,
    dim: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(half_width: T, points_per_axis: usize, dim: usize) -> Result<Self> {
        Self::with_budget(half_width, points_per_axis, dim, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(half_width: T, points_per_axis: usize, dim: usize, budget: usize) -> Result<Self> {
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!("half width must be positive, got {half_width}")));
        }
        if points_per_axis < 3 || points_per_axis % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "points per axis must be odd and >= 3, got {points_per_axis}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("grid dimension must be positive".into()));
        }
        if dim > MAX_GRID_DIM {
            return Err(Error::GridDimensionTooLarge { max: MAX_GRID_DIM, got: dim });
        }
        let nodes = (points_per_axis as u128).pow(dim as u32);
        if nodes > budget as u128 {
            return Err(Error::BudgetExceeded { nodes, budget: budget as u128 });
        }
        Ok(GridSpec {
            half_width,
            points_per_axis,
            dim,
        })
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> T {
        (self.half_width + self.half_width) / T::from_count(self.points_per_axis - 1)
    }

    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Row-major stride of `axis` (axis 0 varies slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.points_per_axis.pow((self.dim - 1 - axis) as u32)
    }

    pub fn axis_index(&self, node: usize, axis: usize) -> usize {
        (node / self.stride(axis)) % self.points_per_axis
    }

    pub fn axis_coord(&self, index: usize) -> T {
        -self.half_width + T::from_count(index) * self.spacing()
    }

    pub fn coords_into(&self, node: usize, out: &mut [T]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.axis_coord(self.axis_index(node, k));
        }
    }

    pub fn coords(&self, node: usize) -> Vec<T> {
        let mut x = vec![T::zero(); self.dim];
        self.coords_into(node, &mut x);
        x
    }

    /// Neighbour one step along `axis`, `None` outside the box.
    pub fn neighbor(&self, node: usize, axis: usize, forward: bool) -> Option<usize> {
        let i = self.axis_index(node, axis);
        let s = self.stride(axis);
        if forward {
            (i + 1 < self.points_per_axis).then(|| node + s)
        } else {
            (i > 0).then(|| node - s)
        }
    }

    /// True when no axis index sits on the box face.
    pub fn is_interior(&self, node: usize) -> bool {
        (0..self.dim).all(|k| {
            let i = self.axis_index(node, k);
            i > 0 && i + 1 < self.points_per_axis
        })
    }

    /// Index of the origin node.
    pub fn origin(&self) -> usize {
        let c = self.points_per_axis / 2;
        (0..self.dim).map(|k| c * self.stride(k)).sum()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<T>> + '_ {
        (0..self.node_count()).map(move |p| self.coords(p))
    }
}

/// Real values on every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    spec: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(spec: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != spec.node_count() {
            return Err(Error::DimensionMismatch {
                expected: spec.node_count(),
                got: values.len(),
            });
        }
        Ok(GridFunction { spec, values })
    }

    pub fn from_fn(spec: GridSpec<T>, f: impl Fn(&[T]) -> T) -> Self {
        let mut x = vec![T::zero(); spec.dim()];
        let values = (0..spec.node_count())
            .map(|p| {
                spec.coords_into(p, &mut x);
                f(&x)
            })
            .collect();
        GridFunction { spec, values }
    }

    pub fn constant(spec: GridSpec<T>, c: T) -> Self {
        GridFunction {
            spec,
            values: vec![c; spec.node_count()],
        }
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Centered differences inside, second-order one-sided differences on the faces.
    pub fn gradient(&self) -> GridVectorField<T> {
        let spec = self.spec;
        let n = spec.node_count();
        let h2 = spec.spacing() + spec.spacing();
        let (three, four) = (T::lit(3.0), T::lit(4.0));
        let mut data = vec![T::zero(); spec.dim() * n];
        let f = &self.values;
        for k in 0..spec.dim() {
            let s = spec.stride(k);
            let last = spec.points_per_axis() - 1;
            for p in 0..n {
                let i = spec.axis_index(p, k);
                data[k * n + p] = if i == 0 {
                    (-three * f[p] + four * f[p + s] - f[p + 2 * s]) / h2
                } else if i == last {
                    (three * f[p] - four * f[p - s] + f[p - 2 * s]) / h2
                } else {
                    (f[p + s] - f[p - s]) / h2
                };
            }
        }
        GridVectorField { spec, data }
    }

    /// CSV with a header, one row per node: coordinates then value, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let m = self.spec.dim();
        let header: Vec<String> = (0..m).map(|k| format!("x_{k}")).chain(["value".into()]).collect();
        writeln!(out, "{}", header.join(","))?;
        let mut x = vec![T::zero(); m];
        for (p, v) in self.values.iter().enumerate() {
            self.spec.coords_into(p, &mut x);
            for c in &x {
                write!(out, "{c:.16e},")?;
            }
            writeln!(out, "{v:.16e}")?;
        }
        Ok(())
    }
}

/// One grid function per lattice coordinate, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVectorField<T> {
    spec: GridSpec<T>,
    data: Vec<T>,
}

impl<T: Real> GridVectorField<T> {
    pub fn new(spec: GridSpec<T>, data: Vec<T>) -> Result<Self> {
        let expected = spec.dim() * spec.node_count();
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: data.len() });
        }
        Ok(GridVectorField { spec, data })
    }

    pub fn from_components(components: &[GridFunction<T>]) -> Result<Self> {
        let spec = *components
            .first()
            .ok_or_else(|| Error::InvalidParameter("vector field needs components".into()))?
            .spec();
        if components.len() != spec.dim() || components.iter().any(|c| *c.spec() != spec) {
            return Err(Error::InvalidParameter(
                "components must share one grid and match its dimension".into(),
            ));
        }
        let data = components.iter().flat_map(|c| c.values().iter().copied()).collect();
        Ok(GridVectorField { spec, data })
    }

    /// Constant field `e_i`.
    pub fn unit(spec: GridSpec<T>, i: usize) -> Self {
        let n = spec.node_count();
        let mut data = vec![T::zero(); spec.dim() * n];
        data[i * n..(i + 1) * n].iter_mut().for_each(|v| *v = T::one());
        GridVectorField { spec, data }
    }

    pub fn spec(&self) -> &GridSpec<T> {
        &self.spec
    }

    pub fn component(&self, i: usize) -> &[T] {
        let n = self.spec.node_count();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn at(&self, node: usize, out: &mut [T]) {
        let n = self.spec.node_count();
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.data[k * n + node];
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
