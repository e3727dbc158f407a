use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::scalar::Real;

use super::WittenGrid;

impl<T: Real> WittenGrid<T> {
    /// `A0 = -Delta + grad Phi . grad`: centered second differences for `-Delta`,
    /// centered first differences with `grad Phi` taken at the node, zero
    /// Dirichlet values outside the box.
    pub fn assemble_a0(&self) -> CsrMatrix<T> {
        let spec = &self.spec;
        let (n, m) = (spec.node_count(), spec.dim());
        let h = spec.spacing();
        let inv_h2 = T::one() / (h * h);
        let inv_2h = T::one() / (h + h);
        let mut b = TripletBuilder::with_capacity(n, n, n * (2 * m + 1));
        let two = T::lit(2.0);
        for p in 0..n {
            b.push(p, p, two * T::from_count(m) * inv_h2);
            for k in 0..m {
                let drift = self.grad[k * n + p] * inv_2h;
                if let Some(q) = spec.neighbor(p, k, true) {
                    b.push(p, q, -inv_h2 + drift);
                }
                if let Some(q) = spec.neighbor(p, k, false) {
                    b.push(p, q, -inv_h2 - drift);
                }
            }
        }
        b.build()
    }

    /// `A1 = A0 (x) Id + Hess Phi` on component-major vector fields.
    pub fn assemble_a1(&self) -> CsrMatrix<T> {
        let a0 = self.assemble_a0();
        let (n, m) = (self.spec.node_count(), self.spec.dim());
        let mut b = TripletBuilder::with_capacity(m * n, m * n, m * (a0.nnz() + m * n));
        for i in 0..m {
            for p in 0..n {
                for (q, v) in a0.row(p) {
                    b.push(i * n + p, i * n + q, v);
                }
                for k in 0..m {
                    let hik = self.hess_entry(p, i, k);
                    if hik != T::zero() {
                        b.push(i * n + p, k * n + p, hik);
                    }
                }
            }
        }
        b.build()
    }

    /// `W0 = -Delta + |grad Phi|^2/4 - Delta Phi/2` with the potential sampled at nodes.
    pub fn assemble_w0(&self) -> CsrMatrix<T> {
        let spec = &self.spec;
        let (n, m) = (spec.node_count(), spec.dim());
        let h = spec.spacing();
        let inv_h2 = T::one() / (h * h);
        let mut b = TripletBuilder::with_capacity(n, n, n * (2 * m + 1));
        for p in 0..n {
            b.push(p, p, T::lit(2.0) * T::from_count(m) * inv_h2 + self.w0_potential(p));
            for k in 0..m {
                for dir in [true, false] {
                    if let Some(q) = spec.neighbor(p, k, dir) {
                        b.push(p, q, -inv_h2);
                    }
                }
            }
        }
        b.build()
    }

    /// `|grad Phi(x_p)|^2/4 - Delta Phi(x_p)/2`.
    pub fn w0_potential(&self, node: usize) -> T {
        let (n, m) = (self.spec.node_count(), self.spec.dim());
        let g2: T = (0..m).map(|k| self.grad[k * n + node]).map(|g| g * g).sum();
        let lap: T = (0..m).map(|k| self.hess_entry(node, k, k)).sum();
        g2 / T::lit(4.0) - lap / T::lit(2.0)
    }

    /// `e^{-Phi/2} A e^{Phi/2}` for an operator acting on `copies` stacked grid functions.
    pub(crate) fn conjugate(&self, a: &CsrMatrix<T>) -> CsrMatrix<T> {
        let n = self.spec.node_count();
        let half = T::lit(0.5);
        let mut b = TripletBuilder::with_capacity(a.n_rows(), a.n_cols(), a.nnz());
        for r in 0..a.n_rows() {
            let pr = self.phi[r % n];
            for (c, v) in a.row(r) {
                b.push(r, c, v * ((self.phi[c % n] - pr) * half).exp());
            }
        }
        b.build()
    }
}
