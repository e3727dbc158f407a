use crate::scalar::{axpy, dot, norm2, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    pub restart: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats<T> {
    pub iterations: usize,
    /// `||b - A x|| / ||b||` recomputed from the returned iterate.
    pub residual: T,
    pub converged: bool,
}

/// Restarted GMRES with right preconditioning, started from zero.
///
/// `op(x, y)` writes `y = A x`, `precond(r, z)` writes `z = M^{-1} r`.
pub fn gmres<T, A, P>(op: A, precond: P, b: &[T], opts: GmresOptions<T>) -> (Vec<T>, SolveStats<T>)
where
    T: Real,
    A: Fn(&[T], &mut [T]),
    P: Fn(&[T], &mut [T]),
{
    let n = b.len();
    let mut x = vec![T::zero(); n];
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        let stats = SolveStats {
            iterations: 0,
            residual: T::zero(),
            converged: true,
        };
        return (x, stats);
    }
    let k = opts.restart.clamp(1, n.max(1));
    let mut total = 0;
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(k + 1);
    let mut hess = vec![vec![T::zero(); k]; k + 1];
    let mut cs = vec![T::zero(); k];
    let mut sn = vec![T::zero(); k];
    let mut g = vec![T::zero(); k + 1];
    let mut rel;
    loop {
        op(&x, &mut r);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let beta = norm2(&r);
        rel = beta / bnorm;
        if rel <= opts.tol || total >= opts.max_iter || !rel.is_finite() {
            break;
        }
        basis.clear();
        basis.push(r.iter().map(|&v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = T::zero());
        g[0] = beta;
        let mut cols = 0;
        for j in 0..k {
            precond(&basis[j], &mut z);
            op(&z, &mut w);
            for i in 0..=j {
                let hij = dot(&w, &basis[i]);
                hess[i][j] = hij;
                axpy(-hij, &basis[i], &mut w);
            }
            let wn = norm2(&w);
            hess[j + 1][j] = wn;
            for i in 0..j {
                let (a, c) = (hess[i][j], hess[i + 1][j]);
                hess[i][j] = cs[i] * a + sn[i] * c;
                hess[i + 1][j] = -sn[i] * a + cs[i] * c;
            }
            let (a, c) = (hess[j][j], hess[j + 1][j]);
            let rho = a.hypot(c);
            if rho == T::zero() {
                cs[j] = T::one();
                sn[j] = T::zero();
            } else {
                cs[j] = a / rho;
                sn[j] = c / rho;
            }
            hess[j][j] = rho;
            hess[j + 1][j] = T::zero();
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            cols = j + 1;
            total += 1;
            rel = g[j + 1].abs() / bnorm;
            let breakdown = wn <= T::epsilon() * bnorm;
            if rel <= opts.tol || total >= opts.max_iter || breakdown {
                break;
            }
            basis.push(w.iter().map(|&v| v / wn).collect());
        }
        // back substitution on the rotated Hessenberg system
        let mut y = vec![T::zero(); cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for l in i + 1..cols {
                s -= hess[i][l] * y[l];
            }
            y[i] = if hess[i][i] == T::zero() { T::zero() } else { s / hess[i][i] };
        }
        let mut update = vec![T::zero(); n];
        for (i, &yi) in y.iter().enumerate() {
            axpy(yi, &basis[i], &mut update);
        }
        precond(&update, &mut z);
        axpy(T::one(), &z, &mut x);
    }
    let stats = SolveStats {
        iterations: total,
        residual: rel,
        converged: rel <= opts.tol,
    };
    (x, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::TripletBuilder;

    #[test]
    fn solves_nonsymmetric_tridiagonal() {
        let n = 50;
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 3.0_f64);
            if i + 1 < n {
                b.push(i, i + 1, -1.3);
                b.push(i + 1, i, -0.7);
            }
        }
        let a = b.build();
        let exact: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let rhs = a.mul_vec(&exact);
        let opts = GmresOptions { tol: 1e-12, max_iter: 500, restart: 20 };
        let (x, stats) = gmres(|v, out| a.apply(v, out), |r, z| z.copy_from_slice(r), &rhs, opts);
        assert!(stats.converged, "{stats:?}");
        for (xi, ei) in x.iter().zip(&exact) {
            assert!((xi - ei).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_rhs_is_trivial() {
        let (x, stats) = gmres(
            |v: &[f64], out: &mut [f64]| out.copy_from_slice(v),
            |r, z| z.copy_from_slice(r),
            &[0.0; 4],
            GmresOptions { tol: 1e-8, max_iter: 10, restart: 4 },
        );
        assert_eq!(x, vec![0.0; 4]);
        assert!(stats.converged && stats.iterations == 0);
    }

    #[test]
    fn reports_non_convergence_at_cap() {
        let n = 40;
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0_f64);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        let a = b.build();
        let rhs = vec![1.0; n];
        let opts = GmresOptions { tol: 1e-14, max_iter: 3, restart: 3 };
        let (_, stats) = gmres(|v, out| a.apply(v, out), |r, z| z.copy_from_slice(r), &rhs, opts);
        assert!(!stats.converged);
        assert_eq!(stats.iterations, 3);
    }
}
