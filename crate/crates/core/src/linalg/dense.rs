use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues of the symmetric row-major `n x n` matrix `a`, ascending.
///
/// Cyclic Jacobi rotations; only the upper triangle's symmetric part is used.
pub fn symmetric_eigenvalues<T: Real>(a: &[T], n: usize) -> Result<Vec<T>> {
    assert_eq!(a.len(), n * n);
    let half = T::lit(0.5);
    let mut m: Vec<T> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (a[i * n + j] + a[j * n + i]) * half
        })
        .collect();
    let scale = m.iter().fold(T::zero(), |s, &v| s.max(v.abs()));
    if scale == T::zero() || n == 1 {
        return Ok((0..n).map(|i| m[i * n + i]).collect());
    }
    let tol = T::epsilon() * scale;
    for _sweep in 0..100 {
        let off: T = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum();
        if off.sqrt() <= tol {
            let mut ev: Vec<T> = (0..n).map(|i| m[i * n + i]).collect();
            ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
            return Ok(ev);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (apq + apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    Err(Error::EigenFailure { dim: n })
}

/// Solves `a x = b` for symmetric positive definite `a` (row-major, `n x n`).
pub fn cholesky_solve<T: Real>(a: &[T], b: &[T], n: usize) -> Result<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(Error::Indefinite(format!(
                        "pivot {i} of Cholesky factorization is {s:e}"
                    )));
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = l[i * n + k] * y[k];
            y[i] -= v;
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let v = l[k * n + i] * y[k];
            y[i] -= v;
        }
        y[i] /= l[i * n + i];
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let nu = 0.3_f64;
        let a = [1.0 - nu, -nu, -nu, 1.0 - nu];
        let ev = symmetric_eigenvalues(&a, 2).unwrap();
        assert!((ev[0] - (1.0 - 2.0 * nu)).abs() < 1e-14);
        assert!((ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn path_laplacian_spectrum() {
        // -1, 2, -1 tridiagonal: eigenvalues 2 - 2 cos(k pi / (n + 1)).
        let n = 7;
        let mut a = vec![0.0_f64; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i + 1 < n {
                a[i * n + i + 1] = -1.0;
                a[(i + 1) * n + i] = -1.0;
            }
        }
        let ev = symmetric_eigenvalues(&a, n).unwrap();
        for (k, &e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * (((k + 1) as f64) * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-12, "{e} vs {exact}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let a = [2.0_f32, 1.0, 1.0, 2.0];
        let ev = symmetric_eigenvalues(&a, 2).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-6 && (ev[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn cholesky_solves_and_rejects_indefinite() {
        let a = [4.0_f64, 1.0, 1.0, 3.0];
        let x = cholesky_solve(&a, &[1.0, 2.0], 2).unwrap();
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-14);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-14);
        assert!(matches!(
            cholesky_solve(&[1.0_f64, 2.0, 2.0, 1.0], &[1.0, 1.0], 2),
            Err(Error::Indefinite(_))
        ));
    }
}
