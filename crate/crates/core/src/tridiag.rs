//! Symmetric tridiagonal eigenproblem by implicit QL with Wilkinson-type shifts.

/// Eigen-decomposition of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Row-major `n × n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<f64>,
    pub dim: usize,
}

impl TridiagEigen {
    /// Component `k` of eigenvector `j`.
    pub fn component(&self, k: usize, j: usize) -> f64 {
        self.vectors[k * self.dim + j]
    }
}

const MAX_SWEEPS_PER_VALUE: usize = 64;

/// Solves `T v = λ v` for `T` with diagonal `diag` and super/sub-diagonal `off`
/// (`off.len() == diag.len() - 1`). Returns `None` if QL fails to converge.
pub fn eigh_tridiagonal(diag: &[f64], off: &[f64]) -> Option<TridiagEigen> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1), "off-diagonal length must be n - 1");
    if n == 0 {
        return Some(TridiagEigen { values: vec![], vectors: vec![], dim: 0 });
    }

    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = vec![0.0; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS_PER_VALUE {
                return None;
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;

            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zk = &mut z[k * n..(k + 1) * n];
                    let f = zk[i + 1];
                    zk[i + 1] = s * zk[i] + c * f;
                    zk[i] = c * zk[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&j| d[j]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_j, &old_j) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new_j] = z[k * n + old_j];
        }
    }
    Some(TridiagEigen { values, vectors, dim: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use proptest::prelude::*;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = off[i];
                m[(i + 1, i)] = off[i];
            }
        }
        m
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, c) = (1.0, 3.0, 0.5);
        let eig = eigh_tridiagonal(&[a, b], &[c]).unwrap();
        let mid = 0.5 * (a + b);
        let rad = (0.25 * (a - b) * (a - b) + c * c).sqrt();
        assert!((eig.values[0] - (mid - rad)).abs() < 1e-14);
        assert!((eig.values[1] - (mid + rad)).abs() < 1e-14);
    }

    #[test]
    fn already_diagonal() {
        let eig = eigh_tridiagonal(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
        assert_eq!(eig.component(1, 0).abs(), 1.0);
    }

    #[test]
    fn single_element() {
        let eig = eigh_tridiagonal(&[4.5], &[]).unwrap();
        assert_eq!(eig.values, vec![4.5]);
        assert_eq!(eig.vectors, vec![1.0]);
    }

    proptest! {
        #[test]
        fn matches_dense_solver(
            diag in prop::collection::vec(-50.0f64..50.0, 2..20),
            seed in prop::collection::vec(-10.0f64..10.0, 19),
        ) {
            let n = diag.len();
            let off = &seed[..n - 1];
            let eig = eigh_tridiagonal(&diag, off).unwrap();
            let oracle = SymmetricEigen::new(dense(&diag, off));
            let mut expect: Vec<f64> = oracle.eigenvalues.iter().copied().collect();
            expect.sort_by(f64::total_cmp);
            let scale = diag.iter().chain(off).fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in eig.values.iter().zip(&expect) {
                prop_assert!((a - b).abs() < 1e-11 * scale);
            }
            // A v = λ v and orthonormality
            let a = dense(&diag, off);
            for j in 0..n {
                let v = nalgebra::DVector::from_iterator(n, (0..n).map(|k| eig.component(k, j)));
                let resid = &a * &v - &v * eig.values[j];
                prop_assert!(resid.norm() < 1e-10 * scale);
                prop_assert!((v.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
