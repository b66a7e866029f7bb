//! Small self-contained numerical kernels: Jacobi eigenvalues for Hermitian
//! matrices, a one-sided Jacobi SVD with minimum-norm least squares and
//! nullspace extraction, and power iteration for spectral norms.
//!
//! Problem sizes here are modest (stationarity maps are `2d² x (d²-1)` with
//! d of a few units), so robustness and zero external dependencies win over
//! raw speed.

use num_complex::Complex64;

use crate::matrix::ComplexMatrix;

/// Dense real matrix in row-major order, used only inside the solvers.
#[derive(Clone, Debug)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// returned in ascending order.
fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let idx = |i: usize, j: usize| i * n + j;
    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[idx(i, j)] * a[idx(i, j)];
            }
        }
        s.sqrt()
    };
    let scale: f64 = (0..n * n).map(|k| a[k] * a[k]).sum::<f64>().sqrt().max(1e-300);

    for _sweep in 0..64 {
        if off_norm(&a) <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Eigenvalues of a Hermitian complex matrix, ascending.
///
/// Uses the real symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum
/// is that of the original matrix with every eigenvalue doubled.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    assert!(m.is_square(), "hermitian_eigenvalues requires a square matrix");
    let d = m.rows();
    let n = 2 * d;
    let mut s = vec![0.0; n * n];
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            s[i * n + j] = z.re;
            s[(i + d) * n + (j + d)] = z.re;
            s[i * n + (j + d)] = -z.im;
            s[(i + d) * n + j] = z.im;
        }
    }
    let paired = symmetric_eigenvalues(s, n);
    // Sorted pairs: take every other entry.
    (0..d).map(|k| paired[2 * k]).collect()
}

/// Thin SVD `A = U diag(s) Vᵀ` of a real matrix with `rows >= cols`,
/// computed by one-sided Jacobi orthogonalization of the columns.
pub struct Svd {
    pub u: RealMatrix,
    pub singular_values: Vec<f64>,
    pub v: RealMatrix,
}

pub fn svd(a: &RealMatrix) -> Svd {
    assert!(
        a.rows >= a.cols,
        "svd expects rows >= cols (got {}x{})",
        a.rows,
        a.cols
    );
    let m = a.rows;
    let n = a.cols;
    let mut w = a.data.clone(); // working copy, columns get rotated in place
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0;
    }
    let col_dot = |w: &[f64], p: usize, q: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..m {
            s += w[i * n + p] * w[i * n + q];
        }
        s
    };

    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let app = col_dot(&w, p, p);
                let aqq = col_dot(&w, q, q);
                let apq = col_dot(&w, p, q);
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() + 1e-300 {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..m {
                    let wip = w[i * n + p];
                    let wiq = w[i * n + q];
                    w[i * n + p] = c * wip - s * wiq;
                    w[i * n + q] = s * wip + c * wiq;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values; sort descending.
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| col_dot(&w, j, j).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = RealMatrix::zeros(m, n);
    let mut vs = RealMatrix::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        sv.push(sigma);
        if sigma > 1e-300 {
            for i in 0..m {
                u.set(i, dst, w[i * n + src] / sigma);
            }
        }
        for i in 0..n {
            vs.set(i, dst, v[i * n + src]);
        }
    }
    Svd {
        u,
        singular_values: sv,
        v: vs,
    }
}

/// Minimum-norm least-squares solution of `A x = b` with a relative
/// singular-value cutoff, plus the right singular directions below the
/// cutoff (the numerical nullspace of `A`).
pub struct LeastSquares {
    pub solution: Vec<f64>,
    pub nullspace: Vec<Vec<f64>>,
    pub rank: usize,
    pub residual_norm: f64,
}

pub fn least_squares_min_norm(a: &RealMatrix, b: &[f64], rel_cutoff: f64) -> LeastSquares {
    assert_eq!(a.rows, b.len());
    let n = a.cols;
    let decomposition = svd(a);
    let sigma_max = decomposition
        .singular_values
        .first()
        .copied()
        .unwrap_or(0.0);
    let cutoff = rel_cutoff * sigma_max;

    let mut x = vec![0.0; n];
    let mut rank = 0;
    let mut nullspace = Vec::new();
    for (j, &sigma) in decomposition.singular_values.iter().enumerate() {
        if sigma > cutoff && sigma > 0.0 {
            rank += 1;
            let uj = decomposition.u.column(j);
            let coeff = uj.iter().zip(b).map(|(u, b)| u * b).sum::<f64>() / sigma;
            for i in 0..n {
                x[i] += coeff * decomposition.v.get(i, j);
            }
        } else {
            nullspace.push(decomposition.v.column(j));
        }
    }
    let ax = a.matvec(&x);
    let residual_norm = ax
        .iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    LeastSquares {
        solution: x,
        nullspace,
        rank,
        residual_norm,
    }
}

/// Spectral norm (largest singular value) by power iteration on `X†X`.
pub fn spectral_norm(x: &ComplexMatrix) -> f64 {
    let n = x.cols();
    if x.entries().iter().all(|z| z.norm_sqr() == 0.0) {
        return 0.0;
    }
    let xd = x.dagger();
    // Deterministic, non-degenerate start vector.
    let mut v: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(1.0 + 0.37 * (j as f64 + 1.0).sin(), 0.11 * (j as f64)))
        .collect();
    normalize(&mut v);
    let mut lambda = 0.0f64;
    for _ in 0..500 {
        let mut w = xd.matvec(&x.matvec(&v));
        let norm = vec_norm(&w);
        if norm < 1e-300 {
            return 0.0;
        }
        for z in &mut w {
            *z /= norm;
        }
        let next = norm;
        v = w;
        if (next - lambda).abs() <= 1e-13 * next.max(1.0) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.max(0.0).sqrt()
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn symmetric_eigenvalues_of_diagonal() {
        let eig = symmetric_eigenvalues(vec![3.0, 0.0, 0.0, -1.0], 2);
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_y() {
        let sy = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .unwrap();
        let eig = hermitian_eigenvalues(&sy);
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_of_pure_projector() {
        // |+><+| has eigenvalues {0, 1}.
        let rho = ComplexMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
        let eig = hermitian_eigenvalues(&rho);
        assert!(eig[0].abs() < 1e-12);
        assert!((eig[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs_matrix() {
        let mut a = RealMatrix::zeros(4, 3);
        let vals = [
            1.0, 2.0, 0.5, //
            -1.0, 0.3, 2.0, //
            0.0, 1.5, -2.5, //
            3.0, -0.7, 0.1,
        ];
        for i in 0..4 {
            for j in 0..3 {
                a.set(i, j, vals[i * 3 + j]);
            }
        }
        let dec = svd(&a);
        for i in 0..4 {
            for j in 0..3 {
                let mut r = 0.0;
                for k in 0..3 {
                    r += dec.u.get(i, k) * dec.singular_values[k] * dec.v.get(j, k);
                }
                assert!((r - a.get(i, j)).abs() < 1e-10, "entry ({i},{j})");
            }
        }
        // V orthonormal.
        for p in 0..3 {
            for q in 0..3 {
                let dot: f64 = (0..3).map(|i| dec.v.get(i, p) * dec.v.get(i, q)).sum();
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn least_squares_min_norm_on_rank_deficient_system() {
        // x + y = 2 with a second zero row: minimum-norm solution (1, 1),
        // nullspace spanned by (1, -1)/sqrt(2).
        let mut a = RealMatrix::zeros(2, 2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 1.0);
        let sol = least_squares_min_norm(&a, &[2.0, 0.0], 1e-10);
        assert_eq!(sol.rank, 1);
        assert!((sol.solution[0] - 1.0).abs() < 1e-12);
        assert!((sol.solution[1] - 1.0).abs() < 1e-12);
        assert_eq!(sol.nullspace.len(), 1);
        let v = &sol.nullspace[0];
        assert!((v[0] + v[1]).abs() < 1e-12);
        assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-12);
        assert!(sol.residual_norm < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_known_values() {
        let sx = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((spectral_norm(&sx) - 1.0).abs() < 1e-10);
        let m = ComplexMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-10);
        assert_eq!(spectral_norm(&ComplexMatrix::zeros(3, 3)), 0.0);
        // Non-normal matrix: singular value of [[0,2],[0,0]] is 2.
        let n = ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
        assert!((spectral_norm(&n) - 2.0).abs() < 1e-10);
    }
}
