//! Real symmetric eigensolvers used by the propagator: implicit-shift QL on a
//! tridiagonal matrix, plus Householder reduction for wider bands.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending.
///
/// `vectors` is row-major with one eigenvector per row:
/// `vectors[i * n + k]` is component `k` of eigenvector `i`.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

/// Diagonalizes the symmetric tridiagonal matrix with main diagonal `diag`
/// and off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<Eigenpairs> {
    let n = diag.len();
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    tridiagonal_eigen_with_basis(diag, off, z)
}

/// Same as [`tridiagonal_eigen`] but rotates an initial basis `z` (rows are
/// vectors) instead of the identity. Used after Householder reduction.
fn tridiagonal_eigen_with_basis(diag: &[f64], off: &[f64], mut z: Vec<f64>) -> Result<Eigenpairs> {
    let n = diag.len();
    if n == 0 {
        return Ok(Eigenpairs { values: vec![], vectors: vec![] });
    }
    assert!(off.len() + 1 >= n, "off-diagonal too short");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m] == 0.0 {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l, iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0_f64, 1.0_f64, 0.0_f64);
            let mut underflow = false;
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
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                rotate_rows(&mut z, n, i, s, c);
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend_from_slice(&z[i * n..(i + 1) * n]);
    }
    Ok(Eigenpairs { values, vectors })
}

/// Applies the plane rotation of one QL step to eigenvector rows `i`, `i + 1`.
fn rotate_rows(z: &mut [f64], n: usize, i: usize, s: f64, c: f64) {
    let (head, tail) = z.split_at_mut((i + 1) * n);
    let row_i = &mut head[i * n..];
    let row_next = &mut tail[..n];
    for (zi, zn) in row_i.iter_mut().zip(row_next.iter_mut()) {
        let f = *zn;
        *zn = s * *zi + c * f;
        *zi = c * *zi - s * f;
    }
}

/// Diagonalizes a dense real symmetric matrix (row-major `a`, size n×n) by
/// Householder reduction to tridiagonal form followed by QL.
pub fn dense_symmetric_eigen(a: &[f64], n: usize) -> Result<Eigenpairs> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok(Eigenpairs { values: vec![], vectors: vec![] });
    }
    let mut t = a.to_vec();
    // q accumulates the reflections; rows of q are the transformed basis
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    for col in 0..n.saturating_sub(2) {
        let below: f64 = (col + 1..n).map(|r| t[r * n + col].powi(2)).sum();
        let alpha_abs = below.sqrt();
        if alpha_abs == 0.0 {
            continue;
        }
        let x0 = t[(col + 1) * n + col];
        let alpha = -alpha_abs.copysign(x0);
        let mut v = vec![0.0; n];
        v[col + 1] = x0 - alpha;
        for r in col + 2..n {
            v[r] = t[r * n + col];
        }
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // T ← P T P with P = I − 2vvᵀ/|v|²
        let beta = 2.0 / vnorm_sq;
        let mut w = vec![0.0; n];
        for r in 0..n {
            w[r] = beta * (col + 1..n).map(|k| t[r * n + k] * v[k]).sum::<f64>();
        }
        let kappa = 0.5 * beta * (col + 1..n).map(|k| v[k] * w[k]).sum::<f64>();
        for r in 0..n {
            w[r] -= kappa * v[r];
        }
        for r in 0..n {
            for c in 0..n {
                t[r * n + c] -= v[r] * w[c] + w[r] * v[c];
            }
        }
        // rows of q hold basis vectors expressed in the original coordinates
        for r in 0..n {
            let proj = beta * (col + 1..n).map(|k| q[r * n + k] * v[k]).sum::<f64>();
            for k in col + 1..n {
                q[r * n + k] -= proj * v[k];
            }
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| t[i * n + i]).collect();
    let off: Vec<f64> = (0..n - 1).map(|i| t[(i + 1) * n + i]).collect();
    // q has Q in row-major (columns are tridiagonal-basis vectors); QL rotates
    // rows, so hand it Qᵀ and each resulting row is an eigenvector.
    let mut qt = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            qt[c * n + r] = q[r * n + c];
        }
    }
    tridiagonal_eigen_with_basis(&diag, &off, qt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(a: &[f64], n: usize, ep: &Eigenpairs) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let v = &ep.vectors[i * n..(i + 1) * n];
            for r in 0..n {
                let av: f64 = (0..n).map(|k| a[r * n + k] * v[k]).sum();
                worst = worst.max((av - ep.values[i] * v[r]).abs());
            }
        }
        worst
    }

    fn dense_from_tridiag(d: &[f64], e: &[f64]) -> Vec<f64> {
        let n = d.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = d[i];
            if i + 1 < n {
                a[i * n + i + 1] = e[i];
                a[(i + 1) * n + i] = e[i];
            }
        }
        a
    }

    #[test]
    fn two_by_two() {
        let ep = tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((ep.values[0] + 1.0).abs() < 1e-15);
        assert!((ep.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_diagonal_chain() {
        let n = 40;
        let d = vec![0.0; n];
        let e: Vec<f64> = (0..n - 1).map(|i| ((i + 1) as f64).sqrt()).collect();
        let ep = tridiagonal_eigen(&d, &e).unwrap();
        assert!(residual(&dense_from_tridiag(&d, &e), n, &ep) < 1e-11);
    }

    #[test]
    fn already_diagonal() {
        let ep = tridiagonal_eigen(&[3.0, -1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(ep.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn dense_pentadiagonal() {
        let n = 9;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = (i as f64).sin();
            for k in 1..=2 {
                if i + k < n {
                    let x = 0.3 * (i + k) as f64;
                    a[i * n + i + k] = x;
                    a[(i + k) * n + i] = x;
                }
            }
        }
        let ep = dense_symmetric_eigen(&a, n).unwrap();
        assert!(residual(&a, n, &ep) < 1e-12);
        let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
        assert!((ep.values.iter().sum::<f64>() - trace).abs() < 1e-12);
    }
}
