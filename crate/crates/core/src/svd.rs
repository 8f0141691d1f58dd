//! Truncated singular value decomposition.
//!
//! Small and medium inputs go through one-sided (Hestenes) Jacobi, which
//! delivers singular values to high relative accuracy. Large inputs with a
//! small target rank are first compressed with a randomized range finder
//! (Gaussian sketch plus power iterations) and the compressed matrix is then
//! decomposed exactly with the same Jacobi routine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{dot, Matrix, Vector};

const MAX_SWEEPS: usize = 80;
const RANDOMIZED_MIN_SIDE: usize = 400;
const OVERSAMPLE: usize = 12;
const POWER_ITERATIONS: usize = 4;
const SKETCH_SEED: u64 = 0x5eed_57d0;

#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `n × k`, orthonormal columns.
    pub u: Matrix,
    /// `k` singular values, non-increasing.
    pub s: Vector,
    /// `k × m`, orthonormal rows.
    pub vt: Matrix,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.s.dim()
    }

    /// `U Σ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let (n, k, m) = (self.u.rows(), self.rank(), self.vt.cols());
        let mut out = vec![0.0; n * m];
        for i in 0..n {
            let dst = &mut out[i * m..(i + 1) * m];
            for r in 0..k {
                let coef = self.u.get(i, r) * self.s[r];
                if coef == 0.0 {
                    continue;
                }
                for (d, &v) in dst.iter_mut().zip(self.vt.row(r)) {
                    *d += coef * v;
                }
            }
        }
        Matrix::from_raw(n, m, out)
    }
}

/// Top-`k` singular triplets of `m`.
pub fn truncated_svd(m: &Matrix, k: usize) -> Result<SvdResult> {
    let (rows, cols) = (m.rows(), m.cols());
    let min_side = rows.min(cols);
    if k == 0 || k > min_side {
        return Err(Error::InvalidArgument(format!(
            "rank {k} out of range for a {rows}x{cols} matrix"
        )));
    }
    if min_side >= RANDOMIZED_MIN_SIDE && k + OVERSAMPLE < min_side / 2 {
        randomized_svd(m, k)
    } else {
        let full = jacobi_svd(m)?;
        Ok(truncate(full, k))
    }
}

/// Full thin SVD: `min(rows, cols)` triplets.
pub fn full_svd(m: &Matrix) -> Result<SvdResult> {
    jacobi_svd(m)
}

fn truncate(full: SvdResult, k: usize) -> SvdResult {
    let n = full.u.rows();
    let m = full.vt.cols();
    let mut u = Vec::with_capacity(n * k);
    for i in 0..n {
        u.extend_from_slice(&full.u.row(i)[..k]);
    }
    SvdResult {
        u: Matrix::from_raw(n, k, u),
        s: Vector::from_raw(full.s.as_slice()[..k].to_vec()),
        vt: Matrix::from_raw(k, m, full.vt.as_slice()[..k * m].to_vec()),
    }
}

/// One-sided Jacobi on the columns of `m` (or of `mᵀ` when `m` is wide).
fn jacobi_svd(m: &Matrix) -> Result<SvdResult> {
    let wide = m.rows() < m.cols();
    let (n, p) = if wide {
        (m.cols(), m.rows())
    } else {
        (m.rows(), m.cols())
    };

    // `cols[j]` is column j of the (possibly transposed) working matrix.
    let mut cols: Vec<Vec<f64>> = if wide {
        (0..p).map(|j| m.row(j).to_vec()).collect()
    } else {
        let mut cols = vec![vec![0.0; n]; p];
        for i in 0..n {
            for (col, &x) in cols.iter_mut().zip(m.row(i)) {
                col[i] = x;
            }
        }
        cols
    };
    let mut v: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            e
        })
        .collect();

    let tol = f64::EPSILON * (n as f64).sqrt();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for a in 0..p {
            for b in a + 1..p {
                let alpha = dot(&cols[a], &cols[a]);
                let beta = dot(&cols[b], &cols[b]);
                let gamma = dot(&cols[a], &cols[b]);
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, a, b, c, s);
                rotate(&mut v, a, b, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let sigma: Vec<f64> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]).then(x.cmp(&y)));

    let s_max = order.first().map_or(0.0, |&j| sigma[j]);
    let cutoff = s_max * f64::EPSILON * n as f64;
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(p);
    let mut s = Vec::with_capacity(p);
    for &j in &order {
        let sj = sigma[j];
        s.push(sj);
        if sj > cutoff && sj > 0.0 {
            left.push(cols[j].iter().map(|x| x / sj).collect());
        } else {
            left.push(Vec::new());
        }
    }
    complete_orthonormal(&mut left, n);
    let right: Vec<Vec<f64>> = order.iter().map(|&j| std::mem::take(&mut v[j])).collect();

    // left: n-vectors, right: p-vectors; swap roles when the input was wide.
    let (u, vt) = if wide {
        (columns_to_matrix(&right, p), rows_to_matrix(&left, n))
    } else {
        (columns_to_matrix(&left, n), rows_to_matrix(&right, p))
    };
    Ok(SvdResult {
        u,
        s: Vector::from_raw(s),
        vt,
    })
}

fn rotate(cols: &mut [Vec<f64>], a: usize, b: usize, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(b);
    for (x, y) in lo[a].iter_mut().zip(hi[0].iter_mut()) {
        let (xa, yb) = (*x, *y);
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}

/// Fills empty entries of `basis` with unit vectors orthogonal to the rest.
fn complete_orthonormal(basis: &mut [Vec<f64>], n: usize) {
    let mut candidate = 0;
    for j in 0..basis.len() {
        if !basis[j].is_empty() {
            continue;
        }
        while candidate < n {
            let mut e = vec![0.0; n];
            e[candidate] = 1.0;
            candidate += 1;
            for _ in 0..2 {
                for other in basis.iter().filter(|o| !o.is_empty()) {
                    let proj = dot(&e, other);
                    e.iter_mut().zip(other).for_each(|(x, o)| *x -= proj * o);
                }
            }
            let nrm = dot(&e, &e).sqrt();
            if nrm > 1e-8 {
                e.iter_mut().for_each(|x| *x /= nrm);
                basis[j] = e;
                break;
            }
        }
    }
}

fn columns_to_matrix(cols: &[Vec<f64>], n: usize) -> Matrix {
    let k = cols.len();
    let mut values = vec![0.0; n * k];
    for (j, c) in cols.iter().enumerate() {
        for (i, &x) in c.iter().enumerate() {
            values[i * k + j] = x;
        }
    }
    Matrix::from_raw(n, k, values)
}

fn rows_to_matrix(rows: &[Vec<f64>], m: usize) -> Matrix {
    let mut values = Vec::with_capacity(rows.len() * m);
    for r in rows {
        values.extend_from_slice(r);
    }
    Matrix::from_raw(rows.len(), m, values)
}

fn randomized_svd(m: &Matrix, k: usize) -> Result<SvdResult> {
    let (rows, cols) = (m.rows(), m.cols());
    let l = (k + OVERSAMPLE).min(rows.min(cols));
    let mut rng = ChaCha8Rng::seed_from_u64(SKETCH_SEED);
    let omega: Vec<f64> = (0..cols * l).map(|_| StandardNormal.sample(&mut rng)).collect();
    let omega = Matrix::from_raw(cols, l, omega);
    let mt = m.transpose();

    let mut q = orthonormalize(&par_matmul(m, &omega));
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormalize(&par_matmul(&mt, &q));
        q = orthonormalize(&par_matmul(m, &z));
    }
    // B = Qᵀ M, computed as (Mᵀ Q)ᵀ.
    let b = par_matmul(&mt, &q).transpose();
    let small = jacobi_svd(&b)?;
    let small = truncate(small, k);
    let u = par_matmul(&q, &small.u);
    Ok(SvdResult {
        u,
        s: small.s,
        vt: small.vt,
    })
}

fn par_matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, inner, m) = (a.rows(), a.cols(), b.cols());
    debug_assert_eq!(inner, b.rows());
    let mut out = vec![0.0; n * m];
    out.par_chunks_mut(m.max(1)).enumerate().for_each(|(i, dst)| {
        for (kk, &x) in a.row(i).iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (d, &y) in dst.iter_mut().zip(b.row(kk)) {
                *d += x * y;
            }
        }
    });
    Matrix::from_raw(n, m, out)
}

/// Orthonormal basis for the column space (twice-iterated modified Gram-Schmidt).
fn orthonormalize(y: &Matrix) -> Matrix {
    let (n, l) = (y.rows(), y.cols());
    let mut cols: Vec<Vec<f64>> = (0..l).map(|j| (0..n).map(|i| y.get(i, j)).collect()).collect();
    for j in 0..l {
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj = dot(&rest[0], &done[i]);
                rest[0].iter_mut().zip(&done[i]).for_each(|(x, q)| *x -= proj * q);
            }
        }
        let nrm = dot(&cols[j], &cols[j]).sqrt();
        if nrm > 1e-12 {
            cols[j].iter_mut().for_each(|x| *x /= nrm);
        } else {
            cols[j].iter_mut().for_each(|x| *x = 0.0);
        }
    }
    columns_to_matrix(&cols, n)
}
