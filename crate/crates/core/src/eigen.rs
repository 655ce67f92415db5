//! Small Hermitian eigenproblems: a closed-form 2×2 solver and a cyclic
//! complex Jacobi solver for anything larger.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

/// Pairs closer than this (GHz) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub basis: &'static str,
    pub degeneracy_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenRecord {
    pub basis: &'static str,
    pub values: Vec<f64>,
    /// vectors[k] is eigenvector k as (re, im) pairs.
    pub vectors: Vec<Vec<(f64, f64)>>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> nalgebra::DVector<C64> {
        self.vectors.column(k).into_owned()
    }

    /// Index ranges of clusters of (numerically) equal eigenvalues.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.values.len() {
            if k == self.values.len() || self.values[k] - self.values[k - 1] > self.degeneracy_tol {
                out.push(start..k);
                start = k;
            }
        }
        out
    }

    /// Rotate each degenerate cluster so that `op` is diagonal inside it.
    /// Within a cluster, vectors are ordered by descending expectation value
    /// of `op`.
    pub fn with_gauge(mut self, op: &CMatrix) -> Result<Self> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(Error::DimensionMismatch("gauge operator size".into()));
        }
        for r in self.clusters() {
            if r.len() < 2 {
                continue;
            }
            let block = self.vectors.columns(r.start, r.len()).into_owned();
            let proj = block.adjoint() * op * &block;
            let inner = jacobi(&proj)?;
            let mut rotated = &block * &inner.vectors;
            // descending op eigenvalue: reverse the ascending order
            let n = r.len();
            let cols: Vec<_> = (0..n).rev().map(|k| rotated.column(k).into_owned()).collect();
            for (k, c) in cols.into_iter().enumerate() {
                rotated.set_column(k, &c);
            }
            self.vectors.columns_mut(r.start, n).copy_from(&rotated);
        }
        fix_phases(&mut self.vectors);
        Ok(self)
    }

    pub fn record(&self) -> EigenRecord {
        EigenRecord {
            basis: self.basis,
            values: self.values.clone(),
            vectors: (0..self.dim())
                .map(|k| self.vectors.column(k).iter().map(|z| (z.re, z.im)).collect())
                .collect(),
        }
    }
}

/// Largest entry of |H − H†|.
pub fn max_asymmetry(h: &CMatrix) -> f64 {
    let n = h.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Diagonalize a Hermitian matrix with the complex Jacobi method.
pub fn diagonalize(h: &CMatrix) -> Result<EigenSystem> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::NotSquare { rows: h.nrows(), cols: h.ncols() });
    }
    let asym = max_asymmetry(h);
    if asym > HERMITIAN_TOL {
        return Err(Error::NonHermitian { max_asymmetry: asym });
    }
    jacobi(h)
}

fn jacobi(h: &CMatrix) -> Result<EigenSystem> {
    let n = h.nrows();
    let mut a = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut v = CMatrix::identity(n, n);
    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let off = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&a) > 1e-15 * scale && scale > 0.0 {
        sweeps += 1;
        if sweeps > MAX_SWEEPS {
            return Err(Error::InvalidInput("Jacobi iteration did not converge".into()));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // V = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane
                let e = phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * e * s;
                    a[(k, q)] = akp * s + akq * e * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * phase * s;
                    a[(q, k)] = apk * s + aqk * phase * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * e * s;
                    v[(k, q)] = vkp * s + vkq * e * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &v.column(i));
    }
    fix_phases(&mut vectors);
    Ok(EigenSystem { values, vectors, basis: "generic", degeneracy_tol: DEGENERACY_TOL })
}

/// Make the first non-negligible component of every column real and positive.
pub fn fix_phases(vectors: &mut CMatrix) {
    for k in 0..vectors.ncols() {
        let mut col = vectors.column_mut(k);
        let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(first) = col.iter().copied().find(|z| z.norm() > 1e-12 * big.max(f64::MIN_POSITIVE)) {
            let rot = first.conj() / first.norm();
            for z in col.iter_mut() {
                *z *= rot;
            }
            // the pivot is now real up to rounding; make it exactly so
            if let Some(z) = col.iter_mut().find(|z| z.norm() > 1e-12 * big) {
                *z = C64::new(z.norm(), 0.0);
            }
        }
    }
}

/// Closed-form solution of [[a, b], [b*, d]].
///
/// Returns ascending eigenvalues and the matching unit eigenvectors, each
/// with a real non-negative first nonzero component.
pub fn hermitian_2x2(a: f64, b: C64, d: f64) -> ([f64; 2], [[C64; 2]; 2]) {
    let m = 0.5 * (a + d);
    let h = 0.5 * (a - d);
    let r = (h * h + b.norm_sqr()).sqrt();
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    if r == 0.0 {
        return ([m, m], [[one, zero], [zero, one]]);
    }
    // choose the algebraically stable row of (H − λ) for each root
    let (upper, lower) = if h >= 0.0 {
        ([C64::new(r + h, 0.0), b.conj()], [b, C64::new(-(r + h), 0.0)])
    } else {
        ([b, C64::new(r - h, 0.0)], [C64::new(h - r, 0.0), b.conj()])
    };
    let finish = |v: [C64; 2]| -> [C64; 2] {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let mut v = [v[0] / n, v[1] / n];
        let pivot = if v[0].norm() > 1e-14 { v[0] } else { v[1] };
        let rot = pivot.conj() / pivot.norm();
        v[0] *= rot;
        v[1] *= rot;
        if v[0].norm() > 1e-14 {
            v[0] = C64::new(v[0].norm(), 0.0);
        } else {
            v[1] = C64::new(v[1].norm(), 0.0);
        }
        v
    };
    ([m - r, m + r], [finish(lower), finish(upper)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn residual(h: &CMatrix, es: &EigenSystem) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..es.dim() {
            let v = es.vector(k);
            let r = h * &v - &v * c(es.values[k], 0.0);
            worst = worst.max(r.norm());
        }
        worst
    }

    #[test]
    fn diagonal_matrix() {
        let h = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(1.0, 0.0), c(4.0, 0.0), c(2.0, 0.0)]));
        let es = diagonalize(&h).unwrap();
        assert_eq!(es.values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(es.vector(0)[1], c(1.0, 0.0));
    }

    #[test]
    fn pauli_y() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        let es = diagonalize(&h).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-14);
        assert!((es.values[1] - 1.0).abs() < 1e-14);
        assert!(residual(&h, &es) < 1e-14);
        let (vals, vecs) = hermitian_2x2(0.0, c(0.0, 1.0), 0.0);
        assert_eq!(vals, [-1.0, 1.0]);
        for k in 0..2 {
            let v = nalgebra::DVector::from_vec(vecs[k].to_vec());
            let r = &h * &v - &v * c(vals[k], 0.0);
            assert!(r.norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        match diagonalize(&h) {
            Err(Error::NonHermitian { max_asymmetry }) => assert_eq!(max_asymmetry, 1.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(diagonalize(&CMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn dense_random_like_matrix() {
        let n = 6;
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 7 + j * 13) % 11) as f64 - 5.0;
                let y = if i == j { 0.0 } else { ((i * 3 + j * 5) % 7) as f64 - 3.0 };
                h[(i, j)] = c(x, y);
                h[(j, i)] = c(x, -y);
            }
        }
        let es = diagonalize(&h).unwrap();
        assert!(residual(&h, &es) < 1e-12 * h.norm());
        let g = es.vectors.adjoint() * &es.vectors;
        assert!((g - CMatrix::identity(n, n)).norm() < 1e-12);
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }
}
