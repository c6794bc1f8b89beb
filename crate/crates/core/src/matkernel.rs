//! Dense Hermitian linear algebra: a cyclic Jacobi eigensolver and the
//! spectral queries built on it (PSD test, rank, support projection,
//! nullspace, operator norm).
//!
//! Matrices in this crate are small (at most a few hundred rows), so the
//! solver favors accuracy and determinism over asymptotic speed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Maximum number of full Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Numerical thresholds shared by every module.
///
/// `eps_rank` is relative: an eigenvalue counts as nonzero when it exceeds
/// `eps_rank * ||H||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eps_psd: f64,
    pub eps_rank: f64,
    pub eps_eq: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            eps_psd: 1e-9,
            eps_rank: 1e-7,
            eps_eq: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(eps_psd: f64, eps_rank: f64, eps_eq: f64) -> Result<Self> {
        let tol = Self {
            eps_psd,
            eps_rank,
            eps_eq,
        };
        tol.check()?;
        Ok(tol)
    }

    pub fn check(&self) -> Result<()> {
        let all_positive = [self.eps_psd, self.eps_rank, self.eps_eq]
            .iter()
            .all(|e| e.is_finite() && *e > 0.0);
        if !all_positive {
            return Err(Error::InvalidArgument(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.eps_rank < self.eps_psd {
            return Err(Error::InvalidArgument(
                "eps_rank must be at least eps_psd".into(),
            ));
        }
        Ok(())
    }

    /// Absolute eigenvalue cutoff for a matrix of operator norm `norm`.
    pub fn rank_threshold(&self, norm: f64) -> f64 {
        self.eps_rank * norm
    }

    /// Same tolerance with `eps_rank` scaled by `factor`.
    pub fn widened(&self, factor: f64) -> Self {
        Self {
            eps_rank: self.eps_rank * factor,
            ..*self
        }
    }
}

/// A complex Hermitian matrix. Construction symmetrizes the input, so the
/// Hermitian property holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Builds `(M + M*)/2`. Fails only for non-square input.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let n = m.nrows();
        let mut h = CMatrix::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
        }
        Self(h)
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn is_real(&self, eps: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= eps)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    /// `self + t * other`.
    pub fn add_scaled(&self, other: &Self, t: f64) -> Self {
        Self(&self.0 + other.0.map(|z| z * t))
    }
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
///
/// Gauge: the first component of each eigenvector whose modulus exceeds
/// `GAUGE_EPS` is real and positive.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

const GAUGE_EPS: f64 = 1e-12;

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn spectral_norm(&self) -> f64 {
        self.max().abs().max(self.min().abs())
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.n();
        let mut m = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            m += (v * v.adjoint()).map(|z| z * lambda);
        }
        m
    }

    /// Indices of eigenvalues above the rank threshold.
    pub fn support_indices(&self, tol: &Tolerance) -> Vec<usize> {
        let cut = tol.rank_threshold(self.spectral_norm());
        (0..self.n()).filter(|&k| self.values[k] > cut).collect()
    }
}

struct JacobiOutcome {
    values: Vec<f64>,
    vectors: CMatrix,
    sweeps: usize,
    off_norm: f64,
    converged: bool,
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi with unitary plane rotations
/// `J = [[c, s e^{i phi}], [-s e^{-i phi}, c]]` on rows/columns (p, q),
/// where `phi` is the argument of `a_pq`. Real input stays exactly real
/// because the phase factor is then `+-1`.
fn jacobi(h: &HermitianMatrix) -> JacobiOutcome {
    let n = h.n();
    let mut a = h.matrix().clone();
    let mut v = CMatrix::identity(n, n);
    let fro = a.norm();
    let elem_cut = f64::EPSILON * fro / (n.max(1) as f64);

    let mut sweeps = 0;
    let mut converged = n <= 1 || fro == 0.0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= elem_cut {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_ph = phase * s;
                let s_ph_conj = s_ph.conj();

                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s_ph_conj;
                    a[(k, q)] = akp * s_ph + akq * c;
                }
                // A <- J* A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s_ph;
                    a[(q, k)] = apk * s_ph_conj + aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                // V <- V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s_ph_conj;
                    v[(k, q)] = vkp * s_ph + vkq * c;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).clone_owned();
        if let Some(lead) = col.iter().find(|z| z.norm() > GAUGE_EPS).copied() {
            let fix = lead.conj() / lead.norm();
            col.iter_mut().for_each(|z| *z *= fix);
        }
        vectors.set_column(dst, &col);
    }

    JacobiOutcome {
        values,
        vectors,
        sweeps,
        off_norm: off_diagonal_norm(&a),
        converged,
    }
}

/// Full spectral decomposition of `h`.
pub fn eigen(h: &HermitianMatrix, _tol: &Tolerance) -> Result<EigenDecomposition> {
    let out = jacobi(h);
    if !out.converged {
        return Err(Error::NoConvergence {
            sweeps: out.sweeps,
            residual: out.off_norm,
        });
    }
    Ok(EigenDecomposition {
        values: out.values,
        vectors: out.vectors,
    })
}

pub fn min_eigenvalue(h: &HermitianMatrix, tol: &Tolerance) -> Result<f64> {
    Ok(eigen(h, tol)?.min())
}

pub fn is_psd(h: &HermitianMatrix, tol: &Tolerance) -> bool {
    match eigen(h, tol) {
        Ok(e) => e.min() >= -tol.eps_psd,
        Err(_) => false,
    }
}

fn psd_eigen(h: &HermitianMatrix, tol: &Tolerance) -> Result<EigenDecomposition> {
    let e = eigen(h, tol)?;
    if e.min() < -tol.eps_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    Ok(e)
}

/// Projection onto the span of the given eigenvector columns.
pub(crate) fn projector(e: &EigenDecomposition, indices: &[usize]) -> CMatrix {
    let n = e.n();
    let mut p = CMatrix::zeros(n, n);
    for &k in indices {
        let v = e.vectors.column(k);
        p += v * v.adjoint();
    }
    p
}

/// Rank (eigenvalues above `eps_rank * ||H||`) and the support projection.
pub fn rank_and_support(h: &HermitianMatrix, tol: &Tolerance) -> Result<(usize, CMatrix)> {
    let e = psd_eigen(h, tol)?;
    let idx = e.support_indices(tol);
    Ok((idx.len(), projector(&e, &idx)))
}

pub fn rank(h: &HermitianMatrix, tol: &Tolerance) -> Result<usize> {
    let e = psd_eigen(h, tol)?;
    Ok(e.support_indices(tol).len())
}

/// Orthonormal basis of the numerical kernel, one vector per column.
pub fn nullspace(h: &HermitianMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let e = psd_eigen(h, tol)?;
    let cut = tol.rank_threshold(e.spectral_norm());
    let kernel: Vec<usize> = (0..e.n()).filter(|&k| e.values[k] <= cut).collect();
    let mut basis = CMatrix::zeros(e.n(), kernel.len());
    for (dst, &k) in kernel.iter().enumerate() {
        basis.set_column(dst, &e.vectors.column(k));
    }
    Ok(basis)
}

/// Largest absolute eigenvalue.
pub fn operator_norm(h: &HermitianMatrix) -> f64 {
    let out = jacobi(h);
    out.values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Spectral norm of an arbitrary (possibly rectangular) complex matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let gram = HermitianMatrix::symmetrized(m.adjoint() * m);
    operator_norm(&gram).max(0.0).sqrt()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Distance between the column spans of two matrices with orthonormal or
/// arbitrary columns: spectral norm of the difference of the orthogonal
/// projections onto each span.
pub fn subspace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let pa = span_projector(a);
    let pb = span_projector(b);
    spectral_norm(&(pa - pb))
}

/// Orthogonal projection onto the column span of `m`.
pub fn span_projector(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut q: Vec<nalgebra::DVector<C64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).clone_owned();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &q {
                let proj = u.dotc(&v);
                v -= u * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-10 {
            q.push(v / C64::new(norm, 0.0));
        }
    }
    let mut p = CMatrix::zeros(n, n);
    for u in &q {
        p += u * u.adjoint();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(n: usize) -> HermitianMatrix {
        HermitianMatrix::new(CMatrix::from_element(n, n, C64::new(1.0, 0.0))).unwrap()
    }

    #[test]
    fn identity_spectrum() {
        let tol = Tolerance::default();
        let e = eigen(&HermitianMatrix::identity(3), &tol).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
        assert!(max_abs_diff(&e.reconstruct(), &CMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn all_ones_spectrum() {
        let tol = Tolerance::default();
        let e = eigen(&ones(3), &tol).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!(e.values[1].abs() < 1e-14 && e.values[2].abs() < 1e-14);
        // gauge: leading component real positive
        let lead = e.vectors[(0, 0)];
        assert!(lead.re > 0.0 && lead.im == 0.0);
    }

    #[test]
    fn psd_checks() {
        let tol = Tolerance::default();
        assert!(is_psd(&HermitianMatrix::identity(4), &tol));
        let d = HermitianMatrix::from_real(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(!is_psd(&d, &tol));
        assert!(matches!(
            rank_and_support(&d, &tol),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn rank_and_nullspace_of_identity_and_ones() {
        let tol = Tolerance::default();
        let (r, p) = rank_and_support(&HermitianMatrix::identity(5), &tol).unwrap();
        assert_eq!(r, 5);
        assert!(max_abs_diff(&p, &CMatrix::identity(5, 5)) < 1e-15);
        assert_eq!(nullspace(&HermitianMatrix::identity(5), &tol).unwrap().ncols(), 0);

        let k = nullspace(&ones(3), &tol).unwrap();
        assert_eq!(k.ncols(), 2);
        let all = nalgebra::DVector::from_element(3, C64::new(1.0, 0.0));
        for j in 0..2 {
            assert!(all.dotc(&k.column(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_matrix_norm() {
        assert_eq!(operator_norm(&HermitianMatrix::zeros(4)), 0.0);
        let tol = Tolerance::default();
        assert_eq!(rank(&HermitianMatrix::zeros(3), &tol).unwrap(), 0);
    }

    #[test]
    fn real_input_gives_real_vectors() {
        let tol = Tolerance::default();
        let h = HermitianMatrix::from_real(&[
            vec![2.0, -1.0, 0.5],
            vec![-1.0, 3.0, 0.25],
            vec![0.5, 0.25, 1.0],
        ])
        .unwrap();
        let e = eigen(&h, &tol).unwrap();
        assert!(e.vectors.iter().all(|z| z.im == 0.0));
        assert!(max_abs_diff(&e.reconstruct(), h.matrix()) < 1e-14);
    }

    #[test]
    fn symmetrizes_last_bit_asymmetry() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(0.5, 0.1);
        m[(1, 0)] = C64::new(0.5 + 1e-17, -0.1);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            HermitianMatrix::new(CMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-9, 1e-7, 1e-9).is_ok());
        assert!(Tolerance::new(1e-9, 1e-10, 1e-9).is_err());
        assert!(Tolerance::new(0.0, 1e-7, 1e-9).is_err());
    }

    #[test]
    fn subspace_distance_basics() {
        let a = CMatrix::from_fn(3, 1, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let b = a.map(|z| z * C64::new(0.0, 2.0));
        assert!(subspace_distance(&a, &b) < 1e-15);
        let c = CMatrix::from_fn(3, 1, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
        assert!((subspace_distance(&a, &c) - 1.0).abs() < 1e-15);
    }
}
