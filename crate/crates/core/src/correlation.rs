//! Correlation matrices (complex PSD, unit diagonal), their frame
//! factorization, and the operations under which the moment sets are
//! closed: diagonal-unitary and permutation conjugation, Schur products
//! and convex combinations.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matkernel::{self, CMatrix, HermitianMatrix, Tolerance, C64};

/// An element of the complex elliptope: Hermitian, PSD, unit diagonal.
///
/// The diagonal is stored as exactly 1. When every imaginary part is
/// within `eps_eq` the matrix is flagged real and the imaginary parts are
/// stored as exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    h: HermitianMatrix,
    is_real: bool,
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.h.n()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.h.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.h.matrix()[(i, j)]
    }

    pub fn identity(n: usize) -> Self {
        Self {
            h: HermitianMatrix::identity(n),
            is_real: true,
        }
    }

    /// Wraps a matrix known to be a correlation matrix up to round-off:
    /// symmetrizes, pins the diagonal to 1 and detects realness.
    pub(crate) fn from_trusted(m: CMatrix, eps_eq: f64) -> Self {
        let mut h = HermitianMatrix::symmetrized(m).into_matrix();
        let n = h.nrows();
        for i in 0..n {
            h[(i, i)] = C64::new(1.0, 0.0);
        }
        let is_real = h.iter().all(|z| z.im.abs() <= eps_eq);
        if is_real {
            h.iter_mut().for_each(|z| z.im = 0.0);
        }
        Self {
            h: HermitianMatrix::symmetrized(h),
            is_real,
        }
    }

    /// Gram matrix of the frame's columns.
    pub fn from_frame(frame: &Frame, eps_eq: f64) -> Self {
        Self::from_trusted(frame.gram(), eps_eq)
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn principal(&self, indices: &[usize]) -> Self {
        let m = CMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            self.entry(indices[a], indices[b])
        });
        Self {
            h: HermitianMatrix::symmetrized(m),
            is_real: self.is_real,
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            h: HermitianMatrix::symmetrized(self.matrix().map(|z| z.conj())),
            is_real: self.is_real,
        }
    }
}

/// Validates `m` as a correlation matrix.
///
/// Indices reported in errors are 0-based.
pub fn validate(m: &CMatrix, tol: &Tolerance) -> Result<CorrelationMatrix> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            let deviation = (m[(i, j)] - m[(j, i)].conj()).norm();
            if deviation > tol.eps_eq * m[(i, j)].norm().max(1.0) {
                return Err(Error::NotHermitian {
                    row: i,
                    col: j,
                    deviation,
                });
            }
        }
    }
    for i in 0..n {
        let d = m[(i, i)].re;
        if (d - 1.0).abs() > tol.eps_eq {
            return Err(Error::NotUnitDiagonal { index: i, value: d });
        }
    }
    let x = CorrelationMatrix::from_trusted(m.clone(), tol.eps_eq);
    let lambda_min = matkernel::min_eigenvalue(x.hermitian(), tol)?;
    if lambda_min < -tol.eps_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: lambda_min,
        });
    }
    Ok(x)
}

/// A list of unit vectors `f_1..f_n` in C^r stored as the columns of an
/// `r x n` matrix, spanning C^r.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: CMatrix,
}

impl Frame {
    /// Wraps the columns of `vectors`. Columns are not renormalized.
    pub fn new(vectors: CMatrix) -> Self {
        Self { vectors }
    }

    /// Ambient dimension.
    pub fn r(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, j: usize) -> DVector<C64> {
        self.vectors.column(j).clone_owned()
    }

    pub fn is_real(&self) -> bool {
        self.vectors.iter().all(|z| z.im == 0.0)
    }

    /// `F* F`.
    pub fn gram(&self) -> CMatrix {
        self.vectors.adjoint() * &self.vectors
    }

    /// Largest deviation of a column norm from 1.
    pub fn unit_defect(&self) -> f64 {
        (0..self.len())
            .map(|j| (self.vectors.column(j).norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn normalize_columns(&mut self) {
        for j in 0..self.len() {
            let norm = self.vectors.column(j).norm();
            if norm > 0.0 {
                self.vectors
                    .column_mut(j)
                    .iter_mut()
                    .for_each(|z| *z /= norm);
            }
        }
    }
}

/// Frame factorization `X = F*F` with `F = diag(lambda)^{1/2} V*`, where
/// `lambda` are the nonzero eigenvalues (descending) and `V` their
/// eigenvectors. Real input yields a real frame.
pub fn frame_factor(x: &CorrelationMatrix, tol: &Tolerance) -> Result<Frame> {
    let e = matkernel::eigen(x.hermitian(), tol)?;
    if e.min() < -tol.eps_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: e.min(),
        });
    }
    let support = e.support_indices(tol);
    let n = x.n();
    let mut f = CMatrix::zeros(support.len(), n);
    for (row, &k) in support.iter().enumerate() {
        let scale = e.values[k].sqrt();
        for j in 0..n {
            f[(row, j)] = e.vectors[(j, k)].conj() * scale;
        }
    }
    if x.is_real() {
        f.iter_mut().for_each(|z| z.im = 0.0);
    }
    let mut frame = Frame::new(f);
    frame.normalize_columns();
    Ok(frame)
}

fn check_same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

pub fn schur_product(
    x: &CorrelationMatrix,
    y: &CorrelationMatrix,
    tol: &Tolerance,
) -> Result<CorrelationMatrix> {
    check_same_n(x.n(), y.n())?;
    validate(&x.matrix().component_mul(y.matrix()), tol)
}

pub(crate) fn check_unimodular(phases: &[C64], eps: f64) -> Result<()> {
    for (index, z) in phases.iter().enumerate() {
        let modulus = z.norm();
        if (modulus - 1.0).abs() > eps {
            return Err(Error::NotUnimodular { index, modulus });
        }
    }
    Ok(())
}

/// `D* X D` for `D = diag(phases)`: entry (i, j) becomes
/// `conj(d_i) x_ij d_j`.
pub fn conjugate_diag(
    x: &CorrelationMatrix,
    phases: &[C64],
    tol: &Tolerance,
) -> Result<CorrelationMatrix> {
    check_same_n(x.n(), phases.len())?;
    check_unimodular(phases, tol.eps_eq)?;
    let m = CMatrix::from_fn(x.n(), x.n(), |i, j| {
        phases[i].conj() * x.entry(i, j) * phases[j]
    });
    Ok(CorrelationMatrix::from_trusted(m, tol.eps_eq))
}

pub(crate) fn check_permutation(sigma: &[usize]) -> Result<()> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(Error::NotPermutation { n });
        }
        seen[s] = true;
    }
    Ok(())
}

/// Relabels indices by `sigma`: output entry `(sigma[a], sigma[b])` is
/// `x_ab`, i.e. output `(i, j) = x_{sigma^-1(i), sigma^-1(j)}`.
pub fn conjugate_perm(x: &CorrelationMatrix, sigma: &[usize]) -> Result<CorrelationMatrix> {
    check_same_n(x.n(), sigma.len())?;
    check_permutation(sigma)?;
    let n = x.n();
    let mut m = CMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            m[(sigma[a], sigma[b])] = x.entry(a, b);
        }
    }
    Ok(CorrelationMatrix {
        h: HermitianMatrix::symmetrized(m),
        is_real: x.is_real(),
    })
}

/// Weighted sum of correlation matrices with weights summing to 1.
pub fn convex_combine(
    terms: &[(f64, CorrelationMatrix)],
    tol: &Tolerance,
) -> Result<CorrelationMatrix> {
    let first = terms.first().ok_or(Error::WeightsNotNormalized { sum: 0.0 })?;
    let n = first.1.n();
    let mut sum = 0.0;
    let mut m = CMatrix::zeros(n, n);
    for (w, x) in terms {
        check_same_n(n, x.n())?;
        if *w < 0.0 {
            return Err(Error::InvalidArgument(format!("negative weight {w}")));
        }
        sum += w;
        m += x.matrix().map(|z| z * *w);
    }
    if (sum - 1.0).abs() > tol.eps_eq {
        return Err(Error::WeightsNotNormalized { sum });
    }
    validate(&m, tol)
}

/// Conjugates `x` by the diagonal unitary that makes row `k` real and
/// nonnegative. The phase for index j is `conj(x_kj)/|x_kj|`; indices
/// where `|x_kj| <= eps_eq` get phase 1.
pub fn realify_row(
    x: &CorrelationMatrix,
    k: usize,
    tol: &Tolerance,
) -> Result<(Vec<C64>, CorrelationMatrix)> {
    if k >= x.n() {
        return Err(Error::InvalidArgument(format!(
            "row {k} out of range for n = {}",
            x.n()
        )));
    }
    let phases: Vec<C64> = (0..x.n())
        .map(|j| {
            let z = x.entry(k, j);
            if z.norm() > tol.eps_eq {
                z.conj() / z.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        })
        .collect();
    let mut y = conjugate_diag(x, &phases, tol)?;
    // row k is real by construction; clear round-off
    let mut m = y.h.clone().into_matrix();
    for j in 0..x.n() {
        m[(k, j)] = C64::new(m[(k, j)].re, 0.0);
        m[(j, k)] = C64::new(m[(j, k)].re, 0.0);
    }
    y = CorrelationMatrix::from_trusted(m, tol.eps_eq);
    Ok((phases, y))
}

/// `(X - conj(X))/2`: Hermitian, purely imaginary, zero diagonal.
pub fn skew_part(x: &CorrelationMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrized(x.matrix().map(|z| C64::new(0.0, z.im)))
}

/// `(X + conj(X))/2`, a real correlation matrix.
pub fn real_part(x: &CorrelationMatrix) -> CorrelationMatrix {
    CorrelationMatrix::from_trusted(x.matrix().map(|z| C64::new(z.re, 0.0)), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn identity_is_real_correlation() {
        let x = validate(&CMatrix::identity(4, 4), &tol()).unwrap();
        assert!(x.is_real());
    }

    #[test]
    fn x4_is_complex_correlation() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        assert!(!x.is_real());
    }

    #[test]
    fn rejects_non_unit_diagonal() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(2.0, 0.0),
        ]));
        assert_eq!(
            validate(&m, &tol()),
            Err(Error::NotUnitDiagonal {
                index: 1,
                value: 2.0
            })
        );
    }

    #[test]
    fn rejects_non_hermitian_and_non_psd() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(
            validate(&m, &tol()),
            Err(Error::NotHermitian { row: 0, col: 1, .. })
        ));
        m[(1, 0)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(2.0, 0.0);
        m[(1, 0)] = C64::new(2.0, 0.0);
        match validate(&m, &tol()) {
            Err(Error::NotPsd { min_eigenvalue }) => assert!((min_eigenvalue + 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn frame_of_identity_is_orthonormal() {
        let f = frame_factor(&CorrelationMatrix::identity(2), &tol()).unwrap();
        assert_eq!(f.r(), 2);
        assert!(matkernel::max_abs_diff(&f.gram(), &CMatrix::identity(2, 2)) < 1e-15);
        let u = f.vectors();
        assert!(matkernel::max_abs_diff(&(u * u.adjoint()), &CMatrix::identity(2, 2)) < 1e-15);
    }

    #[test]
    fn frame_of_x4_lives_in_c2() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        let f = frame_factor(&x, &tol()).unwrap();
        assert_eq!(f.r(), 2);
        assert!(matkernel::max_abs_diff(&f.gram(), x.matrix()) < 1e-9);
        // the frame given alongside the matrix reproduces it as well
        let given = Frame::new(fixtures::x4_frame());
        assert!(matkernel::max_abs_diff(&given.gram(), x.matrix()) < 1e-15);
    }

    #[test]
    fn frame_of_prop36_is_real_in_r3() {
        let x = validate(&fixtures::f6_matrix(), &tol()).unwrap();
        assert!(x.is_real());
        let f = frame_factor(&x, &tol()).unwrap();
        assert_eq!(f.r(), 3);
        assert!(f.is_real());
        assert!(matkernel::max_abs_diff(&f.gram(), x.matrix()) < 1e-9);
    }

    #[test]
    fn schur_with_all_ones_is_identity_op() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        let ones = validate(&CMatrix::from_element(4, 4, C64::new(1.0, 0.0)), &tol()).unwrap();
        let y = schur_product(&x, &ones, &tol()).unwrap();
        assert!(matkernel::max_abs_diff(y.matrix(), x.matrix()) < 1e-15);
        let bad = CorrelationMatrix::identity(3);
        assert!(matches!(
            schur_product(&x, &bad, &tol()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn schur_of_x4_with_its_conjugate() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        let y = schur_product(&x, &x.conj(), &tol()).unwrap();
        assert!(y.is_real());
        for i in 0..4 {
            for j in 0..4 {
                let expect = x.entry(i, j).norm_sqr();
                assert!((y.entry(i, j).re - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn diag_conjugation_reproduces_worked_example() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        let ph = fixtures::x4_phase_fix();
        let y = conjugate_diag(&x, &ph, &tol()).unwrap();
        let s = skew_part(&y);
        let expect = fixtures::x4_phase_fixed_skew();
        assert!(matkernel::max_abs_diff(s.matrix(), &expect) < 1e-15);
        let unit = vec![C64::new(1.0, 0.0); 4];
        let same = conjugate_diag(&x, &unit, &tol()).unwrap();
        assert_eq!(same.matrix(), x.matrix());
        let bad = vec![C64::new(2.0, 0.0); 4];
        assert!(matches!(
            conjugate_diag(&x, &bad, &tol()),
            Err(Error::NotUnimodular { index: 0, .. })
        ));
    }

    #[test]
    fn perm_conjugation_matches_naive_product() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        let sigma = [1, 0, 2, 3];
        let y = conjugate_perm(&x, &sigma).unwrap();
        // P with P e_a = e_{sigma(a)}; output = P X P^T
        let p = CMatrix::from_fn(4, 4, |i, a| {
            C64::new(if sigma[a] == i { 1.0 } else { 0.0 }, 0.0)
        });
        let naive = &p * x.matrix() * p.transpose();
        assert!(matkernel::max_abs_diff(y.matrix(), &naive) < 1e-15);
        assert_eq!(y.entry(0, 2), x.entry(1, 2));
        assert!(matches!(
            conjugate_perm(&x, &[0, 0, 1, 2]),
            Err(Error::NotPermutation { .. })
        ));
        let id = conjugate_perm(&x, &[0, 1, 2, 3]).unwrap();
        assert_eq!(id.matrix(), x.matrix());
    }

    #[test]
    fn convex_combination_of_example_rank_ones() {
        let (r1, r2) = fixtures::real3_rank_one_parts();
        let a = validate(&r1, &tol()).unwrap();
        let b = validate(&r2, &tol()).unwrap();
        let x = convex_combine(&[(0.5, a.clone()), (0.5, b)], &tol()).unwrap();
        assert!(x.is_real());
        assert!(matkernel::max_abs_diff(x.matrix(), &fixtures::real3_matrix()) < 1e-15);
        let one = convex_combine(&[(1.0, a.clone())], &tol()).unwrap();
        assert_eq!(one.matrix(), a.matrix());
        assert!(matches!(
            convex_combine(&[(0.7, a.clone()), (0.7, a)], &tol()),
            Err(Error::WeightsNotNormalized { .. })
        ));
    }

    #[test]
    fn interpolation_toward_identity_stays_valid() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        for i in 0..=10 {
            let t = i as f64 / 10.0;
            let y = convex_combine(
                &[(t, x.clone()), (1.0 - t, CorrelationMatrix::identity(4))],
                &tol(),
            );
            assert!(y.is_ok(), "t = {t}");
        }
    }

    #[test]
    fn realify_row_three_of_x4_matches_worked_example() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        let (ph, y) = realify_row(&x, 2, &tol()).unwrap();
        let expect = fixtures::x4_phase_fix();
        for (a, b) in ph.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
        let s = skew_part(&y);
        for j in 0..4 {
            assert_eq!(s.matrix()[(2, j)], C64::new(0.0, 0.0));
        }
        let (ph2, _) = realify_row(&y, 2, &tol()).unwrap();
        assert!(ph2.iter().all(|z| (z.re.abs() - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12));
    }

    #[test]
    fn realify_real_matrix_uses_signs() {
        let x = validate(&fixtures::real3_matrix(), &tol()).unwrap();
        let (ph, y) = realify_row(&x, 0, &tol()).unwrap();
        assert!(ph.iter().all(|z| z.im == 0.0 && z.re.abs() == 1.0));
        assert!(y.is_real());
    }

    #[test]
    fn skew_part_of_x4() {
        let x = validate(&fixtures::x4_matrix(), &tol()).unwrap();
        let s = skew_part(&x);
        assert!(matkernel::max_abs_diff(s.matrix(), &fixtures::x4_skew()) < 1e-15);
        let r = skew_part(&CorrelationMatrix::identity(3));
        assert_eq!(matkernel::operator_norm(&r), 0.0);
    }
}
