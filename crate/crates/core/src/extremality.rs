//! Extreme points of the complex and real elliptopes.
//!
//! A correlation matrix `X = F*F` (frame `F` in C^r, r = rank X) admits a
//! two-sided perturbation `X + tY` inside the elliptope iff `Y` is a
//! nonzero Hermitian zero-diagonal matrix with `Y = PYP`. Every such `Y`
//! is `F*ZF` for an r x r Hermitian `Z` with `<Z f_j, f_j> = 0` for all j,
//! so extremality reduces to a small linear system in frame coordinates.

use crate::correlation::{self, CorrelationMatrix, Frame};
use crate::error::{Error, Result};
use crate::matkernel::{self, CMatrix, HermitianMatrix, Tolerance, C64};

/// Real basis of the admissible perturbation directions at a point.
#[derive(Debug, Clone)]
pub struct PerturbationSpace {
    /// Directions `Y = F*ZF` in matrix coordinates.
    pub basis: Vec<HermitianMatrix>,
    /// The same directions as r x r Hermitian `Z` in frame coordinates,
    /// orthonormal for the real Frobenius inner product.
    pub frame_coords: Vec<CMatrix>,
    pub frame: Frame,
    pub real_mode: bool,
}

impl PerturbationSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Index of the basis direction with the largest Frobenius norm.
    fn widest(&self) -> Option<usize> {
        self.basis
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.matrix().norm().total_cmp(&b.1.matrix().norm()).then(b.0.cmp(&a.0)))
            .map(|(k, _)| k)
    }
}

#[derive(Debug, Clone)]
pub struct ExtremalityReport {
    pub is_extreme: bool,
    pub witness: Option<HermitianMatrix>,
    pub rank: usize,
    /// `rank^2 <= n` in complex mode, `rank(rank+1)/2 <= n` in real mode.
    pub rank_bound_satisfied: bool,
    pub dimension: usize,
    pub real_mode: bool,
}

#[derive(Debug, Clone)]
pub struct DecompositionTerm {
    pub weight: f64,
    pub matrix: CorrelationMatrix,
    pub rank: usize,
    pub extreme: bool,
}

#[derive(Debug, Clone)]
pub struct ExtremeDecomposition {
    pub terms: Vec<DecompositionTerm>,
    pub real_mode: bool,
}

impl ExtremeDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let n = self.terms[0].matrix.n();
        self.terms.iter().fold(CMatrix::zeros(n, n), |acc, t| {
            acc + t.matrix.matrix().map(|z| z * t.weight)
        })
    }
}

pub fn rank_bound_holds(rank: usize, n: usize, real_mode: bool) -> bool {
    if real_mode {
        rank * (rank + 1) / 2 <= n
    } else {
        rank * rank <= n
    }
}

/// Frobenius-orthonormal basis of r x r Hermitian (or real symmetric)
/// matrices: diagonal units, `(E_ab + E_ba)/sqrt 2` and, in complex mode,
/// `i (E_ab - E_ba)/sqrt 2`.
fn hermitian_basis(r: usize, real_mode: bool) -> Vec<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for a in 0..r {
        let mut e = CMatrix::zeros(r, r);
        e[(a, a)] = C64::new(1.0, 0.0);
        out.push(e);
    }
    for a in 0..r {
        for b in (a + 1)..r {
            let mut e = CMatrix::zeros(r, r);
            e[(a, b)] = C64::new(s, 0.0);
            e[(b, a)] = C64::new(s, 0.0);
            out.push(e);
            if !real_mode {
                let mut e = CMatrix::zeros(r, r);
                e[(a, b)] = C64::new(0.0, s);
                e[(b, a)] = C64::new(0.0, -s);
                out.push(e);
            }
        }
    }
    out
}

fn quadratic_form(z: &CMatrix, f: &nalgebra::DVector<C64>) -> f64 {
    f.dotc(&(z * f)).re
}

pub(crate) fn perturbation_space_of_frame(
    frame: &Frame,
    real_mode: bool,
    tol: &Tolerance,
) -> Result<PerturbationSpace> {
    let r = frame.r();
    let n = frame.len();
    let units = hermitian_basis(r, real_mode);
    let m = units.len();
    let columns: Vec<_> = (0..n).map(|j| frame.vector(j)).collect();

    // constraint matrix A (n x m), then kernel of A via the spectrum of A^T A
    let a = nalgebra::DMatrix::<f64>::from_fn(n, m, |j, p| quadratic_form(&units[p], &columns[j]));
    let ata = a.transpose() * &a;
    let gram = HermitianMatrix::symmetrized(ata.map(|v| C64::new(v, 0.0)));
    let e = matkernel::eigen(&gram, tol)?;
    let cut = tol.eps_rank * tol.eps_rank * e.max().max(1.0);

    let mut frame_coords = Vec::new();
    let mut basis = Vec::new();
    for k in 0..m {
        if e.values[k] > cut {
            continue;
        }
        let mut z = CMatrix::zeros(r, r);
        for (p, unit) in units.iter().enumerate() {
            z += unit.map(|u| u * e.vectors[(p, k)].re);
        }
        let y = frame.vectors().adjoint() * &z * frame.vectors();
        basis.push(HermitianMatrix::symmetrized(y));
        frame_coords.push(z);
    }
    Ok(PerturbationSpace {
        basis,
        frame_coords,
        frame: frame.clone(),
        real_mode,
    })
}

fn require_real(x: &CorrelationMatrix, real_mode: bool) -> Result<()> {
    if real_mode && !x.is_real() {
        let max_imag = x.matrix().iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
        return Err(Error::NotReal { max_imag });
    }
    Ok(())
}

/// Basis of `{Y Hermitian (real if real_mode), diag Y = 0, Y = PYP}`.
pub fn perturbation_space(
    x: &CorrelationMatrix,
    real_mode: bool,
    tol: &Tolerance,
) -> Result<PerturbationSpace> {
    require_real(x, real_mode)?;
    let frame = correlation::frame_factor(x, tol)?;
    perturbation_space_of_frame(&frame, real_mode, tol)
}

pub fn is_extreme(
    x: &CorrelationMatrix,
    real_mode: bool,
    tol: &Tolerance,
) -> Result<ExtremalityReport> {
    let space = perturbation_space(x, real_mode, tol)?;
    let rank = space.frame.r();
    let witness = space.widest().map(|k| space.basis[k].clone());
    Ok(ExtremalityReport {
        is_extreme: witness.is_none(),
        witness,
        rank,
        rank_bound_satisfied: rank_bound_holds(rank, x.n(), real_mode),
        dimension: space.dimension(),
        real_mode,
    })
}

/// Step bounds from the spectrum of a frame-coordinate direction `Z`:
/// `I + tZ` is PSD exactly for `t` in `[-1/lambda_max, -1/lambda_min]`.
fn steps_from_spectrum(z: &CMatrix, tol: &Tolerance) -> Result<(f64, f64)> {
    let e = matkernel::eigen(&HermitianMatrix::symmetrized(z.clone()), tol)?;
    let scale = e.spectral_norm();
    if scale <= tol.eps_eq {
        return Err(Error::DegenerateDirection);
    }
    if e.min() >= -tol.eps_eq * scale || e.max() <= tol.eps_eq * scale {
        return Err(Error::InvalidArgument(
            "direction is semidefinite; it cannot have zero diagonal".into(),
        ));
    }
    Ok((-1.0 / e.max(), -1.0 / e.min()))
}

/// Largest interval `[t_minus, t_plus]` with `X + tY` PSD.
///
/// Computed in whitened support coordinates: with `X = V diag(lambda) V*`
/// on its support, `X + tY` is PSD iff `I + tZ` is, where
/// `Z = diag(lambda)^{-1/2} V* Y V diag(lambda)^{-1/2}`.
pub fn max_step(
    x: &CorrelationMatrix,
    y: &HermitianMatrix,
    tol: &Tolerance,
) -> Result<(f64, f64)> {
    if y.n() != x.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            found: y.n(),
        });
    }
    let y_size = y.matrix().iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    if y_size <= tol.eps_eq {
        return Err(Error::DegenerateDirection);
    }
    if (0..y.n()).any(|i| y.matrix()[(i, i)].norm() > tol.eps_eq * y_size.max(1.0)) {
        return Err(Error::InvalidArgument("direction must have zero diagonal".into()));
    }
    let e = matkernel::eigen(x.hermitian(), tol)?;
    let support = e.support_indices(tol);
    let p = matkernel::projector(&e, &support);
    let pyp = &p * y.matrix() * &p;
    let deviation = matkernel::max_abs_diff(&pyp, y.matrix());
    if deviation > tol.eps_eq.max(1e-8) * y_size.max(1.0) {
        return Err(Error::OffSupport { deviation });
    }
    let r = support.len();
    let w = CMatrix::from_fn(x.n(), r, |i, a| {
        e.vectors[(i, support[a])] / e.values[support[a]].sqrt()
    });
    let z = w.adjoint() * y.matrix() * &w;
    steps_from_spectrum(&z, tol)
}

pub fn rank_one_matrix(phases: &[C64], tol: &Tolerance) -> Result<CorrelationMatrix> {
    correlation::check_unimodular(phases, tol.eps_eq)?;
    let n = phases.len();
    let m = CMatrix::from_fn(n, n, |i, j| phases[i].conj() * phases[j]);
    Ok(CorrelationMatrix::from_trusted(m, tol.eps_eq))
}

/// Phases `zeta` with `zeta_0 = 1` and `X = (conj(zeta_i) zeta_j)` when `X`
/// is rank one within `eps`; `None` otherwise.
pub fn rank_one_phases(x: &CorrelationMatrix, eps: f64) -> Option<Vec<C64>> {
    let n = x.n();
    let phases: Vec<C64> = (0..n)
        .map(|j| {
            let z = x.entry(0, j);
            if z.norm() > 0.5 {
                z / z.norm()
            } else {
                C64::new(f64::NAN, f64::NAN)
            }
        })
        .collect();
    if phases.iter().any(|z| z.re.is_nan()) {
        return None;
    }
    let ok = (0..n).all(|i| {
        (0..n).all(|j| (phases[i].conj() * phases[j] - x.entry(i, j)).norm() <= eps)
    });
    ok.then_some(phases)
}

/// Endpoint frame of `F*(I + tZ)F` with the eigenvalues of `I + tZ` at or
/// below the rank cutoff removed.
fn endpoint_frame(frame: &Frame, z: &CMatrix, t: f64, tol: &Tolerance) -> Result<Frame> {
    let r = frame.r();
    let m = CMatrix::identity(r, r) + z.map(|v| v * t);
    let e = matkernel::eigen(&HermitianMatrix::symmetrized(m), tol)?;
    let keep = e.support_indices(tol);
    let g = CMatrix::from_fn(keep.len(), r, |a, b| {
        e.vectors[(b, keep[a])].conj() * e.values[keep[a]].sqrt()
    });
    let mut vectors = g * frame.vectors();
    if frame.is_real() && z.iter().all(|v| v.im == 0.0) {
        vectors.iter_mut().for_each(|v| v.im = 0.0);
    }
    let mut out = Frame::new(vectors);
    out.normalize_columns();
    Ok(out)
}

fn peel(
    frame: Frame,
    weight: f64,
    real_mode: bool,
    tol: &Tolerance,
    depth: usize,
    max_depth: usize,
    leaves: &mut Vec<(f64, Frame)>,
) -> Result<()> {
    if depth > max_depth {
        return Err(Error::RecursionOverflow { depth });
    }
    let space = perturbation_space_of_frame(&frame, real_mode, tol)?;
    let Some(k) = space.widest() else {
        leaves.push((weight, frame));
        return Ok(());
    };
    let z = &space.frame_coords[k];
    let (t_minus, t_plus) = steps_from_spectrum(z, tol)?;
    let r = frame.r();

    let mut ends = None;
    for local in [*tol, tol.widened(10.0)] {
        let lo = endpoint_frame(&frame, z, t_minus, &local)?;
        let hi = endpoint_frame(&frame, z, t_plus, &local)?;
        if lo.r() < r && hi.r() < r {
            ends = Some((lo, hi));
            break;
        }
    }
    let (lo, hi) = ends.ok_or(Error::RecursionOverflow { depth })?;
    let span = t_plus - t_minus;
    let w_lo = t_plus / span;
    let w_hi = -t_minus / span;
    peel(lo, weight * w_lo, real_mode, tol, depth + 1, max_depth, leaves)?;
    peel(hi, weight * w_hi, real_mode, tol, depth + 1, max_depth, leaves)
}

/// Writes `X` as a convex combination of extreme points by repeatedly
/// moving to both ends of a perturbation line. Rank drops strictly along
/// every branch, so there are at most `2^(rank-1)` terms.
pub fn decompose_extreme(
    x: &CorrelationMatrix,
    real_mode: bool,
    tol: &Tolerance,
) -> Result<ExtremeDecomposition> {
    require_real(x, real_mode)?;
    let frame = correlation::frame_factor(x, tol)?;
    let max_depth = frame.r() + 1;
    let mut leaves = Vec::new();
    peel(frame, 1.0, real_mode, tol, 0, max_depth, &mut leaves)?;
    let terms = leaves
        .into_iter()
        .map(|(weight, f)| DecompositionTerm {
            weight,
            rank: f.r(),
            matrix: CorrelationMatrix::from_frame(&f, tol.eps_eq),
            extreme: true,
        })
        .collect();
    Ok(ExtremeDecomposition { terms, real_mode })
}
