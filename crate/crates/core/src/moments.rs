//! Moment matrices `(tr_k(V_i* V_j))` of unitary tuples, the tuple
//! constructions behind convexity and Schur-product closure, linear
//! relations forced by kernel vectors, explicit rank-one mixtures
//! certifying membership in the commuting moment set, and the case
//! analysis showing the real 6x6 fixture has no commuting realization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clifford::UnitaryTuple;
use crate::correlation::{self, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::extremality;
use crate::fixtures;
use crate::matkernel::{self, CMatrix, Tolerance, C64};
use crate::random;

/// Where a moment matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    FromTuple,
    RankOne,
    Tensor,
    BlockConvex,
    External,
}

#[derive(Debug, Clone)]
pub struct MomentMatrix {
    pub matrix: CorrelationMatrix,
    pub provenance: Provenance,
}

impl MomentMatrix {
    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }
}

/// Normalized trace of `a* b`.
fn trace_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    let k = a.nrows() as f64;
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<C64>() / k
}

/// `(tr_k(V_i* V_j))_{ij}`, validated as a correlation matrix.
pub fn moment_matrix(t: &UnitaryTuple, tol: &Tolerance) -> Result<MomentMatrix> {
    let n = t.n();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = trace_inner(t.get(i), t.get(j));
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
    Ok(MomentMatrix {
        matrix: correlation::validate(&m, tol)?,
        provenance: Provenance::FromTuple,
    })
}

/// Haar-distributed k x k unitary: QR of a complex Gaussian matrix with
/// the phases of `diag(R)` moved into `Q`.
pub fn haar_unitary_with<R: Rng + ?Sized>(k: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(k, k, |_, _| random::complex_gaussian(rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        u.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    u
}

pub fn haar_unitary(k: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(k, &mut rng)
}

/// `n` independent Haar unitaries of size `k` from one seeded stream.
pub fn haar_tuple(n: usize, k: usize, seed: u64) -> UnitaryTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_tuple_with(n, k, &mut rng)
}

pub fn haar_tuple_with<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> UnitaryTuple {
    UnitaryTuple::from_trusted((0..n).map(|_| haar_unitary_with(k, rng)).collect())
}

/// Componentwise tensor products; the moment matrix of the result is the
/// Schur product of the two moment matrices.
pub fn tensor_realize(t1: &UnitaryTuple, t2: &UnitaryTuple) -> Result<UnitaryTuple> {
    if t1.n() != t2.n() {
        return Err(Error::DimensionMismatch {
            expected: t1.n(),
            found: t2.n(),
        });
    }
    Ok(UnitaryTuple::from_trusted(
        t1.unitaries()
            .iter()
            .zip(t2.unitaries())
            .map(|(a, b)| a.kronecker(b))
            .collect(),
    ))
}

/// Positive rational weight `num/den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        Self { num, den }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn lcm(a: u64, b: u64) -> Option<u64> {
    (a / gcd(a, b)).checked_mul(b)
}

/// Default cap on the block size produced by [`block_convex_realize`].
pub const DEFAULT_BLOCK_CAP: usize = 4096;

/// Direct sums `V_i (+) ... (+) V_i (l_i copies)` with block sizes
/// `k_i l_i` proportional to the weights, so the normalized trace of the
/// result is the weighted average of the member traces.
pub fn block_convex_realize(terms: &[(Rational, UnitaryTuple)], cap: usize) -> Result<UnitaryTuple> {
    let first = terms.first().ok_or(Error::WeightsNotNormalized { sum: 0.0 })?;
    let n = first.1.n();
    for (w, t) in terms {
        if t.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: t.n(),
            });
        }
        if w.num == 0 || w.den == 0 {
            return Err(Error::InvalidArgument(format!(
                "weight {}/{} is not positive",
                w.num, w.den
            )));
        }
    }
    let overflow = || Error::SizeOverflow { size: usize::MAX, cap };
    let denom = terms
        .iter()
        .try_fold(1u64, |acc, (w, _)| lcm(acc, w.den))
        .ok_or_else(overflow)?;
    let numerators: Vec<u64> = terms
        .iter()
        .map(|(w, _)| w.num.checked_mul(denom / w.den))
        .collect::<Option<_>>()
        .ok_or_else(overflow)?;
    let total: u64 = numerators.iter().sum();
    if total != denom {
        let sum = terms.iter().map(|(w, _)| w.value()).sum();
        return Err(Error::WeightsNotNormalized { sum });
    }
    let k_lcm = terms
        .iter()
        .try_fold(1u64, |acc, (_, t)| lcm(acc, t.k() as u64))
        .ok_or_else(overflow)?;
    let mut copies: Vec<u64> = numerators
        .iter()
        .zip(terms)
        .map(|(a, (_, t))| a.checked_mul(k_lcm / t.k() as u64))
        .collect::<Option<_>>()
        .ok_or_else(overflow)?;
    let g = copies.iter().copied().fold(0, gcd);
    copies.iter_mut().for_each(|c| *c /= g);
    let size = copies
        .iter()
        .zip(terms)
        .try_fold(0u64, |acc, (c, (_, t))| acc.checked_add(c.checked_mul(t.k() as u64)?))
        .ok_or_else(overflow)?;
    if size > cap as u64 {
        return Err(Error::SizeOverflow {
            size: size as usize,
            cap,
        });
    }
    let size = size as usize;
    let unitaries = (0..n)
        .map(|j| {
            let mut m = CMatrix::zeros(size, size);
            let mut offset = 0;
            for (c, (_, t)) in copies.iter().zip(terms) {
                let v = t.get(j);
                let k = t.k();
                for _ in 0..*c {
                    m.view_mut((offset, offset), (k, k)).copy_from(v);
                    offset += k;
                }
            }
            m
        })
        .collect();
    Ok(UnitaryTuple::from_trusted(unitaries))
}

/// Operator norm of `sum_i c_i V_i`. A kernel vector `c` of the moment
/// matrix forces this to vanish.
pub fn kernel_relation_residual(t: &UnitaryTuple, c: &[C64]) -> Result<f64> {
    if c.len() != t.n() {
        return Err(Error::LengthMismatch {
            expected: t.n(),
            found: c.len(),
        });
    }
    if c.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    let k = t.k();
    let mut z = CMatrix::zeros(k, k);
    for (v, ci) in t.unitaries().iter().zip(c) {
        z += v.map(|e| e * ci);
    }
    Ok(matkernel::spectral_norm(&z))
}

/// A convex combination of rank-one correlation matrices
/// `R(zeta) = (conj(zeta_i) zeta_j)`, i.e. an explicit witness of
/// membership in the commuting moment set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankOneMixture {
    pub n: usize,
    pub terms: Vec<(f64, Vec<C64>)>,
}

impl RankOneMixture {
    pub fn single(phases: Vec<C64>) -> Self {
        Self {
            n: phases.len(),
            terms: vec![(1.0, phases)],
        }
    }

    /// `I_n` as the uniform mixture over `zeta_j = w^(m j)`, `w` a
    /// primitive n-th root of unity.
    pub fn identity(n: usize) -> Self {
        let terms = (0..n.max(1))
            .map(|m| {
                let phases = (0..n)
                    .map(|j| C64::from_polar(1.0, std::f64::consts::TAU * (m * j) as f64 / n as f64))
                    .collect();
                (1.0 / n.max(1) as f64, phases)
            })
            .collect();
        Self { n, terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    pub fn matrix(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for (w, z) in &self.terms {
            for i in 0..self.n {
                for j in 0..self.n {
                    m[(i, j)] += z[i].conj() * z[j] * *w;
                }
            }
        }
        m
    }

    /// Largest deviation of a phase from the unit circle.
    pub fn max_phase_defect(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|(_, z)| z.iter())
            .fold(0.0_f64, |a, z| a.max((z.norm() - 1.0).abs()))
    }

    /// Mixture for `D* R D` with `D = diag(phases)`.
    pub fn conjugated(&self, phases: &[C64]) -> Self {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(w, z)| (*w, z.iter().zip(phases).map(|(a, d)| a * d).collect()))
                .collect(),
        }
    }

    /// Places this mixture on the index set `indices` of an n x n matrix
    /// and pads with the identity on the complement. The padding uses the
    /// phases `w^(p (j+1))`, `w` a primitive (q+1)-th root of unity for a
    /// complement of size q, whose average is zero and whose Gram average
    /// is the identity.
    pub fn embed(&self, indices: &[usize], n: usize) -> Self {
        let rest: Vec<usize> = (0..n).filter(|i| !indices.contains(i)).collect();
        let q = rest.len();
        let pads: Vec<Vec<C64>> = if q == 0 {
            vec![Vec::new()]
        } else {
            (0..=q)
                .map(|p| {
                    (0..q)
                        .map(|j| {
                            C64::from_polar(1.0, std::f64::consts::TAU * (p * (j + 1)) as f64 / (q + 1) as f64)
                        })
                        .collect()
                })
                .collect()
        };
        let pad_weight = 1.0 / pads.len() as f64;
        let mut terms = Vec::with_capacity(self.len() * pads.len());
        for (w, z) in &self.terms {
            for pad in &pads {
                let mut phases = vec![C64::new(1.0, 0.0); n];
                for (a, &idx) in indices.iter().enumerate() {
                    phases[idx] = z[a];
                }
                for (b, &idx) in rest.iter().enumerate() {
                    phases[idx] = pad[b];
                }
                terms.push((w * pad_weight, phases));
            }
        }
        Self { n, terms }
    }

    /// Convex combination of mixtures.
    pub fn mix(parts: &[(f64, RankOneMixture)]) -> Self {
        let n = parts.first().map_or(0, |p| p.1.n);
        let terms = parts
            .iter()
            .flat_map(|(w, m)| m.terms.iter().map(move |(v, z)| (w * v, z.clone())))
            .collect();
        Self { n, terms }
    }
}

/// Splits a real rank-two extreme point with real frame columns
/// `(a_j, b_j)` as `1/2 R(zeta) + 1/2 R(conj zeta)`, `zeta_j = a_j + i b_j`.
fn split_real_leaf(frame: &correlation::Frame) -> Result<RankOneMixture> {
    match frame.r() {
        1 => Ok(RankOneMixture::single(
            (0..frame.len()).map(|j| C64::new(frame.vectors()[(0, j)].re, 0.0)).collect(),
        )),
        2 => {
            let zeta: Vec<C64> = (0..frame.len())
                .map(|j| C64::new(frame.vectors()[(0, j)].re, frame.vectors()[(1, j)].re))
                .collect();
            let conj: Vec<C64> = zeta.iter().map(|z| z.conj()).collect();
            Ok(RankOneMixture {
                n: zeta.len(),
                terms: vec![(0.5, zeta), (0.5, conj)],
            })
        }
        r => Err(Error::NoCertificate {
            reason: format!("real extreme point of rank {r} has no rank-one split"),
        }),
    }
}

/// Explicit rank-one mixture equal to `X`, when one can be constructed:
/// complex-mode peeling when every leaf is rank one (always the case for
/// n <= 3), otherwise for real `X` with n <= 5 real-mode peeling, whose
/// leaves have rank at most two and split exactly.
pub fn rank_one_mixture(x: &CorrelationMatrix, tol: &Tolerance) -> Result<RankOneMixture> {
    let leaf_eps = 1e-9_f64.max(tol.eps_eq);
    let complex = extremality::decompose_extreme(x, false, tol)?;
    if complex.terms.iter().all(|t| t.rank == 1) {
        let terms = complex
            .terms
            .iter()
            .map(|t| {
                extremality::rank_one_phases(&t.matrix, leaf_eps.max(1e-7))
                    .map(|z| (t.weight, z))
                    .ok_or_else(|| Error::NoCertificate {
                        reason: "rank-one leaf failed phase extraction".into(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(RankOneMixture { n: x.n(), terms });
    }
    if x.is_real() && x.n() <= 5 {
        let real = extremality::decompose_extreme(x, true, tol)?;
        let parts = real
            .terms
            .iter()
            .map(|t| {
                let f = correlation::frame_factor(&t.matrix, tol)?;
                Ok((t.weight, split_real_leaf(&f)?))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(RankOneMixture::mix(&parts));
    }
    Err(Error::NoCertificate {
        reason: format!(
            "peeling left extreme points of rank {} in dimension {}",
            complex.terms.iter().map(|t| t.rank).max().unwrap_or(0),
            x.n()
        ),
    })
}

/// What extremality says about commuting (and tracial) realizability.
#[derive(Debug, Clone, Serialize)]
pub struct CommutingObstruction {
    pub rank: usize,
    pub is_extreme: bool,
    /// An extreme point of the elliptope of rank >= 2 is not a mixture of
    /// rank-one points.
    pub outside_commuting: bool,
    /// Rank-two points of the tracial moment set are commuting, so a
    /// rank-two extreme point is outside the tracial set as well.
    pub outside_tracial: bool,
    pub reason: String,
}

pub fn commuting_obstruction(x: &CorrelationMatrix, tol: &Tolerance) -> Result<CommutingObstruction> {
    let rep = extremality::is_extreme(x, false, tol)?;
    let outside_commuting = rep.is_extreme && rep.rank >= 2;
    let outside_tracial = rep.is_extreme && rep.rank == 2;
    let reason = match (rep.is_extreme, rep.rank) {
        (true, 1) => "rank-one extreme point: realized by scalar phases".to_string(),
        (true, 2) => "rank-2 extreme point: not a mixture of rank-one points, so no commuting realization; rank <= 2 tracial moments are commuting, so it is not a tracial moment matrix either".to_string(),
        (true, r) => format!("rank-{r} extreme point: no commuting realization; tracial realizability undecided"),
        (false, _) => "not extreme: no obstruction from extremality".to_string(),
    };
    Ok(CommutingObstruction {
        rank: rep.rank,
        is_extreme: rep.is_extreme,
        outside_commuting,
        outside_tracial,
        reason,
    })
}

/// `U_target = sum coefficients[i].1 * U_{coefficients[i].0}`, read off a
/// kernel vector.
#[derive(Debug, Clone, Serialize)]
pub struct LinearRelation {
    pub target: usize,
    pub coefficients: Vec<(usize, f64)>,
    /// `||X c||` for the kernel vector this relation came from.
    pub kernel_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignCase {
    /// Pointwise values `zeta_1..zeta_n` in the gauge `zeta_2 = 1`.
    pub zeta: Vec<C64>,
    /// Modulus of the value forced by the last relation.
    pub forced_modulus: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefutationCertificate {
    pub relations: Vec<LinearRelation>,
    /// Distance between the numerical kernel and the span of the listed
    /// kernel vectors.
    pub kernel_distance: f64,
    pub cases: Vec<SignCase>,
    pub refuted: bool,
}

/// Margin by which every forced modulus must miss 1.
pub const REFUTATION_MARGIN: f64 = 0.15;

/// Unit-modulus solutions `zeta` of `|alpha zeta + b| = 1`.
fn unit_circle_solutions(alpha: f64, b: C64) -> Vec<C64> {
    let w = b.conj() * alpha;
    let c = (1.0 - alpha * alpha - b.norm_sqr()) / 2.0;
    if w.norm() < 1e-15 {
        return Vec::new();
    }
    let ratio = c / w.norm();
    if ratio.abs() > 1.0 + 1e-12 {
        return Vec::new();
    }
    let theta = ratio.clamp(-1.0, 1.0).acos();
    let phi = w.arg();
    let mut out = vec![C64::from_polar(1.0, theta - phi), C64::from_polar(1.0, -theta - phi)];
    if theta.abs() < 1e-12 {
        out.pop();
    }
    out
}

fn relation_from_kernel(x: &CMatrix, v: &[f64]) -> LinearRelation {
    let target = (0..v.len()).rev().find(|&i| v[i].abs() > 1e-12).unwrap_or(0);
    let pivot = v[target];
    let coefficients = (0..v.len())
        .filter(|&i| i != target && v[i].abs() > 1e-12)
        .map(|i| (i, -v[i] / pivot))
        .collect();
    let c = nalgebra::DVector::from_iterator(v.len(), v.iter().map(|a| C64::new(*a, 0.0)));
    LinearRelation {
        target,
        coefficients,
        kernel_residual: (x * c).norm(),
    }
}

/// Shows the real 6x6 fixture is not a moment matrix of commuting
/// unitaries: the kernel forces three linear relations among the
/// unitaries, evaluated pointwise on the spectrum they become relations
/// among unimodular scalars, and every branch forces a non-unimodular
/// value.
pub fn refute_commuting_f6(x: &CMatrix, tol: &Tolerance) -> Result<RefutationCertificate> {
    let expected = fixtures::f6_matrix();
    if x.shape() != expected.shape() {
        return Err(Error::WrongInput {
            reason: format!("expected a 6x6 matrix, got {}x{}", x.nrows(), x.ncols()),
        });
    }
    let deviation = matkernel::max_abs_diff(x, &expected);
    if deviation > tol.eps_eq {
        return Err(Error::WrongInput {
            reason: format!("entries deviate from the fixture by {deviation:e}"),
        });
    }
    let xc = correlation::validate(x, tol)?;
    let kernel = fixtures::f6_kernel();
    let numeric = matkernel::nullspace(xc.hermitian(), tol)?;
    let kernel_distance = matkernel::subspace_distance(&numeric, &kernel);

    let relations: Vec<LinearRelation> = (0..kernel.ncols())
        .map(|j| {
            let v: Vec<f64> = kernel.column(j).iter().map(|z| z.re).collect();
            relation_from_kernel(x, &v)
        })
        .collect();

    // gauge: the common phase is free, so fix zeta_2 = 1
    let n = x.nrows();
    let mut partial: Vec<Vec<Option<C64>>> = vec![{
        let mut z = vec![None; n];
        z[1] = Some(C64::new(1.0, 0.0));
        z
    }];
    let mut forced = Vec::new();
    for (idx, rel) in relations.iter().enumerate() {
        let last = idx + 1 == relations.len();
        let mut next = Vec::new();
        for z in &partial {
            let unknown: Vec<&(usize, f64)> =
                rel.coefficients.iter().filter(|(i, _)| z[*i].is_none()).collect();
            let known: C64 = rel
                .coefficients
                .iter()
                .filter_map(|(i, a)| z[*i].map(|v| v * *a))
                .sum();
            match unknown.as_slice() {
                [] => {
                    let mut z = z.clone();
                    z[rel.target] = Some(known);
                    if last {
                        forced.push(known.norm());
                    }
                    next.push(z);
                }
                [(i, a)] => {
                    for sol in unit_circle_solutions(*a, known) {
                        let mut z = z.clone();
                        z[*i] = Some(sol);
                        z[rel.target] = Some(sol * *a + known);
                        next.push(z);
                    }
                }
                _ => {
                    return Err(Error::WrongInput {
                        reason: "relation has more than one undetermined unitary".into(),
                    })
                }
            }
        }
        partial = next;
    }
    let cases: Vec<SignCase> = partial
        .into_iter()
        .zip(forced)
        .map(|(z, m)| SignCase {
            zeta: z.into_iter().map(|v| v.unwrap_or(C64::new(f64::NAN, f64::NAN))).collect(),
            forced_modulus: m,
        })
        .collect();
    let refuted = !cases.is_empty()
        && cases
            .iter()
            .all(|c| (c.forced_modulus - 1.0).abs() > REFUTATION_MARGIN);
    Ok(RefutationCertificate {
        relations,
        kernel_distance,
        cases,
        refuted,
    })
}
