//! Lower bounds for how far one can move from the identity toward `X`
//! while staying inside the commuting moment set (`c_X`) or the matricial
//! one (`a_X`): averaging over index triples, the smallest-eigenvalue
//! shift, and reduction to the skew part after a diagonal phase change.
//!
//! Every certificate can be turned into an explicit [`Witness`]: a convex
//! combination of rank-one mixtures (and, for the matricial target,
//! Clifford tuples) whose moments reproduce `tX + (1-t)I`.

use serde::{Serialize, Serializer};

use crate::clifford::{self, UnitaryTuple};
use crate::correlation::{self, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::json;
use crate::matkernel::{self, CMatrix, HermitianMatrix, Tolerance, C64};
use crate::moments::{self, RankOneMixture};

/// Which set the bound is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Moment matrices of commuting unitaries (`c_X`).
    Commuting,
    /// Moment matrices of matrix unitaries (`a_X`).
    Matricial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Averaging,
    EigenShift,
    SkewReduction,
    Combined,
}

/// The scale `d = 1/||S||`, infinite when the skew part vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SkewScale {
    Finite(f64),
    Infinite,
}

impl SkewScale {
    pub fn bound(&self) -> f64 {
        match self {
            SkewScale::Finite(d) => d / (d + 1.0),
            SkewScale::Infinite => 1.0,
        }
    }
}

impl Serialize for SkewScale {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SkewScale::Finite(d) => s.serialize_f64(*d),
            SkewScale::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    Averaging {
        group_size: u128,
        scale: f64,
        #[serde(serialize_with = "json::serialize_matrix")]
        averaged: CMatrix,
        /// Largest entry of `|X' - (aX + (1-a)I)|`.
        identity_defect: f64,
    },
    EigenShift {
        lambda_min: f64,
        #[serde(serialize_with = "json::serialize_matrix")]
        shifted: CMatrix,
    },
    SkewReduction {
        /// Realified row, or `None` for the skew part of `X` itself.
        row: Option<usize>,
        phases: Vec<C64>,
        skew_norm: f64,
        d: SkewScale,
        support: Vec<usize>,
        /// `||S||` for every row tried (`None` where the support was too
        /// large); empty when a single row was requested.
        row_norms: Vec<Option<f64>>,
    },
    Combined {
        candidates: Vec<(BoundKind, f64)>,
        winner: Box<BoundCertificate>,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    pub target: Target,
    pub bound: f64,
    pub evidence: Evidence,
}

/// The average of `X_sigma` over `sigma` with `sigma(1) < sigma(2) < sigma(3)`.
#[derive(Debug, Clone)]
pub struct SigmaAverage {
    pub n: usize,
    pub group_size: u128,
    pub averaged: CorrelationMatrix,
}

fn require_n(x: &CorrelationMatrix) -> Result<()> {
    if x.n() < 3 {
        return Err(Error::DimensionTooSmall { n: x.n(), min: 3 });
    }
    Ok(())
}

fn binomial3(n: usize) -> u128 {
    let n = n as u128;
    n * (n - 1) * (n - 2) / 6
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// `#G = C(n, 3) (n-3)!`.
pub fn group_size(n: usize) -> u128 {
    if n < 3 {
        return 0;
    }
    binomial3(n) * factorial(n - 3)
}

/// `6 / (n^2 - n)`.
pub fn averaging_scale(n: usize) -> f64 {
    6.0 / ((n * n - n) as f64)
}

fn triples(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Every permutation (as the image list `sigma[0..n]`) whose first three
/// images increase. Explicit enumeration; meant for small n.
pub fn enumerate_group(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for t in triples(n) {
        let mut rest: Vec<usize> = (0..n).filter(|i| !t.contains(i)).collect();
        loop {
            let mut sigma = t.to_vec();
            sigma.extend_from_slice(&rest);
            out.push(sigma);
            if !next_permutation(&mut rest) {
                break;
            }
        }
    }
    out
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len()).rev().find(|&j| v[j] > v[i]).unwrap();
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// `X_sigma`: the entries of `X` on `{sigma(1), sigma(2), sigma(3)}`,
/// identity elsewhere.
pub fn sigma_matrix(x: &CorrelationMatrix, sigma: &[usize]) -> CMatrix {
    let mut m = CMatrix::identity(x.n(), x.n());
    for &a in &sigma[..3] {
        for &b in &sigma[..3] {
            m[(a, b)] = x.entry(a, b);
        }
    }
    m
}

/// `X' = (1/#G) sum X_sigma`. Since `X_sigma` only depends on the image
/// triple and each triple occurs `(n-3)!` times in G, the sum runs over
/// triples with that multiplicity.
pub fn sigma_average(x: &CorrelationMatrix, tol: &Tolerance) -> Result<SigmaAverage> {
    require_n(x)?;
    let n = x.n();
    let ts = triples(n);
    let mut sum = CMatrix::zeros(n, n);
    for t in &ts {
        sum += sigma_matrix(x, t);
    }
    let averaged = sum / C64::new(ts.len() as f64, 0.0);
    Ok(SigmaAverage {
        n,
        group_size: group_size(n),
        averaged: correlation::validate(&averaged, tol)?,
    })
}

/// `aX + (1-a)I`.
fn toward(x: &CorrelationMatrix, a: f64) -> CMatrix {
    let n = x.n();
    x.matrix().map(|z| z * a) + CMatrix::identity(n, n).map(|z| z * (1.0 - a))
}

pub fn averaging_bound(x: &CorrelationMatrix, tol: &Tolerance) -> Result<BoundCertificate> {
    let avg = sigma_average(x, tol)?;
    let scale = averaging_scale(x.n());
    let identity_defect = matkernel::max_abs_diff(avg.averaged.matrix(), &toward(x, scale));
    Ok(BoundCertificate {
        kind: BoundKind::Averaging,
        target: Target::Commuting,
        bound: scale,
        evidence: Evidence::Averaging {
            group_size: avg.group_size,
            scale,
            averaged: avg.averaged.matrix().clone(),
            identity_defect,
        },
    })
}

pub fn eigen_shift_bound(x: &CorrelationMatrix, tol: &Tolerance) -> Result<BoundCertificate> {
    require_n(x)?;
    let n = x.n();
    let lambda_min = matkernel::min_eigenvalue(x.hermitian(), tol)?.clamp(0.0, 1.0);
    let gap = 1.0 - lambda_min;
    let (bound, shifted) = if gap <= tol.eps_eq {
        (1.0, CMatrix::identity(n, n))
    } else {
        let y = (x.matrix() - CMatrix::identity(n, n).map(|z| z * lambda_min)).map(|z| z / gap);
        ((averaging_scale(n) / gap).min(1.0), y)
    };
    Ok(BoundCertificate {
        kind: BoundKind::EigenShift,
        target: Target::Commuting,
        bound,
        evidence: Evidence::EigenShift { lambda_min, shifted },
    })
}

fn skew_support(s: &HermitianMatrix, eps: f64) -> Vec<usize> {
    let m = s.matrix();
    (0..s.n())
        .filter(|&i| (0..s.n()).any(|j| m[(i, j)].norm() > eps))
        .collect()
}

struct SkewData {
    phases: Vec<C64>,
    conjugated: CorrelationMatrix,
    skew: HermitianMatrix,
    support: Vec<usize>,
    norm: f64,
}

fn skew_data(x: &CorrelationMatrix, row: Option<usize>, tol: &Tolerance) -> Result<SkewData> {
    let (phases, conjugated) = match row {
        Some(k) => correlation::realify_row(x, k, tol)?,
        None => (vec![C64::new(1.0, 0.0); x.n()], x.clone()),
    };
    let skew = correlation::skew_part(&conjugated);
    let support = skew_support(&skew, tol.eps_eq);
    let norm = matkernel::operator_norm(&skew);
    Ok(SkewData {
        phases,
        conjugated,
        skew,
        support,
        norm,
    })
}

fn skew_scale(norm: f64, tol: &Tolerance) -> SkewScale {
    if norm <= tol.eps_eq {
        SkewScale::Infinite
    } else {
        SkewScale::Finite(1.0 / norm)
    }
}

fn require_target(x: &CorrelationMatrix, target: Target) -> Result<()> {
    require_n(x)?;
    if target == Target::Commuting && x.n() > 5 {
        return Err(Error::NoCertificate {
            reason: format!(
                "real correlation matrices are only known to be commuting moments for n <= 5, got n = {}",
                x.n()
            ),
        });
    }
    Ok(())
}

/// Skew reduction at a single row (`None`: no phase change).
pub fn skew_reduction_at(
    x: &CorrelationMatrix,
    row: Option<usize>,
    target: Target,
    tol: &Tolerance,
) -> Result<BoundCertificate> {
    require_target(x, target)?;
    let data = skew_data(x, row, tol)?;
    let d = skew_scale(data.norm, tol);
    if d != SkewScale::Infinite && data.support.len() > 3 {
        return Err(Error::SupportTooLarge {
            size: data.support.len(),
        });
    }
    Ok(BoundCertificate {
        kind: BoundKind::SkewReduction,
        target,
        bound: d.bound(),
        evidence: Evidence::SkewReduction {
            row,
            phases: data.phases,
            skew_norm: data.norm,
            d,
            support: data.support,
            row_norms: Vec::new(),
        },
    })
}

/// Best skew reduction over all rows; the first row wins ties.
pub fn skew_reduction_bound(
    x: &CorrelationMatrix,
    target: Target,
    tol: &Tolerance,
) -> Result<BoundCertificate> {
    require_target(x, target)?;
    let mut best: Option<BoundCertificate> = None;
    let mut first_err = None;
    let mut row_norms = Vec::with_capacity(x.n());
    for k in 0..x.n() {
        match skew_reduction_at(x, Some(k), target, tol) {
            Ok(cert) => {
                if let Evidence::SkewReduction { skew_norm, .. } = &cert.evidence {
                    row_norms.push(Some(*skew_norm));
                }
                if best.as_ref().is_none_or(|b| cert.bound > b.bound + 1e-12) {
                    best = Some(cert);
                }
            }
            Err(e @ Error::SupportTooLarge { .. }) => {
                row_norms.push(None);
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    match best {
        Some(mut cert) => {
            if let Evidence::SkewReduction { row_norms: r, .. } = &mut cert.evidence {
                *r = row_norms;
            }
            Ok(cert)
        }
        None => Err(first_err.unwrap_or(Error::SupportTooLarge { size: x.n() })),
    }
}

fn combine(target: Target, certs: Vec<BoundCertificate>) -> BoundCertificate {
    let candidates = certs.iter().map(|c| (c.kind, c.bound)).collect();
    let mut winner = 0;
    for (i, c) in certs.iter().enumerate() {
        if c.bound > certs[winner].bound + 1e-12 {
            winner = i;
        }
    }
    let winner = certs.into_iter().nth(winner).unwrap();
    BoundCertificate {
        kind: BoundKind::Combined,
        target,
        bound: winner.bound,
        evidence: Evidence::Combined {
            candidates,
            winner: Box::new(winner),
        },
    }
}

/// Largest of the certified lower bounds on `c_X`.
pub fn best_lower_bound(x: &CorrelationMatrix, tol: &Tolerance) -> Result<BoundCertificate> {
    best_for(x, Target::Commuting, tol)
}

/// Largest of the certified lower bounds on `a_X`.
pub fn best_lower_bound_matricial(x: &CorrelationMatrix, tol: &Tolerance) -> Result<BoundCertificate> {
    best_for(x, Target::Matricial, tol)
}

fn best_for(x: &CorrelationMatrix, target: Target, tol: &Tolerance) -> Result<BoundCertificate> {
    let mut certs = vec![averaging_bound(x, tol)?, eigen_shift_bound(x, tol)?];
    match skew_reduction_bound(x, target, tol) {
        Ok(c) => certs.push(c),
        Err(Error::SupportTooLarge { .. }) | Err(Error::NoCertificate { .. }) => {}
        Err(e) => return Err(e),
    }
    Ok(combine(target, certs))
}

impl BoundCertificate {
    /// Recomputes the bound from the evidence alone and returns the
    /// discrepancy with the stated bound.
    pub fn recheck(&self, x: &CorrelationMatrix, tol: &Tolerance) -> Result<f64> {
        let n = x.n();
        let recomputed = match &self.evidence {
            Evidence::Averaging { averaged, .. } => {
                let scale = averaging_scale(n);
                let defect = matkernel::max_abs_diff(averaged, &toward(x, scale));
                if defect > tol.eps_eq {
                    return Ok(defect);
                }
                scale
            }
            Evidence::EigenShift { lambda_min, shifted } => {
                let back = shifted.map(|z| z * (1.0 - lambda_min))
                    + CMatrix::identity(n, n).map(|z| z * *lambda_min);
                let defect = matkernel::max_abs_diff(&back, x.matrix());
                if defect > tol.eps_eq {
                    return Ok(defect);
                }
                correlation::validate(shifted, tol)?;
                if 1.0 - lambda_min <= tol.eps_eq {
                    1.0
                } else {
                    (averaging_scale(n) / (1.0 - lambda_min)).min(1.0)
                }
            }
            Evidence::SkewReduction { phases, .. } => {
                let y = correlation::conjugate_diag(x, phases, tol)?;
                let norm = matkernel::operator_norm(&correlation::skew_part(&y));
                skew_scale(norm, tol).bound()
            }
            Evidence::Combined { winner, .. } => return winner.recheck(x, tol),
        };
        Ok((recomputed - self.bound).abs())
    }
}

/// One summand of a witness.
#[derive(Debug, Clone)]
pub enum WitnessPart {
    Mixture(RankOneMixture),
    /// A tuple of matrix unitaries; only used for the matricial target.
    Tuple(UnitaryTuple),
}

impl WitnessPart {
    pub fn matrix(&self, tol: &Tolerance) -> Result<CMatrix> {
        match self {
            WitnessPart::Mixture(m) => Ok(m.matrix()),
            WitnessPart::Tuple(t) => Ok(moments::moment_matrix(t, tol)?.matrix.matrix().clone()),
        }
    }
}

/// `tX + (1-t)I` as an explicit convex combination.
#[derive(Debug, Clone)]
pub struct Witness {
    pub t: f64,
    pub parts: Vec<(f64, WitnessPart)>,
}

impl Witness {
    pub fn weight_sum(&self) -> f64 {
        self.parts.iter().map(|(w, _)| w).sum()
    }

    pub fn matrix(&self, tol: &Tolerance) -> Result<CMatrix> {
        let first = self.parts.first().ok_or(Error::NoCertificate {
            reason: "empty witness".into(),
        })?;
        let n = first.1.matrix(tol)?.nrows();
        let mut m = CMatrix::zeros(n, n);
        for (w, p) in &self.parts {
            m += p.matrix(tol)?.map(|z| z * *w);
        }
        Ok(m)
    }

    /// Largest entry of `|sum - (tX + (1-t)I)|`, also counting the
    /// deviation of the weights from a probability vector and of the
    /// mixture phases from the unit circle.
    pub fn defect(&self, x: &CorrelationMatrix, tol: &Tolerance) -> Result<f64> {
        let mut worst = matkernel::max_abs_diff(&self.matrix(tol)?, &toward(x, self.t));
        worst = worst.max((self.weight_sum() - 1.0).abs());
        for (w, p) in &self.parts {
            worst = worst.max((-w).max(0.0));
            match p {
                WitnessPart::Mixture(m) => {
                    worst = worst.max(m.max_phase_defect());
                    for (v, _) in &m.terms {
                        worst = worst.max((-v).max(0.0));
                    }
                }
                WitnessPart::Tuple(t) => {
                    for v in t.unitaries() {
                        worst = worst.max(clifford::unitarity_defect(v));
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Collapses a witness made only of mixtures into one mixture.
    pub fn into_mixture(self) -> Option<RankOneMixture> {
        let parts: Option<Vec<(f64, RankOneMixture)>> = self
            .parts
            .into_iter()
            .map(|(w, p)| match p {
                WitnessPart::Mixture(m) => Some((w, m)),
                WitnessPart::Tuple(_) => None,
            })
            .collect();
        parts.map(|p| RankOneMixture::mix(&p))
    }
}

/// Rank-one mixture for the correlation matrix carried on `indices` and the
/// identity elsewhere. Blocks of size at most three peel into rank-one
/// leaves.
fn block_mixture(m: &CMatrix, indices: &[usize], tol: &Tolerance) -> Result<RankOneMixture> {
    let k = indices.len();
    let block = CMatrix::from_fn(k, k, |a, b| m[(indices[a], indices[b])]);
    let block = correlation::validate(&block, tol)?;
    Ok(moments::rank_one_mixture(&block, tol)?.embed(indices, m.nrows()))
}

/// Mixture for `aY + (1-a)I` with `a = 6/(n^2-n)`: the uniform average of
/// the triple blocks of `Y`.
fn averaged_mixture(y: &CMatrix, tol: &Tolerance) -> Result<RankOneMixture> {
    let ts = triples(y.nrows());
    let w = 1.0 / ts.len() as f64;
    let parts = ts
        .iter()
        .map(|t| Ok((w, block_mixture(y, t, tol)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RankOneMixture::mix(&parts))
}

fn check_t(t: f64, bound: f64) -> Result<()> {
    if !(0.0..=bound + 1e-12).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "t = {t} outside the certified range [0, {bound}]"
        )));
    }
    Ok(())
}

/// Writes `tX + (1-t)I` for `0 <= t <= bound` as an explicit convex
/// combination following the construction recorded in the certificate.
pub fn witness(
    cert: &BoundCertificate,
    x: &CorrelationMatrix,
    t: f64,
    tol: &Tolerance,
) -> Result<Witness> {
    check_t(t, cert.bound)?;
    let n = x.n();
    let identity = || WitnessPart::Mixture(RankOneMixture::identity(n));
    match &cert.evidence {
        Evidence::Combined { winner, .. } => witness(winner, x, t, tol),
        Evidence::Averaging { .. } => {
            let a = averaging_scale(n);
            let s = (t / a).min(1.0);
            Ok(Witness {
                t,
                parts: vec![
                    (s, WitnessPart::Mixture(averaged_mixture(x.matrix(), tol)?)),
                    (1.0 - s, identity()),
                ],
            })
        }
        Evidence::EigenShift { lambda_min, shifted } => {
            // tX + (1-t)I = sY + (1-s)I with s = t(1 - lambda_0)
            let a = averaging_scale(n);
            let s = (t * (1.0 - lambda_min) / a).min(1.0);
            Ok(Witness {
                t,
                parts: vec![
                    (s, WitnessPart::Mixture(averaged_mixture(shifted, tol)?)),
                    (1.0 - s, identity()),
                ],
            })
        }
        Evidence::SkewReduction { row, d, .. } => {
            let data = skew_data(x, *row, tol)?;
            let back: Vec<C64> = data.phases.iter().map(|z| z.conj()).collect();
            let real = correlation::real_part(&data.conjugated);
            let real_part = match cert.target {
                Target::Commuting => {
                    WitnessPart::Mixture(moments::rank_one_mixture(&real, tol)?.conjugated(&back))
                }
                Target::Matricial => WitnessPart::Tuple(
                    clifford::realize_real(&real, tol, clifford::DEFAULT_CAP)?.phase_shifted(&back)?,
                ),
            };
            match d {
                SkewScale::Infinite => Ok(Witness {
                    t,
                    parts: vec![(t, real_part), (1.0 - t, identity())],
                }),
                SkewScale::Finite(d) => {
                    // t* X' + (1-t*) I = (I + dS)/(d+1) + d/(d+1) Re X'
                    let top = d / (d + 1.0);
                    let scale = (t / top).min(1.0);
                    let lifted = CMatrix::identity(n, n) + data.skew.matrix().map(|z| z * d);
                    let block = block_mixture(&lifted, &data.support, tol)?.conjugated(&back);
                    Ok(Witness {
                        t,
                        parts: vec![
                            (scale / (d + 1.0), WitnessPart::Mixture(block)),
                            (scale * top, real_part),
                            (1.0 - scale, identity()),
                        ],
                    })
                }
            }
        }
    }
}
