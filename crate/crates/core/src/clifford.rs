//! Tensor-product representation of the real Clifford algebra of R^r on
//! C^(2^r), and the realization of real correlation matrices as
//! normalized-trace moments of self-adjoint unitaries built from it.
//!
//! With `U = diag(1, -1)` and `V = [[0, 1], [1, 0]]`, the generators are
//! `L(e_i) = U^{(i-1)} (x) V (x) I_2^{(r-i)}`; they square to the identity and
//! pairwise anticommute, so `L(x) L(y) + L(y) L(x) = 2 <x, y> I`.

use crate::correlation::{self, CorrelationMatrix};
use crate::error::{Error, Result};
use crate::matkernel::{CMatrix, Tolerance, C64};

/// Default cap on the representation size `2^r`.
pub const DEFAULT_CAP: usize = 256;

#[derive(Debug, Clone)]
pub struct CliffordGenerators {
    r: usize,
    generators: Vec<CMatrix>,
}

impl CliffordGenerators {
    pub fn r(&self) -> usize {
        self.r
    }

    /// Matrix size `2^r`.
    pub fn k(&self) -> usize {
        1 << self.r
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> &CMatrix {
        &self.generators[i]
    }
}

fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    )
}

fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    )
}

fn check_cap(r: usize, cap: usize) -> Result<()> {
    if r >= usize::BITS as usize - 1 || (1usize << r) > cap {
        return Err(Error::DimensionCap { r, cap });
    }
    Ok(())
}

pub fn build_generators(r: usize, cap: usize) -> Result<CliffordGenerators> {
    if r == 0 {
        return Err(Error::InvalidArgument("Clifford rank must be at least 1".into()));
    }
    check_cap(r, cap)?;
    let u = pauli_z();
    let v = pauli_x();
    let i2 = CMatrix::identity(2, 2);
    let generators = (0..r)
        .map(|i| {
            let mut g = CMatrix::identity(1, 1);
            for slot in 0..r {
                let factor = match slot.cmp(&i) {
                    std::cmp::Ordering::Less => &u,
                    std::cmp::Ordering::Equal => &v,
                    std::cmp::Ordering::Greater => &i2,
                };
                g = g.kronecker(factor);
            }
            g
        })
        .collect();
    Ok(CliffordGenerators { r, generators })
}

/// `L(x) = sum_i x_i L(e_i)`.
pub fn lambda_of(gens: &CliffordGenerators, x: &[f64]) -> Result<CMatrix> {
    if x.len() != gens.r {
        return Err(Error::LengthMismatch {
            expected: gens.r,
            found: x.len(),
        });
    }
    let k = gens.k();
    let mut out = CMatrix::zeros(k, k);
    for (g, &c) in gens.generators.iter().zip(x) {
        if c != 0.0 {
            out += g.map(|z| z * c);
        }
    }
    Ok(out)
}

/// An n-tuple of k x k unitaries.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryTuple {
    k: usize,
    unitaries: Vec<CMatrix>,
}

/// Largest entry of `|V* V - I|`.
pub fn unitarity_defect(v: &CMatrix) -> f64 {
    let k = v.nrows();
    let g = v.adjoint() * v;
    let mut worst = 0.0_f64;
    for a in 0..k {
        for b in 0..k {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((g[(a, b)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

impl UnitaryTuple {
    pub fn new(unitaries: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        let k = unitaries.first().map_or(0, |v| v.nrows());
        if k == 0 {
            return Err(Error::InvalidArgument("a tuple needs at least one unitary".into()));
        }
        for (index, v) in unitaries.iter().enumerate() {
            if v.nrows() != k || v.ncols() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: v.nrows().max(v.ncols()),
                });
            }
            let defect = unitarity_defect(v);
            if defect > tol.eps_eq {
                return Err(Error::NotUnitary { index, defect });
            }
        }
        Ok(Self { k, unitaries })
    }

    pub(crate) fn from_trusted(unitaries: Vec<CMatrix>) -> Self {
        let k = unitaries[0].nrows();
        Self { k, unitaries }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn get(&self, i: usize) -> &CMatrix {
        &self.unitaries[i]
    }

    /// Replaces `V_j` by `d_j V_j`; the moment matrix becomes
    /// `(conj(d_i) x_ij d_j)`.
    pub fn phase_shifted(&self, phases: &[C64]) -> Result<Self> {
        if phases.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                found: phases.len(),
            });
        }
        Ok(Self {
            k: self.k,
            unitaries: self
                .unitaries
                .iter()
                .zip(phases)
                .map(|(v, d)| v.map(|z| z * d))
                .collect(),
        })
    }
}

/// Realizes a real correlation matrix `X` of rank r by the symmetries
/// `L(f_1), ..., L(f_n)` of size `2^r`, where `f_j` is a real frame of `X`.
pub fn realize_real(x: &CorrelationMatrix, tol: &Tolerance, cap: usize) -> Result<UnitaryTuple> {
    if !x.is_real() {
        let max_imag = x.matrix().iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
        return Err(Error::NotReal { max_imag });
    }
    let frame = correlation::frame_factor(x, tol)?;
    let gens = build_generators(frame.r(), cap)?;
    let unitaries = (0..frame.len())
        .map(|j| {
            let f: Vec<f64> = frame.vector(j).iter().map(|z| z.re).collect();
            lambda_of(&gens, &f)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitaryTuple::from_trusted(unitaries))
}
