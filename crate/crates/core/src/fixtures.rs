//! The explicit matrices used throughout the test suites and shipped as
//! JSON files under `fixtures/`: the rank-two extreme point of the 4x4
//! elliptope, the real 3x3 rank-two example with its rank-one split, and
//! the real 6x6 rank-three matrix that is not a moment matrix of
//! commuting unitaries.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use crate::matkernel::{CMatrix, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows[0].len();
    CMatrix::from_fn(n, m, |i, j| c(rows[i][j], 0.0))
}

/// Frame in C^2 whose Gram matrix is [`x4_matrix`].
pub fn x4_frame() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(
        2,
        4,
        &[
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(h, 0.0),
            c(0.0, h),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(h, 0.0),
            c(h, 0.0),
        ],
    )
}

/// Rank-two extreme point of the 4x4 elliptope.
pub fn x4_matrix() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    CMatrix::from_row_slice(
        4,
        4,
        &[
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(h, 0.0),
            c(0.0, h),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(h, 0.0),
            c(h, 0.0),
            c(h, 0.0),
            c(h, 0.0),
            c(1.0, 0.0),
            c(0.5, 0.5),
            c(0.0, -h),
            c(h, 0.0),
            c(0.5, -0.5),
            c(1.0, 0.0),
        ],
    )
}

/// `(X - conj X)/2` for [`x4_matrix`].
pub fn x4_skew() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let mut s = CMatrix::zeros(4, 4);
    s[(0, 3)] = c(0.0, h);
    s[(3, 0)] = c(0.0, -h);
    s[(2, 3)] = c(0.0, 0.5);
    s[(3, 2)] = c(0.0, -0.5);
    s
}

/// `diag(1, 1, 1, e^{-i pi/4})`.
pub fn x4_phase_fix() -> Vec<C64> {
    vec![
        c(1.0, 0.0),
        c(1.0, 0.0),
        c(1.0, 0.0),
        C64::from_polar(1.0, -FRAC_PI_4),
    ]
}

/// Skew part of [`x4_matrix`] after conjugation by [`x4_phase_fix`].
pub fn x4_phase_fixed_skew() -> CMatrix {
    let mut s = CMatrix::zeros(4, 4);
    s[(0, 3)] = c(0.0, 0.5);
    s[(3, 0)] = c(0.0, -0.5);
    s[(1, 3)] = c(0.0, -0.5);
    s[(3, 1)] = c(0.0, 0.5);
    s
}

/// Real frame in R^2 for [`real3_matrix`].
pub fn real3_frame() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    real_matrix(&[&[1.0, 0.0, h], &[0.0, 1.0, h]])
}

/// Real rank-two extreme point of the real 3x3 elliptope.
pub fn real3_matrix() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    real_matrix(&[&[1.0, 0.0, h], &[0.0, 1.0, h], &[h, h, 1.0]])
}

/// The two complex rank-one matrices averaging to [`real3_matrix`].
pub fn real3_rank_one_parts() -> (CMatrix, CMatrix) {
    let h = FRAC_1_SQRT_2;
    let a = CMatrix::from_row_slice(
        3,
        3,
        &[
            c(1.0, 0.0),
            c(0.0, 1.0),
            c(h, h),
            c(0.0, -1.0),
            c(1.0, 0.0),
            c(h, -h),
            c(h, -h),
            c(h, h),
            c(1.0, 0.0),
        ],
    );
    let b = a.map(|z| z.conj());
    (a, b)
}

/// Real frame in R^3 for [`f6_matrix`].
pub fn f6_frame() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let t = 1.0 / 3f64.sqrt();
    real_matrix(&[
        &[1.0, 0.0, 0.0, h, 0.0, t],
        &[0.0, 1.0, 0.0, h, h, t],
        &[0.0, 0.0, 1.0, 0.0, h, t],
    ])
}

/// Real rank-three extreme point of the real 6x6 elliptope lying outside
/// the commuting moment set.
pub fn f6_matrix() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let t = 1.0 / 3f64.sqrt();
    let s = (2.0f64 / 3.0).sqrt();
    real_matrix(&[
        &[1.0, 0.0, 0.0, h, 0.0, t],
        &[0.0, 1.0, 0.0, h, h, t],
        &[0.0, 0.0, 1.0, 0.0, h, t],
        &[h, h, 0.0, 1.0, 0.5, s],
        &[0.0, h, h, 0.5, 1.0, s],
        &[t, t, t, s, s, 1.0],
    ])
}

/// Kernel vectors `v_1, v_2, v_3` of [`f6_matrix`] as columns.
pub fn f6_kernel() -> CMatrix {
    let h = FRAC_1_SQRT_2;
    let t = 1.0 / 3f64.sqrt();
    CMatrix::from_fn(6, 3, |i, j| {
        let cols = [
            [h, h, 0.0, -1.0, 0.0, 0.0],
            [0.0, h, h, 0.0, -1.0, 0.0],
            [t, t, t, 0.0, 0.0, -1.0],
        ];
        c(cols[j][i], 0.0)
    })
}
