//! Fixed fixtures: the non-commuting 2×2 pair with its closed-form polar factors.

use crate::linalg::ComplexMatrix;
use crate::tuple::OperatorTuple;

/// `T₁ = [[0,1],[0,0]]`, `T₂ = [[0,−1],[1,0]]`.
pub fn noncommuting_pair() -> OperatorTuple {
    let t1 = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    let t2 = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
    OperatorTuple::new(vec![t1, t2]).unwrap()
}

/// Closed forms `(P, V₁, V₂)` for [`noncommuting_pair`].
pub fn noncommuting_pair_polar() -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let p = ComplexMatrix::from_real_diagonal(&[1.0, std::f64::consts::SQRT_2]);
    let v1 = ComplexMatrix::from_real_rows(&[&[0.0, h], &[0.0, 0.0]]).unwrap();
    let v2 = ComplexMatrix::from_real_rows(&[&[0.0, -h], &[1.0, 0.0]]).unwrap();
    (p, v1, v2)
}

/// Closed form of the dual tuple `(PV₁, PV₂)`.
pub fn noncommuting_pair_dual() -> OperatorTuple {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = std::f64::consts::SQRT_2;
    OperatorTuple::new(vec![
        ComplexMatrix::from_real_rows(&[&[0.0, h], &[0.0, 0.0]]).unwrap(),
        ComplexMatrix::from_real_rows(&[&[0.0, -h], &[s, 0.0]]).unwrap(),
    ])
    .unwrap()
}

/// Value of `ω²(T₁, T₂)` stated for the fixture.
pub const CLAIMED_OMEGA_SQ: f64 = 1.25;

/// Value of `ω(PV₁, PV₂)` stated for the fixture: `5√2/4`.
pub fn claimed_dual_omega() -> f64 {
    5.0 * std::f64::consts::SQRT_2 / 4.0
}
