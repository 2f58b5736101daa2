//! Seeded random tuple families.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::{c64, complex_normal, gaussian_matrix, random_unitary, ComplexMatrix, MatrixKind, random_matrix_with};
use crate::tuple::{joint_norm, OperatorTuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Independent Gaussian matrices.
    Dense,
    /// Polynomials in one matrix: either a dense one, or an upper-triangular
    /// one conjugated by a Haar unitary (chosen per sample).
    Commuting,
    /// Polynomials in one upper-triangular matrix, left triangular.
    CommutingUpperTriangular,
    /// `Q diag(z_k) Q*` with a shared unitary `Q`.
    NormalCommuting,
    /// Polynomials without constant term in a strictly upper-triangular
    /// matrix, conjugated by a Haar unitary.
    Nilpotent,
    /// `d = 1` dense.
    Single,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Dense,
        Family::Commuting,
        Family::CommutingUpperTriangular,
        Family::NormalCommuting,
        Family::Nilpotent,
        Family::Single,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Dense => "dense",
            Family::Commuting => "commuting",
            Family::CommutingUpperTriangular => "commuting-upper-triangular",
            Family::NormalCommuting => "normal-commuting",
            Family::Nilpotent => "nilpotent",
            Family::Single => "single",
        }
    }

    pub fn is_commuting(self) -> bool {
        !matches!(self, Family::Dense)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown family {s:?}")))
    }
}

fn strictly_upper(m: ComplexMatrix) -> ComplexMatrix {
    let mut a = m.into_nalgebra();
    let n = a.nrows();
    for j in 0..n {
        for i in j..n {
            a[(i, j)] = c64::new(0.0, 0.0);
        }
    }
    ComplexMatrix::wrap(a)
}

/// `c₀I + c₁A + c₂A²` with fresh Gaussian coefficients per tuple entry.
fn polynomials<R: Rng + ?Sized>(rng: &mut R, a: &ComplexMatrix, d: usize, constant: bool) -> Vec<ComplexMatrix> {
    let n = a.nrows();
    let a2 = a * a;
    (0..d)
        .map(|_| {
            let c0 = if constant { complex_normal(rng) } else { c64::new(0.0, 0.0) };
            let c1 = complex_normal(rng);
            let c2 = complex_normal(rng);
            &(&ComplexMatrix::identity(n).scale(c0) + &a.scale(c1)) + &a2.scale(c2)
        })
        .collect()
}

fn conjugate(u: &ComplexMatrix, ms: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    let ua = u.adjoint();
    ms.iter().map(|m| &(u * m) * &ua).collect()
}

/// Draw one tuple of the given family, rescaled to joint norm 1 unless it
/// vanishes.
pub fn generate<R: Rng + ?Sized>(rng: &mut R, family: Family, d: usize, n: usize) -> OperatorTuple {
    let t = generate_raw(rng, family, d, n);
    let norm = joint_norm(&t);
    if norm > 0.0 {
        t.scale(c64::new(1.0 / norm, 0.0))
    } else {
        t
    }
}

/// Unnormalized draw; matrices are scaled by `1/√n` so that spectra stay of
/// unit order as `n` grows.
pub fn generate_raw<R: Rng + ?Sized>(rng: &mut R, family: Family, d: usize, n: usize) -> OperatorTuple {
    assert!(d >= 1 && n >= 1, "tuple shape must be positive");
    let s = c64::new(1.0 / (n as f64).sqrt(), 0.0);
    let matrices = match family {
        Family::Dense => (0..d).map(|_| gaussian_matrix(rng, n, n).scale(s)).collect(),
        Family::Single => vec![gaussian_matrix(rng, n, n).scale(s)],
        Family::Commuting => {
            if rng.random::<bool>() {
                let a = gaussian_matrix(rng, n, n).scale(s);
                polynomials(rng, &a, d, true)
            } else {
                let a = random_matrix_with(rng, n, MatrixKind::UpperTriangular).scale(s);
                let ps = polynomials(rng, &a, d, true);
                conjugate(&random_unitary(rng, n), ps)
            }
        }
        Family::CommutingUpperTriangular => {
            let a = random_matrix_with(rng, n, MatrixKind::UpperTriangular).scale(s);
            polynomials(rng, &a, d, true)
        }
        Family::NormalCommuting => {
            let q = random_unitary(rng, n);
            let diags: Vec<ComplexMatrix> = (0..d)
                .map(|_| ComplexMatrix::from_diagonal(&(0..n).map(|_| complex_normal(rng)).collect::<Vec<_>>()))
                .collect();
            conjugate(&q, diags)
        }
        Family::Nilpotent => {
            let a = strictly_upper(gaussian_matrix(rng, n, n)).scale(s);
            let ps = polynomials(rng, &a, d, false);
            conjugate(&random_unitary(rng, n), ps)
        }
    };
    OperatorTuple::new(matrices).expect("generated tuple has consistent shape")
}
