//! Operator tuples and their algebra: joint norm, lexicographic products,
//! power norms through the Gram recursion, commutativity checks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c64, psd_norm, ComplexMatrix};

/// An ordered list `(T₁, …, T_d)` of square matrices of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTuple {
    matrices: Vec<ComplexMatrix>,
}

impl OperatorTuple {
    pub fn new(matrices: Vec<ComplexMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Dimension("a tuple needs at least one matrix".into()))?;
        let n = first.nrows();
        for (k, m) in matrices.iter().enumerate() {
            if !m.is_square() || m.nrows() != n {
                return Err(Error::Dimension(format!(
                    "entry {k} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self { matrices })
    }

    pub fn single(m: ComplexMatrix) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        assert!(d >= 1 && n >= 1);
        Self {
            matrices: vec![ComplexMatrix::zeros(n, n); d],
        }
    }

    /// Tuple length `d`.
    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    /// Common matrix dimension `n`.
    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn get(&self, k: usize) -> &ComplexMatrix {
        &self.matrices[k]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    pub fn into_matrices(self) -> Vec<ComplexMatrix> {
        self.matrices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexMatrix> {
        self.matrices.iter()
    }

    pub fn scale(&self, c: c64) -> Self {
        Self {
            matrices: self.matrices.iter().map(|m| m.scale(c)).collect(),
        }
    }

    /// Applies `f` to every entry.
    pub fn map<F: Fn(&ComplexMatrix) -> ComplexMatrix>(&self, f: F) -> Self {
        Self {
            matrices: self.matrices.iter().map(f).collect(),
        }
    }

    /// `Σ_k T_k* T_k`, Hermitian by construction.
    pub fn gram(&self) -> ComplexMatrix {
        ComplexMatrix::wrap(gram_raw(self.matrices.iter().map(|m| m.as_nalgebra()))).hermitian_part()
    }

    /// The column operator `S = [T₁; …; T_d]` of size `dn × n`.
    pub fn stacked(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut s = DMatrix::zeros(self.d() * n, n);
        for (k, m) in self.matrices.iter().enumerate() {
            s.view_mut((k * n, 0), (n, n)).copy_from(m.as_nalgebra());
        }
        ComplexMatrix::wrap(s)
    }

    pub fn is_finite(&self) -> bool {
        self.matrices.iter().all(ComplexMatrix::is_finite)
    }

    /// Largest elementwise difference against a tuple of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.d(), other.d());
        self.matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

fn gram_raw<'a, I: Iterator<Item = &'a DMatrix<c64>>>(ms: I) -> DMatrix<c64> {
    let mut acc: Option<DMatrix<c64>> = None;
    for m in ms {
        let term = m.adjoint() * m;
        acc = Some(match acc {
            Some(a) => a + term,
            None => term,
        });
    }
    acc.expect("non-empty tuple")
}

/// `‖T‖ = ‖Σ T_k* T_k‖^{1/2}`.
pub fn joint_norm(t: &OperatorTuple) -> f64 {
    psd_norm(t.gram().as_nalgebra()).sqrt()
}

/// `TS = (T₁S₁, …, T₁S_m, …, T_dS_m)` in lexicographic order.
pub fn tuple_product(t: &OperatorTuple, s: &OperatorTuple) -> Result<OperatorTuple> {
    if t.dim() != s.dim() {
        return Err(Error::Dimension(format!(
            "cannot multiply tuples of dimension {} and {}",
            t.dim(),
            s.dim()
        )));
    }
    let mut out = Vec::with_capacity(t.d() * s.d());
    for a in t.iter() {
        for b in s.iter() {
            out.push(a * b);
        }
    }
    OperatorTuple::new(out)
}

/// `Tᵏ` materialized as a `dᵏ`-tuple. Exponential in `k`; meant for checks.
pub fn tuple_power(t: &OperatorTuple, k: u32) -> Result<OperatorTuple> {
    if k == 0 {
        return Err(Error::Precondition("tuple powers start at k = 1".into()));
    }
    let mut acc = t.clone();
    for _ in 1..k {
        acc = tuple_product(t, &acc)?;
    }
    Ok(acc)
}

/// The Gram matrices `Q₀ = I, Q_k = Σ_i T_i* Q_{k−1} T_i` with `‖Tᵏ‖ = ‖Q_k‖^{1/2}`.
#[derive(Clone, Debug)]
pub struct GramSequence {
    pub base: OperatorTuple,
    pub matrices: Vec<ComplexMatrix>,
    pub norms: Vec<f64>,
}

fn gram_step(t: &OperatorTuple, q: &DMatrix<c64>) -> DMatrix<c64> {
    let mut acc = DMatrix::zeros(q.nrows(), q.ncols());
    for m in t.iter() {
        let m = m.as_nalgebra();
        acc += m.adjoint() * q * m;
    }
    // Symmetrize to keep the sequence exactly Hermitian.
    (&acc + acc.adjoint()) * c64::new(0.5, 0.0)
}

/// Unscaled Gram sequence up to `Q_N`. Entries grow like `‖T‖^{2k}`; use
/// [`log_power_norms`] for long horizons.
pub fn gram_sequence(t: &OperatorTuple, n_max: usize) -> GramSequence {
    let n = t.dim();
    let mut q = DMatrix::identity(n, n);
    let mut matrices = vec![ComplexMatrix::wrap(q.clone())];
    let mut norms = vec![1.0];
    for _ in 0..n_max {
        q = gram_step(t, &q);
        norms.push(psd_norm(&q).sqrt());
        matrices.push(ComplexMatrix::wrap(q.clone()));
    }
    GramSequence {
        base: t.clone(),
        matrices,
        norms,
    }
}

/// `ln ‖Tᵏ‖` for `k = 1..=k_max`, computed by the Gram recursion with
/// per-step renormalization. A vanishing power gives `-∞` from then on.
pub fn log_power_norms(t: &OperatorTuple, k_max: usize) -> Vec<f64> {
    let n = t.dim();
    let mut q = DMatrix::identity(n, n);
    let mut log_sq = 0.0f64;
    let mut out = Vec::with_capacity(k_max);
    for _ in 0..k_max {
        if log_sq == f64::NEG_INFINITY {
            out.push(f64::NEG_INFINITY);
            continue;
        }
        let next = gram_step(t, &q);
        let s = psd_norm(&next);
        if s == 0.0 {
            log_sq = f64::NEG_INFINITY;
        } else {
            log_sq += s.ln();
            q = next / c64::new(s, 0.0);
        }
        out.push(0.5 * log_sq);
    }
    out
}

/// `‖Tᵏ‖` for `k = 1..=k_max`.
pub fn power_norms(t: &OperatorTuple, k_max: usize) -> Vec<f64> {
    log_power_norms(t, k_max).into_iter().map(f64::exp).collect()
}

/// `‖Tᵏ‖` without materializing the `dᵏ` products.
pub fn tuple_power_norm(t: &OperatorTuple, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("tuple_power_norm needs k >= 1".into()));
    }
    Ok(power_norms(t, k)[k - 1])
}

/// Outcome of a commutativity test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutationCheck {
    pub commuting: bool,
    /// `max_{j<k} ‖T_jT_k − T_kT_j‖` (spectral norm).
    pub witness: f64,
    /// `tol · (1 + ‖T‖²)`.
    pub threshold: f64,
}

pub fn max_commutator(t: &OperatorTuple) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..t.d() {
        for k in (j + 1)..t.d() {
            let c = &(t.get(j) * t.get(k)) - &(t.get(k) * t.get(j));
            worst = worst.max(crate::linalg::spectral_norm(&c));
        }
    }
    worst
}

pub fn is_commuting(t: &OperatorTuple, tol: f64) -> CommutationCheck {
    let witness = max_commutator(t);
    let norm = joint_norm(t);
    let threshold = tol * (1.0 + norm * norm);
    CommutationCheck {
        commuting: witness <= threshold,
        witness,
        threshold,
    }
}

/// Fails with [`Error::NotCommuting`] unless the tuple commutes.
pub fn require_commuting(t: &OperatorTuple, tol: f64) -> Result<CommutationCheck> {
    let check = is_commuting(t, tol);
    if check.commuting {
        Ok(check)
    } else {
        Err(Error::NotCommuting {
            witness: check.witness,
            threshold: check.threshold,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::noncommuting_pair;
    use crate::linalg::{random_matrix, spectral_norm, MatrixKind};
    use approx::assert_abs_diff_eq;

    fn rand_tuple(d: usize, n: usize, seed: u64) -> OperatorTuple {
        OperatorTuple::new(
            (0..d)
                .map(|k| random_matrix(n, MatrixKind::Dense, seed * 31 + k as u64).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn construction_checks_shapes() {
        assert!(OperatorTuple::new(vec![]).is_err());
        let bad = vec![ComplexMatrix::identity(2), ComplexMatrix::identity(3)];
        assert!(matches!(OperatorTuple::new(bad), Err(Error::Dimension(_))));
        assert!(OperatorTuple::new(vec![ComplexMatrix::zeros(2, 3)]).is_err());
    }

    #[test]
    fn joint_norm_fixtures() {
        let id = OperatorTuple::single(ComplexMatrix::identity(3)).unwrap();
        assert_abs_diff_eq!(joint_norm(&id), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(joint_norm(&noncommuting_pair()), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn product_identity_and_singletons() {
        let t = rand_tuple(3, 3, 1);
        let id = OperatorTuple::single(ComplexMatrix::identity(3)).unwrap();
        assert_eq!(tuple_product(&t, &id).unwrap(), t);

        let a = random_matrix(3, MatrixKind::Dense, 2).unwrap();
        let b = random_matrix(3, MatrixKind::Dense, 3).unwrap();
        let ab = tuple_product(
            &OperatorTuple::single(a.clone()).unwrap(),
            &OperatorTuple::single(b.clone()).unwrap(),
        )
        .unwrap();
        assert_eq!(ab.d(), 1);
        assert_eq!(ab.get(0), &(&a * &b));

        let other = OperatorTuple::single(ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(tuple_product(&t, &other), Err(Error::Dimension(_))));
    }

    #[test]
    fn example_square_layout() {
        let t = noncommuting_pair();
        let sq = tuple_product(&t, &t).unwrap();
        assert_eq!(sq.d(), 4);
        let (t1, t2) = (t.get(0), t.get(1));
        assert_eq!(sq.get(0).max_abs(), 0.0); // T₁² = 0
        assert_eq!(sq.get(1), &(t1 * t2));
        assert_eq!(sq.get(2), &(t2 * t1));
        assert_eq!(sq.get(3), &(t2 * t2));
        // T₁T₂ = [[1,0],[0,0]], T₂T₁ = [[0,0],[0,1]], T₂² = −I.
        let e = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert_eq!(sq.get(1), &e);
        assert_eq!(sq.get(3), &ComplexMatrix::identity(2).scale(c64::new(-1.0, 0.0)));
    }

    #[test]
    fn power_norm_reductions() {
        let t = rand_tuple(2, 3, 4);
        assert_abs_diff_eq!(tuple_power_norm(&t, 1).unwrap(), joint_norm(&t), epsilon = 1e-12);
        let a = random_matrix(4, MatrixKind::Dense, 9).unwrap();
        let single = OperatorTuple::single(a.clone()).unwrap();
        for k in 1..5u32 {
            let direct = spectral_norm(&a.pow(k));
            let got = tuple_power_norm(&single, k as usize).unwrap();
            assert!((direct - got).abs() <= 1e-10 * direct.max(1.0), "k={k}");
        }
        assert!(tuple_power_norm(&t, 0).is_err());
    }

    #[test]
    fn power_norm_matches_words() {
        // Brute force over all 2³ index words.
        let t = rand_tuple(2, 3, 12);
        let mut gram = ComplexMatrix::zeros(3, 3);
        for w in 0..8usize {
            let word = [(w >> 2) & 1, (w >> 1) & 1, w & 1];
            let prod = &(t.get(word[0]) * t.get(word[1])) * t.get(word[2]);
            gram = &gram + &(&prod.adjoint() * &prod);
        }
        let brute = spectral_norm(&gram).sqrt();
        assert!((tuple_power_norm(&t, 3).unwrap() - brute).abs() < 1e-10 * brute);
    }

    #[test]
    fn nilpotent_power_vanishes() {
        let j = OperatorTuple::single(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap())
            .unwrap();
        let norms = power_norms(&j, 4);
        assert_eq!(norms, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn gram_sequence_invariants() {
        let t = rand_tuple(3, 3, 5);
        let g = gram_sequence(&t, 4);
        assert_eq!(g.matrices[0], ComplexMatrix::identity(3));
        let logs = log_power_norms(&t, 4);
        for k in 1..=4 {
            assert!(g.matrices[k].hermitian_defect() < 1e-12);
            assert!((g.norms[k].ln() - logs[k - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn commutativity_fixtures() {
        let a = random_matrix(3, MatrixKind::Dense, 6).unwrap();
        let poly = OperatorTuple::new(vec![a.clone(), &a * &a]).unwrap();
        assert!(is_commuting(&poly, 1e-9).commuting);

        let ex = is_commuting(&noncommuting_pair(), 1e-9);
        assert!(!ex.commuting);
        assert!(require_commuting(&noncommuting_pair(), 1e-9).is_err());

        let d1 = ComplexMatrix::from_diagonal(&[c64::new(0.3, 1.0), c64::new(-2.0, 0.5)]);
        let d2 = ComplexMatrix::from_diagonal(&[c64::new(1.1, 0.0), c64::new(0.0, -0.7)]);
        let diag = is_commuting(&OperatorTuple::new(vec![d1, d2]).unwrap(), 1e-9);
        assert!(diag.commuting);
        assert!(diag.witness < 1e-15);
    }
}
