//! Dense complex-matrix primitives.
//!
//! Matrices are small (desk-scale tuples, n ≲ 8), so everything is dense and
//! allocation-happy. Hermitian eigendecompositions and complex Schur forms are
//! delegated to `nalgebra`; the one-sided Jacobi SVD used by the spherical
//! polar decomposition is implemented here because it delivers singular values
//! with high relative accuracy, which keeps rank decisions stable when the
//! Aluthge iteration drives a tuple towards a singular one.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[allow(non_camel_case_types)]
pub type c64 = Complex64;

/// Numerical thresholds shared by every routine in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Eigenvalues (or singular values) at or below `rank_rel_tol * max` are exact zeros.
    pub rank_rel_tol: f64,
    /// Reconstruction / consistency tolerance, scaled by `1 + ‖·‖` at use sites.
    pub recon_tol: f64,
    /// Slack granted to optimizer-based estimates of suprema.
    pub opt_slack: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-10,
            recon_tol: 1e-9,
            opt_slack: 1e-4,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rank_rel_tol: f64, recon_tol: f64, opt_slack: f64) -> Result<Self> {
        let cfg = Self {
            rank_rel_tol,
            recon_tol,
            opt_slack,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rank_rel_tol) || self.rank_rel_tol >= 1.0 {
            return Err(Error::Precondition(format!(
                "rank_rel_tol must lie in (0, 1), got {}",
                self.rank_rel_tol
            )));
        }
        if !positive(self.recon_tol) {
            return Err(Error::Precondition(format!(
                "recon_tol must be positive, got {}",
                self.recon_tol
            )));
        }
        if !positive(self.opt_slack) {
            return Err(Error::Precondition(format!(
                "opt_slack must be positive, got {}",
                self.opt_slack
            )));
        }
        Ok(())
    }
}

/// Dense complex matrix with at least one row and one column and finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<c64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.nrows(), self.ncols())?;
        for i in 0..self.nrows() {
            write!(f, "  ")?;
            for j in 0..self.ncols() {
                let z = self.0[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, validating shape and finiteness.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<c64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_rows(rows: &[Vec<c64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    /// Real-valued convenience constructor, mostly for fixtures.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<c64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| c64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Wraps an nalgebra matrix, validating it.
    pub fn from_nalgebra(m: DMatrix<c64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input("non-finite entry".into()));
        }
        Ok(Self(m))
    }

    /// Internal constructor for results of arithmetic on valid matrices.
    pub(crate) fn wrap(m: DMatrix<c64>) -> Self {
        debug_assert!(m.nrows() > 0 && m.ncols() > 0);
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(DMatrix::identity(n, n))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::wrap(DMatrix::zeros(rows, cols))
    }

    pub fn from_diagonal(diag: &[c64]) -> Self {
        Self::wrap(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<c64> = diag.iter().map(|&x| c64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.0[(i, j)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<c64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<c64> {
        self.0
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<c64> {
        let mut out = Vec::with_capacity(self.nrows() * self.ncols());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.0.adjoint())
    }

    pub fn scale(&self, c: c64) -> Self {
        Self::wrap(&self.0 * c)
    }

    /// `(X + X*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::wrap((&self.0 + self.0.adjoint()) * c64::new(0.5, 0.0))
    }

    pub fn trace(&self) -> c64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest modulus strictly below the diagonal.
    pub fn max_abs_below_diagonal(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.ncols() {
            for i in (j + 1)..self.nrows() {
                m = m.max(self.0[(i, j)].norm());
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<c64> {
        (0..self.nrows().min(self.ncols()))
            .map(|i| self.0[(i, i)])
            .collect()
    }

    /// Integer power of a square matrix.
    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square());
        let mut acc = Self::identity(self.nrows());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// `‖X − X*‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::wrap(&self.0 - &rhs.0)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    pub unitary: ComplexMatrix,
}

impl HermitianEig {
    /// `U · diag(f(λ)) · U*`, made exactly Hermitian.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> ComplexMatrix {
        let u = self.unitary.as_nalgebra();
        let mut scaled = u.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(j).scale_mut(s);
        }
        ComplexMatrix::wrap(&scaled * u.adjoint()).hermitian_part()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    hermitian_eig_with(m, &ToleranceConfig::default())
}

pub fn hermitian_eig_with(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::Precondition(format!(
            "hermitian_eig needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = m.hermitian_defect();
    let bound = tol.recon_tol * (1.0 + m.frobenius_norm());
    if defect > bound {
        return Err(Error::Precondition(format!(
            "matrix is not Hermitian: ‖M − M*‖ = {defect:e} exceeds {bound:e}"
        )));
    }
    Ok(hermitian_eig_unchecked(m.hermitian_part().as_nalgebra()))
}

/// Eigendecomposition of an (assumed) Hermitian nalgebra matrix.
pub(crate) fn hermitian_eig_unchecked(h: &DMatrix<c64>) -> HermitianEig {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let unitary = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEig {
        eigenvalues,
        unitary: ComplexMatrix::wrap(unitary),
    }
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian matrix.
pub(crate) fn top_eigenpair(h: &DMatrix<c64>) -> (f64, DVector<c64>) {
    let eig = h.clone().symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).into_owned())
}

/// Largest eigenvalue of a Hermitian matrix.
pub(crate) fn max_eigenvalue(h: &DMatrix<c64>) -> f64 {
    h.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

fn psd_spectrum(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<(HermitianEig, f64)> {
    let eig = hermitian_eig_with(m, tol)?;
    let scale = eig
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max);
    let cutoff = tol.rank_rel_tol * scale;
    let lowest = eig.min_eigenvalue();
    if lowest < -cutoff {
        return Err(Error::NotPsd {
            eigenvalue: lowest,
            cutoff: -cutoff,
        });
    }
    Ok((eig, cutoff))
}

/// Square root of a Hermitian PSD matrix. Eigenvalues at or below the rank
/// cutoff (including negative roundoff) are treated as zero.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let (eig, cutoff) = psd_spectrum(m, tol)?;
    Ok(eig.apply(|l| if l > cutoff { l.sqrt() } else { 0.0 }))
}

/// Moore–Penrose pseudo-inverse of a Hermitian PSD matrix with the rank cutoff applied.
pub fn psd_pinv(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    let (eig, cutoff) = psd_spectrum(m, tol)?;
    Ok(eig.apply(|l| if l > cutoff { 1.0 / l } else { 0.0 }))
}

/// Largest singular value, computed as `sqrt(λ_max)` of the Gram matrix.
///
/// Both `M*M` and `MM*` are evaluated and the larger top eigenvalue kept, so
/// the result is bitwise symmetric under taking adjoints.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    let a = m.as_nalgebra();
    let left = max_eigenvalue(&(a.adjoint() * a));
    let right = max_eigenvalue(&(a * a.adjoint()));
    left.max(right).max(0.0).sqrt()
}

/// Spectral norm of a Hermitian PSD matrix (its top eigenvalue).
pub(crate) fn psd_norm(h: &DMatrix<c64>) -> f64 {
    max_eigenvalue(h).max(0.0)
}

/// Thin singular value decomposition `M = left · diag(σ) · right*`.
#[derive(Clone, Debug)]
pub struct ThinSvd {
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `rows × cols`; column j is `M·right_j / σ_j`, or zero when `σ_j = 0`.
    pub left: ComplexMatrix,
    /// `cols × cols` unitary.
    pub right: ComplexMatrix,
}

/// One-sided (Hestenes) Jacobi SVD for matrices with `rows ≥ cols`.
pub fn jacobi_svd(m: &ComplexMatrix) -> Result<ThinSvd> {
    const MAX_SWEEPS: usize = 100;
    const ORTH_TOL: f64 = 1e-15;

    let (rows, n) = (m.nrows(), m.ncols());
    if rows < n {
        return Err(Error::Dimension(format!(
            "jacobi_svd expects rows >= cols, got {rows}x{n}"
        )));
    }
    let src = m.as_nalgebra();
    let mut a: Vec<Vec<c64>> = (0..n).map(|j| src.column(j).iter().copied().collect()).collect();
    let mut v: Vec<Vec<c64>> = (0..n)
        .map(|j| {
            let mut col = vec![c64::new(0.0, 0.0); n];
            col[j] = c64::new(1.0, 0.0);
            col
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = a[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: c64 = a[p].iter().zip(&a[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= ORTH_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase_conj = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut a, p, q, c, s, phase_conj);
                rotate_pair(&mut v, p, q, c, s, phase_conj);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Breakdown(
            "one-sided Jacobi SVD did not converge".into(),
        ));
    }

    let norms: Vec<f64> = a
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let left = DMatrix::from_fn(rows, n, |i, k| {
        let j = order[k];
        if norms[j] > 0.0 {
            a[j][i] / norms[j]
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let right = DMatrix::from_fn(n, n, |i, k| v[order[k]][i]);
    Ok(ThinSvd {
        singular_values,
        left: ComplexMatrix::wrap(left),
        right: ComplexMatrix::wrap(right),
    })
}

fn rotate_pair(cols: &mut [Vec<c64>], p: usize, q: usize, c: f64, s: f64, phase_conj: c64) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let xp = *x;
        let yq = phase_conj * *y;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Complex Schur form `M = Q · T · Q*` with `T` upper triangular.
pub fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::Precondition("schur needs a square matrix".into()));
    }
    let s = nalgebra::linalg::Schur::try_new(m.as_nalgebra().clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Breakdown("complex Schur iteration did not converge".into()))?;
    let (q, t) = s.unpack();
    Ok((ComplexMatrix::wrap(q), ComplexMatrix::wrap(t)))
}

/// Eigenvalues of a general square matrix, read off its Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<c64>> {
    let (_, t) = schur(m)?;
    Ok(t.diagonal())
}

/// Spectral radius `max |λ|` of a square matrix.
pub fn spectral_radius(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Structural families for [`random_matrix`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixKind {
    Dense,
    UpperTriangular,
    Normal,
    Psd,
}

/// Complex standard normal: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> c64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    // Fill row-major so draws do not depend on storage order.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    ComplexMatrix::wrap(m)
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = gaussian_matrix(rng, n, n).into_nalgebra();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    ComplexMatrix::wrap(q)
}

pub fn random_matrix_with<R: Rng + ?Sized>(rng: &mut R, n: usize, kind: MatrixKind) -> ComplexMatrix {
    assert!(n >= 1, "dimension must be positive");
    match kind {
        MatrixKind::Dense => gaussian_matrix(rng, n, n),
        MatrixKind::UpperTriangular => {
            let mut m = gaussian_matrix(rng, n, n).into_nalgebra();
            for j in 0..n {
                for i in (j + 1)..n {
                    m[(i, j)] = c64::new(0.0, 0.0);
                }
            }
            ComplexMatrix::wrap(m)
        }
        MatrixKind::Normal => {
            let u = random_unitary(rng, n);
            let diag: Vec<c64> = (0..n).map(|_| complex_normal(rng)).collect();
            &(&u * &ComplexMatrix::from_diagonal(&diag)) * &u.adjoint()
        }
        MatrixKind::Psd => {
            let a = gaussian_matrix(rng, n, n);
            (&a.adjoint() * &a).hermitian_part()
        }
    }
}

/// Deterministic random matrix for a given `(n, kind, seed)`.
pub fn random_matrix(n: usize, kind: MatrixKind, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::Precondition("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_matrix_with(&mut rng, n, kind))
}
