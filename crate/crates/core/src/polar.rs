//! Spherical polar decomposition `T_k = V_k P`.
//!
//! The tuple is stacked into the column operator `S = [T₁; …; T_d]` and `S`
//! is factored by a one-sided Jacobi SVD, `S = W Σ Y*`. Then `P = Y Σ Y*`,
//! the stacked partial isometry is `W_r Y_r*` restricted to singular values
//! above the rank cutoff, and `R = Y_r Y_r*` is the projection onto the range
//! of `P`. On the kernel of `P` every `V_k` is zero.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{c64, jacobi_svd, spectral_norm, ComplexMatrix, ToleranceConfig};
use crate::tuple::{joint_norm, OperatorTuple};

#[derive(Clone, Debug)]
pub struct SphericalPolarDecomposition {
    /// `(Σ T_k* T_k)^{1/2}`.
    pub p: ComplexMatrix,
    /// `P^{1/2}`, from the same factorization as `p`.
    pub sqrt_p: ComplexMatrix,
    /// Joint partial isometry `(V₁, …, V_d)`.
    pub v: OperatorTuple,
    /// `Σ V_k* V_k`, the orthogonal projection onto the range of `P`.
    pub r: ComplexMatrix,
    /// Numerical rank of `P`.
    pub rank: usize,
    /// Eigenvalues of `P`, descending (before the rank cutoff is applied).
    pub singular_values: Vec<f64>,
    /// `‖S − V P‖_F` of the stacked factorization.
    pub residual: f64,
    pub tol: ToleranceConfig,
}

impl SphericalPolarDecomposition {
    /// `max_k ‖V_k (I − R)‖`, zero when the kernel condition holds exactly.
    pub fn kernel_leak(&self) -> f64 {
        let n = self.p.nrows();
        let k = &ComplexMatrix::identity(n) - &self.r;
        self.v
            .iter()
            .map(|vk| spectral_norm(&(vk * &k)))
            .fold(0.0, f64::max)
    }
}

/// `U · diag(f(σ_j) for j < rank, 0 otherwise) · U*`, exactly Hermitian.
fn spectral_function(y: &DMatrix<c64>, sigma: &[f64], rank: usize, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let mut scaled = y.clone();
    for (j, &s) in sigma.iter().enumerate() {
        let w = if j < rank { f(s) } else { 0.0 };
        scaled.column_mut(j).scale_mut(w);
    }
    ComplexMatrix::wrap(&scaled * y.adjoint()).hermitian_part()
}

pub fn spherical_polar(t: &OperatorTuple, tol: &ToleranceConfig) -> Result<SphericalPolarDecomposition> {
    tol.validate()?;
    if !t.is_finite() {
        return Err(Error::Breakdown("tuple has non-finite entries".into()));
    }
    let (d, n) = (t.d(), t.dim());
    let stacked = t.stacked();
    let svd = jacobi_svd(&stacked)?;
    let sigma = svd.singular_values;
    let top = sigma[0];
    let cutoff = tol.rank_rel_tol * top;
    let rank = if top > 0.0 {
        sigma.iter().take_while(|&&s| s > cutoff).count()
    } else {
        0
    };

    let y = svd.right.as_nalgebra();
    let p = spectral_function(y, &sigma, rank, |s| s);
    let sqrt_p = spectral_function(y, &sigma, rank, f64::sqrt);
    let r = spectral_function(y, &sigma, rank, |_| 1.0);

    let w = svd.left.as_nalgebra();
    let v_stacked = w.columns(0, rank) * y.columns(0, rank).adjoint();
    let v = OperatorTuple::new(
        (0..d)
            .map(|k| ComplexMatrix::wrap(v_stacked.view((k * n, 0), (n, n)).into_owned()))
            .collect(),
    )?;

    let recon = &v_stacked * p.as_nalgebra();
    let residual = (stacked.as_nalgebra() - recon)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let bound = tol.recon_tol * (1.0 + joint_norm(t));
    if !(residual <= bound) {
        return Err(Error::Breakdown(format!(
            "polar reconstruction residual {residual:e} exceeds {bound:e}"
        )));
    }

    Ok(SphericalPolarDecomposition {
        p,
        sqrt_p,
        v,
        r,
        rank,
        singular_values: sigma,
        residual,
        tol: *tol,
    })
}

/// `max_{j,k} ‖V_j P V_k − V_k P V_j‖`; vanishes exactly when the tuple commutes.
pub fn commutation_witness(dec: &SphericalPolarDecomposition) -> f64 {
    let v = &dec.v;
    let mut worst = 0.0f64;
    for j in 0..v.d() {
        for k in (j + 1)..v.d() {
            let a = &(v.get(j) * &dec.p) * v.get(k);
            let b = &(v.get(k) * &dec.p) * v.get(j);
            worst = worst.max(spectral_norm(&(&a - &b)));
        }
    }
    worst
}
