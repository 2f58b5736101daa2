//! Spherical Aluthge transform `T̂ = (√P V₁ √P, …, √P V_d √P)`, the dual tuple
//! `(PV₁, …, PV_d)`, and the iterated transform with its norm trace.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ToleranceConfig;
use crate::polar::{spherical_polar, SphericalPolarDecomposition};
use crate::tuple::{joint_norm, OperatorTuple};

/// Transform built from an existing decomposition.
pub fn aluthge_from_decomposition(dec: &SphericalPolarDecomposition) -> OperatorTuple {
    dec.v.map(|vk| &(&dec.sqrt_p * vk) * &dec.sqrt_p)
}

pub fn spherical_aluthge(t: &OperatorTuple) -> Result<OperatorTuple> {
    spherical_aluthge_with(t, &ToleranceConfig::default())
}

pub fn spherical_aluthge_with(t: &OperatorTuple, tol: &ToleranceConfig) -> Result<OperatorTuple> {
    Ok(aluthge_from_decomposition(&spherical_polar(t, tol)?))
}

pub fn dual_from_decomposition(dec: &SphericalPolarDecomposition) -> OperatorTuple {
    dec.v.map(|vk| &dec.p * vk)
}

/// `(PV₁, …, PV_d)`.
pub fn dual_tuple(t: &OperatorTuple) -> Result<OperatorTuple> {
    dual_tuple_with(t, &ToleranceConfig::default())
}

pub fn dual_tuple_with(t: &OperatorTuple, tol: &ToleranceConfig) -> Result<OperatorTuple> {
    Ok(dual_from_decomposition(&spherical_polar(t, tol)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIter,
    NumericalBreakdown,
}

/// Iterates `T̂₀ = T, T̂ₙ₊₁ = (T̂ₙ)^`.
#[derive(Clone, Debug)]
pub struct AluthgeIteration {
    pub tuples: Vec<OperatorTuple>,
    /// `‖T̂ₙ‖` for every retained iterate.
    pub norm_trace: Vec<f64>,
    /// Rank of `P` in the decomposition of each retained iterate.
    pub ranks: Vec<usize>,
    pub stop_reason: StopReason,
    /// Diagnostic when `stop_reason` is a breakdown.
    pub breakdown: Option<String>,
}

impl AluthgeIteration {
    pub fn last_norm(&self) -> f64 {
        *self.norm_trace.last().expect("trace holds T̂₀")
    }

    pub fn last(&self) -> &OperatorTuple {
        self.tuples.last().expect("trace holds T̂₀")
    }

    /// Number of transforms applied.
    pub fn steps(&self) -> usize {
        self.tuples.len() - 1
    }
}

pub fn iterate_aluthge(t: &OperatorTuple, max_iter: usize, conv_tol: f64) -> Result<AluthgeIteration> {
    iterate_aluthge_with(t, max_iter, conv_tol, &ToleranceConfig::default())
}

/// Applies the transform until the norm decrement drops below `conv_tol` or
/// `max_iter` transforms have been applied. A failed decomposition ends the
/// run with [`StopReason::NumericalBreakdown`] and keeps the trace so far.
pub fn iterate_aluthge_with(
    t: &OperatorTuple,
    max_iter: usize,
    conv_tol: f64,
    tol: &ToleranceConfig,
) -> Result<AluthgeIteration> {
    if max_iter == 0 {
        return Err(Error::Precondition("max_iter must be at least 1".into()));
    }
    if !(conv_tol > 0.0) {
        return Err(Error::Precondition(format!(
            "conv_tol must be positive, got {conv_tol}"
        )));
    }
    tol.validate()?;

    let mut run = AluthgeIteration {
        tuples: vec![t.clone()],
        norm_trace: vec![joint_norm(t)],
        ranks: Vec::new(),
        stop_reason: StopReason::MaxIter,
        breakdown: None,
    };
    let mut current = t.clone();
    for step in 1..=max_iter {
        let dec = match spherical_polar(&current, tol) {
            Ok(dec) => dec,
            Err(e) => {
                run.stop_reason = StopReason::NumericalBreakdown;
                run.breakdown = Some(format!("step {step}: {e}"));
                return Ok(run);
            }
        };
        run.ranks.push(dec.rank);
        let next = aluthge_from_decomposition(&dec);
        if !next.is_finite() {
            run.stop_reason = StopReason::NumericalBreakdown;
            run.breakdown = Some(format!("step {step}: non-finite iterate"));
            return Ok(run);
        }
        let norm = joint_norm(&next);
        let prev = *run.norm_trace.last().unwrap();
        run.tuples.push(next.clone());
        run.norm_trace.push(norm);
        current = next;
        if prev - norm < conv_tol {
            run.stop_reason = StopReason::Converged;
            break;
        }
    }
    // Rank of the final iterate, so `ranks` lines up with `tuples`.
    match spherical_polar(&current, tol) {
        Ok(dec) => run.ranks.push(dec.rank),
        Err(e) => {
            run.stop_reason = StopReason::NumericalBreakdown;
            run.breakdown = Some(format!("final iterate: {e}"));
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{noncommuting_pair, noncommuting_pair_polar, noncommuting_pair_dual};
    use crate::linalg::{random_matrix, ComplexMatrix, MatrixKind};

    #[test]
    fn normal_matrix_is_fixed() {
        for seed in 0..10 {
            let n = random_matrix(4, MatrixKind::Normal, seed).unwrap();
            let t = OperatorTuple::single(n).unwrap();
            let hat = spherical_aluthge(&t).unwrap();
            assert!(hat.max_abs_diff(&t) < 1e-10, "seed {seed}");
            let dual = dual_tuple(&t).unwrap();
            assert!(dual.max_abs_diff(&t) < 1e-10);
        }
    }

    #[test]
    fn example_transform_and_dual() {
        let t = noncommuting_pair();
        let (p, v1, v2) = noncommuting_pair_polar();
        let sqrt_p = ComplexMatrix::from_real_diagonal(&[1.0, 2f64.sqrt().sqrt()]);
        let expect = OperatorTuple::new(vec![&(&sqrt_p * &v1) * &sqrt_p, &(&sqrt_p * &v2) * &sqrt_p]).unwrap();
        assert!(spherical_aluthge(&t).unwrap().max_abs_diff(&expect) < 1e-12);
        let dual = dual_tuple(&t).unwrap();
        assert!(dual.max_abs_diff(&noncommuting_pair_dual()) < 1e-12);
        assert!(dual.get(0).max_abs_diff(&(&p * &v1)) < 1e-12);
    }

    #[test]
    fn identity_dual() {
        let t = OperatorTuple::single(ComplexMatrix::identity(2)).unwrap();
        assert!(dual_tuple(&t).unwrap().max_abs_diff(&t) < 1e-14);
    }

    #[test]
    fn iteration_preconditions() {
        let t = noncommuting_pair();
        assert!(matches!(iterate_aluthge(&t, 0, 1e-12), Err(Error::Precondition(_))));
        assert!(matches!(iterate_aluthge(&t, 5, 0.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn jordan_block_collapses() {
        let j = OperatorTuple::single(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap())
            .unwrap();
        let run = iterate_aluthge(&j, 10, 1e-14).unwrap();
        assert_eq!(run.norm_trace[0], 1.0);
        assert!(run.last_norm() < 1e-12);
        assert_eq!(run.stop_reason, StopReason::Converged);
        assert_eq!(run.ranks.len(), run.tuples.len());
    }

    #[test]
    fn zero_tuple_converges_immediately() {
        let run = iterate_aluthge(&OperatorTuple::zeros(2, 3), 5, 1e-14).unwrap();
        assert!(run.norm_trace.iter().all(|&x| x == 0.0));
        assert_eq!(run.stop_reason, StopReason::Converged);
        assert_eq!(run.ranks, vec![0, 0]);
    }

    #[test]
    fn trace_is_monotone() {
        for seed in 0..10u64 {
            let t = OperatorTuple::new(
                (0..2)
                    .map(|k| random_matrix(3, MatrixKind::Dense, 10 * seed + k).unwrap())
                    .collect(),
            )
            .unwrap();
            let run = iterate_aluthge(&t, 30, 1e-15).unwrap();
            for w in run.norm_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9);
            }
        }
    }
}
