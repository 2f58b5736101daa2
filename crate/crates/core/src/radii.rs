//! Numerical radius, joint numerical radius, and joint spectral radius.
//!
//! The suprema defining `ω(T)` and `ω(T)` for tuples have no finite
//! algorithm. Every optimizer here only ever reports values attained at
//! feasible points, so numerical-radius estimates are certified lower bounds.
//! Spectral-radius estimates via `‖Tⁿ‖^{1/n}` and the Aluthge norm trace are
//! upper bounds; the joint-eigenvalue oracle is exact up to roundoff.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::aluthge::{iterate_aluthge, StopReason};
use crate::error::{Error, Result};
use crate::exec::map_indexed;
use crate::linalg::{c64, complex_normal, schur, spectral_norm, top_eigenpair, ComplexMatrix, ToleranceConfig};
use crate::seed;
use crate::tuple::{log_power_norms, require_commuting, OperatorTuple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMethod {
    ThetaGrid,
    DashDirect,
    LambdaSphere,
    Gelfand,
    AluthgeLimit,
    JointEigOracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub step: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusEstimate {
    pub value: f64,
    pub method: RadiusMethod,
    pub is_lower_bound: bool,
    pub trace: Vec<TracePoint>,
    pub params: BTreeMap<String, Value>,
}

// ---------------------------------------------------------------------------
// Single operator

/// Default θ grid for [`numerical_radius`].
pub const DEFAULT_GRID: usize = 720;

/// Maximizer of `θ ↦ λ_max(Re(e^{iθ}M))`.
#[derive(Clone, Debug)]
pub(crate) struct ThetaSolution {
    pub value: f64,
    pub theta: f64,
    pub vector: DVector<c64>,
    pub trace: Vec<TracePoint>,
}

/// `Re(e^{iθ}M) = cos θ · A − sin θ · B` with `A = (M+M*)/2`, `B = (M−M*)/2i`.
struct RealPartPencil {
    a: DMatrix<c64>,
    b: DMatrix<c64>,
}

impl RealPartPencil {
    fn new(m: &DMatrix<c64>) -> Self {
        let adj = m.adjoint();
        let a = (m + &adj) * c64::new(0.5, 0.0);
        let b = (m - &adj) * c64::new(0.0, -0.5);
        Self { a, b }
    }

    fn at(&self, theta: f64) -> DMatrix<c64> {
        let (s, c) = theta.sin_cos();
        &self.a * c64::new(c, 0.0) - &self.b * c64::new(s, 0.0)
    }

    fn eval(&self, theta: f64) -> (f64, DVector<c64>) {
        top_eigenpair(&self.at(theta))
    }
}

pub(crate) fn theta_search(m: &DMatrix<c64>, grid: usize, refine_tol: f64) -> ThetaSolution {
    let pencil = RealPartPencil::new(m);
    let mut best = (f64::NEG_INFINITY, 0.0, DVector::zeros(m.nrows()));
    for j in 0..grid {
        let theta = TAU * j as f64 / grid as f64;
        let (v, x) = pencil.eval(theta);
        if v > best.0 {
            best = (v, theta, x);
        }
    }
    let mut trace = vec![TracePoint { step: 0, value: best.0 }];

    // Golden-section refinement around the best grid point.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let h = TAU / grid as f64;
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = pencil.eval(x1);
    let mut f2 = pencil.eval(x2);
    let mut step = 0;
    while hi - lo > refine_tol && step < 200 {
        step += 1;
        if f1.0 >= f2.0 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = pencil.eval(x1);
            if f1.0 > best.0 {
                best = (f1.0, x1, f1.1.clone());
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = pencil.eval(x2);
            if f2.0 > best.0 {
                best = (f2.0, x2, f2.1.clone());
            }
        }
        trace.push(TracePoint { step, value: best.0 });
    }
    for cand in [&f1, &f2] {
        if cand.0 > best.0 {
            best = (cand.0, best.1, cand.1.clone());
        }
    }
    ThetaSolution {
        value: best.0,
        theta: best.1,
        vector: best.2,
        trace,
    }
}

/// `ω(M) = sup_θ λ_max(Re(e^{iθ}M))` by a uniform θ grid followed by local
/// golden-section refinement. Before refinement the grid value is within
/// `‖M‖·π/grid` of the supremum, since the objective is `‖M‖`-Lipschitz.
pub fn numerical_radius(m: &ComplexMatrix, grid: usize, refine_tol: f64) -> Result<RadiusEstimate> {
    if !m.is_square() {
        return Err(Error::Precondition("numerical radius needs a square matrix".into()));
    }
    if grid < 8 {
        return Err(Error::Precondition(format!("theta grid must have at least 8 points, got {grid}")));
    }
    if !(refine_tol > 0.0) {
        return Err(Error::Precondition("refine_tol must be positive".into()));
    }
    let sol = theta_search(m.as_nalgebra(), grid, refine_tol);
    let mut params = BTreeMap::new();
    params.insert("grid".into(), json!(grid));
    params.insert("refine_tol".into(), json!(refine_tol));
    params.insert("theta".into(), json!(sol.theta));
    params.insert("grid_error_bound".into(), json!(spectral_norm(m) * PI / grid as f64));
    Ok(RadiusEstimate {
        value: sol.value.max(0.0),
        method: RadiusMethod::ThetaGrid,
        is_lower_bound: true,
        trace: sol.trace,
        params,
    })
}

// ---------------------------------------------------------------------------
// Joint numerical radius

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointRadiusOptions {
    /// Multi-start count of the direct route.
    pub restarts: usize,
    /// Multi-start count of the λ route.
    pub lambda_restarts: usize,
    /// θ grid for the single-operator subproblem of the λ route. Golden-section
    /// refinement follows, so the grid only has to land in the right basin.
    pub grid: usize,
    pub refine_tol: f64,
    /// Iteration cap of the alternating ascent on `x`.
    pub max_sweeps: usize,
    /// Iteration cap of the alternating ascent on `λ`.
    pub lambda_sweeps: usize,
    /// Relative improvement below which an ascent stops.
    pub sweep_tol: f64,
    pub seed: u64,
}

impl Default for JointRadiusOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            lambda_restarts: 16,
            grid: 90,
            refine_tol: 1e-10,
            max_sweeps: 500,
            lambda_sweeps: 40,
            sweep_tol: 1e-13,
            seed: 0,
        }
    }
}

impl JointRadiusOptions {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.lambda_restarts == 0 {
            return Err(Error::Precondition("restarts must be positive".into()));
        }
        if self.grid < 8 {
            return Err(Error::Precondition("theta grid must have at least 8 points".into()));
        }
        if self.max_sweeps == 0 || self.lambda_sweeps == 0 {
            return Err(Error::Precondition("sweep caps must be positive".into()));
        }
        if !(self.refine_tol > 0.0) || !(self.sweep_tol >= 0.0) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// `(⟨T₁x,x⟩, …, ⟨T_dx,x⟩)` for a unit vector `x`.
pub(crate) fn joint_values(t: &OperatorTuple, x: &DVector<c64>) -> Vec<c64> {
    t.iter()
        .map(|m| x.dotc(&(m.as_nalgebra() * x)))
        .collect()
}

fn l2(c: &[c64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit `λ` maximizing `|Σ λ_k c_k|`: the normalized conjugate of `c`.
fn dual_direction(c: &[c64]) -> Vec<c64> {
    let n = l2(c);
    if n == 0.0 {
        let mut e = vec![c64::new(0.0, 0.0); c.len()];
        e[0] = c64::new(1.0, 0.0);
        e
    } else {
        c.iter().map(|z| z.conj() / n).collect()
    }
}

fn combination(t: &OperatorTuple, lambda: &[c64]) -> DMatrix<c64> {
    let mut acc = DMatrix::zeros(t.dim(), t.dim());
    for (m, &l) in t.iter().zip(lambda) {
        acc += m.as_nalgebra() * l;
    }
    acc
}

fn random_unit<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<c64> {
    loop {
        let v = DVector::from_fn(len, |_, _| complex_normal(rng));
        let n = v.norm();
        if n > 1e-300 {
            return v / c64::new(n, 0.0);
        }
    }
}

/// Alternating ascent on `f(x) = ‖(⟨T_kx,x⟩)_k‖` from a given start.
fn dash_ascent(t: &OperatorTuple, x0: DVector<c64>, opts: &JointRadiusOptions) -> f64 {
    let mut x = x0;
    let mut f = l2(&joint_values(t, &x));
    for _ in 0..opts.max_sweeps {
        let lambda = dual_direction(&joint_values(t, &x));
        let h = combination(t, &lambda);
        let h = (&h + h.adjoint()) * c64::new(0.5, 0.0);
        let (_, x_new) = top_eigenpair(&h);
        let f_new = l2(&joint_values(t, &x_new));
        if f_new > f {
            let gain = f_new - f;
            x = x_new;
            f = f_new;
            if gain <= opts.sweep_tol * f.max(1.0) {
                break;
            }
        } else {
            break;
        }
    }
    f
}

/// Alternating ascent on `λ ↦ ω(Σ λ_k T_k)` from a given start.
fn lambda_ascent(t: &OperatorTuple, lambda0: Vec<c64>, opts: &JointRadiusOptions) -> f64 {
    let mut lambda = lambda0;
    let mut best = 0.0f64;
    for _ in 0..opts.lambda_sweeps {
        let m = combination(t, &lambda);
        let sol = theta_search(&m, opts.grid, opts.refine_tol);
        let c = joint_values(t, &sol.vector);
        let f = l2(&c);
        if f > best {
            let gain = f - best;
            best = f;
            lambda = dual_direction(&c);
            if gain <= opts.sweep_tol * best.max(1.0) {
                break;
            }
        } else {
            break;
        }
    }
    best
}

const DASH_TAG: u64 = 0xD45;
const LAMBDA_TAG: u64 = 0x1A3B;

fn best_of(values: &[f64]) -> (usize, f64) {
    // Lowest restart id wins ties.
    let mut best = (0, values[0]);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

fn route_estimate(method: RadiusMethod, values: Vec<f64>, opts: &JointRadiusOptions) -> RadiusEstimate {
    let (winner, value) = best_of(&values);
    let mut params = BTreeMap::new();
    params.insert("restarts".into(), json!(values.len()));
    params.insert("seed".into(), json!(opts.seed));
    params.insert("best_restart".into(), json!(winner));
    if method == RadiusMethod::LambdaSphere {
        params.insert("grid".into(), json!(opts.grid));
        params.insert("refine_tol".into(), json!(opts.refine_tol));
        params.insert("lambda_sweeps".into(), json!(opts.lambda_sweeps));
    } else {
        params.insert("max_sweeps".into(), json!(opts.max_sweeps));
    }
    RadiusEstimate {
        value,
        method,
        is_lower_bound: true,
        trace: values
            .into_iter()
            .enumerate()
            .map(|(step, value)| TracePoint { step, value })
            .collect(),
        params,
    }
}

/// Route (a): maximize over unit `x` directly.
pub fn joint_numerical_radius_dash(t: &OperatorTuple, opts: &JointRadiusOptions) -> Result<RadiusEstimate> {
    opts.validate()?;
    let values = map_indexed(opts.restarts, |i| {
        let mut rng = seed::substream(opts.seed, DASH_TAG, i as u64);
        let x0 = random_unit(&mut rng, t.dim());
        dash_ascent(t, x0, opts)
    });
    Ok(route_estimate(RadiusMethod::DashDirect, values, opts))
}

/// Route (b): maximize `ω(λ₁T₁ + … + λ_dT_d)` over the unit sphere in `ℂ^d`.
pub fn joint_numerical_radius_lambda(t: &OperatorTuple, opts: &JointRadiusOptions) -> Result<RadiusEstimate> {
    opts.validate()?;
    let values = map_indexed(opts.lambda_restarts, |i| {
        let mut rng = seed::substream(opts.seed, LAMBDA_TAG, i as u64);
        let l0 = random_unit(&mut rng, t.d());
        lambda_ascent(t, l0.iter().copied().collect(), opts)
    });
    Ok(route_estimate(RadiusMethod::LambdaSphere, values, opts))
}

/// Both routes of the joint numerical radius.
#[derive(Clone, Debug, Serialize)]
pub struct JointRadiusRoutes {
    pub dash: RadiusEstimate,
    pub lambda: RadiusEstimate,
}

impl JointRadiusRoutes {
    pub fn gap(&self) -> f64 {
        (self.dash.value - self.lambda.value).abs()
    }
}

pub fn joint_numerical_radius_routes(t: &OperatorTuple, opts: &JointRadiusOptions) -> Result<JointRadiusRoutes> {
    Ok(JointRadiusRoutes {
        dash: joint_numerical_radius_dash(t, opts)?,
        lambda: joint_numerical_radius_lambda(t, opts)?,
    })
}

/// `ω(T)`: the larger of the two route estimates, a certified lower bound.
pub fn joint_numerical_radius(t: &OperatorTuple, opts: &JointRadiusOptions) -> Result<RadiusEstimate> {
    let routes = joint_numerical_radius_routes(t, opts)?;
    let (dash_value, lambda_value) = (routes.dash.value, routes.lambda.value);
    let mut winner = if lambda_value > dash_value {
        routes.lambda
    } else {
        routes.dash
    };
    winner.params.insert("dash_direct".into(), json!(dash_value));
    winner.params.insert("lambda_sphere".into(), json!(lambda_value));
    Ok(winner)
}

/// Brute-force lower bound on `ω(T)` from `samples` unit vectors.
///
/// In dimension 2 the unit sphere modulo a global phase is parametrized by
/// `(cos a, sin a · e^{ib})` and sampled on a regular `(a, b)` grid; in higher
/// dimensions Gaussian directions are drawn from `seed`.
pub fn sampled_joint_numerical_radius(t: &OperatorTuple, samples: usize, seed: u64) -> f64 {
    let n = t.dim();
    if n == 1 {
        return l2(&joint_values(t, &DVector::from_element(1, c64::new(1.0, 0.0))));
    }
    if n == 2 {
        let side = (samples as f64).sqrt().ceil().max(2.0) as usize;
        let rows = map_indexed(side, |i| {
            let a = 0.5 * PI * i as f64 / (side - 1) as f64;
            let (sa, ca) = a.sin_cos();
            let mut best = 0.0f64;
            for j in 0..side {
                let b = TAU * j as f64 / side as f64;
                let x = DVector::from_column_slice(&[c64::new(ca, 0.0), c64::from_polar(sa, b)]);
                best = best.max(l2(&joint_values(t, &x)));
            }
            best
        });
        return rows.into_iter().fold(0.0, f64::max);
    }
    const CHUNK: usize = 4096;
    let chunks = samples.div_ceil(CHUNK);
    map_indexed(chunks, |c| {
        let mut rng = seed::substream(seed, 0x5A3, c as u64);
        let count = CHUNK.min(samples - c * CHUNK);
        (0..count)
            .map(|_| l2(&joint_values(t, &random_unit(&mut rng, n))))
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Joint spectral radius

fn commute_tol() -> f64 {
    ToleranceConfig::default().recon_tol
}

/// `‖Tⁿ‖^{1/n}` for `n = 1..=n_max`; the value reported is the last one.
pub fn joint_spectral_radius_gelfand(t: &OperatorTuple, n_max: usize) -> Result<RadiusEstimate> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be at least 1".into()));
    }
    let check = require_commuting(t, commute_tol())?;
    let trace: Vec<TracePoint> = log_power_norms(t, n_max)
        .into_iter()
        .enumerate()
        .map(|(i, l)| TracePoint {
            step: i + 1,
            value: (l / (i + 1) as f64).exp(),
        })
        .collect();
    let mut params = BTreeMap::new();
    params.insert("n_max".into(), json!(n_max));
    params.insert("commutator_witness".into(), json!(check.witness));
    Ok(RadiusEstimate {
        value: trace.last().unwrap().value,
        method: RadiusMethod::Gelfand,
        is_lower_bound: false,
        trace,
        params,
    })
}

/// Limit of the norm trace of the iterated spherical Aluthge transform.
pub fn joint_spectral_radius_aluthge(t: &OperatorTuple, max_iter: usize, conv_tol: f64) -> Result<RadiusEstimate> {
    let check = require_commuting(t, commute_tol())?;
    let run = iterate_aluthge(t, max_iter, conv_tol)?;
    if run.stop_reason == StopReason::NumericalBreakdown {
        return Err(Error::Breakdown(run.breakdown.unwrap_or_default()));
    }
    let mut params = BTreeMap::new();
    params.insert("max_iter".into(), json!(max_iter));
    params.insert("conv_tol".into(), json!(conv_tol));
    params.insert("steps".into(), json!(run.steps()));
    params.insert("stop_reason".into(), json!(run.stop_reason));
    params.insert("ranks".into(), json!(run.ranks));
    params.insert("commutator_witness".into(), json!(check.witness));
    Ok(RadiusEstimate {
        value: run.last_norm(),
        method: RadiusMethod::AluthgeLimit,
        is_lower_bound: false,
        trace: run
            .norm_trace
            .iter()
            .enumerate()
            .map(|(step, &value)| TracePoint { step, value })
            .collect(),
        params,
    })
}

/// Joint eigenvalues of a commuting tuple, one `d`-tuple per dimension index.
#[derive(Clone, Debug, Serialize)]
pub struct JointEigenvalues {
    pub points: Vec<Vec<c64>>,
    /// Largest relative below-diagonal residual of the conjugated matrices.
    pub conditioning: f64,
    /// Attempts used (1-based).
    pub attempts: usize,
}

impl JointEigenvalues {
    /// `max ‖λ‖₂` over the joint eigenvalues.
    pub fn spectral_radius(&self) -> f64 {
        self.points.iter().map(|p| l2(p)).fold(0.0, f64::max)
    }
}

const TRIANGULAR_TOL: f64 = 1e-8;
const ORACLE_ATTEMPTS: usize = 5;

/// Simultaneous unitary triangularization through the Schur form of a random
/// combination `Σ μ_k T_k`.
pub fn joint_eigenvalues(t: &OperatorTuple, seed: u64) -> Result<JointEigenvalues> {
    require_commuting(t, commute_tol())?;
    let mut last_residual = f64::INFINITY;
    for attempt in 0..ORACLE_ATTEMPTS {
        let mut rng = seed::substream(seed, 0x0E16, attempt as u64);
        let mu: Vec<c64> = random_unit(&mut rng, t.d()).iter().copied().collect();
        let combo = ComplexMatrix::wrap(combination(t, &mu));
        let Ok((q, _)) = schur(&combo) else {
            continue;
        };
        let qa = q.adjoint();
        let conj: Vec<ComplexMatrix> = t.iter().map(|m| &(&qa * m) * &q).collect();
        let residual = conj
            .iter()
            .zip(t.iter())
            .map(|(c, m)| c.max_abs_below_diagonal() / (1.0 + m.max_abs()))
            .fold(0.0, f64::max);
        if residual <= TRIANGULAR_TOL {
            let points = (0..t.dim())
                .map(|i| conj.iter().map(|c| c.get(i, i)).collect())
                .collect();
            return Ok(JointEigenvalues {
                points,
                conditioning: residual,
                attempts: attempt + 1,
            });
        }
        last_residual = last_residual.min(residual);
    }
    Err(Error::OracleUnavailable(format!(
        "no simultaneous triangularization after {ORACLE_ATTEMPTS} attempts (best residual {last_residual:e})"
    )))
}

/// `r(T)` read off the joint eigenvalues.
pub fn joint_spectral_radius_oracle(t: &OperatorTuple, seed: u64) -> Result<RadiusEstimate> {
    let je = joint_eigenvalues(t, seed)?;
    let mut params = BTreeMap::new();
    params.insert("seed".into(), json!(seed));
    params.insert("conditioning".into(), json!(je.conditioning));
    params.insert("attempts".into(), json!(je.attempts));
    Ok(RadiusEstimate {
        value: je.spectral_radius(),
        method: RadiusMethod::JointEigOracle,
        is_lower_bound: false,
        trace: Vec::new(),
        params,
    })
}
