//! Seeded property suite over random tuple families, and the reproduction
//! report for the non-commuting 2×2 fixture.
//!
//! Every property reduces to a margin `lhs − rhs` that the corresponding
//! inequality says is `≤ 0`; a sample passes when its margin is at most the
//! property's slack. Numerical-radius values on either side are optimizer
//! estimates, so those properties carry slacks in units of `opt_slack`.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::aluthge::{aluthge_from_decomposition, dual_from_decomposition, iterate_aluthge};
use crate::error::{Error, Result};
use crate::examples::{claimed_dual_omega, noncommuting_pair, noncommuting_pair_polar, CLAIMED_OMEGA_SQ};
use crate::exec::map_indexed;
use crate::generate::{generate, Family};
use crate::io::{TupleFile, TupleMetadata};
use crate::linalg::{gaussian_matrix, jacobi_svd, spectral_norm, ComplexMatrix, ToleranceConfig};
use crate::polar::{commutation_witness, spherical_polar};
use crate::radii::{
    joint_eigenvalues, joint_numerical_radius, joint_numerical_radius_dash, joint_numerical_radius_lambda,
    joint_numerical_radius_routes, numerical_radius, sampled_joint_numerical_radius, JointRadiusOptions, DEFAULT_GRID,
};
use crate::seed;
use crate::tuple::{is_commuting, joint_norm, log_power_norms, max_commutator, power_norms, OperatorTuple};

/// Property ids of the default suite, one per inequality.
pub const PROPERTY_IDS: [&str; 18] = [
    "thm-norm-decreasing",
    "lemma-joint-norm-gram",
    "lemma-congruence-bound",
    "thm-dual-tuple-bound",
    "lemma-commutation-equivalence",
    "thm-omega-decreasing-commuting",
    "thm-half-half-bound",
    "sandwich-single",
    "sandwich-tuple",
    "lemma-aluthge-commuting",
    "lemma-limit-lower-bound",
    "lemma-power-norm-decrease",
    "lemma-power-interpolation",
    "lemma-power-submultiplicative",
    "lemma-power-limit-induction",
    "thm-spectral-radius-limit",
    "eq-gelfand-lower-bound",
    "omega-route-agreement",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertySpec {
    pub id: String,
    pub family: Family,
    pub count: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub slack: f64,
}

impl PropertySpec {
    pub fn new(id: &str, family: Family, count: usize, d: (usize, usize), n: (usize, usize), slack: f64) -> Self {
        Self {
            id: id.to_string(),
            family,
            count,
            d_min: d.0,
            d_max: d.1,
            n_min: n.0,
            n_max: n.1,
            slack,
        }
    }

    fn validate(&self) -> Result<()> {
        if !PROPERTY_IDS.contains(&self.id.as_str()) {
            return Err(Error::Precondition(format!("unknown property id {:?}", self.id)));
        }
        if self.count == 0 {
            return Err(Error::Precondition(format!("{}: count must be at least 1", self.id)));
        }
        // Zero is allowed: it demands every margin be non-positive.
        if !(self.slack >= 0.0) {
            return Err(Error::Precondition(format!("{}: slack must be non-negative", self.id)));
        }
        if self.d_min == 0 || self.d_min > self.d_max || self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::Precondition(format!("{}: empty dimension range", self.id)));
        }
        Ok(())
    }

    /// The family actually sampled. Properties stated for commuting tuples
    /// replace a non-commuting family by [`Family::Commuting`]; single-operator
    /// properties always sample [`Family::Single`].
    pub fn effective_family(&self) -> Family {
        match self.id.as_str() {
            "sandwich-single" => Family::Single,
            id if requires_commuting(id) && !self.family.is_commuting() => Family::Commuting,
            _ => self.family,
        }
    }
}

fn requires_commuting(id: &str) -> bool {
    matches!(
        id,
        "thm-omega-decreasing-commuting"
            | "lemma-aluthge-commuting"
            | "lemma-limit-lower-bound"
            | "thm-spectral-radius-limit"
            | "eq-gelfand-lower-bound"
    )
}

/// Per-sample count used by [`default_suite`].
pub const DEFAULT_COUNT: usize = 200;

pub fn default_suite() -> Vec<PropertySpec> {
    default_suite_with(DEFAULT_COUNT)
}

pub fn default_suite_with(count: usize) -> Vec<PropertySpec> {
    // Two and three times the default opt_slack of 1e-4.
    let (opt2, opt3) = (2e-4, 3e-4);
    let dn = ((1, 3), (2, 4));
    let s = |id: &str, family: Family, slack: f64| PropertySpec::new(id, family, count, dn.0, dn.1, slack);
    vec![
        s("thm-norm-decreasing", Family::Dense, 1e-9),
        s("lemma-joint-norm-gram", Family::Dense, 1e-9),
        s("lemma-congruence-bound", Family::Dense, 1e-9),
        s("thm-dual-tuple-bound", Family::Dense, opt3),
        s("lemma-commutation-equivalence", Family::Dense, 0.5),
        s("thm-omega-decreasing-commuting", Family::Commuting, opt2),
        s("thm-half-half-bound", Family::Dense, opt2),
        PropertySpec::new("sandwich-single", Family::Single, count, (1, 1), (2, 6), opt2),
        s("sandwich-tuple", Family::Dense, opt2),
        s("lemma-aluthge-commuting", Family::Commuting, 1e-8),
        s("lemma-limit-lower-bound", Family::Commuting, 1e-8),
        s("lemma-power-norm-decrease", Family::Dense, 1e-8),
        s("lemma-power-interpolation", Family::Dense, 1e-8),
        s("lemma-power-submultiplicative", Family::Dense, 1e-8),
        s("lemma-power-limit-induction", Family::Dense, 1e-8),
        PropertySpec::new("thm-spectral-radius-limit", Family::CommutingUpperTriangular, count / 4 + 1, (2, 2), (3, 3), 5e-2),
        s("eq-gelfand-lower-bound", Family::Commuting, 1e-9),
        s("omega-route-agreement", Family::Dense, opt2),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyResult {
    pub id: String,
    pub family: Family,
    pub count: usize,
    pub pass: usize,
    pub fail: usize,
    /// Largest margin `lhs − rhs` over the samples that evaluated.
    pub worst_slack: f64,
    pub slack: f64,
    /// First failing sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TupleFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub results: Vec<PropertyResult>,
    pub wall_time: f64,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.fail == 0)
    }

    /// JSON with `wall_time` zeroed, for comparisons across runs.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.wall_time = 0.0;
        serde_json::to_string(&r).expect("report serializes")
    }
}

struct Sample {
    tuple: OperatorTuple,
    outcome: Result<f64>,
}

pub fn run_property_suite(specs: &[PropertySpec], seed: u64) -> Result<VerificationReport> {
    if specs.is_empty() {
        return Err(Error::Precondition("property suite is empty".into()));
    }
    for (i, s) in specs.iter().enumerate() {
        s.validate()?;
        if specs[..i].iter().any(|o| o.id == s.id) {
            return Err(Error::Precondition(format!("duplicate property id {:?}", s.id)));
        }
    }
    let start = Instant::now();
    let jobs: Vec<(usize, usize)> = specs
        .iter()
        .enumerate()
        .flat_map(|(p, s)| (0..s.count).map(move |i| (p, i)))
        .collect();
    let samples = map_indexed(jobs.len(), |j| {
        let (p, i) = jobs[j];
        run_sample(&specs[p], seed, i as u64)
    });

    let mut results = Vec::with_capacity(specs.len());
    let mut offset = 0;
    for spec in specs {
        let mut r = PropertyResult {
            id: spec.id.clone(),
            family: spec.effective_family(),
            count: spec.count,
            pass: 0,
            fail: 0,
            worst_slack: f64::NEG_INFINITY,
            slack: spec.slack,
            witness: None,
            error: None,
        };
        for (i, s) in samples[offset..offset + spec.count].iter().enumerate() {
            let ok = match &s.outcome {
                Ok(m) => {
                    r.worst_slack = r.worst_slack.max(*m);
                    *m <= spec.slack
                }
                Err(e) => {
                    r.error.get_or_insert_with(|| format!("sample {i}: {e}"));
                    false
                }
            };
            if ok {
                r.pass += 1;
            } else {
                r.fail += 1;
                if r.witness.is_none() {
                    r.witness = Some(TupleFile::from_tuple(&s.tuple).with_metadata(TupleMetadata {
                        name: Some(format!("{}-witness", spec.id)),
                        description: Some(format!("sample {i} of {}", spec.id)),
                        seed: Some(sample_seed(seed, &spec.id, i as u64)),
                    }));
                }
            }
        }
        offset += spec.count;
        results.push(r);
    }
    Ok(VerificationReport {
        seed,
        results,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn sample_seed(seed: u64, id: &str, i: u64) -> u64 {
    seed::derive(seed, seed::hash_str(id), i)
}

fn run_sample(spec: &PropertySpec, seed: u64, i: u64) -> Sample {
    let sseed = sample_seed(seed, &spec.id, i);
    let mut rng = seed::substream(sseed, 0, 0);
    let family = spec.effective_family();
    let d = if family == Family::Single { 1 } else { rng.random_range(spec.d_min..=spec.d_max) };
    let n = rng.random_range(spec.n_min..=spec.n_max);
    let tuple = generate(&mut rng, family, d, n);
    let opts = JointRadiusOptions {
        seed: sseed,
        ..Default::default()
    };
    let outcome = evaluate(&spec.id, &tuple, &mut rng, &opts);
    Sample { tuple, outcome }
}

fn omega(t: &OperatorTuple, opts: &JointRadiusOptions) -> Result<f64> {
    Ok(joint_numerical_radius(t, opts)?.value)
}

const POWER_K: usize = 6;
const ITERATES: usize = 4;

/// Margin of one property on one tuple.
fn evaluate<R: Rng>(id: &str, t: &OperatorTuple, rng: &mut R, opts: &JointRadiusOptions) -> Result<f64> {
    let tol = ToleranceConfig::default();
    let norm = joint_norm(t);
    match id {
        "thm-norm-decreasing" => {
            let dec = spherical_polar(t, &tol)?;
            Ok(joint_norm(&aluthge_from_decomposition(&dec)) - norm)
        }
        "lemma-joint-norm-gram" => {
            // Largest singular value of the stacked operator, and a sampled
            // lower bound on the supremum defining the joint norm.
            let top = jacobi_svd(&t.stacked())?.singular_values[0];
            let mut sampled = 0.0f64;
            for _ in 0..1000 {
                let x = nalgebra::DVector::from_fn(t.dim(), |_, _| crate::linalg::complex_normal(rng));
                let x = &x / crate::linalg::c64::new(x.norm(), 0.0);
                let s: f64 = t.iter().map(|m| (m.as_nalgebra() * &x).norm_squared()).sum();
                sampled = sampled.max(s.sqrt());
            }
            Ok((top - norm).abs().max(sampled - norm))
        }
        "lemma-congruence-bound" => {
            let a = gaussian_matrix(rng, t.dim(), t.dim());
            let lhs = t
                .iter()
                .fold(ComplexMatrix::zeros(t.dim(), t.dim()), |acc, x| &acc + &(&(&x.adjoint() * &a) * x));
            Ok(spectral_norm(&lhs) - norm * norm * spectral_norm(&a))
        }
        "thm-dual-tuple-bound" => {
            let dec = spherical_polar(t, &tol)?;
            let hat = omega(&aluthge_from_decomposition(&dec), opts)?;
            let dual = omega(&dual_from_decomposition(&dec), opts)?;
            Ok(hat - 0.5 * omega(t, opts)? - 0.5 * dual)
        }
        "lemma-commutation-equivalence" => {
            // One commuting and one generic tuple of the same shape; margin 1
            // on disagreement, 0 otherwise.
            let c = generate(rng, Family::Commuting, t.d(), t.dim());
            let mut disagree = 0.0f64;
            for s in [t, &c] {
                let flag = is_commuting(s, tol.recon_tol).commuting;
                let n = joint_norm(s);
                let w = commutation_witness(&spherical_polar(s, &tol)?);
                if flag != (w <= tol.recon_tol * (1.0 + n * n)) {
                    disagree = 1.0;
                }
            }
            Ok(disagree)
        }
        "thm-omega-decreasing-commuting" => {
            let hat = crate::aluthge::spherical_aluthge(t)?;
            Ok(omega(&hat, opts)? - omega(t, opts)?)
        }
        "thm-half-half-bound" => {
            let hat = crate::aluthge::spherical_aluthge(t)?;
            Ok(omega(t, opts)? - 0.5 * norm - 0.5 * omega(&hat, opts)?)
        }
        "sandwich-single" => {
            let m = t.get(0);
            let w = numerical_radius(m, DEFAULT_GRID, opts.refine_tol)?.value;
            let nm = spectral_norm(m);
            let r = crate::linalg::spectral_radius(m)?;
            Ok((0.5 * nm - w).max(w - nm).max(r - w))
        }
        "sandwich-tuple" => {
            let w = omega(t, opts)?;
            let lower = norm / (2.0 * (t.d() as f64).sqrt());
            Ok((lower - w).max(w - norm))
        }
        "lemma-aluthge-commuting" => {
            let hat = crate::aluthge::spherical_aluthge(t)?;
            Ok(max_commutator(&hat))
        }
        "lemma-limit-lower-bound" => {
            let r = joint_eigenvalues(t, opts.seed)?.spectral_radius();
            let run = iterate_aluthge(t, 20, 1e-15)?;
            let min = run.norm_trace.iter().copied().fold(f64::INFINITY, f64::min);
            let r_last = joint_eigenvalues(run.last(), opts.seed)?.spectral_radius();
            Ok((r - min).max((r_last - r).abs()))
        }
        "lemma-power-norm-decrease" => iterate_margin(t, |cur, next| {
            let (a, b) = (power_norms(next, POWER_K), power_norms(cur, POWER_K));
            a.iter().zip(&b).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max)
        }),
        "lemma-power-interpolation" => iterate_margin(t, |cur, next| {
            let hat = power_norms(next, POWER_K);
            let base = power_norms(cur, POWER_K + 1);
            (1..=POWER_K)
                .map(|k| hat[k - 1] - (base[k] * if k >= 2 { base[k - 2] } else { 1.0 }).sqrt())
                .fold(f64::NEG_INFINITY, f64::max)
        }),
        "lemma-power-submultiplicative" => {
            let p = power_norms(t, 9);
            Ok((1..=8).map(|k| p[k] - p[k - 1] * p[0]).fold(f64::NEG_INFINITY, f64::max))
        }
        "lemma-power-limit-induction" => iterate_margin(t, |cur, next| {
            // ‖T̂ᵏ‖ ≤ ‖Tᵏ‖^{1/2} ‖T‖^{1/2} ‖Tᵏ⁻¹‖^{1/2}
            let hat = power_norms(next, POWER_K);
            let base = power_norms(cur, POWER_K);
            (1..=POWER_K)
                .map(|k| {
                    let prev = if k >= 2 { base[k - 2] } else { 1.0 };
                    hat[k - 1] - (base[k - 1] * base[0] * prev).sqrt()
                })
                .fold(f64::NEG_INFINITY, f64::max)
        }),
        "thm-spectral-radius-limit" => {
            let r = joint_eigenvalues(t, opts.seed)?.spectral_radius();
            let run = iterate_aluthge(t, 200, 1e-15)?;
            Ok((run.last_norm() - r).abs())
        }
        "eq-gelfand-lower-bound" => {
            let r = joint_eigenvalues(t, opts.seed)?.spectral_radius();
            let min = log_power_norms(t, 64)
                .iter()
                .enumerate()
                .map(|(i, l)| (l / (i + 1) as f64).exp())
                .fold(f64::INFINITY, f64::min);
            Ok(r - min)
        }
        "omega-route-agreement" => Ok(joint_numerical_radius_routes(t, opts)?.gap()),
        other => Err(Error::Precondition(format!("unknown property id {other:?}"))),
    }
}

/// Worst margin of `f(T̂ₙ, T̂ₙ₊₁)` over the first few iterates.
fn iterate_margin(t: &OperatorTuple, f: impl Fn(&OperatorTuple, &OperatorTuple) -> f64) -> Result<f64> {
    let run = iterate_aluthge(t, ITERATES, f64::MIN_POSITIVE)?;
    if let Some(b) = run.breakdown {
        return Err(Error::Breakdown(b));
    }
    Ok(run
        .tuples
        .windows(2)
        .map(|w| f(&w[0], &w[1]))
        .fold(f64::NEG_INFINITY, f64::max))
}

// ---------------------------------------------------------------------------
// Fixture reproduction

#[derive(Clone, Debug, Serialize)]
pub struct ComparedValue {
    pub computed: f64,
    pub claimed: f64,
    pub difference: f64,
    pub agrees: bool,
}

impl ComparedValue {
    fn new(computed: f64, claimed: f64, tol: f64) -> Self {
        Self {
            computed,
            claimed,
            difference: computed - claimed,
            agrees: (computed - claimed).abs() <= tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DualRoutes {
    pub dash_direct: f64,
    pub lambda_sphere: f64,
    pub brute_force: f64,
    pub brute_force_samples: usize,
    /// Largest pairwise gap between the three routes.
    pub spread: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleReport {
    pub tuple: TupleFile,
    pub p_error: f64,
    pub v1_error: f64,
    pub v2_error: f64,
    pub omega_sq: ComparedValue,
    pub omega: f64,
    pub commutation_witness: f64,
    pub dual: TupleFile,
    pub dual_omega_routes: DualRoutes,
    /// Three-route value of `ω(PV₁, PV₂)` against the stated `5√2/4`.
    pub dual_omega: ComparedValue,
    /// Whether `ω(PV₁, PV₂)` exceeds `ω(T₁, T₂)` beyond optimizer slack.
    pub dual_exceeds_omega: bool,
    pub wall_time: f64,
}

pub const BRUTE_FORCE_SAMPLES: usize = 1_000_000;

pub fn reproduce_noncommuting_pair(seed: u64) -> Result<ExampleReport> {
    let start = Instant::now();
    let tol = ToleranceConfig::default();
    let t = noncommuting_pair();
    let dec = spherical_polar(&t, &tol)?;
    let (p, v1, v2) = noncommuting_pair_polar();
    let opts = JointRadiusOptions {
        seed,
        ..Default::default()
    };
    let omega_t = joint_numerical_radius(&t, &opts)?.value;
    let dual = dual_from_decomposition(&dec);
    let dash = joint_numerical_radius_dash(&dual, &opts)?.value;
    let lambda = joint_numerical_radius_lambda(&dual, &opts)?.value;
    let brute = sampled_joint_numerical_radius(&dual, BRUTE_FORCE_SAMPLES, seed);
    let spread = (dash - lambda).abs().max((dash - brute).abs()).max((lambda - brute).abs());
    let best = dash.max(lambda).max(brute);
    Ok(ExampleReport {
        tuple: TupleFile::from_tuple(&t),
        p_error: dec.p.max_abs_diff(&p),
        v1_error: dec.v.get(0).max_abs_diff(&v1),
        v2_error: dec.v.get(1).max_abs_diff(&v2),
        omega_sq: ComparedValue::new(omega_t * omega_t, CLAIMED_OMEGA_SQ, 1e-6),
        omega: omega_t,
        commutation_witness: commutation_witness(&dec),
        dual: TupleFile::from_tuple(&dual),
        dual_omega_routes: DualRoutes {
            dash_direct: dash,
            lambda_sphere: lambda,
            brute_force: brute,
            brute_force_samples: BRUTE_FORCE_SAMPLES,
            spread,
        },
        dual_omega: ComparedValue::new(best, claimed_dual_omega(), 1e-4),
        dual_exceeds_omega: best > omega_t + tol.opt_slack,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
