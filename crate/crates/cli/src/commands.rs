use std::fs;
use std::path::{Path, PathBuf};

use aluthge_core::aluthge::iterate_aluthge;
use aluthge_core::generate::Family;
use aluthge_core::io::TupleFile;
use aluthge_core::linalg::ToleranceConfig;
use aluthge_core::polar::spherical_polar;
use aluthge_core::radii::{
    joint_numerical_radius, joint_spectral_radius_aluthge, joint_spectral_radius_gelfand,
    joint_spectral_radius_oracle, numerical_radius, JointRadiusOptions, RadiusEstimate, DEFAULT_GRID,
};
use aluthge_core::tuple::OperatorTuple;
use aluthge_core::verify::{default_suite_with, reproduce_noncommuting_pair, run_property_suite, DEFAULT_COUNT, PROPERTY_IDS};
use serde::Serialize;

use crate::output::{csv_path, emit, to_json, trace_csv, write_atomic, TraceRow};
use crate::{exit, CliError, RadiusKind, SpectralKind};

fn read_tuple(path: &Path) -> Result<OperatorTuple, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file = TupleFile::parse(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(file.to_tuple()?)
}

fn matrix_file(m: &aluthge_core::linalg::ComplexMatrix) -> TupleFile {
    TupleFile::from_tuple(&OperatorTuple::single(m.clone()).expect("square matrix"))
}

#[derive(Serialize)]
struct PolarOut {
    p: TupleFile,
    v: TupleFile,
    r: TupleFile,
    rank: usize,
    singular_values: Vec<f64>,
}

#[derive(Serialize)]
struct TransformOut {
    input: TupleFile,
    polar: Option<PolarOut>,
    /// `T̂₁, …, T̂_N`.
    iterates: Vec<TupleFile>,
    norm_trace: Vec<f64>,
    ranks: Vec<usize>,
    stop_reason: aluthge_core::aluthge::StopReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<String>,
}

pub fn transform(
    input: &Path,
    iters: usize,
    conv_tol: f64,
    out: Option<&Path>,
    csv: &Option<Option<PathBuf>>,
) -> Result<u8, CliError> {
    let csv = csv_path(csv, out)?;
    if iters == 0 {
        return Err(CliError::input("--iters must be at least 1"));
    }
    let t = read_tuple(input)?;
    let polar = spherical_polar(&t, &ToleranceConfig::default()).ok().map(|dec| PolarOut {
        p: matrix_file(&dec.p),
        v: TupleFile::from_tuple(&dec.v),
        r: matrix_file(&dec.r),
        rank: dec.rank,
        singular_values: dec.singular_values.clone(),
    });
    let run = iterate_aluthge(&t, iters, conv_tol)?;
    let report = TransformOut {
        input: TupleFile::from_tuple(&t),
        polar,
        iterates: run.tuples[1..].iter().map(TupleFile::from_tuple).collect(),
        norm_trace: run.norm_trace.clone(),
        ranks: run.ranks.clone(),
        stop_reason: run.stop_reason,
        breakdown: run.breakdown.clone(),
    };
    emit(&report, out)?;
    if let Some(path) = csv {
        let rows: Vec<TraceRow> = run
            .norm_trace
            .iter()
            .enumerate()
            .map(|(step, &value)| TraceRow {
                step,
                value,
                rank: run.ranks.get(step).copied(),
            })
            .collect();
        write_atomic(&path, &trace_csv(&rows))?;
    }
    if let Some(b) = &run.breakdown {
        eprintln!("error: numerical breakdown: {b}");
        return Ok(exit::BREAKDOWN);
    }
    Ok(exit::OK)
}

pub fn radius(input: &Path, method: RadiusKind, seed: u64, out: Option<&Path>) -> Result<u8, CliError> {
    let t = read_tuple(input)?;
    let est = match method {
        RadiusKind::Single => {
            if t.d() != 1 {
                return Err(CliError::new(
                    exit::SHAPE,
                    format!("method single needs a tuple with d = 1, got d = {}", t.d()),
                ));
            }
            numerical_radius(t.get(0), DEFAULT_GRID, 1e-10)?
        }
        RadiusKind::Joint => joint_numerical_radius(&t, &JointRadiusOptions { seed, ..Default::default() })?,
    };
    emit(&est, out)?;
    Ok(exit::OK)
}

#[allow(clippy::too_many_arguments)]
pub fn spectral(
    input: &Path,
    method: SpectralKind,
    n_max: usize,
    max_iter: usize,
    conv_tol: f64,
    seed: u64,
    out: Option<&Path>,
    csv: &Option<Option<PathBuf>>,
) -> Result<u8, CliError> {
    let csv = csv_path(csv, out)?;
    let t = read_tuple(input)?;
    let est: RadiusEstimate = match method {
        SpectralKind::Gelfand => joint_spectral_radius_gelfand(&t, n_max)?,
        SpectralKind::Aluthge => joint_spectral_radius_aluthge(&t, max_iter, conv_tol)?,
        SpectralKind::Oracle => joint_spectral_radius_oracle(&t, seed)?,
    };
    emit(&est, out)?;
    if let Some(path) = csv {
        let ranks: Vec<usize> = est
            .params
            .get("ranks")
            .and_then(|v| serde_json::from_value(v.clone()).ok())
            .unwrap_or_default();
        let rows: Vec<TraceRow> = est
            .trace
            .iter()
            .map(|p| TraceRow {
                step: p.step,
                value: p.value,
                rank: ranks.get(p.step).copied(),
            })
            .collect();
        write_atomic(&path, &trace_csv(&rows))?;
    }
    Ok(exit::OK)
}

pub struct VerifyArgs {
    pub seed: u64,
    pub count: Option<usize>,
    pub families: Vec<String>,
    pub properties: Vec<String>,
    pub max_d: Option<usize>,
    pub max_n: Option<usize>,
    pub slack: Option<f64>,
}

pub fn verify(args: VerifyArgs, out: Option<&Path>, witness_dir: Option<&Path>) -> Result<u8, CliError> {
    let mut specs = default_suite_with(args.count.unwrap_or(DEFAULT_COUNT));
    if args.count == Some(0) {
        return Err(CliError::input("--count must be at least 1"));
    }
    if !args.families.is_empty() {
        let fams = args
            .families
            .iter()
            .map(|f| f.parse::<Family>())
            .collect::<Result<Vec<_>, _>>()?;
        specs.retain(|s| fams.contains(&s.family));
    }
    if !args.properties.is_empty() {
        if let Some(bad) = args.properties.iter().find(|p| !PROPERTY_IDS.contains(&p.as_str())) {
            return Err(CliError::input(format!("unknown property {bad:?}")));
        }
        specs.retain(|s| args.properties.contains(&s.id));
    }
    if specs.is_empty() {
        return Err(CliError::input("no property left after filtering"));
    }
    for s in &mut specs {
        if let Some(d) = args.max_d {
            if d == 0 {
                return Err(CliError::input("--max-d must be at least 1"));
            }
            s.d_max = s.d_max.min(d);
            s.d_min = s.d_min.min(s.d_max);
        }
        if let Some(n) = args.max_n {
            if n == 0 {
                return Err(CliError::input("--max-n must be at least 1"));
            }
            s.n_max = s.n_max.min(n);
            s.n_min = s.n_min.min(s.n_max);
        }
        if let Some(x) = args.slack {
            s.slack = x;
        }
    }
    let report = run_property_suite(&specs, args.seed)?;
    emit(&report, out)?;
    if report.all_pass() {
        return Ok(exit::OK);
    }
    let dir = match (witness_dir, out) {
        (Some(d), _) => d.to_path_buf(),
        (None, Some(o)) => {
            let stem = o.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            o.with_file_name(format!("{stem}-witnesses"))
        }
        (None, None) => PathBuf::from("witnesses"),
    };
    for r in &report.results {
        if let Some(w) = &r.witness {
            write_atomic(&dir.join(format!("{}.json", r.id)), &to_json(w))?;
        }
        if r.fail > 0 {
            eprintln!("FAIL {}: {}/{} failed, worst margin {:e} > slack {:e}", r.id, r.fail, r.count, r.worst_slack, r.slack);
        }
    }
    eprintln!("witnesses written to {}", dir.display());
    Ok(exit::PROPERTY_FAILURE)
}

pub fn example(seed: u64, out: Option<&Path>) -> Result<u8, CliError> {
    let report = reproduce_noncommuting_pair(seed)?;
    emit(&report, out)?;
    let consistent = report.p_error <= 1e-12
        && report.v1_error <= 1e-12
        && report.v2_error <= 1e-12
        && report.omega_sq.agrees
        && report.dual_omega_routes.spread <= 1e-4;
    Ok(if consistent { exit::OK } else { exit::PROPERTY_FAILURE })
}
