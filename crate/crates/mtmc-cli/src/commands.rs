//! The four experiment subcommands: `run`, `compare`, `spectrum`, `couple`.
//!
//! Each takes a validated scenario plus command-line overrides, executes
//! library calls, and writes its report files. All outputs are pure
//! functions of `(config, seed)`: rerunning a command must reproduce every
//! file byte for byte, so nothing here may consult the clock, the
//! environment, or unordered collections.

use std::path::{Path, PathBuf};

use mtmc::approx::ApproximationState;
use mtmc::coupling::{coupling_ensemble, doeblin_epsilon};
use mtmc::diagnostics::{approximation_gap, ergodic_average, generation_gaps, tv_discrete, tv_histogram};
use mtmc::samplers::{run_chain, ChainConfig, ChainRun, SamplerKind, write_trace_csv};
use mtmc::spectral::{build_kernel, closed_form_spectrum, tv_decay_curves};
use serde::Serialize;

use crate::config::{ScenarioFile, SpaceSpec};
use crate::error::{CliError, ConfigError, RuntimeError};
use crate::outputs::{csv_file, json_file, optional_field, prepare_path, Metadata};
use crate::scenario::{build, diagnostic_grid, histogram_bins, observable_fn, BuiltScenario};

/// Command-line adjustments applied on top of the scenario file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

/// What a subcommand did, for the final console summary.
pub struct CommandOutcome {
    pub scenario: String,
    pub files: Vec<PathBuf>,
    pub notes: Vec<String>,
}

fn effective_file(file: &ScenarioFile, overrides: &Overrides) -> ScenarioFile {
    let mut file = file.clone();
    if let Some(seed) = overrides.seed {
        file.sampler.seed = seed;
    }
    file
}

fn out_dir(file: &ScenarioFile, overrides: &Overrides) -> PathBuf {
    overrides
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&file.output.dir))
}

/// Runs the configured sampler and writes `trace.csv`, `run.json`, plus
/// `archive.csv` and `diagnostics.csv` when applicable.
pub fn run(file: &ScenarioFile, overrides: &Overrides) -> Result<CommandOutcome, CliError> {
    let file = effective_file(file, overrides);
    let built = build(&file)?;
    let run = execute_chain(&built, built.sampler_kind)?;

    let dir = out_dir(&file, overrides);
    let metadata = Metadata::new(&built.name, built.seed);
    let mut files = Vec::new();

    let trace_path = prepare_path(&dir, "trace.csv", &built.name)?;
    let writer = csv_file(&trace_path, &metadata)?;
    write_trace_csv(&run, writer)
        .map_err(|e| RuntimeError::new(&built.name, format!("trace export failed: {e}")))?;
    files.push(trace_path);

    if let Some(archive) = run.archive.as_ref() {
        let archive_path = prepare_path(&dir, "archive.csv", &built.name)?;
        let writer = csv_file(&archive_path, &metadata)?;
        archive
            .write_csv(writer)
            .map_err(|e| RuntimeError::new(&built.name, format!("archive export failed: {e}")))?;
        files.push(archive_path);
    }

    let diagnostics = match &file.diagnostics {
        Some(spec) => Some(compute_diagnostics(&file, &built, &run, spec)?),
        None => None,
    };
    if let Some(computed) = &diagnostics {
        let path = prepare_path(&dir, "diagnostics.csv", &built.name)?;
        write_diagnostics_csv(&path, &metadata, computed)?;
        files.push(path);
    }

    let report = run_report(&metadata, &built, &run, diagnostics.as_ref());
    let report_path = prepare_path(&dir, "run.json", &built.name)?;
    json_file(&report_path, &built.name, &report)?;
    files.push(report_path);

    Ok(CommandOutcome {
        scenario: built.name.clone(),
        notes: vec![format!(
            "{} steps, {} accepted, {} true evaluations",
            built.steps, report.accepted, report.true_evals
        )],
        files,
    })
}

/// Runs both samplers on the same scenario and seed and writes
/// `comparison.json`.
pub fn compare(file: &ScenarioFile, overrides: &Overrides) -> Result<CommandOutcome, CliError> {
    let file = effective_file(file, overrides);
    if matches!(file.space, SpaceSpec::Continuous { .. }) && file.diagnostics.is_none() {
        return Err(ConfigError::invalid(
            "diagnostics",
            "comparing samplers on a continuous space needs a diagnostics section (final TV is binned)",
        )
        .into());
    }
    let built = build(&file)?;

    let baseline_run = execute_chain(&built, SamplerKind::MetropolisHastings)?;
    let moving_run = execute_chain(&built, SamplerKind::MovingTarget)?;

    let final_tv = |run: &ChainRun| -> Result<f64, CliError> {
        trace_tv(&file, &built, &run.trace)
    };
    let baseline = sampler_side("mh", &baseline_run, final_tv(&baseline_run)?);
    let moving_target = sampler_side("mtmc", &moving_run, final_tv(&moving_run)?);
    let eval_ratio = moving_target.true_evals as f64 / baseline.true_evals as f64;

    let metadata = Metadata::new(&built.name, built.seed);
    let report = ComparisonReport {
        schema_version: metadata.schema_version,
        scenario: metadata.scenario.clone(),
        seed: metadata.seed,
        library_version: metadata.library_version.clone(),
        steps: built.steps,
        baseline,
        moving_target,
        eval_ratio,
    };

    let dir = out_dir(&file, overrides);
    let path = prepare_path(&dir, "comparison.json", &built.name)?;
    json_file(&path, &built.name, &report)?;

    Ok(CommandOutcome {
        scenario: built.name.clone(),
        notes: vec![format!(
            "true evaluations {} (baseline) vs {} (moving target), ratio {:.4}",
            report.baseline.true_evals, report.moving_target.true_evals, report.eval_ratio
        )],
        files: vec![path],
    })
}

/// Closed-form spectral analysis of the finite independence chain; writes
/// `spectral.json` and `spectral_curves.csv`.
pub fn spectrum(file: &ScenarioFile, overrides: &Overrides) -> Result<CommandOutcome, CliError> {
    let file = effective_file(file, overrides);
    let spec = file.spectrum.clone().ok_or_else(|| {
        ConfigError::invalid("spectrum", "this subcommand needs a [spectrum] section")
    })?;
    let built = build(&file)?;
    let pieces = built
        .finite
        .as_ref()
        .expect("validated: spectrum sections only pass on finite spaces");

    let report = closed_form_spectrum(&pieces.target_masses, &pieces.proposal_masses)
        .map_err(|e| RuntimeError::new(&built.name, format!("spectral analysis failed: {e}")))?;
    let n = pieces.target_masses.len();
    let mut p0 = vec![0.0; n];
    p0[spec.initial - 1] = 1.0;
    let (bound_curve, exact_curve) = tv_decay_curves(&report, &p0, spec.horizon)
        .map_err(|e| RuntimeError::new(&built.name, format!("decay curves failed: {e}")))?;
    let thetas = report
        .expansion_coefficients(&p0)
        .map_err(|e| RuntimeError::new(&built.name, format!("expansion failed: {e}")))?;
    let amplitude: f64 = (1..n)
        .map(|k| {
            let half_l1: f64 = report.vectors[k].iter().map(|x| x.abs()).sum::<f64>() * 0.5;
            thetas[k].abs() * half_l1
        })
        .sum();

    let metadata = Metadata::new(&built.name, built.seed);
    let json = SpectralJson {
        schema_version: metadata.schema_version,
        scenario: metadata.scenario.clone(),
        seed: metadata.seed,
        library_version: metadata.library_version.clone(),
        n,
        initial_state: spec.initial,
        horizon: spec.horizon,
        lambdas: report.lambdas.clone(),
        oracle_gap: report.oracle_gap(),
        max_residual: report.max_residual,
        thetas,
        amplitude,
    };

    let dir = out_dir(&file, overrides);
    let json_path = prepare_path(&dir, "spectral.json", &built.name)?;
    json_file(&json_path, &built.name, &json)?;

    let curves_path = prepare_path(&dir, "spectral_curves.csv", &built.name)?;
    let mut writer = csv::Writer::from_writer(csv_file(&curves_path, &metadata)?);
    write_rows(
        &mut writer,
        &built.name,
        &["step", "tv_bound", "tv_exact"],
        (0..=spec.horizon).map(|step| {
            vec![
                step.to_string(),
                bound_curve[step].to_string(),
                exact_curve[step].to_string(),
            ]
        }),
    )?;

    Ok(CommandOutcome {
        scenario: built.name.clone(),
        notes: vec![format!(
            "spectral gap 1 - lambda_1 = {:.6}, oracle gap {:.2e}",
            1.0 - json.lambdas[1],
            json.oracle_gap
        )],
        files: vec![json_path, curves_path],
    })
}

/// Doeblin certificate plus a coupled-chain ensemble on the finite chain;
/// writes `coupling.json` and `coupling_curves.csv`.
pub fn couple(file: &ScenarioFile, overrides: &Overrides) -> Result<CommandOutcome, CliError> {
    let file = effective_file(file, overrides);
    let spec = file.couple.clone().ok_or_else(|| {
        ConfigError::invalid("couple", "this subcommand needs a [couple] section")
    })?;
    let built = build(&file)?;
    let pieces = built
        .finite
        .as_ref()
        .expect("validated: couple sections only pass on finite spaces");

    let kernel = build_kernel(&pieces.target_masses, &pieces.proposal_masses)
        .map_err(|e| RuntimeError::new(&built.name, format!("kernel construction failed: {e}")))?;
    let certificate = doeblin_epsilon(&kernel, spec.n0)
        .map_err(|e| RuntimeError::new(&built.name, format!("minorisation failed: {e}")))?;
    let n = pieces.target_masses.len();
    let mut p0 = vec![0.0; n];
    p0[spec.initial - 1] = 1.0;
    let ensemble = coupling_ensemble(
        &kernel,
        &certificate,
        &p0,
        spec.horizon,
        spec.replicates,
        built.seed,
    )
    .map_err(|e| RuntimeError::new(&built.name, format!("coupling ensemble failed: {e}")))?;

    let metadata = Metadata::new(&built.name, built.seed);
    let json = CouplingJson {
        schema_version: metadata.schema_version,
        scenario: metadata.scenario.clone(),
        seed: ensemble.seed,
        library_version: metadata.library_version.clone(),
        epsilon: ensemble.epsilon,
        n0: ensemble.n0,
        replicates: ensemble.replicates,
        horizon: spec.horizon,
        initial_state: spec.initial,
        mean_coupling_time: ensemble.mean_coupling_time,
        non_coalesced: ensemble.non_coalesced,
        tv_curve: ensemble.tv_curve.clone(),
        bound_curve: ensemble.bound_curve.clone(),
        survival: ensemble.survival.clone(),
    };

    let dir = out_dir(&file, overrides);
    let json_path = prepare_path(&dir, "coupling.json", &built.name)?;
    json_file(&json_path, &built.name, &json)?;

    let curves_path = prepare_path(&dir, "coupling_curves.csv", &built.name)?;
    let mut writer = csv::Writer::from_writer(csv_file(&curves_path, &metadata)?);
    write_rows(
        &mut writer,
        &built.name,
        &["block", "tv_exact", "bound", "survival"],
        (0..=spec.horizon).map(|block| {
            vec![
                block.to_string(),
                json.tv_curve[block].to_string(),
                json.bound_curve[block].to_string(),
                json.survival[block].to_string(),
            ]
        }),
    )?;

    Ok(CommandOutcome {
        scenario: built.name.clone(),
        notes: vec![format!(
            "epsilon = {:.6} at N0 = {}, mean coupling time {:.4} blocks",
            json.epsilon, json.n0, json.mean_coupling_time
        )],
        files: vec![json_path, curves_path],
    })
}

fn execute_chain(built: &BuiltScenario, kind: SamplerKind) -> Result<ChainRun, RuntimeError> {
    let config = ChainConfig::new(
        kind,
        built.steps,
        &built.target,
        &built.proposal,
        built.initial.clone(),
        built.seed,
    )
    .with_fallback(built.fallback);
    run_chain(&config).map_err(|e| RuntimeError::new(&built.name, format!("sampler failed: {e}")))
}

/// Exact per-state TV on finite spaces, binned TV on continuous ones.
fn trace_tv(
    file: &ScenarioFile,
    built: &BuiltScenario,
    trace: &[mtmc::core::Point],
) -> Result<f64, CliError> {
    match &built.finite {
        Some(pieces) => {
            let mut frequencies = vec![0.0; pieces.target_masses.len()];
            for point in trace {
                let label = pieces
                    .space
                    .label(point)
                    .map_err(|e| RuntimeError::new(&built.name, format!("trace label: {e}")))?;
                frequencies[label - 1] += 1.0;
            }
            let n = trace.len() as f64;
            for slot in &mut frequencies {
                *slot /= n;
            }
            let estimate = tv_discrete(&frequencies, &pieces.target_masses)
                .map_err(|e| RuntimeError::new(&built.name, format!("tv estimate: {e}")))?;
            Ok(estimate.value)
        }
        None => {
            let diagnostics = file
                .diagnostics
                .as_ref()
                .expect("checked by callers on continuous spaces");
            let bins = histogram_bins(file, diagnostics.bins.expect("validated"))?;
            let estimate = tv_histogram(trace, &built.target, &bins)
                .map_err(|e| RuntimeError::new(&built.name, format!("tv estimate: {e}")))?;
            Ok(estimate.value)
        }
    }
}

/// One diagnostics row per checkpoint.
pub struct DiagnosticsRow {
    pub step: usize,
    pub tv: f64,
    pub delta_m: Option<f64>,
    pub d_m: Option<f64>,
    pub running_mean: Option<f64>,
}

pub struct ComputedDiagnostics {
    pub rows: Vec<DiagnosticsRow>,
    pub delta_by_generation: Vec<GenerationDelta>,
    pub final_running_mean: Option<f64>,
}

fn compute_diagnostics(
    file: &ScenarioFile,
    built: &BuiltScenario,
    run: &ChainRun,
    spec: &crate::config::DiagnosticsSpec,
) -> Result<ComputedDiagnostics, CliError> {
    let grid = diagnostic_grid(file, built, spec);
    let runtime = |e: &dyn std::fmt::Display| RuntimeError::new(&built.name, e.to_string());

    let running = match &spec.observable {
        Some(observable_spec) => {
            let (f, bound) = observable_fn(observable_spec);
            Some(
                ergodic_average(&run.trace, f, bound)
                    .map_err(|e| runtime(&format!("running mean: {e}")))?,
            )
        }
        None => None,
    };

    let snapshot_gap = |generation: usize| -> Result<(f64, Option<f64>), RuntimeError> {
        let archive = run.archive.as_ref().expect("caller checked");
        let snapshot = archive
            .snapshot_at(generation)
            .map_err(|e| runtime(&format!("snapshot {generation}: {e}")))?;
        let delta = approximation_gap(&snapshot, &built.target, &grid)
            .map_err(|e| runtime(&format!("approximation gap at {generation}: {e}")))?;
        let drift = if generation + 1 <= archive.generation() {
            let next = archive
                .snapshot_at(generation + 1)
                .map_err(|e| runtime(&format!("snapshot {}: {e}", generation + 1)))?;
            let gaps = generation_gaps(&[snapshot, next], &built.target, &grid)
                .map_err(|e| runtime(&format!("kernel drift at {generation}: {e}")))?;
            Some(gaps[0].d_m)
        } else {
            None
        };
        Ok((delta, drift))
    };

    let mut rows = Vec::with_capacity(spec.checkpoints.len());
    for &checkpoint in &spec.checkpoints {
        let tv = trace_tv(file, built, &run.trace[..checkpoint])?;
        let (delta_m, d_m) = if run.archive.is_some() {
            let generation = run.diagnostics_stream[checkpoint - 2].generation;
            let (delta, drift) = snapshot_gap(generation)?;
            (Some(delta), drift)
        } else {
            (None, None)
        };
        rows.push(DiagnosticsRow {
            step: checkpoint,
            tv,
            delta_m,
            d_m,
            running_mean: running.as_ref().map(|r| r[checkpoint - 1]),
        });
    }

    let mut delta_by_generation = Vec::new();
    if run.archive.is_some() {
        let final_generation = run.archive.as_ref().expect("checked").generation();
        for &generation in &spec.generations {
            if generation > final_generation {
                continue;
            }
            let (delta, drift) = snapshot_gap(generation)?;
            delta_by_generation.push(GenerationDelta {
                generation,
                delta,
                kernel_drift: drift,
            });
        }
    }

    Ok(ComputedDiagnostics {
        rows,
        delta_by_generation,
        final_running_mean: running.as_ref().map(|r| *r.last().expect("non-empty trace")),
    })
}

fn write_diagnostics_csv(
    path: &Path,
    metadata: &Metadata,
    computed: &ComputedDiagnostics,
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(csv_file(path, metadata)?);
    write_rows(
        &mut writer,
        &metadata.scenario,
        &["step", "tv_histogram", "delta_m", "D_m", "running_mean_e"],
        computed.rows.iter().map(|row| {
            vec![
                row.step.to_string(),
                row.tv.to_string(),
                optional_field(row.delta_m),
                optional_field(row.d_m),
                optional_field(row.running_mean),
            ]
        }),
    )?;
    Ok(())
}

fn write_rows<W: std::io::Write, I>(
    writer: &mut csv::Writer<W>,
    scenario: &str,
    header: &[&str],
    rows: I,
) -> Result<(), RuntimeError>
where
    I: Iterator<Item = Vec<String>>,
{
    let io_error = |e: csv::Error| RuntimeError::new(scenario, format!("csv write failed: {e}"));
    writer.write_record(header).map_err(io_error)?;
    for row in rows {
        writer.write_record(&row).map_err(io_error)?;
    }
    writer
        .flush()
        .map_err(|e| RuntimeError::new(scenario, format!("csv write failed: {e}")))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub library_version: String,
    pub sampler: String,
    pub steps: usize,
    pub iterations: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub true_evals: u64,
    pub approx_evals: u64,
    pub work_units: f64,
    pub initial_generation: usize,
    pub final_generation: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv_checkpoints: Option<Vec<TvCheckpoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_by_generation: Option<Vec<GenerationDelta>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_running_mean: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TvCheckpoint {
    pub step: usize,
    pub tv: f64,
}

#[derive(Debug, Serialize)]
pub struct GenerationDelta {
    pub generation: usize,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_drift: Option<f64>,
}

fn run_report(
    metadata: &Metadata,
    built: &BuiltScenario,
    run: &ChainRun,
    diagnostics: Option<&ComputedDiagnostics>,
) -> RunReport {
    let final_generation = run
        .archive
        .as_ref()
        .map(ApproximationState::generation)
        .unwrap_or(0);
    RunReport {
        schema_version: metadata.schema_version,
        scenario: metadata.scenario.clone(),
        seed: metadata.seed,
        library_version: metadata.library_version.clone(),
        sampler: match built.sampler_kind {
            SamplerKind::MetropolisHastings => "mh".to_string(),
            SamplerKind::MovingTarget => "mtmc".to_string(),
        },
        steps: built.steps,
        iterations: run.ledger.iterations,
        accepted: run.accept_count(),
        acceptance_rate: acceptance_rate(run),
        true_evals: run.ledger.true_evals,
        approx_evals: run.ledger.approx_evals,
        work_units: run.work.units,
        initial_generation: run.initial_generation,
        final_generation,
        tv_checkpoints: diagnostics.map(|d| {
            d.rows
                .iter()
                .map(|row| TvCheckpoint {
                    step: row.step,
                    tv: row.tv,
                })
                .collect()
        }),
        delta_by_generation: diagnostics.and_then(|d| {
            if d.delta_by_generation.is_empty() {
                None
            } else {
                Some(
                    d.delta_by_generation
                        .iter()
                        .map(|g| GenerationDelta {
                            generation: g.generation,
                            delta: g.delta,
                            kernel_drift: g.kernel_drift,
                        })
                        .collect(),
                )
            }
        }),
        final_running_mean: diagnostics.and_then(|d| d.final_running_mean),
    }
}

#[derive(Debug, Serialize)]
pub struct SamplerSide {
    pub sampler: String,
    pub true_evals: u64,
    pub approx_evals: u64,
    pub iterations: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub final_tv: f64,
    pub work_units: f64,
}

/// Fraction of proposals accepted; zero (not NaN) for a one-entry run
/// that never proposed, so reports stay valid JSON.
fn acceptance_rate(run: &ChainRun) -> f64 {
    if run.ledger.iterations == 0 {
        0.0
    } else {
        run.accept_count() as f64 / run.ledger.iterations as f64
    }
}

fn sampler_side(name: &str, run: &ChainRun, final_tv: f64) -> SamplerSide {
    SamplerSide {
        sampler: name.to_string(),
        true_evals: run.ledger.true_evals,
        approx_evals: run.ledger.approx_evals,
        iterations: run.ledger.iterations,
        accepted: run.accept_count(),
        acceptance_rate: acceptance_rate(run),
        final_tv,
        work_units: run.work.units,
    }
}

#[derive(Debug, Serialize)]
pub struct ComparisonReport {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub library_version: String,
    pub steps: usize,
    pub baseline: SamplerSide,
    pub moving_target: SamplerSide,
    pub eval_ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct SpectralJson {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub library_version: String,
    pub n: usize,
    pub initial_state: usize,
    pub horizon: usize,
    pub lambdas: Vec<f64>,
    pub oracle_gap: f64,
    pub max_residual: f64,
    pub thetas: Vec<f64>,
    pub amplitude: f64,
}

#[derive(Debug, Serialize)]
pub struct CouplingJson {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub library_version: String,
    pub epsilon: f64,
    pub n0: usize,
    pub replicates: usize,
    pub horizon: usize,
    pub initial_state: usize,
    pub mean_coupling_time: f64,
    pub non_coalesced: usize,
    pub tv_curve: Vec<f64>,
    pub bound_curve: Vec<f64>,
    pub survival: Vec<f64>,
}
