//! The two sampling loops and the ledger that makes their cost difference
//! measurable.
//!
//! Both samplers share one skeleton: propose a candidate, form a Metropolis
//! ratio, accept with a single strict `u < α` comparison. They differ in
//! *whose* density enters the ratio:
//!
//! * [`mh_step`] (the baseline) evaluates the true target at every
//!   candidate — one expensive call per iteration, accepted or not.
//! * [`mtmc_step`] forms the ratio entirely from the nearest-neighbour
//!   surrogate: the candidate is scored by one archive query, the current
//!   point by its stored value (its own nearest neighbour is itself). The
//!   true target is evaluated only when the candidate is *accepted*, and
//!   that fresh value immediately refines the surrogate. A rejection leaves
//!   the surrogate untouched.
//!
//! The [`EvaluationLedger`] counts both kinds of work so the trade is not a
//! claim but an invariant: a moving-target run satisfies
//! `true_evals = 1 + #accepts` exactly, against `1 + #iterations` for the
//! baseline.
//!
//! Both steps consume the randomness stream identically — one proposal draw,
//! then one acceptance uniform — so runs with equal seeds are comparable
//! draw-for-draw across samplers. When the surrogate happens to equal the
//! true target everywhere the chain looks, the two samplers produce
//! bit-identical traces from the same seed.

use crate::approx::{ApproxError, ApproximationState};
use crate::core::{
    accept_ratio_mh, bernoulli_accept, CoreError, Point, Proposal, RngStream, TargetDensity,
};
use std::io::Write;
use thiserror::Error;

/// Which sampling loop to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    MetropolisHastings,
    MovingTarget,
}

/// Errors raised while running a chain.
#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("a chain needs at least one point; zero steps requested")]
    ZeroSteps,

    #[error("zero target density at the initial point {0:?}; pick a starting point inside the support")]
    ZeroDensityStart(Vec<f64>),

    #[error("zero approximation at current state {0:?}: the Metropolis ratio is undefined")]
    ZeroApproximationAtCurrent(Vec<f64>),

    #[error("current point {0:?} is not archived; the moving-target ratio needs its stored value")]
    CurrentNotArchived(Vec<f64>),

    #[error("warm-start archive has dimension {found}, target has dimension {expected}")]
    WarmStartDimensionMismatch { expected: usize, found: usize },

    #[error("trace export failed: {0}")]
    Csv(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Approx(#[from] ApproxError),
}

/// Work counters for one chain.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvaluationLedger {
    /// Calls to the true target density (the expensive resource).
    pub true_evals: u64,
    /// Surrogate queries: one nearest-neighbour lookup for each candidate
    /// plus one stored-value lookup for the current point, per iteration.
    pub approx_evals: u64,
    /// Loop iterations executed (one less than the trace length).
    pub iterations: u64,
}

/// Accumulated artificial cost: `true_evals` weighted by the target's
/// declared per-evaluation cost. Tracked separately from the integer
/// counters because it is a float.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WorkMeter {
    pub units: f64,
}

/// Per-iteration diagnostics emitted by [`run_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Trace index this iteration produced (`1 ..= N−1`).
    pub step: usize,
    /// The acceptance probability used.
    pub alpha: f64,
    /// Density value at the current point as the ratio saw it (surrogate
    /// value for moving-target, true value for the baseline).
    pub value_current: f64,
    /// Density value at the candidate as the ratio saw it.
    pub value_candidate: f64,
    /// Archive generation after this iteration (0 for the baseline).
    pub generation: usize,
    /// True-target evaluations made so far, including the initial one.
    pub true_evals_cumulative: u64,
}

/// A completed chain with its full accounting.
#[derive(Debug)]
pub struct ChainRun {
    /// Visited points, length `N`; entry 0 is the initial point.
    pub trace: Vec<Point>,
    /// `accepted_flags[n]` says whether trace entry `n` was a fresh
    /// acceptance; entry 0 is `false` by convention.
    pub accepted_flags: Vec<bool>,
    pub ledger: EvaluationLedger,
    pub work: WorkMeter,
    /// One record per iteration, length `N − 1`.
    pub diagnostics_stream: Vec<StepRecord>,
    /// Final surrogate archive (moving-target runs only).
    pub archive: Option<ApproximationState>,
    /// Archive generation right after initialization — the baseline for
    /// `generation` deltas in the diagnostics stream.
    pub initial_generation: usize,
}

impl ChainRun {
    /// Number of accepted proposals.
    pub fn accept_count(&self) -> u64 {
        self.accepted_flags.iter().map(|&a| a as u64).sum()
    }
}

/// Everything a chain needs to run. Borrowed target and proposal keep the
/// config cheap to clone per replicate; the seed/stream pair names the
/// randomness so replicates can share a seed while staying independent.
#[derive(Debug)]
pub struct ChainConfig<'a> {
    pub kind: SamplerKind,
    /// Trace length `N` (the loop runs `N − 1` iterations).
    pub steps: usize,
    pub target: &'a TargetDensity,
    pub proposal: &'a Proposal,
    pub initial: Point,
    pub seed: u64,
    pub stream: u64,
    /// Surrogate value on an empty archive (moving-target only).
    pub fallback: f64,
    /// Start from an existing archive instead of an empty one.
    pub warm_start: Option<ApproximationState>,
}

impl<'a> ChainConfig<'a> {
    pub fn new(
        kind: SamplerKind,
        steps: usize,
        target: &'a TargetDensity,
        proposal: &'a Proposal,
        initial: Point,
        seed: u64,
    ) -> Self {
        ChainConfig {
            kind,
            steps,
            target,
            proposal,
            initial,
            seed,
            stream: 0,
            fallback: 1.0,
            warm_start: None,
        }
    }

    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_fallback(mut self, fallback: f64) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn with_warm_start(mut self, archive: ApproximationState) -> Self {
        self.warm_start = Some(archive);
        self
    }
}

/// Outcome of one baseline iteration.
#[derive(Debug, Clone)]
pub struct MhOutcome {
    pub next: Point,
    /// True density at `next` (so the caller never re-evaluates).
    pub p_next: f64,
    pub accepted: bool,
    pub alpha: f64,
    /// True density at the candidate, whether or not it was accepted.
    pub p_candidate: f64,
}

/// One Metropolis–Hastings iteration: draws a candidate, evaluates the true
/// target there, and accepts with probability
/// `min(1, p̃(x*)/p̃(x) · Q(x*,x)/Q(x,x*))`.
///
/// `p_current` must be the true density at `current`, strictly positive —
/// passing it in (rather than re-evaluating) is what keeps the loop at one
/// true evaluation per iteration.
pub fn mh_step(
    rng: &mut RngStream,
    target: &TargetDensity,
    proposal: &Proposal,
    current: &Point,
    p_current: f64,
) -> Result<MhOutcome, SamplerError> {
    let candidate = proposal.sample(rng, current);
    let p_candidate = target.eval(&candidate)?;
    let q_forward = proposal.density(current, &candidate);
    let q_backward = proposal.density(&candidate, current);
    let alpha = accept_ratio_mh(p_current, p_candidate, q_forward, q_backward)?;
    let accepted = bernoulli_accept(rng, alpha)?;
    let (next, p_next) = if accepted {
        (candidate, p_candidate)
    } else {
        (current.clone(), p_current)
    };
    Ok(MhOutcome {
        next,
        p_next,
        accepted,
        alpha,
        p_candidate,
    })
}

/// Outcome of one moving-target iteration.
#[derive(Debug, Clone)]
pub struct MtmcOutcome {
    pub next: Point,
    pub accepted: bool,
    pub alpha: f64,
    /// Surrogate value at the current point (its stored archive value).
    pub value_current: f64,
    /// Surrogate value at the candidate (nearest-neighbour query).
    pub value_candidate: f64,
    /// True density computed at the candidate — present exactly when the
    /// step accepted.
    pub true_value: Option<f64>,
}

/// One moving-target iteration.
///
/// The acceptance ratio is formed purely from the surrogate: the candidate's
/// nearest-neighbour value against the current point's stored value (the
/// current point is always archived, so its nearest neighbour is itself).
/// Only an accepted candidate costs a true evaluation, and the fresh value
/// is archived before the function returns; a rejected step changes nothing.
pub fn mtmc_step(
    rng: &mut RngStream,
    target: &TargetDensity,
    proposal: &Proposal,
    approx: &mut ApproximationState,
    current: &Point,
) -> Result<MtmcOutcome, SamplerError> {
    let value_current = approx
        .stored_value(current)
        .ok_or_else(|| SamplerError::CurrentNotArchived(current.coords().to_vec()))?;
    if value_current == 0.0 {
        return Err(SamplerError::ZeroApproximationAtCurrent(
            current.coords().to_vec(),
        ));
    }
    let candidate = proposal.sample(rng, current);
    let value_candidate = approx.evaluate(&candidate);
    let q_forward = proposal.density(current, &candidate);
    let q_backward = proposal.density(&candidate, current);
    let alpha = accept_ratio_mh(value_current, value_candidate, q_forward, q_backward)?;
    let accepted = bernoulli_accept(rng, alpha)?;
    if accepted {
        let true_value = target.eval(&candidate)?;
        approx.update(candidate.clone(), true_value)?;
        Ok(MtmcOutcome {
            next: candidate,
            accepted: true,
            alpha,
            value_current,
            value_candidate,
            true_value: Some(true_value),
        })
    } else {
        Ok(MtmcOutcome {
            next: current.clone(),
            accepted: false,
            alpha,
            value_current,
            value_candidate,
            true_value: None,
        })
    }
}

/// Runs a full chain under the given configuration.
///
/// The initial point is always evaluated against the true target (and must
/// have positive density); a moving-target run archives it so the first
/// iteration's ratio is well defined. Identical configurations produce
/// identical runs, bit for bit.
pub fn run_chain(config: &ChainConfig) -> Result<ChainRun, SamplerError> {
    if config.steps == 0 {
        return Err(SamplerError::ZeroSteps);
    }
    let mut rng = RngStream::new(config.seed, config.stream);
    let p_initial = config.target.eval(&config.initial)?;
    if p_initial == 0.0 {
        return Err(SamplerError::ZeroDensityStart(
            config.initial.coords().to_vec(),
        ));
    }
    let mut ledger = EvaluationLedger {
        true_evals: 1,
        ..EvaluationLedger::default()
    };
    let mut work = WorkMeter {
        units: config.target.cost_per_eval(),
    };

    let mut trace = Vec::with_capacity(config.steps);
    let mut accepted_flags = Vec::with_capacity(config.steps);
    let mut diagnostics_stream = Vec::with_capacity(config.steps - 1);
    trace.push(config.initial.clone());
    accepted_flags.push(false);

    match config.kind {
        SamplerKind::MetropolisHastings => {
            let mut current = config.initial.clone();
            let mut p_current = p_initial;
            for step in 1..config.steps {
                let outcome =
                    mh_step(&mut rng, config.target, config.proposal, &current, p_current)?;
                ledger.true_evals += 1;
                ledger.iterations += 1;
                work.units += config.target.cost_per_eval();
                diagnostics_stream.push(StepRecord {
                    step,
                    alpha: outcome.alpha,
                    value_current: p_current,
                    value_candidate: outcome.p_candidate,
                    generation: 0,
                    true_evals_cumulative: ledger.true_evals,
                });
                current = outcome.next;
                p_current = outcome.p_next;
                trace.push(current.clone());
                accepted_flags.push(outcome.accepted);
            }
            Ok(ChainRun {
                trace,
                accepted_flags,
                ledger,
                work,
                diagnostics_stream,
                archive: None,
                initial_generation: 0,
            })
        }
        SamplerKind::MovingTarget => {
            let mut archive = match &config.warm_start {
                Some(existing) => {
                    if existing.dim() != config.target.dim() {
                        return Err(SamplerError::WarmStartDimensionMismatch {
                            expected: config.target.dim(),
                            found: existing.dim(),
                        });
                    }
                    existing.clone()
                }
                None => ApproximationState::new(config.target.dim(), config.fallback)?,
            };
            archive.update(config.initial.clone(), p_initial)?;
            let initial_generation = archive.generation();

            let mut current = config.initial.clone();
            for step in 1..config.steps {
                let outcome = mtmc_step(
                    &mut rng,
                    config.target,
                    config.proposal,
                    &mut archive,
                    &current,
                )?;
                ledger.iterations += 1;
                ledger.approx_evals += 2;
                if outcome.accepted {
                    ledger.true_evals += 1;
                    work.units += config.target.cost_per_eval();
                }
                diagnostics_stream.push(StepRecord {
                    step,
                    alpha: outcome.alpha,
                    value_current: outcome.value_current,
                    value_candidate: outcome.value_candidate,
                    generation: archive.generation(),
                    true_evals_cumulative: ledger.true_evals,
                });
                current = outcome.next;
                trace.push(current.clone());
                accepted_flags.push(outcome.accepted);
            }
            Ok(ChainRun {
                trace,
                accepted_flags,
                ledger,
                work,
                diagnostics_stream,
                archive: Some(archive),
                initial_generation,
            })
        }
    }
}

/// Writes the trace as CSV: `step, coord_0.., accepted, alpha, generation,
/// true_evals_cumulative`. Row 0 is the initial point and has no acceptance
/// probability (empty field). Floats are written in shortest round-trip
/// form, so identical runs export identical bytes.
pub fn write_trace_csv<W: Write>(run: &ChainRun, writer: W) -> Result<(), SamplerError> {
    let dim = run.trace[0].dim();
    let mut csv_writer = csv::Writer::from_writer(writer);
    let mut header = vec!["step".to_string()];
    for d in 0..dim {
        header.push(format!("coord_{d}"));
    }
    header.extend(
        ["accepted", "alpha", "generation", "true_evals_cumulative"]
            .iter()
            .map(|s| s.to_string()),
    );
    csv_writer
        .write_record(&header)
        .map_err(|e| SamplerError::Csv(e.to_string()))?;

    for (n, point) in run.trace.iter().enumerate() {
        let mut row = vec![n.to_string()];
        for &coordinate in point.coords() {
            row.push(coordinate.to_string());
        }
        row.push((run.accepted_flags[n] as u8).to_string());
        if n == 0 {
            row.push(String::new());
            row.push(run.initial_generation.to_string());
            row.push("1".to_string());
        } else {
            let record = &run.diagnostics_stream[n - 1];
            row.push(record.alpha.to_string());
            row.push(record.generation.to_string());
            row.push(record.true_evals_cumulative.to_string());
        }
        csv_writer
            .write_record(&row)
            .map_err(|e| SamplerError::Csv(e.to_string()))?;
    }
    csv_writer
        .flush()
        .map_err(|e| SamplerError::Csv(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{DiscreteSpace, ProposalKind};

    fn gaussian_target() -> TargetDensity {
        TargetDensity::new(1, |x| (-0.5 * x[0] * x[0]).exp())
    }

    #[test]
    fn flat_target_with_symmetric_proposal_always_accepts() {
        let flat = TargetDensity::new(1, |_| 1.0);
        let proposal = Proposal::gaussian_random_walk(1, 0.7).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MetropolisHastings,
            500,
            &flat,
            &proposal,
            Point::one_d(0.0).unwrap(),
            11,
        );
        let run = run_chain(&config).unwrap();
        for record in &run.diagnostics_stream {
            assert_eq!(record.alpha, 1.0);
        }
        assert_eq!(run.accept_count(), 499);
        assert_eq!(run.ledger.true_evals, 500);
    }

    #[test]
    fn two_state_alphas_match_the_hand_ratio() {
        let space = DiscreteSpace::new(2).unwrap();
        let target = space.target(&[0.75, 0.25]).unwrap();
        let proposal = space.independent_proposal(&[0.5, 0.5]).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MetropolisHastings,
            400,
            &target,
            &proposal,
            space.point(1).unwrap(),
            13,
        );
        let run = run_chain(&config).unwrap();
        let mut saw_downhill = false;
        let mut saw_uphill = false;
        for (n, record) in run.diagnostics_stream.iter().enumerate() {
            let here = run.trace[n].coords()[0];
            if record.value_current == 0.75 && record.value_candidate == 0.25 {
                assert!((record.alpha - 1.0 / 3.0).abs() < 1e-15, "α = {}", record.alpha);
                assert_eq!(here, 1.0);
                saw_downhill = true;
            }
            if record.value_current == 0.25 && record.value_candidate == 0.75 {
                assert_eq!(record.alpha, 1.0);
                saw_uphill = true;
            }
        }
        assert!(saw_downhill && saw_uphill, "run never exercised both moves");
    }

    #[test]
    fn mh_visits_states_at_stationary_frequencies() {
        let space = DiscreteSpace::new(2).unwrap();
        let target = space.target(&[0.75, 0.25]).unwrap();
        let proposal = space.independent_proposal(&[0.5, 0.5]).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MetropolisHastings,
            100_000,
            &target,
            &proposal,
            space.point(1).unwrap(),
            17,
        );
        let run = run_chain(&config).unwrap();
        let ones = run
            .trace
            .iter()
            .filter(|p| p.coords()[0] == 1.0)
            .count() as f64;
        let frequency = ones / run.trace.len() as f64;
        assert!(
            (frequency - 0.75).abs() < 0.01,
            "state-1 frequency {frequency}"
        );
        assert_eq!(run.ledger.true_evals, 100_000);
        assert_eq!(run.ledger.iterations, 99_999);
    }

    #[test]
    fn lone_archived_point_makes_the_first_step_free() {
        // With only the initial point archived, every candidate's nearest
        // neighbour is the current point itself, so a symmetric proposal
        // accepts with probability one.
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 2.0).unwrap();
        for seed in 0..20 {
            let config = ChainConfig::new(
                SamplerKind::MovingTarget,
                2,
                &target,
                &proposal,
                Point::one_d(0.3).unwrap(),
                seed,
            );
            let run = run_chain(&config).unwrap();
            let record = &run.diagnostics_stream[0];
            assert_eq!(record.alpha, 1.0);
            assert!(run.accepted_flags[1]);
            assert_eq!(record.value_current, record.value_candidate);
        }
    }

    #[test]
    fn ratio_uses_the_nearest_archived_value() {
        let target = TargetDensity::new(1, |x| (1.0 - x[0]).abs().max(0.01));
        // Deterministic proposal: always offer 0.9, symmetric density.
        let proposal = Proposal::from_parts(
            ProposalKind::General,
            1,
            |_rng: &mut RngStream, _from: &Point| Point::one_d(0.9).unwrap(),
            |_from: &Point, _to: &Point| 1.0,
        );
        let mut archive = ApproximationState::from_records(
            1,
            1.0,
            vec![
                (Point::one_d(0.0).unwrap(), 0.8),
                (Point::one_d(1.0).unwrap(), 0.2),
            ],
        )
        .unwrap();
        let current = Point::one_d(0.0).unwrap();
        let mut rng = RngStream::new(19, 0);
        let outcome =
            mtmc_step(&mut rng, &target, &proposal, &mut archive, &current).unwrap();
        // Candidate 0.9 is nearest to the archived 1.0 → value 0.2; current
        // 0.0 is stored at 0.8.
        assert_eq!(outcome.value_current, 0.8);
        assert_eq!(outcome.value_candidate, 0.2);
        assert_eq!(outcome.alpha, 0.25);
        if outcome.accepted {
            assert_eq!(archive.generation(), 3);
            assert!(outcome.true_value.is_some());
        } else {
            assert_eq!(archive.generation(), 2);
            assert!(outcome.true_value.is_none());
        }
    }

    #[test]
    fn moving_target_ledger_identity_holds() {
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 2.5).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MovingTarget,
            5_000,
            &target,
            &proposal,
            Point::one_d(0.0).unwrap(),
            23,
        );
        let run = run_chain(&config).unwrap();
        assert_eq!(run.ledger.true_evals, 1 + run.accept_count());
        assert_eq!(run.ledger.approx_evals, 2 * run.ledger.iterations);
        assert_eq!(run.ledger.iterations, 4_999);
        // The archive grew by exactly one record per acceptance.
        let archive = run.archive.as_ref().unwrap();
        assert_eq!(
            archive.generation() as u64,
            run.initial_generation as u64 + run.accept_count()
        );
        // Acceptance should be in a healthy middle band for this scale.
        let rate = run.accept_count() as f64 / run.ledger.iterations as f64;
        assert!((0.05..0.95).contains(&rate), "acceptance rate {rate}");
    }

    #[test]
    fn generation_advances_only_on_acceptance() {
        // Heavy-tailed target: a light-tailed density can underflow to an
        // exact zero on a far excursion (the surrogate accepts freely inside
        // a single nearest-neighbour cell), and archiving that zero stops
        // the chain with a zero-approximation error. Cauchy tails keep every
        // reachable value strictly positive.
        let target = TargetDensity::new(1, |x: &[f64]| 1.0 / (1.0 + x[0] * x[0]));
        let proposal = Proposal::gaussian_random_walk(1, 3.0).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MovingTarget,
            800,
            &target,
            &proposal,
            Point::one_d(0.1).unwrap(),
            29,
        );
        let run = run_chain(&config).unwrap();
        assert!(run.accept_count() > 0, "no accepted step in the run");
        assert!(
            run.accept_count() < run.ledger.iterations,
            "no rejected step in the run"
        );
        let mut accepts_so_far = 0usize;
        for (n, record) in run.diagnostics_stream.iter().enumerate() {
            if run.accepted_flags[n + 1] {
                accepts_so_far += 1;
            }
            assert_eq!(
                record.generation,
                run.initial_generation + accepts_so_far,
                "generation drifted at step {}",
                record.step
            );
            assert_eq!(record.true_evals_cumulative, 1 + accepts_so_far as u64);
        }
    }

    #[test]
    fn rejected_steps_repeat_the_point_exactly() {
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 4.0).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MovingTarget,
            1_000,
            &target,
            &proposal,
            Point::one_d(0.0).unwrap(),
            31,
        );
        let run = run_chain(&config).unwrap();
        let mut saw_rejection = false;
        for n in 1..run.trace.len() {
            if !run.accepted_flags[n] {
                assert_eq!(
                    run.trace[n].bit_pattern(),
                    run.trace[n - 1].bit_pattern(),
                    "rejection at {n} moved the chain"
                );
                saw_rejection = true;
            }
        }
        assert!(saw_rejection, "no rejection occurred; widen the proposal");
    }

    #[test]
    fn zero_density_start_is_reported_with_the_point() {
        let target = TargetDensity::new(1, |x| if x[0] >= 0.0 { 1.0 } else { 0.0 });
        let proposal = Proposal::gaussian_random_walk(1, 1.0).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MetropolisHastings,
            10,
            &target,
            &proposal,
            Point::one_d(-5.0).unwrap(),
            37,
        );
        match run_chain(&config) {
            Err(SamplerError::ZeroDensityStart(coords)) => assert_eq!(coords, vec![-5.0]),
            other => panic!("expected zero-density start, got {other:?}"),
        }
    }

    #[test]
    fn single_point_chain_is_just_the_initial_point() {
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 1.0).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MovingTarget,
            1,
            &target,
            &proposal,
            Point::one_d(0.4).unwrap(),
            41,
        );
        let run = run_chain(&config).unwrap();
        assert_eq!(run.trace.len(), 1);
        assert_eq!(run.accepted_flags, vec![false]);
        assert!(run.diagnostics_stream.is_empty());
        assert_eq!(run.ledger.true_evals, 1);
        assert_eq!(run.ledger.iterations, 0);

        let zero = ChainConfig::new(
            SamplerKind::MovingTarget,
            0,
            &target,
            &proposal,
            Point::one_d(0.4).unwrap(),
            41,
        );
        assert!(matches!(run_chain(&zero), Err(SamplerError::ZeroSteps)));
    }

    #[test]
    fn exact_archive_makes_both_samplers_identical() {
        let space = DiscreteSpace::new(2).unwrap();
        let masses = [0.75, 0.25];
        let target = space.target(&masses).unwrap();
        let proposal = space.independent_proposal(&[0.5, 0.5]).unwrap();
        let archive = ApproximationState::from_records(
            1,
            1.0,
            vec![
                (space.point(1).unwrap(), 0.75),
                (space.point(2).unwrap(), 0.25),
            ],
        )
        .unwrap();
        for seed in [3, 59, 1234] {
            let mh_config = ChainConfig::new(
                SamplerKind::MetropolisHastings,
                3_000,
                &target,
                &proposal,
                space.point(1).unwrap(),
                seed,
            );
            let mtmc_config = ChainConfig::new(
                SamplerKind::MovingTarget,
                3_000,
                &target,
                &proposal,
                space.point(1).unwrap(),
                seed,
            )
            .with_warm_start(archive.clone());
            let mh_run = run_chain(&mh_config).unwrap();
            let mtmc_run = run_chain(&mtmc_config).unwrap();
            assert_eq!(mh_run.accepted_flags, mtmc_run.accepted_flags);
            for (a, b) in mh_run.trace.iter().zip(&mtmc_run.trace) {
                assert_eq!(a.bit_pattern(), b.bit_pattern());
            }
            for (r1, r2) in mh_run
                .diagnostics_stream
                .iter()
                .zip(&mtmc_run.diagnostics_stream)
            {
                assert_eq!(r1.alpha.to_bits(), r2.alpha.to_bits());
            }
        }
    }

    #[test]
    fn identical_configs_reproduce_bitwise() {
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 1.5).unwrap();
        let make = |stream: u64| {
            let config = ChainConfig::new(
                SamplerKind::MovingTarget,
                600,
                &target,
                &proposal,
                Point::one_d(0.0).unwrap(),
                47,
            )
            .with_stream(stream);
            run_chain(&config).unwrap()
        };
        let first = make(0);
        let second = make(0);
        let other_stream = make(1);
        for (a, b) in first.trace.iter().zip(&second.trace) {
            assert_eq!(a.bit_pattern(), b.bit_pattern());
        }
        assert_eq!(first.ledger, second.ledger);
        let diverged = first
            .trace
            .iter()
            .zip(&other_stream.trace)
            .any(|(a, b)| a.bit_pattern() != b.bit_pattern());
        assert!(diverged, "different streams should decorrelate the runs");
    }

    #[test]
    fn warm_started_runs_keep_refining_the_same_archive() {
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 2.0).unwrap();
        let first_config = ChainConfig::new(
            SamplerKind::MovingTarget,
            400,
            &target,
            &proposal,
            Point::one_d(0.0).unwrap(),
            53,
        );
        let first = run_chain(&first_config).unwrap();
        let inherited = first.archive.unwrap();
        let before = inherited.generation();

        let second_config = ChainConfig::new(
            SamplerKind::MovingTarget,
            400,
            &target,
            &proposal,
            Point::one_d(0.5).unwrap(),
            54,
        )
        .with_warm_start(inherited);
        let second = run_chain(&second_config).unwrap();
        assert_eq!(second.initial_generation, before + 1);
        assert_eq!(second.ledger.true_evals, 1 + second.accept_count());
        let final_archive = second.archive.as_ref().unwrap();
        assert_eq!(
            final_archive.generation() as u64,
            second.initial_generation as u64 + second.accept_count()
        );

        let mismatched = ApproximationState::new(2, 1.0).unwrap();
        let bad = ChainConfig::new(
            SamplerKind::MovingTarget,
            10,
            &target,
            &proposal,
            Point::one_d(0.0).unwrap(),
            55,
        )
        .with_warm_start(mismatched);
        assert!(matches!(
            run_chain(&bad),
            Err(SamplerError::WarmStartDimensionMismatch {
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn standalone_step_rejects_unarchived_or_dead_current_points() {
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 1.0).unwrap();
        let mut rng = RngStream::new(59, 0);

        let mut empty = ApproximationState::new(1, 1.0).unwrap();
        let current = Point::one_d(0.0).unwrap();
        match mtmc_step(&mut rng, &target, &proposal, &mut empty, &current) {
            Err(SamplerError::CurrentNotArchived(coords)) => assert_eq!(coords, vec![0.0]),
            other => panic!("expected unarchived error, got {other:?}"),
        }

        let mut dead = ApproximationState::new(1, 1.0).unwrap();
        dead.update(current.clone(), 0.0).unwrap();
        let err =
            mtmc_step(&mut rng, &target, &proposal, &mut dead, &current).unwrap_err();
        assert!(
            err.to_string().contains("zero approximation at current state"),
            "unexpected message: {err}"
        );
    }

    #[test]
    fn trace_csv_round_trips_the_run_shape() {
        let target = gaussian_target();
        let proposal = Proposal::gaussian_random_walk(1, 1.0).unwrap();
        let config = ChainConfig::new(
            SamplerKind::MovingTarget,
            50,
            &target,
            &proposal,
            Point::one_d(0.2).unwrap(),
            61,
        );
        let run = run_chain(&config).unwrap();
        let mut buffer = Vec::new();
        write_trace_csv(&run, &mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,coord_0,accepted,alpha,generation,true_evals_cumulative"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 50);
        let first: Vec<&str> = rows[0].split(',').collect();
        assert_eq!(first[0], "0");
        assert_eq!(first[2], "0");
        assert_eq!(first[3], "", "row 0 has no acceptance probability");
        assert_eq!(first[5], "1");
        for (n, row) in rows.iter().enumerate().skip(1) {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields[0], n.to_string());
            let coordinate: f64 = fields[1].parse().unwrap();
            assert_eq!(coordinate.to_bits(), run.trace[n].coords()[0].to_bits());
        }
    }
}
