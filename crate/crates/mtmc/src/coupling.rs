//! Coupling constructions and minorisation-based convergence bounds on
//! finite state spaces.
//!
//! Three layers build on each other:
//!
//! 1. [`maximal_coupling_draw`] realizes the optimal one-shot coupling of two
//!    distributions: the chains land on the same state with probability
//!    exactly `c₁ = Σ_j min(m1(j), m2(j)) = 1 − ‖m1 − m2‖_TV`, and no joint
//!    construction can do better.
//! 2. [`doeblin_epsilon`] extracts a uniform minorisation certificate
//!    `P^{N0}(i, ·) ≥ ε γ(·)` from a transition matrix by taking column
//!    minima, and [`coupled_run`] simulates the split-chain coupling that the
//!    certificate licenses: every block, with probability `ε`, both chains
//!    jump to a shared draw from `γ` and stay glued; otherwise they move
//!    independently through the residual kernels. The time to glue is
//!    geometric with parameter `ε` by construction, which gives the
//!    `(1 − ε)^k` convergence bound teeth you can watch.
//! 3. [`partial_minorisation`] and [`rosenthal_bound`] handle the case where
//!    only a sub-region `R` of the space is uniformly minorised: the glue
//!    coin is only flipped when both chains sit inside `R`, so the bound
//!    trades `(1 − ε)^j` against the probability of fewer than `j` joint
//!    visits to `R × R`.
//!
//! The coupling inequality `‖L(X_k) − a‖ ≤ Prob(T > k)` is the bridge
//! between the simulated coupling times and the exact total-variation curves
//! computed from matrix powers; the tests hold the two against each other.

use crate::core::RngStream;
use crate::spectral::{SpectralError, TransitionMatrix};
use thiserror::Error;

/// Input distributions to [`maximal_coupling_draw`] must sum to 1 within
/// this tolerance.
pub const MASS_SUM_TOL: f64 = 1e-9;

/// Slack for the entry-wise certificate check `P^{N0}(i,j) ≥ ε·γ(j)`:
/// pure float-rounding violations below this are accepted.
pub const CERTIFICATE_TOL: f64 = 1e-12;

/// Errors raised by coupling constructions.
#[derive(Debug, Error)]
pub enum CouplingError {
    #[error("distribution lengths differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("{what} has invalid mass {value} at index {index}")]
    InvalidMass {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("{what} sums to {sum}, not 1 (tolerance {tol})")]
    NotNormalized {
        what: &'static str,
        sum: f64,
        tol: f64,
    },

    #[error("no uniform minorisation at this N0 (N0 = {n0}): some state is unreachable in N0 steps from somewhere")]
    NoUniformMinorisation { n0: usize },

    #[error("N0 must be at least 1")]
    ZeroBlockLength,

    #[error("minorisation region is empty")]
    EmptyRegion,

    #[error("region state {index} out of range for a {n}-state space")]
    RegionOutOfRange { index: usize, n: usize },

    #[error(
        "certificate region covers {covered} of {n} states; this construction needs the full space"
    )]
    RegionNotFullSpace { covered: usize, n: usize },

    #[error("certificate check failed: P^N0({i},{j}) = {found} < epsilon*gamma = {required}")]
    CertificateViolated {
        i: usize,
        j: usize,
        found: f64,
        required: f64,
    },

    #[error("need at least one replicate")]
    NoReplicates,

    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn validate_masses(what: &'static str, masses: &[f64]) -> Result<(), CouplingError> {
    let mut sum = 0.0;
    for (index, &value) in masses.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(CouplingError::InvalidMass { what, index, value });
        }
        sum += value;
    }
    if (sum - 1.0).abs() > MASS_SUM_TOL {
        return Err(CouplingError::NotNormalized {
            what,
            sum,
            tol: MASS_SUM_TOL,
        });
    }
    Ok(())
}

/// Draws one index from unnormalized nonnegative masses by inverting the
/// cumulative sum. Falls back to the last strictly positive index if
/// rounding pushes the cursor past the total.
fn categorical(rng: &mut RngStream, masses: &[f64]) -> usize {
    let total: f64 = masses.iter().sum();
    debug_assert!(total > 0.0, "categorical draw from an all-zero mass vector");
    let cursor = rng.uniform() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (index, &mass) in masses.iter().enumerate() {
        if mass > 0.0 {
            last_positive = index;
            acc += mass;
            if cursor < acc {
                return index;
            }
        }
    }
    last_positive
}

/// One joint move of a coupled pair of chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoupledStep {
    pub x_next: usize,
    pub y_next: usize,
    /// True when the move was drawn from the shared overlap component, in
    /// which case `x_next == y_next`.
    pub coalesced: bool,
}

/// Draws a maximally coupled pair `(X, Y)` with `X ~ m1` and `Y ~ m2`.
///
/// With probability `c₁ = Σ_j min(m1(j), m2(j))` both samples come from the
/// normalized overlap `h / c₁` and coincide; otherwise each is drawn
/// independently from its normalized residual `(m − h) / (1 − c₁)`. Since
/// `1 − c₁` equals the total-variation distance, the coalescence probability
/// achieves the coupling-inequality optimum.
///
/// Identical inputs coalesce with probability one — the residuals carry zero
/// mass and are never sampled.
pub fn maximal_coupling_draw(
    rng: &mut RngStream,
    m1: &[f64],
    m2: &[f64],
) -> Result<CoupledStep, CouplingError> {
    if m1.len() != m2.len() {
        return Err(CouplingError::DimensionMismatch(m1.len(), m2.len()));
    }
    validate_masses("first distribution", m1)?;
    validate_masses("second distribution", m2)?;

    let overlap: Vec<f64> = m1.iter().zip(m2).map(|(a, b)| a.min(*b)).collect();
    let c1: f64 = overlap.iter().sum();

    if rng.uniform() < c1 {
        let state = categorical(rng, &overlap);
        return Ok(CoupledStep {
            x_next: state,
            y_next: state,
            coalesced: true,
        });
    }

    let residual_x: Vec<f64> = m1.iter().zip(&overlap).map(|(a, h)| a - h).collect();
    let residual_y: Vec<f64> = m2.iter().zip(&overlap).map(|(b, h)| b - h).collect();
    let spill_x: f64 = residual_x.iter().sum();
    let spill_y: f64 = residual_y.iter().sum();
    if spill_x <= 0.0 || spill_y <= 0.0 {
        // m1 == m2 up to rounding: the coin landed in float noise beyond the
        // overlap mass, but there is no residual to draw from — coalesce.
        let state = categorical(rng, &overlap);
        return Ok(CoupledStep {
            x_next: state,
            y_next: state,
            coalesced: true,
        });
    }
    let x_next = categorical(rng, &residual_x);
    let y_next = categorical(rng, &residual_y);
    Ok(CoupledStep {
        x_next,
        y_next,
        coalesced: false,
    })
}

/// The overlap mass `c₁ = Σ_j min(m1(j), m2(j))`, i.e. the exact coalescence
/// probability of the maximal coupling and the complement of the
/// total-variation distance.
pub fn overlap_mass(m1: &[f64], m2: &[f64]) -> Result<f64, CouplingError> {
    if m1.len() != m2.len() {
        return Err(CouplingError::DimensionMismatch(m1.len(), m2.len()));
    }
    validate_masses("first distribution", m1)?;
    validate_masses("second distribution", m2)?;
    Ok(m1.iter().zip(m2).map(|(a, b)| a.min(*b)).sum())
}

/// A verified uniform lower bound `P^{N0}(i, ·) ≥ ε γ(·)` for all states `i`
/// in `region`.
#[derive(Debug, Clone)]
pub struct MinorisationCertificate {
    /// The minorisation constant, in `(0, 1]`.
    pub epsilon: f64,
    /// The minorising distribution.
    pub gamma: Vec<f64>,
    /// Number of raw steps per block: the bound concerns `P^{N0}`.
    pub n0: usize,
    /// Sorted, deduplicated states the bound holds from.
    pub region: Vec<usize>,
}

impl MinorisationCertificate {
    pub fn covers_full_space(&self, n: usize) -> bool {
        self.region.len() == n
    }
}

fn certificate_from_rows(
    kernel: &TransitionMatrix,
    region: Vec<usize>,
    n0: usize,
) -> Result<MinorisationCertificate, CouplingError> {
    if n0 == 0 {
        return Err(CouplingError::ZeroBlockLength);
    }
    if region.is_empty() {
        return Err(CouplingError::EmptyRegion);
    }
    let n = kernel.n();
    if let Some(&bad) = region.iter().find(|&&i| i >= n) {
        return Err(CouplingError::RegionOutOfRange { index: bad, n });
    }
    let block = kernel.pow(n0);
    let column_mins: Vec<f64> = (0..n)
        .map(|j| {
            region
                .iter()
                .map(|&i| block[(i, j)])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let epsilon: f64 = column_mins.iter().sum();
    if epsilon <= 0.0 {
        return Err(CouplingError::NoUniformMinorisation { n0 });
    }
    let gamma: Vec<f64> = column_mins.iter().map(|m| m / epsilon).collect();
    for &i in &region {
        for j in 0..n {
            let required = epsilon * gamma[j];
            if block[(i, j)] < required - CERTIFICATE_TOL {
                return Err(CouplingError::CertificateViolated {
                    i,
                    j,
                    found: block[(i, j)],
                    required,
                });
            }
        }
    }
    Ok(MinorisationCertificate {
        epsilon,
        gamma,
        n0,
        region,
    })
}

/// Extracts the Doeblin (full-space) minorisation certificate of `P^{N0}` by
/// taking column minima: `ε = Σ_j min_i P^{N0}(i, j)`, `γ(j) ∝ min_i
/// P^{N0}(i, j)`.
///
/// Fails when some state is unreachable within `N0` steps from some starting
/// point (a zero column minimum everywhere forces `ε = 0`); the caller can
/// retry with a larger `N0`.
pub fn doeblin_epsilon(
    kernel: &TransitionMatrix,
    n0: usize,
) -> Result<MinorisationCertificate, CouplingError> {
    certificate_from_rows(kernel, (0..kernel.n()).collect(), n0)
}

/// Like [`doeblin_epsilon`] but only requires the bound from states inside
/// `region`; the constant can only improve as the region shrinks.
pub fn partial_minorisation(
    kernel: &TransitionMatrix,
    region: &[usize],
    n0: usize,
) -> Result<MinorisationCertificate, CouplingError> {
    let mut sorted: Vec<usize> = region.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    certificate_from_rows(kernel, sorted, n0)
}

/// One simulated split-chain coupling under a full-space certificate.
///
/// Indices are block counts: entry `k` of a curve refers to `k · N0` raw
/// steps of the underlying chain.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    /// First block at which the chains glued, or `None` if they never did
    /// within the horizon.
    pub coupling_time: Option<usize>,
    /// Exact `‖p₀ P^{k·N0} − a‖` for `k = 0, …, steps` (matrix powers, not
    /// the sampled path).
    pub tv_curve: Vec<f64>,
    /// The certificate bound `(1 − ε)^k` on the same grid.
    pub bound_curve: Vec<f64>,
    /// Sampled states of the target-initialized chain, length `steps + 1`.
    pub x_path: Vec<usize>,
    /// Sampled states of the stationary-initialized chain.
    pub y_path: Vec<usize>,
}

/// Simulates the split-chain coupling licensed by a full-space certificate.
///
/// `X₀ ~ p0`, `Y₀ ~ a` (stationary). Each block, while unglued, a single
/// `ε`-coin decides between a shared draw from `γ` (the chains glue and move
/// together ever after) and independent draws from the two residual kernels
/// `(P^{N0}(x, ·) − ε γ) / (1 − ε)`. The coin is flipped every block
/// regardless of the current states — a chance meeting through the residuals
/// does not glue the chains — so the glue time is geometric with parameter
/// `ε` exactly.
pub fn coupled_run(
    rng: &mut RngStream,
    kernel: &TransitionMatrix,
    certificate: &MinorisationCertificate,
    p0: &[f64],
    steps: usize,
) -> Result<CoupledRun, CouplingError> {
    let n = kernel.n();
    if !certificate.covers_full_space(n) {
        return Err(CouplingError::RegionNotFullSpace {
            covered: certificate.region.len(),
            n,
        });
    }
    if p0.len() != n {
        return Err(CouplingError::DimensionMismatch(p0.len(), n));
    }
    validate_masses("initial distribution", p0)?;

    let block = kernel.pow(certificate.n0);
    let epsilon = certificate.epsilon;
    let gamma = &certificate.gamma;
    let stationary = kernel.stationary();

    let residual_row = |state: usize| -> Vec<f64> {
        if epsilon >= 1.0 {
            // The coin always wins; this row is never sampled.
            return vec![1.0 / n as f64; n];
        }
        (0..n)
            .map(|j| ((block[(state, j)] - epsilon * gamma[j]) / (1.0 - epsilon)).max(0.0))
            .collect()
    };

    let mut x = categorical(rng, p0);
    let mut y = categorical(rng, stationary);
    let mut x_path = Vec::with_capacity(steps + 1);
    let mut y_path = Vec::with_capacity(steps + 1);
    x_path.push(x);
    y_path.push(y);
    let mut glued = false;
    let mut coupling_time = None;

    let mut tv_curve = Vec::with_capacity(steps + 1);
    let mut bound_curve = Vec::with_capacity(steps + 1);
    let mut p = p0.to_vec();
    let mut bound = 1.0f64;

    for k in 0..=steps {
        let tv: f64 = p
            .iter()
            .zip(stationary)
            .map(|(value, target)| (value - target).abs())
            .sum::<f64>()
            * 0.5;
        tv_curve.push(tv);
        bound_curve.push(bound.min(1.0));

        if k == steps {
            break;
        }
        if glued {
            let shared = categorical(rng, &block.row(x).iter().copied().collect::<Vec<f64>>());
            x = shared;
            y = shared;
        } else if rng.uniform() < epsilon {
            let shared = categorical(rng, gamma);
            x = shared;
            y = shared;
            glued = true;
            coupling_time = Some(k + 1);
        } else {
            x = categorical(rng, &residual_row(x));
            y = categorical(rng, &residual_row(y));
        }
        x_path.push(x);
        y_path.push(y);

        // Advance the exact distribution and the certificate bound to the
        // next block boundary.
        p = (0..n)
            .map(|j| (0..n).map(|i| p[i] * block[(i, j)]).sum())
            .collect();
        bound *= 1.0 - epsilon;
    }

    Ok(CoupledRun {
        coupling_time,
        tv_curve,
        bound_curve,
        x_path,
        y_path,
    })
}

/// Aggregate of many independent coupled runs under one certificate.
#[derive(Debug, Clone)]
pub struct CouplingReport {
    pub epsilon: f64,
    pub n0: usize,
    /// Mean glue time in blocks; non-coalesced runs enter as `steps + 1`.
    pub mean_coupling_time: f64,
    /// How many replicates never glued within the horizon.
    pub non_coalesced: usize,
    /// Empirical `Prob(T > k)` for `k = 0, …, steps`.
    pub survival: Vec<f64>,
    /// Exact TV curve at block boundaries (identical across replicates).
    pub tv_curve: Vec<f64>,
    /// `(1 − ε)^k` on the same grid.
    pub bound_curve: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

/// Runs `replicates` independent coupled simulations (replicate `r` owns RNG
/// stream `r` under the shared seed) and aggregates glue times into an
/// empirical survival function.
///
/// Runs that never glue are recorded with the sentinel time `steps + 1` and
/// counted in `non_coalesced`.
pub fn coupling_ensemble(
    kernel: &TransitionMatrix,
    certificate: &MinorisationCertificate,
    p0: &[f64],
    steps: usize,
    replicates: usize,
    seed: u64,
) -> Result<CouplingReport, CouplingError> {
    if replicates == 0 {
        return Err(CouplingError::NoReplicates);
    }
    let mut exceed_counts = vec![0usize; steps + 1];
    let mut time_total = 0.0;
    let mut non_coalesced = 0;
    let mut curves = None;
    for replicate in 0..replicates {
        let mut rng = RngStream::new(seed, replicate as u64);
        let run = coupled_run(&mut rng, kernel, certificate, p0, steps)?;
        let time = match run.coupling_time {
            Some(t) => t,
            None => {
                non_coalesced += 1;
                steps + 1
            }
        };
        time_total += time as f64;
        for (k, slot) in exceed_counts.iter_mut().enumerate() {
            if time > k {
                *slot += 1;
            }
        }
        if curves.is_none() {
            curves = Some((run.tv_curve, run.bound_curve));
        }
    }
    let (tv_curve, bound_curve) = curves.expect("at least one replicate ran");
    let survival = exceed_counts
        .iter()
        .map(|&c| c as f64 / replicates as f64)
        .collect();
    Ok(CouplingReport {
        epsilon: certificate.epsilon,
        n0: certificate.n0,
        mean_coupling_time: time_total / replicates as f64,
        non_coalesced,
        survival,
        tv_curve,
        bound_curve,
        replicates,
        seed,
    })
}

/// Partial-region convergence bound estimated from simulated pair chains.
#[derive(Debug, Clone)]
pub struct RosenthalReport {
    pub epsilon: f64,
    pub n0: usize,
    pub region: Vec<usize>,
    /// `min_j [(1 − ε)^j + P̂(z_k < j)]` for each block count `k`.
    pub bound_curve: Vec<f64>,
    /// Exact TV at the same block boundaries, from matrix powers.
    pub exact_tv_curve: Vec<f64>,
    /// Mean number of joint region visits by block `k`.
    pub mean_hits_curve: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
}

/// Estimates the hitting-count convergence bound for a certificate that only
/// covers part of the space.
///
/// The pair chain moves on the `N0`-block kernel. While unglued, whenever
/// both chains sit inside the certified region an `ε`-coin is flipped:
/// success glues them through a shared `γ` draw, failure moves them through
/// independent residual rows. Outside the region they move independently
/// through the plain block kernel. With `z_k` counting the pair's joint
/// visits to the region by block `k` — a coin is flipped at each such visit
/// until the chains glue, and on the event that they never glue every visit
/// is a failed flip — total variation obeys
/// `‖L(X_k) − a‖ ≤ (1 − ε)^j + Prob(z_k < j)` for every `j`; the reported
/// bound sweeps `j` over `0..=k` and keeps the tightest value, with
/// `Prob(z_k < j)` estimated across replicates. Visits are counted after
/// gluing too: a glued pair occupies the diagonal, keeps hitting the region,
/// and has already coalesced, so the inequality only slackens on those paths
/// while the estimated tail `Prob(z_k < j)` keeps shrinking.
///
/// Whether the pair visits the region often enough for the bound to close is
/// itself an empirical matter — `mean_hits_curve` reports the observed visit
/// counts so a flat curve is visible rather than silently fatal.
pub fn rosenthal_bound(
    kernel: &TransitionMatrix,
    certificate: &MinorisationCertificate,
    p0: &[f64],
    steps: usize,
    replicates: usize,
    seed: u64,
) -> Result<RosenthalReport, CouplingError> {
    if replicates == 0 {
        return Err(CouplingError::NoReplicates);
    }
    let n = kernel.n();
    if p0.len() != n {
        return Err(CouplingError::DimensionMismatch(p0.len(), n));
    }
    validate_masses("initial distribution", p0)?;

    let block = kernel.pow(certificate.n0);
    let epsilon = certificate.epsilon;
    let gamma = &certificate.gamma;
    let stationary = kernel.stationary();
    let in_region = {
        let mut flags = vec![false; n];
        for &state in &certificate.region {
            flags[state] = true;
        }
        flags
    };
    let residual_row = |state: usize| -> Vec<f64> {
        if epsilon >= 1.0 {
            return vec![1.0 / n as f64; n];
        }
        (0..n)
            .map(|j| ((block[(state, j)] - epsilon * gamma[j]) / (1.0 - epsilon)).max(0.0))
            .collect()
    };
    let plain_row =
        |state: usize| -> Vec<f64> { (0..n).map(|j| block[(state, j)]).collect() };

    // hit_tallies[k][z] = number of replicates whose pair made exactly z
    // joint region visits by block k (z capped at steps, which visit counts
    // can never exceed).
    let mut hit_tallies = vec![vec![0usize; steps + 2]; steps + 1];
    let mut hits_total = vec![0.0; steps + 1];
    for replicate in 0..replicates {
        let mut rng = RngStream::new(seed, replicate as u64);
        let mut x = categorical(&mut rng, p0);
        let mut y = categorical(&mut rng, stationary);
        let mut glued = false;
        let mut visits = 0usize;
        for k in 0..=steps {
            hit_tallies[k][visits.min(steps + 1)] += 1;
            hits_total[k] += visits as f64;
            if k == steps {
                break;
            }
            if in_region[x] && in_region[y] {
                visits += 1;
            }
            if glued {
                let shared = categorical(&mut rng, &plain_row(x));
                x = shared;
                y = shared;
            } else if in_region[x] && in_region[y] {
                if rng.uniform() < epsilon {
                    let shared = categorical(&mut rng, gamma);
                    x = shared;
                    y = shared;
                    glued = true;
                } else {
                    x = categorical(&mut rng, &residual_row(x));
                    y = categorical(&mut rng, &residual_row(y));
                }
            } else {
                x = categorical(&mut rng, &plain_row(x));
                y = categorical(&mut rng, &plain_row(y));
            }
        }
    }

    let mut exact_tv_curve = Vec::with_capacity(steps + 1);
    let mut p = p0.to_vec();
    for k in 0..=steps {
        let tv: f64 = p
            .iter()
            .zip(stationary)
            .map(|(value, target)| (value - target).abs())
            .sum::<f64>()
            * 0.5;
        exact_tv_curve.push(tv);
        if k < steps {
            p = (0..n)
                .map(|j| (0..n).map(|i| p[i] * block[(i, j)]).sum())
                .collect();
        }
    }

    let bound_curve: Vec<f64> = (0..=steps)
        .map(|k| {
            let mut cumulative = 0usize;
            let mut best = 1.0f64;
            // j = 0 gives (1-ε)^0 + P(z < 0) = 1; walk j upward, accumulating
            // the empirical mass with fewer than j flips.
            for j in 0..=k + 1 {
                let tail_prob = cumulative as f64 / replicates as f64;
                let candidate = (1.0 - epsilon).powi(j as i32) + tail_prob;
                best = best.min(candidate);
                if j <= steps + 1 {
                    cumulative += hit_tallies[k][j.min(steps + 1)];
                }
            }
            best
        })
        .collect();
    let mean_hits_curve = hits_total
        .iter()
        .map(|&total| total / replicates as f64)
        .collect();

    Ok(RosenthalReport {
        epsilon,
        n0: certificate.n0,
        region: certificate.region.clone(),
        bound_curve,
        exact_tv_curve,
        mean_hits_curve,
        replicates,
        seed,
    })
}
