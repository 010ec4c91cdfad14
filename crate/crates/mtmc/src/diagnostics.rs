//! Convergence measurement for live runs: total-variation estimators, the
//! surrogate-drift quantities `δ(m)` and `D_m`, ergodic-average tracking, and
//! detailed-balance verification for frozen surrogate generations.
//!
//! Total variation on a finite or binned space is half the L1 distance, and
//! that is the only distance reported here. Continuous traces are always
//! measured *against a declared binning* — the estimate is meaningless
//! without one, so the binning travels inside the returned [`TvEstimate`]
//! rather than being ambient configuration.
//!
//! The surrogate-drift quantities answer two different questions about a
//! refining approximation:
//!
//! * `δ(m)` — how far is generation `m` from the target right now? Computed
//!   by restricting both to a diagnostic grid and normalizing each, since
//!   neither side's constant is knowable.
//! * `D_m` — how much did the *kernel* move between generations `m` and
//!   `m + 1`? Computed by freezing each generation into its
//!   independent-proposal kernel on the grid and taking the worst row-wise
//!   TV. A rejected step leaves the surrogate untouched and scores exactly
//!   zero.
//!
//! Both are grid proxies: the underlying definitions take suprema over the
//! whole space, which no finite procedure can certify. The grid is the
//! honest, reportable stand-in.

use crate::approx::{ApproxError, ApproximationState};
use crate::core::{CoreError, Point, TargetDensity};
use crate::spectral::{build_kernel, SpectralError, TransitionMatrix};
use nalgebra::DMatrix;
use thiserror::Error;

/// Distributions handed to [`tv_discrete`] must sum to 1 within this.
pub const TV_SUM_TOL: f64 = 1e-9;

/// Errors raised by diagnostics computations.
#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("{what} sums to {sum}, not 1 (tolerance {TV_SUM_TOL})")]
    NotNormalized { what: &'static str, sum: f64 },

    #[error("{what} has invalid mass {value} at index {index}")]
    InvalidMass {
        what: &'static str,
        index: usize,
        value: f64,
    },

    #[error("trace slice is empty")]
    EmptyTrace,

    #[error("binning has dimension {found}, points have dimension {expected}")]
    BinShapeMismatch { expected: usize, found: usize },

    #[error("bin counts, lower and upper edges must have equal nonzero length")]
    EmptyBins,

    #[error("degenerate bin range [{lo}, {hi}] in dimension {dim}")]
    DegenerateBin { dim: usize, lo: f64, hi: f64 },

    #[error("zero bin count in dimension {dim}")]
    ZeroCount { dim: usize },

    #[error("need at least two snapshots to measure kernel drift, got {0}")]
    TooFewSnapshots(usize),

    #[error("diagnostic grid is empty")]
    EmptyGrid,

    #[error("{side} mass is zero everywhere on the diagnostic grid")]
    AllZeroMass { side: &'static str },

    #[error("observable value {value} at trace index {index} exceeds declared bound {bound}")]
    ObservableOutOfBound {
        index: usize,
        value: f64,
        bound: f64,
    },

    #[error("observable bound must be finite and positive, got {0}")]
    InvalidBound(f64),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Approx(#[from] ApproxError),

    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// How a total-variation value was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvScheme {
    /// Exact half-L1 between two finite distributions.
    ExactDiscrete,
    /// Half-L1 between a binned empirical trace and bin-quadrature target
    /// masses.
    HistogramBinned,
}

/// A rectangular binning of a box `[lo, hi]` into a regular grid of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct BinSpec {
    lo: Vec<f64>,
    hi: Vec<f64>,
    counts: Vec<usize>,
}

impl BinSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize>) -> Result<Self, DiagnosticsError> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != counts.len() {
            return Err(DiagnosticsError::EmptyBins);
        }
        for dim in 0..lo.len() {
            if !lo[dim].is_finite() || !hi[dim].is_finite() || lo[dim] >= hi[dim] {
                return Err(DiagnosticsError::DegenerateBin {
                    dim,
                    lo: lo[dim],
                    hi: hi[dim],
                });
            }
            if counts[dim] == 0 {
                return Err(DiagnosticsError::ZeroCount { dim });
            }
        }
        Ok(BinSpec { lo, hi, counts })
    }

    /// Evenly splits `[lo, hi]` on the line into `count` cells.
    pub fn uniform_1d(lo: f64, hi: f64, count: usize) -> Result<Self, DiagnosticsError> {
        BinSpec::new(vec![lo], vec![hi], vec![count])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn total_bins(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Row-major flat index of the cell containing `coords`, or `None` when
    /// the point lies strictly outside the box. Points exactly on the top
    /// edge belong to the last cell.
    pub fn flat_index(&self, coords: &[f64]) -> Option<usize> {
        debug_assert_eq!(coords.len(), self.dim());
        let mut flat = 0usize;
        for dim in 0..self.dim() {
            let x = coords[dim];
            if x < self.lo[dim] || x > self.hi[dim] {
                return None;
            }
            let width = (self.hi[dim] - self.lo[dim]) / self.counts[dim] as f64;
            let cell = (((x - self.lo[dim]) / width) as usize).min(self.counts[dim] - 1);
            flat = flat * self.counts[dim] + cell;
        }
        Some(flat)
    }

    /// The lower corner of a cell given its per-dimension indices.
    fn cell_corner(&self, cell: &[usize]) -> Vec<f64> {
        (0..self.dim())
            .map(|dim| {
                let width = (self.hi[dim] - self.lo[dim]) / self.counts[dim] as f64;
                self.lo[dim] + cell[dim] as f64 * width
            })
            .collect()
    }

    fn cell_widths(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|dim| (self.hi[dim] - self.lo[dim]) / self.counts[dim] as f64)
            .collect()
    }
}

/// A total-variation measurement together with how it was produced.
#[derive(Debug, Clone)]
pub struct TvEstimate {
    /// Half-L1 distance, in `[0, 1]`.
    pub value: f64,
    pub scheme: TvScheme,
    /// The binning used, for histogram estimates.
    pub bins: Option<BinSpec>,
    /// Number of trace samples behind a histogram estimate.
    pub sample_size: Option<usize>,
}

fn validate_distribution(what: &'static str, masses: &[f64]) -> Result<(), DiagnosticsError> {
    let mut sum = 0.0;
    for (index, &value) in masses.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(DiagnosticsError::InvalidMass { what, index, value });
        }
        sum += value;
    }
    if (sum - 1.0).abs() > TV_SUM_TOL {
        return Err(DiagnosticsError::NotNormalized { what, sum });
    }
    Ok(())
}

fn half_l1(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * 0.5
}

/// Exact total variation between two finite distributions: `½ Σ |p − q|`,
/// which coincides with the supremum of `|p(B) − q(B)|` over all subsets.
pub fn tv_discrete(p: &[f64], q: &[f64]) -> Result<TvEstimate, DiagnosticsError> {
    if p.len() != q.len() {
        return Err(DiagnosticsError::DimensionMismatch(p.len(), q.len()));
    }
    validate_distribution("first distribution", p)?;
    validate_distribution("second distribution", q)?;
    Ok(TvEstimate {
        value: half_l1(p, q),
        scheme: TvScheme::ExactDiscrete,
        bins: None,
        sample_size: None,
    })
}

/// Number of midpoint-quadrature subdivisions per dimension used when
/// integrating the target over a bin: finer in low dimension where it is
/// cheap, coarser when the tensor grid would explode.
fn quadrature_subdivisions(dim: usize) -> usize {
    if dim <= 2 {
        8
    } else {
        2
    }
}

/// Bins a trace and measures its total variation against the target's
/// per-bin masses.
///
/// The target is integrated over each cell by a tensor midpoint rule and
/// normalized across the whole box (its constant is unknowable by design).
/// Samples falling strictly outside the box accumulate in a virtual
/// overflow cell whose target mass is zero, so escaping mass is charged in
/// full rather than silently dropped.
pub fn tv_histogram(
    trace: &[Point],
    target: &TargetDensity,
    bins: &BinSpec,
) -> Result<TvEstimate, DiagnosticsError> {
    if trace.is_empty() {
        return Err(DiagnosticsError::EmptyTrace);
    }
    let dim = bins.dim();
    if target.dim() != dim {
        return Err(DiagnosticsError::BinShapeMismatch {
            expected: target.dim(),
            found: dim,
        });
    }
    for point in trace {
        if point.dim() != dim {
            return Err(DiagnosticsError::BinShapeMismatch {
                expected: dim,
                found: point.dim(),
            });
        }
    }

    let total_bins = bins.total_bins();
    let mut empirical = vec![0.0; total_bins];
    let mut overflow = 0usize;
    for point in trace {
        match bins.flat_index(point.coords()) {
            Some(index) => empirical[index] += 1.0,
            None => overflow += 1,
        }
    }
    let n = trace.len() as f64;
    for slot in &mut empirical {
        *slot /= n;
    }
    let overflow_fraction = overflow as f64 / n;

    // Per-bin target mass by tensor midpoint quadrature.
    let subdivisions = quadrature_subdivisions(dim);
    let widths = bins.cell_widths();
    let sub_widths: Vec<f64> = widths.iter().map(|w| w / subdivisions as f64).collect();
    let point_weight: f64 = sub_widths.iter().product();
    let mut target_mass = vec![0.0; total_bins];
    let mut cell = vec![0usize; dim];
    for flat in 0..total_bins {
        let corner = bins.cell_corner(&cell);
        let mut mass = 0.0;
        let mut sub = vec![0usize; dim];
        loop {
            let coords: Vec<f64> = (0..dim)
                .map(|d| corner[d] + (sub[d] as f64 + 0.5) * sub_widths[d])
                .collect();
            mass += target.eval(&Point::new(coords)?)? * point_weight;
            // Odometer increment over the subdivision grid.
            let mut d = dim;
            loop {
                if d == 0 {
                    break;
                }
                d -= 1;
                sub[d] += 1;
                if sub[d] < subdivisions {
                    break;
                }
                sub[d] = 0;
                if d == 0 {
                    d = usize::MAX;
                    break;
                }
            }
            if d == usize::MAX {
                break;
            }
        }
        target_mass[flat] = mass;
        // Odometer increment over the bin grid.
        for d in (0..dim).rev() {
            cell[d] += 1;
            if cell[d] < bins.counts()[d] {
                break;
            }
            cell[d] = 0;
        }
    }
    let total_mass: f64 = target_mass.iter().sum();
    if total_mass <= 0.0 {
        return Err(DiagnosticsError::AllZeroMass { side: "target" });
    }
    for slot in &mut target_mass {
        *slot /= total_mass;
    }

    let value = half_l1(&empirical, &target_mass) + 0.5 * overflow_fraction;
    Ok(TvEstimate {
        value,
        scheme: TvScheme::HistogramBinned,
        bins: Some(bins.clone()),
        sample_size: Some(trace.len()),
    })
}

/// Drift measurements between one surrogate generation and the next.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationGap {
    /// Generation number of the earlier snapshot.
    pub m: usize,
    /// TV between the normalized surrogate and normalized target on the
    /// diagnostic grid.
    pub delta_m: f64,
    /// Worst row-wise TV between the frozen kernels of generations `m` and
    /// `m + 1` on the grid.
    pub d_m: f64,
}

fn normalized_grid_restriction(
    what: &'static str,
    values: Vec<f64>,
) -> Result<Vec<f64>, DiagnosticsError> {
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(DiagnosticsError::AllZeroMass { side: what });
    }
    Ok(values.iter().map(|v| v / total).collect())
}

/// `δ(m)`: total variation between the surrogate and the target, both
/// restricted to the grid and normalized there.
pub fn approximation_gap(
    state: &ApproximationState,
    target: &TargetDensity,
    grid: &[Point],
) -> Result<f64, DiagnosticsError> {
    if grid.is_empty() {
        return Err(DiagnosticsError::EmptyGrid);
    }
    let surrogate = normalized_grid_restriction(
        "approximation",
        grid.iter().map(|x| state.evaluate(x)).collect(),
    )?;
    let mut target_values = Vec::with_capacity(grid.len());
    for point in grid {
        target_values.push(target.eval(point)?);
    }
    let target_restricted = normalized_grid_restriction("target", target_values)?;
    Ok(half_l1(&surrogate, &target_restricted))
}

/// Freezes a surrogate generation into its finite-state kernel on the grid:
/// surrogate values normalized as the stationary mass, uniform independent
/// proposal over the grid states.
///
/// This is the grid proxy for the continuous kernel — documented as such —
/// and carries the detailed-balance guarantee of its construction.
pub fn frozen_grid_kernel(
    state: &ApproximationState,
    grid: &[Point],
) -> Result<TransitionMatrix, DiagnosticsError> {
    if grid.len() < 2 {
        return Err(DiagnosticsError::EmptyGrid);
    }
    let masses = normalized_grid_restriction(
        "approximation",
        grid.iter().map(|x| state.evaluate(x)).collect(),
    )?;
    let uniform = vec![1.0 / grid.len() as f64; grid.len()];
    Ok(build_kernel(&masses, &uniform)?)
}

/// Per-generation drift report over a history of surrogate snapshots: entry
/// `i` pairs snapshot `i` (its `δ`) with snapshot `i + 1` (the kernel drift
/// `D_m` between them). Needs at least two snapshots.
pub fn generation_gaps(
    history: &[ApproximationState],
    target: &TargetDensity,
    grid: &[Point],
) -> Result<Vec<GenerationGap>, DiagnosticsError> {
    if history.len() < 2 {
        return Err(DiagnosticsError::TooFewSnapshots(history.len()));
    }
    if grid.is_empty() {
        return Err(DiagnosticsError::EmptyGrid);
    }
    let mut gaps = Vec::with_capacity(history.len() - 1);
    for pair in history.windows(2) {
        let earlier = &pair[0];
        let later = &pair[1];
        let delta_m = approximation_gap(earlier, target, grid)?;
        let kernel_before = frozen_grid_kernel(earlier, grid)?;
        let kernel_after = frozen_grid_kernel(later, grid)?;
        let mut d_m = 0.0f64;
        for i in 0..grid.len() {
            let row_tv: f64 = (0..grid.len())
                .map(|j| (kernel_before.entry(i, j) - kernel_after.entry(i, j)).abs())
                .sum::<f64>()
                * 0.5;
            d_m = d_m.max(row_tv);
        }
        gaps.push(GenerationGap {
            m: earlier.generation(),
            delta_m,
            d_m,
        });
    }
    Ok(gaps)
}

/// Largest pointwise change of the normalized surrogate between consecutive
/// snapshots, on the grid — one value per snapshot pair.
///
/// A refining surrogate should push these toward zero over a run; that is a
/// statistical tendency to be tested on whole runs, not a per-step
/// guarantee.
pub fn successive_gap_series(
    history: &[ApproximationState],
    grid: &[Point],
) -> Result<Vec<f64>, DiagnosticsError> {
    if history.len() < 2 {
        return Err(DiagnosticsError::TooFewSnapshots(history.len()));
    }
    if grid.is_empty() {
        return Err(DiagnosticsError::EmptyGrid);
    }
    let mut series = Vec::with_capacity(history.len() - 1);
    let mut previous = normalized_grid_restriction(
        "approximation",
        grid.iter().map(|x| history[0].evaluate(x)).collect(),
    )?;
    for state in &history[1..] {
        let current = normalized_grid_restriction(
            "approximation",
            grid.iter().map(|x| state.evaluate(x)).collect(),
        )?;
        let sup_change = previous
            .iter()
            .zip(&current)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        series.push(sup_change);
        previous = current;
    }
    Ok(series)
}

/// Running means `Σ_{k≤n} e(X_k) / n` for `n = 1, …, N`.
///
/// The observable must respect its declared bound everywhere on the trace —
/// a violation is an error, not a warning, because every convergence
/// statement about the average assumes boundedness.
pub fn ergodic_average(
    trace: &[Point],
    observable: impl Fn(&Point) -> f64,
    bound: f64,
) -> Result<Vec<f64>, DiagnosticsError> {
    if trace.is_empty() {
        return Err(DiagnosticsError::EmptyTrace);
    }
    if !bound.is_finite() || bound <= 0.0 {
        return Err(DiagnosticsError::InvalidBound(bound));
    }
    let mut running = Vec::with_capacity(trace.len());
    let mut sum = 0.0;
    for (index, point) in trace.iter().enumerate() {
        let value = observable(point);
        if !value.is_finite() || value.abs() > bound {
            return Err(DiagnosticsError::ObservableOutOfBound {
                index,
                value,
                bound,
            });
        }
        sum += value;
        running.push(sum / (index + 1) as f64);
    }
    Ok(running)
}

/// Maximum detailed-balance violation `max_{i,j} |a(i)P(i,j) − a(j)P(j,i)|`.
///
/// Takes a raw matrix rather than a verified kernel precisely so that
/// *broken* kernels can be measured — the point of the check is to quantify
/// violations, and a constructor that rejects them would make the question
/// unaskable.
pub fn detailed_balance_check(
    kernel: &DMatrix<f64>,
    stationary: &[f64],
) -> Result<f64, DiagnosticsError> {
    let n = stationary.len();
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(DiagnosticsError::DimensionMismatch(kernel.nrows(), n));
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let violation =
                (stationary[i] * kernel[(i, j)] - stationary[j] * kernel[(j, i)]).abs();
            worst = worst.max(violation);
        }
    }
    Ok(worst)
}
