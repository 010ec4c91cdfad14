//! Turns a validated scenario file into runnable library objects.
//!
//! The split from [`crate::config`] is deliberate: config types know how to
//! parse and validate themselves, while this module knows how the sampling
//! library wants targets, proposals, and spaces expressed. Validation has
//! already happened, so construction here treats inconsistencies as bugs.

use mtmc::core::{DiscreteSpace, Point, Proposal, TargetDensity};
use mtmc::diagnostics::BinSpec;

use crate::config::{
    DiagnosticsSpec, ObservableSpec, ProposalSpec, SamplerKindSpec, ScenarioFile, SpaceSpec,
    TargetSpec,
};
use crate::error::ConfigError;

/// Executable form of a scenario: everything the samplers and analyses need.
pub struct BuiltScenario {
    pub name: String,
    pub dim: usize,
    pub target: TargetDensity,
    pub proposal: Proposal,
    pub initial: Point,
    pub sampler_kind: mtmc::samplers::SamplerKind,
    pub steps: usize,
    pub seed: u64,
    pub fallback: f64,
    /// Finite spaces only: the label space and both mass tables normalized
    /// to unit sum, ready for exact TV and spectral work.
    pub finite: Option<FinitePieces>,
}

pub struct FinitePieces {
    pub space: DiscreteSpace,
    pub target_masses: Vec<f64>,
    pub proposal_masses: Vec<f64>,
}

/// Builds the runnable pieces. The only fallible inputs left are numeric
/// corner cases the validator cannot see (they surface as config errors
/// naming the field).
pub fn build(file: &ScenarioFile) -> Result<BuiltScenario, ConfigError> {
    let dim = file.dim();
    let (target, proposal, finite) = match &file.space {
        SpaceSpec::Finite { .. } => {
            let TargetSpec::Discrete { masses } = &file.target else {
                unreachable!("validated: finite spaces carry discrete targets");
            };
            let ProposalSpec::Independent {
                masses: proposal_masses,
            } = &file.proposal
            else {
                unreachable!("validated: finite spaces carry independent proposals");
            };
            let space = DiscreteSpace::new(masses.len())
                .map_err(|e| ConfigError::invalid("space.finite.n", e.to_string()))?;
            let target = space
                .target(masses)
                .map_err(|e| ConfigError::invalid("target.discrete.masses", e.to_string()))?;
            let proposal = space.independent_proposal(proposal_masses).map_err(|e| {
                ConfigError::invalid("proposal.independent.masses", e.to_string())
            })?;
            let finite = FinitePieces {
                space,
                target_masses: normalize(masses),
                proposal_masses: normalize(proposal_masses),
            };
            (target, proposal, Some(finite))
        }
        SpaceSpec::Continuous { .. } => {
            let target = build_continuous_target(&file.target, dim);
            let ProposalSpec::RandomWalk { scale } = &file.proposal else {
                unreachable!("validated: continuous spaces carry random-walk proposals");
            };
            let proposal = Proposal::gaussian_random_walk(dim, *scale)
                .map_err(|e| ConfigError::invalid("proposal.random-walk.scale", e.to_string()))?;
            (target, proposal, None)
        }
    };

    let initial = Point::new(file.sampler.initial.clone())
        .map_err(|e| ConfigError::invalid("sampler.initial", e.to_string()))?;

    Ok(BuiltScenario {
        name: file.name.clone(),
        dim,
        target,
        proposal,
        initial,
        sampler_kind: match file.sampler.kind {
            SamplerKindSpec::Mh => mtmc::samplers::SamplerKind::MetropolisHastings,
            SamplerKindSpec::Mtmc => mtmc::samplers::SamplerKind::MovingTarget,
        },
        steps: file.sampler.steps,
        seed: file.sampler.seed,
        fallback: file.sampler.fallback,
        finite,
    })
}

fn normalize(masses: &[f64]) -> Vec<f64> {
    let total: f64 = masses.iter().sum();
    masses.iter().map(|m| m / total).collect()
}

fn build_continuous_target(spec: &TargetSpec, dim: usize) -> TargetDensity {
    match spec {
        TargetSpec::Gaussian { mean, scale } => {
            let mean = mean.clone();
            let scale = scale.clone();
            TargetDensity::new(dim, move |x: &[f64]| {
                let mut log_mass = 0.0;
                for axis in 0..mean.len() {
                    let z = (x[axis] - mean[axis]) / scale[axis];
                    log_mass -= 0.5 * z * z;
                }
                log_mass.exp()
            })
        }
        TargetSpec::Mixture { bumps } => {
            let bumps = bumps.clone();
            TargetDensity::new(dim, move |x: &[f64]| {
                bumps
                    .iter()
                    .map(|bump| {
                        let mut log_mass = 0.0;
                        let mut scale_product = 1.0;
                        for axis in 0..bump.mean.len() {
                            let z = (x[axis] - bump.mean[axis]) / bump.scale[axis];
                            log_mass -= 0.5 * z * z;
                            scale_product *= bump.scale[axis];
                        }
                        bump.weight * log_mass.exp() / scale_product
                    })
                    .sum()
            })
        }
        TargetSpec::GridTable { points, values } => {
            let points = points.clone();
            let values = values.clone();
            TargetDensity::new(1, move |x: &[f64]| {
                // Nearest table point wins; beyond either end the outermost
                // value extends as a constant, keeping the density positive
                // everywhere so an excursion can always walk back.
                let position = x[0];
                match points.binary_search_by(|p| p.partial_cmp(&position).expect("finite")) {
                    Ok(hit) => values[hit],
                    Err(0) => values[0],
                    Err(end) if end == points.len() => values[values.len() - 1],
                    Err(right) => {
                        let left = right - 1;
                        if position - points[left] <= points[right] - position {
                            values[left]
                        } else {
                            values[right]
                        }
                    }
                }
            })
        }
        TargetSpec::Discrete { .. } => unreachable!("validated: not a continuous family"),
    }
}

/// The diagnostic evaluation grid: configured box grid on continuous
/// spaces, the state embedding itself on finite ones.
pub fn diagnostic_grid(
    file: &ScenarioFile,
    built: &BuiltScenario,
    diagnostics: &DiagnosticsSpec,
) -> Vec<Point> {
    match &built.finite {
        Some(pieces) => pieces.space.points(),
        None => {
            let grid = diagnostics
                .grid
                .as_ref()
                .expect("validated: continuous diagnostics carry a grid");
            let _ = file;
            tensor_grid(&grid.lo, &grid.hi, grid.count)
        }
    }
}

/// Row-major tensor grid with `count` points per axis, endpoints included.
pub fn tensor_grid(lo: &[f64], hi: &[f64], count: usize) -> Vec<Point> {
    let dim = lo.len();
    let mut points = Vec::new();
    let mut index = vec![0usize; dim];
    loop {
        let coords: Vec<f64> = (0..dim)
            .map(|axis| {
                let t = index[axis] as f64 / (count - 1) as f64;
                lo[axis] + t * (hi[axis] - lo[axis])
            })
            .collect();
        points.push(Point::new(coords).expect("grid coordinates are finite"));
        let mut axis = dim;
        loop {
            if axis == 0 {
                return points;
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < count {
                break;
            }
            index[axis] = 0;
        }
    }
}

/// Histogram bins over the declared support box.
pub fn histogram_bins(file: &ScenarioFile, bins: usize) -> Result<BinSpec, ConfigError> {
    let SpaceSpec::Continuous { dim, support } = &file.space else {
        unreachable!("validated: histogram bins only requested on continuous spaces");
    };
    let lo: Vec<f64> = support.iter().map(|pair| pair[0]).collect();
    let hi: Vec<f64> = support.iter().map(|pair| pair[1]).collect();
    BinSpec::new(lo, hi, vec![bins; *dim])
        .map_err(|e| ConfigError::invalid("diagnostics.bins", e.to_string()))
}

/// The configured observable as a closure plus its declared bound.
pub fn observable_fn(spec: &ObservableSpec) -> (impl Fn(&Point) -> f64 + '_, f64) {
    let bound = match spec {
        ObservableSpec::Coordinate { bound, .. } => *bound,
        ObservableSpec::IndicatorLeq { .. } | ObservableSpec::IndicatorGeq { .. } => 1.0,
    };
    let f = move |point: &Point| -> f64 {
        match spec {
            ObservableSpec::Coordinate { index, .. } => point.coords()[*index],
            ObservableSpec::IndicatorLeq { threshold } => {
                (point.coords()[0] <= *threshold) as u64 as f64
            }
            ObservableSpec::IndicatorGeq { threshold } => {
                (point.coords()[0] >= *threshold) as u64 as f64
            }
        }
    };
    (f, bound)
}
