//! State spaces, targets, proposals, and the randomness contract.
//!
//! Everything downstream builds on four ideas fixed here:
//!
//! * densities are *unnormalized* — both acceptance ratios are ratios, so no
//!   normalization constant is ever computed;
//! * a chain never stands on a zero-density point — the ratio primitive
//!   rejects that state of affairs loudly instead of inventing 0/0;
//! * randomness flows through [`RngStream`], keyed by `(seed, stream)`: the
//!   same key always reproduces the same draw sequence bit for bit;
//! * acceptance uses the strict comparison `u < alpha` with exactly one
//!   uniform draw per decision.

use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Absolute slack used when checking whether a probability sits inside
/// `[0, 1]`; pure floating-point edge noise is clamped rather than rejected.
pub const PROBABILITY_EDGE_TOL: f64 = 1e-12;

/// Errors raised by the primitives in this module.
#[derive(Debug, Error)]
pub enum CoreError {
    /// The Metropolis ratio needs a positive current density and a positive
    /// forward proposal density; anything else is a protocol violation by
    /// the caller (the chain must never stand on a zero-density point).
    #[error(
        "undefined acceptance ratio: p_current = {p_current}, q_fwd = {q_fwd} \
         (both must be positive)"
    )]
    UndefinedAcceptanceRatio { p_current: f64, q_fwd: f64 },

    /// An acceptance probability outside `[0, 1]` (beyond edge tolerance).
    #[error("acceptance probability {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    /// A point coordinate that is NaN or infinite.
    #[error("non-finite coordinate {value} at position {position}")]
    NonFiniteCoordinate { value: f64, position: usize },

    /// A point with no coordinates at all.
    #[error("a point needs at least one coordinate")]
    EmptyPoint,

    /// A point whose dimension does not match the object it is used with.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A density evaluation produced a negative, NaN, or infinite value.
    #[error("invalid density value {0} (must be finite and nonnegative)")]
    InvalidDensity(f64),

    /// A proposal scale or similar strictly-positive parameter was not.
    #[error("parameter {name} must be strictly positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    /// A discrete space with fewer than two states.
    #[error("a discrete space needs at least two states, got {0}")]
    DegenerateSpace(usize),

    /// A state label outside `1..=n`, or a point that encodes no label.
    #[error("state label {label} outside 1..={n}")]
    LabelOutOfRange { label: usize, n: usize },

    /// Discrete masses that are negative or sum to zero.
    #[error("invalid mass {value} at state {index}")]
    InvalidMass { index: usize, value: f64 },
}

/// A location in model space: a fixed-dimension vector of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty coordinate lists and non-finite
    /// entries (NaN or ±∞ would silently poison every distance computation
    /// downstream).
    pub fn new(coords: Vec<f64>) -> Result<Self, CoreError> {
        if coords.is_empty() {
            return Err(CoreError::EmptyPoint);
        }
        for (position, &value) in coords.iter().enumerate() {
            if !value.is_finite() {
                return Err(CoreError::NonFiniteCoordinate { value, position });
            }
        }
        Ok(Point { coords })
    }

    /// Convenience constructor for the common 1-D case.
    pub fn one_d(x: f64) -> Result<Self, CoreError> {
        Point::new(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Squared Euclidean distance. Kept squared: every comparison downstream
    /// is order-based, and the square root would only cost precision.
    pub fn squared_distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| {
                let d = a - b;
                d * d
            })
            .sum()
    }

    /// The exact bit pattern of the coordinates. Two points compare equal
    /// under this key iff they are the same point for reproducibility
    /// purposes (distinguishes nothing that `==` would conflate except
    /// `-0.0` vs `0.0`, which we deliberately treat as different inputs).
    pub fn bit_pattern(&self) -> Vec<u64> {
        self.coords.iter().map(|c| c.to_bits()).collect()
    }
}

/// An unnormalized target density: the expensive oracle the samplers try to
/// touch as rarely as possible.
///
/// The evaluation closure sees raw coordinates and must be deterministic —
/// the archive in [`crate::approx`] treats a re-evaluation that disagrees
/// with a stored value as a hard error. `cost_per_eval` is an artificial
/// work-unit price per call, accumulated by the samplers' ledger so that
/// "how expensive was this run" has a model-independent answer.
pub struct TargetDensity {
    dim: usize,
    cost_per_eval: f64,
    eval_fn: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl TargetDensity {
    /// Wraps an evaluation closure over `dim`-dimensional points with the
    /// default cost of one work unit per evaluation.
    pub fn new<F>(dim: usize, eval_fn: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        TargetDensity {
            dim,
            cost_per_eval: 1.0,
            eval_fn: Box::new(eval_fn),
        }
    }

    /// Sets the artificial per-evaluation cost in work units.
    pub fn with_cost(mut self, cost_per_eval: f64) -> Self {
        self.cost_per_eval = cost_per_eval;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cost_per_eval(&self) -> f64 {
        self.cost_per_eval
    }

    /// Evaluates the unnormalized density, checking the contract: the point
    /// must match the declared dimension and the value must be finite and
    /// nonnegative.
    pub fn eval(&self, x: &Point) -> Result<f64, CoreError> {
        if x.dim() != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let value = (self.eval_fn)(x.coords());
        if !value.is_finite() || value < 0.0 {
            return Err(CoreError::InvalidDensity(value));
        }
        Ok(value)
    }
}

impl fmt::Debug for TargetDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TargetDensity")
            .field("dim", &self.dim)
            .field("cost_per_eval", &self.cost_per_eval)
            .finish_non_exhaustive()
    }
}

/// How a proposal kernel relates to the current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProposalKind {
    /// `Q(x, y) = Q(y, x)`: the proposal densities cancel in the ratio.
    SymmetricRandomWalk,
    /// `Q(x, y)` depends on `y` only.
    Independent,
    /// No structural guarantee; both densities enter the ratio.
    General,
}

/// A proposal kernel: a sampler `(rng, current) -> candidate` and its density
/// `Q(from, to)`.
///
/// The density must be strictly positive wherever the sampler can actually
/// propose, so every region of the space stays reachable and the backward
/// density in the acceptance ratio is well defined.
pub struct Proposal {
    kind: ProposalKind,
    dim: usize,
    sample_fn: Box<dyn Fn(&mut RngStream, &Point) -> Point + Send + Sync>,
    density_fn: Box<dyn Fn(&Point, &Point) -> f64 + Send + Sync>,
}

impl Proposal {
    /// Assembles a proposal from raw parts. Prefer the named constructors
    /// below; this is the escape hatch for custom kernels.
    pub fn from_parts<S, D>(kind: ProposalKind, dim: usize, sample_fn: S, density_fn: D) -> Self
    where
        S: Fn(&mut RngStream, &Point) -> Point + Send + Sync + 'static,
        D: Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    {
        Proposal {
            kind,
            dim,
            sample_fn: Box::new(sample_fn),
            density_fn: Box::new(density_fn),
        }
    }

    /// Isotropic Gaussian random walk with the given step scale: the
    /// workhorse symmetric proposal on continuous spaces.
    pub fn gaussian_random_walk(dim: usize, scale: f64) -> Result<Self, CoreError> {
        if dim == 0 {
            return Err(CoreError::EmptyPoint);
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(CoreError::NonPositiveParameter {
                name: "scale",
                value: scale,
            });
        }
        let sample_scale = scale;
        let sample_fn = move |rng: &mut RngStream, current: &Point| {
            let coords = current
                .coords()
                .iter()
                .map(|&c| c + sample_scale * rng.standard_normal())
                .collect::<Vec<_>>();
            // Finite + finite*normal stays finite for all practical draws.
            Point::new(coords).expect("random-walk step produced a non-finite coordinate")
        };
        let density_scale = scale;
        let density_fn = move |from: &Point, to: &Point| {
            let norm = 1.0 / (density_scale * (2.0 * std::f64::consts::PI).sqrt());
            from.coords()
                .iter()
                .zip(to.coords())
                .map(|(a, b)| {
                    let z = (b - a) / density_scale;
                    norm * (-0.5 * z * z).exp()
                })
                .product()
        };
        Ok(Proposal::from_parts(
            ProposalKind::SymmetricRandomWalk,
            dim,
            sample_fn,
            density_fn,
        ))
    }

    pub fn kind(&self) -> ProposalKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Draws a candidate given the current point.
    pub fn sample(&self, rng: &mut RngStream, current: &Point) -> Point {
        (self.sample_fn)(rng, current)
    }

    /// Evaluates `Q(from, to)`.
    pub fn density(&self, from: &Point, to: &Point) -> f64 {
        (self.density_fn)(from, to)
    }
}

impl fmt::Debug for Proposal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Proposal")
            .field("kind", &self.kind)
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

/// A finite state space with states labelled `1..=n`.
///
/// States are embedded as 1-D points carrying the label as an exact integer
/// coordinate, so the same samplers run unchanged on discrete and continuous
/// problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteSpace {
    n: usize,
}

impl DiscreteSpace {
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if n < 2 {
            return Err(CoreError::DegenerateSpace(n));
        }
        Ok(DiscreteSpace { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The point embedding of a state label.
    pub fn point(&self, label: usize) -> Result<Point, CoreError> {
        if label < 1 || label > self.n {
            return Err(CoreError::LabelOutOfRange { label, n: self.n });
        }
        Point::one_d(label as f64)
    }

    /// All states in label order.
    pub fn points(&self) -> Vec<Point> {
        (1..=self.n)
            .map(|label| Point::one_d(label as f64).expect("labels are finite"))
            .collect()
    }

    /// Recovers the label from an embedded point. The coordinate must be an
    /// exact in-range integer — discrete chains never produce anything else.
    pub fn label(&self, point: &Point) -> Result<usize, CoreError> {
        if point.dim() != 1 {
            return Err(CoreError::DimensionMismatch {
                expected: 1,
                found: point.dim(),
            });
        }
        let c = point.coords()[0];
        let rounded = c.round();
        if c != rounded || rounded < 1.0 || rounded > self.n as f64 {
            return Err(CoreError::LabelOutOfRange {
                label: rounded.max(0.0) as usize,
                n: self.n,
            });
        }
        Ok(rounded as usize)
    }

    /// A table-lookup target over the state labels. Masses may be
    /// unnormalized; they must be finite, nonnegative, and not all zero.
    pub fn target(&self, masses: &[f64]) -> Result<TargetDensity, CoreError> {
        let table = self.validated_masses(masses, false)?;
        let n = self.n;
        Ok(TargetDensity::new(1, move |coords| {
            let c = coords[0];
            if c == c.round() && c >= 1.0 && c <= n as f64 {
                table[c as usize - 1]
            } else {
                0.0
            }
        }))
    }

    /// An independent proposal drawing labels from the given masses
    /// (normalized internally). Sampling consumes exactly one uniform draw.
    pub fn independent_proposal(&self, masses: &[f64]) -> Result<Proposal, CoreError> {
        let weights = self.validated_masses(masses, true)?;
        let total: f64 = weights.iter().sum();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let n = self.n;

        let sample_probs = probabilities.clone();
        let sample_fn = move |rng: &mut RngStream, _current: &Point| {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut chosen = sample_probs.len() - 1;
            for (i, &p) in sample_probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            Point::one_d((chosen + 1) as f64).expect("labels are finite")
        };

        let density_probs = probabilities;
        let density_fn = move |_from: &Point, to: &Point| {
            let c = to.coords()[0];
            if to.dim() == 1 && c == c.round() && c >= 1.0 && c <= n as f64 {
                density_probs[c as usize - 1]
            } else {
                0.0
            }
        };

        Ok(Proposal::from_parts(
            ProposalKind::Independent,
            1,
            sample_fn,
            density_fn,
        ))
    }

    fn validated_masses(&self, masses: &[f64], strict: bool) -> Result<Vec<f64>, CoreError> {
        if masses.len() != self.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                found: masses.len(),
            });
        }
        let mut any_positive = false;
        for (index, &value) in masses.iter().enumerate() {
            if !value.is_finite() || value < 0.0 || (strict && value == 0.0) {
                return Err(CoreError::InvalidMass { index, value });
            }
            any_positive |= value > 0.0;
        }
        if !any_positive {
            return Err(CoreError::InvalidMass {
                index: 0,
                value: 0.0,
            });
        }
        Ok(masses.to_vec())
    }
}

/// A reproducible randomness source keyed by `(seed, stream)`.
///
/// Identical keys yield bit-identical draw sequences across runs and
/// platforms. Distinct stream ids under one seed give statistically
/// independent streams, which is how replicated experiments (chains,
/// coupling replicates) stay both parallelizable and reproducible.
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// One uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// One standard-normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

impl fmt::Debug for RngStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RngStream")
            .field("seed", &self.seed)
            .field("stream", &self.stream)
            .finish_non_exhaustive()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// The Metropolis–Hastings acceptance probability
/// `min(1, (p_candidate / p_current) · (q_bwd / q_fwd))`.
///
/// Both the baseline sampler (with true densities) and the moving-target
/// sampler (with surrogate values) funnel through this one function, so the
/// two algorithms are guaranteed to agree bit for bit whenever their inputs
/// agree. Scale-invariant in the target: multiplying both density arguments
/// by any positive constant leaves the result unchanged, which is why
/// normalization constants never need to exist at runtime.
pub fn accept_ratio_mh(
    p_current: f64,
    p_candidate: f64,
    q_fwd: f64,
    q_bwd: f64,
) -> Result<f64, CoreError> {
    for value in [p_current, p_candidate, q_fwd, q_bwd] {
        if value.is_nan() || value < 0.0 || value == f64::INFINITY {
            return Err(CoreError::InvalidDensity(value));
        }
    }
    if p_current == 0.0 || q_fwd == 0.0 {
        return Err(CoreError::UndefinedAcceptanceRatio { p_current, q_fwd });
    }
    let ratio = (p_candidate / p_current) * (q_bwd / q_fwd);
    Ok(ratio.min(1.0))
}

/// Accept/reject with probability `alpha`, consuming exactly one uniform
/// draw and using the strict comparison `u < alpha`.
///
/// `alpha` may stray outside `[0, 1]` by at most [`PROBABILITY_EDGE_TOL`]
/// (floating-point edge noise) and is clamped; anything further out is an
/// error.
pub fn bernoulli_accept(rng: &mut RngStream, alpha: f64) -> Result<bool, CoreError> {
    if alpha.is_nan() || alpha < -PROBABILITY_EDGE_TOL || alpha > 1.0 + PROBABILITY_EDGE_TOL {
        return Err(CoreError::AlphaOutOfRange(alpha));
    }
    let alpha = alpha.clamp(0.0, 1.0);
    let u = rng.uniform();
    Ok(u < alpha)
}
