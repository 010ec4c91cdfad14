//! Exact finite-state analysis of the frozen-surrogate kernel with an
//! independent proposal.
//!
//! Fix a surrogate distribution `a` over `n` states and an independent
//! proposal `Q`. The Metropolis kernel built from them,
//!
//! ```text
//! P(i, j) = Q(j) · min(1, w_j / w_i)          for j ≠ i,
//! P(i, i) = Q(i) + Σ_z Q(z) · max(0, 1 − w_z / w_i),
//! ```
//!
//! is governed entirely by the importance ratios `w_k = a(k) / Q(k)`. After
//! sorting states by descending `w`, the kernel splits into an upper
//! triangular part plus a rank-one part, which yields every eigenvalue and
//! left eigenvector in closed form:
//!
//! * `λ_0 = 1`, and for `k ≥ 1` (sorted indexing)
//!   `λ_k = Σ_{d ≥ k} (Q_d − a_d / w_{k−1})` — which is precisely the
//!   probability that a chain sitting at sorted state `k − 1` rejects its
//!   next proposal;
//! * `v_0 = a`, and for `k ≥ 1` the vector `v_k` has `k − 1` leading zeros,
//!   then `−Σ_{d ≥ k} a_d`, then the tail of `a` — each satisfying
//!   `v_k P = λ_k v_k` and `v_k · 1 = 0`.
//!
//! Expanding an initial distribution as `p_0 = Σ_k θ_k v_k` turns
//! total-variation decay into a one-line bound:
//! `‖p_0 Pᴺ − a‖ ≤ (Σ_{k≥1} |θ_k| · ½‖v_k‖₁) · λ₁ᴺ`.
//!
//! Everything here is cross-checked at construction time against a dense
//! numeric eigendecomposition (via the symmetrization that reversibility
//! affords), so the closed forms never drift silently out of agreement with
//! the matrix they describe.

use nalgebra::DMatrix;
use thiserror::Error;

/// Tolerance for "this vector is a probability distribution": sums must be
/// within this of 1 and entries nonnegative.
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-12;

/// Row-stochasticity and reversibility are enforced to this absolute
/// tolerance when a [`TransitionMatrix`] is assembled.
pub const KERNEL_TOL: f64 = 1e-12;

/// Importance ratios closer than this (relatively) are treated as tied.
pub const RATIO_TIE_TOL: f64 = 1e-9;

/// Errors raised by kernel construction and spectral analysis.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("need at least two states, got {0}")]
    TooFewStates(usize),

    #[error("zero entry at state {index} in {what}: importance ratios undefined")]
    ZeroEntry { what: &'static str, index: usize },

    #[error("negative or non-finite entry {value} at state {index} in {what}")]
    InvalidEntry {
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

    #[error(
        "non-diagonalisable case out of scope: importance ratios of states \
         {first} and {second} are tied ({w_first} vs {w_second})"
    )]
    TiedRatios {
        first: usize,
        second: usize,
        w_first: f64,
        w_second: f64,
    },

    #[error("matrix row {row} sums to {sum}, not 1 within {tol}")]
    NotRowStochastic { row: usize, sum: f64, tol: f64 },

    #[error(
        "kernel is not reversible: |a({i})P({i},{j}) - a({j})P({j},{i})| = {violation}"
    )]
    NotReversible { i: usize, j: usize, violation: f64 },
}

fn validate_distribution(
    what: &'static str,
    masses: &[f64],
    require_positive: bool,
) -> Result<(), SpectralError> {
    if masses.len() < 2 {
        return Err(SpectralError::TooFewStates(masses.len()));
    }
    let mut sum = 0.0;
    for (index, &value) in masses.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(SpectralError::InvalidEntry { what, index, value });
        }
        if require_positive && value == 0.0 {
            return Err(SpectralError::ZeroEntry { what, index });
        }
        sum += value;
    }
    if (sum - 1.0).abs() > DISTRIBUTION_SUM_TOL {
        return Err(SpectralError::NotNormalized {
            what,
            sum,
            tol: DISTRIBUTION_SUM_TOL,
        });
    }
    Ok(())
}

/// The importance ratios `w_k = a(k) / Q(k)` together with the permutation
/// that sorts states by descending ratio.
///
/// All spectral closed forms are stated in the sorted frame; the recorded
/// permutation is what maps results back to the caller's original state
/// labels.
#[derive(Debug, Clone)]
pub struct ImportanceProfile {
    /// Ratios in sorted (descending) order.
    pub weights: Vec<f64>,
    /// `permutation[k]` = original index of the state at sorted position `k`.
    pub permutation: Vec<usize>,
    /// Surrogate masses in sorted order.
    pub target_sorted: Vec<f64>,
    /// Proposal masses in sorted order.
    pub proposal_sorted: Vec<f64>,
}

impl ImportanceProfile {
    /// Computes and sorts the importance ratios. Both inputs must be strictly
    /// positive distributions of the same length.
    pub fn new(target: &[f64], proposal: &[f64]) -> Result<Self, SpectralError> {
        if target.len() != proposal.len() {
            return Err(SpectralError::DimensionMismatch(
                target.len(),
                proposal.len(),
            ));
        }
        validate_distribution("target distribution", target, true)?;
        validate_distribution("proposal distribution", proposal, true)?;
        let weights_original: Vec<f64> = target
            .iter()
            .zip(proposal)
            .map(|(a, q)| a / q)
            .collect();
        let mut permutation: Vec<usize> = (0..target.len()).collect();
        permutation.sort_by(|&i, &j| {
            weights_original[j]
                .partial_cmp(&weights_original[i])
                .expect("ratios of positive finite masses are comparable")
                .then(i.cmp(&j))
        });
        let weights = permutation.iter().map(|&i| weights_original[i]).collect();
        let target_sorted = permutation.iter().map(|&i| target[i]).collect();
        let proposal_sorted = permutation.iter().map(|&i| proposal[i]).collect();
        Ok(ImportanceProfile {
            weights,
            permutation,
            target_sorted,
            proposal_sorted,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Reorders a sorted-frame vector back into original state labels.
    pub fn to_original_order(&self, sorted_values: &[f64]) -> Vec<f64> {
        let mut original = vec![0.0; sorted_values.len()];
        for (k, &index) in self.permutation.iter().enumerate() {
            original[index] = sorted_values[k];
        }
        original
    }

    /// Reorders a vector given in original state labels into the sorted frame.
    pub fn to_sorted_order(&self, original_values: &[f64]) -> Vec<f64> {
        self.permutation
            .iter()
            .map(|&index| original_values[index])
            .collect()
    }
}

/// A dense row-stochastic kernel that is reversible with respect to its
/// recorded stationary distribution. Both properties are verified at
/// construction to [`KERNEL_TOL`].
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    entries: DMatrix<f64>,
    stationary: Vec<f64>,
}

impl TransitionMatrix {
    pub fn new(entries: DMatrix<f64>, stationary: Vec<f64>) -> Result<Self, SpectralError> {
        let n = stationary.len();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(SpectralError::DimensionMismatch(entries.nrows(), n));
        }
        validate_distribution("stationary distribution", &stationary, false)?;
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let value = entries[(i, j)];
                if !value.is_finite() || value < 0.0 {
                    return Err(SpectralError::InvalidEntry {
                        what: "transition matrix",
                        index: i * n + j,
                        value,
                    });
                }
                sum += value;
            }
            if (sum - 1.0).abs() > KERNEL_TOL {
                return Err(SpectralError::NotRowStochastic {
                    row: i,
                    sum,
                    tol: KERNEL_TOL,
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let violation =
                    (stationary[i] * entries[(i, j)] - stationary[j] * entries[(j, i)]).abs();
                if violation > KERNEL_TOL {
                    return Err(SpectralError::NotReversible { i, j, violation });
                }
            }
        }
        Ok(TransitionMatrix {
            entries,
            stationary,
        })
    }

    pub fn n(&self) -> usize {
        self.stationary.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// `P^k` by repeated multiplication (`k = 0` gives the identity).
    pub fn pow(&self, k: usize) -> DMatrix<f64> {
        let n = self.n();
        let mut result = DMatrix::<f64>::identity(n, n);
        for _ in 0..k {
            result = &result * &self.entries;
        }
        result
    }

    /// One step of distribution propagation: `p ↦ p P`.
    pub fn propagate(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(p.len(), n, "distribution length does not match kernel size");
        (0..n)
            .map(|j| (0..n).map(|i| p[i] * self.entries[(i, j)]).sum())
            .collect()
    }
}

/// Builds the Metropolis kernel for surrogate `target` under an independent
/// proposal with masses `proposal`, in the caller's state order.
///
/// Both inputs must be strictly positive (a zero mass makes some importance
/// ratio undefined) and normalized. The result is row-stochastic and
/// reversible with respect to `target` by construction; both facts are
/// re-verified numerically on the way out.
pub fn build_kernel(target: &[f64], proposal: &[f64]) -> Result<TransitionMatrix, SpectralError> {
    if target.len() != proposal.len() {
        return Err(SpectralError::DimensionMismatch(
            target.len(),
            proposal.len(),
        ));
    }
    validate_distribution("target distribution", target, true)?;
    validate_distribution("proposal distribution", proposal, true)?;
    let n = target.len();
    let w: Vec<f64> = target.iter().zip(proposal).map(|(a, q)| a / q).collect();
    let mut entries = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        // Off-diagonal: propose j, accept with min(1, w_j / w_i).
        for j in 0..n {
            if j != i {
                entries[(i, j)] = proposal[j] * (w[j] / w[i]).min(1.0);
            }
        }
        // Diagonal: propose i itself, plus every rejected proposal.
        let rejected: f64 = (0..n)
            .filter(|&z| z != i)
            .map(|z| proposal[z] * (1.0 - w[z] / w[i]).max(0.0))
            .sum();
        entries[(i, i)] = proposal[i] + rejected;
    }
    TransitionMatrix::new(entries, target.to_vec())
}

/// Closed-form eigenpairs of the sorted kernel plus their numeric
/// cross-check. Produced by [`closed_form_spectrum`].
///
/// Everything indexed by `k` lives in the sorted frame; use
/// `profile.to_original_order` / the recorded permutation to report in the
/// caller's labels.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub profile: ImportanceProfile,
    /// The kernel in sorted order (states by descending importance ratio).
    pub kernel: TransitionMatrix,
    /// `λ_0 = 1 ≥ λ_1 ≥ … ≥ λ_{n−1} ≥ 0`.
    pub lambdas: Vec<f64>,
    /// Left eigenvectors; `vectors[k] P = lambdas[k] · vectors[k]`.
    pub vectors: Vec<Vec<f64>>,
    /// Expansion coefficients of an initial distribution, once one has been
    /// supplied via [`SpectralReport::with_initial`].
    pub thetas: Option<Vec<f64>>,
    /// Numeric eigenvalues (dense solver), sorted descending.
    pub oracle_lambdas: Vec<f64>,
    /// `max_k ‖v_k P − λ_k v_k‖_∞` against the built kernel.
    pub max_residual: f64,
}

impl SpectralReport {
    /// Largest absolute disagreement between the closed-form and numeric
    /// eigenvalue lists (both sorted descending).
    pub fn oracle_gap(&self) -> f64 {
        let mut sorted_closed = self.lambdas.clone();
        sorted_closed.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
        sorted_closed
            .iter()
            .zip(&self.oracle_lambdas)
            .map(|(c, o)| (c - o).abs())
            .fold(0.0, f64::max)
    }

    /// Convergence rate: the largest subdominant eigenvalue.
    pub fn lambda_1(&self) -> f64 {
        self.lambdas[1]
    }

    /// Solves `p0 = Σ_k θ_k v_k` for the coefficients, with `p0` given in
    /// original state labels.
    ///
    /// The eigenvector family is triangular after the leading entry, so the
    /// system solves by forward substitution: `θ_0 = 1` always (every `v_k`
    /// with `k ≥ 1` sums to zero while `p0` and `v_0 = a` sum to one), and
    /// each subsequent coordinate pins down one more coefficient.
    pub fn expansion_coefficients(&self, p0: &[f64]) -> Result<Vec<f64>, SpectralError> {
        let n = self.profile.n();
        if p0.len() != n {
            return Err(SpectralError::DimensionMismatch(p0.len(), n));
        }
        validate_distribution("initial distribution", p0, false)?;
        let p0_sorted = self.profile.to_sorted_order(p0);
        let mut thetas = vec![0.0; n];
        thetas[0] = 1.0;
        for i in 0..n - 1 {
            let explained: f64 = (0..=i).map(|k| thetas[k] * self.vectors[k][i]).sum();
            let pivot = self.vectors[i + 1][i];
            thetas[i + 1] = (p0_sorted[i] - explained) / pivot;
        }
        Ok(thetas)
    }

    /// Returns the report with `thetas` filled in for the given initial
    /// distribution (original state labels).
    pub fn with_initial(mut self, p0: &[f64]) -> Result<Self, SpectralError> {
        self.thetas = Some(self.expansion_coefficients(p0)?);
        Ok(self)
    }
}

fn row_times_matrix(v: &[f64], m: &DMatrix<f64>) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|j| (0..n).map(|i| v[i] * m[(i, j)]).sum())
        .collect()
}

/// Derives the complete spectrum of the independent-proposal kernel in
/// closed form and cross-checks it numerically.
///
/// Ties in the importance ratios (relative gap below [`RATIO_TIE_TOL`])
/// defeat the triangularization and are rejected — except the fully
/// degenerate case where *all* ratios coincide (surrogate equals proposal),
/// where the kernel is rank one plus rejection-free and the closed forms
/// remain exact with every subdominant eigenvalue zero.
pub fn closed_form_spectrum(
    target: &[f64],
    proposal: &[f64],
) -> Result<SpectralReport, SpectralError> {
    let profile = ImportanceProfile::new(target, proposal)?;
    let n = profile.n();
    let w = &profile.weights;

    let tied = |x: f64, y: f64| (x - y).abs() <= RATIO_TIE_TOL * x.abs().max(y.abs());
    let tie_flags: Vec<bool> = (0..n - 1).map(|k| tied(w[k], w[k + 1])).collect();
    let all_tied = tie_flags.iter().all(|&t| t);
    if !all_tied {
        if let Some(k) = tie_flags.iter().position(|&t| t) {
            return Err(SpectralError::TiedRatios {
                first: profile.permutation[k],
                second: profile.permutation[k + 1],
                w_first: w[k],
                w_second: w[k + 1],
            });
        }
    }

    let a = &profile.target_sorted;
    let q = &profile.proposal_sorted;
    let kernel = build_kernel(a, q)?;

    // λ_k = Σ_{d ≥ k−1} (Q_d − a_d / w_{k−1}) in sorted positions; the
    // d = k − 1 summand is identically zero and is omitted so it cannot
    // inject rounding noise. Equivalently, λ_k is the probability that a
    // chain sitting at sorted state k − 1 rejects its next proposal.
    let mut lambdas = vec![0.0; n];
    lambdas[0] = 1.0;
    for k in 1..n {
        lambdas[k] = (k..n).map(|d| q[d] - a[d] / w[k - 1]).sum();
    }

    // v_0 = a; for k ≥ 1, v_k has k − 1 leading zeros, then −Σ_{d ≥ k} a_d
    // (tail mass), then the tail of a itself.
    let mut vectors = Vec::with_capacity(n);
    vectors.push(a.clone());
    for k in 1..n {
        let mut v = vec![0.0; n];
        let tail: f64 = a[k..].iter().sum();
        v[k - 1] = -tail;
        v[k..].copy_from_slice(&a[k..]);
        vectors.push(v);
    }

    let max_residual = vectors
        .iter()
        .zip(&lambdas)
        .map(|(v, &lambda)| {
            let vp = row_times_matrix(v, kernel.matrix());
            vp.iter()
                .zip(v)
                .map(|(x, y)| (x - lambda * y).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    // Numeric oracle: reversibility makes D^{1/2} P D^{-1/2} symmetric with
    // the same spectrum, so a symmetric eigensolver is exact enough to
    // catch any drift in the closed forms.
    let sqrt_a: Vec<f64> = a.iter().map(|x| x.sqrt()).collect();
    let mut symmetric = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            symmetric[(i, j)] = sqrt_a[i] * kernel.entry(i, j) / sqrt_a[j];
        }
    }
    let symmetrized = (&symmetric + symmetric.transpose()) * 0.5;
    let mut oracle_lambdas: Vec<f64> = symmetrized
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    oracle_lambdas.sort_by(|x, y| y.partial_cmp(x).expect("eigenvalues are finite"));

    Ok(SpectralReport {
        profile,
        kernel,
        lambdas,
        vectors,
        thetas: None,
        oracle_lambdas,
        max_residual,
    })
}

/// The total-variation decay bound after `n_steps`, next to the exact
/// distance it bounds.
///
/// * `bound = (Σ_{k≥1} |θ_k| · ½‖v_k‖₁) · λ₁^N` — the vector magnitudes are
///   folded in as half-L1 norms, matching how total variation measures
///   discrete distributions, so the bound dominates the exact distance for
///   every `N` (the coefficient is a triangle inequality at `N = 0`, and
///   each mode decays no slower than `λ₁`).
/// * `exact_tv = ½ ‖p0 Pᴺ − a‖₁`, computed by repeated propagation.
///
/// `p0` is given in original state labels.
pub fn tv_decay_bound(
    report: &SpectralReport,
    p0: &[f64],
    n_steps: usize,
) -> Result<(f64, f64), SpectralError> {
    let (bounds, exact) = tv_decay_curves(report, p0, n_steps)?;
    Ok((bounds[n_steps], exact[n_steps]))
}

/// The full decay curves for `N = 0, 1, …, n_max`: `(bound_curve, exact_tv_curve)`.
pub fn tv_decay_curves(
    report: &SpectralReport,
    p0: &[f64],
    n_max: usize,
) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let thetas = report.expansion_coefficients(p0)?;
    let amplitude: f64 = (1..report.profile.n())
        .map(|k| {
            let half_l1: f64 = report.vectors[k].iter().map(|x| x.abs()).sum::<f64>() * 0.5;
            thetas[k].abs() * half_l1
        })
        .sum();
    let lambda_1 = report.lambda_1();
    let stationary = &report.profile.target_sorted;

    let mut bound_curve = Vec::with_capacity(n_max + 1);
    let mut exact_curve = Vec::with_capacity(n_max + 1);
    let mut p = report.profile.to_sorted_order(p0);
    let mut rate = 1.0;
    for _ in 0..=n_max {
        let tv: f64 = p
            .iter()
            .zip(stationary)
            .map(|(x, s)| (x - s).abs())
            .sum::<f64>()
            * 0.5;
        bound_curve.push(amplitude * rate);
        exact_curve.push(tv);
        p = report.kernel.propagate(&p);
        rate *= lambda_1;
    }
    Ok((bound_curve, exact_curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::RngStream;

    const TWO_STATE_TARGET: [f64; 2] = [0.75, 0.25];
    const TWO_STATE_PROPOSAL: [f64; 2] = [0.5, 0.5];

    fn random_instance(rng: &mut RngStream, n: usize) -> (Vec<f64>, Vec<f64>) {
        loop {
            let raw_a: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.05).collect();
            let raw_q: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.05).collect();
            let sum_a: f64 = raw_a.iter().sum();
            let sum_q: f64 = raw_q.iter().sum();
            let a: Vec<f64> = raw_a.iter().map(|x| x / sum_a).collect();
            let q: Vec<f64> = raw_q.iter().map(|x| x / sum_q).collect();
            let mut w: Vec<f64> = a.iter().zip(&q).map(|(x, y)| x / y).collect();
            w.sort_by(|x, y| y.partial_cmp(x).unwrap());
            let distinct = w
                .windows(2)
                .all(|pair| (pair[0] - pair[1]).abs() > 1e-6 * pair[0].abs());
            if distinct {
                return (a, q);
            }
        }
    }

    #[test]
    fn two_state_kernel_matches_hand_expansion() {
        let kernel = build_kernel(&TWO_STATE_TARGET, &TWO_STATE_PROPOSAL).unwrap();
        let expected = [[5.0 / 6.0, 1.0 / 6.0], [0.5, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (kernel.entry(i, j) - expected[i][j]).abs() < 1e-12,
                    "P({i},{j}) = {}",
                    kernel.entry(i, j)
                );
            }
        }
    }

    #[test]
    fn perfect_proposal_gives_rows_equal_to_target() {
        let a = [0.3, 0.2, 0.5];
        let kernel = build_kernel(&a, &a).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((kernel.entry(i, j) - a[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn built_kernels_are_stationary_for_the_target() {
        let mut rng = RngStream::new(17, 0);
        for _ in 0..50 {
            let (a, q) = random_instance(&mut rng, 6);
            let kernel = build_kernel(&a, &q).unwrap();
            let pushed = kernel.propagate(&a);
            for (x, y) in pushed.iter().zip(&a) {
                assert!((x - y).abs() < 1e-14, "aP != a: {x} vs {y}");
            }
        }
    }

    #[test]
    fn build_kernel_rejects_zero_entries_and_bad_sums() {
        assert!(matches!(
            build_kernel(&[1.0, 0.0], &[0.5, 0.5]),
            Err(SpectralError::ZeroEntry { .. })
        ));
        assert!(matches!(
            build_kernel(&[0.75, 0.25], &[0.6, 0.5]),
            Err(SpectralError::NotNormalized { .. })
        ));
        assert!(build_kernel(&[0.75, 0.25], &[0.5]).is_err());
    }

    #[test]
    fn two_state_spectrum_is_exact() {
        let report = closed_form_spectrum(&TWO_STATE_TARGET, &TWO_STATE_PROPOSAL).unwrap();
        assert_eq!(report.lambdas[0], 1.0);
        assert!((report.lambdas[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(report.vectors[1], vec![-0.25, 0.25]);
        assert!(report.max_residual < 1e-10, "residual {}", report.max_residual);
        assert!(report.oracle_gap() < 1e-9, "oracle gap {}", report.oracle_gap());
    }

    #[test]
    fn eigenvalue_equals_rejection_probability_at_each_state() {
        let mut rng = RngStream::new(23, 0);
        for _ in 0..20 {
            let (a, q) = random_instance(&mut rng, 7);
            let report = closed_form_spectrum(&a, &q).unwrap();
            let q_sorted = &report.profile.proposal_sorted;
            for k in 1..report.profile.n() {
                // The diagonal entry at sorted state k − 1 is the proposal's
                // self-mass plus the total rejection mass parked there, so
                // subtracting Q recovers exactly the k-th eigenvalue.
                let rejection_mass = report.kernel.entry(k - 1, k - 1) - q_sorted[k - 1];
                assert!(
                    (report.lambdas[k] - rejection_mass).abs() < 1e-12,
                    "λ_{k} = {} vs rejection mass {rejection_mass}",
                    report.lambdas[k]
                );
            }
        }
    }

    #[test]
    fn eigenvalues_are_sorted_and_in_unit_interval() {
        let mut rng = RngStream::new(29, 0);
        for _ in 0..30 {
            let (a, q) = random_instance(&mut rng, 8);
            let report = closed_form_spectrum(&a, &q).unwrap();
            for pair in report.lambdas.windows(2) {
                assert!(pair[0] >= pair[1] - 1e-15, "not sorted: {pair:?}");
            }
            assert!(*report.lambdas.last().unwrap() >= -1e-15);
            assert!(report.lambdas[1] <= 1.0);
        }
    }

    #[test]
    fn eigenvectors_annihilate_ones_and_satisfy_the_eigen_identity() {
        let mut rng = RngStream::new(31, 0);
        for _ in 0..30 {
            let (a, q) = random_instance(&mut rng, 6);
            let report = closed_form_spectrum(&a, &q).unwrap();
            assert!(report.max_residual < 1e-10, "residual {}", report.max_residual);
            for k in 1..report.profile.n() {
                let total: f64 = report.vectors[k].iter().sum();
                assert!(total.abs() < 1e-15, "v_{k} · 1 = {total}");
            }
        }
    }

    #[test]
    fn closed_form_matches_numeric_oracle_on_random_instances() {
        let mut rng = RngStream::new(37, 0);
        for round in 0..100 {
            let n = 2 + (round % 7);
            let (a, q) = random_instance(&mut rng, n);
            let report = closed_form_spectrum(&a, &q).unwrap();
            assert!(
                report.oracle_gap() < 1e-9,
                "n = {n}: oracle gap {}",
                report.oracle_gap()
            );
        }
    }

    #[test]
    fn proposal_mass_equals_ratio_quotient_identity() {
        // The two published shapes of the eigenvalue sum agree exactly
        // because Q_d = a_d / w_d; spot-check the identity numerically.
        let mut rng = RngStream::new(41, 0);
        let (a, q) = random_instance(&mut rng, 8);
        let profile = ImportanceProfile::new(&a, &q).unwrap();
        for k in 0..profile.n() {
            let reconstructed = profile.target_sorted[k] / profile.weights[k];
            assert!((reconstructed - profile.proposal_sorted[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn tied_ratios_are_rejected_with_the_offending_pair() {
        // States 0 and 2 share w = 1.5; state 1 differs.
        let a = [0.45, 0.25, 0.3];
        let q = [0.3, 0.5, 0.2];
        let err = closed_form_spectrum(&a, &q).unwrap_err();
        match err {
            SpectralError::TiedRatios { first, second, .. } => {
                assert_eq!((first.min(second), first.max(second)), (0, 2));
            }
            other => panic!("expected tied-ratio error, got {other}"),
        }
        assert!(err.to_string().contains("non-diagonalisable case out of scope"));
    }

    #[test]
    fn all_tied_ratios_degenerate_case_is_exact() {
        // Surrogate equal to proposal: no rejections, every subdominant
        // eigenvalue vanishes, closed forms stay valid.
        let a = [0.3, 0.2, 0.5];
        let report = closed_form_spectrum(&a, &a).unwrap();
        assert_eq!(report.lambdas[0], 1.0);
        for k in 1..3 {
            assert_eq!(report.lambdas[k], 0.0);
        }
        assert!(report.max_residual < 1e-15);
    }

    #[test]
    fn expansion_recovers_the_initial_distribution() {
        let mut rng = RngStream::new(43, 0);
        for _ in 0..20 {
            let (a, q) = random_instance(&mut rng, 5);
            let report = closed_form_spectrum(&a, &q).unwrap();
            let raw: Vec<f64> = (0..5).map(|_| rng.uniform() + 0.01).collect();
            let sum: f64 = raw.iter().sum();
            let p0: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            let thetas = report.expansion_coefficients(&p0).unwrap();
            assert!((thetas[0] - 1.0).abs() < 1e-15, "θ₀ = {}", thetas[0]);
            let p0_sorted = report.profile.to_sorted_order(&p0);
            for i in 0..5 {
                let reconstructed: f64 =
                    (0..5).map(|k| thetas[k] * report.vectors[k][i]).sum();
                assert!(
                    (reconstructed - p0_sorted[i]).abs() < 1e-12,
                    "component {i}: {reconstructed} vs {}",
                    p0_sorted[i]
                );
            }
        }
    }

    #[test]
    fn two_state_decay_from_the_high_ratio_state_is_geometric() {
        let report = closed_form_spectrum(&TWO_STATE_TARGET, &TWO_STATE_PROPOSAL).unwrap();
        // Point mass on the state with the larger importance ratio: the
        // exact distance is 0.25 · (1/3)^N.
        let (bounds, exact) = tv_decay_curves(&report, &[1.0, 0.0], 40).unwrap();
        for (n, (&bound, &tv)) in bounds.iter().zip(&exact).enumerate() {
            let formula = 0.25 * (1.0f64 / 3.0).powi(n as i32);
            assert!(
                (tv - formula).abs() < 1e-12,
                "N = {n}: exact {tv} vs formula {formula}"
            );
            assert!(tv <= bound + 1e-12, "N = {n}: tv {tv} > bound {bound}");
        }
        // Point mass on the other state decays at the same rate with three
        // times the amplitude.
        let (_, exact_low) = tv_decay_curves(&report, &[0.0, 1.0], 10).unwrap();
        for (n, &tv) in exact_low.iter().enumerate() {
            let formula = 0.75 * (1.0f64 / 3.0).powi(n as i32);
            assert!(
                (tv - formula).abs() < 1e-12,
                "N = {n}: exact {tv} vs formula {formula}"
            );
        }
    }

    #[test]
    fn stationary_start_never_moves() {
        let report = closed_form_spectrum(&TWO_STATE_TARGET, &TWO_STATE_PROPOSAL).unwrap();
        let (_, exact) = tv_decay_curves(&report, &TWO_STATE_TARGET, 20).unwrap();
        for &tv in &exact {
            assert!(tv < 1e-15);
        }
    }

    #[test]
    fn decay_bound_envelope_holds_on_random_instances() {
        let mut rng = RngStream::new(47, 0);
        for _ in 0..25 {
            let n = 2 + (rng.uniform() * 5.0) as usize;
            let (a, q) = random_instance(&mut rng, n);
            let report = closed_form_spectrum(&a, &q).unwrap();
            let mut p0 = vec![0.0; n];
            p0[(rng.uniform() * n as f64) as usize] = 1.0;
            let (bounds, exact) = tv_decay_curves(&report, &p0, 60).unwrap();
            for (step, (&bound, &tv)) in bounds.iter().zip(&exact).enumerate() {
                assert!(
                    tv <= bound + 1e-12,
                    "step {step}: tv {tv} exceeds bound {bound}"
                );
            }
        }
    }

    #[test]
    fn observed_decay_rate_matches_lambda_1() {
        let mut rng = RngStream::new(53, 0);
        let (a, q) = random_instance(&mut rng, 6);
        let report = closed_form_spectrum(&a, &q).unwrap();
        let mut p0 = vec![0.0; 6];
        p0[5] = 1.0;
        let (_, exact) = tv_decay_curves(&report, &p0, 60).unwrap();
        // Linear fit of log TV against N over a window where the dominant
        // mode has taken over but the values are far from the noise floor.
        let lo = 10;
        let hi = 60;
        let points: Vec<(f64, f64)> = (lo..=hi)
            .filter(|&n| exact[n] > 1e-13)
            .map(|n| (n as f64, exact[n].ln()))
            .collect();
        assert!(points.len() >= 20, "decay hit the noise floor too early");
        let count = points.len() as f64;
        let mean_x: f64 = points.iter().map(|p| p.0).sum::<f64>() / count;
        let mean_y: f64 = points.iter().map(|p| p.1).sum::<f64>() / count;
        let slope: f64 = points
            .iter()
            .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
            .sum::<f64>()
            / points.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>();
        let expected = report.lambda_1().ln();
        assert!(
            ((slope - expected) / expected).abs() < 0.02,
            "slope {slope} vs log λ₁ {expected}"
        );
    }

    #[test]
    fn mismatched_initial_distribution_is_rejected() {
        let report = closed_form_spectrum(&TWO_STATE_TARGET, &TWO_STATE_PROPOSAL).unwrap();
        assert!(tv_decay_bound(&report, &[1.0, 0.0, 0.0], 5).is_err());
        assert!(report.clone().with_initial(&[0.9, 0.2]).is_err());
        let with = report.with_initial(&[0.0, 1.0]).unwrap();
        let thetas = with.thetas.as_ref().unwrap();
        assert!((thetas[1] - 3.0).abs() < 1e-12, "θ₁ = {}", thetas[1]);
    }
}
