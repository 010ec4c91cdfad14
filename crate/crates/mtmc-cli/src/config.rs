//! Scenario files: the single documented schema every subcommand reads.
//!
//! A scenario is a TOML document with a fixed `schema_version`. Parsing is
//! strict — unknown fields are rejected, so a typo fails loudly instead of
//! silently running a different experiment — and validation errors always
//! name the offending field. Parsing then re-serializing is idempotent:
//! optional fields materialize their defaults on the first round trip and
//! stay fixed afterwards, which is what lets golden configs be archived and
//! diffed.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// The schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    pub space: SpaceSpec,
    pub target: TargetSpec,
    pub proposal: ProposalSpec,
    pub sampler: SamplerSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<DiagnosticsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couple: Option<CoupleSpec>,
    pub output: OutputSpec,
}

/// State space: a finite label set or a continuous box.
///
/// The box is the *diagnostic* window — bins and grids live inside it; the
/// built-in continuous targets stay strictly positive on all of space, so a
/// chain may step outside and come back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Finite { n: usize },
    Continuous { dim: usize, support: Vec<[f64; 2]> },
}

/// Target density families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    /// Finite spaces: one (possibly unnormalized) mass per state label.
    Discrete { masses: Vec<f64> },
    /// One Gaussian-shaped bump per axis, unnormalized.
    Gaussian { mean: Vec<f64>, scale: Vec<f64> },
    /// Weighted sum of Gaussian-shaped bumps.
    Mixture { bumps: Vec<BumpSpec> },
    /// 1-D lookup table: nearest table point wins, ends extend as constants.
    GridTable { points: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Proposal kernels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProposalSpec {
    /// Continuous spaces: isotropic Gaussian step of the given scale.
    RandomWalk { scale: f64 },
    /// Finite spaces: state-independent draw from these masses.
    Independent { masses: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKindSpec {
    Mh,
    Mtmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub kind: SamplerKindSpec,
    pub steps: usize,
    pub seed: u64,
    /// Starting point; on finite spaces a single integer state label.
    pub initial: Vec<f64>,
    /// Surrogate value before any archive entry exists (moving-target only).
    #[serde(default = "default_fallback")]
    pub fallback: f64,
}

fn default_fallback() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    /// Steps at which the trace prefix is measured. Strictly increasing.
    pub checkpoints: Vec<usize>,
    /// Archive generations whose approximation gap goes into the run
    /// report. Strictly increasing; empty means none.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generations: Vec<usize>,
    /// Evaluation grid for approximation-gap diagnostics (continuous
    /// spaces; finite spaces use the states themselves).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    /// Histogram bin count per axis for binned TV (continuous spaces only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Bounded observable whose running mean is tracked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Points per axis.
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// A raw coordinate, with the caller-declared bound its values must
    /// respect everywhere the chain goes.
    Coordinate { index: usize, bound: f64 },
    /// Indicator of `x[0] <= threshold`.
    IndicatorLeq { threshold: f64 },
    /// Indicator of `x[0] >= threshold`.
    IndicatorGeq { threshold: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    /// State label the decay curves start from (a point mass there).
    pub initial: usize,
    /// Largest step count on the decay curves.
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupleSpec {
    /// Raw steps per block: the certificate concerns the `n0`-step kernel.
    pub n0: usize,
    pub replicates: usize,
    /// Largest block count on the curves.
    pub horizon: usize,
    /// State label the X-chain starts from.
    pub initial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
}

impl ScenarioFile {
    /// Reads, parses, and validates a scenario file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Parses and validates scenario text.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: ScenarioFile = toml::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    /// Serializes back to TOML. `from_toml(to_toml(x)) == x` for any
    /// validated `x`.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario files serialize cleanly")
    }

    /// Space dimension as the samplers see it (finite spaces embed labels
    /// as 1-D points).
    pub fn dim(&self) -> usize {
        match &self.space {
            SpaceSpec::Finite { .. } => 1,
            SpaceSpec::Continuous { dim, .. } => *dim,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.space, SpaceSpec::Finite { .. })
    }

    /// Full validation; every error names the field it concerns.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!(
                    "unsupported version {} (this build reads {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        if self.name.trim().is_empty() {
            return Err(ConfigError::invalid("name", "must not be empty"));
        }
        self.validate_space()?;
        self.validate_target()?;
        self.validate_proposal()?;
        self.validate_sampler()?;
        if let Some(diagnostics) = &self.diagnostics {
            self.validate_diagnostics(diagnostics)?;
        }
        if let Some(spectrum) = &self.spectrum {
            self.validate_spectrum(spectrum)?;
        }
        if let Some(couple) = &self.couple {
            self.validate_couple(couple)?;
        }
        if self.output.dir.trim().is_empty() {
            return Err(ConfigError::invalid("output.dir", "must not be empty"));
        }
        Ok(())
    }

    fn validate_space(&self) -> Result<(), ConfigError> {
        match &self.space {
            SpaceSpec::Finite { n } => {
                if *n < 2 {
                    return Err(ConfigError::invalid(
                        "space.finite.n",
                        format!("needs at least 2 states, found {n}"),
                    ));
                }
            }
            SpaceSpec::Continuous { dim, support } => {
                if *dim == 0 {
                    return Err(ConfigError::invalid(
                        "space.continuous.dim",
                        "must be at least 1",
                    ));
                }
                if support.len() != *dim {
                    return Err(ConfigError::invalid(
                        "space.continuous.support",
                        format!("needs one [lo, hi] pair per axis: dim {dim}, found {}", support.len()),
                    ));
                }
                for (axis, pair) in support.iter().enumerate() {
                    if !pair[0].is_finite() || !pair[1].is_finite() || pair[0] >= pair[1] {
                        return Err(ConfigError::invalid(
                            "space.continuous.support",
                            format!(
                                "axis {axis} needs finite lo < hi, found [{}, {}]",
                                pair[0], pair[1]
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_target(&self) -> Result<(), ConfigError> {
        let dim = self.dim();
        match (&self.target, &self.space) {
            (TargetSpec::Discrete { masses }, SpaceSpec::Finite { n }) => {
                if masses.len() != *n {
                    return Err(ConfigError::invalid(
                        "target.discrete.masses",
                        format!("needs one mass per state: n = {n}, found {}", masses.len()),
                    ));
                }
                check_positive_masses("target.discrete.masses", masses)?;
            }
            (TargetSpec::Discrete { .. }, SpaceSpec::Continuous { .. }) => {
                return Err(ConfigError::invalid(
                    "target.discrete",
                    "a discrete table needs a finite space",
                ));
            }
            (target, SpaceSpec::Finite { .. }) => {
                let family = match target {
                    TargetSpec::Gaussian { .. } => "gaussian",
                    TargetSpec::Mixture { .. } => "mixture",
                    TargetSpec::GridTable { .. } => "grid-table",
                    TargetSpec::Discrete { .. } => unreachable!("handled above"),
                };
                return Err(ConfigError::invalid(
                    format!("target.{family}"),
                    "continuous target families need a continuous space",
                ));
            }
            (TargetSpec::Gaussian { mean, scale }, SpaceSpec::Continuous { .. }) => {
                check_len("target.gaussian.mean", mean, dim)?;
                check_len("target.gaussian.scale", scale, dim)?;
                check_finite("target.gaussian.mean", mean)?;
                check_strictly_positive("target.gaussian.scale", scale)?;
            }
            (TargetSpec::Mixture { bumps }, SpaceSpec::Continuous { .. }) => {
                if bumps.is_empty() {
                    return Err(ConfigError::invalid(
                        "target.mixture.bumps",
                        "needs at least one bump",
                    ));
                }
                for (i, bump) in bumps.iter().enumerate() {
                    if !bump.weight.is_finite() || bump.weight <= 0.0 {
                        return Err(ConfigError::invalid(
                            format!("target.mixture.bumps[{i}].weight"),
                            format!("must be positive, found {}", bump.weight),
                        ));
                    }
                    check_len(&format!("target.mixture.bumps[{i}].mean"), &bump.mean, dim)?;
                    check_len(&format!("target.mixture.bumps[{i}].scale"), &bump.scale, dim)?;
                    check_finite(&format!("target.mixture.bumps[{i}].mean"), &bump.mean)?;
                    check_strictly_positive(
                        &format!("target.mixture.bumps[{i}].scale"),
                        &bump.scale,
                    )?;
                }
            }
            (TargetSpec::GridTable { points, values }, SpaceSpec::Continuous { .. }) => {
                if dim != 1 {
                    return Err(ConfigError::invalid(
                        "target.grid-table",
                        format!("only defined on 1-D spaces, found dim {dim}"),
                    ));
                }
                if points.len() < 2 || points.len() != values.len() {
                    return Err(ConfigError::invalid(
                        "target.grid-table.points",
                        format!(
                            "needs at least 2 points matching values 1:1, found {} points and {} values",
                            points.len(),
                            values.len()
                        ),
                    ));
                }
                check_finite("target.grid-table.points", points)?;
                if !points.windows(2).all(|w| w[0] < w[1]) {
                    return Err(ConfigError::invalid(
                        "target.grid-table.points",
                        "must be strictly increasing",
                    ));
                }
                check_strictly_positive("target.grid-table.values", values)?;
            }
        }
        Ok(())
    }

    fn validate_proposal(&self) -> Result<(), ConfigError> {
        match (&self.proposal, &self.space) {
            (ProposalSpec::Independent { masses }, SpaceSpec::Finite { n }) => {
                if masses.len() != *n {
                    return Err(ConfigError::invalid(
                        "proposal.independent.masses",
                        format!("needs one mass per state: n = {n}, found {}", masses.len()),
                    ));
                }
                check_positive_masses("proposal.independent.masses", masses)?;
            }
            (ProposalSpec::Independent { .. }, SpaceSpec::Continuous { .. }) => {
                return Err(ConfigError::invalid(
                    "proposal.independent",
                    "an independent table proposal needs a finite space",
                ));
            }
            (ProposalSpec::RandomWalk { .. }, SpaceSpec::Finite { .. }) => {
                return Err(ConfigError::invalid(
                    "proposal.random-walk",
                    "a random-walk proposal needs a continuous space",
                ));
            }
            (ProposalSpec::RandomWalk { scale }, SpaceSpec::Continuous { .. }) => {
                if !scale.is_finite() || *scale <= 0.0 {
                    return Err(ConfigError::invalid(
                        "proposal.random-walk.scale",
                        format!("must be positive, found {scale}"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn validate_sampler(&self) -> Result<(), ConfigError> {
        let sampler = &self.sampler;
        if sampler.steps == 0 {
            return Err(ConfigError::invalid(
                "sampler.steps",
                "must be at least 1",
            ));
        }
        if sampler.initial.len() != self.dim() {
            return Err(ConfigError::invalid(
                "sampler.initial",
                format!(
                    "needs {} coordinate(s), found {}",
                    self.dim(),
                    sampler.initial.len()
                ),
            ));
        }
        check_finite("sampler.initial", &sampler.initial)?;
        if let SpaceSpec::Finite { n } = &self.space {
            let label = sampler.initial[0];
            if label != label.round() || label < 1.0 || label > *n as f64 {
                return Err(ConfigError::invalid(
                    "sampler.initial",
                    format!("must be an integer state label in 1..={n}, found {label}"),
                ));
            }
        }
        if !sampler.fallback.is_finite() || sampler.fallback <= 0.0 {
            return Err(ConfigError::invalid(
                "sampler.fallback",
                format!("must be positive, found {}", sampler.fallback),
            ));
        }
        Ok(())
    }

    fn validate_diagnostics(&self, diagnostics: &DiagnosticsSpec) -> Result<(), ConfigError> {
        let dim = self.dim();
        if diagnostics.checkpoints.is_empty() {
            return Err(ConfigError::invalid(
                "diagnostics.checkpoints",
                "needs at least one checkpoint",
            ));
        }
        if !diagnostics.checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::invalid(
                "diagnostics.checkpoints",
                "must be strictly increasing",
            ));
        }
        let first = diagnostics.checkpoints[0];
        let last = *diagnostics.checkpoints.last().expect("non-empty");
        if first < 2 || last > self.sampler.steps {
            return Err(ConfigError::invalid(
                "diagnostics.checkpoints",
                format!(
                    "must lie in 2..=steps (= {}), found range {first}..={last}",
                    self.sampler.steps
                ),
            ));
        }
        if !diagnostics.generations.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::invalid(
                "diagnostics.generations",
                "must be strictly increasing",
            ));
        }
        if let Some(first) = diagnostics.generations.first() {
            if *first == 0 {
                return Err(ConfigError::invalid(
                    "diagnostics.generations",
                    "generation numbers start at 1",
                ));
            }
        }
        match &self.space {
            SpaceSpec::Continuous { support, .. } => {
                let grid = diagnostics.grid.as_ref().ok_or_else(|| {
                    ConfigError::invalid(
                        "diagnostics.grid",
                        "required on continuous spaces",
                    )
                })?;
                check_len("diagnostics.grid.lo", &grid.lo, dim)?;
                check_len("diagnostics.grid.hi", &grid.hi, dim)?;
                check_finite("diagnostics.grid.lo", &grid.lo)?;
                check_finite("diagnostics.grid.hi", &grid.hi)?;
                for axis in 0..dim {
                    if grid.lo[axis] >= grid.hi[axis] {
                        return Err(ConfigError::invalid(
                            "diagnostics.grid",
                            format!("axis {axis} needs lo < hi"),
                        ));
                    }
                }
                if grid.count < 2 {
                    return Err(ConfigError::invalid(
                        "diagnostics.grid.count",
                        "needs at least 2 points per axis",
                    ));
                }
                let bins = diagnostics.bins.ok_or_else(|| {
                    ConfigError::invalid("diagnostics.bins", "required on continuous spaces")
                })?;
                if bins == 0 {
                    return Err(ConfigError::invalid(
                        "diagnostics.bins",
                        "must be at least 1",
                    ));
                }
                let _ = support;
            }
            SpaceSpec::Finite { .. } => {
                if diagnostics.grid.is_some() {
                    return Err(ConfigError::invalid(
                        "diagnostics.grid",
                        "finite spaces measure on the states themselves; remove this field",
                    ));
                }
                if diagnostics.bins.is_some() {
                    return Err(ConfigError::invalid(
                        "diagnostics.bins",
                        "finite spaces use exact per-state TV; remove this field",
                    ));
                }
            }
        }
        if let Some(observable) = &diagnostics.observable {
            match observable {
                ObservableSpec::Coordinate { index, bound } => {
                    if *index >= dim {
                        return Err(ConfigError::invalid(
                            "diagnostics.observable.coordinate.index",
                            format!("out of range for dim {dim}"),
                        ));
                    }
                    if !bound.is_finite() || *bound <= 0.0 {
                        return Err(ConfigError::invalid(
                            "diagnostics.observable.coordinate.bound",
                            format!("must be positive, found {bound}"),
                        ));
                    }
                }
                ObservableSpec::IndicatorLeq { threshold }
                | ObservableSpec::IndicatorGeq { threshold } => {
                    if !threshold.is_finite() {
                        return Err(ConfigError::invalid(
                            "diagnostics.observable",
                            format!("threshold must be finite, found {threshold}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_spectrum(&self, spectrum: &SpectrumSpec) -> Result<(), ConfigError> {
        let SpaceSpec::Finite { n } = &self.space else {
            return Err(ConfigError::invalid(
                "spectrum",
                "closed-form spectral analysis needs a finite space with an independent proposal",
            ));
        };
        if spectrum.initial < 1 || spectrum.initial > *n {
            return Err(ConfigError::invalid(
                "spectrum.initial",
                format!("state label must lie in 1..={n}, found {}", spectrum.initial),
            ));
        }
        if spectrum.horizon == 0 {
            return Err(ConfigError::invalid(
                "spectrum.horizon",
                "must be at least 1",
            ));
        }
        Ok(())
    }

    fn validate_couple(&self, couple: &CoupleSpec) -> Result<(), ConfigError> {
        let SpaceSpec::Finite { n } = &self.space else {
            return Err(ConfigError::invalid(
                "couple",
                "coupling experiments need a finite space with an independent proposal",
            ));
        };
        if couple.n0 == 0 {
            return Err(ConfigError::invalid("couple.n0", "must be at least 1"));
        }
        if couple.replicates == 0 {
            return Err(ConfigError::invalid(
                "couple.replicates",
                "must be at least 1",
            ));
        }
        if couple.horizon == 0 {
            return Err(ConfigError::invalid(
                "couple.horizon",
                "must be at least 1",
            ));
        }
        if couple.initial < 1 || couple.initial > *n {
            return Err(ConfigError::invalid(
                "couple.initial",
                format!("state label must lie in 1..={n}, found {}", couple.initial),
            ));
        }
        Ok(())
    }
}

fn check_positive_masses(field: &str, masses: &[f64]) -> Result<(), ConfigError> {
    for (i, &mass) in masses.iter().enumerate() {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(ConfigError::invalid(
                field,
                format!("entry {i} must be a positive mass, found {mass}"),
            ));
        }
    }
    Ok(())
}

fn check_strictly_positive(field: &str, values: &[f64]) -> Result<(), ConfigError> {
    for (i, &value) in values.iter().enumerate() {
        if !value.is_finite() || value <= 0.0 {
            return Err(ConfigError::invalid(
                field,
                format!("entry {i} must be positive, found {value}"),
            ));
        }
    }
    Ok(())
}

fn check_finite(field: &str, values: &[f64]) -> Result<(), ConfigError> {
    for (i, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(ConfigError::invalid(
                field,
                format!("entry {i} must be finite, found {value}"),
            ));
        }
    }
    Ok(())
}

fn check_len(field: &str, values: &[f64], expected: usize) -> Result<(), ConfigError> {
    if values.len() != expected {
        return Err(ConfigError::invalid(
            field,
            format!("needs {expected} entries, found {}", values.len()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn finite_text() -> &'static str {
        r#"
schema_version = 1
name = "two-state"

[space.finite]
n = 2

[target.discrete]
masses = [0.75, 0.25]

[proposal.independent]
masses = [0.5, 0.5]

[sampler]
kind = "mh"
steps = 1000
seed = 7
initial = [1.0]

[output]
dir = "out"
"#
    }

    fn continuous_text() -> &'static str {
        r#"
schema_version = 1
name = "bumps"

[space.continuous]
dim = 1
support = [[-5.0, 5.0]]

[[target.mixture.bumps]]
weight = 0.6
mean = [-1.5]
scale = [0.4]

[[target.mixture.bumps]]
weight = 0.4
mean = [1.5]
scale = [0.5]

[proposal.random-walk]
scale = 2.0

[sampler]
kind = "mtmc"
steps = 5000
seed = 3
initial = [0.0]

[diagnostics]
checkpoints = [100, 1000, 5000]
generations = [5, 20, 80]
bins = 40
grid = { lo = [-5.0], hi = [5.0], count = 101 }

[output]
dir = "out"
"#
    }

    #[test]
    fn finite_scenario_parses_and_validates() {
        let file = ScenarioFile::from_toml(finite_text()).unwrap();
        assert_eq!(file.name, "two-state");
        assert!(file.is_finite());
        assert_eq!(file.dim(), 1);
        assert_eq!(file.sampler.fallback, 1.0);
    }

    #[test]
    fn continuous_scenario_parses_and_validates() {
        let file = ScenarioFile::from_toml(continuous_text()).unwrap();
        assert!(!file.is_finite());
        let diagnostics = file.diagnostics.as_ref().unwrap();
        assert_eq!(diagnostics.bins, Some(40));
        assert_eq!(diagnostics.generations, vec![5, 20, 80]);
    }

    #[test]
    fn round_trip_is_idempotent() {
        for text in [finite_text(), continuous_text()] {
            let first = ScenarioFile::from_toml(text).unwrap();
            let serialized = first.to_toml();
            let second = ScenarioFile::from_toml(&serialized).unwrap();
            assert_eq!(first, second);
            assert_eq!(serialized, second.to_toml());
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = finite_text().replace("[sampler]", "[sampler]\nwalkers = 4");
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("walkers"), "{err}");
    }

    #[test]
    fn negative_mass_is_named() {
        let text = finite_text().replace("[0.75, 0.25]", "[0.75, -0.25]");
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(
            err.to_string().contains("target.discrete.masses"),
            "{err}"
        );
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        let text = finite_text().replace("schema_version = 1", "schema_version = 2");
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("schema_version"), "{err}");
    }

    #[test]
    fn continuous_diagnostics_require_grid_and_bins() {
        let text = continuous_text().replace("bins = 40\n", "");
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("diagnostics.bins"), "{err}");
    }

    #[test]
    fn spectrum_on_continuous_space_is_rejected() {
        let text = continuous_text().replace(
            "[output]",
            "[spectrum]\ninitial = 1\nhorizon = 10\n\n[output]",
        );
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("spectrum"), "{err}");
    }

    #[test]
    fn finite_initial_must_be_integer_label() {
        let text = finite_text().replace("initial = [1.0]", "initial = [1.5]");
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("sampler.initial"), "{err}");
    }

    #[test]
    fn checkpoints_must_fit_inside_the_run() {
        let text = finite_text().replace(
            "[output]",
            "[diagnostics]\ncheckpoints = [100, 2000]\n\n[output]",
        );
        let err = ScenarioFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("diagnostics.checkpoints"), "{err}");
    }
}
