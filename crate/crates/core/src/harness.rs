//! Monte Carlo validation: coverage experiments over a grid of
//! distributions, thresholds, and methods, plus empirical checks of the
//! expected stopping count and of the analytic stopping-count tail bounds.
//!
//! Reproducibility contract: every trial owns a private generator stream
//! derived as `(cell_index << 32) | trial_index` over a single master seed,
//! so reports are byte-for-byte repeatable regardless of how cells are
//! scheduled across threads. Standalone checks (wald, tails) use the plain
//! trial index, i.e. cell 0 of the same layout.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::divergence::h_divergence;
use crate::limits::{interval, ConfidenceInterval, IntervalInputs, LimitError, Method};
use crate::sampling::{run_inverse_sampling, BoundedDistribution, SamplingError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("experiment grid axis '{0}' is empty")]
    EmptyAxis(&'static str),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error(
        "no applicable grid cells: bernoulli-only methods need 0/1-valued \
         distributions and an integer gamma"
    )]
    NoApplicableCells,
    #[error("grid of {0} cells exceeds the addressable stream space")]
    GridTooLarge(u128),
    #[error("epsilon = {0} must lie strictly inside (0, 1)")]
    InvalidEpsilon(f64),
    #[error("tail bounds require a mean strictly below 1, got {0}")]
    DegenerateMean(f64),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Limits(#[from] LimitError),
}

/// Generator for one trial. Identical arguments always reproduce the same
/// sample path within a build.
pub fn trial_rng(master_seed: u64, cell_index: u64, trial_index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((cell_index << 32) | u64::from(trial_index));
    rng
}

/// A full factorial experiment: every method crossed with every
/// distribution, threshold, and confidence parameter. Cells a method cannot
/// serve (bernoulli-only methods on non-0/1 draws or fractional gamma) are
/// skipped; their indices stay reserved so seeds never shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub distributions: Vec<BoundedDistribution>,
    pub gammas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub methods: Vec<Method>,
    pub trials: u32,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// The reference validation grid: four bernoulli means, the full-range
    /// uniform, and a symmetric two-point mixture, crossed with
    /// gamma in {5, 10, 50}, delta in {0.05, 0.1}, and all four methods.
    pub fn default_grid(trials: u32, master_seed: u64) -> Self {
        let distributions = vec![
            BoundedDistribution::bernoulli(0.1).unwrap(),
            BoundedDistribution::bernoulli(0.3).unwrap(),
            BoundedDistribution::bernoulli(0.5).unwrap(),
            BoundedDistribution::bernoulli(0.9).unwrap(),
            BoundedDistribution::uniform(0.0, 1.0).unwrap(),
            BoundedDistribution::discrete(vec![(0.25, 0.5), (0.75, 0.5)]).unwrap(),
        ];
        ExperimentConfig {
            distributions,
            gammas: vec![5.0, 10.0, 50.0],
            deltas: vec![0.05, 0.1],
            methods: Method::ALL.to_vec(),
            trials,
            master_seed,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.distributions.is_empty() {
            return Err(HarnessError::EmptyAxis("distributions"));
        }
        if self.gammas.is_empty() {
            return Err(HarnessError::EmptyAxis("gammas"));
        }
        if self.deltas.is_empty() {
            return Err(HarnessError::EmptyAxis("deltas"));
        }
        if self.methods.is_empty() {
            return Err(HarnessError::EmptyAxis("methods"));
        }
        if self.trials == 0 {
            return Err(HarnessError::ZeroTrials);
        }
        let total = self.methods.len() as u128
            * self.distributions.len() as u128
            * self.gammas.len() as u128
            * self.deltas.len() as u128;
        if total > u128::from(u32::MAX) {
            return Err(HarnessError::GridTooLarge(total));
        }
        for &delta in &self.deltas {
            if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
                return Err(LimitError::InvalidDelta(delta).into());
            }
        }
        for &gamma in &self.gammas {
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(LimitError::InvalidGamma(gamma).into());
            }
        }
        Ok(())
    }

    fn cells(&self) -> Vec<CellSpec> {
        let mut cells = Vec::new();
        let mut index = 0u64;
        for method in &self.methods {
            for dist in &self.distributions {
                for &gamma in &self.gammas {
                    for &delta in &self.deltas {
                        let applicable = !method.bernoulli_only()
                            || (dist.is_bernoulli() && gamma.fract() == 0.0);
                        if applicable {
                            cells.push(CellSpec {
                                index,
                                method: *method,
                                dist: dist.clone(),
                                gamma,
                                delta,
                            });
                        }
                        index += 1;
                    }
                }
            }
        }
        cells
    }
}

struct CellSpec {
    index: u64,
    method: Method,
    dist: BoundedDistribution,
    gamma: f64,
    delta: f64,
}

/// One grid cell's verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCell {
    pub method: Method,
    pub dist: BoundedDistribution,
    pub gamma: f64,
    pub delta: f64,
    pub trials: u32,
    pub master_seed: u64,
    /// Trials whose interval missed the true mean under strict containment.
    pub violations: u32,
    pub coverage: f64,
    pub coverage_stderr: f64,
    pub mean_n: f64,
    pub mean_n_stderr: f64,
    /// Observed coverage minus the nominal 1 - delta; conservative methods
    /// should keep this positive.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub cells: Vec<CoverageCell>,
}

impl CoverageReport {
    pub fn all_pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }
}

/// Runs the full grid. The acceptance rule per cell is
/// `coverage >= (1 - delta) - 3 * stderr`; strict containment
/// `lower < mu < upper` defines a covered trial.
pub fn run_coverage_experiment(config: &ExperimentConfig) -> Result<CoverageReport, HarnessError> {
    config.validate()?;
    let cells = config.cells();
    if cells.is_empty() {
        return Err(HarnessError::NoApplicableCells);
    }
    let results: Result<Vec<CoverageCell>, HarnessError> = cells
        .into_par_iter()
        .map(|cell| run_cell(config, &cell))
        .collect();
    Ok(CoverageReport { cells: results? })
}

fn run_cell(config: &ExperimentConfig, cell: &CellSpec) -> Result<CoverageCell, HarnessError> {
    let mu = cell.dist.mean();
    let base = ChaCha8Rng::seed_from_u64(config.master_seed);
    // The interval depends on the trial only through n, so memoize per count.
    let mut limits_by_n: HashMap<u64, (f64, f64)> = HashMap::new();
    let mut violations = 0u32;
    let mut sum_n = 0u64;
    let mut sumsq_n = 0u128;
    for trial in 0..config.trials {
        let mut rng = base.clone();
        rng.set_stream((cell.index << 32) | u64::from(trial));
        let record = run_inverse_sampling(&cell.dist, cell.gamma, &mut rng)?;
        sum_n += record.n;
        sumsq_n += u128::from(record.n) * u128::from(record.n);
        let (lower, upper) = match limits_by_n.get(&record.n) {
            Some(&pair) => pair,
            None => {
                let inputs = IntervalInputs::new(record.n, cell.gamma, cell.delta)?;
                let ci = interval(cell.method, inputs)?;
                limits_by_n.insert(record.n, (ci.lower, ci.upper));
                (ci.lower, ci.upper)
            }
        };
        if !(lower < mu && mu < upper) {
            violations += 1;
        }
    }

    let t = f64::from(config.trials);
    let coverage = 1.0 - f64::from(violations) / t;
    let coverage_stderr = (coverage * (1.0 - coverage) / t).sqrt();
    let (mean_n, mean_n_stderr) = count_stats(sum_n, sumsq_n, config.trials);
    let nominal = 1.0 - cell.delta;
    Ok(CoverageCell {
        method: cell.method,
        dist: cell.dist.clone(),
        gamma: cell.gamma,
        delta: cell.delta,
        trials: config.trials,
        master_seed: config.master_seed,
        violations,
        coverage,
        coverage_stderr,
        mean_n,
        mean_n_stderr,
        margin: coverage - nominal,
        pass: coverage >= nominal - 3.0 * coverage_stderr,
    })
}

fn count_stats(sum: u64, sumsq: u128, trials: u32) -> (f64, f64) {
    let t = f64::from(trials);
    let mean = sum as f64 / t;
    if trials < 2 {
        return (mean, 0.0);
    }
    let s = sum as f64;
    let variance = ((sumsq as f64 - s * s / t) / (t - 1.0)).max(0.0);
    (mean, (variance / t).sqrt())
}

/// Empirical check of the expected stopping count against the bracket
/// `gamma / mu <= E[n] < (gamma + 1) / mu` implied by optional stopping.
#[derive(Debug, Clone, PartialEq)]
pub struct WaldReport {
    pub dist: BoundedDistribution,
    pub gamma: f64,
    pub trials: u32,
    pub seed: u64,
    pub mean_n: f64,
    pub mean_n_stderr: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub pass: bool,
}

pub fn wald_check(
    dist: &BoundedDistribution,
    gamma: f64,
    trials: u32,
    seed: u64,
) -> Result<WaldReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut sum_n = 0u64;
    let mut sumsq_n = 0u128;
    for trial in 0..trials {
        let mut rng = base.clone();
        rng.set_stream(u64::from(trial));
        let record = run_inverse_sampling(dist, gamma, &mut rng)?;
        sum_n += record.n;
        sumsq_n += u128::from(record.n) * u128::from(record.n);
    }
    let (mean_n, mean_n_stderr) = count_stats(sum_n, sumsq_n, trials);
    let mu = dist.mean();
    let bracket_low = gamma / mu;
    let bracket_high = (gamma + 1.0) / mu;
    let slack = 3.0 * mean_n_stderr;
    Ok(WaldReport {
        dist: dist.clone(),
        gamma,
        trials,
        seed,
        mean_n,
        mean_n_stderr,
        bracket_low,
        bracket_high,
        pass: mean_n >= bracket_low - slack && mean_n <= bracket_high + slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailStatus {
    Pass,
    Fail,
    /// The analytic bound's divergence argument left its domain; nothing to
    /// compare against, and the cell does not count as a failure.
    Skipped,
}

impl TailStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TailStatus::Pass => "pass",
            TailStatus::Fail => "fail",
            TailStatus::Skipped => "skipped",
        }
    }
}

/// One side of a tail comparison: the stopping-count cutoff, the empirical
/// frequency of crossing it, and the analytic bound when it exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSide {
    pub threshold: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: Option<f64>,
    pub status: TailStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCell {
    pub dist: BoundedDistribution,
    pub gamma: f64,
    pub epsilon: f64,
    pub trials: u32,
    pub seed: u64,
    /// Small-count tail: n <= gamma / (mu (1 + eps)).
    pub left: TailSide,
    /// Large-count tail: n >= gamma / (mu (1 - eps)).
    pub right: TailSide,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCheckReport {
    pub cells: Vec<TailCell>,
}

impl TailCheckReport {
    pub fn any_failure(&self) -> bool {
        self.cells
            .iter()
            .any(|c| c.left.status == TailStatus::Fail || c.right.status == TailStatus::Fail)
    }
}

/// Compares empirical stopping-count tails against the exponential bounds
/// `exp(gamma * h((1+eps) mu, mu))` (left) and
/// `exp(gamma * h(gamma / (gamma / (mu (1-eps)) - 1), mu))` (right).
/// A side whose divergence argument falls outside (0, 1] left / (0, 1)
/// right is skipped and flagged rather than extrapolated.
pub fn run_tail_check(
    dist: &BoundedDistribution,
    gamma: f64,
    epsilons: &[f64],
    trials: u32,
    seed: u64,
) -> Result<TailCheckReport, HarnessError> {
    if epsilons.is_empty() {
        return Err(HarnessError::EmptyAxis("epsilons"));
    }
    for &eps in epsilons {
        if !(eps.is_finite() && eps > 0.0 && eps < 1.0) {
            return Err(HarnessError::InvalidEpsilon(eps));
        }
    }
    if trials == 0 {
        return Err(HarnessError::ZeroTrials);
    }
    let mu = dist.mean();
    if mu >= 1.0 {
        return Err(HarnessError::DegenerateMean(mu));
    }

    struct SideSpec {
        threshold: f64,
        bound: Option<f64>,
        hits: u64,
    }
    let mut lefts = Vec::with_capacity(epsilons.len());
    let mut rights = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let z_left = (1.0 + eps) * mu;
        let left_bound = if z_left <= 1.0 {
            let h = h_divergence(z_left, mu).map_err(LimitError::Solve)?;
            Some((gamma * h).exp())
        } else {
            None
        };
        lefts.push(SideSpec {
            threshold: gamma / (mu * (1.0 + eps)),
            bound: left_bound,
            hits: 0,
        });

        let cutoff = gamma / (mu * (1.0 - eps));
        let denominator = cutoff - 1.0;
        let z_right = gamma / denominator;
        let right_bound = if denominator > 0.0 && z_right > 0.0 && z_right < 1.0 {
            let h = h_divergence(z_right, mu).map_err(LimitError::Solve)?;
            Some((gamma * h).exp())
        } else {
            None
        };
        rights.push(SideSpec {
            threshold: cutoff,
            bound: right_bound,
            hits: 0,
        });
    }

    let base = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let mut rng = base.clone();
        rng.set_stream(u64::from(trial));
        let n = run_inverse_sampling(dist, gamma, &mut rng)?.n as f64;
        for side in lefts.iter_mut() {
            if n <= side.threshold {
                side.hits += 1;
            }
        }
        for side in rights.iter_mut() {
            if n >= side.threshold {
                side.hits += 1;
            }
        }
    }

    let finish = |spec: &SideSpec| -> TailSide {
        let t = f64::from(trials);
        let empirical = spec.hits as f64 / t;
        let stderr = (empirical * (1.0 - empirical) / t).sqrt();
        let status = match spec.bound {
            None => TailStatus::Skipped,
            Some(bound) if empirical <= bound + 3.0 * stderr => TailStatus::Pass,
            Some(_) => TailStatus::Fail,
        };
        TailSide {
            threshold: spec.threshold,
            empirical,
            stderr,
            bound: spec.bound,
            status,
        }
    };
    let cells = epsilons
        .iter()
        .zip(lefts.iter().zip(rights.iter()))
        .map(|(&eps, (l, r))| TailCell {
            dist: dist.clone(),
            gamma,
            epsilon: eps,
            trials,
            seed,
            left: finish(l),
            right: finish(r),
        })
        .collect();
    Ok(TailCheckReport { cells })
}

/// Side-by-side widths for the root-solved and closed-form constructions
/// over a range of stopping counts, recording whether the closed-form
/// interval contains its root-solved counterpart at every n.
#[derive(Debug, Clone, PartialEq)]
pub struct WidthPair {
    pub hoeffding: ConfidenceInterval,
    pub massart: ConfidenceInterval,
    pub contained: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthRow {
    pub n: u64,
    pub general: WidthPair,
    /// Absent when gamma is fractional, which the bernoulli pair rejects.
    pub bernoulli: Option<WidthPair>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthReport {
    pub rows: Vec<WidthRow>,
}

impl WidthReport {
    /// Stopping counts where a closed-form interval failed to contain the
    /// matching root-solved one.
    pub fn violations(&self) -> Vec<u64> {
        self.rows
            .iter()
            .filter(|row| {
                !row.general.contained || row.bernoulli.as_ref().is_some_and(|pair| !pair.contained)
            })
            .map(|row| row.n)
            .collect()
    }
}

pub fn width_comparison(
    gamma: f64,
    delta: f64,
    n_from: u64,
    n_to: u64,
) -> Result<WidthReport, HarnessError> {
    let pair = |a: ConfidenceInterval, b: ConfidenceInterval| WidthPair {
        contained: b.lower <= a.lower && b.upper >= a.upper,
        hoeffding: a,
        massart: b,
    };
    let mut rows = Vec::new();
    for n in n_from..=n_to {
        let inputs = IntervalInputs::new(n, gamma, delta)?;
        let general = pair(
            interval(Method::HoeffdingGeneral, inputs)?,
            interval(Method::MassartGeneral, inputs)?,
        );
        let bernoulli = if gamma.fract() == 0.0 {
            Some(pair(
                interval(Method::HoeffdingBernoulli, inputs)?,
                interval(Method::MassartBernoulli, inputs)?,
            ))
        } else {
            None
        };
        rows.push(WidthRow {
            n,
            general,
            bernoulli,
        });
    }
    Ok(WidthReport { rows })
}
