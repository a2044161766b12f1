//! Distributions on the unit interval and the inverse-sampling stopping rule.
//!
//! A run draws from a fixed distribution until the running sum first reaches
//! the threshold `gamma` and reports how many draws that took. Because every
//! draw is at most 1, the final sum always lands in `[gamma, gamma + 1)`,
//! and because the mean is required to be positive the rule fires in finite
//! time; a hard draw budget turns "practically never" into an error instead
//! of a hang.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// Draws permitted per run before the stopping rule is declared stuck.
pub const DRAW_LIMIT: u64 = 1_000_000_000;

// Slack allowed when checking that discrete weights sum to one.
const WEIGHT_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("bernoulli p = {0} must lie in (0, 1]")]
    InvalidBernoulli(f64),
    #[error("uniform endpoints ({0}, {1}) must satisfy 0 <= a < b <= 1")]
    InvalidUniform(f64, f64),
    #[error("discrete distribution: {0}")]
    InvalidDiscrete(String),
    #[error("'{0}' does not parse as bernoulli:<p>, uniform:<a>,<b>, or discrete:<v1>@<p1>,...")]
    Parse(String),
    #[error("gamma = {0} is not a usable crossing threshold")]
    InvalidGamma(f64),
    #[error("stopping rule did not fire within {0} draws")]
    DrawLimit(u64),
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Bernoulli(f64),
    Uniform(f64, f64),
    Discrete(Vec<(f64, f64)>),
}

/// A sampling distribution supported on `[0, 1]` with positive mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedDistribution {
    kind: Kind,
}

impl BoundedDistribution {
    /// 0/1 draws with success probability `p`. `p = 1` is allowed and makes
    /// every draw a 1.
    pub fn bernoulli(p: f64) -> Result<Self, SamplingError> {
        if !(p.is_finite() && p > 0.0 && p <= 1.0) {
            return Err(SamplingError::InvalidBernoulli(p));
        }
        Ok(Self {
            kind: Kind::Bernoulli(p),
        })
    }

    /// Continuous uniform draws on `[a, b)` within the unit interval.
    pub fn uniform(a: f64, b: f64) -> Result<Self, SamplingError> {
        if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b && b <= 1.0) {
            return Err(SamplingError::InvalidUniform(a, b));
        }
        Ok(Self {
            kind: Kind::Uniform(a, b),
        })
    }

    /// Finite support `(value, weight)` pairs. Values must sit in `[0, 1]`,
    /// weights must be positive and sum to one, and at least one value must
    /// be positive so the stopping rule can fire.
    pub fn discrete(pairs: Vec<(f64, f64)>) -> Result<Self, SamplingError> {
        if pairs.is_empty() {
            return Err(SamplingError::InvalidDiscrete("no support points".into()));
        }
        let mut total = 0.0;
        let mut mean = 0.0;
        for &(value, weight) in &pairs {
            if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
                return Err(SamplingError::InvalidDiscrete(format!(
                    "value {value} is outside [0, 1]"
                )));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(SamplingError::InvalidDiscrete(format!(
                    "weight {weight} for value {value} is not positive"
                )));
            }
            total += weight;
            mean += value * weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_SLACK {
            return Err(SamplingError::InvalidDiscrete(format!(
                "weights sum to {total}, not 1"
            )));
        }
        if mean <= 0.0 {
            return Err(SamplingError::InvalidDiscrete(
                "mean is zero; the stopping rule would never fire".into(),
            ));
        }
        Ok(Self {
            kind: Kind::Discrete(pairs),
        })
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::Bernoulli(p) => *p,
            Kind::Uniform(a, b) => 0.5 * (a + b),
            Kind::Discrete(pairs) => pairs.iter().map(|(v, w)| v * w).sum(),
        }
    }

    /// Whether every draw is 0 or 1, which the `*-bernoulli` interval
    /// constructions require.
    pub fn is_bernoulli(&self) -> bool {
        match &self.kind {
            Kind::Bernoulli(_) => true,
            Kind::Uniform(..) => false,
            Kind::Discrete(pairs) => pairs.iter().all(|&(v, _)| v == 0.0 || v == 1.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Bernoulli(p) => {
                // random() < 1 always holds, so p = 1 yields all ones.
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Uniform(a, b) => a + (b - a) * rng.random::<f64>(),
            Kind::Discrete(pairs) => {
                let r = rng.random::<f64>();
                let mut cumulative = 0.0;
                for &(value, weight) in pairs {
                    cumulative += weight;
                    if r < cumulative {
                        return value;
                    }
                }
                // Weight rounding can leave r in the final sliver.
                pairs[pairs.len() - 1].0
            }
        }
    }
}

impl fmt::Display for BoundedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            Kind::Uniform(a, b) => write!(f, "uniform:{a},{b}"),
            Kind::Discrete(pairs) => {
                f.write_str("discrete:")?;
                for (i, (value, weight)) in pairs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{value}@{weight}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for BoundedDistribution {
    type Err = SamplingError;

    /// Grammar: `bernoulli:<p>`, `uniform:<a>,<b>`,
    /// `discrete:<v1>@<p1>,<v2>@<p2>,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse_err = || SamplingError::Parse(s.to_owned());
        let (name, args) = s.split_once(':').ok_or_else(parse_err)?;
        let number = |text: &str| text.trim().parse::<f64>().map_err(|_| parse_err());
        match name.trim() {
            "bernoulli" => BoundedDistribution::bernoulli(number(args)?),
            "uniform" => {
                let (a, b) = args.split_once(',').ok_or_else(parse_err)?;
                BoundedDistribution::uniform(number(a)?, number(b)?)
            }
            "discrete" => {
                let mut pairs = Vec::new();
                for part in args.split(',') {
                    let (value, weight) = part.split_once('@').ok_or_else(parse_err)?;
                    pairs.push((number(value)?, number(weight)?));
                }
                BoundedDistribution::discrete(pairs)
            }
            _ => Err(parse_err()),
        }
    }
}

/// Outcome of one inverse-sampling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRecord {
    /// Draws taken until the sum first reached the threshold.
    pub n: u64,
    /// The sum at stopping; always in `[gamma, gamma + 1)`.
    pub final_sum: f64,
}

/// Draws from `dist` until the running sum reaches `gamma`.
pub fn run_inverse_sampling<R: Rng + ?Sized>(
    dist: &BoundedDistribution,
    gamma: f64,
    rng: &mut R,
) -> Result<StoppingRecord, SamplingError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(SamplingError::InvalidGamma(gamma));
    }
    let mut sum = 0.0;
    let mut n = 0u64;
    while sum < gamma {
        if n >= DRAW_LIMIT {
            return Err(SamplingError::DrawLimit(DRAW_LIMIT));
        }
        sum += dist.sample(rng);
        n += 1;
    }
    Ok(StoppingRecord { n, final_sum: sum })
}
