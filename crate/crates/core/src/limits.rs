//! Confidence limits for the mean of a `[0, 1]`-bounded variable observed
//! through inverse sampling: draws accumulate until their sum first reaches
//! the threshold `gamma`, and the stopping count `n` is the only statistic.
//!
//! Four constructions are offered. The `hoeffding-*` pair inverts an
//! exponential bound on the stopping count by root-finding on the divergence
//! level set; the `massart-*` pair evaluates a closed-form variance-adapted
//! bound. The `*-bernoulli` variants require an integer threshold and are
//! valid only for 0/1 draws, in exchange for a slightly tighter upper limit;
//! the `*-general` variants hold for any distribution on `[0, 1]`.
//!
//! All four guarantee coverage at least `1 - delta`, splitting the risk
//! evenly between the two tails.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::divergence::{solve_mu_above, solve_mu_below, DivergenceError, RootSolveDiagnostics};

/// Largest accepted crossing threshold; `ceil(gamma)` must be exact in f64.
const GAMMA_CAP: f64 = 9.0e15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitError {
    #[error("gamma = {0} is not a usable crossing threshold (need 0 < gamma <= 9e15)")]
    InvalidGamma(f64),
    #[error("delta = {0} must lie strictly between 0 and 1")]
    InvalidDelta(f64),
    #[error("n = {n} is below the minimum stopping count ceil(gamma) = {min}")]
    SampleCountTooSmall { n: u64, min: u64 },
    #[error("{method} requires an integer crossing threshold, got gamma = {gamma}")]
    NonIntegerGamma { method: Method, gamma: f64 },
    #[error(
        "unknown method '{0}'; expected hoeffding-general, hoeffding-bernoulli, \
         massart-general, or massart-bernoulli"
    )]
    UnknownMethod(String),
    #[error(transparent)]
    Solve(#[from] DivergenceError),
}

/// Interval construction to apply to a stopping count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    HoeffdingGeneral,
    HoeffdingBernoulli,
    MassartGeneral,
    MassartBernoulli,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::HoeffdingGeneral,
        Method::HoeffdingBernoulli,
        Method::MassartGeneral,
        Method::MassartBernoulli,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::HoeffdingGeneral => "hoeffding-general",
            Method::HoeffdingBernoulli => "hoeffding-bernoulli",
            Method::MassartGeneral => "massart-general",
            Method::MassartBernoulli => "massart-bernoulli",
        }
    }

    /// Whether the construction is only valid for 0/1 draws.
    pub fn bernoulli_only(self) -> bool {
        matches!(self, Method::HoeffdingBernoulli | Method::MassartBernoulli)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = LimitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| LimitError::UnknownMethod(s.to_owned()))
    }
}

/// A validated (n, gamma, delta) triple. The stopping rule forces
/// `n >= ceil(gamma)`, so smaller counts are rejected up front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalInputs {
    n: u64,
    gamma: f64,
    delta: f64,
}

impl IntervalInputs {
    pub fn new(n: u64, gamma: f64, delta: f64) -> Result<Self, LimitError> {
        if !(gamma.is_finite() && gamma > 0.0 && gamma <= GAMMA_CAP) {
            return Err(LimitError::InvalidGamma(gamma));
        }
        if !(delta.is_finite() && delta > 0.0 && delta < 1.0) {
            return Err(LimitError::InvalidDelta(delta));
        }
        let min = gamma.ceil() as u64;
        if n < min {
            return Err(LimitError::SampleCountTooSmall { n, min });
        }
        Ok(IntervalInputs { n, gamma, delta })
    }

    pub fn n(self) -> u64 {
        self.n
    }

    pub fn gamma(self) -> f64 {
        self.gamma
    }

    pub fn delta(self) -> f64 {
        self.delta
    }

    /// Divergence level both tails are solved against: `ln(delta/2) / gamma`.
    pub fn target_level(self) -> f64 {
        (self.delta / 2.0).ln() / self.gamma
    }
}

/// A two-sided confidence interval for the mean, with solver diagnostics
/// aggregated over however many root solves the construction needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub method: Method,
    pub n: u64,
    pub gamma: f64,
    pub delta: f64,
    pub lower: f64,
    pub upper: f64,
    pub diagnostics: RootSolveDiagnostics,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

const NO_SOLVE: RootSolveDiagnostics = RootSolveDiagnostics {
    iterations: 0,
    residual: 0.0,
    bracket_width: 0.0,
};

fn merge(a: RootSolveDiagnostics, b: RootSolveDiagnostics) -> RootSolveDiagnostics {
    RootSolveDiagnostics {
        iterations: a.iterations + b.iterations,
        residual: a.residual.max(b.residual),
        bracket_width: a.bracket_width.max(b.bracket_width),
    }
}

/// Computes the interval for `method` at the given stopping count.
pub fn interval(method: Method, inputs: IntervalInputs) -> Result<ConfidenceInterval, LimitError> {
    if method.bernoulli_only() && inputs.gamma.fract() != 0.0 {
        return Err(LimitError::NonIntegerGamma {
            method,
            gamma: inputs.gamma,
        });
    }
    let (lower, upper, diagnostics) = match method {
        Method::HoeffdingGeneral => hoeffding_general(inputs)?,
        Method::HoeffdingBernoulli => hoeffding_bernoulli(inputs)?,
        Method::MassartGeneral => massart_general(inputs),
        Method::MassartBernoulli => massart_bernoulli(inputs),
    };
    debug_assert!(lower < upper, "degenerate interval: [{lower}, {upper}]");
    Ok(ConfidenceInterval {
        method,
        n: inputs.n,
        gamma: inputs.gamma,
        delta: inputs.delta,
        lower,
        upper,
        diagnostics,
    })
}

type Endpoints = (f64, f64, RootSolveDiagnostics);

fn hoeffding_general(inputs: IntervalInputs) -> Result<Endpoints, LimitError> {
    let c = inputs.target_level();
    let nf = inputs.n as f64;
    let low = solve_mu_below(inputs.gamma / nf, c)?;
    // The count says only that the sum crossed gamma somewhere in the last
    // draw; discounting that draw entirely gives the distribution-free upper
    // limit, which is vacuous until n clears gamma + 1.
    if nf <= inputs.gamma + 1.0 {
        return Ok((low.mu, 1.0, low.diagnostics));
    }
    let up = solve_mu_above(inputs.gamma / (nf - 1.0), c)?;
    Ok((low.mu, up.mu, merge(low.diagnostics, up.diagnostics)))
}

fn hoeffding_bernoulli(inputs: IntervalInputs) -> Result<Endpoints, LimitError> {
    let c = inputs.target_level();
    let nf = inputs.n as f64;
    let low = solve_mu_below(inputs.gamma / nf, c)?;
    // 0/1 draws cross gamma exactly, so the final draw needs no discount and
    // the upper tail solves at gamma/n itself.
    if nf == inputs.gamma {
        return Ok((low.mu, 1.0, low.diagnostics));
    }
    let up = solve_mu_above(inputs.gamma / nf, c)?;
    Ok((low.mu, up.mu, merge(low.diagnostics, up.diagnostics)))
}

/// Variance-adapted risk scale `9 / (2 ln(2/delta))`.
fn theta(delta: f64) -> f64 {
    9.0 / (2.0 * (2.0 / delta).ln())
}

/// Closed-form limit at effective count `count`; `sign` picks the tail
/// (-1 lower, +1 upper).
fn massart_bound(count: f64, gamma: f64, theta: f64, sign: f64) -> f64 {
    let z = gamma / count;
    let root = (1.0 + theta * gamma * (1.0 - z)).sqrt();
    z + 3.0 / (4.0 + count * theta) * (1.0 - 2.0 * z + sign * root)
}

fn massart_general(inputs: IntervalInputs) -> Endpoints {
    let theta = theta(inputs.delta);
    let nf = inputs.n as f64;
    let lower = massart_bound(nf, inputs.gamma, theta, -1.0).max(0.0);
    let upper = if nf <= inputs.gamma + 1.0 {
        1.0
    } else {
        massart_bound(nf - 1.0, inputs.gamma, theta, 1.0).min(1.0)
    };
    (lower, upper, NO_SOLVE)
}

fn massart_bernoulli(inputs: IntervalInputs) -> Endpoints {
    let theta = theta(inputs.delta);
    let nf = inputs.n as f64;
    let lower = massart_bound(nf, inputs.gamma, theta, -1.0).max(0.0);
    // At n = gamma the bound collapses algebraically to exactly 1.
    let upper = massart_bound(nf, inputs.gamma, theta, 1.0).min(1.0);
    (lower, upper, NO_SOLVE)
}
