//! Interval estimation for the mean of a [0, 1]-valued random variable
//! observed through inverse sampling: i.i.d. draws continue until the running
//! sum first reaches a preset threshold `gamma`, and the random sample count
//! `n` is what carries the information.
//!
//! The crate is organized bottom-up:
//!
//! * [`divergence`] - the log-scale divergence function the exponential tail
//!   bounds are built from, with bracketed bisection solvers for its roots.
//! * [`limits`] - the four confidence limit constructions (Hoeffding-style
//!   solved limits and Massart-style closed forms, each with a Bernoulli
//!   refinement) behind a single dispatcher.
//! * [`sampling`] - bounded-support distributions, seeded sample streams and
//!   the stopping rule itself.
//! * [`harness`] - Monte Carlo experiments: coverage over a grid, stopping
//!   count sanity via Wald's identity, and empirical tail-bound checks.
//! * [`report`] - flat row records rendered as CSV, newline-delimited JSON or
//!   a human table.
//! * [`cli`] - the `invseq` command-line front end.

pub mod cli;
pub mod divergence;
pub mod harness;
pub mod limits;
pub mod report;
pub mod sampling;

pub use divergence::{h_divergence, h_partial_mu, solve_mu_above, solve_mu_below};
pub use limits::{interval, ConfidenceInterval, IntervalInputs, Method};
pub use sampling::{run_inverse_sampling, BoundedDistribution, StoppingRecord};
