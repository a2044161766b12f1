//! The divergence function behind the exponential stopping-count bounds,
//! and bracketed bisection solvers for its level sets.
//!
//! For a crossing threshold `z` and a candidate mean `mu`, both in the unit
//! interval,
//!
//! ```text
//! h(z, mu) = ln(mu/z) + (1/z - 1) * ln((1-mu)/(1-z))
//! ```
//!
//! extended by continuity to `h(1, mu) = ln(mu)`. Four facts make the
//! solvers safe, and all four are pinned by tests: `h` is zero exactly at
//! `mu = z` and negative everywhere else; it is strictly increasing in `mu`
//! below `z` and strictly decreasing above; and it falls to `-inf` at both
//! ends of the interval. Solving `h(z, mu) = c` for a negative level `c`
//! therefore has exactly one root on each side of `z`, and a sign-checked
//! bisection cannot miss it.

use thiserror::Error;

/// Absolute tolerance on the returned root. Bisection narrows the bracket at
/// least this far before it is allowed to stop.
pub const MU_TOLERANCE: f64 = 1e-12;

/// Largest accepted residual `|h(z, mu) - c|` at the returned root.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Hard cap on bisection steps. Unit-interval brackets exhaust f64
/// resolution near step 60, so hitting the cap means a logic error, not a
/// difficult input.
pub const MAX_ITERATIONS: u32 = 200;

// Stop early only when the residual is comfortably inside the contract;
// steep roots need a bracket a couple of decades tighter than MU_TOLERANCE.
const RESIDUAL_TARGET: f64 = RESIDUAL_TOLERANCE / 10.0;

// Bracket-expansion halvings before giving up; enough to walk eta from 0.25
// down through the whole subnormal range.
const MAX_BRACKET_HALVINGS: u32 = 1100;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DivergenceError {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    /// The residual tolerance was not reached. Valid inputs cannot produce
    /// this; treat it as an internal failure.
    #[error("bisection stalled at residual {residual:e} after {iterations} iterations")]
    Stalled { residual: f64, iterations: u32 },
    /// No floating-point bracket with the required sign change exists, e.g.
    /// the root sits closer to the boundary than f64 can represent.
    #[error("no bracket with a sign change near {side} for target level {target:e}")]
    NoBracket { side: &'static str, target: f64 },
}

/// How a root solve went: bisection steps taken, the achieved residual
/// `|h(z, mu) - c|`, and the final bracket width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolveDiagnostics {
    pub iterations: u32,
    pub residual: f64,
    pub bracket_width: f64,
}

/// A solved root together with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolve {
    pub mu: f64,
    pub diagnostics: RootSolveDiagnostics,
}

fn require(
    ok: bool,
    name: &'static str,
    value: f64,
    domain: &'static str,
) -> Result<(), DivergenceError> {
    if ok {
        Ok(())
    } else {
        Err(DivergenceError::Domain {
            name,
            value,
            domain,
        })
    }
}

fn check_mu(mu: f64) -> Result<(), DivergenceError> {
    require(mu > 0.0 && mu < 1.0, "mu", mu, "(0, 1)")
}

fn check_target(c: f64) -> Result<(), DivergenceError> {
    require(c.is_finite() && c < 0.0, "target level", c, "(-inf, 0)")
}

/// `h(z, mu)` on `0 < z <= 1`, `0 < mu < 1`; `z = 1` uses the continuous
/// extension `ln(mu)`.
pub fn h_divergence(z: f64, mu: f64) -> Result<f64, DivergenceError> {
    require(z > 0.0 && z <= 1.0, "z", z, "(0, 1]")?;
    check_mu(mu)?;
    Ok(h_unchecked(z, mu))
}

fn h_unchecked(z: f64, mu: f64) -> f64 {
    if z == 1.0 {
        return mu.ln();
    }
    // ln(mu/z) as a difference keeps tiny z honest; the second log takes the
    // ratio in one shot because 1-mu and 1-z are exact here.
    mu.ln() - z.ln() + (1.0 / z - 1.0) * ((1.0 - mu) / (1.0 - z)).ln()
}

/// Partial derivative of `h` in `mu`: `1/(mu(1-mu)) - 1/(z(1-mu))`.
/// Negative for `mu > z`, positive for `mu < z`, zero at `mu = z`.
pub fn h_partial_mu(z: f64, mu: f64) -> Result<f64, DivergenceError> {
    require(z > 0.0 && z <= 1.0, "z", z, "(0, 1]")?;
    check_mu(mu)?;
    Ok(1.0 / (mu * (1.0 - mu)) - 1.0 / (z * (1.0 - mu)))
}

/// One-sided tail bound `exp(n * z * h(z, mu))` for the event that the mean
/// of `n` draws reaches `z` under true mean `mu`. Used by the test harness
/// as the analytic side of empirical tail checks. At `z = mu` the exponent
/// vanishes and the bound is a vacuous 1.
pub fn hoeffding_tail_bound(n: u64, z: f64, mu: f64) -> Result<f64, DivergenceError> {
    require(n >= 1, "n", n as f64, "[1, inf)")?;
    require(z > 0.0 && z < 1.0, "z", z, "(0, 1)")?;
    check_mu(mu)?;
    Ok((n as f64 * z * h_unchecked(z, mu)).exp())
}

/// Solves `h(z, mu) = c` for the unique root in `(z, 1)`.
pub fn solve_mu_above(z: f64, c: f64) -> Result<RootSolve, DivergenceError> {
    require(z > 0.0 && z < 1.0, "z", z, "(0, 1)")?;
    check_target(c)?;

    // h decreases from 0 toward -inf on (z, 1): walk lo toward z until h is
    // above the level, and hi toward 1 until h is below it.
    let mut eta = 0.5 * (1.0 - z);
    let mut lo = z + eta;
    let mut halvings = 0;
    while h_unchecked(z, lo) <= c {
        eta *= 0.5;
        lo = z + eta;
        halvings += 1;
        if halvings > MAX_BRACKET_HALVINGS || lo <= z {
            return Err(DivergenceError::NoBracket {
                side: "z",
                target: c,
            });
        }
    }
    let mut eta = 0.25 * (1.0 - z);
    let mut hi = 1.0 - eta;
    let mut halvings = 0;
    while h_unchecked(z, hi) >= c {
        eta *= 0.5;
        hi = 1.0 - eta;
        halvings += 1;
        if halvings > MAX_BRACKET_HALVINGS || hi >= 1.0 {
            return Err(DivergenceError::NoBracket {
                side: "one",
                target: c,
            });
        }
    }
    bisect(lo, hi, c, Trend::Falling, |mu| h_unchecked(z, mu))
}

/// Solves `h(z, mu) = c` for the unique root in `(0, z)`. At `z = 1` the
/// extension turns the equation into `ln(mu) = c` and the root is `exp(c)`.
pub fn solve_mu_below(z: f64, c: f64) -> Result<RootSolve, DivergenceError> {
    require(z > 0.0 && z <= 1.0, "z", z, "(0, 1]")?;
    check_target(c)?;

    if z == 1.0 {
        let mu = c.exp();
        if mu <= 0.0 {
            return Err(DivergenceError::NoBracket {
                side: "zero",
                target: c,
            });
        }
        let residual = (mu.ln() - c).abs();
        return Ok(RootSolve {
            mu,
            diagnostics: RootSolveDiagnostics {
                iterations: 0,
                residual,
                bracket_width: 0.0,
            },
        });
    }

    // h increases from -inf toward 0 on (0, z).
    let mut eta = 0.25 * z;
    let mut lo = eta;
    let mut halvings = 0;
    while h_unchecked(z, lo) >= c {
        eta *= 0.5;
        lo = eta;
        halvings += 1;
        if halvings > MAX_BRACKET_HALVINGS || lo <= 0.0 {
            return Err(DivergenceError::NoBracket {
                side: "zero",
                target: c,
            });
        }
    }
    let mut eta = 0.25 * z;
    let mut hi = z - eta;
    let mut halvings = 0;
    while h_unchecked(z, hi) <= c {
        eta *= 0.5;
        hi = z - eta;
        halvings += 1;
        if halvings > MAX_BRACKET_HALVINGS || hi >= z {
            return Err(DivergenceError::NoBracket {
                side: "z",
                target: c,
            });
        }
    }
    bisect(lo, hi, c, Trend::Rising, |mu| h_unchecked(z, mu))
}

#[derive(Clone, Copy)]
enum Trend {
    Rising,
    Falling,
}

fn bisect(
    mut lo: f64,
    mut hi: f64,
    c: f64,
    trend: Trend,
    f: impl Fn(f64) -> f64,
) -> Result<RootSolve, DivergenceError> {
    debug_assert!(lo < hi);
    let mut iterations = 0;
    let mut best_mu = 0.5 * (lo + hi);
    let mut best_residual = f64::INFINITY;
    while iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if !(lo < mid && mid < hi) {
            break; // bracket exhausted at f64 resolution
        }
        iterations += 1;
        let value = f(mid);
        let residual = (value - c).abs();
        if residual < best_residual {
            best_residual = residual;
            best_mu = mid;
        }
        if hi - lo <= MU_TOLERANCE && residual <= RESIDUAL_TARGET {
            break;
        }
        let root_is_right = match trend {
            Trend::Falling => value > c,
            Trend::Rising => value < c,
        };
        if root_is_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let diagnostics = RootSolveDiagnostics {
        iterations,
        residual: best_residual,
        bracket_width: hi - lo,
    };
    if best_residual <= RESIDUAL_TOLERANCE {
        Ok(RootSolve {
            mu: best_mu,
            diagnostics,
        })
    } else {
        Err(DivergenceError::Stalled {
            residual: best_residual,
            iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // ln(delta/2)/gamma at gamma = 10, delta = 0.05, and the two roots of
    // h(1/2, mu) = c obtained from the quadratic identity
    // h(1/2, mu) = ln(4 mu (1 - mu)); values frozen from a 40-digit run.
    const C10: f64 = -0.36888794541139363;
    const LOWER_HALF: f64 = 0.22228742024407644;
    const UPPER_HALF: f64 = 0.7777125797559236;
    const EXP_C10: f64 = 0.6915028921812392;

    #[test]
    fn matches_quadratic_identity_at_half() {
        // h(1/2, mu) = ln(4 mu (1 - mu))
        for mu in [0.05, 0.25, 0.5, 0.9, 0.99] {
            let direct = h_divergence(0.5, mu).unwrap();
            let identity = (4.0 * mu * (1.0 - mu)).ln();
            assert_abs_diff_eq!(direct, identity, epsilon = 1e-13);
        }
        assert_abs_diff_eq!(
            h_divergence(0.5, 0.25).unwrap(),
            0.75f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn extension_at_z_one_is_ln_mu() {
        assert_eq!(h_divergence(1.0, 0.4).unwrap(), 0.4f64.ln());
        assert_eq!(h_divergence(1.0, 0.999).unwrap(), 0.999f64.ln());
    }

    #[test]
    fn zero_exactly_on_the_diagonal() {
        for z in [0.1, 0.37, 0.5, 0.82] {
            assert_eq!(h_divergence(z, z).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        assert!(h_divergence(0.0, 0.5).is_err());
        assert!(h_divergence(1.0 + 1e-9, 0.5).is_err());
        assert!(h_divergence(-0.2, 0.5).is_err());
        assert!(h_divergence(0.5, 0.0).is_err());
        assert!(h_divergence(0.5, 1.0).is_err());
        assert!(h_divergence(f64::NAN, 0.5).is_err());
        assert!(h_divergence(0.5, f64::NAN).is_err());
    }

    #[test]
    fn derivative_closed_form_values() {
        assert_eq!(h_partial_mu(0.5, 0.5).unwrap(), 0.0);
        // 1/(0.25*0.75) - 1/(0.5*0.75) = 16/3 - 8/3
        assert_abs_diff_eq!(h_partial_mu(0.5, 0.25).unwrap(), 8.0 / 3.0, epsilon = 1e-12);
        // 1/(0.5*0.5) - 1/(0.25*0.5) = 4 - 8
        assert_abs_diff_eq!(h_partial_mu(0.25, 0.5).unwrap(), -4.0, epsilon = 1e-12);
    }

    #[test]
    fn monotone_on_each_side_of_z() {
        let z = 0.3;
        let mut prev = h_divergence(z, 0.31).unwrap();
        for i in 1..60 {
            let mu = 0.31 + 0.011 * i as f64;
            let next = h_divergence(z, mu).unwrap();
            assert!(next < prev, "h must fall above z: mu={mu}");
            prev = next;
        }
        let mut prev = h_divergence(z, 0.29).unwrap();
        for i in 1..28 {
            let mu = 0.29 - 0.01 * i as f64;
            let next = h_divergence(z, mu).unwrap();
            assert!(next < prev, "h must fall moving away below z: mu={mu}");
            prev = next;
        }
    }

    #[test]
    fn solves_the_quadratic_case() {
        let up = solve_mu_above(0.5, C10).unwrap();
        assert_abs_diff_eq!(up.mu, UPPER_HALF, epsilon = 1e-11);
        assert!(up.diagnostics.residual <= RESIDUAL_TOLERANCE);
        assert!(up.mu > 0.5 && up.mu < 1.0);

        let down = solve_mu_below(0.5, C10).unwrap();
        assert_abs_diff_eq!(down.mu, LOWER_HALF, epsilon = 1e-11);
        assert!(down.diagnostics.residual <= RESIDUAL_TOLERANCE);
        assert!(down.mu > 0.0 && down.mu < 0.5);
    }

    #[test]
    fn z_one_closed_form() {
        let solve = solve_mu_below(1.0, C10).unwrap();
        assert_abs_diff_eq!(solve.mu, EXP_C10, epsilon = 1e-15);
        assert_eq!(solve.diagnostics.iterations, 0);
        assert!(solve.diagnostics.residual <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn near_zero_level_pins_the_root_to_z() {
        let solve = solve_mu_above(0.5, -1e-15).unwrap();
        assert!((solve.mu - 0.5).abs() < 1e-6);
        assert!(solve.diagnostics.residual <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn steep_root_still_meets_the_residual_contract() {
        // z close to 1 puts the upper root within ~1e-5 of the boundary.
        let z = 50.0 / 51.0;
        let c = (0.05f64 / 2.0).ln() / 50.0;
        let solve = solve_mu_above(z, c).unwrap();
        assert!(solve.mu > z && solve.mu < 1.0);
        let achieved = h_divergence(z, solve.mu).unwrap();
        assert!((achieved - c).abs() <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn residual_defines_the_root_even_without_closed_form() {
        let solve = solve_mu_above(0.9, -0.5).unwrap();
        assert!(solve.mu > 0.9 && solve.mu < 1.0);
        assert!((h_divergence(0.9, solve.mu).unwrap() + 0.5).abs() <= RESIDUAL_TOLERANCE);
    }

    #[test]
    fn unreachable_levels_surface_as_bracket_failures() {
        // At z = 0.9 the divergence over representable mu < 1 bottoms out
        // near -3.7: the slope toward 1 is only (1/z - 1) = 1/9, so a level
        // of -5 would need mu within ~1e-21 of 1, below f64 resolution.
        let err = solve_mu_above(0.9, -5.0).unwrap_err();
        assert!(matches!(
            err,
            DivergenceError::NoBracket { side: "one", .. }
        ));
    }

    #[test]
    fn solver_rejects_bad_levels_and_thresholds() {
        assert!(solve_mu_above(0.5, 0.0).is_err());
        assert!(solve_mu_above(0.5, 0.3).is_err());
        assert!(solve_mu_above(0.5, f64::NEG_INFINITY).is_err());
        assert!(solve_mu_above(1.0, -1.0).is_err()); // no room above z = 1
        assert!(solve_mu_below(0.0, -1.0).is_err());
        assert!(solve_mu_below(1.2, -1.0).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        // exp(1 * 0.5 * ln 0.75) = sqrt(0.75)
        assert_abs_diff_eq!(
            hoeffding_tail_bound(1, 0.5, 0.25).unwrap(),
            0.8660254037844386,
            epsilon = 1e-15
        );
        // exp(100 * 0.5 * ln 0.75) = 0.75^50
        assert_abs_diff_eq!(
            hoeffding_tail_bound(100, 0.5, 0.25).unwrap(),
            5.663216564269376e-7,
            epsilon = 1e-19
        );
        assert_eq!(hoeffding_tail_bound(7, 0.4, 0.4).unwrap(), 1.0);
        assert!(hoeffding_tail_bound(0, 0.5, 0.25).is_err());
        assert!(hoeffding_tail_bound(1, 1.0, 0.25).is_err());
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn h_is_nonpositive(z in 1e-3..0.999f64, mu in 1e-3..0.999f64) {
                let h = h_divergence(z, mu).unwrap();
                prop_assert!(h <= 1e-12, "h({z}, {mu}) = {h} must not be positive");
                if (z - mu).abs() > 1e-3 {
                    prop_assert!(h < 0.0);
                }
            }

            #[test]
            fn derivative_sign_pattern(z in 1e-3..0.999f64, mu in 1e-3..0.999f64) {
                prop_assume!((z - mu).abs() > 1e-9);
                let d = h_partial_mu(z, mu).unwrap();
                if mu > z {
                    prop_assert!(d < 0.0);
                } else {
                    prop_assert!(d > 0.0);
                }
            }

            #[test]
            fn lower_solver_meets_its_contract(z in 0.01..0.99f64, c in -30.0..-1e-4f64) {
                // Subnormals give f64 absolute resolution near 0, so the
                // lower root is representable even at very deep levels.
                let down = solve_mu_below(z, c).unwrap();
                prop_assert!(down.mu > 0.0 && down.mu < z);
                prop_assert!(down.diagnostics.residual <= RESIDUAL_TOLERANCE);
                prop_assert!((h_divergence(z, down.mu).unwrap() - c).abs() <= RESIDUAL_TOLERANCE);
            }

            #[test]
            fn upper_solver_meets_its_contract(z in 0.02..0.6f64, c in -5.0..-1e-3f64) {
                // Kept to levels whose root stays representably below 1;
                // deeper levels at high z have no f64 root at all.
                let up = solve_mu_above(z, c).unwrap();
                prop_assert!(up.mu > z && up.mu < 1.0);
                prop_assert!(up.diagnostics.residual <= RESIDUAL_TOLERANCE);
                prop_assert!((h_divergence(z, up.mu).unwrap() - c).abs() <= RESIDUAL_TOLERANCE);
            }

            #[test]
            fn upper_solver_covers_the_interval_operating_range(
                gamma in 1.0..60.0f64,
                extra in 1u64..1500u64,
                delta in 0.001..0.5f64,
            ) {
                // The exact (z, c) pairs the upper confidence limit feeds in.
                let n = gamma.ceil() as u64 + 1 + extra;
                let z = gamma / (n - 1) as f64;
                let c = (delta / 2.0).ln() / gamma;
                let up = solve_mu_above(z, c).unwrap();
                prop_assert!(up.mu > z && up.mu < 1.0);
                prop_assert!(up.diagnostics.residual <= RESIDUAL_TOLERANCE);
            }
        }
    }
}
