//! Brute-force reference evaluators for the test suites.
//!
//! Everything here is deliberately independent of the production code paths
//! it checks: generalized inverses are recomputed as a literal `inf` over a
//! fixed evaluation grid, and integrals as plain antiderivative differences.

use crate::ext::ExtReal;
use crate::monotone::{Direction, MonotoneFn};

/// Grid resolution of the brute-force inf: a log-uniform sweep of
/// `[1e-6, 1e6]` preceded by `0` and followed by `∞`.
pub const GRID_POINTS: usize = 10_000;

/// The reference grid: `0`, then log-uniform points, then `∞`.
pub fn reference_grid() -> Vec<f64> {
    let mut g = Vec::with_capacity(GRID_POINTS + 2);
    g.push(0.0);
    let n = GRID_POINTS;
    for i in 0..n {
        let x = -6.0 + 12.0 * (i as f64) / ((n - 1) as f64);
        g.push(10f64.powf(x));
    }
    g.push(f64::INFINITY);
    g
}

/// Literal `inf { t in grid : f(t) >= tau }`, the generalized inverse of a
/// non-decreasing function at grid resolution.
pub fn grid_inf_ge(f: &MonotoneFn, tau: f64) -> f64 {
    for t in reference_grid() {
        if f.eval_f(t) >= tau {
            return t;
        }
    }
    f64::INFINITY
}

/// Literal `inf { t in grid : f(t) <= tau }` for non-increasing functions.
pub fn grid_inf_le(f: &MonotoneFn, tau: f64) -> f64 {
    for t in reference_grid() {
        if f.eval_f(t) <= tau {
            return t;
        }
    }
    f64::INFINITY
}

/// Dispatches on the declared direction.
pub fn grid_inverse(f: &MonotoneFn, tau: f64) -> f64 {
    match f.direction() {
        Direction::NonDecreasing => grid_inf_ge(f, tau),
        Direction::NonIncreasing => grid_inf_le(f, tau),
    }
}

/// Whether `value` agrees with a grid-inf `oracle` up to one grid cell.
///
/// The grid inf always lands on a grid point at or above the true infimum,
/// so agreement means: `value` is not above the oracle (plus slack), and not
/// below the grid point preceding it.
pub fn within_cell(value: f64, oracle: f64) -> bool {
    if oracle.is_infinite() {
        return value.is_infinite() || value > 1e250;
    }
    if value.is_infinite() {
        return false;
    }
    let below = prev_grid_point(oracle);
    let slack = 1e-9 * oracle.abs().max(1e-9);
    value <= oracle + slack && value >= below - slack
}

fn prev_grid_point(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // one log-uniform cell below x (cell width of the reference grid)
    let step = 12.0 / ((GRID_POINTS - 1) as f64);
    let lx = x.log10();
    if lx <= -6.0 {
        return 0.0;
    }
    10f64.powf(lx - step)
}

/// `tau` wrapped into the extended half-line for convenience in assertions.
pub fn ext(v: f64) -> ExtReal {
    ExtReal::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::ClosedForm;

    #[test]
    fn grid_inf_on_identity_is_tight() {
        let f = MonotoneFn::identity();
        let v = grid_inf_ge(&f, 2.0);
        assert!(v >= 2.0 && v < 2.01, "oracle {v}");
        assert!(within_cell(2.0, v));
    }

    #[test]
    fn empty_set_returns_infinity() {
        let f = MonotoneFn::closed(ClosedForm::Step { t0: 1.0, v: 2.0 });
        assert_eq!(grid_inf_ge(&f, 5.0), f64::INFINITY);
    }
}
