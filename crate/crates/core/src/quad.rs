//! Quadrature kernels shared by the analysis modules.
//!
//! Three workhorses: adaptive Simpson on a finite interval, trapezoidal
//! node-doubling for periodic integrands (circle averages), and a windowed
//! driver for improper integrals that feeds the divergence classifier.

/// Result of a node-doubling quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome {
    pub value: f64,
    pub converged: bool,
    /// Nodes skipped because the integrand was invalid there (a.e. data).
    pub invalid_nodes: usize,
}

/// Adaptive Simpson with absolute tolerance. Integrand values of `+inf`
/// short-circuit to `+inf`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !fa.is_finite() || !fb.is_finite() || !fm.is_finite() {
        return f64::INFINITY;
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !flm.is_finite() || !frm.is_finite() {
        return f64::INFINITY;
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Mean value of a 2π-periodic integrand by trapezoidal rule with node
/// doubling: starts at `n0` nodes, doubles until the relative change drops
/// below `rtol` or the node count reaches `cap`.
///
/// `f(theta)` may return `None` to mark an invalid sample (excluded from the
/// mean, counted). If more than half of the nodes are invalid the average is
/// reported as `+inf` and flagged unconverged: the integrand is singular on a
/// set the quadrature cannot resolve.
pub fn periodic_mean(
    f: &dyn Fn(f64) -> Option<f64>,
    n0: usize,
    cap: usize,
    rtol: f64,
) -> QuadOutcome {
    let two_pi = std::f64::consts::TAU;
    let mut n = n0.max(4);
    let mut prev: Option<f64> = None;
    loop {
        let mut sum = 0.0;
        let mut valid = 0usize;
        let mut invalid = 0usize;
        for i in 0..n {
            let theta = two_pi * (i as f64) / (n as f64);
            match f(theta) {
                Some(v) if v.is_finite() => {
                    sum += v;
                    valid += 1;
                }
                Some(_) => {
                    // +inf sample: genuine singularity on the circle
                    return QuadOutcome {
                        value: f64::INFINITY,
                        converged: false,
                        invalid_nodes: invalid,
                    };
                }
                None => invalid += 1,
            }
        }
        if valid * 2 < n {
            return QuadOutcome {
                value: f64::INFINITY,
                converged: false,
                invalid_nodes: invalid,
            };
        }
        let mean = sum / (valid as f64);
        if let Some(p) = prev {
            let scale = mean.abs().max(1e-300);
            if (mean - p).abs() <= rtol * scale {
                return QuadOutcome {
                    value: mean,
                    converged: true,
                    invalid_nodes: invalid,
                };
            }
        }
        if n >= cap {
            return QuadOutcome {
                value: mean,
                converged: false,
                invalid_nodes: invalid,
            };
        }
        prev = Some(mean);
        n *= 2;
    }
}

/// One truncation of an improper integral: the window `[a, b]` contribution.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub a: f64,
    pub b: f64,
    pub increment: f64,
}

/// Integrates `f` over successive windows, returning the increments in order.
/// Windows whose integral is `+inf` are kept as `+inf` increments.
pub fn window_increments(
    f: &dyn Fn(f64) -> f64,
    edges: &[f64],
    tol: f64,
) -> Vec<Window> {
    edges
        .windows(2)
        .map(|w| Window {
            a: w[0],
            b: w[1],
            increment: adaptive_simpson(f, w[0], w[1], tol),
        })
        .collect()
}
