//! Monotone-function algebra on the extended half-line.
//!
//! The analysis modules all consume non-decreasing (occasionally
//! non-increasing) functions `[0, ∞] -> [0, ∞]`: growth bounds, their
//! logarithms, and their generalized inverses
//!
//! ```text
//!   f non-decreasing:  f^{-1}(tau) = inf { t : f(t) >= tau }
//!   f non-increasing:  f^{-1}(tau) = inf { t : f(t) <= tau }
//! ```
//!
//! with `inf ∅ = ∞`. The inverse of a non-strict function is itself monotone
//! but picks the left edge of every plateau, so `f^{-1}(f(t)) <= t` with
//! equality away from intervals of constancy.

mod log_piecewise;
mod registry;

pub use log_piecewise::{ln_expm1, LogPiece, LogPiecewise, PieceShape, U_F64_MAX};
pub use registry::{parse_tag, ClosedForm, TagSpec};

use crate::ext::ExtReal;
use std::sync::Arc;
use thiserror::Error;

/// Declared monotonicity direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::NonDecreasing => Direction::NonIncreasing,
            Direction::NonIncreasing => Direction::NonDecreasing,
        }
    }
}

/// Family-level integral-condition class carried by registry entries, used to
/// cross-check (never replace) the numeric divergence protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum KnownClass {
    Divergent,
    Convergent,
}

#[derive(Debug, Error)]
pub enum MonotoneError {
    #[error("{0} is not a homeomorphism of [0, inf]: {1}")]
    NotHomeomorphism(String, String),
    #[error("function must be non-decreasing for this operation, got non-increasing")]
    WrongDirection,
    #[error("{0} is not convex on [{1}, inf): second difference {2:.3e} at t = {3:.6e}")]
    NotConvexOnTail(String, f64, f64, f64),
    #[error("tangency search exhausted on [{0:.3e}, {1:.3e}]; no touching point found")]
    TangencyNotFound(f64, f64),
    #[error("sampled data violates declared direction at t = {0}")]
    DirectionViolated(f64),
}

#[derive(Clone)]
enum FnKind {
    Closed(ClosedForm),
    LogPieces(Arc<LogPiecewise>),
    /// piecewise-linear interpolant through sorted sample points
    Sampled(Arc<Vec<(f64, f64)>>),
    /// right-continuous step function: `v0` before the first jump
    StepList {
        v0: f64,
        jumps: Arc<Vec<(f64, f64)>>,
    },
    /// `outer(inner(t))`
    Chain {
        outer: Arc<MonotoneFn>,
        inner: Arc<MonotoneFn>,
    },
    /// `alpha * base + beta`, `alpha > 0`
    Affine {
        base: Arc<MonotoneFn>,
        alpha: f64,
        beta: f64,
    },
    /// `base(max(t, t_min))`
    ClampBelow {
        base: Arc<MonotoneFn>,
        t_min: f64,
    },
    /// tail convexification: `0` on `[0, t_cut]`, a line up to `t_star`,
    /// `base` beyond
    ConvexTail {
        base: Arc<MonotoneFn>,
        t_cut: f64,
        t_star: f64,
        slope: f64,
    },
}

/// A monotone function of the extended half-line, with whatever exact
/// structure (inverse, log-derivative, breakpoints) its construction left it.
#[derive(Clone)]
pub struct MonotoneFn {
    kind: FnKind,
    direction: Direction,
    absolutely_continuous: bool,
    label: String,
    known_class: Option<KnownClass>,
}

impl std::fmt::Debug for MonotoneFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MonotoneFn({}, {:?})", self.label, self.direction)
    }
}

impl MonotoneFn {
    pub fn closed(form: ClosedForm) -> MonotoneFn {
        MonotoneFn {
            direction: form.direction(),
            absolutely_continuous: form.absolutely_continuous(),
            label: form.label(),
            known_class: form.known_class(),
            kind: FnKind::Closed(form),
        }
    }

    pub fn identity() -> MonotoneFn {
        MonotoneFn::closed(ClosedForm::Identity)
    }

    /// Piecewise-linear interpolant through `points` (sorted by `t`), held
    /// constant outside the sampled range. Monotone interpolation of monotone
    /// data introduces no oscillation.
    pub fn sampled(
        mut points: Vec<(f64, f64)>,
        direction: Direction,
    ) -> Result<MonotoneFn, MonotoneError> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in points.windows(2) {
            let ok = match direction {
                Direction::NonDecreasing => w[1].1 >= w[0].1,
                Direction::NonIncreasing => w[1].1 <= w[0].1,
            };
            if !ok {
                return Err(MonotoneError::DirectionViolated(w[1].0));
            }
        }
        Ok(MonotoneFn {
            kind: FnKind::Sampled(Arc::new(points)),
            direction,
            absolutely_continuous: true,
            label: "sampled".into(),
            known_class: None,
        })
    }

    /// Right-continuous step function with jumps at the given abscissae.
    pub fn step_list(
        v0: f64,
        mut jumps: Vec<(f64, f64)>,
        direction: Direction,
    ) -> Result<MonotoneFn, MonotoneError> {
        jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prev = v0;
        for &(t, v) in &jumps {
            let ok = match direction {
                Direction::NonDecreasing => v >= prev,
                Direction::NonIncreasing => v <= prev,
            };
            if !ok {
                return Err(MonotoneError::DirectionViolated(t));
            }
            prev = v;
        }
        Ok(MonotoneFn {
            kind: FnKind::StepList {
                v0,
                jumps: Arc::new(jumps),
            },
            direction,
            absolutely_continuous: false,
            label: "step_list".into(),
            known_class: None,
        })
    }

    pub fn from_log_pieces(pieces: LogPiecewise, label: impl Into<String>) -> MonotoneFn {
        let continuous = pieces.jumps().is_empty();
        MonotoneFn {
            kind: FnKind::LogPieces(Arc::new(pieces)),
            direction: Direction::NonDecreasing,
            absolutely_continuous: continuous,
            label: label.into(),
            known_class: Some(KnownClass::Divergent),
        }
    }

    /// `outer(inner(t))`. No exact inverse is carried: inverting the chain is
    /// exactly what the composition identities exercise.
    pub fn chain(outer: MonotoneFn, inner: MonotoneFn) -> MonotoneFn {
        let direction = if outer.direction == inner.direction {
            Direction::NonDecreasing
        } else {
            Direction::NonIncreasing
        };
        let label = format!("{} . {}", outer.label, inner.label);
        let ac = outer.absolutely_continuous && inner.absolutely_continuous;
        MonotoneFn {
            kind: FnKind::Chain {
                outer: Arc::new(outer),
                inner: Arc::new(inner),
            },
            direction,
            absolutely_continuous: ac,
            label,
            known_class: None,
        }
    }

    /// `alpha * base + beta` with `alpha > 0`.
    pub fn affine(base: MonotoneFn, alpha: f64, beta: f64) -> MonotoneFn {
        assert!(alpha > 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite());
        let label = format!("{alpha}*{} + {beta}", base.label);
        MonotoneFn {
            direction: base.direction,
            absolutely_continuous: base.absolutely_continuous,
            known_class: base.known_class,
            kind: FnKind::Affine {
                base: Arc::new(base),
                alpha,
                beta,
            },
            label,
        }
    }

    /// `base(max(t, t_min))`: freezes the function left of `t_min`.
    pub fn clamp_below(base: MonotoneFn, t_min: f64) -> MonotoneFn {
        let label = format!("{}|clamp[0,{t_min}]", base.label);
        MonotoneFn {
            direction: base.direction,
            absolutely_continuous: base.absolutely_continuous,
            known_class: base.known_class,
            kind: FnKind::ClampBelow {
                base: Arc::new(base),
                t_min,
            },
            label,
        }
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_absolutely_continuous(&self) -> bool {
        self.absolutely_continuous
    }

    pub fn known_class(&self) -> Option<KnownClass> {
        self.known_class
    }

    pub fn log_pieces(&self) -> Option<&LogPiecewise> {
        match &self.kind {
            FnKind::LogPieces(p) => Some(p),
            _ => None,
        }
    }

    /// Supremum of the zero set; `0` when the function is positive at `0`.
    pub fn zero_set_sup(&self) -> f64 {
        match &self.kind {
            FnKind::Closed(c) => c.zero_set_sup(),
            FnKind::LogPieces(p) => {
                if p.ln_eval(f64::NEG_INFINITY) == f64::NEG_INFINITY {
                    // head piece starts at 0; scan for first positive value
                    if p.eval(0.0) > 0.0 {
                        0.0
                    } else {
                        // identity-type head: only zero at t = 0
                        0.0
                    }
                } else {
                    0.0
                }
            }
            FnKind::Affine { base, beta, .. } => {
                if *beta > 0.0 {
                    0.0
                } else {
                    base.zero_set_sup()
                }
            }
            FnKind::ClampBelow { base, t_min } => {
                let s = base.zero_set_sup();
                if s <= *t_min && base.eval_f(*t_min) > 0.0 {
                    0.0
                } else {
                    s
                }
            }
            FnKind::ConvexTail { t_cut, .. } => *t_cut,
            FnKind::Sampled(points) => {
                let mut sup = 0.0;
                for &(t, v) in points.iter() {
                    if v == 0.0 {
                        sup = t;
                    } else {
                        break;
                    }
                }
                sup
            }
            FnKind::StepList { v0, jumps } => {
                if *v0 != 0.0 {
                    return 0.0;
                }
                let mut sup = 0.0;
                for &(t, v) in jumps.iter() {
                    sup = t;
                    if v != 0.0 {
                        break;
                    }
                }
                sup
            }
            FnKind::Chain { .. } => 0.0,
        }
    }

    /// Evaluation with extended-real in/out.
    pub fn eval(&self, t: ExtReal) -> ExtReal {
        ExtReal::new(self.eval_f(t.to_f64()).max(0.0))
    }

    /// Raw `f64` evaluation; `t` may be `f64::INFINITY`.
    pub fn eval_f(&self, t: f64) -> f64 {
        match &self.kind {
            FnKind::Closed(c) => c.eval(t),
            FnKind::LogPieces(p) => {
                if t.is_infinite() {
                    f64::INFINITY
                } else {
                    p.eval(t)
                }
            }
            FnKind::Sampled(points) => {
                if points.is_empty() {
                    return 0.0;
                }
                if t <= points[0].0 {
                    return points[0].1;
                }
                let last = points[points.len() - 1];
                if t >= last.0 {
                    return last.1;
                }
                let idx = points.partition_point(|p| p.0 <= t);
                let (t0, v0) = points[idx - 1];
                let (t1, v1) = points[idx];
                if t1 == t0 {
                    v1
                } else {
                    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
                }
            }
            FnKind::StepList { v0, jumps } => {
                let idx = jumps.partition_point(|j| j.0 <= t);
                if idx == 0 {
                    *v0
                } else {
                    jumps[idx - 1].1
                }
            }
            FnKind::Chain { outer, inner } => outer.eval_f(inner.eval_f(t)),
            FnKind::Affine { base, alpha, beta } => alpha * base.eval_f(t) + beta,
            FnKind::ClampBelow { base, t_min } => base.eval_f(t.max(*t_min)),
            FnKind::ConvexTail {
                base,
                t_cut,
                t_star,
                slope,
            } => {
                if t <= *t_cut {
                    0.0
                } else if t < *t_star {
                    slope * (t - t_cut)
                } else {
                    base.eval_f(t)
                }
            }
        }
    }

    /// `log f(t)`, exact where the construction supports it, so the
    /// logarithm stays finite even when the value itself overflows `f64`.
    pub fn ln_value(&self, t: f64) -> f64 {
        match &self.kind {
            FnKind::Closed(c) => c.ln_eval(t),
            FnKind::LogPieces(p) => {
                if t.is_infinite() {
                    f64::INFINITY
                } else if t == 0.0 {
                    p.ln_eval(f64::NEG_INFINITY)
                } else {
                    p.ln_eval(t.ln())
                }
            }
            FnKind::Affine { base, alpha, beta } => {
                let lnb = base.ln_value(t);
                if *beta == 0.0 {
                    alpha.ln() + lnb
                } else {
                    crate::ext::log_add_exp(alpha.ln() + lnb, beta.ln())
                }
            }
            FnKind::ClampBelow { base, t_min } => base.ln_value(t.max(*t_min)),
            FnKind::Chain { outer, inner } => outer.ln_value(inner.eval_f(t)),
            _ => self.eval_f(t).ln(),
        }
    }

    /// `ln f(e^u)` where the function supports log-scale evaluation; falls
    /// back to linear evaluation in range.
    pub fn ln_eval_u(&self, u: f64) -> f64 {
        match &self.kind {
            FnKind::LogPieces(p) => p.ln_eval(u),
            _ => {
                let t = if u > U_F64_MAX { f64::INFINITY } else { u.exp() };
                self.ln_value(t)
            }
        }
    }

    /// Exact generalized inverse at `tau`, when the construction carries one.
    pub fn exact_inverse_at(&self, tau: f64) -> Option<f64> {
        match &self.kind {
            FnKind::Closed(c) => c.exact_inverse(tau),
            FnKind::LogPieces(p) => {
                let u = p.u_inverse(if tau <= 0.0 { f64::NEG_INFINITY } else { tau.ln() });
                Some(if u == f64::NEG_INFINITY {
                    0.0
                } else if u > U_F64_MAX {
                    f64::INFINITY
                } else {
                    u.exp()
                })
            }
            FnKind::Affine { base, alpha, beta } => {
                let x = (tau - beta) / alpha;
                base.exact_inverse_at(x)
            }
            FnKind::ClampBelow { base, t_min } => {
                let at_min = base.eval_f(*t_min);
                match self.direction {
                    Direction::NonDecreasing if at_min >= tau => Some(0.0),
                    Direction::NonIncreasing if at_min <= tau => Some(0.0),
                    _ => base.exact_inverse_at(tau),
                }
            }
            _ => None,
        }
    }

    /// Exact `(log f)'` where known.
    pub fn h_prime_exact(&self, t: f64) -> Option<f64> {
        match &self.kind {
            FnKind::Closed(c) => c.h_prime(t),
            FnKind::LogPieces(p) => {
                if t <= 0.0 {
                    return Some(0.0);
                }
                Some(p.pieces[p.piece_index_at(t.ln())].h_prime_off(t.ln() - p.pieces[p.piece_index_at(t.ln())].anchor()))
            }
            _ => None,
        }
    }

    /// `(log f)'(t)`: exact where known, otherwise a central difference of
    /// `log f` with relative step `1e-6`.
    pub fn h_prime(&self, t: f64) -> f64 {
        if let Some(v) = self.h_prime_exact(t) {
            return v;
        }
        let h = 1e-6 * t.max(1e-6);
        let lo = self.eval_f((t - h).max(0.0)).ln();
        let hi = self.eval_f(t + h).ln();
        if !lo.is_finite() || !hi.is_finite() {
            return 0.0;
        }
        ((hi - lo) / (2.0 * h)).max(0.0)
    }

    /// Probes strict monotonicity and surjectivity onto `[0, ∞]`, the
    /// homeomorphism precondition of the composition identities.
    pub fn check_homeomorphism(&self) -> Result<(), MonotoneError> {
        if let FnKind::Closed(c) = &self.kind {
            if c.is_homeomorphism() {
                return Ok(());
            }
        }
        let v0 = self.eval_f(0.0);
        let vi = self.eval_f(f64::INFINITY);
        let endpoints_ok = match self.direction {
            Direction::NonDecreasing => v0 == 0.0 && vi.is_infinite(),
            Direction::NonIncreasing => v0.is_infinite() && vi == 0.0,
        };
        if !endpoints_ok {
            return Err(MonotoneError::NotHomeomorphism(
                self.label.clone(),
                format!("endpoints map to ({v0}, {vi}), not onto [0, inf]"),
            ));
        }
        let mut prev = v0;
        for i in 1..=64 {
            let t = 10f64.powf(-6.0 + 12.0 * (i as f64) / 64.0);
            let v = self.eval_f(t);
            let strict = match self.direction {
                Direction::NonDecreasing => v > prev,
                Direction::NonIncreasing => v < prev,
            };
            if !strict {
                return Err(MonotoneError::NotHomeomorphism(
                    self.label.clone(),
                    format!("not strictly monotone near t = {t:.3e}"),
                ));
            }
            prev = v;
        }
        Ok(())
    }
}

/// How an inverse evaluates: through a closed form or by bisection on the
/// forward evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum InverseMethod {
    Exact,
    Bisection,
}

/// Relative bisection tolerance. Inverse values feed integrands of slowly
/// divergent integrals, so this is kept tight.
pub const INVERSE_REL_TOL: f64 = 1e-12;
pub const INVERSE_MAX_ITER: usize = 200;

/// The generalized inverse of a `MonotoneFn`.
#[derive(Clone)]
pub struct InverseFn {
    source: MonotoneFn,
    method: InverseMethod,
    direction: Direction,
}

impl InverseFn {
    pub fn method(&self) -> InverseMethod {
        self.method
    }

    /// Direction of the inverse (same as the source's).
    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn eval(&self, tau: ExtReal) -> ExtReal {
        ExtReal::new(self.eval_f(tau.to_f64()))
    }

    pub fn eval_f(&self, tau: f64) -> f64 {
        if self.method == InverseMethod::Exact {
            if let Some(v) = self.source.exact_inverse_at(tau) {
                return v;
            }
        }
        match self.direction {
            Direction::NonDecreasing => bisect_inf_ge(&self.source, tau),
            Direction::NonIncreasing => bisect_inf_le(&self.source, tau),
        }
    }
}

/// `inf { t : f(t) >= tau }` for non-decreasing `f`, by bracketed bisection.
fn bisect_inf_ge(f: &MonotoneFn, tau: f64) -> f64 {
    if tau <= 0.0 || f.eval_f(0.0) >= tau {
        return 0.0;
    }
    if tau.is_infinite() {
        // only t = inf can reach an infinite value for the finite-valued
        // functions in scope
        return f64::INFINITY;
    }
    let mut hi = 1.0;
    let mut lo = 0.0;
    while f.eval_f(hi) < tau {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    bisect(f, lo, hi, |v| v >= tau)
}

/// `inf { t : f(t) <= tau }` for non-increasing `f`.
fn bisect_inf_le(f: &MonotoneFn, tau: f64) -> f64 {
    if f.eval_f(0.0) <= tau {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut lo = 0.0;
    while f.eval_f(hi) > tau {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    bisect(f, lo, hi, |v| v <= tau)
}

/// Shrinks `[lo, hi]` with `pred(f(hi))` true, `pred(f(lo))` false; returns
/// the certified side `hi`.
fn bisect(f: &MonotoneFn, mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..INVERSE_MAX_ITER {
        let tol = if hi < 1.0 {
            INVERSE_REL_TOL
        } else {
            INVERSE_REL_TOL * hi
        };
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(f.eval_f(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Generalized inversion: exact when the source knows its inverse, bisection
/// on the evaluator otherwise. Total on every valid `MonotoneFn`.
pub fn invert(f: &MonotoneFn) -> InverseFn {
    let method = if f.exact_inverse_at(1.0).is_some() {
        InverseMethod::Exact
    } else {
        InverseMethod::Bisection
    };
    InverseFn {
        direction: f.direction,
        source: f.clone(),
        method,
    }
}

/// Evaluates `f^{-1}(f(t))` and whether it stays `<= t` (up to bisection
/// tolerance). Equality holds off intervals of constancy; at a plateau the
/// inverse lands on the plateau's left edge, which is why both values are
/// returned rather than adjudicated.
pub fn check_inverse_identity(
    f: &MonotoneFn,
    t: ExtReal,
) -> Result<(ExtReal, bool), MonotoneError> {
    if f.direction != Direction::NonDecreasing {
        return Err(MonotoneError::WrongDirection);
    }
    let inv = invert(f);
    let lhs = inv.eval(f.eval(t));
    let slack = match t {
        ExtReal::Finite(v) => 1e-9 * v.max(1.0),
        ExtReal::Infinity => 0.0,
    };
    let holds = match (lhs, t) {
        (ExtReal::Infinity, ExtReal::Infinity) => true,
        (ExtReal::Infinity, ExtReal::Finite(_)) => false,
        (ExtReal::Finite(l), ExtReal::Finite(tv)) => l <= tv + slack,
        (ExtReal::Finite(_), ExtReal::Infinity) => true,
    };
    Ok((lhs, holds))
}

/// Which way the two functions compose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComposeOrder {
    /// `psi ∘ phi`: the inverse factors exactly as `phi^{-1} ∘ psi^{-1}`.
    PsiAfterPhi,
    /// `phi ∘ psi`: `[phi ∘ psi]^{-1} <= psi^{-1} ∘ phi^{-1}`, with equality
    /// off a countable set (plateau images of `phi`).
    PhiAfterPsi,
}

/// Inverts a composition two ways: directly (generalized inverse of the
/// composed evaluator) and factored through the individual inverses. `psi`
/// must be a monotone homeomorphism of `[0, ∞]`.
pub fn compose_inverse(
    psi: &MonotoneFn,
    phi: &MonotoneFn,
    order: ComposeOrder,
    tau: ExtReal,
) -> Result<(ExtReal, ExtReal), MonotoneError> {
    psi.check_homeomorphism()?;
    let psi_inv = invert(psi);
    let phi_inv = invert(phi);
    let (composed, factored) = match order {
        ComposeOrder::PsiAfterPhi => {
            let chain = MonotoneFn::chain(psi.clone(), phi.clone());
            (invert(&chain).eval(tau), phi_inv.eval(psi_inv.eval(tau)))
        }
        ComposeOrder::PhiAfterPsi => {
            let chain = MonotoneFn::chain(phi.clone(), psi.clone());
            (invert(&chain).eval(tau), psi_inv.eval(phi_inv.eval(tau)))
        }
    };
    Ok((composed, factored))
}

/// Replaces a function that is convex only on `[T, ∞]` by a globally convex
/// minorant: zero up to `T`, then the line from `(T, 0)` that touches the
/// graph at `(T*, f(T*))`, then `f` itself.
///
/// Returns the new function together with the tangency abscissa `T*`.
pub fn convexify_tail(
    phi: &MonotoneFn,
    t_cut: f64,
) -> Result<(MonotoneFn, f64), MonotoneError> {
    if phi.direction != Direction::NonDecreasing {
        return Err(MonotoneError::WrongDirection);
    }
    check_convex_on_tail(phi, t_cut)?;

    if phi.eval_f(t_cut) == 0.0 {
        // the graph already touches (T, 0): nothing to cut
        let out = MonotoneFn {
            kind: FnKind::ConvexTail {
                base: Arc::new(phi.clone()),
                t_cut,
                t_star: t_cut,
                slope: 0.0,
            },
            direction: Direction::NonDecreasing,
            absolutely_continuous: phi.absolutely_continuous,
            label: format!("convexify({}, {t_cut})", phi.label),
            known_class: phi.known_class,
        };
        return Ok((out, t_cut));
    }

    // Tangency: minimize the secant slope s(x) = f(x)/(x - T) over x > T.
    // For convex f the tangent line from (T, 0) touches where s is minimal.
    let span_hi = (t_cut.abs().max(1.0)) * 1e12;
    let affine_tol = 1e-9;

    // affine tail: constant chord slope means the tangent line from (T, 0)
    // only attaches at infinity; convention T* = T with the line of that
    // slope (equivalently f(t) - f(T))
    let d1 = chord_slope(phi, t_cut, t_cut + 1.0);
    let d2 = chord_slope(phi, 0.5 * span_hi, span_hi);
    if (d1 - d2).abs() <= affine_tol * d1.abs().max(1.0) {
        let slope = d1;
        let out = MonotoneFn {
            kind: FnKind::ConvexTail {
                base: Arc::new(MonotoneFn::affine(phi.clone(), 1.0, 0.0)),
                t_cut,
                t_star: f64::INFINITY,
                slope,
            },
            direction: Direction::NonDecreasing,
            absolutely_continuous: phi.absolutely_continuous,
            label: format!("convexify({}, {t_cut})", phi.label),
            known_class: phi.known_class,
        };
        return Ok((out, t_cut));
    }

    // golden-section minimum of s(x) on (T, span_hi], searched in
    // y = ln(x - T)
    let slope_at = |y: f64| -> f64 {
        let x = t_cut + y.exp();
        phi.eval_f(x) / (x - t_cut)
    };
    let mut a = (1e-12 * t_cut.max(1.0)).ln();
    let mut b = (span_hi - t_cut).ln();
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = slope_at(c);
    let mut fd = slope_at(d);
    for _ in 0..300 {
        if b - a < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = slope_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = slope_at(d);
        }
    }
    let y_star = 0.5 * (a + b);
    let t_star = t_cut + y_star.exp();
    let slope = slope_at(y_star);

    if t_star >= span_hi * 0.5 {
        return Err(MonotoneError::TangencyNotFound(t_cut, span_hi));
    }

    // the tangent line must minorize f on a probe grid
    for i in 0..200 {
        let x = t_cut + (i as f64 + 0.5) / 200.0 * 4.0 * (t_star - t_cut);
        let line = slope * (x - t_cut);
        let v = phi.eval_f(x);
        if line > v * (1.0 + 1e-8) + 1e-12 {
            return Err(MonotoneError::TangencyNotFound(t_cut, span_hi));
        }
    }

    let out = MonotoneFn {
        kind: FnKind::ConvexTail {
            base: Arc::new(phi.clone()),
            t_cut,
            t_star,
            slope,
        },
        direction: Direction::NonDecreasing,
        absolutely_continuous: phi.absolutely_continuous,
        label: format!("convexify({}, {t_cut})", phi.label),
        known_class: phi.known_class,
    };
    Ok((out, t_star))
}

fn chord_slope(f: &MonotoneFn, a: f64, b: f64) -> f64 {
    (f.eval_f(b) - f.eval_f(a)) / (b - a)
}

fn check_convex_on_tail(phi: &MonotoneFn, t_cut: f64) -> Result<(), MonotoneError> {
    let base = t_cut.max(1e-6);
    for i in 0..60 {
        let t = base * (1.0 + 0.35 * i as f64);
        let h = 1e-3 * t;
        let second = phi.eval_f(t + h) + phi.eval_f((t - h).max(t_cut)) - 2.0 * phi.eval_f(t);
        let scale = phi.eval_f(t).abs().max(1.0);
        if second < -1e-7 * scale {
            return Err(MonotoneError::NotConvexOnTail(
                phi.label.clone(),
                t_cut,
                second,
                t,
            ));
        }
        if !phi.eval_f(t + h).is_finite() {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn ext(v: f64) -> ExtReal {
        ExtReal::new(v)
    }

    #[test]
    fn identity_inverts_to_itself() {
        let f = MonotoneFn::identity();
        let inv = invert(&f);
        assert_eq!(inv.method(), InverseMethod::Exact);
        for tau in [0.0, 0.5, 3.0, 1e6] {
            assert_eq!(inv.eval(ext(tau)), ext(tau));
        }
    }

    #[test]
    fn exp_inverse_endpoints() {
        let f = MonotoneFn::closed(ClosedForm::Exp { p: 1.0 });
        let inv = invert(&f);
        assert_eq!(inv.eval(ext(1.0)), ext(0.0));
        let e = std::f64::consts::E;
        assert!((inv.eval(ext(e)).to_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_inverse_matches_grid_oracle() {
        let f = MonotoneFn::closed(ClosedForm::Step { t0: 1.0, v: 2.0 });
        let inv = invert(&f);
        assert_eq!(inv.eval(ext(1.0)), ext(1.0));
        assert_eq!(inv.eval(ext(3.0)), ExtReal::Infinity);
        // brute-force inf over the reference grid agrees
        let oracle_1 = oracle::grid_inf_ge(&f, 1.0);
        assert!(oracle::within_cell(inv.eval_f(1.0), oracle_1));
        assert_eq!(oracle::grid_inf_ge(&f, 3.0), f64::INFINITY);
    }

    #[test]
    fn bisection_inverse_without_closed_form() {
        // iwaniec_martin has no closed-form inverse: check against the
        // forward map
        let f = MonotoneFn::closed(ClosedForm::IwaniecMartin { p: 1.0 });
        let inv = invert(&f);
        assert_eq!(inv.method(), InverseMethod::Bisection);
        let tau = 100.0;
        let t = inv.eval_f(tau);
        assert!((f.eval_f(t) - tau).abs() < 1e-6 * tau);
    }

    #[test]
    fn inverse_identity_inequality() {
        let sq = MonotoneFn::closed(ClosedForm::Power { lambda: 2.0 });
        let (lhs, holds) = check_inverse_identity(&sq, ext(3.0)).unwrap();
        assert!(holds);
        assert!((lhs.to_f64() - 3.0).abs() < 1e-9);

        let step = MonotoneFn::closed(ClosedForm::Step { t0: 1.0, v: 2.0 });
        let (lhs, holds) = check_inverse_identity(&step, ext(1.5)).unwrap();
        assert!(holds);
        // the plateau pulls the inverse back to its left edge
        assert!((lhs.to_f64() - 1.0).abs() < 1e-9);

        let e = MonotoneFn::closed(ClosedForm::Exp { p: 1.0 });
        let (lhs, holds) = check_inverse_identity(&e, ext(0.0)).unwrap();
        assert!(holds);
        assert_eq!(lhs, ext(0.0));
    }

    #[test]
    fn composition_identity_exact_for_psi_after_phi() {
        // psi = 1/t (reversing homeo), phi = t^2
        let psi = MonotoneFn::closed(ClosedForm::Reciprocal);
        let phi = MonotoneFn::closed(ClosedForm::Power { lambda: 2.0 });
        // [phi . psi]^{-1}(4) = 1/2 = psi^{-1}(phi^{-1}(4))
        let (composed, factored) =
            compose_inverse(&psi, &phi, ComposeOrder::PhiAfterPsi, ext(4.0)).unwrap();
        assert!((composed.to_f64() - 0.5).abs() < 1e-9);
        assert!((factored.to_f64() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn composition_strict_inequality_at_plateau_image() {
        // phi = step (plateau at value 0 on [0,1)), psi = 1/t
        let psi = MonotoneFn::closed(ClosedForm::Reciprocal);
        let phi = MonotoneFn::closed(ClosedForm::Step { t0: 1.0, v: 2.0 });
        // tau = 0 is a plateau-image value: composed < factored
        let (composed, factored) =
            compose_inverse(&psi, &phi, ComposeOrder::PhiAfterPsi, ext(0.0)).unwrap();
        assert!((composed.to_f64() - 1.0).abs() < 1e-9, "{composed:?}");
        assert!(factored.is_infinite(), "{factored:?}");
    }

    #[test]
    fn composition_sense_preserving_equality() {
        let psi = MonotoneFn::closed(ClosedForm::Log1p);
        let phi = MonotoneFn::closed(ClosedForm::Power { lambda: 2.0 });
        for tau in [0.3, 1.0, 2.5] {
            let (composed, factored) =
                compose_inverse(&psi, &phi, ComposeOrder::PsiAfterPhi, ext(tau)).unwrap();
            assert!(
                (composed.to_f64() - factored.to_f64()).abs()
                    < 1e-8 * factored.to_f64().max(1.0),
                "tau={tau}: {composed:?} vs {factored:?}"
            );
        }
    }

    #[test]
    fn rejects_non_homeomorphic_psi() {
        // e^{pt} maps 0 to 1: not onto [0, inf]
        let psi = MonotoneFn::closed(ClosedForm::Exp { p: 1.0 });
        let phi = MonotoneFn::identity();
        let err = compose_inverse(&psi, &phi, ComposeOrder::PsiAfterPhi, ext(1.0));
        assert!(err.is_err());
    }

    #[test]
    fn convexify_exp_tangent_at_two() {
        // line from (1, 0) touching e^t does so at t = 2 with slope e^2
        let f = MonotoneFn::closed(ClosedForm::Exp { p: 1.0 });
        let (g, t_star) = convexify_tail(&f, 1.0).unwrap();
        assert!((t_star - 2.0).abs() < 1e-6, "t_star = {t_star}");
        assert_eq!(g.eval_f(0.5), 0.0);
        assert_eq!(g.eval_f(1.0), 0.0);
        // on [1, 2]: the tangent line; beyond: e^t
        let e2 = (2.0f64).exp();
        assert!((g.eval_f(1.5) - 0.5 * e2).abs() < 1e-4);
        for t in [2.5, 4.0, 10.0] {
            assert!((g.eval_f(t) - t.exp()).abs() < 1e-9 * t.exp());
        }
        // minorant everywhere
        for i in 1..100 {
            let t = 0.1 * i as f64;
            assert!(g.eval_f(t) <= f.eval_f(t) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn convexify_affine_input_degenerates() {
        let f = MonotoneFn::identity();
        let (g, t_star) = convexify_tail(&f, 1.0).unwrap();
        assert_eq!(t_star, 1.0);
        // shifted line t - 1 beyond the cut
        assert!((g.eval_f(3.0) - 2.0).abs() < 1e-6);
        assert_eq!(g.eval_f(0.2), 0.0);
    }

    #[test]
    fn convexify_zero_cut_returns_phi() {
        let f = MonotoneFn::closed(ClosedForm::Power { lambda: 2.0 });
        let (g, t_star) = convexify_tail(&f, 0.0).unwrap();
        assert_eq!(t_star, 0.0);
        for t in [0.5, 1.0, 7.0] {
            assert!((g.eval_f(t) - f.eval_f(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn convexify_output_is_convex() {
        let f = MonotoneFn::closed(ClosedForm::Exp { p: 1.0 });
        let (g, _) = convexify_tail(&f, 1.0).unwrap();
        // nonnegative second differences across the breakpoints
        for i in 0..400 {
            let t = 0.02 + i as f64 * 0.02;
            let h = 0.01;
            let second = g.eval_f(t + h) + g.eval_f((t - h).max(0.0)) - 2.0 * g.eval_f(t);
            assert!(
                second >= -1e-7 * g.eval_f(t + h).max(1.0),
                "second difference {second} at t = {t}"
            );
        }
    }

    #[test]
    fn affine_wrapper_inverse_delegates() {
        let f = MonotoneFn::affine(MonotoneFn::closed(ClosedForm::Power { lambda: 2.0 }), 3.0, 2.0);
        let inv = invert(&f);
        // 3 t^2 + 2 = 14 -> t = 2
        assert!((inv.eval_f(14.0) - 2.0).abs() < 1e-12);
        // below beta: everything qualifies
        assert_eq!(inv.eval_f(1.0), 0.0);
    }
}
