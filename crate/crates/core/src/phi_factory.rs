//! Sewn growth functions: inductive alternation of linear and exponential
//! pieces with prescribed pathological asymptotics, plus the certificates
//! that verify every claimed property of a finite-depth build.
//!
//! The construction starts from the fixed seed
//!
//! ```text
//!   phi_1(t) = t              on [1, e]       (gamma_1* = e)
//!   psi_1(t) = e^{-(e-1)} e^t on [e, e+1]     (gamma_1  = e+1)
//! ```
//!
//! and at each level splices a linear piece `alpha_{n+1} + beta_{n+1} t`
//! (continuous at `gamma_n`, slope-matched for the convex variant) followed
//! by an exponential piece `a_{n+1} e^{b_{n+1} t}` chosen so that
//!
//! - the linear piece runs until its value is caught by `t^{1+1/n}`
//!   (the mechanism that drags `log Phi(t)/log t` back toward 1), and
//! - the exponential piece reaches far enough that `log Phi(t) >= t` on a
//!   window of logarithmic length 1 below `gamma_{n+1}` (the mechanism that
//!   makes `int log Phi(t) dt/t^2` diverge: each window adds more than
//!   `1 - 1/e`).
//!
//! Breakpoints grow as an exponential tower: by depth 4 they exceed `f64`
//! linear range and their spacing in `ln t` sits below one ULP, so levels
//! are built and verified entirely in anchored offset arithmetic (see
//! `monotone::LogPiecewise`). Depth 5 would need the logarithm of a value
//! whose logarithm already overflows; construction reports range exhaustion
//! there rather than degrade silently.
//!
//! Variants override the spliced piece: slope 1 (monotone but no longer
//! convex), plateaus (discontinuous staircase), or slopes `eps_n -> 0`
//! (kills `liminf Phi(t)/t` while the divergence claims survive).

use crate::conditions::{evaluate_condition, ConditionId, DivergenceClass, Protocol};
use crate::ext::serde_f64_ext;
use crate::monotone::{LogPiece, LogPiecewise, MonotoneFn, PieceShape};
use serde::{Deserialize, Serialize};
use thiserror::Error;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Convex,
    Nonconvex,
    Step,
    SublinearTail,
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("depth must be at least 1, got {0}")]
    BadDepth(usize),
    #[error("level {level}: parameter search exhausted for {inequality}")]
    SearchExhausted { level: usize, inequality: String },
    #[error("level {level}: {quantity} exceeds the representable log range; the tower construction cannot continue in f64")]
    RangeExhausted { level: usize, quantity: String },
    #[error("sublinear schedule: {0}")]
    InvalidEps(String),
}

/// Construction record of one level. Level 1 is the fixed seed; level
/// `n >= 2` holds the spliced linear (or plateau) piece on
/// `[gamma_{n-1}, gamma_n*]` and the exponential piece on
/// `[gamma_n*, gamma_n]`. Positions are `ln` values; extents (`span_*`)
/// are exact offsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n: usize,
    /// `ln beta_n`; `-inf` for a plateau
    #[serde(with = "serde_f64_ext")]
    pub ln_beta: f64,
    pub u_gamma_prev: f64,
    pub ln_v_gamma_prev: f64,
    pub span_linear: f64,
    pub u_gamma_star: f64,
    pub ln_v_gamma_star: f64,
    pub b: f64,
    /// `ln a_n = ln v* - b gamma*` when representable
    pub ln_a: Option<f64>,
    pub span_exp: f64,
    pub u_gamma: f64,
    /// `ln Phi(gamma_n)`; saturates to `+inf` beyond the log range
    #[serde(with = "serde_f64_ext")]
    pub ln_v_gamma: f64,
    /// sublinear slope used at this level, if any
    pub eps: Option<f64>,
}

impl LevelRecord {
    /// `alpha_n = v_{n-1} - beta_n gamma_{n-1}` in linear scale, when
    /// representable.
    pub fn alpha(&self) -> Option<f64> {
        let v = self.ln_v_gamma_prev.exp();
        let beta = self.ln_beta.exp();
        let g = self.u_gamma_prev.exp();
        let a = v - beta * g;
        a.is_finite().then_some(a)
    }
}

/// A finite-depth sewn function with its construction metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SewnPhi {
    pub variant: Variant,
    pub depth: usize,
    pub levels: Vec<LevelRecord>,
    pub pieces: LogPiecewise,
}

impl SewnPhi {
    /// The function as a `MonotoneFn` on `[0, ∞]`: identity on `[0, 1]`,
    /// the sewn pieces up to `gamma_depth`, and the last exponential piece
    /// continued to `∞`.
    pub fn to_monotone(&self) -> MonotoneFn {
        MonotoneFn::from_log_pieces(
            self.pieces.clone(),
            format!("sewn_{:?}(depth {})", self.variant, self.depth),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sewn serialization")
    }

    pub fn from_json(text: &str) -> Result<SewnPhi, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }

    pub fn load(path: &std::path::Path) -> Result<SewnPhi, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        SewnPhi::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Convex build: slope-matched linear pieces; the certificate checks
/// convexity across every breakpoint.
pub fn build_convex(depth: usize) -> Result<SewnPhi, BuildError> {
    build(Variant::Convex, depth, &[])
}

/// Monotone but non-convex: every spliced line has slope 1.
pub fn build_nonconvex(depth: usize) -> Result<SewnPhi, BuildError> {
    build(Variant::Nonconvex, depth, &[])
}

/// Discontinuous staircase: plateaus above `max(gamma_n, Phi(gamma_n))`
/// running until the diagonal catches up at `gamma_{n+1}* = alpha_{n+1}`.
pub fn build_step(depth: usize) -> Result<SewnPhi, BuildError> {
    build(Variant::Step, depth, &[])
}

/// Slopes `eps_n -> 0`: at each checkpoint `gamma_{n+1}*` the ratio
/// `Phi/t` drops below `2 eps_n`. Defaults to `eps_n = 2^{-n}` when the
/// schedule runs short.
pub fn build_sublinear_tail(depth: usize, eps_schedule: &[f64]) -> Result<SewnPhi, BuildError> {
    for (i, e) in eps_schedule.iter().enumerate() {
        if !(*e > 0.0 && *e < 1.0) {
            return Err(BuildError::InvalidEps(format!(
                "eps[{i}] = {e} outside (0, 1)"
            )));
        }
        if i > 0 && eps_schedule[i] > eps_schedule[i - 1] {
            return Err(BuildError::InvalidEps(
                "schedule must be non-increasing".into(),
            ));
        }
    }
    build(Variant::SublinearTail, depth, eps_schedule)
}

fn seed_level() -> LevelRecord {
    let e = std::f64::consts::E;
    LevelRecord {
        n: 1,
        ln_beta: 0.0,
        u_gamma_prev: 0.0,
        ln_v_gamma_prev: 0.0,
        span_linear: 1.0,
        u_gamma_star: 1.0,
        ln_v_gamma_star: 1.0,
        b: 1.0,
        ln_a: Some(-(e - 1.0)),
        span_exp: (e + 1.0).ln() - 1.0,
        u_gamma: (e + 1.0).ln(),
        // ln Phi(e+1) = -(e-1) + (e+1) = 2
        ln_v_gamma: 2.0,
        eps: None,
    }
}

fn build(variant: Variant, depth: usize, eps_schedule: &[f64]) -> Result<SewnPhi, BuildError> {
    if depth < 1 {
        return Err(BuildError::BadDepth(depth));
    }
    let mut levels = vec![seed_level()];
    for level in 2..=depth {
        let prev = levels.last().unwrap();
        let eps = match variant {
            Variant::SublinearTail => Some(
                eps_schedule
                    .get(level - 2)
                    .copied()
                    .unwrap_or_else(|| 0.5f64.powi((level - 1) as i32)),
            ),
            _ => None,
        };
        let rec = build_level(variant, level, prev, eps)?;
        levels.push(rec);
    }
    let pieces = assemble_pieces(variant, &levels);
    Ok(SewnPhi {
        variant,
        depth,
        levels,
        pieces,
    })
}

/// One induction step: spliced piece, then exponential piece, all in offset
/// arithmetic. `n = level - 1` indexes the exponent `1 + 1/n` of the
/// catch-up inequality.
fn build_level(
    variant: Variant,
    level: usize,
    prev: &LevelRecord,
    eps: Option<f64>,
) -> Result<LevelRecord, BuildError> {
    let n = (level - 1) as f64;
    let u_p = prev.u_gamma;
    let ln_v_p = prev.ln_v_gamma;
    if !ln_v_p.is_finite() {
        return Err(BuildError::RangeExhausted {
            level,
            quantity: "log Phi(gamma) of the previous level".into(),
        });
    }

    // spliced piece: slope, anchored for continuity at gamma_{level-1}
    let ln_beta = match variant {
        Variant::Convex => prev.b.ln() + ln_v_p,
        Variant::Nonconvex => 0.0,
        Variant::SublinearTail => eps.unwrap().ln(),
        Variant::Step => f64::NEG_INFINITY,
    };

    let (span_linear, u_star, ln_v_star) = match variant {
        Variant::Step => {
            // plateau at alpha = 2 max(gamma_prev, Phi(gamma_prev)),
            // running until the diagonal catches it: gamma* = alpha
            let ln_alpha = u_p.max(ln_v_p) + LN2;
            let span = ln_alpha - u_p;
            (span, u_p + span, ln_alpha)
        }
        Variant::SublinearTail => {
            // gamma* = Phi(gamma_prev)/eps
            let span = (ln_v_p - eps.unwrap().ln()) - u_p;
            if span <= 0.0 {
                return Err(BuildError::InvalidEps(format!(
                    "level {level}: eps too large, gamma* would not exceed gamma"
                )));
            }
            let piece = LogPiece {
                u_lo: u_p,
                span: f64::INFINITY,
                shape: PieceShape::Affine {
                    ln_beta,
                    ln_v_lo: ln_v_p,
                },
            };
            (span, u_p + span, piece.ln_eval_off(span))
        }
        Variant::Convex | Variant::Nonconvex => {
            // smallest gamma* = gamma_prev 2^j whose line value is caught by
            // t^{1 + 1/n}
            let piece = LogPiece {
                u_lo: u_p,
                span: f64::INFINITY,
                shape: PieceShape::Affine {
                    ln_beta,
                    ln_v_lo: ln_v_p,
                },
            };
            let factor = 1.0 + 1.0 / n;
            let feasible = |span: f64| -> bool {
                let lnv = piece.ln_eval_off(span);
                lnv.is_finite() && lnv <= factor * (u_p + span)
            };
            let mut j = 1.0f64;
            let mut found = None;
            while j <= 1e300 {
                if feasible(j * LN2) {
                    found = Some(j);
                    break;
                }
                j = if j < 1e9 { j * 2.0 } else { j * 8.0 };
            }
            let mut j = found.ok_or_else(|| BuildError::SearchExhausted {
                level,
                inequality: "line value vs t^{1+1/n} catch-up".into(),
            })?;
            // back down to the minimal feasible grid index; stop when the
            // bracket stops making progress (sub-ULP at tower scale)
            let mut lo = (j / 2.0).max(1.0);
            while j - lo > 1.5 {
                let mid = ((lo + j) / 2.0).floor();
                if mid <= lo || mid >= j {
                    break;
                }
                if feasible(mid * LN2) {
                    j = mid;
                } else {
                    lo = mid;
                }
            }
            debug_assert!(feasible(j * LN2));
            let span = j * LN2;
            (span, u_p + span, piece.ln_eval_off(span))
        }
    };
    if !ln_v_star.is_finite() {
        return Err(BuildError::RangeExhausted {
            level,
            quantity: "log Phi(gamma*)".into(),
        });
    }

    // exponential slope: smallest power of two covering max(2, beta/v*)
    let b = {
        let ln_ratio = ln_beta - ln_v_star;
        let m = if ln_ratio <= 0.0 {
            1
        } else {
            (ln_ratio / LN2).ceil().max(1.0) as i32
        };
        2f64.powi(m)
    };

    // gamma via the tail-window inequality: at s = gamma/e it needs
    //   ln a + b s >= s,  ln a = ln v* - b gamma*,
    // i.e. (b-1) s >= b gamma* - ln v*, plus the ordering s >= gamma*.
    // In offsets from gamma*: e^{span - 1} >= b/(b-1) guarantees it with
    // margin (the dropped ln v*/gamma* term only helps).
    let needed = (b / (b - 1.0)).ln() + 1.0;
    let dj = (needed / LN2).ceil().max(2.0);
    let span_exp = dj * LN2;
    let exp_piece = LogPiece {
        u_lo: u_star,
        span: f64::INFINITY,
        shape: PieceShape::Exp {
            b,
            ln_v_lo: ln_v_star,
        },
    };
    let ln_v_gamma = exp_piece.ln_eval_off(span_exp);
    let ln_a = if u_star < 700.0 {
        let v = ln_v_star - b * u_star.exp();
        v.is_finite().then_some(v)
    } else {
        None
    };

    Ok(LevelRecord {
        n: level,
        ln_beta,
        u_gamma_prev: u_p,
        ln_v_gamma_prev: ln_v_p,
        span_linear,
        u_gamma_star: u_star,
        ln_v_gamma_star: ln_v_star,
        b,
        ln_a,
        span_exp,
        u_gamma: u_star + span_exp,
        ln_v_gamma,
        eps,
    })
}

fn assemble_pieces(variant: Variant, levels: &[LevelRecord]) -> LogPiecewise {
    let mut pieces = Vec::new();
    // identity head: the [0, 1] extension merged with the seed line on [1, e]
    pieces.push(LogPiece {
        u_lo: f64::NEG_INFINITY,
        span: 1.0,
        shape: PieceShape::Identity,
    });
    let last = levels.len() - 1;
    for (i, lv) in levels.iter().enumerate() {
        if lv.n >= 2 {
            let shape = if variant == Variant::Step {
                PieceShape::Const {
                    ln_v: lv.ln_v_gamma_star,
                }
            } else {
                PieceShape::Affine {
                    ln_beta: lv.ln_beta,
                    ln_v_lo: lv.ln_v_gamma_prev,
                }
            };
            pieces.push(LogPiece {
                u_lo: lv.u_gamma_prev,
                span: lv.span_linear,
                shape,
            });
        }
        pieces.push(LogPiece {
            u_lo: lv.u_gamma_star,
            span: if i == last {
                f64::INFINITY
            } else {
                lv.span_exp
            },
            shape: PieceShape::Exp {
                b: lv.b,
                ln_v_lo: lv.ln_v_gamma_star,
            },
        });
    }
    LogPiecewise::new(pieces)
}

/// One breakpoint's continuity evidence.
#[derive(Debug, Clone, Serialize)]
pub struct BreakCheck {
    pub u: f64,
    pub ln_left: f64,
    pub ln_right: f64,
    pub residual: f64,
    pub ok: bool,
}

/// One breakpoint's slope comparison (`ln` of one-sided derivatives).
#[derive(Debug, Clone, Serialize)]
pub struct SlopeCheck {
    pub u: f64,
    #[serde(with = "serde_f64_ext")]
    pub ln_slope_left: f64,
    #[serde(with = "serde_f64_ext")]
    pub ln_slope_right: f64,
    pub non_decreasing: bool,
}

/// Per-level divergence evidence: the exact window integral of
/// `log Phi(t)/t^2` over `[gamma_n/e, gamma_n]` and the floor it must beat.
#[derive(Debug, Clone, Serialize)]
pub struct LevelWindow {
    pub level: usize,
    pub window_integral: f64,
    /// acceptance floor `1 - 1/e` (constant lower bound over the window)
    pub floor: f64,
    /// margin of `log Phi(t) >= t` at the window's left edge, in units of
    /// `gamma*`
    pub log_bound_margin: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiminfPoint {
    pub level: usize,
    /// `log Phi(gamma*)/log gamma*`
    pub ratio: f64,
    /// required ceiling `1 + 1/(level-1)`
    pub ceiling: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimsupWitness {
    pub level: usize,
    pub ln_gamma: f64,
    /// `log Phi(gamma)/log gamma`; saturates beyond the log range
    #[serde(with = "serde_f64_ext")]
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SublinearCheckpoint {
    pub level: usize,
    /// `ln(Phi(gamma*)/gamma*)`
    pub ln_ratio: f64,
    /// `ln(2 eps)` ceiling
    pub ln_ceiling: f64,
    pub ok: bool,
}

/// The certificate: every claim of the chosen variant, checked numerically
/// from the construction records and the assembled pieces.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub variant: Variant,
    pub depth: usize,
    pub valid: bool,
    /// depth too small for the asymptotic checkpoint lists (noted, not a
    /// failure)
    pub partial: bool,
    pub failures: Vec<String>,
    pub continuity: Vec<BreakCheck>,
    pub slope_monotone: Vec<SlopeCheck>,
    pub nonconvex_witness: Option<SlopeCheck>,
    pub jumps: usize,
    pub divergence_windows: Vec<LevelWindow>,
    pub liminf: Vec<LiminfPoint>,
    pub limsup: Vec<LimsupWitness>,
    pub sublinear: Vec<SublinearCheckpoint>,
    /// probes of `Phi(t) >= t` (skipped for the sublinear variant)
    pub lower_bound_ok: bool,
    /// verdict of the divergence condition on the assembled function
    pub condition_class: DivergenceClass,
    pub parameters: Vec<LevelRecord>,
}

const CONTINUITY_TOL: f64 = 1e-9;

/// Certifies a built function against its variant's claims. The certificate
/// IS the computation: windows, ratios and residuals are recomputed from the
/// assembled pieces, and the divergence condition is re-evaluated through
/// the conditions module as an independent cross-check.
pub fn certify(phi: &SewnPhi) -> Certificate {
    let mut failures = Vec::new();

    // continuity at interior breakpoints
    let mut continuity = Vec::new();
    for w in phi.pieces.pieces.windows(2) {
        let left = w[0].ln_value_right();
        let right = w[1].ln_value_left();
        if !left.is_finite() || !right.is_finite() {
            continue;
        }
        let residual = (left - right).abs() / right.abs().max(1.0);
        let ok = residual < CONTINUITY_TOL;
        continuity.push(BreakCheck {
            u: w[1].u_lo,
            ln_left: left,
            ln_right: right,
            residual,
            ok,
        });
    }
    let jumps = phi.pieces.jumps().len();
    match phi.variant {
        Variant::Step => {
            if jumps != phi.depth.saturating_sub(1) {
                failures.push(format!(
                    "staircase should jump at every spliced level: expected {} jumps, found {jumps}",
                    phi.depth - 1
                ));
            }
        }
        _ => {
            for c in &continuity {
                if !c.ok {
                    failures.push(format!(
                        "continuity residual {:.3e} at u = {:.6e}",
                        c.residual, c.u
                    ));
                }
            }
            if jumps > 0 {
                failures.push(format!("{jumps} unexpected jump(s)"));
            }
        }
    }

    // slope monotonicity across breakpoints
    let mut slope_monotone = Vec::new();
    let mut nonconvex_witness = None;
    for w in phi.pieces.pieces.windows(2) {
        let left = w[0].ln_slope_off(if w[0].span.is_finite() { w[0].span } else { 0.0 });
        let right = w[1].ln_slope_off(0.0);
        let check = SlopeCheck {
            u: w[1].u_lo,
            ln_slope_left: left,
            ln_slope_right: right,
            non_decreasing: right >= left - 1e-9,
        };
        if !check.non_decreasing && nonconvex_witness.is_none() {
            nonconvex_witness = Some(check.clone());
        }
        slope_monotone.push(check);
    }
    match phi.variant {
        Variant::Convex => {
            for s in &slope_monotone {
                if !s.non_decreasing {
                    failures.push(format!(
                        "slope drops across u = {:.6e}: {:.6e} -> {:.6e}",
                        s.u, s.ln_slope_left, s.ln_slope_right
                    ));
                }
            }
        }
        Variant::Nonconvex => {
            if nonconvex_witness.is_none() {
                failures
                    .push("expected a slope drop (nonconvex variant) but slopes are monotone".into());
            }
        }
        _ => {}
    }

    // per-level divergence windows (levels >= 2)
    let floor = 1.0 - (-1.0f64).exp();
    let mut divergence_windows = Vec::new();
    for lv in phi.levels.iter().filter(|l| l.n >= 2) {
        let piece = LogPiece {
            u_lo: lv.u_gamma_star,
            span: f64::INFINITY,
            shape: PieceShape::Exp {
                b: lv.b,
                ln_v_lo: lv.ln_v_gamma_star,
            },
        };
        let off_hi = lv.span_exp;
        let off_lo = lv.span_exp - 1.0;
        let window_integral = crate::conditions::piecewise::core_h_over_t2(&piece, off_lo, off_hi);
        // log Phi(t) - t = ln a + (b-1) t is minimal at the window's left
        // edge s = gamma/e; in units of gamma*:
        //   margin = (b-1) e^{off_lo} - b + ln v* / gamma*
        let margin_unit = (lv.b - 1.0) * off_lo.exp() - lv.b
            + if lv.u_gamma_star < 700.0 {
                lv.ln_v_gamma_star * (-lv.u_gamma_star).exp()
            } else {
                0.0
            };
        let ok = window_integral >= floor && margin_unit >= 0.0;
        if !ok {
            failures.push(format!(
                "level {} window: integral {:.6} vs floor {:.6}, margin {:.3e}",
                lv.n, window_integral, floor, margin_unit
            ));
        }
        divergence_windows.push(LevelWindow {
            level: lv.n,
            window_integral,
            floor,
            log_bound_margin: margin_unit,
            ok,
        });
    }

    // catch-up checkpoints at gamma* (convex variant): ratio in [1, 1 + 1/n]
    let mut liminf = Vec::new();
    if phi.variant == Variant::Convex {
        for lv in phi.levels.iter().filter(|l| l.n >= 2) {
            let ratio = lv.ln_v_gamma_star / lv.u_gamma_star;
            let ceiling = 1.0 + 1.0 / ((lv.n - 1) as f64);
            let ok = (1.0 - 1e-12..=ceiling + 1e-12).contains(&ratio);
            if !ok {
                failures.push(format!(
                    "level {} catch-up ratio {ratio:.6} outside [1, {ceiling:.6}]",
                    lv.n
                ));
            }
            liminf.push(LiminfPoint {
                level: lv.n,
                ratio,
                ceiling,
                ok,
            });
        }
    }

    // limsup witnesses at gamma
    let mut limsup = Vec::new();
    for lv in &phi.levels {
        let ratio = if lv.ln_v_gamma.is_finite() {
            lv.ln_v_gamma / lv.u_gamma
        } else {
            f64::INFINITY
        };
        limsup.push(LimsupWitness {
            level: lv.n,
            ln_gamma: lv.u_gamma,
            ratio,
        });
        if phi.variant != Variant::SublinearTail && lv.n >= 2 && ratio < lv.n as f64 {
            failures.push(format!(
                "level {} witness ratio {ratio:.3} below its level index",
                lv.n
            ));
        }
    }

    // sublinear checkpoints: Phi(gamma*)/gamma* <= 2 eps. The ratio is
    // computed in offset form: with gamma* = Phi(gamma_prev)/eps,
    //   Phi(gamma*)/gamma* = eps (2 - eps gamma_prev / Phi(gamma_prev)),
    // which stays exact when the absolute logs are at tower scale.
    let mut sublinear = Vec::new();
    if phi.variant == Variant::SublinearTail {
        for lv in phi.levels.iter().filter(|l| l.n >= 2) {
            let eps = lv.eps.unwrap_or(1.0);
            let correction = (eps.ln() + lv.u_gamma_prev - lv.ln_v_gamma_prev).exp();
            let ln_ratio = eps.ln() + (2.0 - correction).ln();
            let ln_ceiling = (2.0 * eps).ln();
            let ok = ln_ratio <= ln_ceiling + 1e-12;
            if !ok {
                failures.push(format!(
                    "level {} sublinear checkpoint ratio e^{ln_ratio:.6} above 2 eps",
                    lv.n
                ));
            }
            sublinear.push(SublinearCheckpoint {
                level: lv.n,
                ln_ratio,
                ln_ceiling,
                ok,
            });
        }
    }

    // Phi(t) >= t on probes (the sublinear variant breaks this on purpose)
    let mut lower_bound_ok = true;
    if phi.variant != Variant::SublinearTail {
        for i in 0..400 {
            let u = -3.0 + 6.0 * (i as f64) / 399.0;
            if phi.pieces.ln_eval(u) < u - 1e-12 {
                lower_bound_ok = false;
                failures.push(format!("Phi(t) < t at ln t = {u:.4}"));
                break;
            }
        }
        for lv in &phi.levels {
            if lv.ln_v_gamma_star < lv.u_gamma_star - 1e-9 {
                lower_bound_ok = false;
                failures.push(format!("Phi(gamma*) < gamma* at level {}", lv.n));
            }
        }
    }

    // independent cross-check through the conditions module
    let monotone = phi.to_monotone();
    let condition_class =
        match evaluate_condition(&monotone, ConditionId::HOverT2, None, &Protocol::default()) {
            Ok(v) => v.class,
            Err(e) => {
                failures.push(format!("condition evaluation failed: {e}"));
                DivergenceClass::Inconclusive
            }
        };
    if condition_class != DivergenceClass::Divergent {
        failures.push(format!(
            "conditions module classified the build {condition_class:?}, expected Divergent"
        ));
    }

    Certificate {
        variant: phi.variant,
        depth: phi.depth,
        valid: failures.is_empty(),
        partial: phi.depth < 2,
        failures,
        continuity,
        slope_monotone,
        nonconvex_witness,
        jumps,
        divergence_windows,
        liminf,
        limsup,
        sublinear,
        lower_bound_ok,
        condition_class,
        parameters: phi.levels.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monotone::Direction;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn seed_matches_the_fixed_data() {
        let phi = build_convex(1).unwrap();
        let s = &phi.levels[0];
        assert_eq!(s.u_gamma_star, 1.0); // gamma_1* = e
        assert!((s.u_gamma - (E + 1.0).ln()).abs() < 1e-15); // gamma_1 = e+1
        assert_eq!(s.b, 1.0);
        assert!((s.ln_a.unwrap() + (E - 1.0)).abs() < 1e-15); // a_1 = e^{-(e-1)}
        // seed continuity at gamma_1* = e: phi_1(e) = e = psi_1(e)
        let f = phi.to_monotone();
        assert!((f.eval_f(E) - E).abs() < 1e-12);
        // psi_1(e+1) = e^{-(e-1)} e^{e+1} = e^2
        assert!((f.eval_f(E + 1.0) - E * E).abs() < 1e-9);
    }

    #[test]
    fn depth_two_splice_parameters() {
        let phi = build_convex(2).unwrap();
        let lv = &phi.levels[1];
        // beta_2 = a_1 b_1 e^{b_1 gamma_1} = e^2, alpha_2 = -e^3
        assert!((lv.ln_beta - 2.0).abs() < 1e-12, "{}", lv.ln_beta);
        let alpha = lv.alpha().unwrap();
        assert!(
            (alpha + E * E * E).abs() < 1e-9 * E.powi(3),
            "alpha = {alpha}"
        );
        // continuity at gamma_1
        let f = phi.to_monotone();
        let g1 = E + 1.0;
        let left = f.eval_f(g1 - 1e-9);
        let right = f.eval_f(g1 + 1e-9);
        assert!((left - right).abs() < 1e-6 * right);
    }

    #[test]
    fn phi_of_one_is_one_for_every_variant() {
        for phi in [
            build_convex(3).unwrap(),
            build_nonconvex(3).unwrap(),
            build_step(3).unwrap(),
            build_sublinear_tail(3, &[0.25, 0.125]).unwrap(),
        ] {
            let f = phi.to_monotone();
            assert!((f.eval_f(1.0) - 1.0).abs() < 1e-14, "{:?}", phi.variant);
            assert_eq!(f.direction(), Direction::NonDecreasing);
            // identity extension below 1
            assert!((f.eval_f(0.5) - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn convex_depth_four_certificate_is_valid() {
        let phi = build_convex(4).unwrap();
        let cert = certify(&phi);
        assert!(cert.valid, "failures: {:?}", cert.failures);
        assert!(!cert.partial);
        assert_eq!(cert.divergence_windows.len(), 3);
        for w in &cert.divergence_windows {
            assert!(w.window_integral >= w.floor);
            assert!(w.log_bound_margin >= 0.0);
        }
        assert_eq!(cert.condition_class, DivergenceClass::Divergent);
        for p in &cert.liminf {
            assert!(p.ratio >= 1.0 && p.ratio <= p.ceiling, "{p:?}");
        }
    }

    #[test]
    fn depth_one_certificate_is_partial() {
        let cert = certify(&build_convex(1).unwrap());
        assert!(cert.partial);
        assert!(cert.liminf.is_empty());
        assert!(cert.divergence_windows.is_empty());
        assert!(cert.valid, "failures: {:?}", cert.failures);
    }

    #[test]
    fn nonconvex_certificate_finds_the_slope_drop() {
        let phi = build_nonconvex(3).unwrap();
        let cert = certify(&phi);
        assert!(cert.valid, "failures: {:?}", cert.failures);
        let w = cert.nonconvex_witness.expect("slope drop");
        // slope falls from b_1 Phi(gamma_1) = e^2 to 1 at gamma_1
        assert!((w.u - (E + 1.0).ln()).abs() < 1e-12);
        assert!((w.ln_slope_left - 2.0).abs() < 1e-9);
        assert!(w.ln_slope_right.abs() < 1e-12);
    }

    #[test]
    fn step_certificate_counts_jumps_and_inverse_jumps_at_plateaus() {
        let phi = build_step(3).unwrap();
        let cert = certify(&phi);
        assert!(cert.valid, "failures: {:?}", cert.failures);
        assert_eq!(cert.jumps, 2);
        // the generalized inverse jumps exactly at the plateau value: below
        // it the inverse sits at gamma_prev, just above it lands past
        // gamma* = alpha
        let lv = &phi.levels[1];
        let alpha = lv.ln_v_gamma_star.exp();
        let gamma_prev = lv.u_gamma_prev.exp();
        let f = phi.to_monotone();
        let inv = crate::monotone::invert(&f);
        let at_value = inv.eval_f(alpha);
        assert!(
            (at_value - gamma_prev).abs() < 1e-6 * gamma_prev,
            "{at_value} vs {gamma_prev}"
        );
        let above = inv.eval_f(alpha * (1.0 + 1e-9));
        assert!(above >= alpha * 0.999, "{above} vs {alpha}");
        // grid-inf oracle agrees at the plateau value
        let oracle = crate::oracle::grid_inf_ge(&f, alpha);
        assert!(crate::oracle::within_cell(at_value, oracle));
    }

    #[test]
    fn sublinear_checkpoints_bound_the_ratio() {
        let eps = [0.25, 0.125, 0.0625];
        let phi = build_sublinear_tail(4, &eps).unwrap();
        let cert = certify(&phi);
        assert!(cert.valid, "failures: {:?}", cert.failures);
        assert_eq!(cert.sublinear.len(), 3);
        for (cp, e) in cert.sublinear.iter().zip(eps) {
            assert!(cp.ln_ratio <= (2.0 * e).ln() + 1e-12, "{cp:?}");
        }
        // still increasing
        let f = phi.to_monotone();
        let mut prev = 0.0;
        for i in 1..100 {
            let t = i as f64 * 0.7;
            let v = f.eval_f(t);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn deeper_levels_exhaust_the_float_range() {
        let err = build_convex(5);
        assert!(
            matches!(err, Err(BuildError::RangeExhausted { level: 5, .. })),
            "{err:?}"
        );
    }

    #[test]
    fn serialization_roundtrip_preserves_evaluation() {
        let phi = build_convex(3).unwrap();
        let json = phi.to_json();
        let back = SewnPhi::from_json(&json).unwrap();
        let f = phi.to_monotone();
        let g = back.to_monotone();
        for t in [0.3, 1.0, E, 10.0, 500.0] {
            assert_eq!(f.eval_f(t), g.eval_f(t));
        }
        assert_eq!(phi.levels.len(), back.levels.len());
    }

    #[test]
    fn all_variants_divergent_through_conditions_module() {
        for phi in [
            build_nonconvex(3).unwrap(),
            build_step(3).unwrap(),
            build_sublinear_tail(3, &[0.25]).unwrap(),
        ] {
            let v = evaluate_condition(
                &phi.to_monotone(),
                ConditionId::HOverT2,
                None,
                &Protocol::default(),
            )
            .unwrap();
            assert_eq!(
                v.class,
                DivergenceClass::Divergent,
                "{:?}: {}",
                phi.variant,
                v.rationale
            );
        }
    }
}
