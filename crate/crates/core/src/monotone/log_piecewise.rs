//! Piecewise monotone functions with log-scale abscissa.
//!
//! The sewn functions produced by the factory have breakpoints that grow as
//! an exponential tower; by depth 4 the breakpoints themselves exceed the
//! `f64` range and even their logarithms are so large that `u + ln 2`
//! rounds back to `u`. Pieces are therefore anchored at their left endpoint
//! and carry their extent as an exact offset `span`; every evaluation that
//! can be done without materializing `t` (or an absolute `u` difference)
//! works on offsets.

use crate::ext::log_sub_exp;

/// Value of `ln t` above which `t = e^u` no longer fits in an `f64`.
pub const U_F64_MAX: f64 = 709.0;

/// Shape of one piece.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PieceShape {
    /// `f(t) = t`
    Identity,
    /// `f(t) = v_lo + beta (t - t_lo)`, anchored at the left endpoint.
    Affine { ln_beta: f64, ln_v_lo: f64 },
    /// `f(t) = v_lo e^{b (t - t_lo)}`, anchored at the left endpoint.
    Exp { b: f64, ln_v_lo: f64 },
    /// constant plateau
    Const { ln_v: f64 },
}

/// One piece on `[anchor, anchor + span]` in `u = ln t`, where the anchor is
/// `u_lo` when finite and `0` for head pieces reaching down to `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LogPiece {
    /// `ln` of the left endpoint; `-inf` allowed for the head piece.
    #[serde(with = "crate::ext::serde_f64_ext")]
    pub u_lo: f64,
    /// offset of the right endpoint from the anchor; `+inf` for the tail.
    #[serde(with = "crate::ext::serde_f64_ext")]
    pub span: f64,
    pub shape: PieceShape,
}

impl LogPiece {
    pub fn anchor(&self) -> f64 {
        if self.u_lo.is_finite() {
            self.u_lo
        } else {
            0.0
        }
    }

    /// `ln` of the right endpoint (rounded at tower scale; exact extent is
    /// `span`).
    pub fn u_hi(&self) -> f64 {
        self.anchor() + self.span
    }

    /// `ln f` at offset `off` from the anchor. Returns `+inf` when the
    /// value's logarithm exceeds the `f64` range (deep inside tower-scale
    /// exponential pieces) and `-inf` for a zero value.
    pub fn ln_eval_off(&self, off: f64) -> f64 {
        let a = self.anchor();
        match self.shape {
            PieceShape::Identity => a + off,
            PieceShape::Const { ln_v } => ln_v,
            PieceShape::Affine { ln_beta, ln_v_lo } => {
                if off <= 0.0 {
                    return ln_v_lo;
                }
                // ln(t - t_lo) = a + off + ln(1 - e^{-off})
                let ln_dt = a + off + (-(-off).exp()).ln_1p();
                crate::ext::log_add_exp(ln_v_lo, ln_beta + ln_dt)
            }
            PieceShape::Exp { b, ln_v_lo } => {
                if off <= 0.0 {
                    return ln_v_lo;
                }
                // b (t - t_lo) = exp(ln b + a + ln(e^{off} - 1))
                let ln_term = b.ln() + a + ln_expm1(off);
                if ln_term > U_F64_MAX {
                    f64::INFINITY
                } else {
                    ln_v_lo + ln_term.exp()
                }
            }
        }
    }

    /// `ln f(e^u)` from an absolute coordinate (valid at moderate scale).
    pub fn ln_eval(&self, u: f64) -> f64 {
        self.ln_eval_off(u - self.anchor())
    }

    /// `(ln f)'(t)` at offset `off`, where defined (a.e. for plateaus).
    pub fn h_prime_off(&self, off: f64) -> f64 {
        let a = self.anchor();
        match self.shape {
            PieceShape::Identity => (-(a + off)).exp(),
            PieceShape::Const { .. } => 0.0,
            PieceShape::Exp { b, .. } => b,
            PieceShape::Affine { ln_beta, .. } => {
                // h' = beta / f(t)
                (ln_beta - self.ln_eval_off(off)).exp()
            }
        }
    }

    /// Left value of the piece (`ln f(t_lo+)`).
    pub fn ln_value_left(&self) -> f64 {
        match self.shape {
            PieceShape::Identity => {
                if self.u_lo.is_finite() {
                    self.u_lo
                } else {
                    f64::NEG_INFINITY
                }
            }
            PieceShape::Const { ln_v } => ln_v,
            PieceShape::Affine { ln_v_lo, .. } | PieceShape::Exp { ln_v_lo, .. } => ln_v_lo,
        }
    }

    /// Right value of the piece (`ln f(t_hi-)`), `+inf` if out of range.
    pub fn ln_value_right(&self) -> f64 {
        if self.span.is_infinite() {
            f64::INFINITY
        } else {
            self.ln_eval_off(self.span)
        }
    }

    /// `ln` of the one-sided derivative `f'` at offset `off`, where defined.
    pub fn ln_slope_off(&self, off: f64) -> f64 {
        match self.shape {
            PieceShape::Identity => 0.0,
            PieceShape::Const { .. } => f64::NEG_INFINITY,
            PieceShape::Affine { ln_beta, .. } => ln_beta,
            // f' = b f
            PieceShape::Exp { b, .. } => b.ln() + self.ln_eval_off(off),
        }
    }

    /// Solves `ln f = ln_v` inside this piece, returning the absolute `u`
    /// (pieces are non-decreasing; assumes `ln_v` within the piece's range).
    pub fn u_at_ln_value(&self, ln_v: f64) -> f64 {
        let a = self.anchor();
        match self.shape {
            PieceShape::Identity => ln_v,
            PieceShape::Const { .. } => self.u_lo,
            PieceShape::Affine { ln_beta, ln_v_lo } => {
                if ln_v <= ln_v_lo {
                    return self.u_lo.max(a);
                }
                // t = t_lo + (v - v_lo)/beta
                let ln_dt = log_sub_exp(ln_v, ln_v_lo) - ln_beta;
                if self.u_lo.is_finite() {
                    crate::ext::log_add_exp(self.u_lo, ln_dt)
                } else {
                    ln_dt
                }
            }
            PieceShape::Exp { b, ln_v_lo } => {
                if ln_v <= ln_v_lo {
                    return self.u_lo.max(a);
                }
                // t = t_lo + (ln_v - ln_v_lo)/b
                let ln_dt = ((ln_v - ln_v_lo) / b).ln();
                crate::ext::log_add_exp(a, ln_dt)
            }
        }
    }
}

/// `ln(e^x - 1)`, stable for small and large `x > 0`.
pub fn ln_expm1(x: f64) -> f64 {
    if x > 36.0 {
        // e^x - 1 == e^x to double precision
        x
    } else {
        x.exp_m1().ln()
    }
}

/// A contiguous non-decreasing piecewise function on `[0, ∞]`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct LogPiecewise {
    pub pieces: Vec<LogPiece>,
}

impl LogPiecewise {
    pub fn new(pieces: Vec<LogPiece>) -> LogPiecewise {
        debug_assert!(!pieces.is_empty());
        LogPiecewise { pieces }
    }

    pub fn piece_index_at(&self, u: f64) -> usize {
        self.pieces
            .partition_point(|p| p.u_hi() < u)
            .min(self.pieces.len() - 1)
    }

    /// `ln f(e^u)` across all pieces (absolute coordinate).
    pub fn ln_eval(&self, u: f64) -> f64 {
        if u == f64::INFINITY {
            return f64::INFINITY;
        }
        if u == f64::NEG_INFINITY {
            return self.pieces[0].ln_value_left();
        }
        self.pieces[self.piece_index_at(u)].ln_eval(u)
    }

    /// `f(t)` in linear scale, saturating to `+inf` when out of range.
    pub fn eval(&self, t: f64) -> f64 {
        if t == 0.0 {
            let l = self.pieces[0].ln_value_left();
            return if l == f64::NEG_INFINITY { 0.0 } else { l.exp() };
        }
        let ln = self.ln_eval(t.ln());
        if ln > U_F64_MAX {
            f64::INFINITY
        } else {
            ln.exp()
        }
    }

    /// Generalized inverse `inf { t : f(t) >= tau }` in `u`-space:
    /// returns `ln` of the inverse (`-inf` for 0, `+inf` for ∞).
    pub fn u_inverse(&self, ln_tau: f64) -> f64 {
        if ln_tau == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        for p in &self.pieces {
            if p.ln_value_right() >= ln_tau {
                if p.ln_value_left() >= ln_tau {
                    return p.u_lo;
                }
                return p.u_at_ln_value(ln_tau);
            }
        }
        f64::INFINITY
    }

    /// Discontinuities: `(u, ln_left, ln_right)` for each upward jump between
    /// adjacent pieces.
    pub fn jumps(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for w in self.pieces.windows(2) {
            let left = w[0].ln_value_right();
            let right = w[1].ln_value_left();
            if right > left + 1e-12 {
                out.push((w[1].u_lo, left, right));
            }
        }
        out
    }

    /// Interior breakpoints in `u`.
    pub fn breakpoints_u(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.u_lo).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> LogPiecewise {
        // f(t) = t on [0, e], then e^{t - e + 1} on [e, ∞)
        LogPiecewise::new(vec![
            LogPiece {
                u_lo: f64::NEG_INFINITY,
                span: 1.0,
                shape: PieceShape::Identity,
            },
            LogPiece {
                u_lo: 1.0,
                span: f64::INFINITY,
                shape: PieceShape::Exp { b: 1.0, ln_v_lo: 1.0 },
            },
        ])
    }

    #[test]
    fn evaluates_across_pieces() {
        let f = sample();
        assert!((f.eval(2.0) - 2.0).abs() < 1e-12);
        let e = std::f64::consts::E;
        assert!((f.eval(e) - e).abs() < 1e-12);
        // f(e + 1) = e * e^1
        assert!((f.eval(e + 1.0) - e * e).abs() < 1e-9);
        assert_eq!(f.eval(0.0), 0.0);
    }

    #[test]
    fn ln_eval_survives_huge_arguments() {
        let f = sample();
        // ln f(t) = 1 + (t - e); at u = 800, ln f overflows cleanly
        assert_eq!(f.ln_eval(800.0), f64::INFINITY);
        let u = 3.0f64;
        let t = u.exp();
        let expect = 1.0 + (t - std::f64::consts::E);
        assert!((f.ln_eval(u) - expect).abs() < 1e-9);
    }

    #[test]
    fn generalized_inverse_in_u_space() {
        let f = sample();
        // 4 > e lands on the exp piece: 1 + t - e = ln 4
        let u = f.u_inverse(4.0f64.ln());
        let t = u.exp();
        assert!((t - (std::f64::consts::E - 1.0 + 4.0f64.ln())).abs() < 1e-9);
        // below the head: inverse of 0.5 is 0.5
        assert!((f.u_inverse(0.5f64.ln()).exp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn affine_anchor_roundtrip() {
        let p = LogPiece {
            u_lo: 0.0,
            span: 10.0,
            shape: PieceShape::Affine {
                ln_beta: 2.0f64.ln(),
                ln_v_lo: 3.0f64.ln(),
            },
        };
        // f(t) = 3 + 2(t-1); f(5) = 11
        assert!((p.ln_eval(5.0f64.ln()).exp() - 11.0).abs() < 1e-9);
        let u = p.u_at_ln_value(11.0f64.ln());
        assert!((u.exp() - 5.0).abs() < 1e-9);
        assert!((p.ln_slope_off(1.0).exp() - 2.0).abs() < 1e-12);
        let h = p.h_prime_off(5.0f64.ln());
        assert!((h - 2.0 / 11.0).abs() < 1e-9);
    }

    #[test]
    fn tower_scale_spans_stay_exact() {
        // at u ~ 1e96 the absolute arithmetic saturates but spans are exact
        let p = LogPiece {
            u_lo: 1.28e96,
            span: 3.0 * std::f64::consts::LN_2,
            shape: PieceShape::Exp { b: 2.0, ln_v_lo: 1.7e96 },
        };
        assert_eq!(p.u_hi(), p.u_lo); // rounded: span below ULP
        assert_eq!(p.span, 3.0 * std::f64::consts::LN_2); // exact extent
        assert_eq!(p.ln_eval_off(1.0), f64::INFINITY); // value log saturates
        assert_eq!(p.ln_value_left(), 1.7e96);
    }
}
