//! Exact per-piece integrals of the condition integrands over log-scale
//! piecewise functions.
//!
//! Sewn growth functions have breakpoints far beyond `f64` range; worse, the
//! log-abscissa `u = ln t` of the deep pieces is so large that `u + ln 2`
//! rounds back to `u`. All positions are therefore piece-relative offsets
//! with absolute coordinate `anchor(piece) + off`, and the closed forms
//! below only consume offsets and offset differences. With `H = log f`:
//!
//! - `int H'(t)/t dt` has per-shape antiderivatives (and equals
//!   `int d_eta / H^{-1}(eta)` under `eta = H(t)`, which is how the inverse
//!   conditions are computed without ever materializing `t`),
//! - `int H(t)/t^2 dt = [-H(t)/t] + int H'(t)/t dt` by parts,
//! - upward jumps contribute `(H_+ - H_-)/t` to the Stieltjes and inverse
//!   conditions.

use crate::monotone::{LogPiece, LogPiecewise, PieceShape};

/// A position inside a piecewise function:
/// `u = pieces[piece].anchor() + off`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UPos {
    pub piece: usize,
    pub off: f64,
}

impl UPos {
    pub fn abs_u(&self, pieces: &LogPiecewise) -> f64 {
        pieces.pieces[self.piece].anchor() + self.off
    }
}

/// Locates an absolute `u` (valid only at moderate magnitude) as a `UPos`.
pub fn locate(pieces: &LogPiecewise, u: f64) -> UPos {
    let idx = pieces.piece_index_at(u);
    UPos {
        piece: idx,
        off: u - pieces.pieces[idx].anchor(),
    }
}

/// `ln((t - c)/t)` for an affine piece at offset `off`, where `c` is the
/// zero of the line: `(t-c)/t = (1 - e^{-off}) + kappa e^{-off}` with
/// `kappa = v_lo/(beta t_lo)`, a sum of nonnegative terms (no cancellation).
fn ln_ratio_affine(ln_kappa: f64, off: f64) -> f64 {
    let kappa = ln_kappa.exp();
    (-(-off).exp_m1() + kappa * (-off).exp()).ln()
}

/// `int H'(t)/t dt` over `[off_p, off_q]` inside one piece.
pub fn core_hprime_over_t(piece: &LogPiece, off_p: f64, off_q: f64) -> f64 {
    if off_q <= off_p {
        return 0.0;
    }
    let a = piece.anchor();
    match piece.shape {
        PieceShape::Identity => (-(a + off_p)).exp() - (-(a + off_q)).exp(),
        PieceShape::Const { .. } => 0.0,
        PieceShape::Exp { b, .. } => b * (off_q - off_p),
        PieceShape::Affine { ln_beta, ln_v_lo } => {
            // integrand 1/(t (t - c)), c = t_lo (1 - kappa),
            // kappa = v_lo/(beta t_lo); antiderivative (1/c) ln((t-c)/t)
            let ln_kappa = ln_v_lo - ln_beta - a;
            let one_minus_kappa = -ln_kappa.exp_m1(); // 1 - kappa, stable near 0
            if one_minus_kappa.abs() < 1e-14 {
                // line through the origin: integrand 1/t^2
                return (-(a + off_p)).exp() - (-(a + off_q)).exp();
            }
            let inv_c = (-a).exp() / one_minus_kappa;
            inv_c * (ln_ratio_affine(ln_kappa, off_q) - ln_ratio_affine(ln_kappa, off_p))
        }
    }
}

/// `H(t)/t` at a piece-relative offset, overflow-free for every shape.
pub fn h_over_t(piece: &LogPiece, off: f64) -> f64 {
    let a = piece.anchor();
    let inv_t = (-(a + off)).exp();
    match piece.shape {
        PieceShape::Identity => (a + off) * inv_t,
        PieceShape::Const { ln_v } => ln_v * inv_t,
        PieceShape::Affine { ln_beta, .. } => {
            let h = piece.ln_eval_off(off);
            if h.is_finite() {
                h * inv_t
            } else {
                (ln_beta + a + off) * inv_t
            }
        }
        // H(t)/t = ln_v/t + b (1 - t_lo/t)
        PieceShape::Exp { b, ln_v_lo } => ln_v_lo * inv_t + b * (1.0 - (-off).exp()),
    }
}

/// `int H(t)/t^2 dt` over `[off_p, off_q]` inside one piece, by parts.
pub fn core_h_over_t2(piece: &LogPiece, off_p: f64, off_q: f64) -> f64 {
    if off_q <= off_p {
        return 0.0;
    }
    h_over_t(piece, off_p) - h_over_t(piece, off_q) + core_hprime_over_t(piece, off_p, off_q)
}

/// Contribution of an upward jump `(u, H_-, H_+)`: `(H_+ - H_-)/t`.
pub fn jump_term(u: f64, h_lo: f64, h_hi: f64) -> f64 {
    if !h_hi.is_finite() || !h_lo.is_finite() {
        return 0.0;
    }
    (h_hi - h_lo) * (-u).exp()
}

/// Which condition integrand a window integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceIntegrand {
    /// `H'(t)/t` (jump-free)
    HprimeOverT,
    /// `dH/t`: `H'(t)/t` plus jump terms (Stieltjes / inverse conditions)
    DhOverT,
    /// `H(t)/t^2`
    HOverT2,
}

/// Truncation milestones: the start position, every piece boundary above it
/// (long pieces subdivided into at most `max_per_piece` equal offset steps),
/// and `tail_windows` windows of width `ln 2` into the final piece.
pub fn milestones(
    pieces: &LogPiecewise,
    start: UPos,
    tail_windows: usize,
    max_per_piece: usize,
) -> Vec<UPos> {
    let ln2 = std::f64::consts::LN_2;
    let mut out = vec![start];
    for (k, p) in pieces.pieces.iter().enumerate().skip(start.piece) {
        let a_off = if k == start.piece { start.off } else { 0.0 };
        if p.span.is_finite() {
            let span = p.span - a_off;
            if span <= 0.0 {
                continue;
            }
            let steps = ((span / ln2).ceil() as usize).clamp(1, max_per_piece);
            for i in 1..=steps {
                let off = a_off + span * (i as f64) / (steps as f64);
                if i == steps && k + 1 < pieces.pieces.len() {
                    out.push(UPos {
                        piece: k + 1,
                        off: 0.0,
                    });
                } else {
                    out.push(UPos { piece: k, off });
                }
            }
        } else {
            for i in 1..=tail_windows {
                out.push(UPos {
                    piece: k,
                    off: a_off + ln2 * i as f64,
                });
            }
        }
    }
    out
}

/// Integral of the chosen integrand over the window `[a, b]`, split across
/// pieces, including jump terms where the integrand takes them.
pub fn window_integral(
    pieces: &LogPiecewise,
    a: &UPos,
    b: &UPos,
    integrand: PieceIntegrand,
) -> f64 {
    let core = |piece: &LogPiece, p: f64, q: f64| -> f64 {
        match integrand {
            PieceIntegrand::HprimeOverT | PieceIntegrand::DhOverT => {
                core_hprime_over_t(piece, p, q)
            }
            PieceIntegrand::HOverT2 => core_h_over_t2(piece, p, q),
        }
    };
    let mut total = 0.0;
    for k in a.piece..=b.piece {
        let piece = &pieces.pieces[k];
        let lo = if k == a.piece { a.off } else { 0.0 };
        let hi = if k == b.piece { b.off } else { piece.span };
        if hi > lo {
            total += core(piece, lo, hi);
        }
        // jump at this piece's left edge (between pieces k-1 and k)
        if integrand == PieceIntegrand::DhOverT && k > a.piece {
            let left = pieces.pieces[k - 1].ln_value_right();
            let right = piece.ln_value_left();
            if right > left {
                total += jump_term(piece.u_lo, left, right);
            }
        }
    }
    total
}
