//! Closed-form function registry.
//!
//! Config files name functions by tag; these are the evaluators behind the
//! tags, each carrying whatever exact structure it has (inverse, logarithmic
//! derivative, zero-set supremum) so downstream numerics can use the sharp
//! path when one exists.
//!
//! The Iwaniec–Martin and Brakalova–Jenkins growth functions are only
//! eventually monotone; the registry versions hold them constant on `[0, 1]`
//! (their minimum over `t >= 1` region), which keeps the declared direction
//! valid on all of `[0, ∞]` without touching the tail behavior that matters.

use super::{Direction, KnownClass};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `t`
    Identity,
    /// `t^lambda`, `lambda > 0`
    Power { lambda: f64 },
    /// `e^{p t}`, `p > 0`
    Exp { p: f64 },
    /// `exp(p t / (1 + log t))` for `t >= 1`, constant `e^p` below
    IwaniecMartin { p: f64 },
    /// `exp(u / (1 + log u))`, `u = (t+1)/2`, for `t >= 1`, constant `e` below
    BrakalovaJenkins,
    /// `0` on `[0, t0)`, `v` on `[t0, ∞]`
    Step { t0: f64, v: f64 },
    /// `1/t` (sense-reversing homeomorphism of `[0, ∞]`)
    Reciprocal,
    /// `log(1 + t)` (sense-preserving homeomorphism of `[0, ∞]`)
    Log1p,
}

impl ClosedForm {
    pub fn direction(&self) -> Direction {
        match self {
            ClosedForm::Reciprocal => Direction::NonIncreasing,
            _ => Direction::NonDecreasing,
        }
    }

    pub fn label(&self) -> String {
        match self {
            ClosedForm::Identity => "identity".into(),
            ClosedForm::Power { lambda } => format!("power({lambda})"),
            ClosedForm::Exp { p } => format!("exp({p})"),
            ClosedForm::IwaniecMartin { p } => format!("iwaniec_martin({p})"),
            ClosedForm::BrakalovaJenkins => "brakalova_jenkins".into(),
            ClosedForm::Step { t0, v } => format!("step({t0}, {v})"),
            ClosedForm::Reciprocal => "reciprocal".into(),
            ClosedForm::Log1p => "log1p".into(),
        }
    }

    /// Evaluation on `[0, ∞]`; `t` may be `f64::INFINITY`.
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ClosedForm::Identity => t,
            ClosedForm::Power { lambda } => {
                if t.is_infinite() {
                    f64::INFINITY
                } else {
                    t.powf(lambda)
                }
            }
            ClosedForm::Exp { p } => {
                if t.is_infinite() {
                    f64::INFINITY
                } else {
                    (p * t).exp()
                }
            }
            ClosedForm::IwaniecMartin { p } => {
                if t.is_infinite() {
                    return f64::INFINITY;
                }
                let s = t.max(1.0);
                (p * s / (1.0 + s.ln())).exp()
            }
            ClosedForm::BrakalovaJenkins => {
                if t.is_infinite() {
                    return f64::INFINITY;
                }
                let u = (t.max(1.0) + 1.0) / 2.0;
                (u / (1.0 + u.ln())).exp()
            }
            ClosedForm::Step { t0, v } => {
                if t >= t0 {
                    v
                } else {
                    0.0
                }
            }
            ClosedForm::Reciprocal => {
                if t == 0.0 {
                    f64::INFINITY
                } else if t.is_infinite() {
                    0.0
                } else {
                    1.0 / t
                }
            }
            ClosedForm::Log1p => {
                if t.is_infinite() {
                    f64::INFINITY
                } else {
                    t.ln_1p()
                }
            }
        }
    }

    /// `log f(t)` evaluated directly, so growth functions whose values
    /// overflow `f64` still report their (representable) logarithm.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match *self {
            ClosedForm::Identity => t.ln(),
            ClosedForm::Power { lambda } => lambda * t.ln(),
            ClosedForm::Exp { p } => p * t,
            ClosedForm::IwaniecMartin { p } => {
                if t.is_infinite() {
                    return f64::INFINITY;
                }
                let s = t.max(1.0);
                p * s / (1.0 + s.ln())
            }
            ClosedForm::BrakalovaJenkins => {
                if t.is_infinite() {
                    return f64::INFINITY;
                }
                let u = (t.max(1.0) + 1.0) / 2.0;
                u / (1.0 + u.ln())
            }
            ClosedForm::Step { t0, v } => {
                if t >= t0 {
                    v.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            ClosedForm::Reciprocal => -t.ln(),
            ClosedForm::Log1p => t.ln_1p().ln(),
        }
    }

    /// Generalized inverse where a closed form exists. `tau <= 0` resolves to
    /// `0` for non-decreasing forms (everything qualifies).
    pub fn exact_inverse(&self, tau: f64) -> Option<f64> {
        let v = match *self {
            ClosedForm::Identity => tau.max(0.0),
            ClosedForm::Power { lambda } => {
                if tau <= 0.0 {
                    0.0
                } else if tau.is_infinite() {
                    f64::INFINITY
                } else {
                    tau.powf(1.0 / lambda)
                }
            }
            ClosedForm::Exp { p } => {
                if tau.is_infinite() {
                    f64::INFINITY
                } else if tau <= 1.0 {
                    0.0
                } else {
                    tau.ln() / p
                }
            }
            ClosedForm::Step { t0, v } => {
                if tau <= 0.0 {
                    0.0
                } else if tau <= v {
                    t0
                } else {
                    f64::INFINITY
                }
            }
            ClosedForm::Reciprocal => {
                // inf { t : 1/t <= tau }
                if tau == 0.0 {
                    f64::INFINITY
                } else if tau.is_infinite() {
                    0.0
                } else {
                    1.0 / tau
                }
            }
            ClosedForm::Log1p => {
                if tau <= 0.0 {
                    0.0
                } else if tau.is_infinite() {
                    f64::INFINITY
                } else {
                    tau.exp_m1()
                }
            }
            ClosedForm::IwaniecMartin { .. } | ClosedForm::BrakalovaJenkins => return None,
        };
        Some(v)
    }

    /// `(log f)'(t)` where available in closed form; completed to `0` on the
    /// flat initial segment.
    pub fn h_prime(&self, t: f64) -> Option<f64> {
        let v = match *self {
            ClosedForm::Identity => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 / t
                }
            }
            ClosedForm::Power { lambda } => {
                if t == 0.0 {
                    f64::INFINITY
                } else {
                    lambda / t
                }
            }
            ClosedForm::Exp { p } => p,
            ClosedForm::IwaniecMartin { p } => {
                if t <= 1.0 {
                    0.0
                } else {
                    let l = t.ln();
                    p * l / ((1.0 + l) * (1.0 + l))
                }
            }
            ClosedForm::BrakalovaJenkins => {
                if t <= 1.0 {
                    0.0
                } else {
                    let u = (t + 1.0) / 2.0;
                    let l = u.ln();
                    0.5 * l / ((1.0 + l) * (1.0 + l))
                }
            }
            ClosedForm::Step { .. } => 0.0,
            ClosedForm::Reciprocal | ClosedForm::Log1p => return None,
        };
        Some(v)
    }

    /// Supremum of the zero set (`0` when the function is positive at `0`).
    pub fn zero_set_sup(&self) -> f64 {
        match *self {
            ClosedForm::Step { t0, .. } => t0,
            _ => 0.0,
        }
    }

    pub fn absolutely_continuous(&self) -> bool {
        !matches!(self, ClosedForm::Step { .. })
    }

    /// Family-level verdict of the growth conditions, used only to cross-check
    /// the numeric protocol.
    pub fn known_class(&self) -> Option<KnownClass> {
        match self {
            ClosedForm::Identity | ClosedForm::Power { .. } | ClosedForm::Step { .. } => {
                Some(KnownClass::Convergent)
            }
            ClosedForm::Exp { .. }
            | ClosedForm::IwaniecMartin { .. }
            | ClosedForm::BrakalovaJenkins => Some(KnownClass::Divergent),
            _ => None,
        }
    }

    /// Whether this form is a strictly monotone bijection of `[0, ∞]`.
    pub fn is_homeomorphism(&self) -> bool {
        matches!(
            self,
            ClosedForm::Identity
                | ClosedForm::Reciprocal
                | ClosedForm::Log1p
                | ClosedForm::Power { .. }
        )
    }
}

/// A parsed registry tag: either a closed form or a reference to a sewn
/// artifact the caller has to resolve (file path or in-memory name).
#[derive(Debug, Clone, PartialEq)]
pub enum TagSpec {
    Closed(ClosedForm),
    Sewn(String),
}

/// Parses the tag grammar used in configs: `identity`, `power(2)`, `exp(1)`,
/// `iwaniec_martin(1)`, `brakalova_jenkins`, `step(1, 2)`, `sewn(path)`.
pub fn parse_tag(tag: &str) -> Result<TagSpec, String> {
    let tag = tag.trim();
    let (name, args) = match tag.find('(') {
        Some(i) => {
            if !tag.ends_with(')') {
                return Err(format!("malformed tag {tag:?}: missing ')'"));
            }
            (&tag[..i], Some(&tag[i + 1..tag.len() - 1]))
        }
        None => (tag, None),
    };
    let parse_f64 = |s: &str| -> Result<f64, String> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad numeric argument {s:?} in tag {tag:?}"))
    };
    let need_args = |n: usize| -> Result<Vec<&str>, String> {
        let raw = args.ok_or_else(|| format!("tag {tag:?} needs {n} argument(s)"))?;
        let parts: Vec<&str> = raw.split(',').collect();
        if parts.len() != n {
            return Err(format!("tag {tag:?} needs {n} argument(s)"));
        }
        Ok(parts)
    };
    let closed = match name {
        "identity" => ClosedForm::Identity,
        "power" => ClosedForm::Power {
            lambda: parse_f64(need_args(1)?[0])?,
        },
        "exp" => ClosedForm::Exp {
            p: parse_f64(need_args(1)?[0])?,
        },
        "iwaniec_martin" => ClosedForm::IwaniecMartin {
            p: parse_f64(need_args(1)?[0])?,
        },
        "brakalova_jenkins" => ClosedForm::BrakalovaJenkins,
        "step" => {
            let a = need_args(2)?;
            ClosedForm::Step {
                t0: parse_f64(a[0])?,
                v: parse_f64(a[1])?,
            }
        }
        "reciprocal" => ClosedForm::Reciprocal,
        "log1p" => ClosedForm::Log1p,
        "sewn" => {
            let a = need_args(1)?;
            return Ok(TagSpec::Sewn(a[0].trim().to_string()));
        }
        other => return Err(format!("unknown function tag {other:?}")),
    };
    Ok(TagSpec::Closed(closed))
}
