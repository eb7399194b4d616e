//! Complex coefficients and their dilatations.
//!
//! A coefficient field is a measurable `mu : D -> C` with `|mu| < 1` a.e.
//! From it come the pointwise maximal dilatation
//! `K(z) = (1+|mu|)/(1-|mu|)`, the tangential dilatation relative to a
//! basepoint
//!
//! ```text
//!   KT(z, z0) = |1 - (conj(z-z0)/(z-z0)) mu(z)|^2 / (1 - |mu(z)|^2)
//! ```
//!
//! (with `conj(z)/z` replacing the ratio when the basepoint is infinity),
//! and circle averages of `KT`, the quantity the solvability tests integrate.
//! The chain `1/K <= KT <= K` holds pointwise wherever `mu` is valid.
//!
//! Coefficients with `|mu| >= 1` at a point are invalid samples: closed-form
//! fields treat them as errors, grid fields clamp them just inside the unit
//! disk and count the clamps, and circle averages exclude isolated invalid
//! nodes (reporting the count) in keeping with the a.e. hypotheses.

use crate::ext::ExtReal;
use crate::quad::{periodic_mean, QuadOutcome};
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Domain {
    Disk { r_outer: f64 },
    Annulus { r_inner: f64, r_outer: f64 },
    Plane,
    Exterior { r_inner: f64 },
}

impl Domain {
    pub fn contains_radius(&self, r: f64) -> bool {
        match *self {
            Domain::Disk { r_outer } => r < r_outer,
            Domain::Annulus { r_inner, r_outer } => r > r_inner && r < r_outer,
            Domain::Plane => true,
            Domain::Exterior { r_inner } => r > r_inner,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.contains_radius(z.norm())
    }
}

/// Basepoint of a tangential dilatation: a finite point or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basepoint {
    Point(Complex64),
    Infinity,
}

#[derive(Debug, Error)]
pub enum DilatationError {
    #[error("invalid coefficient: |mu| = {0} >= 1")]
    InvalidCoefficient(f64),
    #[error("tangential dilatation undefined: z coincides with the basepoint")]
    UndefinedDirection,
    #[error("circle |z - z0| = {r} leaves the field domain")]
    OutsideDomain { r: f64 },
    #[error("polar grid: {0}")]
    BadGrid(String),
}

/// Maximal dilatation of a coefficient value.
pub fn k_max(mu: Complex64) -> Result<ExtReal, DilatationError> {
    let m = mu.norm();
    if m >= 1.0 {
        return Err(DilatationError::InvalidCoefficient(m));
    }
    Ok(ExtReal::new((1.0 + m) / (1.0 - m)))
}

/// Maximal dilatation with the degenerate-point convention: a caller that
/// knows `f_z = 0` at this point flags it and gets `K = 1` (`mu := 0`).
/// The flag is about a mapping, not the coefficient; it is never inferred.
pub fn k_max_flagged(mu: Complex64, degenerate_point: bool) -> Result<ExtReal, DilatationError> {
    if degenerate_point {
        return Ok(ExtReal::ONE);
    }
    k_max(mu)
}

/// Tangential dilatation of a coefficient value at `z` relative to `z0`.
pub fn k_tangential(
    mu: Complex64,
    z: Complex64,
    z0: Basepoint,
) -> Result<ExtReal, DilatationError> {
    let m = mu.norm();
    if m >= 1.0 {
        return Err(DilatationError::InvalidCoefficient(m));
    }
    let dir = match z0 {
        Basepoint::Point(p) => {
            let d = z - p;
            if d.norm() == 0.0 {
                return Err(DilatationError::UndefinedDirection);
            }
            d.conj() / d
        }
        Basepoint::Infinity => {
            if z.norm() == 0.0 {
                return Err(DilatationError::UndefinedDirection);
            }
            z.conj() / z
        }
    };
    let num = (Complex64::new(1.0, 0.0) - dir * mu).norm_sqr();
    let den = 1.0 - m * m;
    Ok(ExtReal::new(num / den))
}

type RadialProfile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type PointFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum FieldKind {
    Zero,
    Constant(Complex64),
    /// `mu(z) = -(z/conj z) (K(r)-1)/(K(r)+1)` for a radial profile `K >= 1`:
    /// the pure radial stretch, with `K_mu = KT(., 0) = KT(., inf) = K(|z|)`.
    RadialStretch { k: RadialProfile },
    /// `mu(z) = |z|` (clamped below 1): radial modulus, no angular factor.
    RadialModulus,
    /// `mu(z) = ((z-z0)/conj(z-z0)) t`: attains the lower bound
    /// `KT(z, z0) = 1/K`.
    TangentialFloor { z0: Complex64, t: f64 },
    Grid(Arc<PolarGrid>),
    Custom(PointFn),
}

/// A complex coefficient on a planar domain.
#[derive(Clone)]
pub struct CoefficientField {
    pub domain: Domain,
    kind: FieldKind,
    label: String,
}

impl std::fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CoefficientField({}, {:?})", self.label, self.domain)
    }
}

impl CoefficientField {
    pub fn zero(domain: Domain) -> CoefficientField {
        CoefficientField {
            domain,
            kind: FieldKind::Zero,
            label: "zero".into(),
        }
    }

    pub fn constant(domain: Domain, c: Complex64) -> CoefficientField {
        CoefficientField {
            domain,
            kind: FieldKind::Constant(c),
            label: format!("constant({c})"),
        }
    }

    /// Radial stretch with dilatation profile `k(r) >= 1`.
    pub fn radial_stretch(
        domain: Domain,
        label: impl Into<String>,
        k: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> CoefficientField {
        CoefficientField {
            domain,
            kind: FieldKind::RadialStretch { k: Arc::new(k) },
            label: label.into(),
        }
    }

    pub fn radial_modulus(domain: Domain) -> CoefficientField {
        CoefficientField {
            domain,
            kind: FieldKind::RadialModulus,
            label: "radial_modulus".into(),
        }
    }

    pub fn tangential_floor(domain: Domain, z0: Complex64, t: f64) -> CoefficientField {
        assert!((0.0..1.0).contains(&t));
        CoefficientField {
            domain,
            kind: FieldKind::TangentialFloor { z0, t },
            label: format!("tangential_floor({t})"),
        }
    }

    pub fn from_grid(domain: Domain, grid: PolarGrid) -> CoefficientField {
        CoefficientField {
            domain,
            kind: FieldKind::Grid(Arc::new(grid)),
            label: "grid".into(),
        }
    }

    pub fn custom(
        domain: Domain,
        label: impl Into<String>,
        f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> CoefficientField {
        CoefficientField {
            domain,
            kind: FieldKind::Custom(Arc::new(f)),
            label: label.into(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Raw coefficient value (grid fields clamp and count internally).
    pub fn mu(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            FieldKind::Zero => Complex64::new(0.0, 0.0),
            FieldKind::Constant(c) => *c,
            FieldKind::RadialStretch { k } => {
                let r = z.norm();
                if r == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let kv = (k)(r).max(1.0);
                let kappa = if kv.is_infinite() {
                    1.0
                } else {
                    (kv - 1.0) / (kv + 1.0)
                };
                -(z / z.conj()) * kappa
            }
            FieldKind::RadialModulus => Complex64::new(z.norm().min(1.0 - 1e-12), 0.0),
            FieldKind::TangentialFloor { z0, t } => {
                let d = z - z0;
                if d.norm() == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                (d / d.conj()) * *t
            }
            FieldKind::Grid(g) => g.interpolate(z).0,
            FieldKind::Custom(f) => f(z),
        }
    }

    /// Exact tangential dilatation where the construction provides one;
    /// avoids the precision loss of reconstructing `K` from `|mu| ~ 1`.
    fn kt_exact(&self, z: Complex64, z0: Basepoint) -> Option<f64> {
        match (&self.kind, z0) {
            (FieldKind::Zero, _) => Some(1.0),
            (FieldKind::RadialStretch { k }, Basepoint::Infinity) => Some((k)(z.norm()).max(1.0)),
            (FieldKind::RadialStretch { k }, Basepoint::Point(p)) if p.norm() == 0.0 => {
                Some((k)(z.norm()).max(1.0))
            }
            (FieldKind::TangentialFloor { z0: c, t }, Basepoint::Point(p))
                if (p - c).norm() == 0.0 =>
            {
                Some((1.0 - t) / (1.0 + t))
            }
            _ => None,
        }
    }

    /// Exact maximal dilatation where available.
    pub fn k_max_exact(&self, z: Complex64) -> Option<f64> {
        match &self.kind {
            FieldKind::Zero => Some(1.0),
            FieldKind::RadialStretch { k } => Some((k)(z.norm()).max(1.0)),
            _ => None,
        }
    }

    /// Tangential dilatation of the field at `z`; `None` marks an invalid
    /// sample (`|mu| >= 1`).
    pub fn k_tangential(&self, z: Complex64, z0: Basepoint) -> Option<f64> {
        if let Some(v) = self.kt_exact(z, z0) {
            return Some(v);
        }
        let mu = self.mu(z);
        match k_tangential(mu, z, z0) {
            Ok(v) => Some(v.to_f64()),
            Err(_) => None,
        }
    }

    /// Maximal dilatation of the field at `z`; `None` for invalid samples.
    pub fn k_max_at(&self, z: Complex64) -> Option<f64> {
        if let Some(v) = self.k_max_exact(z) {
            return Some(v);
        }
        k_max(self.mu(z)).ok().map(|v| v.to_f64())
    }
}

/// `K`, `KT` (w.r.t. a finite basepoint) and `KT` w.r.t. infinity at one
/// point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DilatationSample {
    pub z: (f64, f64),
    pub k: ExtReal,
    pub kt: ExtReal,
    pub kt_inf: ExtReal,
}

/// Samples all three dilatations at `z` (basepoint `z0` finite).
pub fn sample(
    field: &CoefficientField,
    z: Complex64,
    z0: Complex64,
) -> Result<DilatationSample, DilatationError> {
    let mu = field.mu(z);
    Ok(DilatationSample {
        z: (z.re, z.im),
        k: k_max(mu)?,
        kt: k_tangential(mu, z, Basepoint::Point(z0))?,
        kt_inf: k_tangential(mu, z, Basepoint::Infinity)?,
    })
}

/// Circle average of the tangential dilatation over `|z - z0| = r`
/// (`|z| = r` for the basepoint at infinity).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CircleAverage {
    pub r: f64,
    pub value: ExtReal,
    pub converged: bool,
    pub invalid_nodes: usize,
}

/// Trapezoidal quadrature in the angle with node doubling from 64 until the
/// relative change drops below `1e-9` (node cap `2^20`). Isolated invalid
/// samples are excluded and counted; a circle where the integrand is
/// genuinely singular comes back as `∞` with the convergence flag down.
pub fn circle_average_kt(
    field: &CoefficientField,
    z0: Basepoint,
    r: f64,
) -> Result<CircleAverage, DilatationError> {
    let center = match z0 {
        Basepoint::Point(p) => p,
        Basepoint::Infinity => Complex64::new(0.0, 0.0),
    };
    match z0 {
        Basepoint::Point(p) => {
            // domain check at four compass points of the circle
            for q in [0.0, 0.5, 1.0, 1.5] {
                let th = q * std::f64::consts::PI;
                let rr = (p + Complex64::from_polar(r, th)).norm();
                if !field.domain.contains_radius(rr) {
                    return Err(DilatationError::OutsideDomain { r });
                }
            }
        }
        Basepoint::Infinity => {
            if !field.domain.contains_radius(r) {
                return Err(DilatationError::OutsideDomain { r });
            }
        }
    }
    let f = |theta: f64| -> Option<f64> {
        let z = center + Complex64::from_polar(r, theta);
        field.k_tangential(z, z0)
    };
    let QuadOutcome {
        value,
        converged,
        invalid_nodes,
    } = periodic_mean(&f, 64, 1 << 20, 1e-9);
    Ok(CircleAverage {
        r,
        value: if value.is_finite() {
            ExtReal::new(value.max(0.0))
        } else {
            ExtReal::Infinity
        },
        converged,
        invalid_nodes,
    })
}

/// Polar grid of coefficient samples, bilinear in `(log r, theta)`.
pub struct PolarGrid {
    /// sorted radii
    pub r_values: Vec<f64>,
    /// uniform angles `2 pi j / n`, `j = 0..n`
    pub theta_count: usize,
    /// `values[i * theta_count + j]` at `(r_values[i], theta_j)`
    pub values: Vec<Complex64>,
    clamped: std::sync::atomic::AtomicUsize,
}

impl PolarGrid {
    pub fn new(
        r_values: Vec<f64>,
        theta_count: usize,
        values: Vec<Complex64>,
    ) -> Result<PolarGrid, DilatationError> {
        if r_values.len() < 2 || theta_count < 4 {
            return Err(DilatationError::BadGrid(
                "need at least 2 radii and 4 angles".into(),
            ));
        }
        if values.len() != r_values.len() * theta_count {
            return Err(DilatationError::BadGrid(format!(
                "expected {} values, got {}",
                r_values.len() * theta_count,
                values.len()
            )));
        }
        if r_values.windows(2).any(|w| w[1] <= w[0]) || r_values[0] <= 0.0 {
            return Err(DilatationError::BadGrid(
                "radii must be positive increasing".into(),
            ));
        }
        Ok(PolarGrid {
            r_values,
            theta_count,
            values,
            clamped: std::sync::atomic::AtomicUsize::new(0),
        })
    }

    /// Parses CSV rows `r, theta, re_mu, im_mu` into a complete grid.
    pub fn from_csv(text: &str) -> Result<PolarGrid, DilatationError> {
        let mut rows: Vec<(f64, f64, Complex64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(DilatationError::BadGrid(format!(
                    "line {}: expected 4 columns (r, theta, re_mu, im_mu)",
                    lineno + 1
                )));
            }
            let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.parse::<f64>()).collect();
            let nums =
                nums.map_err(|e| DilatationError::BadGrid(format!("line {}: {e}", lineno + 1)))?;
            rows.push((nums[0], nums[1], Complex64::new(nums[2], nums[3])));
        }
        let mut r_values: Vec<f64> = rows.iter().map(|r| r.0).collect();
        r_values.sort_by(f64::total_cmp);
        r_values.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        if r_values.is_empty() {
            return Err(DilatationError::BadGrid("no data rows".into()));
        }
        let theta_count = rows.len() / r_values.len();
        if theta_count * r_values.len() != rows.len() {
            return Err(DilatationError::BadGrid(
                "rows do not form a complete (r, theta) grid".into(),
            ));
        }
        let two_pi = std::f64::consts::TAU;
        let mut values = vec![Complex64::new(0.0, 0.0); rows.len()];
        for (r, theta, v) in rows {
            let i = r_values
                .iter()
                .position(|x| (x - r).abs() < 1e-12 * r.max(1e-300))
                .ok_or_else(|| DilatationError::BadGrid("radius lookup failed".into()))?;
            let j = ((theta / two_pi * theta_count as f64).round() as usize) % theta_count;
            values[i * theta_count + j] = v;
        }
        PolarGrid::new(r_values, theta_count, values)
    }

    pub fn clamped_count(&self) -> usize {
        self.clamped.load(std::sync::atomic::Ordering::Relaxed)
    }

    /// Bilinear interpolation in `(log r, theta)`; values landing on or past
    /// the unit circle are clamped to `(1 - 1e-12)` of their direction and
    /// counted.
    pub fn interpolate(&self, z: Complex64) -> (Complex64, bool) {
        let (r, theta) = (z.norm(), z.arg().rem_euclid(std::f64::consts::TAU));
        let r = r.clamp(self.r_values[0], *self.r_values.last().unwrap());
        let i = self
            .r_values
            .partition_point(|x| *x <= r)
            .clamp(1, self.r_values.len() - 1);
        let (r0, r1) = (self.r_values[i - 1], self.r_values[i]);
        let wr = ((r.ln() - r0.ln()) / (r1.ln() - r0.ln())).clamp(0.0, 1.0);
        let n = self.theta_count;
        let tj = theta / std::f64::consts::TAU * n as f64;
        let j0 = (tj.floor() as usize) % n;
        let j1 = (j0 + 1) % n;
        let wt = tj - tj.floor();
        let at = |ri: usize, j: usize| self.values[ri * n + j];
        let lower = at(i - 1, j0) * (1.0 - wt) + at(i - 1, j1) * wt;
        let upper = at(i, j0) * (1.0 - wt) + at(i, j1) * wt;
        let v = lower * (1.0 - wr) + upper * wr;
        if v.norm() >= 1.0 {
            self.clamped
                .fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            ((v / v.norm()) * (1.0 - 1e-12), true)
        } else {
            (v, false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn k_max_formula() {
        assert_eq!(k_max(c(0.0, 0.0)).unwrap(), ExtReal::ONE);
        assert_eq!(k_max(c(0.5, 0.0)).unwrap(), ExtReal::new(3.0));
        assert!(k_max(c(1.0, 0.0)).is_err());
        assert_eq!(k_max_flagged(c(0.9, 0.0), true).unwrap(), ExtReal::ONE);
    }

    #[test]
    fn radial_family_k_is_one_over_r() {
        // mu = -(z/conj z)(1-r)/(1+r) has K = 1/r
        let r = 0.25;
        let z = Complex64::from_polar(r, 0.7);
        let kappa = (1.0 - r) / (1.0 + r);
        let mu = -(z / z.conj()) * kappa;
        let k = k_max(mu).unwrap().to_f64();
        assert!((k - 4.0).abs() < 1e-12, "{k}");
    }

    #[test]
    fn tangential_matches_radial_stretch() {
        // the radial stretch has KT(., 0) = K(|z|)
        let z = Complex64::from_polar(0.2, 1.3);
        let kv: f64 = 5.0;
        let mu = -(z / z.conj()) * ((kv - 1.0) / (kv + 1.0));
        let kt = k_tangential(mu, z, Basepoint::Point(c(0.0, 0.0)))
            .unwrap()
            .to_f64();
        assert!((kt - kv).abs() < 1e-10, "{kt}");
        // and w.r.t. infinity the same formula applies
        let kt_inf = k_tangential(mu, z, Basepoint::Infinity).unwrap().to_f64();
        assert!((kt_inf - kv).abs() < 1e-10, "{kt_inf}");
    }

    #[test]
    fn tangential_floor_attains_lower_bound() {
        let z0 = c(0.3, -0.2);
        let t = 0.4;
        let z = z0 + Complex64::from_polar(0.13, 2.1);
        let mu = ((z - z0) / (z - z0).conj()) * t;
        let kt = k_tangential(mu, z, Basepoint::Point(z0)).unwrap().to_f64();
        let k = k_max(mu).unwrap().to_f64();
        assert!((kt - (1.0 - t) / (1.0 + t)).abs() < 1e-12);
        assert!((kt - 1.0 / k).abs() < 1e-12);
    }

    #[test]
    fn tangential_requires_direction() {
        let z = c(0.5, 0.5);
        assert!(matches!(
            k_tangential(c(0.1, 0.0), z, Basepoint::Point(z)),
            Err(DilatationError::UndefinedDirection)
        ));
    }

    #[test]
    fn chain_bounds_hold_at_random_points() {
        for (i, (u, v)) in crate::sample::halton_2d(200).into_iter().enumerate() {
            let mu = Complex64::from_polar(0.97 * u, std::f64::consts::TAU * v);
            let z = Complex64::from_polar(0.5 + 0.4 * v, 1.0 + u);
            let z0 = if i % 2 == 0 {
                Basepoint::Point(c(-0.1, 0.05))
            } else {
                Basepoint::Infinity
            };
            let k = k_max(mu).unwrap().to_f64();
            let kt = k_tangential(mu, z, z0).unwrap().to_f64();
            assert!(
                kt <= k * (1.0 + 1e-12) && kt >= (1.0 / k) * (1.0 - 1e-12),
                "1/K = {}, KT = {kt}, K = {k}",
                1.0 / k
            );
        }
    }

    #[test]
    fn circle_average_of_zero_field_is_one() {
        let field = CoefficientField::zero(Domain::Disk { r_outer: 1.0 });
        for r in [0.1, 0.5, 0.9] {
            let avg = circle_average_kt(&field, Basepoint::Point(c(0.0, 0.0)), r).unwrap();
            assert!(avg.converged);
            assert!((avg.value.to_f64() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_average_radial_stretch_is_profile() {
        let field =
            CoefficientField::radial_stretch(Domain::Disk { r_outer: 1.0 }, "inv_r", |r| 1.0 / r);
        let avg = circle_average_kt(&field, Basepoint::Point(c(0.0, 0.0)), 0.25).unwrap();
        assert!((avg.value.to_f64() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn circle_average_radial_modulus_closed_form() {
        // mu(z) = |z|: average of |1 - e^{-2 i theta}/2|^2/(3/4) over the
        // circle r = 1/2 is (1 + 1/4)/(3/4) = 5/3
        let field = CoefficientField::radial_modulus(Domain::Disk { r_outer: 1.0 });
        let avg = circle_average_kt(&field, Basepoint::Point(c(0.0, 0.0)), 0.5).unwrap();
        assert!(avg.converged);
        assert!(
            (avg.value.to_f64() - 5.0 / 3.0).abs() < 1e-9,
            "{:?}",
            avg.value
        );
    }

    #[test]
    fn formula_and_exact_paths_agree_for_radial_stretch() {
        let field =
            CoefficientField::radial_stretch(Domain::Disk { r_outer: 1.0 }, "pow", |r| {
                r.powf(-2.0 / 3.0)
            });
        for r in [0.2, 0.5, 0.8] {
            let z = Complex64::from_polar(r, 0.9);
            let exact = field.k_tangential(z, Basepoint::Point(c(0.0, 0.0))).unwrap();
            let formula = k_tangential(field.mu(z), z, Basepoint::Point(c(0.0, 0.0)))
                .unwrap()
                .to_f64();
            assert!((exact - formula).abs() < 1e-9 * exact, "{exact} vs {formula}");
        }
    }

    #[test]
    fn quadrature_doubling_converges_on_smooth_fields() {
        let field = CoefficientField::custom(Domain::Disk { r_outer: 1.0 }, "smooth", |z| {
            Complex64::new(0.3 * (z.re * 3.0).sin(), 0.3 * (z.im * 2.0).cos())
        });
        let avg = circle_average_kt(&field, Basepoint::Point(c(0.1, 0.0)), 0.5).unwrap();
        assert!(avg.converged);
        assert_eq!(avg.invalid_nodes, 0);
    }

    #[test]
    fn singular_circle_returns_infinity_flagged() {
        // |mu| = 1 on the whole circle r = 0.5
        let field = CoefficientField::custom(Domain::Disk { r_outer: 1.0 }, "bad", |z| {
            if (z.norm() - 0.5).abs() < 0.01 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let avg = circle_average_kt(&field, Basepoint::Point(c(0.0, 0.0)), 0.5).unwrap();
        assert!(avg.value.is_infinite());
        assert!(!avg.converged);
    }

    #[test]
    fn circle_outside_domain_rejected() {
        let field = CoefficientField::zero(Domain::Disk { r_outer: 0.5 });
        assert!(matches!(
            circle_average_kt(&field, Basepoint::Point(c(0.0, 0.0)), 0.7),
            Err(DilatationError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn grid_interpolates_and_clamps() {
        let r_values = vec![0.1, 0.2, 0.4, 0.8];
        let n = 8;
        let mut values = vec![c(0.5, 0.0); r_values.len() * n];
        values[5] = c(1.5, 0.0);
        let grid = PolarGrid::new(r_values, n, values).unwrap();
        let (v, clamped) = grid.interpolate(Complex64::from_polar(0.3, 0.1));
        assert!(!clamped);
        assert!((v.norm() - 0.5).abs() < 1e-12);
        // near the poisoned node the interpolant may clamp but stays valid
        let (w, _) = grid.interpolate(Complex64::from_polar(
            0.1,
            std::f64::consts::TAU * 5.0 / 8.0,
        ));
        assert!(w.norm() < 1.0);
    }

    #[test]
    fn grid_csv_roundtrip() {
        let mut csv = String::new();
        for &r in &[0.25f64, 0.5, 1.0] {
            for j in 0..4 {
                let th = std::f64::consts::TAU * j as f64 / 4.0;
                csv.push_str(&format!("{r}, {th}, {}, 0.0\n", 0.1 * r));
            }
        }
        let grid = PolarGrid::from_csv(&csv).unwrap();
        let (v, _) = grid.interpolate(Complex64::from_polar(0.5, 0.0));
        assert!((v.re - 0.05).abs() < 1e-12, "{v}");
    }
}
