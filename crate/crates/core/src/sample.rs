//! Deterministic low-discrepancy sampling (Halton sequences).

/// The `i`-th element (1-based) of the van der Corput sequence in `base`.
pub fn van_der_corput(mut i: u64, base: u64) -> f64 {
    let mut q = 0.0;
    let mut bk = 1.0 / (base as f64);
    while i > 0 {
        q += ((i % base) as f64) * bk;
        i /= base;
        bk /= base as f64;
    }
    q
}

/// 2-D Halton points (bases 2 and 3), skipping the degenerate zeroth element.
pub fn halton_2d(n: usize) -> Vec<(f64, f64)> {
    (1..=n as u64)
        .map(|i| (van_der_corput(i, 2), van_der_corput(i, 3)))
        .collect()
}

/// Halton points mapped to the annulus `r_min < |z| < r_max`, uniform in
/// `(r, theta)`.
pub fn halton_annulus(n: usize, r_min: f64, r_max: f64) -> Vec<(f64, f64)> {
    halton_2d(n)
        .into_iter()
        .map(|(u, v)| {
            let r = r_min + (r_max - r_min) * u;
            let theta = std::f64::consts::TAU * v;
            (r, theta)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_elements_match_known_values() {
        assert_eq!(van_der_corput(1, 2), 0.5);
        assert_eq!(van_der_corput(2, 2), 0.25);
        assert_eq!(van_der_corput(3, 2), 0.75);
        assert!((van_der_corput(1, 3) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn annulus_points_stay_inside() {
        for (r, theta) in halton_annulus(100, 0.1, 0.9) {
            assert!(r >= 0.1 && r <= 0.9);
            assert!((0.0..std::f64::consts::TAU).contains(&theta));
        }
    }
}
