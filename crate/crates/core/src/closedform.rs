//! Closed forms for the expected straight-line distance to the boundary of
//! the unit n-ball from a uniform interior point.

use std::f64::consts::PI;

use libm::lgamma;

use crate::error::{Error, Result};
use crate::geom::{ball_volume, sphere_surface};

/// Dimensions up to this use the exact half-integer product instead of
/// log-Γ differences.
const PRODUCT_MAX_DIM: usize = 200;

/// Expected escape time of the straight line from a uniform point of the
/// unit n-ball, `(2/√π) Γ((n+2)/2) / Γ((n+3)/2)`.
pub fn expected_linear_escape(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    if n <= PRODUCT_MAX_DIM {
        // n = 2m-1: 2 ∏ (2j-1)/(2j);  n = 2m: (4/π) ∏ 2j/(2j+1)
        let m = n.div_ceil(2);
        if n % 2 == 1 {
            2.0 * (1..=m).map(|j| (2 * j - 1) as f64 / (2 * j) as f64).product::<f64>()
        } else {
            4.0 / PI * (1..=m).map(|j| (2 * j) as f64 / (2 * j + 1) as f64).product::<f64>()
        }
    } else {
        let x = n as f64;
        2.0 / PI.sqrt() * (lgamma((x + 2.0) / 2.0) - lgamma((x + 3.0) / 2.0)).exp()
    }
}

/// Half the chord through height `r` of the unit disk, `√(1 − r²)`.
pub fn half_chord_length(r: f64) -> Result<f64> {
    check_unit_interval(r)?;
    Ok((1.0 - r * r).max(0.0).sqrt())
}

/// Density of the height of a uniform point in the unit disk,
/// `(2/π)√(1 − r²)`.
pub fn chord_marginal_density(r: f64) -> Result<f64> {
    Ok(2.0 / PI * half_chord_length(r)?)
}

/// `∫₀¹ r^{n−2} − r^n dr = 2/(n² − 1)`.
pub fn radial_integral(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let x = n as f64;
    Ok(2.0 / (x * x - 1.0))
}

/// The same expectation assembled from its pieces,
/// `(2/ω_n) · 2σ_{n−2}/(n² − 1)`.
pub fn assemble_expectation(n: usize) -> Result<f64> {
    let radial = radial_integral(n)?;
    Ok(2.0 / ball_volume(n) * sphere_surface(n - 2) * radial)
}

fn check_unit_interval(r: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&r) {
        Ok(())
    } else {
        Err(Error::OutOfRange(r))
    }
}
