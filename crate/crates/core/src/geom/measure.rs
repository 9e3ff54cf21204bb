use std::f64::consts::PI;

use libm::lgamma;

/// Volume of the unit n-ball, `π^{n/2} / Γ(n/2 + 1)`.
pub fn ball_volume(n: usize) -> f64 {
    assert!(n >= 1, "ball dimension must be positive");
    let half = n as f64 / 2.0;
    (half * PI.ln() - lgamma(half + 1.0)).exp()
}

/// Surface measure of the unit m-sphere `S^m ⊂ R^{m+1}`,
/// `2 π^{(m+1)/2} / Γ((m+1)/2)`.
pub fn sphere_surface(m: usize) -> f64 {
    let half = (m as f64 + 1.0) / 2.0;
    2.0 * (half * PI.ln() - lgamma(half)).exp()
}
