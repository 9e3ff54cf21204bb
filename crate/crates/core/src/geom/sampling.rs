use rand::Rng;
use rand_distr::StandardNormal;

use super::vector::VectorN;

/// Uniform point on the unit sphere `S^{n-1}`.
pub fn uniform_sphere_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> VectorN {
    assert!(n >= 1, "dimension must be positive");
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return VectorN::from_vec_unchecked(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

/// Uniform point in the closed unit n-ball: a uniform direction scaled by
/// `U^{1/n}`.
pub fn uniform_ball_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> VectorN {
    let dir = uniform_sphere_sample(n, rng);
    let u: f64 = rng.random();
    let r = u.powf(1.0 / n as f64);
    dir.scale(r)
}

/// Uniform point in the axis-aligned box `[lo, hi]`.
pub fn uniform_box_sample<R: Rng + ?Sized>(lo: &[f64], hi: &[f64], out: &mut [f64], rng: &mut R) {
    for ((o, &a), &b) in out.iter_mut().zip(lo).zip(hi) {
        let u: f64 = rng.random();
        *o = a + (b - a) * u;
    }
}
