use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::vector::{Point2, VectorN};
use crate::error::{Error, Result};

/// A finite family of balls `B(center_i, radius_i)` in a common dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig", into = "RawConfig")]
pub struct DiskConfig {
    centers: Vec<VectorN>,
    radii: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawConfig {
    centers: Vec<VectorN>,
    radii: Vec<f64>,
}

impl TryFrom<RawConfig> for DiskConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        DiskConfig::new(raw.centers, raw.radii)
    }
}

impl From<DiskConfig> for RawConfig {
    fn from(c: DiskConfig) -> Self {
        RawConfig { centers: c.centers, radii: c.radii }
    }
}

impl DiskConfig {
    pub fn new(centers: Vec<VectorN>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidConfig("no disks".into()));
        }
        if centers.len() != radii.len() {
            return Err(Error::InvalidConfig(format!(
                "{} centers but {} radii",
                centers.len(),
                radii.len()
            )));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidConfig(format!("radius {r} is not positive")));
        }
        let dim = centers[0].dim();
        if let Some(c) = centers.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
        }
        Ok(Self { centers, radii })
    }

    /// All radii equal to one.
    pub fn unit(centers: Vec<VectorN>) -> Result<Self> {
        let radii = vec![1.0; centers.len()];
        Self::new(centers, radii)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn centers(&self) -> &[VectorN] {
        &self.centers
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// The sub-family selected by `indices`.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.centers[i].clone()).collect(),
            indices.iter().map(|&i| self.radii[i]).collect(),
        )
    }

    /// Planar disks; errors unless every center is 2D.
    pub fn disks_2d(&self) -> Result<Vec<Disk>> {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, &r)| Ok(Disk::new(c.to_point2()?, r)))
            .collect()
    }

    /// Whether `x` lies in every ball (within `tol`).
    pub fn contains_in_all(&self, x: &[f64], tol: f64) -> bool {
        self.centers.iter().zip(&self.radii).all(|(c, &r)| {
            let d2: f64 = c.coords().iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 <= (r + tol) * (r + tol)
        })
    }

    /// Whether `x` lies in at least one ball.
    pub fn contains_in_any(&self, x: &[f64]) -> bool {
        self.centers.iter().zip(&self.radii).any(|(c, &r)| {
            let d2: f64 = c.coords().iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 <= r * r
        })
    }

    /// Axis-aligned bounding box of the union of the balls.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let dim = self.dim();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for (c, &r) in self.centers.iter().zip(&self.radii) {
            for (k, &x) in c.coords().iter().enumerate() {
                lo[k] = lo[k].min(x - r);
                hi[k] = hi[k].max(x + r);
            }
        }
        (lo, hi)
    }
}

/// A closed planar disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub const fn new(center: Point2, radius: f64) -> Self {
        Self { center, radius }
    }

    pub const fn unit(center: Point2) -> Self {
        Self { center, radius: 1.0 }
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    pub fn contains_point(&self, p: Point2, tol: f64) -> bool {
        self.center.distance(p) <= self.radius + tol
    }

    pub fn point_at(&self, angle: f64) -> Point2 {
        self.center + Point2::polar(self.radius, angle)
    }
}

/// Area of the intersection of two disks with radii `r1`, `r2` whose centers
/// are `d` apart.
pub fn lens_area(d: f64, r1: f64, r2: f64) -> f64 {
    let d = d.abs();
    if d >= r1 + r2 {
        return 0.0;
    }
    let small = r1.min(r2);
    if d <= (r1 - r2).abs() {
        return PI * small * small;
    }
    if r1 == r2 {
        let r = r1;
        let half = d / (2.0 * r);
        return r * r * (2.0 * half.acos() - 2.0 * half * (1.0 - half * half).sqrt());
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let kite = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    (r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * kite.max(0.0).sqrt()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomStream;
    use rand::Rng;

    #[test]
    fn lens_examples() {
        assert_eq!(lens_area(0.0, 1.0, 1.0), PI);
        assert_eq!(lens_area(2.0, 1.0, 1.0), 0.0);
        let expect = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((lens_area(1.0, 1.0, 1.0) - expect).abs() < 1e-15);
        assert!((expect - 1.22837).abs() < 1e-5);
    }

    #[test]
    fn lens_unequal_radii_limits() {
        // containment and disjoint limits, then continuity at both ends
        assert_eq!(lens_area(0.2, 1.0, 0.5), PI * 0.25);
        assert_eq!(lens_area(1.6, 1.0, 0.5), 0.0);
        assert!((lens_area(0.5 + 1e-9, 1.0, 0.5) - PI * 0.25).abs() < 1e-6);
        assert!(lens_area(1.5 - 1e-9, 1.0, 0.5) < 1e-9);
    }

    #[test]
    fn lens_unit_formula_matches_general_formula() {
        for i in 1..200 {
            let d = i as f64 * 0.01;
            let a1 = ((d * d) / (2.0 * d)).acos();
            let general = 2.0 * a1 - 0.5 * ((2.0 - d) * d * d * (2.0 + d)).sqrt();
            assert!((lens_area(d, 1.0, 1.0) - general).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn lens_monte_carlo_cross_check() {
        // hit counting over the bounding box of the first disk
        let mut rng = RandomStream::new(11, 0).rng();
        let (d, r1, r2) = (0.7, 1.0, 0.8);
        let n = 400_000;
        let mut hits = 0u32;
        for _ in 0..n {
            let p = Point2::new(rng.random_range(-r1..r1), rng.random_range(-r1..r1));
            if p.norm() <= r1 && p.distance(Point2::new(d, 0.0)) <= r2 {
                hits += 1;
            }
        }
        let frac = hits as f64 / n as f64;
        let box_area = 4.0 * r1 * r1;
        let se = box_area * (frac * (1.0 - frac) / n as f64).sqrt();
        assert!((frac * box_area - lens_area(d, r1, r2)).abs() < 4.0 * se);
    }

    #[test]
    fn config_validation() {
        let c = |v: Vec<f64>| VectorN::new(v).unwrap();
        assert!(DiskConfig::new(vec![], vec![]).is_err());
        assert!(DiskConfig::new(vec![c(vec![0.0, 0.0])], vec![0.0]).is_err());
        assert!(DiskConfig::new(vec![c(vec![0.0, 0.0])], vec![1.0, 1.0]).is_err());
        assert!(matches!(
            DiskConfig::unit(vec![c(vec![0.0, 0.0]), c(vec![0.0, 0.0, 0.0])]),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
        let cfg = DiskConfig::unit(vec![c(vec![0.0, 0.0, 1.0])]).unwrap();
        assert!(cfg.disks_2d().is_err());
    }
}
