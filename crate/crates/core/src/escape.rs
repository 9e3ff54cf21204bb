//! Escape times, non-escape regions and the expected escape time `J`.
//!
//! In the plane `J(γ) = (1/π) ∫ area(S_γ(t)) dt`, where `S_γ(t)` is the set
//! of starting points that have not left the unit disk by time `t`. The
//! quadrature here replaces `S_γ(t)` by the intersection of unit disks
//! centered at `−γ(t_i)` over a uniform grid and sums with a left Riemann
//! rule. Both substitutions can only overestimate, so the result is an upper
//! bound on `J` up to rounding.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{
    intersect_disks, intersection_area_2d, lens_area, mc_volume, uniform_ball_sample, ArcRegion,
    Disk, SetOp, VectorN, CHUNK_SAMPLES, EPS_GEOM,
};
use crate::paths::{centers_for_partition, uniform_partition, Partition, UnitSpeedPath};
use crate::quadrature::integrate;
use crate::rng::RandomStream;

/// Approximation of the non-escape region by finitely many balls.
#[derive(Debug, Clone, Serialize)]
pub struct NonEscapeApprox {
    pub time: f64,
    pub partition: Partition,
    /// Boundary of the region; planar exact computations only.
    pub region: Option<ArcRegion>,
    pub area_or_volume: f64,
    /// Zero for exact computations.
    pub std_error: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

/// One row of the area-versus-time table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaStep {
    pub t: f64,
    pub area: f64,
    pub cumulative_j: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanEscapeEstimate {
    pub value: f64,
    pub error_bound: f64,
    /// Some mass had not escaped by the time cap; `value` is then a lower
    /// bound on the quantity being estimated.
    pub truncated: bool,
    pub method: EstimateMethod,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<AreaStep>,
}

impl MeanEscapeEstimate {
    /// Area still enclosed at the last tabulated time.
    pub fn final_area(&self) -> f64 {
        self.diagnostics.last().map_or(0.0, |s| s.area)
    }

    /// Writes the diagnostics table as `t,area,cumulative_J` CSV.
    pub fn write_area_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,area,cumulative_J")?;
        for s in &self.diagnostics {
            writeln!(out, "{},{},{}", s.t, s.area, s.cumulative_j)?;
        }
        Ok(())
    }
}

/// Grid settings for [`mean_escape_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSettings {
    pub h: f64,
    pub t_cap: f64,
    /// Integration stops once the enclosed area falls below this.
    pub area_floor: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self { h: 0.005, t_cap: 16.0, area_floor: 1e-10 }
    }
}

/// Settings for pointwise escape times of curved paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeSettings {
    pub h_step: f64,
    pub t_cap: f64,
}

impl Default for EscapeSettings {
    fn default() -> Self {
        Self { h_step: 1e-3, t_cap: 16.0 }
    }
}

/// Exact area of `⋂_i B(−γ(t_i))` for a planar path.
pub fn non_escape_area(path: &UnitSpeedPath, t: f64, partition: &Partition) -> Result<NonEscapeApprox> {
    check_partition_end(t, partition)?;
    let centers = centers_for_partition(path, partition)?;
    let (area, region) = intersection_area_2d(&centers)?;
    Ok(NonEscapeApprox {
        time: t,
        partition: partition.clone(),
        region: Some(region),
        area_or_volume: area,
        std_error: 0.0,
        exact: true,
    })
}

/// Monte Carlo volume of `⋂_i B(−γ(t_i))` in any dimension.
pub fn non_escape_volume_mc(
    path: &UnitSpeedPath,
    t: f64,
    partition: &Partition,
    samples: usize,
    stream: RandomStream,
) -> Result<NonEscapeApprox> {
    check_partition_end(t, partition)?;
    let centers = centers_for_partition(path, partition)?;
    let est = mc_volume(&centers, SetOp::Intersection, samples, stream);
    Ok(NonEscapeApprox {
        time: t,
        partition: partition.clone(),
        region: None,
        area_or_volume: est.value,
        std_error: est.std_error,
        exact: est.exact,
    })
}

fn check_partition_end(t: f64, partition: &Partition) -> Result<()> {
    if (partition.end() - t).abs() > 1e-12 * t.max(1.0) {
        return Err(Error::InvalidPartition(format!(
            "partition ends at {} but t = {t}",
            partition.end()
        )));
    }
    Ok(())
}

/// Area of the exact non-escape region of a straight line, the lens of
/// the unit disks at both ends of the traversed segment.
pub fn line_nonescape_area(t: f64) -> f64 {
    lens_area(t, 1.0, 1.0)
}

/// Left-Riemann estimate of `(1/π) ∫ area(S_γ(t)) dt` on a uniform grid.
///
/// The running region is clipped by one disk per grid time. Integration
/// stops when the area drops below `area_floor`, or at `t_cap`, in which
/// case the estimate is flagged as truncated if area remains.
pub fn mean_escape_quadrature(path: &UnitSpeedPath, settings: &QuadratureSettings) -> Result<MeanEscapeEstimate> {
    if path.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: path.dim() });
    }
    let QuadratureSettings { h, t_cap, area_floor } = *settings;
    let grid = uniform_partition(t_cap, h)?;
    let times = grid.times();

    let mut all_disks: Vec<(usize, Disk)> = Vec::new();
    let mut region: Option<ArcRegion> = None;
    let mut value = 0.0;
    let mut truncated = false;
    let mut diagnostics = Vec::new();
    let mut prev_area = f64::INFINITY;

    for (i, &t) in times.iter().enumerate() {
        let center = (-&path.eval(t)?).to_point2()?;
        let disk = Disk::unit(center);
        all_disks.push((i, disk));
        let mut next = match &region {
            None => intersect_disks(&all_disks),
            Some(r) => r.clip(i, disk),
        };
        if next.area() > prev_area + EPS_GEOM {
            next = intersect_disks(&all_disks);
        }
        let area = next.area().min(prev_area);
        prev_area = area;
        region = Some(next);

        if i + 1 == times.len() {
            truncated = area >= area_floor;
            diagnostics.push(AreaStep { t, area, cumulative_j: value });
            break;
        }
        if area < area_floor {
            diagnostics.push(AreaStep { t, area, cumulative_j: value });
            break;
        }
        value += area * (times[i + 1] - t) / PI;
        diagnostics.push(AreaStep { t, area, cumulative_j: value });
    }

    let last_area = diagnostics.last().map_or(0.0, |s| s.area);
    Ok(MeanEscapeEstimate {
        value,
        error_bound: h * (PI - last_area) / PI,
        truncated,
        method: EstimateMethod::Quadrature,
        diagnostics,
    })
}

/// `J` of the straight line in the plane by adaptive quadrature of the
/// lens area over `[0, 2]`.
pub fn mean_escape_line_quadrature(tolerance: f64) -> Result<MeanEscapeEstimate> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance {tolerance} must be positive")));
    }
    // the integrand has a square-root endpoint at t = 2; ask for margin
    let q = integrate(line_nonescape_area, 0.0, 2.0, 0.1 * tolerance * PI, 100_000);
    Ok(MeanEscapeEstimate {
        value: q.value / PI,
        error_bound: q.error / PI,
        truncated: !q.converged,
        method: EstimateMethod::Quadrature,
        diagnostics: Vec::new(),
    })
}

// Exit parameter along the ray p + s·u from a point inside the unit ball.
fn ray_exit(p: &VectorN, u: &VectorN) -> f64 {
    let b = p.dot(u);
    let c = p.norm_squared() - 1.0;
    -b + (b * b - c).max(0.0).sqrt()
}

fn check_inside(x: &VectorN) -> Result<()> {
    let n = x.norm();
    if n > 1.0 + EPS_GEOM {
        Err(Error::OutsideBall(n))
    } else {
        Ok(())
    }
}

/// First `t ≥ 0` with `‖x + t·u‖ = 1`.
pub fn line_escape_time(x: &VectorN, u: &VectorN) -> Result<f64> {
    check_inside(x)?;
    if x.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: u.dim() });
    }
    Ok(ray_exit(x, u))
}

/// First time `x + γ(t)` leaves the open unit ball, or `None` if that does
/// not happen before `settings.t_cap`.
///
/// Straight pieces are solved exactly; curved arcs are marched with step
/// `h_step` and the bracketed exit is refined by bisection.
pub fn path_escape_time(path: &UnitSpeedPath, x: &VectorN, settings: &EscapeSettings) -> Result<Option<f64>> {
    check_inside(x)?;
    if x.dim() != path.dim() {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: x.dim() });
    }
    if let Some(pieces) = path.linear_pieces() {
        for piece in &pieces {
            let p = x + &piece.start;
            let s = ray_exit(&p, &piece.direction);
            if s <= piece.length {
                return Ok(Some(piece.start_time + s));
            }
        }
        unreachable!("the last piece is an unbounded ray");
    }

    let UnitSpeedPath::Arc { curvature, length } = path else {
        unreachable!("only arcs lack a piecewise-linear form");
    };
    let outside = |t: f64| -> f64 {
        let p = path.eval(t).expect("t is nonnegative");
        (x + &p).norm() - 1.0
    };
    if outside(0.0) >= 0.0 {
        return Ok(Some(0.0));
    }
    let march_end = length.unwrap_or(f64::INFINITY).min(settings.t_cap);
    let mut lo = 0.0;
    while lo < march_end {
        let hi = (lo + settings.h_step).min(march_end);
        if outside(hi) >= 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-12 {
                let mid = 0.5 * (a + b);
                if outside(mid) >= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            return Ok(Some(b));
        }
        lo = hi;
    }
    match length {
        Some(l) if *l <= settings.t_cap => {
            let p = x + &path.eval(*l)?;
            let heading = curvature * l;
            let u = VectorN::from_xy(heading.cos(), heading.sin());
            Ok(Some(l + ray_exit(&p, &u)))
        }
        _ => Ok(None),
    }
}

/// Sample mean of the escape time over uniform starting points in the unit
/// n-ball. Starts that never escape are counted at the time cap and flag
/// the estimate as truncated.
pub fn mean_escape_monte_carlo(
    path: &UnitSpeedPath,
    n: usize,
    samples: usize,
    stream: RandomStream,
    settings: &EscapeSettings,
) -> Result<MeanEscapeEstimate> {
    if path.dim() != n {
        return Err(Error::DimensionMismatch { expected: path.dim(), found: n });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let chunks = samples.div_ceil(CHUNK_SAMPLES);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SAMPLES.min(samples - c * CHUNK_SAMPLES);
            let mut rng = stream.child(c as u64).rng();
            let (mut sum, mut sum_sq, mut trapped) = (0.0, 0.0, 0usize);
            for _ in 0..count {
                let x = uniform_ball_sample(n, &mut rng);
                let t = match path_escape_time(path, &x, settings)? {
                    Some(t) => t,
                    None => {
                        trapped += 1;
                        settings.t_cap
                    }
                };
                sum += t;
                sum_sq += t * t;
            }
            Ok((sum, sum_sq, trapped))
        })
        .collect::<Result<Vec<_>>>()?;

    let (sum, sum_sq, trapped) = partials
        .into_iter()
        .fold((0.0, 0.0, 0), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let m = samples as f64;
    let mean = sum / m;
    let var = if samples > 1 { ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
    Ok(MeanEscapeEstimate {
        value: mean,
        error_bound: (var / m).sqrt(),
        truncated: trapped > 0,
        method: EstimateMethod::MonteCarlo,
        diagnostics: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::expected_linear_escape;
    use crate::geom::uniform_sphere_sample;
    use crate::paths::Partition;

    const J_LINE_2D: f64 = 8.0 / (3.0 * PI);

    fn chain(turns: &[f64]) -> UnitSpeedPath {
        UnitSpeedPath::planar_chain(0.5, turns).unwrap()
    }

    #[test]
    fn non_escape_area_examples() {
        let line = UnitSpeedPath::axis_line(2);
        let a = non_escape_area(&line, 2.0, &Partition::new(vec![0.0, 2.0]).unwrap()).unwrap();
        assert_eq!(a.area_or_volume, 0.0);
        let a = non_escape_area(&line, 1.0, &Partition::new(vec![0.0, 1.0]).unwrap()).unwrap();
        assert!((a.area_or_volume - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-12);
        assert!(a.exact);
        for path in [line, chain(&[0.7]), UnitSpeedPath::arc(3.0, None).unwrap()] {
            let a = non_escape_area(&path, 0.8, &Partition::new(vec![0.0]).unwrap());
            assert!(a.is_err(), "partition must end at t");
            let p = Partition::new(vec![0.0, 0.8]).unwrap();
            assert!(non_escape_area(&path, 0.8, &p).is_ok());
        }
        let single = non_escape_area(&chain(&[1.0]), 0.0, &Partition::new(vec![0.0]).unwrap()).unwrap();
        assert!((single.area_or_volume - PI).abs() < 1e-15);
        let spatial = UnitSpeedPath::axis_line(3);
        assert!(non_escape_area(&spatial, 1.0, &Partition::new(vec![0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn line_area_examples() {
        assert_eq!(line_nonescape_area(0.0), PI);
        assert_eq!(line_nonescape_area(2.0), 0.0);
        assert_eq!(line_nonescape_area(3.5), 0.0);
        assert!((line_nonescape_area(1.0) - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn line_quadrature_closed_form() {
        let est = mean_escape_line_quadrature(1e-8).unwrap();
        assert!((est.value - J_LINE_2D).abs() < 1e-8);
        assert!(!est.truncated);
        assert_eq!(est.method, EstimateMethod::Quadrature);
        assert!(mean_escape_line_quadrature(0.0).is_err());
    }

    #[test]
    fn lens_integral_split_into_terms() {
        // ∫₀² 2 arccos(t/2) dt = 4 and ∫₀² (t/2)√(4−t²) dt = 4/3
        let a = integrate(|t: f64| 2.0 * (t / 2.0).acos(), 0.0, 2.0, 1e-13, 10_000);
        assert!((a.value - 4.0).abs() < 1e-10);
        let b = integrate(|t: f64| t / 2.0 * (4.0 - t * t).max(0.0).sqrt(), 0.0, 2.0, 1e-13, 10_000);
        assert!((b.value - 4.0 / 3.0).abs() < 1e-10);
        assert!(((a.value - b.value) / PI - J_LINE_2D).abs() < 1e-10);
    }

    #[test]
    fn grid_quadrature_line() {
        let s = QuadratureSettings { h: 0.001, t_cap: 3.0, ..Default::default() };
        let est = mean_escape_quadrature(&UnitSpeedPath::axis_line(2), &s).unwrap();
        assert!(!est.truncated);
        assert!(est.value >= J_LINE_2D);
        assert!((est.value - J_LINE_2D).abs() < 5e-3);
        // flat arc is the same path
        let arc = UnitSpeedPath::arc(0.0, Some(5.0)).unwrap();
        let est2 = mean_escape_quadrature(&arc, &s).unwrap();
        assert!((est.value - est2.value).abs() < 1e-9);
        // the table never increases
        assert!(est.diagnostics.windows(2).all(|w| w[1].area <= w[0].area));
    }

    #[test]
    fn grid_quadrature_trapped_circle() {
        // radius 1/4 loop: points near the center never escape
        let circle = UnitSpeedPath::arc(4.0, None).unwrap();
        let s = QuadratureSettings { h: 0.01, t_cap: 4.0, ..Default::default() };
        let est = mean_escape_quadrature(&circle, &s).unwrap();
        assert!(est.truncated);
        assert!(est.final_area() > 0.1);
    }

    #[test]
    fn escape_time_examples() {
        let e1 = VectorN::from_xy(1.0, 0.0);
        assert!((line_escape_time(&VectorN::zeros(2), &e1).unwrap() - 1.0).abs() < 1e-15);
        assert!((line_escape_time(&VectorN::from_xy(-0.6, 0.0), &e1).unwrap() - 1.6).abs() < 1e-15);
        assert!((line_escape_time(&VectorN::from_xy(0.0, 0.6), &e1).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(
            line_escape_time(&VectorN::from_xy(1.1, 0.0), &e1),
            Err(Error::OutsideBall(_))
        ));

        let s = EscapeSettings::default();
        let line = UnitSpeedPath::axis_line(2);
        assert_eq!(path_escape_time(&line, &VectorN::zeros(2), &s).unwrap(), Some(1.0));
        let t = path_escape_time(&line, &VectorN::from_xy(0.3, 0.0), &s).unwrap().unwrap();
        assert!((t - 0.7).abs() < 1e-15);

        let c = UnitSpeedPath::polychain(
            vec![1.0, 1.0],
            vec![VectorN::from_xy(1.0, 0.0), VectorN::from_xy(0.0, 1.0)],
        )
        .unwrap();
        let t = path_escape_time(&c, &VectorN::from_xy(0.0, -0.9), &s).unwrap().unwrap();
        assert!((t - 0.19f64.sqrt()).abs() < 1e-14);
        // exits during the second segment
        let t = path_escape_time(&c, &VectorN::from_xy(-0.95, -0.2), &s).unwrap().unwrap();
        let p = c.eval(t).unwrap();
        assert!(t > 1.0 && ((p.coords()[0] - 0.95).powi(2) + (p.coords()[1] - 0.2).powi(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arc_escape_times() {
        let s = EscapeSettings::default();
        let flat = UnitSpeedPath::arc(0.0, Some(0.5)).unwrap();
        let x = VectorN::from_xy(0.2, -0.3);
        let want = line_escape_time(&x, &VectorN::from_xy(1.0, 0.0)).unwrap();
        assert!((path_escape_time(&flat, &x, &s).unwrap().unwrap() - want).abs() < 1e-12);

        // exit found by marching is the first crossing
        let arc = UnitSpeedPath::arc(1.0, None).unwrap();
        let x = VectorN::from_xy(-0.2, -0.5);
        let t = path_escape_time(&arc, &x, &s).unwrap().unwrap();
        let p = &x + &arc.eval(t).unwrap();
        assert!((p.norm() - 1.0).abs() < 1e-9);
        let before = (0..1000).map(|k| t * k as f64 / 1000.0).all(|u| (&x + &arc.eval(u).unwrap()).norm() < 1.0);
        assert!(before);

        let trapped = UnitSpeedPath::arc(4.0, None).unwrap();
        assert_eq!(path_escape_time(&trapped, &VectorN::zeros(2), &s).unwrap(), None);
        let finite = UnitSpeedPath::arc(4.0, Some(PI / 2.0)).unwrap();
        assert!(path_escape_time(&finite, &VectorN::zeros(2), &s).unwrap().is_some());
    }

    #[test]
    fn line_agrees_with_generic_path() {
        let s = EscapeSettings::default();
        let mut rng = RandomStream::new(21, 0).rng();
        for n in [2usize, 3, 5] {
            for _ in 0..3000 {
                let x = uniform_ball_sample(n, &mut rng);
                let u = uniform_sphere_sample(n, &mut rng);
                let a = line_escape_time(&x, &u).unwrap();
                let path = UnitSpeedPath::line(u).unwrap();
                let b = path_escape_time(&path, &x, &s).unwrap().unwrap();
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_small_checks() {
        let s = EscapeSettings::default();
        let est = mean_escape_monte_carlo(&UnitSpeedPath::axis_line(1), 1, 10_000, RandomStream::new(1, 0), &s)
            .unwrap();
        assert!((est.value - 1.0).abs() < 4.0 * est.error_bound);
        let est = mean_escape_monte_carlo(&UnitSpeedPath::axis_line(3), 3, 200_000, RandomStream::new(2, 0), &s)
            .unwrap();
        assert!((est.value - expected_linear_escape(3)).abs() < 4.0 * est.error_bound);
        assert!(!est.truncated);
        let trapped = mean_escape_monte_carlo(
            &UnitSpeedPath::arc(4.0, None).unwrap(),
            2,
            200,
            RandomStream::new(3, 0),
            &EscapeSettings { h_step: 1e-2, t_cap: 4.0 },
        )
        .unwrap();
        assert!(trapped.truncated);
        assert!(mean_escape_monte_carlo(&UnitSpeedPath::axis_line(2), 3, 10, RandomStream::new(1, 0), &s).is_err());
    }

    #[test]
    fn spatial_volume_monte_carlo() {
        let line = UnitSpeedPath::axis_line(3);
        let p = Partition::new(vec![0.0, 1.0]).unwrap();
        let v = non_escape_volume_mc(&line, 1.0, &p, 400_000, RandomStream::new(4, 0)).unwrap();
        // two unit balls at distance d: 2·(π/3)(1 − d/2)²(2 + d/2)
        let exact = 2.0 * PI / 3.0 * 0.25 * 2.5;
        assert!((v.area_or_volume - exact).abs() < 4.0 * v.std_error);
        assert!(!v.exact);
    }

    #[test]
    fn chain_estimates_dominate_line() {
        let s = QuadratureSettings { h: 0.01, t_cap: 6.0, ..Default::default() };
        let line = mean_escape_quadrature(&UnitSpeedPath::axis_line(2), &s).unwrap().value;
        for turns in [&[0.3][..], &[1.0, -1.0], &[PI / 2.0, PI / 2.0, 0.2]] {
            let v = mean_escape_quadrature(&chain(turns), &s).unwrap().value;
            assert!(v > line, "{turns:?}");
        }
    }
}
