//! Exact intersection of planar disks as a convex arc polygon.
//!
//! For every surviving circle the set of boundary angles lying inside all
//! other disks is computed as a union of angular intervals. Each interval is
//! one boundary arc of the intersection. Arcs are ordered counter-clockwise
//! around the mean of their start points and the area is the shoelace area
//! of the vertex polygon plus one circular segment per arc.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use super::disk::{Disk, DiskConfig};
use super::vector::Point2;
use super::EPS_GEOM;
use crate::error::Result;

/// One boundary arc: the counter-clockwise piece of circle `disk` starting
/// at `start_angle` (measured at the disk center) and spanning `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryArc {
    pub disk: usize,
    pub start_angle: f64,
    pub sweep: f64,
}

/// Convex region bounded by circular arcs, i.e. an intersection of disks.
///
/// `vertices[i]` is where `arcs[i]` starts; the arc ends at
/// `vertices[(i + 1) % len]`. A single full disk has no vertices and one arc
/// of sweep 2π.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcRegion {
    vertices: Vec<Point2>,
    arcs: Vec<BoundaryArc>,
    /// Disks carrying at least one boundary arc, with their caller indices.
    #[serde(skip)]
    support: Vec<(usize, Disk)>,
    empty: bool,
    degenerate: bool,
    area: f64,
}

impl ArcRegion {
    fn empty() -> Self {
        Self {
            vertices: Vec::new(),
            arcs: Vec::new(),
            support: Vec::new(),
            empty: true,
            degenerate: false,
            area: 0.0,
        }
    }

    fn point(p: Point2) -> Self {
        Self { vertices: vec![p], degenerate: true, empty: false, ..Self::empty() }
    }

    fn full_disk(index: usize, disk: Disk) -> Self {
        Self {
            vertices: Vec::new(),
            arcs: vec![BoundaryArc { disk: index, start_angle: 0.0, sweep: TAU }],
            support: vec![(index, disk)],
            empty: false,
            degenerate: false,
            area: disk.area(),
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn arcs(&self) -> &[BoundaryArc] {
        &self.arcs
    }

    /// Indices of the disks whose circles carry boundary arcs.
    pub fn support_indices(&self) -> Vec<usize> {
        self.support.iter().map(|(i, _)| *i).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Intersects this region with one more disk, reusing only the disks
    /// that currently carry boundary arcs.
    pub fn clip(&self, index: usize, disk: Disk) -> ArcRegion {
        if self.empty {
            return Self::empty();
        }
        if self.degenerate {
            return match self.vertices.first() {
                Some(&p) if disk.contains_point(p, EPS_GEOM) => self.clone(),
                _ => Self::empty(),
            };
        }
        let mut disks = self.support.clone();
        disks.push((index, disk));
        intersect_disks(&disks)
    }
}

/// Exact area of the intersection of all disks in a 2D configuration,
/// together with its arc-polygon boundary.
pub fn intersection_area_2d(config: &DiskConfig) -> Result<(f64, ArcRegion)> {
    let disks: Vec<(usize, Disk)> = config.disks_2d()?.into_iter().enumerate().collect();
    let region = intersect_disks(&disks);
    Ok((region.area, region))
}

/// Intersection of indexed disks. Indices are carried through to the
/// boundary arcs unchanged.
pub fn intersect_disks(input: &[(usize, Disk)]) -> ArcRegion {
    if input.is_empty() {
        return ArcRegion::empty();
    }

    // duplicates
    let mut disks: Vec<(usize, Disk)> = Vec::with_capacity(input.len());
    for &(i, d) in input {
        let dup = disks.iter().any(|(_, e)| {
            e.center.distance(d.center) <= EPS_GEOM && (e.radius - d.radius).abs() <= EPS_GEOM
        });
        if !dup {
            disks.push((i, d));
        }
    }

    // separated or externally tangent pairs
    let mut tangent_point = None;
    for (a, &(_, da)) in disks.iter().enumerate() {
        for &(_, db) in &disks[a + 1..] {
            let d = da.center.distance(db.center);
            let reach = da.radius + db.radius;
            if d > reach + EPS_GEOM {
                return ArcRegion::empty();
            }
            if d >= reach - EPS_GEOM && tangent_point.is_none() {
                tangent_point = Some(da.center + (db.center - da.center) * (da.radius / d));
            }
        }
    }
    if let Some(p) = tangent_point {
        return if disks.iter().all(|(_, d)| d.contains_point(p, EPS_GEOM)) {
            ArcRegion::point(p)
        } else {
            ArcRegion::empty()
        };
    }

    // superset elimination: smallest first, drop any disk containing a kept one
    disks.sort_by(|a, b| a.1.radius.total_cmp(&b.1.radius).then(a.0.cmp(&b.0)));
    let mut kept: Vec<(usize, Disk)> = Vec::with_capacity(disks.len());
    for &(i, d) in &disks {
        let contains_kept = kept
            .iter()
            .any(|(_, k)| d.center.distance(k.center) + k.radius <= d.radius + EPS_GEOM);
        if !contains_kept {
            kept.push((i, d));
        }
    }
    if kept.len() == 1 {
        let (i, d) = kept[0];
        return ArcRegion::full_disk(i, d);
    }

    let mut arcs = Vec::new();
    let mut support = Vec::new();
    for (a, &(ia, da)) in kept.iter().enumerate() {
        let mut allowed = vec![(0.0, TAU)];
        for (b, &(_, db)) in kept.iter().enumerate() {
            if a == b || allowed.is_empty() {
                continue;
            }
            let offset = db.center - da.center;
            let d = offset.norm();
            let cos_half = ((da.radius * da.radius + d * d - db.radius * db.radius)
                / (2.0 * da.radius * d))
                .clamp(-1.0, 1.0);
            let half = cos_half.acos();
            let start = (offset.angle() - half).rem_euclid(TAU);
            allowed = intersect_intervals(&allowed, &arc_pieces(start, 2.0 * half));
        }
        let before = arcs.len();
        for (start, sweep) in join_wrapped(&allowed) {
            if sweep > 0.0 {
                arcs.push(BoundaryArc { disk: ia, start_angle: start, sweep });
            }
        }
        if arcs.len() > before {
            support.push((ia, da));
        }
    }
    if arcs.is_empty() {
        return ArcRegion::empty();
    }

    let disk_of = |i: usize| support.iter().find(|(j, _)| *j == i).map(|(_, d)| *d).unwrap();
    let starts: Vec<Point2> =
        arcs.iter().map(|a| disk_of(a.disk).point_at(a.start_angle)).collect();
    let n = starts.len() as f64;
    let mean = starts.iter().fold(Point2::ORIGIN, |acc, &p| acc + p) * (1.0 / n);
    let mut order: Vec<usize> = (0..arcs.len()).collect();
    order.sort_by(|&i, &j| (starts[i] - mean).angle().total_cmp(&(starts[j] - mean).angle()));
    let arcs: Vec<BoundaryArc> = order.iter().map(|&i| arcs[i]).collect();
    let vertices: Vec<Point2> = order.iter().map(|&i| starts[i]).collect();

    let polygon = shoelace(&vertices);
    let segments: f64 = arcs
        .iter()
        .map(|a| segment_area(disk_of(a.disk).radius, a.sweep))
        .sum();
    ArcRegion {
        vertices,
        arcs,
        support,
        empty: false,
        degenerate: false,
        area: (polygon + segments).max(0.0),
    }
}

fn shoelace(vertices: &[Point2]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    0.5 * (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum::<f64>()
}

/// Splits the counter-clockwise arc `[start, start + sweep]`, `start` in
/// `[0, 2π)`, into non-wrapping pieces of `[0, 2π]`.
fn arc_pieces(start: f64, sweep: f64) -> Vec<(f64, f64)> {
    if sweep >= TAU {
        return vec![(0.0, TAU)];
    }
    let end = start + sweep;
    if end <= TAU {
        vec![(start, end)]
    } else {
        vec![(start, TAU), (0.0, end - TAU)]
    }
}

fn intersect_intervals(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a0, a1) in a {
        for &(b0, b1) in b {
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo < hi {
                out.push((lo, hi));
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Converts sorted non-wrapping pieces into `(start, sweep)` arcs, joining a
/// piece ending at 2π with one starting at 0.
fn join_wrapped(pieces: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut arcs: Vec<(f64, f64)> = pieces.iter().map(|&(lo, hi)| (lo, hi - lo)).collect();
    if arcs.len() >= 2 {
        let first = pieces[0];
        let last = pieces[pieces.len() - 1];
        if first.0 == 0.0 && last.1 == TAU {
            let merged = (last.0, (TAU - last.0) + first.1);
            arcs.pop();
            arcs[0] = merged;
        }
    }
    arcs
}

/// Area of the circular segment cut from a disk of radius `r` by a chord
/// subtending `angle` at the center.
pub fn segment_area(r: f64, angle: f64) -> f64 {
    0.5 * r * r * (angle - angle.sin())
}

/// Area of the Reuleaux-type triangle used as a reference value.
pub fn reuleaux_area(side: f64) -> f64 {
    0.5 * (PI - 3f64.sqrt()) * side * side
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{lens_area, VectorN};
    use crate::rng::RandomStream;
    use rand::Rng;

    fn config(centers: &[(f64, f64)], radii: &[f64]) -> DiskConfig {
        DiskConfig::new(
            centers.iter().map(|&(x, y)| VectorN::from_xy(x, y)).collect(),
            radii.to_vec(),
        )
        .unwrap()
    }

    fn unit(centers: &[(f64, f64)]) -> DiskConfig {
        config(centers, &vec![1.0; centers.len()])
    }

    fn area(cfg: &DiskConfig) -> f64 {
        intersection_area_2d(cfg).unwrap().0
    }

    #[test]
    fn single_disk() {
        let (a, region) = intersection_area_2d(&unit(&[(0.3, -0.2)])).unwrap();
        assert_eq!(a, PI);
        assert_eq!(region.arcs().len(), 1);
        assert!(region.vertices().is_empty());
    }

    #[test]
    fn two_disks_match_lens() {
        for &d in &[0.0, 0.1, 0.5, 1.0, 1.5, 1.99, 2.0, 2.5] {
            let a = area(&unit(&[(0.0, 0.0), (d, 0.0)]));
            assert!((a - lens_area(d, 1.0, 1.0)).abs() < 1e-12, "d={d}: {a}");
        }
        let a = area(&config(&[(0.0, 0.0), (0.0, 0.9)], &[1.0, 0.4]));
        assert!((a - lens_area(0.9, 1.0, 0.4)).abs() < 1e-12);
    }

    #[test]
    fn reuleaux_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let (a, region) = intersection_area_2d(&unit(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)])).unwrap();
        assert!((a - (PI - 3f64.sqrt()) / 2.0).abs() < 1e-9);
        assert!((a - reuleaux_area(1.0)).abs() < 1e-12);
        assert_eq!(region.arcs().len(), 3);
        assert!((reuleaux_area(1.0) - 0.70477).abs() < 1e-5);
    }

    #[test]
    fn tangent_and_separated() {
        let (a, r) = intersection_area_2d(&unit(&[(0.0, 0.0), (2.0, 0.0)])).unwrap();
        assert_eq!(a, 0.0);
        assert!(r.is_degenerate() && !r.is_empty());
        let (a, r) = intersection_area_2d(&unit(&[(0.0, 0.0), (2.5, 0.0)])).unwrap();
        assert_eq!(a, 0.0);
        assert!(r.is_empty());
        // tangent pair whose touching point is cut away by a third disk
        let (a, r) =
            intersection_area_2d(&unit(&[(0.0, 0.0), (2.0, 0.0), (1.0, 1.5)])).unwrap();
        assert_eq!(a, 0.0);
        assert!(r.is_empty());
    }

    #[test]
    fn empty_triple_without_vertices() {
        // pairwise overlapping, no common point
        let r = 0.55;
        let h = 3f64.sqrt() / 2.0;
        let (a, region) =
            intersection_area_2d(&config(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)], &[r, r, r]))
                .unwrap();
        assert_eq!(a, 0.0);
        assert!(region.is_empty());
    }

    #[test]
    fn containment_and_duplicates() {
        let a = area(&config(&[(0.0, 0.0), (0.1, 0.0), (0.0, 0.0)], &[1.0, 0.3, 1.0]));
        assert!((a - PI * 0.09).abs() < 1e-12);
        // internally tangent small disk counts as contained
        let a = area(&config(&[(0.0, 0.0), (0.5, 0.0)], &[1.0, 0.5]));
        assert!((a - PI * 0.25).abs() < 1e-12);
    }

    #[test]
    fn one_circle_contributes_two_arcs() {
        // two large disks shave caps off both sides of the unit disk
        let cfg = config(&[(0.0, 0.0), (9.5, 0.0), (-9.5, 0.0)], &[1.0, 10.0, 10.0]);
        let (a, region) = intersection_area_2d(&cfg).unwrap();
        let unit_arcs = region.arcs().iter().filter(|a| a.disk == 0).count();
        assert_eq!(unit_arcs, 2);
        let mc = monte_carlo(&cfg, 400_000, 5);
        assert!((a - mc.0).abs() < 4.0 * mc.1, "{a} vs {mc:?}");
    }

    #[test]
    fn clip_matches_full_recompute() {
        let mut rng = RandomStream::new(3, 1).rng();
        for _ in 0..200 {
            let n = rng.random_range(2..7);
            let centers: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8))).collect();
            let radii: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
            let cfg = config(&centers, &radii);
            let disks = cfg.disks_2d().unwrap();
            let mut region = intersect_disks(&[(0, disks[0])]);
            for (i, d) in disks.iter().enumerate().skip(1) {
                region = region.clip(i, *d);
            }
            assert!((region.area() - area(&cfg)).abs() < 1e-12);
        }
    }

    fn monte_carlo(cfg: &DiskConfig, n: usize, seed: u64) -> (f64, f64) {
        let (lo, hi) = cfg.bounding_box();
        let mut rng = RandomStream::new(seed, 0).rng();
        let mut hits = 0usize;
        for _ in 0..n {
            let p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
            if cfg.contains_in_all(&p, 0.0) {
                hits += 1;
            }
        }
        let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let f = hits as f64 / n as f64;
        (f * box_area, box_area * (f * (1.0 - f) / n as f64).sqrt().max(1e-12))
    }
}
