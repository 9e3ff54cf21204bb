use escape_lab::geom::{
    intersection_area_2d, lens_area, mc_volume, union_area_2d, DiskConfig, Point2, SetOp, VectorN,
};
use escape_lab::rng::RandomStream;
use proptest::prelude::*;
use rand::Rng;

fn config_from(disks: &[(f64, f64, f64)]) -> DiskConfig {
    let centers = disks.iter().map(|&(x, y, _)| VectorN::from_xy(x, y)).collect();
    let radii = disks.iter().map(|d| d.2).collect();
    DiskConfig::new(centers, radii).unwrap()
}

fn disks(max: usize) -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, 0.5..1.5f64), 1..=max)
}

fn area(disks: &[(f64, f64, f64)]) -> f64 {
    intersection_area_2d(&config_from(disks)).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rigid_motion_invariance(d in disks(6), angle in -3.2..3.2f64, dx in -5.0..5.0f64, dy in -5.0..5.0f64) {
        let moved: Vec<_> = d
            .iter()
            .map(|&(x, y, r)| {
                let p = Point2::new(x, y).rotate(angle) + Point2::new(dx, dy);
                (p.x, p.y, r)
            })
            .collect();
        prop_assert!((area(&d) - area(&moved)).abs() <= 1e-9);
    }

    #[test]
    fn adding_a_disk_never_grows(d in disks(6), extra in (-1.0..1.0f64, -1.0..1.0f64, 0.5..1.5f64)) {
        let mut more = d.clone();
        more.push(extra);
        prop_assert!(area(&more) <= area(&d) + 1e-9);
    }

    #[test]
    fn order_does_not_matter(d in disks(6)) {
        let mut rev = d.clone();
        rev.reverse();
        prop_assert!((area(&d) - area(&rev)).abs() <= 1e-9);
    }

    #[test]
    fn region_vertices_lie_in_every_disk(d in disks(6)) {
        let config = config_from(&d);
        let (a, region) = intersection_area_2d(&config).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a == 0.0, region.is_empty() || region.is_degenerate());
        for v in region.vertices() {
            prop_assert!(config.contains_in_all(&[v.x, v.y], 1e-9));
        }
    }

    #[test]
    fn union_bounds(d in disks(8)) {
        let config = config_from(&d);
        let u = union_area_2d(&config).unwrap();
        prop_assert!(u.exact);
        let areas: Vec<f64> = d.iter().map(|x| std::f64::consts::PI * x.2 * x.2).collect();
        let max = areas.iter().cloned().fold(0.0, f64::max);
        prop_assert!(u.value >= max - 1e-9);
        prop_assert!(u.value <= areas.iter().sum::<f64>() + 1e-9);
    }

    #[test]
    fn lens_symmetric_and_monotone(d in 0.0..3.0f64, r1 in 0.2..1.5f64, r2 in 0.2..1.5f64, step in 0.0..0.5f64) {
        prop_assert!((lens_area(d, r1, r2) - lens_area(d, r2, r1)).abs() <= 1e-12);
        prop_assert!(lens_area(d + step, r1, r2) <= lens_area(d, r1, r2) + 1e-12);
        let two = config_from(&[(0.0, 0.0, r1), (d, 0.0, r2)]);
        prop_assert!((intersection_area_2d(&two).unwrap().0 - lens_area(d, r1, r2)).abs() <= 1e-9);
    }
}

#[test]
fn exact_area_matches_hit_counting() {
    let mut rng = RandomStream::new(2024, 0).rng();
    for i in 0..100u64 {
        let n = rng.random_range(1..=6);
        // tighter cluster so that most intersections are non-empty
        let d: Vec<_> = (0..n)
            .map(|_| (rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), rng.random_range(0.5..1.5)))
            .collect();
        let config = config_from(&d);
        let exact = intersection_area_2d(&config).unwrap().0;
        let mc = mc_volume(&config, SetOp::Intersection, 1_000_000, RandomStream::new(7, i));
        let band = 4.0 * mc.std_error + 1e-12;
        assert!((exact - mc.value).abs() <= band, "config {i}: exact {exact} vs {} ± {}", mc.value, mc.std_error);
    }
}

#[test]
fn union_matches_hit_counting() {
    let mut rng = RandomStream::new(2025, 0).rng();
    for i in 0..20u64 {
        let n = rng.random_range(1..=6);
        let d: Vec<_> = (0..n)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..1.5)))
            .collect();
        let config = config_from(&d);
        let exact = union_area_2d(&config).unwrap().value;
        let mc = mc_volume(&config, SetOp::Union, 1_000_000, RandomStream::new(8, i));
        assert!((exact - mc.value).abs() <= 4.0 * mc.std_error, "config {i}");
    }
}
