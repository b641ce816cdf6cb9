use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

use firelab::lattice::{outer_boundary, ConeRegion, Point, RhombusSurface, SiteCoord, TubeRegion, Window};
use proptest::prelude::*;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn neighbour_examples() {
    let got: BTreeSet<_> = SiteCoord::ORIGIN.neighbors().into_iter().collect();
    let want: BTreeSet<_> =
        [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)].into_iter().map(|(k, l)| SiteCoord::new(k, l)).collect();
    assert_eq!(got, want);
    let s = SiteCoord::new(3, 2);
    for (a, b) in s.neighbors().iter().zip(SiteCoord::ORIGIN.neighbors()) {
        assert_eq!(*a, SiteCoord::new(b.k + 3, b.l + 2));
        assert!(close(a.point().dist(s.point()), 1.0));
    }
}

#[test]
fn heights() {
    assert_eq!(SiteCoord::new(7, 0).im_height(), 0.0);
    assert!(close(SiteCoord::new(0, 2).im_height(), 3f64.sqrt()));
    assert!(close(SiteCoord::new(-3, 5).im_height(), 5.0 * 3f64.sqrt() / 2.0));
}

/// Outer boundary by scanning every site of a window for an embedded
/// neighbour at distance one.
fn boundary_by_scan(set: &[SiteCoord], window: &Window) -> BTreeSet<SiteCoord> {
    window
        .sites()
        .filter(|s| !set.contains(s))
        .filter(|s| set.iter().any(|m| close(m.point().dist(s.point()), 1.0)))
        .collect()
}

#[test]
fn boundary_examples() {
    let x = SiteCoord::new(0, 0);
    let got = outer_boundary(&[x], true);
    let want: BTreeSet<_> = [(1, 0), (-1, 0), (0, 1), (-1, 1)].into_iter().map(|(k, l)| SiteCoord::new(k, l)).collect();
    assert_eq!(got, want);
    assert!(outer_boundary(&[], true).is_empty());

    let pair = [SiteCoord::new(0, 1), SiteCoord::new(1, 1)];
    let window = Window::half_plane(-2, 2, 4).unwrap();
    let got = outer_boundary(&pair, true);
    assert_eq!(got.len(), 8);
    assert_eq!(got, boundary_by_scan(&pair, &window));
}

#[test]
fn region_examples() {
    let cone = ConeRegion::new(0.0, FRAC_PI_3).unwrap();
    assert!(cone.contains(SiteCoord::new(0, 1)));
    assert!(!cone.contains(SiteCoord::new(2, 1)));
    let tube = TubeRegion::new(0.0, FRAC_PI_2).unwrap();
    assert!(tube.contains(SiteCoord::new(-1, 2)));
    assert!(!tube.contains(SiteCoord::new(0, 2)));
}

#[test]
fn rhombus_examples() {
    let r = RhombusSurface::new(SiteCoord::ORIGIN, 5, FRAC_PI_2).unwrap();
    assert!(close(r.distance(SiteCoord::ORIGIN.point()), 5.0));
    for phi in [0.4, 0.9, FRAC_PI_3, 1.3] {
        let r = RhombusSurface::new(SiteCoord::new(2, 3), 7, phi).unwrap();
        assert!(close(r.distance(r.center.point()), 7.0 * phi.sin()));
        let [a, b, _, _] = r.corners();
        let mid = Point::new(0.3 * a.x + 0.7 * b.x, 0.3 * a.y + 0.7 * b.y);
        assert!(r.distance(mid) < 1e-9);
    }
}

fn site() -> impl Strategy<Value = SiteCoord> {
    (-40i32..40, -40i32..40).prop_map(|(k, l)| SiteCoord::new(k, l))
}

proptest! {
    #[test]
    fn neighbours_are_symmetric(s in site()) {
        for v in s.neighbors() {
            prop_assert!(v.neighbors().contains(&s));
            prop_assert!(s.is_neighbor(v));
            prop_assert!(close(v.point().dist(s.point()), 1.0));
        }
    }

    /// Membership agrees with the decomposition `z - apex = a e^{iφ} + b e^{i(π-φ)}`
    /// with `a, b ≥ 0`.
    #[test]
    fn cone_matches_basis_decomposition(s in site(), apex in -5.0f64..5.0, phi in 0.2f64..1.5) {
        let cone = ConeRegion::new(apex, phi).unwrap();
        let p = s.point();
        let sum = p.y / phi.sin();
        let diff = (p.x - apex) / phi.cos();
        let (a, b) = ((sum + diff) / 2.0, (sum - diff) / 2.0);
        if a.min(b).abs() > 1e-6 {
            prop_assert_eq!(cone.contains(s), a >= 0.0 && b >= 0.0);
        }
        prop_assert_eq!(cone.contains(s), cone.distance(p) == 0.0);
    }

    #[test]
    fn cones_grow_with_angle(s in site(), phi in 0.2f64..1.4, extra in 0.0f64..0.15) {
        let narrow = ConeRegion::new(0.0, phi + extra).unwrap();
        let wide = ConeRegion::new(0.0, phi).unwrap();
        prop_assert!(!narrow.contains(s) || wide.contains(s));
    }

    #[test]
    fn rhombus_distance_matches_sampled_surface(
        n in 1u32..12,
        phi in 0.3f64..FRAC_PI_2,
        x in -20.0f64..20.0,
        y in -20.0f64..20.0,
    ) {
        let r = RhombusSurface::new(SiteCoord::new(1, -2), n, phi).unwrap();
        let corners = r.corners();
        let steps = 4000;
        let mut best = f64::INFINITY;
        for i in 0..4 {
            let (a, b) = (corners[i], corners[(i + 1) % 4]);
            for j in 0..=steps {
                let f = j as f64 / steps as f64;
                let q = Point::new(a.x + f * (b.x - a.x), a.y + f * (b.y - a.y));
                best = best.min(q.dist(Point::new(x, y)));
            }
        }
        let spacing = 2.0 * n as f64 / steps as f64;
        let d = r.distance(Point::new(x, y));
        prop_assert!(d <= best + 1e-9 && best <= d + spacing, "{} vs {}", d, best);
    }

    #[test]
    fn outer_boundary_matches_scan(bits in proptest::collection::vec(any::<bool>(), 25)) {
        let set: Vec<SiteCoord> = (0..25)
            .filter(|&i| bits[i])
            .map(|i| SiteCoord::new(i as i32 % 5, 1 + i as i32 / 5))
            .collect();
        let window = Window::half_plane(-2, 7, 7).unwrap();
        prop_assert_eq!(outer_boundary(&set, true), boundary_by_scan(&set, &window));
    }
}
