mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use termdev_core::metrics::{
    circularity, mean_abs_angular_deviation, relative_circularity, relative_rotation,
    rotation_angle, Orientation, Polygon, PoseSample, PoseTrace, TrackerRole,
};

fn orientation() -> impl Strategy<Value = Orientation> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -PI..PI).prop_filter_map("axis", |(x, y, z, a)| {
        ((x * x + y * y + z * z).sqrt() > 1e-3)
            .then(|| Orientation::from_axis_angle([x, y, z], a).unwrap())
    })
}

fn convex_polygon() -> impl Strategy<Value = Polygon> {
    prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40).prop_filter_map(
        "degenerate hull",
        |pts| {
            Polygon::new(common::convex_hull(
                pts.into_iter().map(|(x, y)| [x, y]).collect(),
            ))
            .ok()
        },
    )
}

fn moved(p: &Polygon, angle: f64, scale: f64, dx: f64, dy: f64) -> Polygon {
    let (s, c) = angle.sin_cos();
    Polygon::new(
        p.vertices()
            .iter()
            .map(|&[x, y]| [scale * (c * x - s * y) + dx, scale * (s * x + c * y) + dy])
            .collect(),
    )
    .unwrap()
}

fn trace(orientations: Vec<Orientation>) -> PoseTrace {
    let samples = orientations
        .into_iter()
        .enumerate()
        .map(|(i, orientation)| PoseSample {
            t: i as f64 * 0.01,
            orientation,
        })
        .collect();
    PoseTrace::new(TrackerRole::Chest, samples).unwrap()
}

proptest! {
    #[test]
    fn circularity_at_most_one(p in convex_polygon()) {
        let c = circularity(&p);
        prop_assert!(c > 0.0 && c <= 1.0, "{c}");
    }

    #[test]
    fn circularity_rigid_and_scale_invariant(
        p in convex_polygon(),
        angle in -PI..PI,
        scale in 0.01f64..100.0,
        dx in -1e3f64..1e3,
        dy in -1e3f64..1e3,
    ) {
        let q = moved(&p, angle, scale, dx, dy);
        prop_assert!((circularity(&p) - circularity(&q)).abs() <= 1e-9);
        let t = Polygon::regular(64, 10.0).unwrap();
        let t2 = moved(&t, -angle, 1.0 / scale, dy, dx);
        prop_assert!((relative_circularity(&p, &t) - relative_circularity(&q, &t2)).abs() <= 1e-9);
    }

    #[test]
    fn rotation_angle_symmetric(a in orientation(), b in orientation()) {
        let ab = rotation_angle(&relative_rotation(&a, &b));
        let ba = rotation_angle(&relative_rotation(&b, &a));
        prop_assert!((ab - ba).abs() <= 1e-12);
        prop_assert!((0.0..=PI).contains(&ab));
    }

    #[test]
    fn deviation_ignores_mounting_offset(raw in prop::collection::vec(orientation(), 1..50), mount in orientation()) {
        let mounted: Vec<Orientation> = raw.iter().map(|r| r.compose(&mount)).collect();
        let a = mean_abs_angular_deviation(&trace(raw)).unwrap();
        let b = mean_abs_angular_deviation(&trace(mounted)).unwrap();
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn single_axis_angle_recovered(angle in 0.0f64..PI, axis in orientation()) {
        let q = Orientation::from_axis_angle([0.3, -0.4, 0.866], angle).unwrap();
        let conj = axis.compose(&q).compose(&axis.inverse());
        prop_assert!((rotation_angle(&conj) - angle).abs() <= 1e-12);
    }
}

#[test]
fn regular_polygons_match_closed_form() {
    for n in (3..=12).chain([100, 3600]) {
        let nf = n as f64;
        let expected = (PI / nf) / (PI / nf).tan();
        let c = circularity(&Polygon::regular(n, 3.0).unwrap());
        assert!((c - expected).abs() < 1e-9, "n = {n}: {c} vs {expected}");
    }
}
