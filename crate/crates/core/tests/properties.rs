use proptest::prelude::*;

use transversal::generate::{generate_instance, Kind};
use transversal::io::{parse_instance, serialize_instance, Mode};
use transversal::measures::{quantile, MeasureSpec};
use transversal::separation::{orientation_det, orientation_normal};
use transversal::{Body, Halfspace, Point};

fn cloud(d: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, d), d + 2..d + 9)
        .prop_map(|pts| pts.iter().map(|p| Point::new(p)).collect())
}

fn direction(d: usize) -> impl Strategy<Value = Point> {
    prop::collection::vec(-1.0f64..1.0, d)
        .prop_filter_map("nonzero direction", |v| Point::new(&v).normalized())
}

fn body_and_cut(d: usize) -> impl Strategy<Value = (Body, Point, f64)> {
    (cloud(d), direction(d), 0.0f64..1.0)
        .prop_filter_map("full-dimensional body", |(pts, v, s)| {
            let body = Body::from_points(&pts).ok()?;
            (body.volume() > 1e-3).then_some((body, v, s))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn clipping_is_additive((body, v, s) in body_and_cut(3)) {
        let (t0, t1) = body.support_interval(&v);
        let t = t0 + s * (t1 - t0);
        let h = Halfspace::new(v, t).unwrap();
        let below = body.clip(&h).map_or(0.0, |b| b.volume());
        let above = body.clip(&h.complement()).map_or(0.0, |b| b.volume());
        prop_assert!((below + above - body.volume()).abs() <= 1e-9 * body.volume());
    }

    #[test]
    fn quantile_of_the_reversed_direction((body, v, s) in body_and_cut(2)) {
        let mu = MeasureSpec::uniform(body);
        let q = quantile(&mu, &v, s, 1e-14).unwrap();
        let q_rev = quantile(&mu, &v.scaled(-1.0), 1.0 - s, 1e-14).unwrap();
        prop_assert!((q + q_rev).abs() <= 1e-9 * (1.0 + q.abs()));
    }

    #[test]
    fn transposition_flips_the_oriented_normal(pts in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 3)) {
        let pts: Vec<Point> = pts.iter().map(|p| Point::new(p)).collect();
        let Ok(v) = orientation_normal(&pts) else { return Ok(()) };
        prop_assert!(orientation_det(&v, &pts) > 0.0);
        let mut swapped = pts.clone();
        swapped.swap(0, 1);
        let w = orientation_normal(&swapped).unwrap();
        prop_assert!(w.distance(&v.scaled(-1.0)) < 1e-9);
        // a 3-cycle is even
        let rotated = vec![pts[1].clone(), pts[2].clone(), pts[0].clone()];
        prop_assert!(orientation_normal(&rotated).unwrap().distance(&v) < 1e-9);
    }

    #[test]
    fn generated_instances_round_trip(seed in 0u64..10_000, d in 1usize..4) {
        let inst = generate_instance(d, Kind::SeparatedBoxes, Mode::Halfspace, seed).unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(serialize_instance(&back), text);
    }
}
