use chyp::decomp::{geometric_decomposes, reflection_decomposes};
use chyp::heisenberg::{
    boundary_action, fan_leaf, heis_mul, invariant_fan, is_infinite_rcircle,
    rcircle_fan_orthogonal, rcircle_of_reflection, rcircle_reflection, HeisPoint, InfiniteRCircle,
};
use chyp::hermlin::{c, Tolerance, C64, I};
use chyp::isometry::{heis_rotation, heis_translation, HoloIsometry};
use proptest::prelude::*;

fn int_point() -> impl Strategy<Value = HeisPoint> {
    (-50i32..50, -50i32..50, -500i32..500)
        .prop_map(|(x, y, t)| HeisPoint::new(c(x as f64, y as f64), t as f64))
}

fn point() -> impl Strategy<Value = HeisPoint> {
    (-3.0f64..3.0, -3.0f64..3.0, -5.0f64..5.0).prop_map(|(x, y, t)| HeisPoint::new(c(x, y), t))
}

fn unit() -> impl Strategy<Value = C64> {
    (0.0f64..std::f64::consts::TAU).prop_map(|a| C64::from_polar(1.0, a))
}

fn near(p: HeisPoint, q: HeisPoint, rel: f64) -> bool {
    let s = 1.0 + p.z.norm() + p.t.abs();
    (p.z - q.z).norm() <= rel * s && (p.t - q.t).abs() <= rel * s
}

/// Image of a line under a boundary map, through the images of two of its points.
fn image_line(g: &HoloIsometry, l: &InfiniteRCircle) -> InfiniteRCircle {
    let a = boundary_action(g, l.point(0.0)).unwrap();
    let b = boundary_action(g, l.point(1.0)).unwrap();
    InfiniteRCircle {
        base: a,
        direction: b.z - a.z,
        slope: b.t - a.t,
    }
}

proptest! {
    #[test]
    fn group_law_on_integers(a in int_point(), b in int_point(), d in int_point()) {
        prop_assert_eq!(heis_mul(heis_mul(a, b), d), heis_mul(a, heis_mul(b, d)));
        prop_assert_eq!(heis_mul(a, HeisPoint::origin()), a);
        prop_assert_eq!(heis_mul(HeisPoint::origin(), a), a);
        prop_assert_eq!(heis_mul(a, a.inverse()), HeisPoint::origin());
    }

    #[test]
    fn translations_act_by_left_multiplication(a in point(), p in point()) {
        let g = heis_translation(a.z, a.t);
        prop_assert!(near(boundary_action(&g, p).unwrap(), heis_mul(a, p), 1e-12));
    }

    #[test]
    fn leaves_are_stable(z in unit(), r in 0.1f64..3.0, t in -4.0f64..4.0, t0 in -5.0f64..5.0, s in -3.0f64..3.0) {
        let tol = Tolerance::default();
        let p = heis_translation(z * r, t);
        let fan = invariant_fan(&p, &tol).unwrap();
        let leaf = fan_leaf(&fan, t0).unwrap();
        prop_assert!(is_infinite_rcircle(&leaf, &tol).unwrap());
        let q = boundary_action(&p, leaf.point(s)).unwrap();
        let s2 = ((q.z - leaf.base.z) * leaf.direction.conj()).re;
        prop_assert!(near(q, leaf.point(s2), 1e-10));
    }

    #[test]
    fn orthogonal_rcircles_decompose(z in unit(), r in 0.1f64..3.0, t in -4.0f64..4.0, s0 in -3.0f64..3.0, t0 in -5.0f64..5.0, flip in any::<bool>()) {
        let tol = Tolerance::default();
        let p = heis_translation(z * r, t);
        let fan = invariant_fan(&p, &tol).unwrap();
        let base = fan_leaf(&fan, t0).unwrap().point(s0);
        let dir = if flip { fan.w * I } else { -fan.w * I };
        let sigma = rcircle_reflection(base, dir).unwrap();
        let line = rcircle_of_reflection(&sigma).unwrap();
        prop_assert!(rcircle_fan_orthogonal(&line, &fan, &tol).unwrap());
        prop_assert!(reflection_decomposes(&sigma, &p, &tol).unwrap());
        prop_assert!(geometric_decomposes(&sigma, &p, &tol).unwrap().decomposes);
    }

    #[test]
    fn rcircle_test_is_invariant(base in point(), d in unit(), bad in 0.05f64..2.0, a in point(), th in -3.1f64..3.1) {
        let tol = Tolerance::default();
        let good = rcircle_of_reflection(&rcircle_reflection(base, d).unwrap()).unwrap();
        let off = InfiniteRCircle { slope: good.slope + bad, ..good };
        for g in [heis_translation(a.z, a.t), heis_rotation(th)] {
            prop_assert!(is_infinite_rcircle(&image_line(&g, &good), &tol).unwrap());
            prop_assert!(!is_infinite_rcircle(&image_line(&g, &off), &tol).unwrap());
        }
    }
}
