use chyp::hermlin::{
    c, eigensystem, inner, locate, polar_vector, preserves_form, proj_dist, su_normalize,
    to_model_matrix, to_model_vector, HermitianForm, Mat3, Model, Tolerance, Vec3, C64,
};
use chyp::sample;
use proptest::prelude::*;

fn cplx(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(x, y)| c(x, y))
}

fn vector(r: f64) -> impl Strategy<Value = Vec3> {
    (cplx(r), cplx(r), cplx(r)).prop_map(|(a, b, d)| Vec3::new(a, b, d))
}

fn matrix(r: f64) -> impl Strategy<Value = Mat3> {
    proptest::collection::vec(cplx(r), 9).prop_map(Mat3::from_iterator)
}

fn form() -> impl Strategy<Value = HermitianForm> {
    prop_oneof![Just(HermitianForm::BALL), Just(HermitianForm::SIEGEL)]
}

proptest! {
    #[test]
    fn inner_is_sesquilinear(f in form(), x in vector(3.0), y in vector(3.0), z in vector(3.0), s in cplx(2.0)) {
        let scale = 1.0 + x.norm() * y.norm() + z.norm() * y.norm();
        prop_assert!((inner(f, &x, &y) - inner(f, &y, &x).conj()).norm() <= 1e-12 * scale);
        prop_assert!((inner(f, &(x + z), &y) - inner(f, &x, &y) - inner(f, &z, &y)).norm() <= 1e-12 * scale);
        let lin = inner(f, &(x * s), &y) - s * inner(f, &x, &y);
        let anti = inner(f, &y, &(x * s)) - s.conj() * inner(f, &y, &x);
        prop_assert!(lin.norm() <= 1e-12 * scale * (1.0 + s.norm()));
        prop_assert!(anti.norm() <= 1e-12 * scale * (1.0 + s.norm()));
    }

    #[test]
    fn locate_ignores_rescaling(seed in any::<u64>(), s in cplx(5.0)) {
        prop_assume!(s.norm() > 1e-2);
        let t = Tolerance::default();
        let mut rng = sample::rng(seed);
        let f = HermitianForm::BALL;
        for p in [sample::interior_point(&mut rng, f), sample::boundary_point(&mut rng, f)] {
            prop_assert_eq!(locate(f, &p, &t).unwrap(), locate(f, &(p * s), &t).unwrap());
        }
        let outside = Vec3::new(c(2.0, 0.0), c(0.5, 0.1), c(1.0, 0.0));
        prop_assert_eq!(locate(f, &outside, &t).unwrap(), locate(f, &(outside * s), &t).unwrap());
    }

    #[test]
    fn eigen_residuals(m in matrix(1e3)) {
        let es = eigensystem(&m).unwrap();
        for (l, v) in es.pairs() {
            prop_assert!((m * v - v * l).norm() <= 1e-8 * m.norm() * v.norm());
        }
    }

    #[test]
    fn su_normalize_lands_in_su(seed in any::<u64>(), phase in -3.2f64..3.2, f in form()) {
        let t = Tolerance::default();
        let g = sample::random_isometry(&mut sample::rng(seed), f).lift * C64::from_polar(1.0, phase);
        let n = su_normalize(f, &g, &t).unwrap();
        prop_assert!(preserves_form(f, &n, &t));
        prop_assert!((n.determinant() - 1.0).norm() <= 1e-9);
        prop_assert!(su_normalize(f, &g.scale(2.0), &t).is_err());
    }

    #[test]
    fn polar_is_orthogonal(seed in any::<u64>(), s in cplx(3.0), u in cplx(3.0)) {
        prop_assume!(s.norm() > 1e-2 && u.norm() > 1e-2);
        let t = Tolerance::default();
        let f = HermitianForm::BALL;
        let mut rng = sample::rng(seed);
        let p = sample::interior_point(&mut rng, f);
        let q = sample::boundary_point(&mut rng, f);
        let n = polar_vector(f, &p, &q, &t).unwrap();
        prop_assert!(inner(f, &p, &n).norm() <= 1e-9 * p.norm() * n.norm());
        prop_assert!(inner(f, &q, &n).norm() <= 1e-9 * q.norm() * n.norm());
        let m = polar_vector(f, &(p * s), &(q * u), &t).unwrap();
        prop_assert!(proj_dist(&n, &m) <= 1e-9);
    }

    #[test]
    fn cayley_round_trip(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let g = sample::random_isometry(&mut rng, HermitianForm::BALL).lift;
        let s = to_model_matrix(&g, Model::Ball, Model::Siegel);
        let back = to_model_matrix(&s, Model::Siegel, Model::Ball);
        prop_assert!((back - g).camax() <= 1e-12 * (1.0 + g.camax()));
        let a = eigensystem(&g).unwrap().roots;
        let b = eigensystem(&s).unwrap().roots;
        for x in a {
            let d = b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(d <= 1e-9 * (1.0 + x.norm()));
        }
        let p = sample::interior_point(&mut rng, HermitianForm::BALL);
        let q = to_model_vector(&to_model_vector(&p, Model::Ball, Model::Siegel), Model::Siegel, Model::Ball);
        prop_assert!((p - q).camax() <= 1e-12);
    }
}
