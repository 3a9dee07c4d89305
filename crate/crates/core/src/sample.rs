//! Seeded random isometries, reflections and points for tests and sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hermlin::{
    ball_frame_at, c, to_model_matrix, HermitianForm, Mat3, Model, Tolerance, Vec3, C64, ONE, ZERO,
};
use crate::isometry::{
    dilation, elliptic_standard, heis_rotation, heis_translation, parabolic_standard, AntiIsometry,
    HoloIsometry, Tag,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn angle<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
}

/// Interior point of the ball with Euclidean radius below `0.8`.
pub fn interior_point<R: Rng>(rng: &mut R, form: HermitianForm) -> Vec3 {
    loop {
        let z1 = c(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
        let z2 = c(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
        if z1.norm_sqr() + z2.norm_sqr() < 0.64 {
            let v = Vec3::new(z1, z2, ONE);
            return crate::hermlin::to_model_vector(&v, Model::Ball, form.model);
        }
    }
}

/// Boundary point of the ball.
pub fn boundary_point<R: Rng>(rng: &mut R, form: HermitianForm) -> Vec3 {
    let a = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
    let v = Vec3::new(
        C64::from_polar(a.cos(), angle(rng)),
        C64::from_polar(a.sin(), angle(rng)),
        ONE,
    );
    crate::hermlin::to_model_vector(&v, Model::Ball, form.model)
}

fn unitary2<R: Rng>(rng: &mut R) -> Mat3 {
    let (a, b, cc) = (
        angle(rng),
        rng.gen_range(0.0..std::f64::consts::FRAC_PI_2),
        angle(rng),
    );
    let ph = C64::from_polar(1.0, angle(rng));
    let mut m = Mat3::identity();
    m[(0, 0)] = C64::from_polar(b.cos(), a) * ph;
    m[(0, 1)] = -C64::from_polar(b.sin(), -cc) * ph;
    m[(1, 0)] = C64::from_polar(b.sin(), cc) * ph;
    m[(1, 1)] = C64::from_polar(b.cos(), -a) * ph;
    m
}

/// A random element of SU(2,1) in the ball model, as a raw matrix.
fn ball_element<R: Rng>(rng: &mut R) -> Mat3 {
    let tol = Tolerance::default();
    let p = interior_point(rng, HermitianForm::BALL);
    let g = ball_frame_at(&p, &tol).unwrap_or_else(|_| Mat3::identity());
    g * unitary2(rng)
}

/// A random conjugator in the given model.
pub fn conjugator<R: Rng>(rng: &mut R, form: HermitianForm) -> Mat3 {
    to_model_matrix(&ball_element(rng), Model::Ball, form.model)
}

pub fn random_isometry<R: Rng>(rng: &mut R, form: HermitianForm) -> HoloIsometry {
    let m = ball_element(rng) * ball_element(rng);
    HoloIsometry::new(HermitianForm::BALL, m, &Tolerance::default())
        .expect("products of frames preserve the form")
        .to_model(form.model)
}

pub fn real_reflection<R: Rng>(rng: &mut R, form: HermitianForm) -> AntiIsometry {
    let g = ball_element(rng);
    let ginv = HermitianForm::BALL.inverse(&g);
    AntiIsometry {
        souriau: g * ginv.map(|z| z.conj()),
        form: HermitianForm::BALL,
    }
    .to_model(form.model)
}

fn nonzero_angle<R: Rng>(rng: &mut R) -> f64 {
    let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    s * rng.gen_range(0.2..2.9)
}

/// Standard representative of a class, before conjugation.
pub fn standard_representative<R: Rng>(rng: &mut R, tag: Tag) -> Option<HoloIsometry> {
    let siegel = |m: Mat3| HoloIsometry {
        lift: m,
        form: HermitianForm::SIEGEL,
    };
    Some(match tag {
        Tag::Identity => HoloIsometry::identity(HermitianForm::BALL),
        Tag::RegularElliptic => {
            let a = nonzero_angle(rng);
            let mut b = nonzero_angle(rng);
            while (b - a).abs() < 0.2 {
                b = nonzero_angle(rng);
            }
            elliptic_standard(a, b)
        }
        Tag::ComplexReflection => elliptic_standard(nonzero_angle(rng), 0.0),
        Tag::ComplexReflectionInPoint => {
            let a = nonzero_angle(rng);
            elliptic_standard(a, a)
        }
        Tag::SpecialEllipticOther => return None,
        Tag::Unipotent2Step => siegel(parabolic_standard(ZERO, nonzero_angle(rng), 0.0, false)),
        Tag::Unipotent3Step => {
            let z = C64::from_polar(rng.gen_range(0.3..2.0), angle(rng));
            heis_translation(z, rng.gen_range(-2.0..2.0))
        }
        Tag::ScrewParabolic => siegel(
            heis_translation(ZERO, nonzero_angle(rng)).lift
                * heis_rotation(nonzero_angle(rng)).lift,
        ),
        Tag::Loxodromic => {
            let d = dilation(rng.gen_range(1.3..4.0)).ok()?;
            siegel(d.lift * heis_rotation(angle(rng)).lift)
        }
    })
}

/// A conjugate of a standard representative of `tag`; `None` for classes with
/// no representative.
pub fn class_representative<R: Rng>(
    rng: &mut R,
    tag: Tag,
    form: HermitianForm,
) -> Option<HoloIsometry> {
    let m = standard_representative(rng, tag)?.to_model(form.model);
    let g = conjugator(rng, form);
    Some(HoloIsometry {
        lift: g * m.lift * form.inverse(&g),
        form,
    })
}
