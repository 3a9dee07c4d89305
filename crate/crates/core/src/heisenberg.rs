//! Boundary geometry of the Siegel model.
//!
//! The boundary minus `q_inf` is the Heisenberg group with law
//! `[z1,t1][z2,t2] = [z1+z2, t1+t2+2 Im(z1 conj z2)]`. Its left-invariant
//! contact form is `dt + 2x dy - 2y dx`; this is the sign for which the
//! translation matrices, the group law and the fan foliations agree.

use crate::error::{GeomError, Result};
use crate::hermlin::{
    cube_roots_of_unity, siegel_frame, HermitianForm, Mat3, Model, Tolerance, Vec3, C64, ONE, ZERO,
};
use crate::isometry::{classify, translation_matrix, AntiIsometry, HoloIsometry, Tag};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisPoint {
    pub z: C64,
    pub t: f64,
}

impl HeisPoint {
    pub fn new(z: C64, t: f64) -> Self {
        HeisPoint { z, t }
    }

    pub fn origin() -> Self {
        HeisPoint { z: ZERO, t: 0.0 }
    }

    pub fn inverse(&self) -> Self {
        HeisPoint {
            z: -self.z,
            t: -self.t,
        }
    }

    /// Lift `((-|z|^2 + it)/2, z, 1)`.
    pub fn lift(&self) -> Vec3 {
        HorosphericalPoint {
            z: self.z,
            t: self.t,
            u: 0.0,
        }
        .lift()
    }

    /// Heisenberg coordinates of a boundary lift other than `q_inf`.
    pub fn from_lift(v: &Vec3) -> Result<Self> {
        let h = HorosphericalPoint::from_lift(v)?;
        Ok(HeisPoint { z: h.z, t: h.t })
    }
}

pub fn heis_mul(a: HeisPoint, b: HeisPoint) -> HeisPoint {
    HeisPoint {
        z: a.z + b.z,
        t: a.t + b.t + 2.0 * (a.z * b.z.conj()).im,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorosphericalPoint {
    pub z: C64,
    pub t: f64,
    pub u: f64,
}

impl HorosphericalPoint {
    /// The lift `((-|z|^2 - u + it)/2, z, 1)`.
    pub fn lift(&self) -> Vec3 {
        Vec3::new(
            C64::new(-self.z.norm_sqr() - self.u, self.t) / 2.0,
            self.z,
            ONE,
        )
    }

    pub fn from_lift(v: &Vec3) -> Result<Self> {
        if v[2].norm() <= 1e-14 * v.norm() {
            return Err(GeomError::Precondition("point at infinity".into()));
        }
        let w = v / v[2];
        let z = w[1];
        Ok(HorosphericalPoint {
            z,
            t: 2.0 * w[0].im,
            u: -2.0 * w[0].re - z.norm_sqr(),
        })
    }
}

pub fn standard_lift(p: &HorosphericalPoint) -> Vec3 {
    p.lift()
}

fn fixes_qinf(m: &Mat3) -> bool {
    let s = m.norm();
    m[(1, 0)].norm() <= 1e-8 * s && m[(2, 0)].norm() <= 1e-8 * s
}

/// Boundary map induced by an isometry fixing `q_inf`.
pub fn boundary_action(g: &HoloIsometry, p: HeisPoint) -> Result<HeisPoint> {
    let s = g.to_model(Model::Siegel);
    if !fixes_qinf(&s.lift) {
        return Err(GeomError::Precondition("isometry moves q_inf".into()));
    }
    HeisPoint::from_lift(&(s.lift * p.lift()))
}

/// Boundary map induced by an antiholomorphic isometry fixing `q_inf`.
pub fn anti_boundary_action(phi: &AntiIsometry, p: HeisPoint) -> Result<HeisPoint> {
    let s = phi.to_model(Model::Siegel);
    if !fixes_qinf(&s.souriau) {
        return Err(GeomError::Precondition("isometry moves q_inf".into()));
    }
    HeisPoint::from_lift(&(s.souriau * p.lift().map(|z| z.conj())))
}

/// The contact form at `at` evaluated on `(dx, dy, dt)`.
pub fn contact_form_eval(at: HeisPoint, tangent: (f64, f64, f64)) -> f64 {
    let (dx, dy, dt) = tangent;
    dt + 2.0 * at.z.re * dy - 2.0 * at.z.im * dx
}

/// The affine line `s -> [base.z + s direction, base.t + s slope]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfiniteRCircle {
    pub base: HeisPoint,
    pub direction: C64,
    pub slope: f64,
}

impl InfiniteRCircle {
    pub fn point(&self, s: f64) -> HeisPoint {
        HeisPoint {
            z: self.base.z + self.direction * s,
            t: self.base.t + self.slope * s,
        }
    }

    fn tangent(&self) -> (f64, f64, f64) {
        (self.direction.re, self.direction.im, self.slope)
    }
}

pub fn is_infinite_rcircle(line: &InfiniteRCircle, tol: &Tolerance) -> Result<bool> {
    let d = line.direction.norm();
    if d == 0.0 {
        return Err(GeomError::Precondition("zero direction".into()));
    }
    let a = contact_form_eval(line.base, line.tangent());
    let scale = d * (1.0 + line.base.z.norm()) + line.slope.abs();
    Ok(a.abs() <= tol.angle.max(1e-12) * scale)
}

/// Fan over the affine line `{w (s + ik)}`. `conjugator` maps the standard
/// fan at `q_inf` to the actual one when the apex is elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Fan {
    pub w: C64,
    pub k: f64,
    pub conjugator: Option<Mat3>,
}

impl Fan {
    pub fn new(w: C64, k: f64) -> Result<Self> {
        if (w.norm() - 1.0).abs() > 1e-12 {
            return Err(GeomError::Precondition("fan direction must be unit".into()));
        }
        Ok(Fan {
            w,
            k,
            conjugator: None,
        })
    }
}

fn unipotent_part(m: &Mat3) -> Mat3 {
    let tr = m.trace() / 3.0;
    let w = cube_roots_of_unity()
        .into_iter()
        .min_by(|a, b| (tr - a).norm().total_cmp(&(tr - b).norm()))
        .unwrap_or(ONE);
    m * w.conj()
}

/// `[z, t]` of a Heisenberg translation lift (up to a cube root of unity).
pub fn translation_params(m: &Mat3) -> (C64, f64) {
    let n = unipotent_part(m);
    let n = n / n[(2, 2)];
    (n[(1, 2)], 2.0 * n[(0, 2)].im)
}

/// The fan stable leaf by leaf under a 3-step unipotent.
pub fn invariant_fan(p: &HoloIsometry, tol: &Tolerance) -> Result<Fan> {
    let cls = classify(p, tol)?;
    if cls.tag != Tag::Unipotent3Step {
        return Err(GeomError::wrong_class(
            Tag::Unipotent3Step.as_str(),
            cls.tag.as_str(),
        ));
    }
    let s = p.to_model(Model::Siegel);
    let (m, conj) = if fixes_qinf(&s.lift) {
        (s.lift, None)
    } else {
        let fp = cls
            .fixed_points
            .first()
            .copied()
            .ok_or_else(|| GeomError::Degenerate("no fixed point".into()))?;
        let fp = crate::hermlin::to_model_vector(&fp, p.form.model, Model::Siegel);
        let g = siegel_frame(&fp, None, tol)?;
        (HermitianForm::SIEGEL.inverse(&g) * s.lift * g, Some(g))
    };
    let (z, t) = translation_params(&m);
    let w = z / z.norm();
    Ok(Fan {
        w,
        k: t / (4.0 * z.norm()),
        conjugator: conj,
    })
}

/// Leaf `{[w(s + ik), t0 + 2sk]}` of the real foliation of the fan boundary.
pub fn fan_leaf(f: &Fan, t0: f64) -> Result<InfiniteRCircle> {
    if f.conjugator.is_some() {
        return Err(GeomError::Precondition("fan not based at q_inf".into()));
    }
    Ok(InfiniteRCircle {
        base: HeisPoint {
            z: f.w * C64::new(0.0, f.k),
            t: t0,
        },
        direction: f.w,
        slope: 2.0 * f.k,
    })
}

pub fn fans_parallel(f1: &Fan, f2: &Fan, tol: &Tolerance) -> bool {
    (f2.w * f1.w.conj()).im.abs() <= tol.angle.max(1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommuteReport {
    /// Verdict of the fan criterion (or stable line criterion).
    pub fan_criterion: bool,
    /// Verdict of the matrix commutator.
    pub matrix: bool,
}

fn isolated_vector(m: &Mat3) -> Option<Vec3> {
    let es = crate::hermlin::eigensystem(m).ok()?;
    es.spaces
        .iter()
        .find(|s| s.multiplicity == 1)
        .map(|s| s.vectors[0])
}

/// Commutation of two parabolics fixing `q_inf`.
pub fn parabolics_commute_at_infinity(
    p1: &HoloIsometry,
    p2: &HoloIsometry,
    tol: &Tolerance,
) -> Result<CommuteReport> {
    let a = p1.to_model(Model::Siegel);
    let b = p2.to_model(Model::Siegel);
    if !fixes_qinf(&a.lift) || !fixes_qinf(&b.lift) {
        return Err(GeomError::Precondition(
            "parabolic does not fix q_inf".into(),
        ));
    }
    let ta = classify(&a, tol)?.tag;
    let tb = classify(&b, tol)?.tag;
    if !ta.is_parabolic() || !tb.is_parabolic() {
        return Err(GeomError::wrong_class("parabolic", format!("{ta}/{tb}")));
    }
    let comm = a.lift * b.lift - b.lift * a.lift;
    let matrix = comm.norm() <= tol.eq.max(1e-10) * (1.0 + a.lift.norm() * b.lift.norm());
    let fan_criterion = match (ta, tb) {
        (Tag::Unipotent3Step, Tag::Unipotent3Step) => {
            let (z1, _) = translation_params(&a.lift);
            let (z2, _) = translation_params(&b.lift);
            (z2 * z1.conj()).im.abs() <= tol.angle.max(1e-10) * z1.norm() * z2.norm()
        }
        // vertical translations are central in the stabilizer of q_inf
        (Tag::Unipotent2Step, _) | (_, Tag::Unipotent2Step) => true,
        (Tag::ScrewParabolic, Tag::ScrewParabolic) => {
            match (isolated_vector(&a.lift), isolated_vector(&b.lift)) {
                (Some(u), Some(v)) => crate::hermlin::proj_eq(&u, &v, 1e-8),
                _ => false,
            }
        }
        _ => false,
    };
    Ok(CommuteReport {
        fan_criterion,
        matrix,
    })
}

/// Whether the infinite R-circle `l` meets the fan boundary orthogonally.
pub fn rcircle_fan_orthogonal(l: &InfiniteRCircle, f: &Fan, tol: &Tolerance) -> Result<bool> {
    if f.conjugator.is_some() {
        return Err(GeomError::Precondition("fan not based at q_inf".into()));
    }
    let d = l.direction;
    if d.norm() == 0.0 {
        return Err(GeomError::Precondition("zero direction".into()));
    }
    let cross = (d * f.w.conj()).im / d.norm();
    if cross.abs() <= tol.angle.max(1e-12) {
        return Err(GeomError::Degenerate(
            "line parallel to or inside the fan boundary".into(),
        ));
    }
    Ok(((d * f.w.conj()).re / d.norm()).abs() <= tol.angle.max(1e-9))
}

pub fn vertical_projection(p: HeisPoint) -> C64 {
    p.z
}

/// Affine map `w -> a w + b` on `C` induced by an isometry fixing `q_inf`.
pub fn pi_star(g: &HoloIsometry) -> Result<(C64, C64)> {
    let s = g.to_model(Model::Siegel);
    if !fixes_qinf(&s.lift) {
        return Err(GeomError::Precondition("isometry moves q_inf".into()));
    }
    let m = s.lift;
    Ok((m[(1, 1)] / m[(2, 2)], m[(1, 2)] / m[(2, 2)]))
}

/// Fixed R-circle of a real reflection whose mirror contains `q_inf`.
pub fn rcircle_of_reflection(sigma: &AntiIsometry) -> Result<InfiniteRCircle> {
    let s = sigma.to_model(Model::Siegel).souriau;
    if !fixes_qinf(&s) {
        return Err(GeomError::Precondition("reflection moves q_inf".into()));
    }
    let s = s / s[(2, 2)];
    let e = s[(1, 1)];
    let z0 = s[(1, 2)];
    let t0 = 2.0 * s[(0, 2)].im;
    let half = C64::from_polar(1.0, e.arg() / 2.0);
    Ok(InfiniteRCircle {
        base: HeisPoint {
            z: z0 / 2.0,
            t: t0 / 2.0 + (z0 * z0 * e.conj()).im / 2.0,
        },
        direction: half,
        slope: (z0 * half.conj()).im,
    })
}

/// Real reflection about the infinite R-circle through `base` with horizontal
/// direction `direction`, in the Siegel model.
pub fn rcircle_reflection(base: HeisPoint, direction: C64) -> Result<AntiIsometry> {
    let n = direction.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(GeomError::Precondition("zero direction".into()));
    }
    let d = direction / n;
    let t = translation_matrix(base.z, C64::new(0.0, base.t));
    let rot = Mat3::from_diagonal(&Vec3::new(ONE, d * d, ONE));
    let tinv_conj = HermitianForm::SIEGEL.inverse(&t).map(|z| z.conj());
    Ok(AntiIsometry {
        souriau: t * rot * tinv_conj,
        form: HermitianForm::SIEGEL,
    })
}
