//! Projective invariants of point tuples.
//!
//! Points are passed as lifts in `C^{2,1}`; every invariant here is
//! independent of the lift. Holomorphic isometries preserve them and
//! antiholomorphic ones conjugate them.

use crate::error::{GeomError, Result};
use crate::hermlin::{
    inner, locate, norm2, polar_vector, HermitianForm, Location, Mat3, Tolerance, Vec3, C64, ONE,
    ZERO,
};
use crate::isometry::{AntiIsometry, HoloIsometry};

/// Pairing below this fraction of `|P||Q|` is treated as zero.
const VANISH: f64 = 1e-12;
/// `|Im X| <= REAL_TOL (1 + |X|)` counts as real.
pub const REAL_TOL: f64 = 1e-8;
const DIST_TOL: f64 = 1e-8;

fn pairing(form: HermitianForm, p: &Vec3, q: &Vec3) -> Result<C64> {
    let v = inner(form, p, q);
    if v.norm() <= VANISH * p.norm() * q.norm() {
        return Err(GeomError::Degenerate("vanishing Hermitian product".into()));
    }
    Ok(v)
}

/// `<P1,P2><P2,P3><P3,P1> / (<P1,P3><P3,P2><P2,P1>)`.
pub fn triple_ratio(form: HermitianForm, p1: &Vec3, p2: &Vec3, p3: &Vec3) -> Result<C64> {
    let num = pairing(form, p1, p2)? * pairing(form, p2, p3)? * pairing(form, p3, p1)?;
    Ok(num / num.conj())
}

/// Hermitian triple product `<P1,P2><P2,P3><P3,P1>`.
pub fn triple_product(form: HermitianForm, p1: &Vec3, p2: &Vec3, p3: &Vec3) -> C64 {
    inner(form, p1, p2) * inner(form, p2, p3) * inner(form, p3, p1)
}

fn require(form: HermitianForm, pts: &[&Vec3], want: Location, tol: &Tolerance) -> Result<()> {
    for p in pts {
        let loc = locate(form, p, tol)?;
        if loc != want {
            return Err(GeomError::Precondition(format!(
                "expected {want:?} points, found {loc:?}"
            )));
        }
    }
    Ok(())
}

/// Cartan's angular invariant of three boundary points, in `[-pi/2, pi/2]`.
pub fn cartan(
    form: HermitianForm,
    p1: &Vec3,
    p2: &Vec3,
    p3: &Vec3,
    tol: &Tolerance,
) -> Result<f64> {
    require(form, &[p1, p2, p3], Location::Boundary, tol)?;
    for (a, b) in [(p1, p2), (p2, p3), (p3, p1)] {
        if pairing(form, a, b).is_err() {
            return Err(GeomError::Coincident);
        }
    }
    let a = (-triple_product(form, p1, p2, p3)).arg();
    Ok(a.clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2))
}

/// Normalized triple product divided by the three squared norms.
pub fn normalized_triple_product(form: HermitianForm, p1: &Vec3, p2: &Vec3, p3: &Vec3) -> C64 {
    triple_product(form, p1, p2, p3) / (norm2(form, p1) * norm2(form, p2) * norm2(form, p3))
}

/// Brehm's shape invariant `-Re T~` of three interior points.
pub fn brehm_shape(
    form: HermitianForm,
    p1: &Vec3,
    p2: &Vec3,
    p3: &Vec3,
    tol: &Tolerance,
) -> Result<f64> {
    require(form, &[p1, p2, p3], Location::Interior, tol)?;
    Ok(-normalized_triple_product(form, p1, p2, p3).re)
}

/// `cosh^2(d/2)` between two interior points.
pub fn cosh2_half_dist(form: HermitianForm, p: &Vec3, q: &Vec3) -> f64 {
    inner(form, p, q).norm_sqr() / (norm2(form, p) * norm2(form, q))
}

pub fn distance(form: HermitianForm, p: &Vec3, q: &Vec3) -> f64 {
    2.0 * cosh2_half_dist(form, p, q).max(1.0).sqrt().acosh()
}

/// Complex cross-ratio `<P3,P1><P4,P2> / (<P4,P1><P3,P2>)`.
pub fn cross_ratio(form: HermitianForm, p1: &Vec3, p2: &Vec3, p3: &Vec3, p4: &Vec3) -> Result<C64> {
    let den = pairing(form, p4, p1)? * pairing(form, p3, p2)?;
    Ok(inner(form, p3, p1) * inner(form, p4, p2) / den)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ext {
    Finite(C64),
    Infinity,
}

/// `(z4 - z1)(z3 - z2) / ((z4 - z2)(z3 - z1))` on the Riemann sphere.
pub fn classical_cross_ratio(z1: Ext, z2: Ext, z3: Ext, z4: Ext) -> Result<Ext> {
    let inf = |z: &Ext| matches!(z, Ext::Infinity);
    if [z1, z2, z3, z4].iter().filter(|z| inf(z)).count() > 1 {
        return Err(GeomError::Degenerate(
            "more than one point at infinity".into(),
        ));
    }
    // a factor containing infinity cancels against its partner
    let diff = |a: Ext, b: Ext| -> Option<C64> {
        match (a, b) {
            (Ext::Finite(x), Ext::Finite(y)) => Some(x - y),
            _ => None,
        }
    };
    let factors = [diff(z4, z1), diff(z3, z2), diff(z4, z2), diff(z3, z1)];
    let num = factors[0].unwrap_or(ONE) * factors[1].unwrap_or(ONE);
    let den = factors[2].unwrap_or(ONE) * factors[3].unwrap_or(ONE);
    if den == ZERO {
        if num == ZERO {
            return Err(GeomError::Degenerate(
                "indeterminate cross-ratio 0/0".into(),
            ));
        }
        return Ok(Ext::Infinity);
    }
    Ok(Ext::Finite(num / den))
}

/// Orthogonal projection of `x` onto the complex line through `p1`, `p2`.
pub fn project_to_complex_line(
    form: HermitianForm,
    p1: &Vec3,
    p2: &Vec3,
    x: &Vec3,
    tol: &Tolerance,
) -> Result<Vec3> {
    let c = polar_vector(form, p1, p2, tol)?;
    if norm2(form, &c) <= 0.0 {
        return Err(GeomError::Degenerate(
            "line is not a complex line of the plane".into(),
        ));
    }
    Ok(x - c * inner(form, x, &c))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealityCase {
    /// Projections to `L12` are equidistant from a geodesic.
    Equidistant,
    CocyclicNonSeparating,
    CocyclicSeparating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reality {
    PositiveReal(RealityCase),
    NegativeReal(RealityCase),
    NonReal,
}

pub fn is_real(x: C64) -> bool {
    x.im.abs() <= REAL_TOL * (1.0 + x.norm())
}

fn on_boundary_of_line(
    form: HermitianForm,
    p1: &Vec3,
    p2: &Vec3,
    x: &Vec3,
    tol: &Tolerance,
) -> bool {
    let Ok(c) = polar_vector(form, p1, p2, tol) else {
        return false;
    };
    let off = inner(form, x, &c).norm() / x.norm();
    off <= 1e-8 && matches!(locate(form, x, tol), Ok(Location::Boundary))
}

pub fn cross_ratio_reality(form: HermitianForm, p: [&Vec3; 4], tol: &Tolerance) -> Result<Reality> {
    let x = cross_ratio(form, p[0], p[1], p[2], p[3])?;
    if !is_real(x) {
        return Ok(Reality::NonReal);
    }
    let all_on_circle = [p[0], p[1]]
        .iter()
        .all(|q| matches!(locate(form, q, tol), Ok(Location::Boundary)))
        && on_boundary_of_line(form, p[0], p[1], p[2], tol)
        && on_boundary_of_line(form, p[0], p[1], p[3], tol);
    if x.re > 0.0 {
        let case = if all_on_circle {
            RealityCase::CocyclicNonSeparating
        } else {
            RealityCase::Equidistant
        };
        Ok(Reality::PositiveReal(case))
    } else {
        Ok(Reality::NegativeReal(RealityCase::CocyclicSeparating))
    }
}

/// Whether some real reflection swaps `p1 <-> p2` and `p3 <-> p4`.
pub fn swapping_reflection_exists(
    form: HermitianForm,
    p: [&Vec3; 4],
    tol: &Tolerance,
) -> Result<bool> {
    let locs = p
        .iter()
        .map(|q| locate(form, q, tol))
        .collect::<Result<Vec<_>>>()?;
    let all = |l: Location| locs.iter().all(|x| *x == l);
    let interior = if all(Location::Boundary) {
        false
    } else if all(Location::Interior) {
        true
    } else {
        return Err(GeomError::Precondition("mixed point locations".into()));
    };
    let x = cross_ratio(form, p[0], p[1], p[2], p[3])?;
    if !(is_real(x) && x.re > 0.0) {
        return Ok(false);
    }
    if !interior {
        return Ok(true);
    }
    let close = |a: f64, b: f64| (a - b).abs() <= DIST_TOL * (1.0 + a.abs().max(b.abs()));
    Ok(close(
        cosh2_half_dist(form, p[0], p[2]),
        cosh2_half_dist(form, p[1], p[3]),
    ) && close(
        cosh2_half_dist(form, p[0], p[3]),
        cosh2_half_dist(form, p[1], p[2]),
    ))
}

/// `2 (A(p1,p2,p3) + A(p1,p3,p4))`.
pub fn toledo_once_punctured_torus(
    form: HermitianForm,
    p: [&Vec3; 4],
    tol: &Tolerance,
) -> Result<f64> {
    Ok(2.0 * (cartan(form, p[0], p[1], p[2], tol)? + cartan(form, p[0], p[2], p[3], tol)?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Congruence {
    Holomorphic(HoloIsometry),
    Antiholomorphic(AntiIsometry),
}

/// Lifts with `<Xi,Xi> = -1` and `<X1,Xk>` real negative.
fn aligned_lifts(form: HermitianForm, x: [&Vec3; 3]) -> [Vec3; 3] {
    let mut out = [Vec3::zeros(); 3];
    for i in 0..3 {
        out[i] = x[i].unscale((-norm2(form, x[i])).sqrt());
    }
    for i in 1..3 {
        let ip = inner(form, &out[0], &out[i]);
        if ip.norm() > 0.0 {
            // <X1, c Xi> = conj(c) <X1, Xi>; choose c so this is -|<X1,Xi>|
            out[i] *= (-ip / ip.norm()).conj();
        }
    }
    out
}

fn gram(form: HermitianForm, v: &[Vec3; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| inner(form, &v[j], &v[i]))
}

/// Basis completing an aligned triple: the triple itself when it spans, else
/// two of its points plus the unit polar vector oriented by the third.
fn frame_of(form: HermitianForm, v: &[Vec3; 3], tol: &Tolerance) -> Result<(Mat3, bool)> {
    let m = Mat3::from_columns(v);
    if m.determinant().norm() > 1e-9 * v.iter().map(|x| x.norm()).product::<f64>() {
        return Ok((m, true));
    }
    let (a, b) = if (v[0] - v[1]).norm() > 1e-9 * v[0].norm() {
        (v[0], v[1])
    } else {
        (v[0], v[2])
    };
    let c = polar_vector(form, &a, &b, tol)?;
    Ok((Mat3::from_columns(&[a, b, c]), false))
}

/// Isometry sending the interior triple `x` to `y`, holomorphic when the side
/// lengths and triple ratios agree, antiholomorphic when the triple ratios are
/// conjugate; `None` when neither holds.
pub fn brehm_congruence(
    form: HermitianForm,
    x: [&Vec3; 3],
    y: [&Vec3; 3],
    tol: &Tolerance,
) -> Result<Option<Congruence>> {
    require(
        form,
        &[x[0], x[1], x[2], y[0], y[1], y[2]],
        Location::Interior,
        tol,
    )?;
    let xs = aligned_lifts(form, x);
    let ys = aligned_lifts(form, y);
    let gx = gram(form, &xs);
    let gy = gram(form, &ys);
    let scale = 1.0 + gx.norm();
    let close = |a: &Mat3, b: &Mat3| (a - b).norm() <= 1e-8 * scale;
    let (fx, _) = frame_of(form, &xs, tol)?;
    let (fy, _) = frame_of(form, &ys, tol)?;
    if close(&gx, &gy) {
        let inv = fx.try_inverse().ok_or(GeomError::DivisionByZero)?;
        let g = HoloIsometry::new(form, fy * inv, &loose(tol))?;
        return Ok(Some(Congruence::Holomorphic(g)));
    }
    if close(&gx.map(|z| z.conj()), &gy) {
        let inv = fx
            .map(|z| z.conj())
            .try_inverse()
            .ok_or(GeomError::DivisionByZero)?;
        let m = AntiIsometry::new(form, fy * inv, &loose(tol))?;
        return Ok(Some(Congruence::Antiholomorphic(m)));
    }
    Ok(None)
}

fn loose(tol: &Tolerance) -> Tolerance {
    Tolerance {
        eq: tol.eq.max(1e-7),
        ..*tol
    }
}
