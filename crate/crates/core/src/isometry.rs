//! Holomorphic and antiholomorphic isometries of the complex hyperbolic plane.
//!
//! A holomorphic isometry is stored as its SU(2,1) lift. An antiholomorphic one
//! is stored as a Souriau matrix `M` in U(2,1), acting by `z -> M conj(z)`.
//! Lifts are compared projectively, up to a cube root of unity.

use std::fmt;

use crate::error::{GeomError, Result};
use crate::hermlin::{
    ball_frame_at, c, cube_roots_of_unity, eigensystem, inner, is_finite_mat, norm2, siegel_frame,
    su_normalize, to_model_matrix, u21_normalize, unit_lift, EigenSpace, Eigensystem,
    HermitianForm, Location, Mat3, Model, Tolerance, Vec3, C64, ONE, ZERO,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HoloIsometry {
    pub lift: Mat3,
    pub form: HermitianForm,
}

impl HoloIsometry {
    /// Normalizes `m` into SU(2,1); fails if `m` does not preserve the form.
    pub fn new(form: HermitianForm, m: Mat3, tol: &Tolerance) -> Result<Self> {
        let lift = su_normalize(form, &m, tol)?;
        Ok(HoloIsometry { lift, form })
    }

    pub fn identity(form: HermitianForm) -> Self {
        HoloIsometry {
            lift: Mat3::identity(),
            form,
        }
    }

    pub fn to_model(&self, model: Model) -> Self {
        HoloIsometry {
            lift: to_model_matrix(&self.lift, self.form.model, model),
            form: HermitianForm::new(model),
        }
    }

    pub fn inverse(&self) -> Self {
        HoloIsometry {
            lift: self.form.inverse(&self.lift),
            form: self.form,
        }
    }

    pub fn compose(&self, other: &HoloIsometry) -> Result<Self> {
        same_form(self.form, other.form)?;
        Ok(HoloIsometry {
            lift: self.lift * other.lift,
            form: self.form,
        })
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.lift * p
    }

    pub fn trace(&self) -> C64 {
        self.lift.trace()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntiIsometry {
    pub souriau: Mat3,
    pub form: HermitianForm,
}

impl AntiIsometry {
    /// Rescales `m` to unimodular determinant; fails if it is not in U(2,1) up to scale.
    pub fn new(form: HermitianForm, m: Mat3, tol: &Tolerance) -> Result<Self> {
        let souriau = u21_normalize(form, &m, tol)?;
        Ok(AntiIsometry { souriau, form })
    }

    /// Complex conjugation in affine coordinates.
    pub fn sigma0(form: HermitianForm) -> Self {
        AntiIsometry {
            souriau: Mat3::identity(),
            form,
        }
    }

    pub fn to_model(&self, model: Model) -> Self {
        AntiIsometry {
            souriau: to_model_matrix(&self.souriau, self.form.model, model),
            form: HermitianForm::new(model),
        }
    }
}

fn same_form(a: HermitianForm, b: HermitianForm) -> Result<()> {
    if a != b {
        return Err(GeomError::MixedForms);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Identity,
    RegularElliptic,
    ComplexReflection,
    ComplexReflectionInPoint,
    SpecialEllipticOther,
    Unipotent2Step,
    Unipotent3Step,
    ScrewParabolic,
    Loxodromic,
}

impl Tag {
    pub const ALL: [Tag; 9] = [
        Tag::Identity,
        Tag::RegularElliptic,
        Tag::ComplexReflection,
        Tag::ComplexReflectionInPoint,
        Tag::SpecialEllipticOther,
        Tag::Unipotent2Step,
        Tag::Unipotent3Step,
        Tag::ScrewParabolic,
        Tag::Loxodromic,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Tag::Identity => "IDENTITY",
            Tag::RegularElliptic => "REGULAR_ELLIPTIC",
            Tag::ComplexReflection => "COMPLEX_REFLECTION",
            Tag::ComplexReflectionInPoint => "COMPLEX_REFLECTION_IN_POINT",
            Tag::SpecialEllipticOther => "SPECIAL_ELLIPTIC_OTHER",
            Tag::Unipotent2Step => "UNIPOTENT_2STEP",
            Tag::Unipotent3Step => "UNIPOTENT_3STEP",
            Tag::ScrewParabolic => "SCREW_PARABOLIC",
            Tag::Loxodromic => "LOXODROMIC",
        }
    }

    pub fn is_elliptic(&self) -> bool {
        matches!(
            self,
            Tag::RegularElliptic
                | Tag::ComplexReflection
                | Tag::ComplexReflectionInPoint
                | Tag::SpecialEllipticOther
        )
    }

    pub fn is_parabolic(&self) -> bool {
        matches!(
            self,
            Tag::Unipotent2Step | Tag::Unipotent3Step | Tag::ScrewParabolic
        )
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsometryClass {
    pub tag: Tag,
    pub eigenvalues: [C64; 3],
    /// Rotation angles of an elliptic element, relative to the negative-type eigenvalue.
    pub rotation_angles: Option<[f64; 2]>,
    /// Hyperbolic translation length of a loxodromic element.
    pub translation_length: Option<f64>,
    pub fixed_points: Vec<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicData {
    pub step: Option<u8>,
    /// Argument of the rotational part; zero for unipotent elements.
    pub elliptic_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyInvariant {
    /// Sorted by argument, then modulus.
    pub eigenvalues: [C64; 3],
    pub negative_type_index: Option<usize>,
    pub parabolic_data: Option<ParabolicData>,
}

/// `|z|^4 - 8 Re(z^3) + 18 |z|^2 - 27`.
pub fn goldman_f(z: C64) -> f64 {
    let n2 = z.norm_sqr();
    n2 * n2 - 8.0 * (z * z * z).re + 18.0 * n2 - 27.0
}

const F_BAND: f64 = 1e-7;
const UNIPOTENT_TRACE: f64 = 1e-8;
const TWO_STEP: f64 = 1e-9;
const THREE_STEP: f64 = 1e-6;
const GAP: f64 = 1e-4;
const MODULUS: f64 = 1e-6;

fn nearest_cube_root(z: C64) -> C64 {
    let roots = cube_roots_of_unity();
    *roots
        .iter()
        .min_by(|a, b| (z - **a).norm().total_cmp(&(z - **b).norm()))
        .unwrap_or(&ONE)
}

fn mat_norm(m: &Mat3) -> f64 {
    m.norm()
}

/// Vector of the span of `basis` (Euclidean orthonormal) with smallest
/// normalized form value, and that value.
pub(crate) fn min_form_vector(form: HermitianForm, basis: &[Vec3]) -> (f64, Vec3) {
    match basis.len() {
        0 => (f64::INFINITY, Vec3::zeros()),
        1 => (norm2(form, &basis[0]) / basis[0].norm_squared(), basis[0]),
        _ => {
            let (v1, v2) = (basis[0], basis[1]);
            // Gram matrix V* H V of the first two basis vectors
            let a = norm2(form, &v1);
            let d = norm2(form, &v2);
            let b = inner(form, &v2, &v1);
            let mid = (a + d) / 2.0;
            let rad = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
            let x = gram_null(a, b, d, mid - rad);
            let v = v1 * x[0] + v2 * x[1];
            let n = v.norm();
            if n == 0.0 {
                return (a.min(d), if a <= d { v1 } else { v2 });
            }
            let v = v.unscale(n);
            (norm2(form, &v), v)
        }
    }
}

/// Null vector of `[[a, b], [conj b, d]] - lam I`.
fn gram_null(a: f64, b: C64, d: f64, lam: f64) -> [C64; 2] {
    let r0 = [C64::new(a - lam, 0.0), b];
    let r1 = [b.conj(), C64::new(d - lam, 0.0)];
    let n0 = r0[0].norm() + r0[1].norm();
    let n1 = r1[0].norm() + r1[1].norm();
    let r = if n0 >= n1 { r0 } else { r1 };
    if r[0].norm() + r[1].norm() == 0.0 {
        return [ONE, ZERO];
    }
    [r[1], -r[0]]
}

fn space_closure_point(
    form: HermitianForm,
    space: &EigenSpace,
    tol: &Tolerance,
) -> Option<(Vec3, Location)> {
    let (q, v) = min_form_vector(form, &space.vectors);
    if q < -tol.boundary {
        Some((v, Location::Interior))
    } else if q.abs() <= tol.boundary.max(1e-9) {
        Some((v, Location::Boundary))
    } else {
        None
    }
}

fn unipotent_ratios(n: &Mat3) -> (f64, f64, f64) {
    let e = n - Mat3::identity();
    let ne = mat_norm(&e);
    if ne == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let e2 = e * e;
    let e3 = e2 * e;
    (
        ne,
        mat_norm(&e2) / (ne * ne),
        mat_norm(&e3) / (ne * ne * ne),
    )
}

fn make_class(tag: Tag, a: &HoloIsometry, es: &Eigensystem, tol: &Tolerance) -> IsometryClass {
    let mut fixed_points = Vec::new();
    if tag != Tag::Identity {
        for s in &es.spaces {
            if let Some((v, _)) = space_closure_point(a.form, s, tol) {
                fixed_points.push(v);
            }
        }
    }
    let mut rotation_angles = None;
    let mut translation_length = None;
    if tag.is_elliptic() {
        if let Some((lam, _)) = negative_space(a.form, es, tol) {
            let mut angles: Vec<f64> = es
                .roots
                .iter()
                .map(|r| (r / lam).arg())
                .filter(|x| x.abs() > 1e-12)
                .collect();
            angles.resize(2, 0.0);
            angles.sort_by(|x, y| x.total_cmp(y));
            rotation_angles = Some([angles[0], angles[1]]);
        }
    }
    if tag == Tag::Loxodromic {
        let rmax = es.roots.iter().map(|r| r.norm()).fold(0.0, f64::max);
        translation_length = Some(2.0 * rmax.ln());
    }
    IsometryClass {
        tag,
        eigenvalues: es.roots,
        rotation_angles,
        translation_length,
        fixed_points,
    }
}

fn negative_space(form: HermitianForm, es: &Eigensystem, tol: &Tolerance) -> Option<(C64, Vec3)> {
    es.spaces
        .iter()
        .find_map(|s| match space_closure_point(form, s, tol) {
            Some((v, Location::Interior)) => Some((s.value, v)),
            _ => None,
        })
}

/// Classifies a holomorphic isometry by the trace discriminant and, near its
/// zero set, by the eigenvector structure.
pub fn classify(a: &HoloIsometry, tol: &Tolerance) -> Result<IsometryClass> {
    if !is_finite_mat(&a.lift) {
        return Err(GeomError::NonFinite);
    }
    let tau = a.trace();
    let es = eigensystem(&a.lift)?;

    let w = nearest_cube_root(tau / 3.0);
    if (tau - w * 3.0).norm() <= UNIPOTENT_TRACE {
        let n = a.lift * w.conj();
        let (ne, r2, r3) = unipotent_ratios(&n);
        let scale = mat_norm(&n).max(1.0);
        if ne <= tol.eq * scale {
            return Ok(make_class(Tag::Identity, a, &es, tol));
        }
        if r3 <= THREE_STEP {
            let tag = if r2 <= TWO_STEP {
                Tag::Unipotent2Step
            } else if r2 >= THREE_STEP {
                Tag::Unipotent3Step
            } else {
                return Err(GeomError::ambiguous(
                    Tag::Unipotent2Step.as_str(),
                    Tag::Unipotent3Step.as_str(),
                ));
            };
            return Ok(make_class(tag, a, &es, tol));
        }
        // a small elliptic rotation: fall through to the eigenvector analysis
    }

    let f = goldman_f(tau);
    let band = F_BAND * (1.0 + tau.norm_sqr() * tau.norm_sqr());
    if f < -band {
        return Ok(make_class(Tag::RegularElliptic, a, &es, tol));
    }
    if f > band {
        return Ok(make_class(Tag::Loxodromic, a, &es, tol));
    }

    let repeated: Vec<&EigenSpace> = es.spaces.iter().filter(|s| s.multiplicity > 1).collect();
    if let Some(s) = repeated.first() {
        if s.multiplicity == 3 {
            return Err(GeomError::ambiguous(
                Tag::Identity.as_str(),
                Tag::Unipotent3Step.as_str(),
            ));
        }
        if s.vectors.len() == 2 {
            let (q, _) = min_form_vector(a.form, &s.vectors);
            let tag = if q < -tol.boundary {
                Tag::ComplexReflection
            } else {
                let iso = es.spaces.iter().find(|t| t.multiplicity == 1);
                match iso {
                    Some(t) if norm2(a.form, &t.vectors[0]) < -tol.boundary => {
                        Tag::ComplexReflectionInPoint
                    }
                    _ => Tag::SpecialEllipticOther,
                }
            };
            return Ok(make_class(tag, a, &es, tol));
        }
        return Ok(make_class(Tag::ScrewParabolic, a, &es, tol));
    }

    let mut gap = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            gap = gap.min((es.roots[i] - es.roots[j]).norm());
        }
    }
    if es.spaces.len() == 3 && gap > GAP {
        let off_circle = es.roots.iter().any(|r| (r.norm() - 1.0).abs() > MODULUS);
        let tag = if off_circle {
            Tag::Loxodromic
        } else {
            Tag::RegularElliptic
        };
        return Ok(make_class(tag, a, &es, tol));
    }
    let first = if f <= 0.0 {
        Tag::RegularElliptic
    } else {
        Tag::Loxodromic
    };
    Err(GeomError::ambiguous(
        first.as_str(),
        Tag::ScrewParabolic.as_str(),
    ))
}

/// 2 or 3 according to the minimal polynomial of the unipotent lift.
pub fn unipotent_step(a: &HoloIsometry, tol: &Tolerance) -> Result<u8> {
    let cls = classify(a, tol)?;
    match cls.tag {
        Tag::Unipotent2Step => Ok(2),
        Tag::Unipotent3Step => Ok(3),
        other => Err(GeomError::wrong_class("unipotent", other.as_str())),
    }
}

/// Fixed points in the closure of the plane, with their eigenvalues.
pub fn fixed_points_closure(a: &HoloIsometry, tol: &Tolerance) -> Result<Vec<(Vec3, C64)>> {
    let es = eigensystem(&a.lift)?;
    let w = nearest_cube_root(a.trace() / 3.0);
    if (a.lift - Mat3::identity() * w).norm() <= tol.eq * mat_norm(&a.lift).max(1.0) {
        return Err(GeomError::Precondition(
            "the identity fixes every point".into(),
        ));
    }
    let mut out = Vec::new();
    for s in &es.spaces {
        if let Some((v, _)) = space_closure_point(a.form, s, tol) {
            out.push((v, s.value));
        }
    }
    Ok(out)
}

/// The eigenvalue whose eigenvectors are negative, with its index in
/// `conjugacy_invariant(a).eigenvalues`.
pub fn negative_type_eigenvalue(a: &HoloIsometry, tol: &Tolerance) -> Result<(C64, usize)> {
    let cls = classify(a, tol)?;
    if !(cls.tag.is_elliptic() || cls.tag == Tag::Identity) {
        return Err(GeomError::wrong_class("elliptic", cls.tag.as_str()));
    }
    let inv = conjugacy_invariant(a, tol)?;
    match inv.negative_type_index {
        Some(k) => Ok((inv.eigenvalues[k], k)),
        None => Err(GeomError::Degenerate(
            "no negative eigenvector found".into(),
        )),
    }
}

pub fn conjugacy_invariant(a: &HoloIsometry, tol: &Tolerance) -> Result<ConjugacyInvariant> {
    let es = eigensystem(&a.lift)?;
    let mut eigenvalues = es.roots;
    eigenvalues.sort_by(|x, y| {
        x.arg()
            .total_cmp(&y.arg())
            .then(x.norm().total_cmp(&y.norm()))
    });
    let negative_type_index = negative_space(a.form, &es, tol).map(|(lam, _)| {
        (0..3)
            .min_by(|&i, &j| {
                (eigenvalues[i] - lam)
                    .norm()
                    .total_cmp(&(eigenvalues[j] - lam).norm())
            })
            .unwrap_or(0)
    });
    let parabolic_data = match classify(a, tol) {
        Ok(cls) if cls.tag.is_parabolic() => {
            let step = match cls.tag {
                Tag::Unipotent2Step => Some(2),
                Tag::Unipotent3Step => Some(3),
                _ => None,
            };
            let angle = match es.spaces.iter().find(|s| s.multiplicity == 1) {
                Some(iso) => {
                    let rep = es
                        .spaces
                        .iter()
                        .find(|s| s.multiplicity > 1)
                        .map(|s| s.value);
                    rep.map(|l| (iso.value / l).arg()).unwrap_or(0.0)
                }
                None => 0.0,
            };
            Some(ParabolicData {
                step,
                elliptic_angle: angle,
            })
        }
        _ => None,
    };
    Ok(ConjugacyInvariant {
        eigenvalues,
        negative_type_index,
        parabolic_data,
    })
}

/// `E_(alpha, beta)` in the ball model.
pub fn elliptic_standard(alpha: f64, beta: f64) -> HoloIsometry {
    let e = |x: f64| C64::from_polar(1.0, x);
    HoloIsometry {
        lift: Mat3::from_diagonal(&Vec3::new(
            e((2.0 * alpha - beta) / 3.0),
            e((2.0 * beta - alpha) / 3.0),
            e(-(alpha + beta) / 3.0),
        )),
        form: HermitianForm::BALL,
    }
}

/// Heisenberg translation `T_[z,t]` in the Siegel model.
pub fn heis_translation(z: C64, t: f64) -> HoloIsometry {
    HoloIsometry {
        lift: translation_matrix(z, c(0.0, t)),
        form: HermitianForm::SIEGEL,
    }
}

/// `T_[z,t]` with `it` supplied directly, so exact-arithmetic callers can share the layout.
pub(crate) fn translation_matrix(z: C64, it: C64) -> Mat3 {
    Mat3::new(
        ONE,
        -z.conj(),
        -(C64::new(z.norm_sqr(), 0.0) - it) / 2.0,
        ZERO,
        ONE,
        z,
        ZERO,
        ZERO,
        ONE,
    )
}

/// Heisenberg rotation `R_theta`, SU(2,1) lift.
pub fn heis_rotation(theta: f64) -> HoloIsometry {
    let a = C64::from_polar(1.0, -theta / 3.0);
    let b = C64::from_polar(1.0, 2.0 * theta / 3.0);
    HoloIsometry {
        lift: Mat3::from_diagonal(&Vec3::new(a, b, a)),
        form: HermitianForm::SIEGEL,
    }
}

pub fn dilation(r: f64) -> Result<HoloIsometry> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeomError::Precondition(format!(
            "dilation factor must be positive, got {r}"
        )));
    }
    Ok(HoloIsometry {
        lift: Mat3::from_diagonal(&Vec3::new(c(r, 0.0), ONE, c(1.0 / r, 0.0))),
        form: HermitianForm::SIEGEL,
    })
}

/// `P_(z,t,theta) = T_[z,t] R_theta`. With `u21` set, returns the U(2,1) lift
/// whose corner entries are 1 instead of the SU(2,1) one; the result then only
/// makes sense as a Souriau matrix or a projective map.
pub fn parabolic_standard(z: C64, t: f64, theta: f64, u21: bool) -> Mat3 {
    if u21 {
        let e = C64::from_polar(1.0, theta);
        Mat3::new(
            ONE,
            -z.conj() * e,
            -(C64::new(z.norm_sqr(), -t)) / 2.0,
            ZERO,
            e,
            z,
            ZERO,
            ZERO,
            ONE,
        )
    } else {
        heis_translation(z, t).lift * heis_rotation(theta).lift
    }
}

/// `A = omega B` for some cube root of unity `omega`, within `tol.eq`.
pub fn pu_equal(a: &Mat3, b: &Mat3, tol: &Tolerance) -> bool {
    pu_distance(a, b) <= tol.eq * a.norm().max(b.norm()).max(1.0)
}

/// Smallest entrywise (Frobenius) distance between `a` and `omega b`.
pub fn pu_distance(a: &Mat3, b: &Mat3) -> f64 {
    cube_roots_of_unity()
        .iter()
        .map(|w| (a - b * *w).norm())
        .fold(f64::INFINITY, f64::min)
}

/// `phi o psi`, with lift `M_phi conj(M_psi)`.
pub fn anti_compose(
    phi: &AntiIsometry,
    psi: &AntiIsometry,
    tol: &Tolerance,
) -> Result<HoloIsometry> {
    same_form(phi.form, psi.form)?;
    let m = phi.souriau * psi.souriau.map(|z| z.conj());
    HoloIsometry::new(phi.form, m, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// `A o phi`
    HoloAfter,
    /// `phi o A`
    HoloBefore,
}

pub fn mixed_compose(a: &HoloIsometry, phi: &AntiIsometry, order: Order) -> Result<AntiIsometry> {
    same_form(a.form, phi.form)?;
    let souriau = match order {
        Order::HoloAfter => a.lift * phi.souriau,
        Order::HoloBefore => phi.souriau * a.lift.map(|z| z.conj()),
    };
    Ok(AntiIsometry {
        souriau,
        form: a.form,
    })
}

pub fn anti_apply(phi: &AntiIsometry, p: &Vec3) -> Vec3 {
    phi.souriau * p.map(|z| z.conj())
}

/// An antiholomorphic isometry of the plane is an involution exactly when it
/// is a real reflection, so the test is `M conj(M) = omega I`.
pub fn is_real_reflection(phi: &AntiIsometry, tol: &Tolerance) -> bool {
    let m = phi.souriau;
    let sq = m * m.map(|z| z.conj());
    let det = m.determinant().norm();
    if det == 0.0 || !is_finite_mat(&m) {
        return false;
    }
    let sq = sq.unscale(det.powf(2.0 / 3.0));
    let w = nearest_cube_root(sq.trace() / 3.0);
    (sq - Mat3::identity() * w).norm() <= tol.eq * (1.0 + m.norm_squared())
}

fn conj_inverse(form: HermitianForm, g: &Mat3) -> Mat3 {
    form.inverse(&g.map(|z| z.conj()))
}

fn arg_is_cube_root(z: C64, tol: f64) -> Option<C64> {
    let u = z / z.norm();
    let w = nearest_cube_root(u);
    ((u - w).norm() <= tol).then_some(w)
}

/// An antiholomorphic `phi` with `phi^2 = A` projectively, or `None` for
/// 2-step unipotent input.
pub fn anti_square_root(a: &HoloIsometry, tol: &Tolerance) -> Result<Option<AntiIsometry>> {
    let cls = classify(a, tol)?;
    let phase_tol = tol.angle.max(1e-7);
    match cls.tag {
        Tag::Identity => Ok(Some(AntiIsometry::sigma0(a.form))),
        Tag::Unipotent2Step => Ok(None),
        Tag::ScrewParabolic => Err(GeomError::Precondition(
            "the fixed point of a screw parabolic has a non-real eigenvalue".into(),
        )),
        Tag::Loxodromic => {
            let s = a.to_model(Model::Siegel);
            let es = eigensystem(&s.lift)?;
            let mut big = None;
            let mut small = None;
            for sp in &es.spaces {
                if sp.value.norm() > 1.0 + MODULUS {
                    big = Some((sp.value, sp.vectors[0]));
                } else if sp.value.norm() < 1.0 - MODULUS {
                    small = Some((sp.value, sp.vectors[0]));
                }
            }
            let (Some((lb, pb)), Some((_, ps))) = (big, small) else {
                return Err(GeomError::Degenerate(
                    "loxodromic without two fixed points".into(),
                ));
            };
            let w = arg_is_cube_root(lb, phase_tol).ok_or_else(|| {
                GeomError::Precondition("loxodromic eigenvalues are not positive".into())
            })?;
            let r = (lb * w.conj()).re;
            let g = siegel_frame(&pb, Some(&ps), tol)?;
            let m = Mat3::from_diagonal(&Vec3::new(c(r.sqrt(), 0.0), ONE, c(1.0 / r.sqrt(), 0.0)));
            let souriau = g * m * conj_inverse(HermitianForm::SIEGEL, &g);
            Ok(Some(
                AntiIsometry {
                    souriau,
                    form: HermitianForm::SIEGEL,
                }
                .to_model(a.form.model),
            ))
        }
        Tag::Unipotent3Step => {
            let s = a.to_model(Model::Siegel);
            let w = nearest_cube_root(s.trace() / 3.0);
            let n = s.lift * w.conj();
            let e = n - Mat3::identity();
            let e2 = e * e;
            let col = (0..3)
                .max_by(|&i, &j| e2.column(i).norm().total_cmp(&e2.column(j).norm()))
                .unwrap_or(0);
            let p = e2.column(col).into_owned();
            let g = siegel_frame(&p, None, tol)?;
            let t_std = HermitianForm::SIEGEL.inverse(&g) * n * g;
            let z = t_std[(1, 2)];
            let t = 2.0 * t_std[(0, 2)].im;
            let wv = C64::new(z.norm_sqr(), t) / (z.conj() * 2.0);
            let m = parabolic_standard(wv, 0.0, 2.0 * z.arg(), true);
            let souriau = g * m * conj_inverse(HermitianForm::SIEGEL, &g);
            Ok(Some(
                AntiIsometry {
                    souriau,
                    form: HermitianForm::SIEGEL,
                }
                .to_model(a.form.model),
            ))
        }
        _ => {
            // elliptic
            let b = a.to_model(Model::Ball);
            let es = eigensystem(&b.lift)?;
            let (ln, n) = negative_space(HermitianForm::BALL, &es, tol)
                .ok_or_else(|| GeomError::Degenerate("no negative eigenvector".into()))?;
            let w = arg_is_cube_root(ln, phase_tol).ok_or_else(|| {
                GeomError::Precondition("negative-type eigenvalue is not positive".into())
            })?;
            let lift = b.lift * w.conj();
            let g = ball_frame_at(&n, tol)?;
            let d = HermitianForm::BALL.inverse(&g) * lift * g;
            // d is block diagonal with a unitary 2x2 block; diagonalize it
            let theta = {
                let blk_tr = d[(0, 0)] + d[(1, 1)];
                let blk_det = d[(0, 0)] * d[(1, 1)] - d[(0, 1)] * d[(1, 0)];
                let disc = (blk_tr * blk_tr - blk_det * 4.0).sqrt();
                let l1 = (blk_tr + disc) / 2.0;
                let l2 = (blk_tr - disc) / 2.0;
                (l1, l2)
            };
            let (l1, l2) = theta;
            let blk = nalgebra::Matrix2::new(d[(0, 0)], d[(0, 1)], d[(1, 0)], d[(1, 1)]);
            let u = unitary_eigvecs(&blk, l1, l2);
            let mut frame = Mat3::identity();
            for i in 0..2 {
                for j in 0..2 {
                    frame[(i, j)] = u[(i, j)];
                }
            }
            let g2 = g * frame;
            let half = l1.arg() / 2.0;
            let mut m = Mat3::zeros();
            m[(0, 1)] = C64::from_polar(1.0, half);
            m[(1, 0)] = C64::from_polar(1.0, -half);
            m[(2, 2)] = ONE;
            // the second eigenvalue is conj(l1) since the block has determinant one
            let _ = l2;
            let souriau = g2 * m * conj_inverse(HermitianForm::BALL, &g2);
            Ok(Some(
                AntiIsometry {
                    souriau,
                    form: HermitianForm::BALL,
                }
                .to_model(a.form.model),
            ))
        }
    }
}

/// Orthonormal eigenvectors of a 2x2 unitary matrix as columns, for `l1` then `l2`.
pub(crate) fn unitary_eigvecs(
    blk: &nalgebra::Matrix2<C64>,
    l1: C64,
    l2: C64,
) -> nalgebra::Matrix2<C64> {
    let off = blk[(0, 1)].norm() + blk[(1, 0)].norm();
    if off <= 1e-14 * (1.0 + blk.norm()) || (l1 - l2).norm() <= 1e-12 {
        if (blk[(0, 0)] - l1).norm() <= (blk[(1, 1)] - l1).norm() {
            return nalgebra::Matrix2::identity();
        }
        return nalgebra::Matrix2::new(ZERO, ONE, ONE, ZERO);
    }
    let v = {
        let a = blk[(0, 0)] - l1;
        let b = blk[(0, 1)];
        let cand1 = nalgebra::Vector2::new(b, -a);
        let a2 = blk[(1, 0)];
        let d2 = blk[(1, 1)] - l1;
        let cand2 = nalgebra::Vector2::new(-d2, a2);
        if cand1.norm() >= cand2.norm() {
            cand1
        } else {
            cand2
        }
    };
    let v = v.unscale(v.norm());
    let w = nalgebra::Vector2::new(-v[1].conj(), v[0].conj());
    nalgebra::Matrix2::from_columns(&[v, w])
}

/// Unit-norm negative lift of the isolated fixed point of an elliptic element.
pub fn elliptic_fixed_point(a: &HoloIsometry, tol: &Tolerance) -> Result<Vec3> {
    let es = eigensystem(&a.lift)?;
    negative_space(a.form, &es, tol)
        .map(|(_, v)| unit_lift(a.form, &v))
        .ok_or_else(|| GeomError::wrong_class("elliptic", "no interior fixed point"))
}

/// Conjugacy invariant in the ball model, for callers that pass a raw matrix.
pub fn classify_matrix(form: HermitianForm, m: &Mat3, tol: &Tolerance) -> Result<IsometryClass> {
    classify(&HoloIsometry::new(form, *m, tol)?, tol)
}
