//! Decomposing isometries and pairs of isometries into real reflections.
//!
//! A pair `(A, B)` is decomposable when `A = s1 s2` and `B = s1 s3` for real
//! reflections `s1, s2, s3`. Pairs without a common fixed point are decided
//! through the fixed points of `[A, B]` and the four-cycle they generate.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{GeomError, Result};
use crate::heisenberg::{rcircle_of_reflection, rcircle_reflection, translation_params, HeisPoint};
use crate::hermlin::{
    ball_frame_at, eigensystem, inner, locate, normalize_rep, polar_vector, proj_dist, proj_eq,
    siegel_frame, to_model_vector, unit_lift, HermitianForm, Location, Mat3, Model, Tolerance,
    Vec3, C64, ONE, ZERO,
};
use crate::invariants::{cross_ratio, toledo_once_punctured_torus};
use crate::isometry::{
    anti_apply, anti_compose, classify, fixed_points_closure, is_real_reflection, min_form_vector,
    mixed_compose, pu_distance, unitary_eigvecs, AntiIsometry, HoloIsometry, IsometryClass, Order,
    Tag,
};

/// `|Im l| <= REAL_BAND |l|` counts as real.
const REAL_BAND: f64 = 1e-7;
/// Between the two bands an eigenvalue is neither real nor clearly non-real.
const NONREAL_BAND: f64 = 1e-5;
/// Projective tolerance for fixed and exchanged points.
const POINT_TOL: f64 = 1e-7;
/// Looser point tolerance for the geometric criteria.
const GEOM_TOL: f64 = 1e-6;
const WITNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Decomposable,
    NotDecomposable,
    Ambiguous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Decomposable => "DECOMPOSABLE",
            Verdict::NotDecomposable => "NOT_DECOMPOSABLE",
            Verdict::Ambiguous => "AMBIGUOUS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rationale {
    MainTheorem,
    CommonInteriorFixed,
    CommonBoundaryFixed,
    ComplexReflectionRule,
    TraceObstruction,
    LambdaNegative,
}

impl Rationale {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rationale::MainTheorem => "MAIN_THEOREM",
            Rationale::CommonInteriorFixed => "COMMON_INTERIOR_FIXED",
            Rationale::CommonBoundaryFixed => "COMMON_BOUNDARY_FIXED",
            Rationale::ComplexReflectionRule => "COMPLEX_REFLECTION_RULE",
            Rationale::TraceObstruction => "TRACE_OBSTRUCTION",
            Rationale::LambdaNegative => "LAMBDA_NEGATIVE",
        }
    }
}

/// Reflections with `A = sigma1 sigma2` and `B = sigma1 sigma3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub sigma1: AntiIsometry,
    pub sigma2: AntiIsometry,
    pub sigma3: AntiIsometry,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub rationale: Option<Rationale>,
    /// Why the answer is ambiguous, including the offending eigenvalue.
    pub detail: Option<String>,
}

impl DecompositionResult {
    fn yes(w: Witness, r: Rationale) -> Self {
        DecompositionResult {
            verdict: Verdict::Decomposable,
            witness: Some(w),
            rationale: Some(r),
            detail: None,
        }
    }

    fn no(r: Rationale) -> Self {
        DecompositionResult {
            verdict: Verdict::NotDecomposable,
            witness: None,
            rationale: Some(r),
            detail: None,
        }
    }

    fn ambiguous(r: Option<Rationale>, detail: impl Into<String>) -> Self {
        DecompositionResult {
            verdict: Verdict::Ambiguous,
            witness: None,
            rationale: r,
            detail: Some(detail.into()),
        }
    }
}

/// `p1 -> p2 = B^-1 p1 -> p3 = A^-1 p2 -> p4 = B p3`, closed by `A p4 = lambda1 p1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourCycle {
    pub points: [Vec3; 4],
    pub lambda1: C64,
    /// Some of the four points coincide.
    pub degenerate: bool,
}

impl FourCycle {
    /// `X(p2, p4, p1, p3)`, equal to a positive multiple of `1 / lambda1`.
    pub fn cross_ratio(&self, form: HermitianForm) -> Result<C64> {
        let [p1, p2, p3, p4] = &self.points;
        cross_ratio(form, p2, p4, p1, p3)
    }
}

fn same_form(a: HermitianForm, b: HermitianForm) -> Result<()> {
    if a != b {
        return Err(GeomError::MixedForms);
    }
    Ok(())
}

pub fn commutator(a: &HoloIsometry, b: &HoloIsometry) -> Result<HoloIsometry> {
    same_form(a.form, b.form)?;
    let lift = a.lift * b.lift * a.inverse().lift * b.inverse().lift;
    Ok(HoloIsometry { lift, form: a.form })
}

pub fn four_cycle(
    a: &HoloIsometry,
    b: &HoloIsometry,
    fixed: &Vec3,
    lambda: C64,
    tol: &Tolerance,
) -> Result<FourCycle> {
    same_form(a.form, b.form)?;
    let c = commutator(a, b)?;
    let p1 = *fixed;
    if proj_dist(&c.apply(&p1), &p1) > POINT_TOL {
        return Err(GeomError::Precondition(
            "point is not fixed by the commutator".into(),
        ));
    }
    let p2 = b.inverse().apply(&p1);
    let p3 = a.inverse().apply(&p2);
    let p4 = b.apply(&p3);
    let close = a.apply(&p4) - p1 * lambda;
    if close.norm() > tol.eq.max(1e-9) * 1e2 * lambda.norm().max(1.0) * p1.norm() {
        return Err(GeomError::Precondition(
            "eigenvalue does not match the fixed point".into(),
        ));
    }
    let pts = [p1, p2, p3, p4];
    let mut degenerate = false;
    for i in 0..4 {
        for j in (i + 1)..4 {
            degenerate |= proj_eq(&pts[i], &pts[j], POINT_TOL);
        }
    }
    Ok(FourCycle {
        points: pts,
        lambda1: lambda,
        degenerate,
    })
}

fn verified_swap(
    form: HermitianForm,
    m: &Mat3,
    pairs: &[(&Vec3, &Vec3)],
    tol: &Tolerance,
) -> Option<AntiIsometry> {
    let phi = AntiIsometry::new(form, *m, tol).ok()?;
    if !is_real_reflection(&phi, tol) {
        return None;
    }
    for (x, y) in pairs {
        if !proj_eq(&anti_apply(&phi, x), y, POINT_TOL)
            || !proj_eq(&anti_apply(&phi, y), x, POINT_TOL)
        {
            return None;
        }
    }
    Some(phi)
}

fn positive_real(x: C64) -> Option<f64> {
    (x.im.abs() <= REAL_BAND * x.norm() && x.re > 0.0).then_some(x.re)
}

/// A real reflection with `p1 <-> p3` and `p2 <-> p4`. `Ok(None)` means no
/// such reflection exists; a singular configuration is an error.
pub fn construct_swapping_reflection(
    form: HermitianForm,
    p: [&Vec3; 4],
    tol: &Tolerance,
) -> Result<Option<AntiIsometry>> {
    let locs = p
        .iter()
        .map(|q| locate(form, q, tol))
        .collect::<Result<Vec<_>>>()?;
    let interior = match locs[0] {
        Location::Interior => true,
        Location::Boundary => false,
        Location::Exterior => {
            return Err(GeomError::Precondition(
                "points must lie in the closure".into(),
            ))
        }
    };
    if locs.iter().any(|l| *l != locs[0]) {
        return Err(GeomError::Precondition("mixed point locations".into()));
    }
    let lift = |v: &Vec3| {
        if interior {
            unit_lift(form, v)
        } else {
            normalize_rep(v)
        }
    };
    let [p1, p2, p3, p4] = [lift(p[0]), lift(p[1]), lift(p[2]), lift(p[3])];
    if proj_eq(&p1, &p3, POINT_TOL) && proj_eq(&p2, &p4, POINT_TOL) {
        return Err(GeomError::Degenerate("both swap pairs coincide".into()));
    }
    let pairs = [(&p1, &p3), (&p2, &p4)];
    let ip = |x: &Vec3, y: &Vec3| inner(form, x, y);
    let src = Mat3::from_columns(&[p1, p3, p2]);
    if src.determinant().norm() > 1e-9 {
        let den = ip(&p4, &p3) * ip(&p3, &p2);
        if den.norm() <= 1e-13 {
            return Err(GeomError::Degenerate(
                "vanishing pairing in the swap system".into(),
            ));
        }
        let rho = ip(&p1, &p2) * ip(&p4, &p1) / den;
        let Some(r) = positive_real(rho) else {
            return Ok(None);
        };
        let a = r.sqrt();
        let a3 = ip(&p1, &p2) / (ip(&p4, &p3) * a);
        let tgt = Mat3::from_columns(&[p3 * C64::new(a, 0.0), p1 / C64::new(a, 0.0), p4 * a3]);
        let Some(inv) = src.map(|z| z.conj()).try_inverse() else {
            return Err(GeomError::Degenerate("singular swap system".into()));
        };
        return Ok(verified_swap(form, &(tgt * inv), &pairs, tol));
    }
    // all four points on one complex line
    if proj_eq(&p1, &p3, POINT_TOL) {
        return Err(GeomError::Degenerate(
            "rank collapse in the swap system".into(),
        ));
    }
    let n = polar_vector(form, &p1, &p3, tol)?;
    let basis = nalgebra::Matrix3x2::from_columns(&[p1, p3]);
    let coords = |v: &Vec3| -> Option<(C64, C64)> {
        let g = basis.adjoint() * basis;
        let x = g.try_inverse()? * (basis.adjoint() * v);
        ((basis * x - v).norm() <= 1e-8 * v.norm()).then_some((x[0], x[1]))
    };
    let (Some((x, y)), Some((u, v))) = (coords(&p2), coords(&p4)) else {
        return Err(GeomError::Degenerate(
            "rank collapse in the swap system".into(),
        ));
    };
    let den = x.conj() * u;
    if den.norm() <= 1e-13 || v.norm() <= 1e-13 || y.norm() <= 1e-13 {
        return Err(GeomError::Degenerate(
            "swap pair meets the other pair".into(),
        ));
    }
    let Some(r) = positive_real(y.conj() * v / den) else {
        return Ok(None);
    };
    let a = r.sqrt();
    let src = Mat3::from_columns(&[p1, p3, n]);
    let tgt = Mat3::from_columns(&[p3 * C64::new(a, 0.0), p1 / C64::new(a, 0.0), n]);
    let Some(inv) = src.map(|z| z.conj()).try_inverse() else {
        return Err(GeomError::Degenerate("singular swap system".into()));
    };
    Ok(verified_swap(form, &(tgt * inv), &pairs, tol))
}

fn require_reflection(sigma: &AntiIsometry, tol: &Tolerance) -> Result<()> {
    if !is_real_reflection(sigma, tol) {
        return Err(GeomError::Precondition("not a real reflection".into()));
    }
    Ok(())
}

/// `sigma o A`, rescaled to unit determinant.
fn then_reflect(sigma: &AntiIsometry, a: &HoloIsometry, tol: &Tolerance) -> Result<AntiIsometry> {
    let m = mixed_compose(a, sigma, Order::HoloBefore)?;
    AntiIsometry::new(m.form, m.souriau, tol)
}

/// Whether `A = sigma tau` for a real reflection `tau`.
pub fn reflection_decomposes(
    sigma: &AntiIsometry,
    a: &HoloIsometry,
    tol: &Tolerance,
) -> Result<bool> {
    same_form(sigma.form, a.form)?;
    require_reflection(sigma, tol)?;
    Ok(is_real_reflection(&then_reflect(sigma, a, tol)?, tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Every reflection decomposes the identity.
    Identity,
    /// The reflection preserves the mirror of a complex reflection.
    MirrorPreserved,
    /// The reflection fixes the center of a complex reflection in a point.
    CenterFixed,
    /// The reflection fixes the center and preserves both stable lines.
    StableFrame,
    /// The reflection exchanges the endpoints of the axis.
    SwapsEndpoints,
    /// The reflection fixes the fixed point and preserves the stable line.
    StableLine,
    /// The reflection fixes the fixed point and acts on the fan boundary as a half-turn.
    FanHalfTurn,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::Identity => "identity",
            Criterion::MirrorPreserved => "mirror-preserved",
            Criterion::CenterFixed => "center-fixed",
            Criterion::StableFrame => "stable-frame",
            Criterion::SwapsEndpoints => "swaps-endpoints",
            Criterion::StableLine => "stable-line",
            Criterion::FanHalfTurn => "fan-half-turn",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeometricVerdict {
    pub decomposes: bool,
    pub criterion: Criterion,
}

fn fixes(sigma: &AntiIsometry, v: &Vec3) -> bool {
    proj_dist(&anti_apply(sigma, v), v) <= GEOM_TOL
}

fn isolated(spaces: &[crate::hermlin::EigenSpace]) -> Option<Vec3> {
    spaces
        .iter()
        .find(|s| s.multiplicity == 1)
        .map(|s| s.vectors[0])
}

/// The class-specific geometric test for `sigma` decomposing `A`.
pub fn geometric_decomposes(
    sigma: &AntiIsometry,
    a: &HoloIsometry,
    tol: &Tolerance,
) -> Result<GeometricVerdict> {
    same_form(sigma.form, a.form)?;
    require_reflection(sigma, tol)?;
    let cls = classify(a, tol)?;
    let es = eigensystem(&a.lift)?;
    let verdict = |decomposes, criterion| GeometricVerdict {
        decomposes,
        criterion,
    };
    let missing = || GeomError::Degenerate("missing eigenvector".into());
    Ok(match cls.tag {
        Tag::Identity => verdict(true, Criterion::Identity),
        Tag::ComplexReflection => {
            let n = isolated(&es.spaces).ok_or_else(missing)?;
            verdict(fixes(sigma, &n), Criterion::MirrorPreserved)
        }
        Tag::ComplexReflectionInPoint => {
            let p = isolated(&es.spaces).ok_or_else(missing)?;
            verdict(fixes(sigma, &p), Criterion::CenterFixed)
        }
        Tag::RegularElliptic => {
            let ok = es.spaces.iter().all(|s| fixes(sigma, &s.vectors[0]));
            verdict(ok, Criterion::StableFrame)
        }
        Tag::Loxodromic => {
            let mut sp: Vec<&crate::hermlin::EigenSpace> = es.spaces.iter().collect();
            sp.sort_by(|x, y| x.value.norm().total_cmp(&y.value.norm()));
            let (lo, hi) = (sp[0].vectors[0], sp[sp.len() - 1].vectors[0]);
            let ok = proj_dist(&anti_apply(sigma, &lo), &hi) <= GEOM_TOL;
            verdict(ok, Criterion::SwapsEndpoints)
        }
        Tag::Unipotent2Step => {
            // vertical translations are central in the stabilizer of their fixed
            // point, so every stable complex line condition holds once p is fixed
            let p = two_step_fixed_point(a).ok_or_else(missing)?;
            verdict(fixes(sigma, &p), Criterion::StableLine)
        }
        Tag::ScrewParabolic => {
            let p = cls.fixed_points.first().ok_or_else(missing)?;
            let n = isolated(&es.spaces).ok_or_else(missing)?;
            verdict(fixes(sigma, p) && fixes(sigma, &n), Criterion::StableLine)
        }
        Tag::Unipotent3Step => verdict(fan_half_turn(sigma, a, &cls, tol)?, Criterion::FanHalfTurn),
        Tag::SpecialEllipticOther => {
            return Err(GeomError::Unsupported(
                "special elliptic with a non-standard eigenvector pattern".into(),
            ))
        }
    })
}

/// For a 2-step unipotent `N`, `N - 1` has rank one with null image: the fixed point.
fn two_step_fixed_point(a: &HoloIsometry) -> Option<Vec3> {
    let tr = a.trace() / 3.0;
    let w = crate::hermlin::cube_roots_of_unity()
        .into_iter()
        .min_by(|x, y| (tr - x).norm().total_cmp(&(tr - y).norm()))?;
    let n = a.lift * w.conj() - Mat3::identity();
    let col = (0..3).max_by(|&i, &j| n.column(i).norm().total_cmp(&n.column(j).norm()))?;
    let v: Vec3 = n.column(col).into();
    (v.norm() > 0.0).then_some(v)
}

fn fan_half_turn(
    sigma: &AntiIsometry,
    a: &HoloIsometry,
    cls: &IsometryClass,
    tol: &Tolerance,
) -> Result<bool> {
    let p = cls
        .fixed_points
        .first()
        .ok_or_else(|| GeomError::Degenerate("no fixed point".into()))?;
    if !fixes(sigma, p) {
        return Ok(false);
    }
    let ps = to_model_vector(p, a.form.model, Model::Siegel);
    let g = siegel_frame(&ps, None, tol)?;
    let ginv = HermitianForm::SIEGEL.inverse(&g);
    let a_std = ginv * a.to_model(Model::Siegel).lift * g;
    let s_std = AntiIsometry {
        souriau: ginv * sigma.to_model(Model::Siegel).souriau * g.map(|z| z.conj()),
        form: HermitianForm::SIEGEL,
    };
    let line = rcircle_of_reflection(&s_std)?;
    let (z, _) = translation_params(&a_std);
    let w = z / z.norm();
    let d = line.direction / line.direction.norm();
    Ok((d * w.conj()).re.abs() <= GEOM_TOL)
}

/// Largest projective error of `sigma1 sigma2 = A` and `sigma1 sigma3 = B`.
pub fn witness_error(
    a: &HoloIsometry,
    b: &HoloIsometry,
    w: &Witness,
    tol: &Tolerance,
) -> Result<f64> {
    let ab = anti_compose(&w.sigma1, &w.sigma2, tol)?;
    let bb = anti_compose(&w.sigma1, &w.sigma3, tol)?;
    let ea = pu_distance(&ab.lift, &a.lift) / a.lift.norm();
    let eb = pu_distance(&bb.lift, &b.lift) / b.lift.norm();
    Ok(ea.max(eb))
}

fn assemble(
    phi: &AntiIsometry,
    a: &HoloIsometry,
    b: &HoloIsometry,
    tol: &Tolerance,
) -> Option<Witness> {
    let phi = AntiIsometry::new(a.form, phi.to_model(a.form.model).souriau, tol).ok()?;
    let w = Witness {
        sigma2: then_reflect(&phi, a, tol).ok()?,
        sigma3: then_reflect(&phi, b, tol).ok()?,
        sigma1: phi,
    };
    let all = [&w.sigma1, &w.sigma2, &w.sigma3];
    if !all.iter().all(|s| is_real_reflection(s, tol)) {
        return None;
    }
    (witness_error(a, b, &w, tol).ok()? <= WITNESS_TOL).then_some(w)
}

/// Basis of the intersection of two subspaces of `C^3`.
fn intersect(u: &[Vec3], v: &[Vec3]) -> Vec<Vec3> {
    let n = u.len() + v.len();
    // square, so that the thin decomposition keeps every null direction
    let mut m = DMatrix::<C64>::zeros(n.max(3), n);
    for (k, x) in u.iter().chain(v.iter()).enumerate() {
        let sign = if k < u.len() { ONE } else { -ONE };
        for i in 0..3 {
            m[(i, k)] = x[i] * sign;
        }
    }
    let svd = m.svd(false, true);
    let Some(vt) = svd.v_t else {
        return Vec::new();
    };
    let smax = svd.singular_values.max().max(1e-300);
    let mut out = Vec::new();
    for k in 0..vt.nrows() {
        let s = if k < svd.singular_values.len() {
            svd.singular_values[k]
        } else {
            0.0
        };
        if s > 1e-7 * smax {
            continue;
        }
        let coef = vt.row(k).adjoint();
        let mut x = Vec3::zeros();
        for (i, b) in u.iter().enumerate() {
            x += b * coef[i];
        }
        if x.norm() > 1e-9 {
            out.push(x.unscale(x.norm()));
        }
    }
    // orthonormalize; a rank-deficient input can repeat directions
    let mut basis: Vec<Vec3> = Vec::new();
    for x in out {
        let mut y = x;
        for b in &basis {
            y -= b * b.dotc(&y);
        }
        if y.norm() > 1e-6 {
            basis.push(y.unscale(y.norm()));
        }
    }
    basis
}

/// A common fixed point of `A` and `B` in the closure of the plane, interior
/// points first.
pub fn common_fixed_point(
    a: &HoloIsometry,
    b: &HoloIsometry,
    tol: &Tolerance,
) -> Result<Option<(Vec3, Location)>> {
    same_form(a.form, b.form)?;
    let ea = eigensystem(&a.lift)?;
    let eb = eigensystem(&b.lift)?;
    let mut best: Option<(Vec3, Location)> = None;
    for sa in &ea.spaces {
        for sb in &eb.spaces {
            let basis = intersect(&sa.vectors, &sb.vectors);
            if basis.is_empty() {
                continue;
            }
            let (q, v) = min_form_vector(a.form, &basis);
            if q < -tol.boundary {
                return Ok(Some((v, Location::Interior)));
            }
            if q.abs() <= tol.boundary.max(1e-9) && best.is_none() {
                best = Some((v, Location::Boundary));
            }
        }
    }
    Ok(best)
}

fn is_identity(cls: &IsometryClass) -> bool {
    cls.tag == Tag::Identity
}

/// Reflection through an interior point decomposing two isometries fixing it.
fn interior_reflection(
    a: &HoloIsometry,
    b: &HoloIsometry,
    p: &Vec3,
    tol: &Tolerance,
) -> Result<AntiIsometry> {
    let pb = to_model_vector(p, a.form.model, Model::Ball);
    let g = ball_frame_at(&pb, tol)?;
    let ginv = HermitianForm::BALL.inverse(&g);
    let block = |h: &HoloIsometry| -> (Matrix2<C64>, bool) {
        let m = ginv * h.to_model(Model::Ball).lift * g;
        let m = m / m[(2, 2)];
        let blk = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
        let tr = blk.trace();
        let det = blk.determinant();
        let disc = (tr * tr - det * 4.0).sqrt();
        let (l1, l2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
        let scalar = (blk - Matrix2::identity() * (tr / 2.0)).norm() <= 1e-9;
        (unitary_eigvecs(&blk, l1, l2), scalar)
    };
    let (wa, sa) = block(a);
    let (wb, sb) = block(b);
    let w = match (sa, sb) {
        (false, false) => {
            let beta = wa.adjoint() * wb.column(0);
            let th = if beta[0].norm() > 1e-12 && beta[1].norm() > 1e-12 {
                beta[0].arg() - beta[1].arg()
            } else {
                0.0
            };
            wa * Matrix2::from_diagonal(&nalgebra::Vector2::new(C64::from_polar(1.0, th), ONE))
        }
        (false, true) => wa,
        (true, false) => wb,
        (true, true) => Matrix2::identity(),
    };
    let s2 = w * w.transpose();
    let mut s3 = Mat3::zeros();
    for i in 0..2 {
        for j in 0..2 {
            s3[(i, j)] = s2[(i, j)];
        }
    }
    s3[(2, 2)] = ONE;
    let souriau = g * s3 * ginv.map(|z| z.conj());
    AntiIsometry::new(
        a.form,
        AntiIsometry {
            souriau,
            form: HermitianForm::BALL,
        }
        .to_model(a.form.model)
        .souriau,
        tol,
    )
}

/// Conjugates into the Siegel model with `p` moved to `q_inf`, normalized by the
/// bottom-right entry.
fn at_infinity(h: &HoloIsometry, g: &Mat3, ginv: &Mat3) -> Mat3 {
    let m = ginv * h.to_model(Model::Siegel).lift * g;
    m / m[(2, 2)]
}

fn commute(a: &HoloIsometry, b: &HoloIsometry, tol: &Tolerance) -> bool {
    let ab = a.lift * b.lift;
    let ba = b.lift * a.lift;
    pu_distance(&ab, &ba) <= tol.eq.max(1e-9) * 10.0 * ab.norm().max(1.0)
}

enum LineConstraint {
    Free,
    Through(C64),
    Perpendicular(C64),
}

fn line_constraint(tag: Tag, m: &Mat3) -> LineConstraint {
    match tag {
        Tag::Identity | Tag::Unipotent2Step => LineConstraint::Free,
        Tag::Unipotent3Step => {
            let (z, _) = translation_params(m);
            LineConstraint::Perpendicular(z / z.norm())
        }
        _ => LineConstraint::Through(m[(1, 2)] / (ONE - m[(1, 1)])),
    }
}

fn boundary_case(
    a: &HoloIsometry,
    b: &HoloIsometry,
    ca: &IsometryClass,
    cb: &IsometryClass,
    p: &Vec3,
    tol: &Tolerance,
) -> Result<DecompositionResult> {
    let r = Rationale::CommonBoundaryFixed;
    let form = a.form;
    let back = |s: Mat3, g: &Mat3, ginv: &Mat3| -> AntiIsometry {
        AntiIsometry {
            souriau: g * s * ginv.map(|z| z.conj()),
            form: HermitianForm::SIEGEL,
        }
        .to_model(form.model)
    };
    let finish = |phi: AntiIsometry| match assemble(&phi, a, b, tol) {
        Some(w) => DecompositionResult::yes(w, r),
        None => DecompositionResult::ambiguous(Some(r), "witness failed verification"),
    };
    if ca.tag == Tag::Loxodromic || cb.tag == Tag::Loxodromic {
        if !commute(a, b, tol) {
            return Ok(DecompositionResult::no(r));
        }
        let (x, cx) = if ca.tag == Tag::Loxodromic {
            (a, ca)
        } else {
            (b, cb)
        };
        if cx.fixed_points.len() < 2 {
            return Err(GeomError::Degenerate(
                "loxodromic without two fixed points".into(),
            ));
        }
        let u = to_model_vector(&cx.fixed_points[0], x.form.model, Model::Siegel);
        let v = to_model_vector(&cx.fixed_points[1], x.form.model, Model::Siegel);
        let g = siegel_frame(&u, Some(&v), tol)?;
        let ginv = HermitianForm::SIEGEL.inverse(&g);
        let j = Mat3::new(ZERO, ZERO, ONE, ZERO, ONE, ZERO, ONE, ZERO, ZERO);
        return Ok(finish(back(j, &g, &ginv)));
    }
    let ps = to_model_vector(p, form.model, Model::Siegel);
    let g = siegel_frame(&ps, None, tol)?;
    let ginv = HermitianForm::SIEGEL.inverse(&g);
    let ma = at_infinity(a, &g, &ginv);
    let mb = at_infinity(b, &g, &ginv);
    use LineConstraint::*;
    let (base, dir) = match (line_constraint(ca.tag, &ma), line_constraint(cb.tag, &mb)) {
        (Perpendicular(w1), Perpendicular(w2)) => {
            if !commute(a, b, tol) {
                return Ok(DecompositionResult::no(r));
            }
            let _ = w2;
            (ZERO, w1 * C64::i())
        }
        (Through(z1), Through(z2)) => {
            let d = z2 - z1;
            if d.norm() <= 1e-9 * (1.0 + z1.norm()) {
                (z1, ONE)
            } else {
                (z1, d)
            }
        }
        (Through(z), Perpendicular(w)) | (Perpendicular(w), Through(z)) => (z, w * C64::i()),
        (Through(z), Free) | (Free, Through(z)) => (z, ONE),
        (Perpendicular(w), Free) | (Free, Perpendicular(w)) => (ZERO, w * C64::i()),
        (Free, Free) => (ZERO, ONE),
    };
    let s = rcircle_reflection(HeisPoint::new(base, 0.0), dir)?;
    Ok(finish(back(s.souriau, &g, &ginv)))
}

/// Reflection fixing the geodesic between two boundary points.
fn half_turn_reflection(
    form: HermitianForm,
    p: &Vec3,
    q: &Vec3,
    tol: &Tolerance,
) -> Result<AntiIsometry> {
    let ps = to_model_vector(p, form.model, Model::Siegel);
    let qs = to_model_vector(q, form.model, Model::Siegel);
    let g = siegel_frame(&ps, Some(&qs), tol)?;
    let ginv = HermitianForm::SIEGEL.inverse(&g);
    Ok(AntiIsometry {
        souriau: g * ginv.map(|z| z.conj()),
        form: HermitianForm::SIEGEL,
    }
    .to_model(form.model))
}

/// Reflections `phi` with `phi A phi = A^-1` and `phi B phi = B^-1`, from the
/// null space of the linear conditions on a Souriau lift.
fn anti_centralizer_reflection(
    a: &HoloIsometry,
    b: &HoloIsometry,
    tol: &Tolerance,
) -> Option<Witness> {
    let ainv = a.inverse().lift;
    let binv = b.inverse().lift;
    let abar = a.lift.map(|z| z.conj());
    let bbar = b.lift.map(|z| z.conj());
    for mu in crate::hermlin::cube_roots_of_unity() {
        for nu in crate::hermlin::cube_roots_of_unity() {
            let mut k = DMatrix::<C64>::zeros(18, 9);
            for (blk, (x, y, s)) in [(abar, ainv, mu), (bbar, binv, nu)].into_iter().enumerate() {
                // M x - s y M, with M stored column-major
                for i in 0..3 {
                    for j in 0..3 {
                        let row = 9 * blk + i + 3 * j;
                        for kk in 0..3 {
                            k[(row, i + 3 * kk)] += x[(kk, j)];
                            k[(row, kk + 3 * j)] -= s * y[(i, kk)];
                        }
                    }
                }
            }
            let svd = k.svd(false, true);
            let Some(vt) = svd.v_t else { continue };
            let smax = svd.singular_values.max().max(1e-300);
            let null: Vec<Mat3> = (0..9)
                .filter(|&r| svd.singular_values[r] <= 1e-8 * smax)
                .map(|r| {
                    let v = vt.row(r).adjoint();
                    Mat3::from_fn(|i, j| v[i + 3 * j])
                })
                .collect();
            let mut cands = null.clone();
            if null.len() == 2 {
                for ph in [ONE, C64::i(), -ONE, -C64::i()] {
                    cands.push(null[0] + null[1] * ph);
                }
            }
            for m in cands {
                let Ok(phi) = AntiIsometry::new(a.form, m, tol) else {
                    continue;
                };
                if let Some(w) = assemble(&phi, a, b, tol) {
                    return Some(w);
                }
            }
        }
    }
    None
}

enum EigenSign {
    Positive,
    Negative,
    NonReal,
    Borderline,
}

fn eigen_sign(l: C64) -> EigenSign {
    let rel = l.im.abs() / l.norm();
    if rel <= REAL_BAND {
        if l.re > 0.0 {
            EigenSign::Positive
        } else {
            EigenSign::Negative
        }
    } else if rel <= NONREAL_BAND {
        EigenSign::Borderline
    } else {
        EigenSign::NonReal
    }
}

fn is_complex_reflection(tag: Tag) -> bool {
    matches!(tag, Tag::ComplexReflection | Tag::ComplexReflectionInPoint)
}

/// Decides whether `(A, B)` is decomposable and builds witnessing reflections.
pub fn decomposability(
    a: &HoloIsometry,
    b: &HoloIsometry,
    tol: &Tolerance,
) -> Result<DecompositionResult> {
    same_form(a.form, b.form)?;
    let classes = classify(a, tol).and_then(|ca| Ok((ca, classify(b, tol)?)));
    let (ca, cb) = match classes {
        Ok(x) => x,
        Err(GeomError::Ambiguous { first, second }) => {
            return Ok(DecompositionResult::ambiguous(
                None,
                format!("classification between {first} and {second}"),
            ))
        }
        Err(e) => return Err(e),
    };

    if let Some((p, loc)) = common_fixed_point(a, b, tol)? {
        if loc == Location::Interior {
            let r = Rationale::CommonInteriorFixed;
            let phi = interior_reflection(a, b, &p, tol)?;
            return Ok(match assemble(&phi, a, b, tol) {
                Some(w) => DecompositionResult::yes(w, r),
                None => DecompositionResult::ambiguous(Some(r), "witness failed verification"),
            });
        }
        return boundary_case(a, b, &ca, &cb, &p, tol);
    }
    if is_identity(&ca) || is_identity(&cb) {
        return Ok(DecompositionResult::ambiguous(
            None,
            "no fixed point found for a pair with the identity",
        ));
    }

    let c = commutator(a, b)?;
    let tr = c.trace();
    if tr.im.abs() > NONREAL_BAND * (1.0 + tr.norm()) {
        return Ok(DecompositionResult::no(Rationale::TraceObstruction));
    }
    let rule = if is_complex_reflection(ca.tag) || is_complex_reflection(cb.tag) {
        Rationale::ComplexReflectionRule
    } else {
        Rationale::MainTheorem
    };
    let fps = match fixed_points_closure(&c, tol) {
        Ok(f) => f,
        Err(GeomError::Precondition(_)) => {
            return Ok(DecompositionResult::ambiguous(
                Some(rule),
                "commuting pair without a detected common fixed point",
            ))
        }
        Err(GeomError::Ambiguous { first, second }) => {
            return Ok(DecompositionResult::ambiguous(
                Some(rule),
                format!("commutator between {first} and {second}"),
            ))
        }
        Err(e) => return Err(e),
    };
    let mut positive = Vec::new();
    let mut negative = false;
    let mut borderline = None;
    for (v, l) in &fps {
        match eigen_sign(*l) {
            EigenSign::Positive => positive.push((*v, *l)),
            EigenSign::Negative => negative = true,
            EigenSign::Borderline => borderline = Some(*l),
            EigenSign::NonReal => {}
        }
    }
    if positive.is_empty() {
        if let Some(l) = borderline {
            return Ok(DecompositionResult::ambiguous(
                Some(rule),
                format!("commutator eigenvalue {l} is nearly real"),
            ));
        }
        return Ok(DecompositionResult::no(if negative {
            Rationale::LambdaNegative
        } else {
            Rationale::TraceObstruction
        }));
    }
    for (v, l) in &positive {
        let Ok(cyc) = four_cycle(a, b, v, *l, tol) else {
            continue;
        };
        let [p1, p2, p3, p4] = &cyc.points;
        let phi = if proj_eq(p1, p3, POINT_TOL) && proj_eq(p2, p4, POINT_TOL) {
            half_turn_reflection(a.form, p1, p2, tol).ok()
        } else {
            construct_swapping_reflection(a.form, [p1, p2, p3, p4], tol)
                .ok()
                .flatten()
        };
        if let Some(w) = phi.and_then(|phi| assemble(&phi, a, b, tol)) {
            return Ok(DecompositionResult::yes(w, rule));
        }
    }
    if let Some(w) = anti_centralizer_reflection(a, b, tol) {
        return Ok(DecompositionResult::yes(w, rule));
    }
    Ok(DecompositionResult::ambiguous(
        Some(rule),
        format!(
            "positive eigenvalue {} but no verified witness",
            positive[0].1
        ),
    ))
}

/// Data for a pair whose commutator has a negative real eigenvalue at a fixed point.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalReport {
    pub fixed_point: Vec3,
    pub location: Location,
    pub lambda1: C64,
    /// Polar vector of the common stable complex line.
    pub polar: Vec3,
    /// The polar vector is an eigenvector of both lifts.
    pub line_stable: bool,
    pub a_loxodromic: bool,
    pub b_loxodromic: bool,
    pub toledo: f64,
}

pub fn maximal_rep_analysis(
    a: &HoloIsometry,
    b: &HoloIsometry,
    tol: &Tolerance,
) -> Result<Option<MaximalReport>> {
    let c = commutator(a, b)?;
    let fps = match fixed_points_closure(&c, tol) {
        Ok(f) => f,
        Err(_) => return Ok(None),
    };
    let Some((v, l)) = fps
        .into_iter()
        .find(|(_, l)| matches!(eigen_sign(*l), EigenSign::Negative))
    else {
        return Ok(None);
    };
    let cyc = four_cycle(a, b, &v, l, tol)?;
    let [p1, p2, p3, p4] = &cyc.points;
    let location = locate(a.form, p1, tol)?;
    let polar = polar_vector(a.form, p1, p3, tol)?;
    let eig = |h: &HoloIsometry| proj_dist(&h.apply(&polar), &polar) <= POINT_TOL;
    let toledo = toledo_once_punctured_torus(a.form, [p1, p2, p3, p4], tol)?;
    Ok(Some(MaximalReport {
        fixed_point: v,
        location,
        lambda1: l,
        polar,
        line_stable: eig(a) && eig(b),
        a_loxodromic: classify(a, tol)?.tag == Tag::Loxodromic,
        b_loxodromic: classify(b, tol)?.tag == Tag::Loxodromic,
        toledo,
    }))
}
