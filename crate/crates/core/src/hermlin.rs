//! Hermitian linear algebra on C^{2,1}.
//!
//! Two forms are built in: the ball form `diag(1, 1, -1)` and the Siegel form
//! with ones on the antidiagonal. The inner product is `<X, Y> = Y* H X`, linear
//! in the first slot.
//!
//! The model change uses the real matrix
//!
//! ```text
//!     C = [ 1/2  0  -1/2 ]
//!         [  0   1    0  ]
//!         [  1   0    1  ]
//! ```
//!
//! which satisfies `C* H_siegel C = H_ball` and `det C = 1`. It sends the ball
//! center to the Siegel point with horospherical coordinates `(0, 0, 1)`, the
//! ball boundary point `(-1, 0)` to `q_inf` and `(1, 0)` to the Heisenberg
//! origin. Since `C` is real, Souriau lifts transform exactly like matrices.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub type C64 = Complex64;
pub type Mat3 = Matrix3<C64>;
pub type Vec3 = Vector3<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ball,
    Siegel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermitianForm {
    pub model: Model,
}

impl HermitianForm {
    pub const BALL: HermitianForm = HermitianForm { model: Model::Ball };
    pub const SIEGEL: HermitianForm = HermitianForm {
        model: Model::Siegel,
    };

    pub fn new(model: Model) -> Self {
        HermitianForm { model }
    }

    pub fn matrix(&self) -> Mat3 {
        let r = |x: f64| C64::new(x, 0.0);
        match self.model {
            Model::Ball => Mat3::from_diagonal(&Vec3::new(ONE, ONE, r(-1.0))),
            Model::Siegel => Mat3::new(
                ZERO, ZERO, ONE, //
                ZERO, ONE, ZERO, //
                ONE, ZERO, ZERO,
            ),
        }
    }

    /// Inverse of `g` for `g` preserving this form up to a unimodular scalar.
    pub fn inverse(&self, g: &Mat3) -> Mat3 {
        let h = self.matrix();
        let det = g.determinant();
        let scale = det.norm().powf(2.0 / 3.0);
        h * g.adjoint() * h / C64::new(scale, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub eq: f64,
    pub boundary: f64,
    pub angle: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eq: 1e-9,
            boundary: 1e-8,
            angle: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(eq: f64, boundary: f64, angle: f64) -> Result<Self> {
        for (name, v) in [("eq", eq), ("boundary", boundary), ("angle", angle)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(GeomError::Precondition(format!(
                    "tolerance {name} must be positive, got {v}"
                )));
            }
        }
        Ok(Tolerance {
            eq,
            boundary,
            angle,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Interior,
    Boundary,
    Exterior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    pub rep: Vec3,
    pub location: Location,
}

impl ProjectivePoint {
    pub fn new(form: HermitianForm, rep: Vec3, tol: &Tolerance) -> Result<Self> {
        let location = locate(form, &rep, tol)?;
        Ok(ProjectivePoint { rep, location })
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn vec3(a: C64, b: C64, c: C64) -> Vec3 {
    Vec3::new(a, b, c)
}

pub fn inner(form: HermitianForm, x: &Vec3, y: &Vec3) -> C64 {
    match form.model {
        Model::Ball => x[0] * y[0].conj() + x[1] * y[1].conj() - x[2] * y[2].conj(),
        Model::Siegel => x[0] * y[2].conj() + x[1] * y[1].conj() + x[2] * y[0].conj(),
    }
}

pub fn norm2(form: HermitianForm, x: &Vec3) -> f64 {
    inner(form, x, x).re
}

fn is_finite_vec(v: &Vec3) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn is_finite_mat(m: &Mat3) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn locate(form: HermitianForm, z: &Vec3, tol: &Tolerance) -> Result<Location> {
    if !is_finite_vec(z) {
        return Err(GeomError::NonFinite);
    }
    let n = z.norm();
    if n == 0.0 {
        return Err(GeomError::ZeroVector);
    }
    let u = z.unscale(n);
    let q = norm2(form, &u);
    Ok(if q < -tol.boundary {
        Location::Interior
    } else if q.abs() <= tol.boundary {
        Location::Boundary
    } else {
        Location::Exterior
    })
}

/// Sine of the angle between the complex lines spanned by `u` and `v`.
pub fn proj_dist(u: &Vec3, v: &Vec3) -> f64 {
    let nu = u.norm_squared();
    let nv = v.norm_squared();
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    // residual of u after projecting onto v; avoids the cancellation in 1 - cos^2
    let r = u - v * (v.dotc(u) / nv);
    (r.norm_squared() / nu).sqrt().min(1.0)
}

pub fn proj_eq(u: &Vec3, v: &Vec3, tol: f64) -> bool {
    proj_dist(u, v) <= tol
}

/// Rescale a lift so that its largest entry is real and positive.
pub fn normalize_rep(v: &Vec3) -> Vec3 {
    let k = (0..3)
        .max_by(|&a, &b| v[a].norm().total_cmp(&v[b].norm()))
        .unwrap_or(0);
    let p = v[k];
    if p.norm() == 0.0 {
        return *v;
    }
    v * (p.conj() / (p.norm() * v.norm()))
}

/// Lift of an interior point with `<P, P> = -1`, or of an exterior point with `<P, P> = 1`.
pub fn unit_lift(form: HermitianForm, v: &Vec3) -> Vec3 {
    let q = norm2(form, v);
    if q == 0.0 {
        return *v;
    }
    v.unscale(q.abs().sqrt())
}

/// Principal cube root, argument in (-pi/3, pi/3].
pub fn principal_cbrt(z: C64) -> C64 {
    if z.norm() == 0.0 {
        return ZERO;
    }
    C64::from_polar(z.norm().cbrt(), z.arg() / 3.0)
}

pub fn cube_roots_of_unity() -> [C64; 3] {
    let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    [ONE, w, w * w]
}

fn eval_cubic(a2: C64, a1: C64, a0: C64, x: C64) -> C64 {
    ((x + a2) * x + a1) * x + a0
}

fn eval_cubic_deriv(a2: C64, a1: C64, x: C64) -> C64 {
    (re(3.0) * x + re(2.0) * a2) * x + a1
}

/// Roots of `x^3 + a2 x^2 + a1 x + a0`.
///
/// The cubic is depressed to `y^3 + p y + q`. When `p` and `q` are real and the
/// discriminant is negative the trigonometric form gives three real roots;
/// otherwise Cardano's formula is used with the square root branch that avoids
/// cancellation and the principal cube root. Each root gets one Newton step,
/// kept only if it lowers the residual.
pub fn cubic_roots(a2: C64, a1: C64, a0: C64) -> Result<[C64; 3]> {
    for z in [a2, a1, a0] {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(GeomError::NonFinite);
        }
    }
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = a2 * a2 * a2 * (2.0 / 27.0) - a2 * a1 / 3.0 + a0;
    let scale = 1.0 + p.norm() + q.norm();
    let real_coeffs = p.im.abs() <= 1e-15 * scale && q.im.abs() <= 1e-15 * scale;

    let mut ys = [ZERO; 3];
    let disc = 4.0 * p.re.powi(3) + 27.0 * q.re * q.re;
    if real_coeffs && p.re < 0.0 && disc < 0.0 {
        let (pr, qr) = (p.re, q.re);
        let m = 2.0 * (-pr / 3.0).sqrt();
        let arg = ((3.0 * qr) / (pr * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for (k, y) in ys.iter_mut().enumerate() {
            *y = re(m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos());
        }
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let w1 = -q / 2.0 + s;
        let w2 = -q / 2.0 - s;
        let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
        let u = principal_cbrt(w);
        if u.norm() == 0.0 {
            ys = [ZERO; 3];
        } else {
            let v = -p / (u * 3.0);
            let om = cube_roots_of_unity();
            for k in 0..3 {
                ys[k] = om[k] * u + om[(3 - k) % 3] * v;
            }
        }
    }

    let mut roots = ys.map(|y| y - shift);
    for r in roots.iter_mut() {
        let f = eval_cubic(a2, a1, a0, *r);
        let d = eval_cubic_deriv(a2, a1, *r);
        if d.norm() > 1e-12 * (1.0 + r.norm_sqr()) {
            let cand = *r - f / d;
            if eval_cubic(a2, a1, a0, cand).norm() < f.norm() {
                *r = cand;
            }
        }
    }
    Ok(roots)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpace {
    pub value: C64,
    pub multiplicity: usize,
    /// Orthonormal (Euclidean) basis of the kernel of `M - value I`.
    pub vectors: Vec<Vec3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub roots: [C64; 3],
    pub spaces: Vec<EigenSpace>,
    /// Sum over eigenvalues of algebraic minus geometric multiplicity.
    pub deficiency: usize,
}

impl Eigensystem {
    pub fn pairs(&self) -> Vec<(C64, Vec3)> {
        self.spaces
            .iter()
            .flat_map(|s| s.vectors.iter().map(move |v| (s.value, *v)))
            .collect()
    }
}

const CLUSTER_REL: f64 = 1e-7;
const MERGE_REL: f64 = 1e-4;
const RANK_REL: f64 = 1e-6;

pub fn char_poly(m: &Mat3) -> (C64, C64, C64) {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    (-tr, minors, -m.determinant())
}

/// Kernel of `a` by Gaussian elimination with complete pivoting. Pivots below
/// `thresh` count as zero; at least `min_dim` kernel vectors are returned.
pub fn kernel(a: &Mat3, thresh: f64, min_dim: usize) -> Vec<Vec3> {
    let mut m = *a;
    let mut cols = [0usize, 1, 2];
    let mut rank = 0;
    for k in 0..3 {
        let mut best = (k, k, 0.0f64);
        for i in k..3 {
            for j in k..3 {
                let v = m[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= thresh || rank >= 3 - min_dim {
            break;
        }
        m.swap_rows(k, best.0);
        m.swap_columns(k, best.1);
        cols.swap(k, best.1);
        let piv = m[(k, k)];
        for i in (k + 1)..3 {
            let f = m[(i, k)] / piv;
            for j in k..3 {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
        }
        rank += 1;
    }
    let mut out: Vec<Vec3> = Vec::new();
    for free in rank..3 {
        let mut y = [ZERO; 3];
        y[free] = ONE;
        for i in (0..rank).rev() {
            let mut s = ZERO;
            for j in (i + 1)..3 {
                s += m[(i, j)] * y[j];
            }
            y[i] = -s / m[(i, i)];
        }
        let mut v = Vec3::zeros();
        for (pos, &col) in cols.iter().enumerate() {
            v[col] = y[pos];
        }
        for u in &out {
            let p = u.dotc(&v);
            v -= u * p;
        }
        let n = v.norm();
        if n > 0.0 {
            out.push(v.unscale(n));
        }
    }
    out
}

fn subspace_contains(basis: &[Vec3], v: &Vec3, tol: f64) -> bool {
    let mut r = *v;
    for u in basis {
        let p = u.dotc(&r);
        r -= u * p;
    }
    r.norm() <= tol * v.norm()
}

pub fn eigensystem(m: &Mat3) -> Result<Eigensystem> {
    if !is_finite_mat(m) {
        return Err(GeomError::NonFinite);
    }
    let (a2, a1, a0) = char_poly(m);
    let roots = cubic_roots(a2, a1, a0)?;
    let scale = roots.iter().fold(1.0f64, |s, r| s.max(r.norm()));
    let mnorm = m.norm().max(1.0);

    let mut parent = [0usize, 1, 2];
    fn find(p: &mut [usize; 3], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            i = p[i];
        }
        i
    }
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (roots[i] - roots[j]).norm() <= CLUSTER_REL * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..3 {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| find(&mut parent, g[0]) == r) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }

    let mut spaces: Vec<EigenSpace> = groups
        .iter()
        .map(|g| {
            let value = g.iter().map(|&i| roots[i]).sum::<C64>() / g.len() as f64;
            let shifted = m - Mat3::identity() * value;
            let mut vectors = kernel(&shifted, RANK_REL * mnorm, 1);
            vectors.truncate(g.len());
            EigenSpace {
                value,
                multiplicity: g.len(),
                vectors,
            }
        })
        .collect();

    // Roots of a defective eigenvalue spread like eps^(1/m); clusters that
    // share an eigenspace are the same eigenvalue.
    loop {
        let mut merged = false;
        'outer: for i in 0..spaces.len() {
            for j in (i + 1)..spaces.len() {
                let close = (spaces[i].value - spaces[j].value).norm() <= MERGE_REL * scale;
                if !close {
                    continue;
                }
                let (big, small) = if spaces[i].vectors.len() >= spaces[j].vectors.len() {
                    (i, j)
                } else {
                    (j, i)
                };
                let nested = spaces[small]
                    .vectors
                    .iter()
                    .all(|v| subspace_contains(&spaces[big].vectors, v, 1e-5));
                if nested {
                    let (mi, mj) = (spaces[i].multiplicity, spaces[j].multiplicity);
                    let value = (spaces[i].value * mi as f64 + spaces[j].value * mj as f64)
                        / (mi + mj) as f64;
                    let vectors = spaces[big].vectors.clone();
                    spaces[i] = EigenSpace {
                        value,
                        multiplicity: mi + mj,
                        vectors,
                    };
                    spaces.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    // A repeated eigenvalue is recovered from the trace and the simple ones,
    // which is far more accurate than averaging a spread cluster.
    let tr = m.trace();
    if let Some(k) = spaces.iter().position(|s| s.multiplicity > 1) {
        let others: C64 = spaces
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, s)| s.value * s.multiplicity as f64)
            .sum();
        let mult = spaces[k].multiplicity;
        let value = (tr - others) / mult as f64;
        let shifted = m - Mat3::identity() * value;
        let mut vectors = kernel(&shifted, RANK_REL * mnorm, 1);
        vectors.truncate(mult);
        spaces[k].value = value;
        spaces[k].vectors = vectors;
    }
    for s in spaces.iter_mut() {
        if s.multiplicity > 1 && s.vectors.len() < s.multiplicity {
            let shifted = m - Mat3::identity() * s.value;
            let v = kernel(&shifted, RANK_REL * mnorm, 1);
            if v.len() > s.vectors.len() {
                s.vectors = v.into_iter().take(s.multiplicity).collect();
            }
        }
    }
    let deficiency = spaces
        .iter()
        .map(|s| s.multiplicity - s.vectors.len())
        .sum();
    Ok(Eigensystem {
        roots,
        spaces,
        deficiency,
    })
}

fn form_defect(form: HermitianForm, m: &Mat3) -> f64 {
    let h = form.matrix();
    (m.adjoint() * h * m - h).camax()
}

/// Checks `M* H M = H` with a tolerance scaled by the size of `M`.
pub fn preserves_form(form: HermitianForm, m: &Mat3, tol: &Tolerance) -> bool {
    let s = m.camax().max(1.0);
    form_defect(form, m) <= tol.eq * s * s
}

/// Divides a form-preserving matrix by the principal cube root of its determinant.
pub fn su_normalize(form: HermitianForm, m: &Mat3, tol: &Tolerance) -> Result<Mat3> {
    if !is_finite_mat(m) {
        return Err(GeomError::NonFinite);
    }
    let det = m.determinant();
    if det.norm() == 0.0 {
        return Err(GeomError::NotFormPreserving(form.model));
    }
    if !preserves_form(form, m, tol) {
        return Err(GeomError::NotFormPreserving(form.model));
    }
    Ok(m / principal_cbrt(det))
}

/// Rescales `m` by a positive real so that `|det| = 1`, then checks the form.
pub fn u21_normalize(form: HermitianForm, m: &Mat3, tol: &Tolerance) -> Result<Mat3> {
    if !is_finite_mat(m) {
        return Err(GeomError::NonFinite);
    }
    let det = m.determinant().norm();
    if det == 0.0 {
        return Err(GeomError::NotFormPreserving(form.model));
    }
    let n = m.unscale(det.cbrt());
    if !preserves_form(form, &n, tol) {
        return Err(GeomError::NotFormPreserving(form.model));
    }
    Ok(n)
}

/// Vector orthogonal to both `p` and `q`, of unit norm when it is positive.
pub fn polar_vector(form: HermitianForm, p: &Vec3, q: &Vec3, tol: &Tolerance) -> Result<Vec3> {
    let h = form.matrix();
    let hp = h * p;
    let hq = h * q;
    let x = hp.cross(&hq).map(|z| z.conj());
    if x.norm() <= tol.eq * hp.norm() * hq.norm() {
        return Err(GeomError::Coincident);
    }
    let n = norm2(form, &x);
    if n > 0.0 {
        Ok(x.unscale(n.sqrt()))
    } else {
        Ok(x.unscale(x.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    BallToSiegel,
    SiegelToBall,
}

pub fn cayley() -> Mat3 {
    Mat3::new(re(0.5), ZERO, re(-0.5), ZERO, ONE, ZERO, ONE, ZERO, ONE)
}

pub fn cayley_inv() -> Mat3 {
    Mat3::new(ONE, ZERO, re(0.5), ZERO, ONE, ZERO, re(-1.0), ZERO, re(0.5))
}

pub fn cayley_matrix(m: &Mat3, dir: Direction) -> Mat3 {
    match dir {
        Direction::BallToSiegel => cayley() * m * cayley_inv(),
        Direction::SiegelToBall => cayley_inv() * m * cayley(),
    }
}

pub fn cayley_vector(v: &Vec3, dir: Direction) -> Vec3 {
    match dir {
        Direction::BallToSiegel => cayley() * v,
        Direction::SiegelToBall => cayley_inv() * v,
    }
}

/// Matrix or vector re-expressed in `target`.
pub fn to_model_matrix(m: &Mat3, from: Model, target: Model) -> Mat3 {
    match (from, target) {
        (Model::Ball, Model::Siegel) => cayley_matrix(m, Direction::BallToSiegel),
        (Model::Siegel, Model::Ball) => cayley_matrix(m, Direction::SiegelToBall),
        _ => *m,
    }
}

pub fn to_model_vector(v: &Vec3, from: Model, target: Model) -> Vec3 {
    match (from, target) {
        (Model::Ball, Model::Siegel) => cayley_vector(v, Direction::BallToSiegel),
        (Model::Siegel, Model::Ball) => cayley_vector(v, Direction::SiegelToBall),
        _ => *v,
    }
}

/// Unit-determinant frame `G` in the ball model whose last column is a
/// multiple of the interior point `p`, so `G` maps the origin to `p`.
pub fn ball_frame_at(p: &Vec3, tol: &Tolerance) -> Result<Mat3> {
    let f = HermitianForm::BALL;
    let q = norm2(f, p);
    if q >= -tol.boundary * p.norm_squared() {
        return Err(GeomError::Precondition(
            "frame base must be interior".into(),
        ));
    }
    let n = p.unscale((-q).sqrt());
    let mut basis: Vec<Vec3> = Vec::new();
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = ONE;
        let mut v = e + n * inner(f, &e, &n);
        for u in &basis {
            let pr = inner(f, &v, u);
            v -= u * pr;
        }
        let nv = norm2(f, &v);
        if nv > 1e-6 {
            basis.push(v.unscale(nv.sqrt()));
        }
        if basis.len() == 2 {
            break;
        }
    }
    if basis.len() < 2 {
        return Err(GeomError::Degenerate("cannot complete frame".into()));
    }
    let mut g = Mat3::from_columns(&[basis[0], basis[1], n]);
    let det = g.determinant();
    let ph = det.conj() / det.norm();
    g.set_column(0, &(basis[0] * ph));
    Ok(g)
}

/// Unit-determinant frame `[P, c, Q]` in the Siegel model with `P`, `Q` null,
/// `<P, Q> = 1` and `c` unit polar; maps `q_inf` to `p` and the origin to `q`.
/// When `q` is `None` a partner null vector is chosen.
pub fn siegel_frame(p: &Vec3, q: Option<&Vec3>, tol: &Tolerance) -> Result<Mat3> {
    let f = HermitianForm::SIEGEL;
    let pn = p.unscale(p.norm());
    if norm2(f, &pn).abs() > tol.boundary.max(1e-7) {
        return Err(GeomError::Precondition("frame base must be null".into()));
    }
    let qv = match q {
        Some(q) => {
            let qn = q.unscale(q.norm());
            if norm2(f, &qn).abs() > tol.boundary.max(1e-7) {
                return Err(GeomError::Precondition("frame partner must be null".into()));
            }
            qn
        }
        None => {
            let mut best = Vec3::zeros();
            let mut bv = 0.0;
            for k in 0..3 {
                let mut e = Vec3::zeros();
                e[k] = ONE;
                let v = inner(f, &e, &pn).norm();
                if v > bv {
                    bv = v;
                    best = e;
                }
            }
            // make <P, best> real, then add a real multiple of P to kill the norm
            let ip = inner(f, &pn, &best);
            let e = best * (ip / ip.norm());
            let s = -norm2(f, &e) / (2.0 * inner(f, &pn, &e).re);
            e + pn * re(s)
        }
    };
    let ipq = inner(f, &pn, &qv);
    if ipq.norm() <= 1e-12 {
        return Err(GeomError::Coincident);
    }
    // <P, Q'> = Q'* H P = 1
    let qv = qv * (ONE / ipq).conj();
    let cv = polar_vector(f, &pn, &qv, tol)?;
    let mut g = Mat3::from_columns(&[pn, cv, qv]);
    let det = g.determinant();
    let ph = det.conj() / det.norm();
    g.set_column(1, &(cv * ph));
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn inner_examples() {
        let s = HermitianForm::SIEGEL;
        let b = HermitianForm::BALL;
        assert_eq!(
            inner(s, &vec3(ONE, ZERO, ZERO), &vec3(ZERO, ZERO, ONE)),
            ONE
        );
        assert_eq!(
            inner(b, &vec3(ZERO, ZERO, ONE), &vec3(ZERO, ZERO, ONE)),
            re(-1.0)
        );
        assert_eq!(
            inner(s, &vec3(re(-0.5), ONE, ONE), &vec3(ONE, ZERO, ZERO)),
            ONE
        );
    }

    #[test]
    fn inner_matches_matrix_definition() {
        for form in [HermitianForm::BALL, HermitianForm::SIEGEL] {
            let x = vec3(c(1.0, 2.0), c(-0.5, 0.25), c(3.0, -1.0));
            let y = vec3(c(0.3, -0.7), c(2.0, 1.0), c(-1.5, 0.5));
            let direct = (y.adjoint() * form.matrix() * x)[(0, 0)];
            assert!((inner(form, &x, &y) - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn locate_examples() {
        let tol = t();
        assert_eq!(
            locate(HermitianForm::BALL, &vec3(ZERO, ZERO, ONE), &tol).unwrap(),
            Location::Interior
        );
        assert_eq!(
            locate(HermitianForm::SIEGEL, &vec3(ONE, ZERO, ZERO), &tol).unwrap(),
            Location::Boundary
        );
        assert_eq!(
            locate(HermitianForm::BALL, &vec3(ONE, ZERO, ZERO), &tol).unwrap(),
            Location::Exterior
        );
        assert_eq!(
            locate(HermitianForm::BALL, &Vec3::zeros(), &tol),
            Err(GeomError::ZeroVector)
        );
    }

    fn sorted_re(mut r: [C64; 3]) -> [C64; 3] {
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    }

    #[test]
    fn cubic_examples() {
        let r = cubic_roots(re(-3.0), re(3.0), re(-1.0)).unwrap();
        for x in r {
            assert!((x - ONE).norm() < 1e-12);
        }
        let r = cubic_roots(ZERO, ZERO, re(-1.0)).unwrap();
        for x in r {
            assert!((x * x * x - ONE).norm() < 1e-14);
            assert!((x.norm() - 1.0).abs() < 1e-14);
        }
        let r = sorted_re(cubic_roots(re(-3.5), re(3.5), re(-1.0)).unwrap());
        let want = [0.5, 1.0, 2.0];
        for (x, w) in r.iter().zip(want) {
            assert!((x - re(w)).norm() < 1e-12, "{x} vs {w}");
        }
    }

    #[test]
    fn cubic_rejects_nan() {
        assert_eq!(
            cubic_roots(re(f64::NAN), ZERO, ZERO),
            Err(GeomError::NonFinite)
        );
    }

    #[test]
    fn eigensystem_identity_and_diagonal() {
        let es = eigensystem(&Mat3::identity()).unwrap();
        assert_eq!(es.spaces.len(), 1);
        assert_eq!(es.spaces[0].vectors.len(), 3);
        assert_eq!(es.deficiency, 0);

        let d = Mat3::from_diagonal(&vec3(re(2.0), ONE, re(0.5)));
        let es = eigensystem(&d).unwrap();
        assert_eq!(es.spaces.len(), 3);
        for s in &es.spaces {
            let v = s.vectors[0];
            let k = if (s.value - re(2.0)).norm() < 1e-12 {
                0
            } else if (s.value - ONE).norm() < 1e-12 {
                1
            } else {
                2
            };
            let mut e = Vec3::zeros();
            e[k] = ONE;
            assert!(proj_eq(&v, &e, 1e-12));
        }
    }

    #[test]
    fn eigensystem_heisenberg_translation() {
        // T_[1,0]
        let m = Mat3::new(ONE, re(-1.0), re(-0.5), ZERO, ONE, ONE, ZERO, ZERO, ONE);
        let es = eigensystem(&m).unwrap();
        assert_eq!(es.spaces.len(), 1);
        assert_eq!(es.spaces[0].vectors.len(), 1);
        assert_eq!(es.deficiency, 2);
        assert!(proj_eq(
            &es.spaces[0].vectors[0],
            &vec3(ONE, ZERO, ZERO),
            1e-12
        ));
    }

    #[test]
    fn su_normalize_examples() {
        let tol = t();
        let id = su_normalize(HermitianForm::BALL, &Mat3::identity(), &tol).unwrap();
        assert!((id - Mat3::identity()).camax() < 1e-15);
        let two = Mat3::identity() * re(2.0);
        assert_eq!(
            su_normalize(HermitianForm::BALL, &two, &tol),
            Err(GeomError::NotFormPreserving(Model::Ball))
        );
        let d = Mat3::from_diagonal(&vec3(re(2.0), ONE, re(0.5)));
        let n = su_normalize(HermitianForm::SIEGEL, &d, &tol).unwrap();
        assert!((n - d).camax() < 1e-15);
    }

    #[test]
    fn principal_cube_root_branch() {
        let w = principal_cbrt(re(-8.0));
        assert!((w - C64::from_polar(2.0, std::f64::consts::PI / 3.0)).norm() < 1e-14);
        let z = principal_cbrt(c(0.0, -1.0));
        assert!(z.arg() > -std::f64::consts::PI / 3.0);
    }

    #[test]
    fn polar_examples() {
        let tol = t();
        let v = polar_vector(
            HermitianForm::BALL,
            &vec3(ZERO, ZERO, ONE),
            &vec3(ONE, ZERO, ONE),
            &tol,
        )
        .unwrap();
        assert!(proj_eq(&v, &vec3(ZERO, ONE, ZERO), 1e-14));
        assert!((norm2(HermitianForm::BALL, &v) - 1.0).abs() < 1e-14);
        let v = polar_vector(
            HermitianForm::SIEGEL,
            &vec3(ONE, ZERO, ZERO),
            &vec3(ZERO, ZERO, ONE),
            &tol,
        )
        .unwrap();
        assert!(proj_eq(&v, &vec3(ZERO, ONE, ZERO), 1e-14));
        let p = vec3(ONE, c(0.0, 1.0), ZERO);
        assert_eq!(
            polar_vector(HermitianForm::BALL, &p, &(p * c(2.0, 1.0)), &tol),
            Err(GeomError::Coincident)
        );
    }

    #[test]
    fn cayley_is_an_isometry_of_forms() {
        let cm = cayley();
        let lhs = cm.adjoint() * HermitianForm::SIEGEL.matrix() * cm;
        assert!((lhs - HermitianForm::BALL.matrix()).camax() < 1e-15);
        assert!((cm * cayley_inv() - Mat3::identity()).camax() < 1e-15);
        assert!((cm.determinant() - ONE).norm() < 1e-15);
        let z = cayley_vector(&vec3(ZERO, ZERO, ONE), Direction::BallToSiegel);
        assert_eq!(
            locate(HermitianForm::SIEGEL, &z, &t()).unwrap(),
            Location::Interior
        );
        assert!(proj_eq(&z, &vec3(re(-0.5), ZERO, ONE), 1e-15));
    }

    #[test]
    fn frames_are_isometries() {
        let tol = t();
        let p = vec3(c(0.3, 0.1), c(-0.2, 0.4), ONE);
        let g = ball_frame_at(&p, &tol).unwrap();
        let h = HermitianForm::BALL.matrix();
        assert!((g.adjoint() * h * g - h).camax() < 1e-12);
        assert!((g.determinant() - ONE).norm() < 1e-12);
        assert!(proj_eq(&g.column(2).into_owned(), &p, 1e-12));

        let q = vec3(c(-0.5, 0.5), ONE, ONE);
        let g = siegel_frame(&q, None, &tol).unwrap();
        let h = HermitianForm::SIEGEL.matrix();
        assert!((g.adjoint() * h * g - h).camax() < 1e-12);
        assert!((g.determinant() - ONE).norm() < 1e-12);
        assert!(proj_eq(&(g * vec3(ONE, ZERO, ZERO)), &q, 1e-12));
    }
}
