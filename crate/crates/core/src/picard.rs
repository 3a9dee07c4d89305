//! Exact arithmetic over the rings of integers of imaginary quadratic fields,
//! and certificates that the Picard modular groups for small `d` are generated
//! by real reflections up to finite index.
//!
//! All matrices here live in the Siegel model. A real reflection is stored by
//! its Souriau lift `A`, acting as `z -> A conj(z)`, so `A sigma0` with
//! `sigma0` the entrywise conjugation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::decomp::{geometric_decomposes, reflection_decomposes};
use crate::error::{GeomError, Result};
use crate::heisenberg::{anti_boundary_action, HeisPoint};
use crate::hermlin::{c, HermitianForm, Mat3, Tolerance, C64};
use crate::isometry::{AntiIsometry, HoloIsometry};

pub const SUPPORTED_D: [u32; 5] = [1, 2, 3, 7, 11];

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn is_squarefree(d: u32) -> bool {
    d >= 1
        && (2..)
            .take_while(|p: &u32| p * p <= d)
            .all(|p| !d.is_multiple_of(p * p))
}

/// `a + b i sqrt(d)` with rational `a`, `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadFieldScalar {
    a: BigRational,
    b: BigRational,
    d: u32,
}

impl QuadFieldScalar {
    pub fn new(a: BigRational, b: BigRational, d: u32) -> Result<Self> {
        if !is_squarefree(d) {
            return Err(GeomError::Precondition(format!(
                "d = {d} is not a positive squarefree integer"
            )));
        }
        Ok(QuadFieldScalar { a, b, d })
    }

    /// `(an/ad) + (bn/bd) i sqrt(d)`; panics on a zero denominator.
    pub fn from_ratios(an: i64, ad: i64, bn: i64, bd: i64, d: u32) -> Result<Self> {
        Self::new(
            BigRational::new(an.into(), ad.into()),
            BigRational::new(bn.into(), bd.into()),
            d,
        )
    }

    fn raw(a: BigRational, b: BigRational, d: u32) -> Self {
        QuadFieldScalar { a, b, d }
    }

    pub fn int(n: i64, d: u32) -> Self {
        Self::raw(rat(n), BigRational::zero(), d)
    }

    pub fn zero(d: u32) -> Self {
        Self::int(0, d)
    }

    pub fn one(d: u32) -> Self {
        Self::int(1, d)
    }

    /// `i sqrt(d)`.
    pub fn root(d: u32) -> Self {
        Self::raw(BigRational::zero(), BigRational::one(), d)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::raw(self.a.clone(), -&self.b, self.d)
    }

    /// `|x|^2 = a^2 + d b^2`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a + rat(self.d as i64) * &self.b * &self.b
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(GeomError::DivisionByZero);
        }
        let n = self.norm();
        Ok(Self::raw(&self.a / &n, -&self.b / &n, self.d))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::raw(&self.a * r, &self.b * r, self.d)
    }

    /// Membership in the ring of integers of `Q(i sqrt(d))`.
    pub fn od_member(&self) -> bool {
        if self.d % 4 == 3 {
            let two = rat(2);
            let (x, y) = (&self.a * &two, &self.b * &two);
            x.is_integer() && y.is_integer() && (x.to_integer() - y.to_integer()).is_even()
        } else {
            self.a.is_integer() && self.b.is_integer()
        }
    }

    pub fn to_c64(&self) -> C64 {
        let f = |r: &BigRational| r.to_f64().unwrap_or(f64::NAN);
        c(f(&self.a), f(&self.b) * (self.d as f64).sqrt())
    }

    fn same_d(&self, other: &Self) {
        assert_eq!(self.d, other.d, "mixing scalars over different fields");
    }
}

impl fmt::Display for QuadFieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let sign = if self.b.is_negative() { "-" } else { "+" };
        write!(f, "{}{}{}i√{}", self.a, sign, self.b.abs(), self.d)
    }
}

impl Add for &QuadFieldScalar {
    type Output = QuadFieldScalar;
    fn add(self, o: &QuadFieldScalar) -> QuadFieldScalar {
        self.same_d(o);
        QuadFieldScalar::raw(&self.a + &o.a, &self.b + &o.b, self.d)
    }
}

impl Sub for &QuadFieldScalar {
    type Output = QuadFieldScalar;
    fn sub(self, o: &QuadFieldScalar) -> QuadFieldScalar {
        self.same_d(o);
        QuadFieldScalar::raw(&self.a - &o.a, &self.b - &o.b, self.d)
    }
}

impl Mul for &QuadFieldScalar {
    type Output = QuadFieldScalar;
    fn mul(self, o: &QuadFieldScalar) -> QuadFieldScalar {
        self.same_d(o);
        let d = rat(self.d as i64);
        QuadFieldScalar::raw(
            &self.a * &o.a - d * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
            self.d,
        )
    }
}

impl Neg for &QuadFieldScalar {
    type Output = QuadFieldScalar;
    fn neg(self) -> QuadFieldScalar {
        QuadFieldScalar::raw(-&self.a, -&self.b, self.d)
    }
}

/// 3x3 matrix over `Q(i sqrt(d))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    e: [[QuadFieldScalar; 3]; 3],
    d: u32,
}

impl ExactMatrix {
    pub fn from_fn(d: u32, mut f: impl FnMut(usize, usize) -> QuadFieldScalar) -> Self {
        let e = std::array::from_fn(|r| {
            std::array::from_fn(|col| {
                let x = f(r, col);
                assert_eq!(x.d, d, "entry over a different field");
                x
            })
        });
        ExactMatrix { e, d }
    }

    pub fn from_ints(d: u32, m: [[i64; 3]; 3]) -> Self {
        Self::from_fn(d, |r, col| QuadFieldScalar::int(m[r][col], d))
    }

    pub fn identity(d: u32) -> Self {
        Self::from_fn(d, |r, col| QuadFieldScalar::int((r == col) as i64, d))
    }

    pub fn diagonal(d: u32, diag: [QuadFieldScalar; 3]) -> Self {
        Self::from_fn(d, |r, col| {
            if r == col {
                diag[r].clone()
            } else {
                QuadFieldScalar::zero(d)
            }
        })
    }

    /// The Siegel form, antidiagonal ones.
    pub fn siegel_form(d: u32) -> Self {
        Self::from_ints(d, [[0, 0, 1], [0, 1, 0], [1, 0, 0]])
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn get(&self, r: usize, col: usize) -> &QuadFieldScalar {
        &self.e[r][col]
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.d, |r, col| self.e[r][col].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.d, |r, col| self.e[col][r].conj())
    }

    pub fn det(&self) -> QuadFieldScalar {
        let m = &self.e;
        let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
            &(&m[r0][c0] * &m[r1][c1]) - &(&m[r0][c1] * &m[r1][c0])
        };
        let t0 = &m[0][0] * &minor(1, 2, 1, 2);
        let t1 = &m[0][1] * &minor(1, 2, 0, 2);
        let t2 = &m[0][2] * &minor(1, 2, 0, 1);
        &(&t0 - &t1) + &t2
    }

    pub fn inverse(&self) -> Result<Self> {
        let det_inv = self.det().inv()?;
        let m = &self.e;
        // Cofactor of entry (r, col), placed transposed.
        Ok(Self::from_fn(self.d, |r, col| {
            let rows: Vec<usize> = (0..3).filter(|&i| i != col).collect();
            let cols: Vec<usize> = (0..3).filter(|&j| j != r).collect();
            let minor = &(&m[rows[0]][cols[0]] * &m[rows[1]][cols[1]])
                - &(&m[rows[0]][cols[1]] * &m[rows[1]][cols[0]]);
            let signed = if (r + col) % 2 == 0 { minor } else { -&minor };
            &signed * &det_inv
        }))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        let mut base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut n = k.unsigned_abs();
        let mut acc = Self::identity(self.d);
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        Ok(acc)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.d)
    }

    pub fn entries(&self) -> impl Iterator<Item = &QuadFieldScalar> {
        self.e.iter().flatten()
    }

    pub fn to_mat3(&self) -> Mat3 {
        Mat3::from_fn(|r, col| self.e[r][col].to_c64())
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, o: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.d, o.d, "mixing matrices over different fields");
        ExactMatrix::from_fn(self.d, |r, col| {
            let mut acc = QuadFieldScalar::zero(self.d);
            for k in 0..3 {
                acc = &acc + &(&self.e[r][k] * &o.e[k][col]);
            }
            acc
        })
    }
}

/// `M* H M = H` for the Siegel form.
pub fn exact_u21_check(m: &ExactMatrix) -> bool {
    let h = ExactMatrix::siegel_form(m.d);
    &(&m.adjoint() * &h) * m == h
}

/// `M* H M = H` and `det M = 1`, exactly.
pub fn exact_su21_check(m: &ExactMatrix) -> bool {
    exact_u21_check(m) && m.det() == QuadFieldScalar::one(m.d)
}

pub fn exact_entries_in_od(m: &ExactMatrix) -> bool {
    m.entries().all(QuadFieldScalar::od_member)
}

/// `T_[z,t]` with `it` given as a field element.
pub fn exact_translation(z: &QuadFieldScalar, it: &QuadFieldScalar) -> ExactMatrix {
    let d = z.d;
    let zero = QuadFieldScalar::zero(d);
    let one = QuadFieldScalar::one(d);
    let corner = (&QuadFieldScalar::raw(z.norm(), BigRational::zero(), d) - it)
        .scale(&BigRational::new((-1).into(), 2.into()));
    ExactMatrix {
        e: [
            [one.clone(), -&z.conj(), corner],
            [zero.clone(), one.clone(), z.clone()],
            [zero.clone(), zero, one],
        ],
        d,
    }
}

/// A Heisenberg translation with vertical part `t = steps * sqrt(d) / 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub z: QuadFieldScalar,
    pub steps: i64,
    pub matrix: ExactMatrix,
}

impl Translation {
    pub fn new(z: QuadFieldScalar, steps: i64) -> Self {
        let it = QuadFieldScalar::raw(
            BigRational::zero(),
            BigRational::new(steps.into(), 2.into()),
            z.d,
        );
        let matrix = exact_translation(&z, &it);
        Translation { z, steps, matrix }
    }

    pub fn t(&self) -> f64 {
        self.steps as f64 * (self.z.d as f64).sqrt() / 2.0
    }
}

pub const LIFT_SEARCH_BOUND: i64 = 16;

/// The lift of `w -> w + z` with smallest `|t|` in `(sqrt(d)/2) Z` and integral
/// entries, preferring `t > 0` on ties. The real part of the corner entry does
/// not depend on `t`, so a failure inside the bound is not an artefact of it.
pub fn minimal_lift(z: &QuadFieldScalar) -> Option<Translation> {
    (0..=LIFT_SEARCH_BOUND)
        .flat_map(|m| if m == 0 { vec![0] } else { vec![m, -m] })
        .map(|m| Translation::new(z.clone(), m))
        .find(|tr| exact_entries_in_od(&tr.matrix))
}

/// Generators of the stabilizer of infinity together with `I0`.
#[derive(Debug, Clone)]
pub struct PicardContext {
    pub d: u32,
    pub i0: ExactMatrix,
    pub r1: ExactMatrix,
    pub t0: ExactMatrix,
    pub t1: Translation,
    pub t2: Translation,
    /// For `d = 3 mod 4`, the lift of `w -> w + (1 + i sqrt(d))/2` replaced by `t2`.
    pub t2_original: Option<Translation>,
    /// Order 4 (d = 1) or order 6 (d = 3) complex reflection about the line polar to `e2`.
    pub rotation: Option<ExactMatrix>,
    /// Souriau lifts of `sigma_0 .. sigma_4`.
    pub sigmas: Vec<ExactMatrix>,
    /// The index claimed for the real reflection subgroup, not verified here.
    pub index_claim: u32,
}

pub fn build_context(d: u32) -> Result<PicardContext> {
    if !SUPPORTED_D.contains(&d) {
        return Err(GeomError::Unsupported(format!(
            "d = {d}; supported values are {SUPPORTED_D:?}"
        )));
    }
    let q = |n: i64| QuadFieldScalar::int(n, d);
    let s = QuadFieldScalar::root(d);
    let lift = |z: QuadFieldScalar| {
        minimal_lift(&z).ok_or_else(|| {
            GeomError::Degenerate(format!(
                "no integral lift of the translation by {z} with |t| <= {LIFT_SEARCH_BOUND} sqrt(d)/2"
            ))
        })
    };

    let (z1, z2, t2_original) = match d % 4 {
        3 => {
            let omega = (&q(1) + &s).scale(&BigRational::new(1.into(), 2.into()));
            let original = lift(omega.clone())?;
            // Orthogonal pair: T1 and T2^2 T1^-1.
            (q(1), &(&omega + &omega) - &q(1), Some(original))
        }
        2 => (q(2), s.clone(), None),
        _ => (q(2), &q(2) * &s, None),
    };
    let t1 = lift(z1)?;
    let t2 = lift(z2)?;

    let i0 = ExactMatrix::from_ints(d, [[0, 0, 1], [0, -1, 0], [1, 0, 0]]);
    let r1 = ExactMatrix::from_ints(d, [[-1, 0, 0], [0, 1, 0], [0, 0, -1]]);
    let t0 = Translation::new(q(0), 2).matrix;
    let rotation = match d {
        1 => Some(ExactMatrix::diagonal(d, [s.clone(), q(-1), s.clone()])),
        3 => {
            let u = (&q(1) + &s).scale(&BigRational::new(1.into(), 2.into()));
            Some(ExactMatrix::diagonal(d, [q(1), u, q(1)]))
        }
        _ => None,
    };

    let sigmas = vec![
        ExactMatrix::identity(d),
        r1.clone(),
        t2.matrix.clone(),
        &t1.matrix * &r1,
        i0.clone(),
    ];
    let index_claim = match d % 4 {
        3 => 2,
        2 => 4,
        _ => 8,
    };
    Ok(PicardContext {
        d,
        i0,
        r1,
        t0,
        t1,
        t2,
        t2_original,
        rotation,
        sigmas,
        index_claim,
    })
}

/// `w -> rotation * w + shift` on the horizontal factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineMap {
    pub rotation: QuadFieldScalar,
    pub shift: QuadFieldScalar,
}

impl AffineMap {
    pub fn is_identity(&self) -> bool {
        self.rotation == QuadFieldScalar::one(self.rotation.d) && self.shift.is_zero()
    }
}

/// Horizontal part of an upper triangular element fixing infinity.
pub fn pi_star(p: &ExactMatrix) -> Result<AffineMap> {
    let lower_zero = [(1, 0), (2, 0), (2, 1)]
        .iter()
        .all(|&(r, col)| p.get(r, col).is_zero());
    if !lower_zero {
        return Err(GeomError::Precondition(
            "matrix is not upper triangular".into(),
        ));
    }
    let denom = p.get(2, 2);
    let rotation = p.get(1, 1).div(denom)?;
    if !rotation.norm().is_one() {
        return Err(GeomError::Unsupported(format!(
            "rotational part {rotation} is not a unit"
        )));
    }
    let shift = p.get(1, 2).div(denom)?;
    Ok(AffineMap { rotation, shift })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    fn new(name: impl Into<String>, ok: bool, witness: Option<String>) -> Self {
        Check {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            witness,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// `[T2, T1] = T0^k`: the measured `k`, the Heisenberg prediction
/// `4 Im(z2 conj z1) / sqrt(d)` and the value stated in the literature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutatorPower {
    pub pair: String,
    pub measured_k: Option<i64>,
    pub predicted_k: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stated_k: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommutatorReport {
    pub powers: Vec<CommutatorPower>,
    pub checks: Vec<Check>,
}

fn commutator(a: &ExactMatrix, b: &ExactMatrix) -> Result<ExactMatrix> {
    Ok(&(&(a * b) * &a.inverse()?) * &b.inverse()?)
}

/// The `k` with `c = T0^k`, if `c` is a vertical translation by a multiple of `sqrt(d)`.
fn vertical_power(c: &ExactMatrix, t0: &ExactMatrix) -> Result<Option<i64>> {
    let corner = c.get(0, 2);
    let k = corner.b() * rat(2);
    if !corner.a().is_zero() || !k.is_integer() {
        return Ok(None);
    }
    let Some(k) = k.to_integer().to_i64() else {
        return Ok(None);
    };
    Ok((*c == t0.pow(k)?).then_some(k))
}

fn predicted_power(z2: &QuadFieldScalar, z1: &QuadFieldScalar) -> i64 {
    let k = rat(4) * (z1.a() * z2.b() - z2.a() * z1.b());
    k.to_integer()
        .to_i64()
        .expect("integral translations give an integral power")
}

pub fn verify_commutator_relations(ctx: &PicardContext) -> Result<CommutatorReport> {
    let mut powers = Vec::new();
    let mut checks = Vec::new();
    let mut pairs = vec![("[T2,T1]", &ctx.t2, None)];
    if let Some(orig) = &ctx.t2_original {
        pairs.push(("[T2',T1]", orig, Some(1)));
    } else {
        pairs[0].2 = Some(4);
    }
    for (name, t2, stated) in pairs {
        let c = commutator(&t2.matrix, &ctx.t1.matrix)?;
        let measured = vertical_power(&c, &ctx.t0)?;
        let predicted = predicted_power(&t2.z, &ctx.t1.z);
        let vertical = pi_star(&c)?.is_identity();
        checks.push(Check::new(
            format!("commutator {name} is a power of T0"),
            measured == Some(predicted) && vertical,
            Some(format!(
                "measured k = {}, Heisenberg prediction {predicted}{}",
                measured.map_or("none".into(), |k| k.to_string()),
                stated.map_or(String::new(), |s| format!(", stated {s}")),
            )),
        ));
        powers.push(CommutatorPower {
            pair: name.into(),
            measured_k: measured,
            predicted_k: predicted,
            stated_k: stated,
        });
    }
    for (name, t) in [("T1", &ctx.t1.matrix), ("T2", &ctx.t2.matrix)] {
        let c = commutator(&ctx.t0, t)?;
        checks.push(Check::new(
            format!("[T0,{name}] = identity"),
            c.is_identity(),
            None,
        ));
    }
    let vertical = pi_star(&ctx.t0)?.is_identity();
    let t0_integral = exact_entries_in_od(&ctx.t0);
    let t0_sq_integral = exact_entries_in_od(&ctx.t0.pow(2)?);
    checks.push(Check::new(
        "T0 vertical with integral square",
        vertical && t0_sq_integral,
        Some(format!(
            "T0 entries in O_d: {t0_integral}; T0^2 entries in O_d: {t0_sq_integral}"
        )),
    ));
    Ok(CommutatorReport { powers, checks })
}

fn generators(ctx: &PicardContext) -> Vec<(&'static str, &ExactMatrix)> {
    let mut g = vec![
        ("I0", &ctx.i0),
        ("R1", &ctx.r1),
        ("T1", &ctx.t1.matrix),
        ("T2", &ctx.t2.matrix),
    ];
    if let Some(r) = &ctx.rotation {
        g.push(("R", r));
    }
    g
}

/// SU for the standard generators; the order 6 rotation for `d = 3` has unit,
/// non-trivial determinant, so it is held to U(2,1) instead.
fn in_group(m: &ExactMatrix) -> bool {
    exact_u21_check(m) && exact_entries_in_od(m) && {
        let det = m.det();
        det.norm().is_one() && det.od_member()
    }
}

pub fn verify_generators(ctx: &PicardContext) -> Vec<Check> {
    let mut checks = Vec::new();
    for (name, m) in generators(ctx) {
        let su = exact_su21_check(m);
        let ok = if name == "R" {
            in_group(m)
        } else {
            su && exact_entries_in_od(m)
        };
        checks.push(Check::new(
            format!("{name} in SU(2,1,O_d)"),
            ok,
            (name == "R").then(|| format!("det = {}", m.det())),
        ));
        checks.push(Check::new(
            format!("conj({name}) in the group"),
            in_group(&m.conj()),
            None,
        ));
    }
    checks.push(Check::new("T0 in SU(2,1)", exact_su21_check(&ctx.t0), None));
    if let Some(orig) = &ctx.t2_original {
        checks.push(Check::new(
            "lift of w -> w + (1+i√d)/2",
            exact_su21_check(&orig.matrix) && exact_entries_in_od(&orig.matrix),
            Some(format!("t = {} sqrt(d)/2", orig.steps)),
        ));
    }
    for (name, tr) in [("T1", &ctx.t1), ("T2", &ctx.t2)] {
        checks.push(Check::new(
            format!("{name} minimal vertical parameter"),
            true,
            Some(format!("z = {}, t = {} sqrt(d)/2", tr.z, tr.steps)),
        ));
    }
    let (a1, a2) = (pi_star(&ctx.t1.matrix), pi_star(&ctx.t2.matrix));
    let orthogonal = match (a1, a2) {
        (Ok(a1), Ok(a2)) => (&a1.shift * &a2.shift.conj()).a().is_zero(),
        _ => false,
    };
    checks.push(Check::new(
        "T1 and T2 directions orthogonal",
        orthogonal,
        None,
    ));
    if ctx.d % 4 != 3 {
        let q = |n: i64| QuadFieldScalar::int(n, ctx.d);
        let mut missing = vec![q(1)];
        if ctx.d % 4 == 1 {
            missing.push(QuadFieldScalar::root(ctx.d));
        }
        for z in missing {
            checks.push(Check::new(
                format!("w -> w + {z} has no integral lift"),
                minimal_lift(&z).is_none(),
                None,
            ));
        }
    }
    checks
}

fn sigma_list(ctx: &PicardContext) -> Vec<(String, ExactMatrix)> {
    let mut list: Vec<(String, ExactMatrix)> = ctx
        .sigmas
        .iter()
        .enumerate()
        .map(|(i, m)| (format!("sigma{i}"), m.clone()))
        .collect();
    if let Some(r) = &ctx.rotation {
        list.push(("sigmaR".into(), r.clone()));
    }
    list
}

fn holo(m: &ExactMatrix, tol: &Tolerance) -> Result<HoloIsometry> {
    HoloIsometry::new(HermitianForm::SIEGEL, m.to_mat3(), tol)
}

fn anti(m: &ExactMatrix, tol: &Tolerance) -> Result<AntiIsometry> {
    AntiIsometry::new(HermitianForm::SIEGEL, m.to_mat3(), tol)
}

pub fn verify_sigma_family(ctx: &PicardContext) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let sigmas = sigma_list(ctx);
    let id = ExactMatrix::identity(ctx.d);
    for (name, a) in &sigmas {
        checks.push(Check::new(
            format!("{name} real reflection"),
            (a * &a.conj()) == id,
            None,
        ));
    }
    for (ni, ai) in &sigmas {
        for (nj, aj) in &sigmas {
            if ni == nj {
                continue;
            }
            let p = ai * &aj.conj();
            let in_su = exact_su21_check(&p) && exact_entries_in_od(&p);
            let ok = if ni == "sigmaR" || nj == "sigmaR" {
                in_group(&p)
            } else {
                in_su
            };
            checks.push(Check::new(format!("{ni}{nj} in SU(2,1,O_d)"), ok, None));
            // conj(sigma_i sigma_j) = (sigma0 sigma_i)(sigma_j sigma0).
            let cp = p.conj();
            checks.push(Check::new(
                format!("conj({ni}{nj}) = conj(A_i) A_j in the group"),
                cp == &ai.conj() * aj && in_group(&cp),
                None,
            ));
        }
    }

    let tol = Tolerance::default();
    let sigma0 = anti(&ctx.sigmas[0], &tol)?;
    let sigma1 = anti(&ctx.sigmas[1], &tol)?;
    let mut claims = vec![
        ("sigma0", &sigma0, "R1", &ctx.r1),
        ("sigma0", &sigma0, "I0", &ctx.i0),
        ("sigma0", &sigma0, "T2", &ctx.t2.matrix),
        ("sigma1", &sigma1, "T1", &ctx.t1.matrix),
    ];
    if let Some(r) = &ctx.rotation {
        claims.push(("sigma0", &sigma0, "R", r));
    }
    for (sn, s, an, a) in claims {
        let a = holo(a, &tol)?;
        let alg = reflection_decomposes(s, &a, &tol)?;
        let geo = geometric_decomposes(s, &a, &tol)?;
        checks.push(Check::new(
            format!("{sn} decomposes {an}"),
            alg && geo.decomposes,
            Some(format!("geometric criterion {}", geo.criterion.as_str())),
        ));
    }

    let sigma3 = anti(&ctx.sigmas[3], &tol)?;
    let t1 = &ctx.t1;
    let (z1, tt1) = (t1.z.to_c64(), t1.t());
    let samples = [(0.3, -1.2, 0.7), (-2.0, 0.5, -3.1), (1.7, 2.2, 0.0)];
    let matches = samples.iter().all(|&(x, y, t)| {
        let p = HeisPoint::new(c(x, y), t);
        // (z, t) -> (-conj z, -t), then T1.
        let (w, s) = (-p.z.conj(), -p.t);
        let expected = HeisPoint::new(w + z1, tt1 + s + 2.0 * (z1 * w.conj()).im);
        anti_boundary_action(&sigma3, p)
            .map(|q| (q.z - expected.z).norm() + (q.t - expected.t).abs() <= 1e-9)
            .unwrap_or(false)
    });
    checks.push(Check::new(
        "sigma3 boundary action is T1 after (z,t) -> (-conj z,-t)",
        matches,
        None,
    ));
    Ok(checks)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub d: u32,
    pub checks: Vec<Check>,
    pub commutators: Vec<CommutatorPower>,
    /// Literature value for the index of the real reflection subgroup; not checked.
    pub index_claim: u32,
    pub index_claim_verified: bool,
}

impl Certificate {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

pub fn certify_reflective(d: u32) -> Result<Certificate> {
    let ctx = build_context(d)?;
    let mut checks = verify_generators(&ctx);
    checks.extend(verify_sigma_family(&ctx)?);
    let comm = verify_commutator_relations(&ctx)?;
    checks.extend(comm.checks);
    Ok(Certificate {
        d,
        checks,
        commutators: comm.powers,
        index_claim: ctx.index_claim,
        index_claim_verified: false,
    })
}

/// Certificates for every supported `d`.
pub fn certify_all() -> Result<Vec<Certificate>> {
    crate::par::map(&SUPPORTED_D, |&d| certify_reflective(d))
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(an: i64, ad: i64, bn: i64, bd: i64, d: u32) -> QuadFieldScalar {
        QuadFieldScalar::from_ratios(an, ad, bn, bd, d).unwrap()
    }

    #[test]
    fn ring_membership() {
        assert!(q(1, 2, 1, 2, 7).od_member());
        assert!(!q(1, 2, 1, 1, 7).od_member());
        assert!(q(0, 1, 1, 1, 2).od_member());
        assert!(!q(1, 2, 1, 2, 2).od_member());
        assert!(q(3, 2, -1, 2, 11).od_member());
        assert!(!q(0, 1, 1, 2, 3).od_member());
        assert!(QuadFieldScalar::new(rat(1), rat(0), 12).is_err());
    }

    #[test]
    fn field_arithmetic() {
        let d = 7;
        let x = q(1, 2, 1, 2, d);
        let y = q(-3, 1, 2, 5, d);
        assert_eq!(&(&x * &x.inv().unwrap()), &QuadFieldScalar::one(d));
        assert_eq!(&(&x * &y), &(&y * &x));
        // (1 + i sqrt7)/2 squared = (1 - 7 + 2 i sqrt7)/4.
        assert_eq!(&x * &x, q(-3, 2, 1, 2, d));
        assert_eq!(x.norm(), rat(2));
        let s = QuadFieldScalar::root(d);
        assert_eq!(&s * &s, QuadFieldScalar::int(-7, d));
        assert_eq!(
            QuadFieldScalar::zero(d).inv(),
            Err(GeomError::DivisionByZero)
        );
        let f = (&x * &y).to_c64() - x.to_c64() * y.to_c64();
        assert!(f.norm() < 1e-12);
    }

    #[test]
    fn su21_examples() {
        for d in SUPPORTED_D {
            let i0 = ExactMatrix::from_ints(d, [[0, 0, 1], [0, -1, 0], [1, 0, 0]]);
            let r1 = ExactMatrix::from_ints(d, [[-1, 0, 0], [0, 1, 0], [0, 0, -1]]);
            for m in [&i0, &r1] {
                assert!(exact_su21_check(m) && exact_entries_in_od(m));
            }
            let half =
                QuadFieldScalar::raw(BigRational::new(1.into(), 2.into()), BigRational::zero(), d);
            let d2 = ExactMatrix::diagonal(
                d,
                [QuadFieldScalar::int(2, d), QuadFieldScalar::one(d), half],
            );
            assert!(exact_su21_check(&d2));
            assert!(!exact_entries_in_od(&d2));
            let bad = ExactMatrix::from_ints(d, [[1, 1, 0], [0, 1, 0], [0, 0, 1]]);
            assert!(!exact_su21_check(&bad));
        }
    }

    #[test]
    fn matrix_algebra() {
        let d = 11;
        let tr = Translation::new(q(1, 2, 1, 2, d), 3);
        let inv = tr.matrix.inverse().unwrap();
        assert!((&tr.matrix * &inv).is_identity());
        assert_eq!(tr.matrix.pow(-2).unwrap(), &inv * &inv);
        assert!(tr.matrix.pow(0).unwrap().is_identity());
        let f = tr.matrix.to_mat3();
        let g = crate::isometry::heis_translation(tr.z.to_c64(), tr.t()).lift;
        assert!((f - g).camax() < 1e-12);
    }

    #[test]
    fn minimal_lifts() {
        let cases = [
            (7, q(1, 1, 0, 1, 7), Some(2)),
            (7, q(0, 1, 1, 1, 7), Some(2)),
            (2, q(2, 1, 0, 1, 2), Some(0)),
            (2, q(0, 1, 1, 1, 2), Some(0)),
            (2, q(1, 1, 0, 1, 2), None),
            (1, q(1, 1, 0, 1, 1), None),
            (1, q(0, 1, 1, 1, 1), None),
            (1, q(0, 1, 2, 1, 1), Some(0)),
        ];
        for (d, z, steps) in cases {
            assert_eq!(minimal_lift(&z).map(|t| t.steps), steps, "d = {d}, z = {z}");
        }
    }

    #[test]
    fn context_generators() {
        for d in SUPPORTED_D {
            let ctx = build_context(d).unwrap();
            for m in [&ctx.i0, &ctx.r1, &ctx.t0, &ctx.t1.matrix, &ctx.t2.matrix] {
                assert!(exact_su21_check(m));
            }
            assert!(!exact_entries_in_od(&ctx.t0));
            assert!(pi_star(&ctx.t0).unwrap().is_identity());
        }
        assert!(matches!(build_context(5), Err(GeomError::Unsupported(_))));
        let ctx = build_context(2).unwrap();
        assert_eq!(ctx.t2.z, QuadFieldScalar::root(2));
        assert!(exact_entries_in_od(&ctx.t2.matrix));
        let ctx = build_context(7).unwrap();
        assert_eq!(ctx.t1.z, QuadFieldScalar::one(7));
        assert_eq!(ctx.t2.z, QuadFieldScalar::root(7));
    }

    #[test]
    fn pi_star_examples() {
        let d = 7;
        let tr = Translation::new(q(1, 2, 1, 2, d), 1);
        let map = pi_star(&tr.matrix).unwrap();
        assert_eq!(map.rotation, QuadFieldScalar::one(d));
        assert_eq!(map.shift, tr.z);
        let ctx = build_context(d).unwrap();
        let conj = &(&ctx.r1 * &tr.matrix) * &ctx.r1;
        let m = pi_star(&conj).unwrap();
        assert_eq!(m.shift, -&tr.z);
        let m = pi_star(&(&ctx.r1 * &tr.matrix)).unwrap();
        assert_eq!(m.rotation, QuadFieldScalar::int(-1, d));
        assert_eq!(m.shift, -&tr.z);
        assert!(pi_star(&ctx.i0).is_err());
        let two = ExactMatrix::diagonal(
            d,
            [
                QuadFieldScalar::one(d),
                QuadFieldScalar::int(2, d),
                QuadFieldScalar::one(d),
            ],
        );
        assert!(matches!(pi_star(&two), Err(GeomError::Unsupported(_))));
    }

    #[test]
    fn commutator_powers() {
        let expect = [
            (1, 16, Some(4)),
            (2, 8, Some(4)),
            (3, 4, None),
            (7, 4, None),
            (11, 4, None),
        ];
        for (d, k, stated) in expect {
            let ctx = build_context(d).unwrap();
            let rep = verify_commutator_relations(&ctx).unwrap();
            assert!(
                rep.checks.iter().all(Check::passed),
                "d = {d}: {:?}",
                rep.checks
            );
            assert_eq!(rep.powers[0].measured_k, Some(k));
            assert_eq!(rep.powers[0].predicted_k, k);
            assert_eq!(rep.powers[0].stated_k, stated);
            if d % 4 == 3 {
                assert_eq!(rep.powers[1].measured_k, Some(2));
                assert_eq!(rep.powers[1].stated_k, Some(1));
            }
        }
    }

    #[test]
    fn sigma_family() {
        let ctx = build_context(2).unwrap();
        let s = &ctx.sigmas;
        assert!((&s[4] * &s[4].conj()).is_identity());
        let p = &s[1] * &s[2].conj();
        assert!(exact_su21_check(&p) && exact_entries_in_od(&p));
        for d in SUPPORTED_D {
            let ctx = build_context(d).unwrap();
            let checks = verify_sigma_family(&ctx).unwrap();
            let bad: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
            assert!(bad.is_empty(), "d = {d}: {bad:?}");
        }
    }

    #[test]
    fn certificates() {
        for d in SUPPORTED_D {
            let cert = certify_reflective(d).unwrap();
            assert!(cert.all_pass(), "d = {d}: {:?}", cert.failures());
            assert_eq!(cert.to_json(), certify_reflective(d).unwrap().to_json());
        }
        assert_eq!(certify_reflective(3).unwrap().index_claim, 2);
        assert_eq!(certify_reflective(2).unwrap().index_claim, 4);
        assert_eq!(certify_reflective(1).unwrap().index_claim, 8);
        assert!(certify_reflective(5).is_err());
        let json: serde_json::Value =
            serde_json::from_str(&certify_reflective(7).unwrap().to_json()).unwrap();
        assert_eq!(json["d"], 7);
        assert_eq!(json["checks"][0]["status"], "pass");
    }
}
