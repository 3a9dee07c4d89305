use std::f64::consts::TAU;
use std::path::Path;

use chyp::decomp::{decomposability, Verdict};
use chyp::heisenberg::{
    boundary_action, contact_form_eval, fan_leaf, heis_mul, invariant_fan, is_infinite_rcircle,
    rcircle_fan_orthogonal, Fan, HeisPoint, InfiniteRCircle,
};
use chyp::hermlin::{locate, HermitianForm, Location, Model, Tolerance, Vec3, C64};
use chyp::invariants::{
    brehm_shape, cartan, cross_ratio, cross_ratio_reality, distance, normalized_triple_product,
    swapping_reflection_exists, toledo_once_punctured_torus, triple_ratio, Reality, RealityCase,
};
use chyp::isometry::{classify, goldman_f, HoloIsometry, Tag};
use chyp::picard::certify_reflective;
use chyp::{sample, GeomError};
use serde_json::{json, Value};

use crate::io::{
    parse_heis, parse_json, read_json, AntiIsometryJson, FanJson, HeisJson, IsometryJson, LineJson,
    TupleJson,
};
use crate::{Failure, Outcome};

fn lower(s: &str) -> String {
    s.to_ascii_lowercase()
}

fn load_isometry(path: &Path, tol: &Tolerance) -> Result<HoloIsometry, Failure> {
    let file: IsometryJson = read_json(path)?;
    Ok(HoloIsometry::new(file.form, file.matrix()?, tol)?)
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

pub fn classify_cmd(path: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let a = load_isometry(path, tol)?;
    let cls = classify(&a, tol)?;
    let tr = a.trace();
    let out = json!({
        "tag": lower(cls.tag.as_str()),
        "trace": tr,
        "f": goldman_f(tr),
        "eigenvalues": cls.eigenvalues,
        "rotation_angles": cls.rotation_angles,
        "translation_length": cls.translation_length,
        "fixed_points": cls.fixed_points.iter().map(|p| [p[0], p[1], p[2]]).collect::<Vec<_>>(),
    });
    Ok(Outcome::ok(pretty(&out)))
}

pub fn decompose_cmd(a: &Path, b: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let a = load_isometry(a, tol)?;
    let b = load_isometry(b, tol)?;
    let r = decomposability(&a, &b, tol)?;
    let witness = r.witness.as_ref().map(|w| {
        json!({
            "sigma1": AntiIsometryJson::from_anti(&w.sigma1),
            "sigma2": AntiIsometryJson::from_anti(&w.sigma2),
            "sigma3": AntiIsometryJson::from_anti(&w.sigma3),
        })
    });
    let out = json!({
        "verdict": r.verdict.as_str(),
        "rationale": r.rationale.map(|x| x.as_str()),
        "detail": r.detail,
        "witness": witness,
    });
    let code = match r.verdict {
        Verdict::Decomposable => 0,
        Verdict::NotDecomposable => 1,
        Verdict::Ambiguous => 2,
    };
    Ok(Outcome {
        out: pretty(&out),
        code,
    })
}

fn reality_json(r: Reality) -> Value {
    let case = |c: RealityCase| match c {
        RealityCase::Equidistant => "equidistant",
        RealityCase::CocyclicNonSeparating => "cocyclic_non_separating",
        RealityCase::CocyclicSeparating => "cocyclic_separating",
    };
    match r {
        Reality::PositiveReal(c) => json!({"sign": "positive_real", "case": case(c)}),
        Reality::NegativeReal(c) => json!({"sign": "negative_real", "case": case(c)}),
        Reality::NonReal => json!({"sign": "non_real"}),
    }
}

/// Invariants that apply to the given number and kind of points; an entry is
/// null when its preconditions fail.
pub fn invariants_cmd(path: &Path, tol: &Tolerance) -> Result<Outcome, Failure> {
    let file: TupleJson = read_json(path)?;
    let f = file.form;
    let p = file.vectors();
    let locs = p
        .iter()
        .map(|x| locate(f, x, tol))
        .collect::<chyp::Result<Vec<_>>>()?;
    let all = |l: Location| locs.iter().all(|x| *x == l);
    let ok = |r: chyp::Result<Value>| r.unwrap_or(Value::Null);
    let mut out = serde_json::Map::new();
    out.insert("locations".into(), json!(locs));
    match p.len() {
        2 => {
            let d = all(Location::Interior).then(|| distance(f, &p[0], &p[1]));
            out.insert("distance".into(), json!(d));
        }
        3 => {
            let r = triple_ratio(f, &p[0], &p[1], &p[2]).map(|x| json!(x));
            out.insert("triple_ratio".into(), ok(r));
            let r = cartan(f, &p[0], &p[1], &p[2], tol).map(|x| json!(x));
            out.insert("cartan".into(), ok(r));
            if all(Location::Interior) {
                let t = normalized_triple_product(f, &p[0], &p[1], &p[2]);
                out.insert("normalized_triple_product".into(), json!(t));
                let r = brehm_shape(f, &p[0], &p[1], &p[2], tol).map(|x| json!(x));
                out.insert("brehm_shape".into(), ok(r));
            }
        }
        4 => {
            let q: [&Vec3; 4] = [&p[0], &p[1], &p[2], &p[3]];
            let r = cross_ratio(f, q[0], q[1], q[2], q[3]).map(|x| json!(x));
            out.insert("cross_ratio".into(), ok(r));
            let r = cross_ratio_reality(f, q, tol).map(reality_json);
            out.insert("reality".into(), ok(r));
            let r = swapping_reflection_exists(f, q, tol).map(|x| json!(x));
            out.insert("swapping_reflection".into(), ok(r));
            let r = toledo_once_punctured_torus(f, q, tol).map(|x| json!(x));
            out.insert("toledo".into(), ok(r));
        }
        n => {
            return Err(Failure::Invalid(format!(
                "expected 2, 3 or 4 points, found {n}"
            )))
        }
    }
    Ok(Outcome::ok(pretty(&Value::Object(out))))
}

#[derive(Debug, Clone, clap::Subcommand)]
pub enum HeisOp {
    /// Group product of two points
    Mul { a: String, b: String },
    /// Group inverse
    Inverse { a: String },
    /// Contact form at a point on a tangent `[dx, dy, dt]`
    Contact { at: String, tangent: String },
    /// Image of a point under an isometry file fixing infinity
    Act {
        isometry: std::path::PathBuf,
        point: String,
    },
    /// Invariant fan of a 3-step unipotent isometry file
    Fan { isometry: std::path::PathBuf },
    /// Leaf of a fan `{"w": [re, im], "k": k}` through height `t0`
    Leaf { fan: String, t0: f64 },
    /// Whether a line `{"base", "direction", "slope"}` is an infinite R-circle
    IsRcircle { line: String },
    /// Whether a line meets the boundary of a fan orthogonally
    Orthogonal { line: String, fan: String },
}

fn parse_fan(text: &str) -> Result<Fan, Failure> {
    let f: FanJson = parse_json(text)?;
    Ok(Fan::new(f.w, f.k)?)
}

fn parse_line(text: &str) -> Result<InfiniteRCircle, Failure> {
    Ok(parse_json::<LineJson>(text)?.into())
}

pub fn heisenberg_cmd(op: &HeisOp, tol: &Tolerance) -> Result<Outcome, Failure> {
    let point = |p: HeisPoint| json!(HeisJson::from(p));
    let out = match op {
        HeisOp::Mul { a, b } => point(heis_mul(parse_heis(a)?, parse_heis(b)?)),
        HeisOp::Inverse { a } => point(parse_heis(a)?.inverse()),
        HeisOp::Contact { at, tangent } => {
            let [dx, dy, dt]: [f64; 3] = parse_json(tangent)?;
            json!(contact_form_eval(parse_heis(at)?, (dx, dy, dt)))
        }
        HeisOp::Act { isometry, point: p } => {
            let g = load_isometry(isometry, tol)?;
            point(boundary_action(&g, parse_heis(p)?)?)
        }
        HeisOp::Fan { isometry } => {
            let g = load_isometry(isometry, tol)?;
            let fan = invariant_fan(&g, tol)?;
            if fan.conjugator.is_some() {
                return Err(Failure::Invalid("the parabolic does not fix q_inf".into()));
            }
            json!(FanJson::from(&fan))
        }
        HeisOp::Leaf { fan, t0 } => json!(LineJson::from(fan_leaf(&parse_fan(fan)?, *t0)?)),
        HeisOp::IsRcircle { line } => json!(is_infinite_rcircle(&parse_line(line)?, tol)?),
        HeisOp::Orthogonal { line, fan } => {
            json!(rcircle_fan_orthogonal(
                &parse_line(line)?,
                &parse_fan(fan)?,
                tol
            )?)
        }
    };
    Ok(Outcome::ok(
        serde_json::to_string(&out).expect("values serialize"),
    ))
}

pub fn picard_cmd(d: u32) -> Result<Outcome, Failure> {
    let cert = certify_reflective(d).map_err(|e| match e {
        GeomError::Unsupported(m) => Failure::Usage(m),
        other => other.into(),
    })?;
    Ok(Outcome {
        out: cert.to_json(),
        code: if cert.all_pass() { 0 } else { 1 },
    })
}

/// A point of `f = 0` on the ray at angle `phi`, by bisection on `[0, 3]`.
pub fn deltoid_point(phi: f64) -> C64 {
    let ray = C64::from_polar(1.0, phi);
    let f = |r: f64| goldman_f(ray * r);
    let (mut lo, mut hi) = (0.0f64, 3.0f64);
    if f(hi) == 0.0 {
        return ray * hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    ray * r
}

pub fn deltoid_cmd(n: usize, csv: bool) -> Result<Outcome, Failure> {
    if n < 8 {
        return Err(Failure::Usage(format!("--n must be at least 8, got {n}")));
    }
    let rows: Vec<(f64, C64, f64)> = (0..n)
        .map(|k| {
            let phi = TAU * k as f64 / n as f64;
            let z = deltoid_point(phi);
            (phi, z, goldman_f(z))
        })
        .collect();
    let out = if csv {
        let mut s = String::from("phi,re,im,f_residual\n");
        for (phi, z, r) in &rows {
            let cells = [*phi, z.re, z.im, *r].map(|x| json!(x).to_string());
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s.trim_end().to_string()
    } else {
        let v: Vec<Value> = rows
            .iter()
            .map(|(phi, z, r)| json!({"phi": phi, "re": z.re, "im": z.im, "f_residual": r}))
            .collect();
        pretty(&json!(v))
    };
    Ok(Outcome::ok(out))
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum SampleKind {
    Identity,
    RegularElliptic,
    ComplexReflection,
    ComplexReflectionInPoint,
    Unipotent2Step,
    Unipotent3Step,
    ScrewParabolic,
    Loxodromic,
    /// A random element
    Random,
    /// A random real reflection
    Reflection,
}

impl SampleKind {
    fn tag(self) -> Option<Tag> {
        Some(match self {
            SampleKind::Identity => Tag::Identity,
            SampleKind::RegularElliptic => Tag::RegularElliptic,
            SampleKind::ComplexReflection => Tag::ComplexReflection,
            SampleKind::ComplexReflectionInPoint => Tag::ComplexReflectionInPoint,
            SampleKind::Unipotent2Step => Tag::Unipotent2Step,
            SampleKind::Unipotent3Step => Tag::Unipotent3Step,
            SampleKind::ScrewParabolic => Tag::ScrewParabolic,
            SampleKind::Loxodromic => Tag::Loxodromic,
            SampleKind::Random | SampleKind::Reflection => return None,
        })
    }
}

pub fn sample_cmd(kind: SampleKind, model: Model, seed: u64) -> Result<Outcome, Failure> {
    let mut rng = sample::rng(seed);
    let form = HermitianForm::new(model);
    let out = match (kind, kind.tag()) {
        (SampleKind::Reflection, _) => json!(AntiIsometryJson::from_anti(
            &sample::real_reflection(&mut rng, form)
        )),
        (_, Some(tag)) => {
            let a = sample::class_representative(&mut rng, tag, form)
                .ok_or_else(|| Failure::Invalid(format!("no representative for {tag}")))?;
            json!(IsometryJson::from_isometry(&a))
        }
        (_, None) => json!(IsometryJson::from_isometry(&sample::random_isometry(
            &mut rng, form
        ))),
    };
    Ok(Outcome::ok(pretty(&out)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deltoid_rays() {
        let z = deltoid_point(0.0);
        assert!((z - C64::new(3.0, 0.0)).norm() < 1e-12);
        let z = deltoid_point(std::f64::consts::PI);
        assert!((z - C64::new(-1.0, 0.0)).norm() < 1e-12);
        for k in 0..360 {
            let z = deltoid_point(k as f64 * TAU / 360.0);
            assert!(goldman_f(z).abs() <= 1e-8, "phi index {k}");
            assert!(z.norm() <= 3.0 + 1e-9);
        }
    }

    #[test]
    fn deltoid_needs_eight() {
        assert!(matches!(deltoid_cmd(7, true), Err(Failure::Usage(_))));
        let out = deltoid_cmd(8, true).unwrap().out;
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "phi,re,im,f_residual");
        assert_eq!(lines.len(), 9);
    }

    #[test]
    fn heisenberg_product() {
        let op = HeisOp::Mul {
            a: "[1,0]".into(),
            b: "[i,0]".into(),
        };
        let out = heisenberg_cmd(&op, &Tolerance::default()).unwrap().out;
        let p: HeisJson = parse_json(&out).unwrap();
        assert_eq!(p.z, C64::new(1.0, 1.0));
        assert_eq!(p.t, -2.0);
    }
}
