//! File formats. Complex scalars are `[re, im]`, matrices are row-major
//! arrays of nine scalars and forms are `{"model": "ball" | "siegel"}`.

use std::path::Path;

use chyp::heisenberg::{Fan, HeisPoint, InfiniteRCircle};
use chyp::hermlin::{HermitianForm, Mat3, Vec3, C64};
use chyp::isometry::{AntiIsometry, HoloIsometry};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryJson {
    pub form: HermitianForm,
    pub lift: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntiIsometryJson {
    pub form: HermitianForm,
    pub souriau: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleJson {
    pub form: HermitianForm,
    pub points: Vec<[C64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeisJson {
    pub z: C64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanJson {
    pub w: C64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineJson {
    pub base: HeisJson,
    pub direction: C64,
    pub slope: f64,
}

pub fn matrix_from(entries: &[C64]) -> Result<Mat3, Failure> {
    if entries.len() != 9 {
        return Err(Failure::Malformed(format!(
            "a matrix needs 9 entries, found {}",
            entries.len()
        )));
    }
    Ok(Mat3::from_row_slice(entries))
}

pub fn matrix_to(m: &Mat3) -> Vec<C64> {
    // nalgebra stores columns; emit rows
    m.transpose().iter().copied().collect()
}

impl IsometryJson {
    pub fn from_isometry(a: &HoloIsometry) -> Self {
        IsometryJson {
            form: a.form,
            lift: matrix_to(&a.lift),
        }
    }

    pub fn matrix(&self) -> Result<Mat3, Failure> {
        matrix_from(&self.lift)
    }
}

impl AntiIsometryJson {
    pub fn from_anti(phi: &AntiIsometry) -> Self {
        AntiIsometryJson {
            form: phi.form,
            souriau: matrix_to(&phi.souriau),
        }
    }
}

impl TupleJson {
    pub fn vectors(&self) -> Vec<Vec3> {
        self.points
            .iter()
            .map(|p| Vec3::new(p[0], p[1], p[2]))
            .collect()
    }
}

impl From<HeisPoint> for HeisJson {
    fn from(p: HeisPoint) -> Self {
        HeisJson { z: p.z, t: p.t }
    }
}

impl From<HeisJson> for HeisPoint {
    fn from(p: HeisJson) -> Self {
        HeisPoint::new(p.z, p.t)
    }
}

impl From<&Fan> for FanJson {
    fn from(f: &Fan) -> Self {
        FanJson { w: f.w, k: f.k }
    }
}

impl From<InfiniteRCircle> for LineJson {
    fn from(l: InfiniteRCircle) -> Self {
        LineJson {
            base: l.base.into(),
            direction: l.direction,
            slope: l.slope,
        }
    }
}

impl From<LineJson> for InfiniteRCircle {
    fn from(l: LineJson) -> Self {
        InfiniteRCircle {
            base: l.base.into(),
            direction: l.direction,
            slope: l.slope,
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        Failure::Malformed(m) => Failure::Malformed(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Malformed(e.to_string()))
}

/// A Heisenberg point given as JSON `{"z": [re, im], "t": t}` or as the
/// shorthand `[z, t]` with `z` a complex literal such as `1-2i`.
pub fn parse_heis(text: &str) -> Result<HeisPoint, Failure> {
    if let Ok(p) = serde_json::from_str::<HeisJson>(text) {
        return Ok(p.into());
    }
    let bad = || Failure::Malformed(format!("not a Heisenberg point: {text}"));
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(bad)?;
    let (z, t) = inner.rsplit_once(',').ok_or_else(bad)?;
    let z: C64 = z.trim().parse().map_err(|_| bad())?;
    let t: f64 = t.trim().parse().map_err(|_| bad())?;
    Ok(HeisPoint::new(z, t))
}
