//! Concrete maps: the two-parameter diagonal/off-diagonal family, the explicit
//! one-parameter family in `so(5)`, the generic starting point for the flow,
//! and base group presets.
//!
//! Entries are addressable by id strings of the form `id@key=value,...`, e.g.
//! `ex4.3@t=0.25` or `ex2.5@a1=1,a2=2,t=0.2`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curvature::BaseGroupData;
use crate::error::{Error, Result};
use crate::skew::{JMap, SkewMatrix};

/// Radicands down to this value are treated as zero.
pub const RADICAND_CLAMP: f64 = -1e-12;

/// Parameters of the family `j_{a,b}`: `a` rotates two planes with speeds
/// `a1 < a2`, `b` couples the coordinates 1, 3, 5.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPlaneParams {
    pub a1: f64,
    pub a2: f64,
    pub b12: f64,
    pub b13: f64,
    pub b23: f64,
}

impl TwoPlaneParams {
    pub fn new(a1: f64, a2: f64, b12: f64, b13: f64, b23: f64) -> Result<Self> {
        let p = TwoPlaneParams {
            a1,
            a2,
            b12,
            b13,
            b23,
        };
        if ![a1, a2, b12, b13, b23].iter().all(|x| x.is_finite()) {
            return Err(Error::Domain("parameters must be finite".into()));
        }
        if !(0.0 < a1 && a1 < a2) {
            return Err(Error::Domain(format!(
                "need 0 < a1 < a2, got a1 = {a1}, a2 = {a2}"
            )));
        }
        if b12 < 0.0 || b13 < 0.0 || b23 < 0.0 {
            return Err(Error::Domain("b entries must be nonnegative".into()));
        }
        Ok(p)
    }

    /// True when the deformation interval has nonzero length.
    pub fn nondegenerate(&self) -> bool {
        self.b23 > 0.0 || (self.b12 > 0.0 && self.b13 > 0.0)
    }

    /// `[max(−b12²/(a2²−a1²), −b13²/a1²), b23²/a2²]`
    pub fn interval(&self) -> (f64, f64) {
        let (a1s, a2s) = (self.a1 * self.a1, self.a2 * self.a2);
        let lo = (-self.b12 * self.b12 / (a2s - a1s)).max(-self.b13 * self.b13 / a1s);
        (lo, self.b23 * self.b23 / a2s)
    }

    /// `(b12(t), b13(t), b23(t))`.
    pub fn b_at(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (a1s, a2s) = (self.a1 * self.a1, self.a2 * self.a2);
        let r12 = self.b12 * self.b12 + t * (a2s - a1s);
        let r13 = self.b13 * self.b13 + t * a1s;
        let r23 = self.b23 * self.b23 - t * a2s;
        Ok((
            clamped_sqrt("b12(t)", r12, t)?,
            clamped_sqrt("b13(t)", r13, t)?,
            clamped_sqrt("b23(t)", r23, t)?,
        ))
    }

    pub fn a_matrix(&self) -> SkewMatrix {
        SkewMatrix::from_upper(5, |i, k| match (i, k) {
            (0, 1) => -self.a1,
            (2, 3) => -self.a2,
            _ => 0.0,
        })
    }

    pub fn b_matrix(b12: f64, b13: f64, b23: f64) -> SkewMatrix {
        SkewMatrix::from_upper(5, |i, k| match (i, k) {
            (0, 2) => b12,
            (0, 4) => b13,
            (2, 4) => b23,
            _ => 0.0,
        })
    }
}

fn clamped_sqrt(name: &str, radicand: f64, t: f64) -> Result<f64> {
    if radicand.is_nan() || radicand < RADICAND_CLAMP {
        return Err(Error::Domain(format!(
            "radicand of {name} is negative ({radicand:e}) at t = {t}"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPlanePair {
    pub j_ref: JMap,
    pub j_t: JMap,
    pub interval: (f64, f64),
}

/// `j_{a,b}` and `j_{a,b(t)}`.
pub fn two_plane_family(params: &TwoPlaneParams, t: f64) -> Result<TwoPlanePair> {
    let interval = params.interval();
    let (b12, b13, b23) = params.b_at(t)?;
    let a = params.a_matrix();
    let j_ref = JMap::pair(
        a.clone(),
        TwoPlaneParams::b_matrix(params.b12, params.b13, params.b23),
    )?;
    let j_t = JMap::pair(a, TwoPlaneParams::b_matrix(b12, b13, b23))?;
    Ok(TwoPlanePair {
        j_ref,
        j_t,
        interval,
    })
}

/// Least-squares line through `t ↦ det(a² + b(t)²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn two_plane_det(params: &TwoPlaneParams, t: f64) -> Result<f64> {
    let ex = two_plane_family(params, t)?;
    let a = ex.j_t.component(0).as_matrix();
    let b = ex.j_t.component(1).as_matrix();
    Ok((a * a + b * b).determinant())
}

pub fn two_plane_det_check(params: &TwoPlaneParams, t_samples: &[f64]) -> Result<DetFit> {
    if t_samples.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 samples, got {}",
            t_samples.len()
        )));
    }
    let ys = t_samples
        .iter()
        .map(|&t| two_plane_det(params, t))
        .collect::<Result<Vec<_>>>()?;
    let n = t_samples.len() as f64;
    let tm = t_samples.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let sxx: f64 = t_samples.iter().map(|t| (t - tm).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("samples must not all coincide".into()));
    }
    let sxy: f64 = t_samples
        .iter()
        .zip(&ys)
        .map(|(t, y)| (t - tm) * (y - ym))
        .sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let max_residual = t_samples
        .iter()
        .zip(&ys)
        .map(|(t, y)| (y - intercept - slope * t).abs())
        .fold(0.0, f64::max);
    Ok(DetFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Closed domain `[½(1 − √5), ½(3 − √5)]` of [`so5_family`].
pub fn so5_family_domain() -> (f64, f64) {
    let r5 = 5f64.sqrt();
    (0.5 * (1.0 - r5), 0.5 * (3.0 - r5))
}

/// The explicit family in `so(5)` with fixed `j₂` and nonconstant `‖Ric_v‖²`.
pub fn so5_family(t: f64) -> Result<JMap> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} is not finite")));
    }
    let denom = 1.0 - 2.0 * t;
    if denom <= 0.0 {
        return Err(Error::Domain(format!("1 − 2t must be positive, t = {t}")));
    }
    let t2 = t * t;
    let phi = clamped_sqrt("phi", (t2 * t2 - 3.0 * t2 + 1.0) / denom, t)?;
    let psi = clamped_sqrt(
        "psi",
        (-t2 * t2 + 4.0 * t2 * t - 3.0 * t2 - 2.0 * t + 1.0) / denom,
        t,
    )?;
    let j1 = SkewMatrix::from_upper(5, |i, k| match (i, k) {
        (0, 2) => -t,
        (1, 3) => t - 1.0,
        (2, 4) => -phi,
        (3, 4) => -psi,
        _ => 0.0,
    });
    JMap::pair(j1, rotation_pair())
}

/// `e₁∧e₂ + e₃∧e₄` with entries `(0,1) = (2,3) = 1`.
fn rotation_pair() -> SkewMatrix {
    SkewMatrix::from_upper(5, |i, k| {
        if (i, k) == (0, 1) || (i, k) == (2, 3) {
            1.0
        } else {
            0.0
        }
    })
}

/// Starting point of the flow with `dq(Y) = 2`.
pub fn generic_start_pair() -> JMap {
    let j1 = SkewMatrix::from_upper(5, |i, k| match (i, k) {
        (0, 3) | (1, 3) | (1, 4) => 1.0,
        _ => 0.0,
    });
    JMap::pair(j1, rotation_pair()).expect("5x5 components")
}

pub const BASE_PRESETS: &[&str] = &["su2xsu2-unit"];

pub fn base_preset(name: &str) -> Result<BaseGroupData> {
    match name {
        "su2xsu2-unit" => Ok(BaseGroupData::su2_x_su2_unit()),
        _ => Err(Error::UnknownPreset(name.to_string())),
    }
}

pub const CATALOG_IDS: &[&str] = &["ex2.5", "ex4.3", "lemma4.2"];

/// A parsed catalog address.
#[derive(Clone, Debug, PartialEq)]
pub enum CatalogEntry {
    /// `ex2.5`, resolving to `j_{a,b(t)}`.
    TwoPlane {
        params: TwoPlaneParams,
        t: f64,
    },
    So5Family {
        t: f64,
    },
    GenericStart,
}

impl CatalogEntry {
    pub fn parse(spec: &str) -> Result<Self> {
        let (id, rest) = match spec.split_once('@') {
            Some((id, rest)) => (id, Some(rest)),
            None => (spec, None),
        };
        let err = |reason: String| Error::Catalog {
            id: spec.to_string(),
            reason,
        };
        let mut params = BTreeMap::new();
        if let Some(rest) = rest {
            for item in rest.split(',') {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, got {item:?}")))?;
                let value: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("{k}: not a number: {v:?}")))?;
                if !value.is_finite() {
                    return Err(err(format!("{k}: not finite")));
                }
                if params.insert(k.trim().to_string(), value).is_some() {
                    return Err(err(format!("duplicate key {k}")));
                }
            }
        }
        let allowed: &[&str] = match id {
            "ex2.5" => &["a1", "a2", "b12", "b13", "b23", "t"],
            "ex4.3" => &["t"],
            "lemma4.2" => &[],
            _ => {
                return Err(err(format!(
                    "unknown id; known: {}",
                    CATALOG_IDS.join(", ")
                )))
            }
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(err(format!("unknown parameter {k}")));
        }
        let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
        Ok(match id {
            "ex2.5" => CatalogEntry::TwoPlane {
                params: TwoPlaneParams::new(
                    get("a1", 1.0),
                    get("a2", 2.0),
                    get("b12", 1.0),
                    get("b13", 1.0),
                    get("b23", 1.0),
                )?,
                t: get("t", 0.0),
            },
            "ex4.3" => CatalogEntry::So5Family { t: get("t", 0.0) },
            _ => CatalogEntry::GenericStart,
        })
    }

    pub fn build(&self) -> Result<JMap> {
        match self {
            CatalogEntry::TwoPlane { params, t } => Ok(two_plane_family(params, *t)?.j_t),
            CatalogEntry::So5Family { t } => so5_family(*t),
            CatalogEntry::GenericStart => Ok(generic_start_pair()),
        }
    }
}

/// Parses and builds a catalog address.
pub fn resolve(spec: &str) -> Result<JMap> {
    CatalogEntry::parse(spec)?.build()
}

/// `a² + b²` for a pair; handy for the similarity checks above.
pub fn square_sum(j: &JMap) -> DMatrix<f64> {
    j.components()
        .iter()
        .map(|c| c.as_matrix() * c.as_matrix())
        .fold(DMatrix::zeros(j.m(), j.m()), |acc, x| acc + x)
}
