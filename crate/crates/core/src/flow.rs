//! The vector field `Y(j) = (j₁³j₂ − j₂j₁³, 0)` and its flow.
//!
//! `Y` is tangent to every level set of the trace invariants, so its flow
//! lines are isospectral families; along them `q = tr(j₁²j₂²)` moves at rate
//! `dq(Y)`. Integration is fixed-step RK4 with the invariant drift recorded
//! at every stored state.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::ric_v;
use crate::error::{Error, Result};
use crate::invariants::{dq_along_y, invariant_table, q_poly, InvariantTable};
use crate::skew::{JMap, SkewMatrix};

/// `Y(j)`. The first component is skew up to rounding and is projected.
pub fn y_field(j: &JMap) -> Result<JMap> {
    let (j1, j2) = j.as_pair()?;
    let (x, y) = (j1.as_matrix(), j2.as_matrix());
    let x3 = x * x * x;
    let d = &x3 * y - y * &x3;
    let first = SkewMatrix::project(d)?;
    JMap::pair(first, SkewMatrix::zeros(j.m()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowMethod {
    Rk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub j: JMap,
}

/// A flow line sampled at every step, with invariant drift diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    /// Strictly increasing in `t`.
    pub states: Vec<FlowState>,
    /// Keys of the tracked invariants, in the order of each drift row.
    pub drift_keys: Vec<(usize, usize)>,
    /// `drift[i][k] = |p_k(j(tᵢ)) − p_k(j(0))|`.
    pub drift: Vec<Vec<f64>>,
    pub q_series: Vec<(f64, f64)>,
    pub ric_norm_series: Vec<(f64, f64)>,
    pub step_size: f64,
    pub method: FlowMethod,
    pub drift_bound: f64,
    /// Some drift exceeded `drift_bound`.
    pub degraded: bool,
    /// Largest skew re-projection correction relative to the state norm.
    pub max_skew_correction: f64,
}

impl FlowTrajectory {
    pub fn max_drift_at(&self, i: usize) -> f64 {
        self.drift[i].iter().copied().fold(0.0, f64::max)
    }

    pub fn max_drift(&self) -> f64 {
        (0..self.states.len())
            .map(|i| self.max_drift_at(i))
            .fold(0.0, f64::max)
    }

    pub fn first(&self) -> &FlowState {
        &self.states[0]
    }

    pub fn last(&self) -> &FlowState {
        self.states
            .last()
            .expect("trajectory has at least one state")
    }

    /// Index of the state at `t`, if one was stored (exact match).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.states.iter().position(|s| s.t == t)
    }

    /// CSV with header `t,q,ric_norm_sq,max_drift`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,q,ric_norm_sq,max_drift\n");
        for i in 0..self.states.len() {
            writeln!(
                out,
                "{},{},{},{}",
                self.states[i].t,
                self.q_series[i].1,
                self.ric_norm_series[i].1,
                self.max_drift_at(i)
            )
            .unwrap();
        }
        out
    }
}

/// One RK4 step; returns the unprojected first component and the projected state.
fn rk4_step(j: &JMap, h: f64) -> Result<(DMatrix<f64>, JMap)> {
    let k1 = y_field(j)?;
    let k2 = y_field(&j.axpy(0.5 * h, &k1)?)?;
    let k3 = y_field(&j.axpy(0.5 * h, &k2)?)?;
    let k4 = y_field(&j.axpy(h, &k3)?)?;
    let mut d = k1.component(0).as_matrix().clone();
    d += k2.component(0).as_matrix() * 2.0;
    d += k3.component(0).as_matrix() * 2.0;
    d += k4.component(0).as_matrix();
    let raw = j.component(0).as_matrix() + d * (h / 6.0);
    let next = JMap::pair(SkewMatrix::project(raw.clone())?, j.component(1).clone())?;
    Ok((raw, next))
}

/// Integrates `j′ = Y(j)` from `j0` at `t = 0` to `t_end` (either sign) with
/// steps of at most `dt`. The step is shrunk so the last state lands on
/// `t_end` exactly.
pub fn integrate_flow(j0: &JMap, t_end: f64, dt: f64, drift_bound: f64) -> Result<FlowTrajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!(
            "step size must be positive, got {dt}"
        )));
    }
    if !t_end.is_finite() {
        return Err(Error::Domain(format!("t_end must be finite, got {t_end}")));
    }
    if !(drift_bound > 0.0) {
        return Err(Error::Domain(format!(
            "drift bound must be positive, got {drift_bound}"
        )));
    }
    j0.as_pair()?;
    if !j0.is_finite() {
        return Err(Error::Domain("initial map has non-finite entries".into()));
    }
    let steps = (t_end.abs() / dt).ceil() as usize;
    let h = if steps == 0 {
        0.0
    } else {
        t_end / steps as f64
    };

    let mut path = Vec::with_capacity(steps + 1);
    path.push(FlowState {
        t: 0.0,
        j: j0.clone(),
    });
    let mut max_skew_correction = 0.0f64;
    let mut current = j0.clone();
    for n in 1..=steps {
        let t = if n == steps { t_end } else { n as f64 * h };
        let (raw, next) = rk4_step(&current, h)?;
        if !next.is_finite() || next.norm() > 1e150 {
            return Err(Error::Divergence {
                t,
                last_good: Box::new(current),
            });
        }
        let correction = (&raw - next.component(0).as_matrix()).norm();
        max_skew_correction =
            max_skew_correction.max(correction / next.norm().max(f64::MIN_POSITIVE));
        path.push(FlowState { t, j: next.clone() });
        current = next;
    }
    if t_end < 0.0 {
        path.reverse();
    }
    finish(path, h.abs(), drift_bound, j0, max_skew_correction)
}

fn finish(
    states: Vec<FlowState>,
    step_size: f64,
    drift_bound: f64,
    j0: &JMap,
    max_skew_correction: f64,
) -> Result<FlowTrajectory> {
    let reference = invariant_table(j0)?;
    let drift_keys = reference.keys();
    let rows = states
        .par_iter()
        .map(|s| -> Result<(Vec<f64>, f64, f64)> {
            let table = invariant_table(&s.j)?;
            Ok((
                drift_row(&reference, &table),
                q_poly(&s.j)?,
                ric_v(&s.j).norm_squared(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut drift = Vec::with_capacity(states.len());
    let mut q_series = Vec::with_capacity(states.len());
    let mut ric_norm_series = Vec::with_capacity(states.len());
    for (s, (row, q, rn)) in states.iter().zip(rows) {
        drift.push(row);
        q_series.push((s.t, q));
        ric_norm_series.push((s.t, rn));
    }
    let degraded = drift.iter().flatten().any(|d| !(*d <= drift_bound));
    Ok(FlowTrajectory {
        states,
        drift_keys,
        drift,
        q_series,
        ric_norm_series,
        step_size,
        method: FlowMethod::Rk4,
        drift_bound,
        degraded,
        max_skew_correction,
    })
}

fn drift_row(reference: &InvariantTable, table: &InvariantTable) -> Vec<f64> {
    reference
        .entries
        .iter()
        .zip(&table.entries)
        .map(|(a, b)| (a.value - b.value).abs())
        .collect()
}

/// Flow line through `j0` on `[t_start, t_end]` with `t_start ≤ 0 ≤ t_end`,
/// integrating both directions from `t = 0`.
pub fn integrate_family(
    j0: &JMap,
    t_start: f64,
    t_end: f64,
    dt: f64,
    drift_bound: f64,
) -> Result<FlowTrajectory> {
    if !(t_start <= 0.0 && 0.0 <= t_end) {
        return Err(Error::Domain(format!(
            "need t_start ≤ 0 ≤ t_end, got [{t_start}, {t_end}]"
        )));
    }
    let (back, fwd) = rayon::join(
        || integrate_flow(j0, t_start, dt, drift_bound),
        || integrate_flow(j0, t_end, dt, drift_bound),
    );
    let (back, fwd) = (back?, fwd?);
    let mut states = back.states;
    states.pop(); // t = 0 is the first state of the forward run
    states.extend(fwd.states);
    let corr = back.max_skew_correction.max(fwd.max_skew_correction);
    let step = if fwd.step_size > 0.0 {
        fwd.step_size
    } else {
        back.step_size
    };
    finish(states, step, drift_bound, j0, corr)
}

/// Membership in the generic set: `|dq(Y)| > tol (1 + ‖j₁‖⁴‖j₂‖³)`.
pub fn genericity_check(j: &JMap, tol: f64) -> Result<bool> {
    let (j1, j2) = j.as_pair()?;
    let scale = j1.norm().powi(4) * j2.norm().powi(3);
    Ok(dq_along_y(j)?.abs() > tol * (1.0 + scale))
}
