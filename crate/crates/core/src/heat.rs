//! Integrated curvature quantities entering the heat invariants `a₂⁰`, `a₂¹`.
//!
//! `c_s = ∫ scal²`, `c_Ric = ∫ ‖Ric‖²` and `c_R = ∫ ‖R‖²` over `(C, g_j)`.
//! `c_s` has a closed form through the sphere moments of `Ric_v`; `c_Ric` is
//! estimated by Monte-Carlo quadrature of the pointwise `‖Ric^{C,j}‖²`. For
//! isospectral pairs the differences of both are multiples of the difference
//! of `‖Ric_v‖²`, and `c_R` only ever appears as such a difference.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{check_unit, ric_v, scal_offset, BaseGroupData};
use crate::error::{Error, Result};
use crate::invariants::{is_isospectral, DEFAULT_ISO_TOL};
use crate::random::sphere_point_into;
use crate::skew::{trace_of_product, JMap};

/// Smallest accepted sample count for [`c_ric_quadrature`].
pub const MIN_QUADRATURE_SAMPLES: usize = 10_000;

/// Default absolute tolerance on `Δ‖Ric_v‖²` for the one-form verdict.
pub const DEFAULT_VERDICT_TOL: f64 = 1e-9;

/// Samples drawn per generator stream; fixes the reduction order.
const BLOCK: usize = 8192;

/// Volume of the round unit sphere `Sⁿ ⊂ ℝⁿ⁺¹`, `2π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn sphere_volume(n: usize) -> f64 {
    // vol(Sⁿ) = 2π/(n−1) · vol(Sⁿ⁻²)
    let mut v = if n % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut k = n % 2;
    while k < n {
        k += 2;
        v *= 2.0 * PI / (k - 1) as f64;
    }
    v
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(())
}

/// `∫_{S^{m−1}} ⟨Av, v⟩ dv = tr(A) vol(S^{m−1}) / m`.
pub fn moment1(a: &DMatrix<f64>) -> Result<f64> {
    check_square(a)?;
    let m = a.nrows();
    Ok(a.trace() * sphere_volume(m - 1) / m as f64)
}

/// `∫_{S^{m−1}} ⟨Av, v⟩² dv = (tr(A)² + ‖A‖² + ⟨A, Aᵀ⟩) vol(S^{m−1}) / (m(m+2))`.
pub fn moment2(a: &DMatrix<f64>) -> Result<f64> {
    check_square(a)?;
    let m = a.nrows();
    let tr = a.trace();
    let pair = trace_of_product(a, a); // ⟨A, Aᵀ⟩ = tr(A A)
    Ok((tr * tr + a.norm_squared() + pair) * sphere_volume(m - 1) / (m * (m + 2)) as f64)
}

/// `c_s(g_j) = vol(S) ∫_{S^{m−1}} (⟨Ric_v v, v⟩² − 2φ⟨Ric_v v, v⟩ + φ²) dv`
/// with `φ = scal_G + scal_S + (m−1)(m−2)`.
pub fn c_s_exact(j: &JMap, base: &BaseGroupData) -> f64 {
    let rv = ric_v(j);
    let phi = scal_offset(j, base);
    let vol = sphere_volume(j.m() - 1);
    let m1 = moment1(&rv).expect("ric_v is square");
    let m2 = moment2(&rv).expect("ric_v is square");
    base.vol_s * (m2 - 2.0 * phi * m1 + phi * phi * vol)
}

/// Pointwise `‖Ric^{C,j}‖²` at `(v, s)`, with everything that does not depend
/// on `v` precomputed.
pub struct RicciNormIntegrand {
    m: usize,
    r: usize,
    /// `jᵢ` row-major
    comps: Vec<Vec<f64>>,
    /// `Ric_v` row-major
    ric: Vec<f64>,
    /// `−¼ tr(jᵢ j_k)`
    ric_z: Vec<f64>,
    ric_h: Vec<f64>,
    ric_s_norm_sq: f64,
}

impl RicciNormIntegrand {
    pub fn new(j: &JMap, base: &BaseGroupData) -> Result<Self> {
        base.check_rank(j)?;
        let m = j.m();
        let r = j.r();
        let rv = ric_v(j);
        let c = j.components();
        Ok(RicciNormIntegrand {
            m,
            r,
            comps: c.iter().map(|a| a.to_row_major()).collect(),
            ric: (0..m * m).map(|k| rv[(k / m, k % m)]).collect(),
            ric_z: (0..r * r)
                .map(|k| -0.25 * trace_of_product(c[k / r].as_matrix(), c[k % r].as_matrix()))
                .collect(),
            ric_h: (0..r * r).map(|k| base.ric_h[(k / r, k % r)]).collect(),
            ric_s_norm_sq: base.ric_s_norm_sq,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Evaluates the seven groups of terms for a unit `v` (not checked).
    pub fn eval(&self, v: &[f64]) -> f64 {
        let (m, r) = (self.m, self.r);
        let shift = m as f64 - 2.0;
        // br[a·r + i] = ⟨jᵢ x_a, v⟩ = (jᵢᵀ v)_a ;  jv[i·m + a] = (jᵢ v)_a
        let mut br = vec![0.0; m * r];
        let mut jv = vec![0.0; r * m];
        for (i, c) in self.comps.iter().enumerate() {
            for row in 0..m {
                let vr = v[row];
                let mut acc = 0.0;
                for col in 0..m {
                    let x = c[row * m + col];
                    br[col * r + i] += x * vr;
                    acc += x * v[col];
                }
                jv[i * m + row] = acc;
            }
        }
        let rv: Vec<f64> = self
            .ric
            .chunks_exact(m)
            .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
            .collect();

        // Σ_{a,b} (⟨Ric x_a, x_b⟩ + ½⟨[x_a,v],[x_b,v]⟩ + (m−2)δ_ab)²
        let mut total = 0.0;
        for a in 0..m {
            for b in 0..m {
                let mut t = self.ric[a * m + b];
                t += 0.5 * (0..r).map(|i| br[a * r + i] * br[b * r + i]).sum::<f64>();
                if a == b {
                    t += shift;
                }
                total += t * t;
            }
        }
        // − 2 Σ_a (⟨Ric x_a, v⟩ + (m−2)⟨x_a, v⟩)²
        total -= 2.0 * (0..m).map(|a| (rv[a] + shift * v[a]).powi(2)).sum::<f64>();
        // + (⟨Ric v, v⟩ + (m−2))²
        let vrv: f64 = (0..m).map(|a| rv[a] * v[a]).sum();
        total += (vrv + shift).powi(2);
        // + 2 Σ_a Σ_i ((m−2)/2 ⟨jᵢ x_a, v⟩)²
        total += 2.0 * br.iter().map(|x| (0.5 * shift * x).powi(2)).sum::<f64>();
        // Σ_{i,k} Z_ik² + 2 Σ_{i,k} Z_ik Ric^S(hᵢ, h_k) + ‖Ric^S‖²
        for i in 0..r {
            for k in 0..r {
                let dot: f64 = (0..m).map(|a| jv[i * m + a] * jv[k * m + a]).sum();
                let z = self.ric_z[i * r + k] - 0.5 * dot;
                total += z * z + 2.0 * z * self.ric_h[i * r + k];
            }
        }
        total + self.ric_s_norm_sq
    }
}

/// `‖Ric^{C,j}_{(v,s)}‖²` for a unit `v`.
pub fn ric_c_norm_sq_pointwise(j: &JMap, base: &BaseGroupData, v: &[f64]) -> Result<f64> {
    check_unit(v, j.m())?;
    Ok(RicciNormIntegrand::new(j, base)?.eval(v))
}

/// Sample mean over uniform points on `S^{m−1}` with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereMean {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, o: Moments) -> Moments {
        if self.n == 0.0 {
            return o;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

/// Monte-Carlo mean of `f` over the unit sphere in `ℝᵐ`.
///
/// Samples are drawn in fixed-size blocks, block `b` from the ChaCha8 stream
/// `b` of `seed`; block statistics are merged in block order, so the result
/// is bit-identical for a given `(m, samples, seed)` regardless of threads.
pub fn sphere_mean<F>(m: usize, samples: usize, seed: u64, f: F) -> SphereMean
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let blocks = samples.div_ceil(BLOCK);
    let stats: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut v = vec![0.0; m];
            let mut acc = Moments {
                n: 0.0,
                mean: 0.0,
                m2: 0.0,
            };
            for _ in 0..count {
                sphere_point_into(&mut rng, &mut v);
                let x = f(&v);
                acc.n += 1.0;
                let d = x - acc.mean;
                acc.mean += d / acc.n;
                acc.m2 += d * (x - acc.mean);
            }
            acc
        })
        .collect();
    let total = stats.into_iter().fold(
        Moments {
            n: 0.0,
            mean: 0.0,
            m2: 0.0,
        },
        Moments::merge,
    );
    let var = if total.n > 1.0 {
        total.m2 / (total.n - 1.0)
    } else {
        0.0
    };
    SphereMean {
        mean: total.mean,
        std_error: (var / total.n.max(1.0)).sqrt(),
        samples,
    }
}

/// A quadrature value with its standard error and how it was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_QUADRATURE_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_QUADRATURE_SAMPLES,
            got: samples,
        });
    }
    Ok(())
}

/// `c_Ric(g_j) ≈ vol(S) vol(S^{m−1}) · mean_v ‖Ric^{C,j}_{(v,s)}‖²`.
pub fn c_ric_quadrature(
    j: &JMap,
    base: &BaseGroupData,
    samples: usize,
    seed: u64,
) -> Result<QuadratureEstimate> {
    check_samples(samples)?;
    let integrand = RicciNormIntegrand::new(j, base)?;
    let est = sphere_mean(j.m(), samples, seed, |v| integrand.eval(v));
    let factor = base.vol_s * sphere_volume(j.m() - 1);
    Ok(QuadratureEstimate {
        value: factor * est.mean,
        std_error: factor * est.std_error,
        samples,
        seed,
    })
}

/// `c_Ric(g_j) − c_Ric(g_{j′})` from paired samples (both integrands are
/// evaluated at the same points), with the standard error of the paired
/// difference.
pub fn c_ric_quadrature_difference(
    j: &JMap,
    j2: &JMap,
    base: &BaseGroupData,
    samples: usize,
    seed: u64,
) -> Result<QuadratureEstimate> {
    check_samples(samples)?;
    if j.m() != j2.m() {
        return Err(Error::DimensionMismatch {
            expected: j.m(),
            found: j2.m(),
        });
    }
    let f1 = RicciNormIntegrand::new(j, base)?;
    let f2 = RicciNormIntegrand::new(j2, base)?;
    let est = sphere_mean(j.m(), samples, seed, |v| f1.eval(v) - f2.eval(v));
    let factor = base.vol_s * sphere_volume(j.m() - 1);
    Ok(QuadratureEstimate {
        value: factor * est.mean,
        std_error: factor * est.std_error,
        samples,
        seed,
    })
}

/// `(10m² − 20m − 78) / (m(m + 2))`; has no integer root.
pub fn distinguisher_factor(m: usize) -> f64 {
    let mf = m as f64;
    let numerator = 10 * (m * m) as i64 - 20 * m as i64 - 78;
    assert!(numerator != 0, "10m² − 20m − 78 has no integer roots");
    numerator as f64 / (mf * (mf + 2.0))
}

/// `(a₂⁰, a₂¹)` from `c_s`, `c_Ric`, `c_R` on a manifold of dimension `dim_m`.
pub fn a2_coefficients(c_s: f64, c_ric: f64, c_r: f64, dim_m: usize) -> (f64, f64) {
    let d = dim_m as f64;
    let a0 = (5.0 * c_s - 2.0 * c_ric + 2.0 * c_r) / 360.0;
    let a1 = ((5.0 * d - 60.0) * c_s - (2.0 * d - 180.0) * c_ric + (2.0 * d - 30.0) * c_r) / 360.0;
    (a0, a1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OneFormVerdict {
    /// `Δ‖Ric_v‖² ≠ 0`, so `a₂¹` differs and the 1-form spectra differ.
    NotOneFormIsospectral,
    /// The heat-invariant test says nothing.
    Undetermined,
}

/// Differences of integrated curvature quantities between `(C, g_j)` and
/// `(C, g_{j′})` for an isospectral pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatComparison {
    pub m: usize,
    /// `dim C = (m − 1) + dim S`.
    pub dim_c: usize,
    pub delta_ric_norm_sq: f64,
    pub delta_c_s: f64,
    pub delta_c_ric: f64,
    pub delta_c_r: f64,
    /// `Δc_s + 10 Δc_Ric`.
    pub delta_a2_1_combination: f64,
    pub distinguisher_factor: f64,
    pub delta_a2_0: f64,
    pub delta_a2_1: f64,
    pub verdict: OneFormVerdict,
    /// Paired-sample quadrature of `Δc_Ric`, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub quadrature: Option<QuadratureEstimate>,
}

pub fn heat_comparison(
    j: &JMap,
    j2: &JMap,
    base: &BaseGroupData,
    verdict_tol: f64,
) -> Result<HeatComparison> {
    let iso = is_isospectral(j, j2, DEFAULT_ISO_TOL)?;
    if !iso.isospectral {
        let (a, b) = iso.worst.unwrap_or((0, 0));
        return Err(Error::NotIsospectral {
            a,
            b,
            deviation: iso.max_deviation,
        });
    }
    heat_differences(j, j2, base, verdict_tol)
}

/// [`heat_comparison`] without the isospectrality check. The closed forms are
/// only meaningful for isospectral pairs.
pub fn heat_differences(
    j: &JMap,
    j2: &JMap,
    base: &BaseGroupData,
    verdict_tol: f64,
) -> Result<HeatComparison> {
    if j.m() != j2.m() {
        return Err(Error::DimensionMismatch {
            expected: j.m(),
            found: j2.m(),
        });
    }
    base.check_rank(j)?;
    base.check_rank(j2)?;
    let m = j.m();
    let mf = m as f64;
    let delta_ric_norm_sq = ric_v(j).norm_squared() - ric_v(j2).norm_squared();
    let volume = base.vol_s * sphere_volume(m - 1);
    let delta_c_s = volume * 2.0 / (mf * (mf + 2.0)) * delta_ric_norm_sq;
    let delta_c_ric = volume * (mf - 4.0) / mf * delta_ric_norm_sq;
    // Δa₂⁰ = 0 for functions-isospectral manifolds
    let delta_c_r = -2.5 * delta_c_s + delta_c_ric;
    let dim_c = m - 1 + base.dim_s;
    let (delta_a2_0, delta_a2_1) = a2_coefficients(delta_c_s, delta_c_ric, delta_c_r, dim_c);
    let verdict = if delta_ric_norm_sq.abs() > verdict_tol {
        OneFormVerdict::NotOneFormIsospectral
    } else {
        OneFormVerdict::Undetermined
    };
    Ok(HeatComparison {
        m,
        dim_c,
        delta_ric_norm_sq,
        delta_c_s,
        delta_c_ric,
        delta_c_r,
        delta_a2_1_combination: delta_c_s + 10.0 * delta_c_ric,
        distinguisher_factor: distinguisher_factor(m),
        delta_a2_0,
        delta_a2_1,
        verdict,
        quadrature: None,
    })
}
