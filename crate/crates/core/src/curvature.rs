//! Curvature of the nilpotent group `G_j` and of the product `C = S^{m−1} × S`
//! carrying the metric `g_j`.
//!
//! The scalar curvature of `(C, g_j)` at `(v, s)` depends only on `v`:
//!
//! ```text
//! scal(v, s) = scal_G + scal_S + (m − 1)(m − 2) − ⟨Ric_v v, v⟩,
//! Ric_v = ½ Σᵢ jᵢ²,   scal_G = ¼ Σᵢ tr(jᵢ²).
//! ```
//!
//! Its critical points are the unit eigenvectors of `Ric_v`, so the critical
//! values are `scal_G + scal_S + (m − 1)(m − 2) − λ` over the eigenvalues `λ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::sphere_volume;
use crate::invariants::{is_isospectral, DEFAULT_ISO_TOL};
use crate::skew::{trace_of_product, JMap};

/// Absolute gap below which eigenvalues are treated as one cluster.
pub const EIGEN_CLUSTER_GAP: f64 = 1e-8;

/// Curvature summary of the compact group factor `S` with its bi-invariant
/// metric. `ric_h[i][k]` is `Ric^S(hᵢ, h_k)` in the orthonormal frame of the
/// torus directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseGroupData {
    pub dim_s: usize,
    pub scal_s: f64,
    pub vol_s: f64,
    #[serde(with = "crate::matrix_serde")]
    pub ric_h: DMatrix<f64>,
    pub ric_s_norm_sq: f64,
}

impl BaseGroupData {
    pub fn new(
        dim_s: usize,
        scal_s: f64,
        vol_s: f64,
        ric_h: DMatrix<f64>,
        ric_s_norm_sq: f64,
    ) -> Result<Self> {
        let base = BaseGroupData {
            dim_s,
            scal_s,
            vol_s,
            ric_h,
            ric_s_norm_sq,
        };
        base.validate()?;
        Ok(base)
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.ric_h.nrows();
        if self.ric_h.ncols() != r {
            return Err(Error::NotSquare {
                rows: r,
                cols: self.ric_h.ncols(),
            });
        }
        if (&self.ric_h - self.ric_h.transpose()).amax() > 1e-12 * self.ric_h.amax().max(1.0) {
            return Err(Error::Domain("ric_h must be symmetric".into()));
        }
        if !(self.vol_s > 0.0) {
            return Err(Error::Domain("vol_s must be positive".into()));
        }
        if !(self.ric_s_norm_sq >= 0.0) {
            return Err(Error::Domain("ric_s_norm_sq must be non-negative".into()));
        }
        if self.dim_s < r {
            return Err(Error::Domain(format!(
                "dim_s = {} smaller than rank {r}",
                self.dim_s
            )));
        }
        Ok(())
    }

    /// `r` for which this base is set up (size of `ric_h`).
    pub fn rank(&self) -> usize {
        self.ric_h.nrows()
    }

    /// `SU(2) × SU(2)` with each factor the round unit 3-sphere
    /// (sectional curvature 1, `Ric = 2g`, `scal = 6`, `vol = 2π²`).
    pub fn su2_x_su2_unit() -> Self {
        BaseGroupData {
            dim_s: 6,
            scal_s: 12.0,
            vol_s: 4.0 * PI.powi(4),
            ric_h: DMatrix::identity(2, 2) * 2.0,
            ric_s_norm_sq: 24.0,
        }
    }

    pub(crate) fn check_rank(&self, j: &JMap) -> Result<()> {
        if self.rank() != j.r() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                found: j.r(),
            });
        }
        Ok(())
    }
}

/// `Ric^{G_j}|_𝔳 = ½ Σᵢ jᵢ²`.
pub fn ric_v(j: &JMap) -> DMatrix<f64> {
    let m = j.m();
    let mut acc = DMatrix::zeros(m, m);
    for c in j.components() {
        let a = c.as_matrix();
        acc += a * a;
    }
    let acc = acc * 0.5;
    (&acc + acc.transpose()) * 0.5
}

/// `Ric^{G_j}(zᵢ, z_k) = −¼ tr(jᵢ j_k)`.
pub fn ric_z(j: &JMap) -> DMatrix<f64> {
    let r = j.r();
    let c = j.components();
    DMatrix::from_fn(r, r, |i, k| {
        -0.25 * trace_of_product(c[i].as_matrix(), c[k].as_matrix())
    })
}

/// `scal^{G_j} = ¼ Σᵢ tr(jᵢ²)`.
pub fn scal_g(j: &JMap) -> f64 {
    0.25 * j
        .components()
        .iter()
        .map(|c| trace_of_product(c.as_matrix(), c.as_matrix()))
        .sum::<f64>()
}

/// `scal_G + scal_S + (m − 1)(m − 2)`, the constant part of `scal^{C,j}`.
pub fn scal_offset(j: &JMap, base: &BaseGroupData) -> f64 {
    let m = j.m() as f64;
    scal_g(j) + base.scal_s + (m - 1.0) * (m - 2.0)
}

pub(crate) fn check_unit(v: &[f64], m: usize) -> Result<()> {
    if v.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: v.len(),
        });
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !((n - 1.0).abs() <= 1e-10) {
        return Err(Error::Domain(format!("expected a unit vector, |v| = {n}")));
    }
    Ok(())
}

/// Scalar curvature of `(C, g_j)` at a point with sphere coordinate `v`.
pub fn scal_c(j: &JMap, base: &BaseGroupData, v: &[f64]) -> Result<f64> {
    check_unit(v, j.m())?;
    let v = DVector::from_column_slice(v);
    let rv = ric_v(j);
    Ok(scal_offset(j, base) - (&rv * &v).dot(&v))
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// A value and how many (nearly) equal eigenvalues it stands for.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Groups ascending values whose consecutive gaps are at most `gap`; each
/// cluster is represented by its mean.
pub fn cluster_sorted(values: &[f64], gap: f64) -> Vec<Cluster> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new(); // (sum, count, last)
    for &x in values {
        match out.last_mut() {
            Some((sum, count, last)) if x - *last <= gap => {
                *sum += x;
                *count += 1;
                *last = x;
            }
            _ => out.push((x, 1, x)),
        }
    }
    out.into_iter()
        .map(|(s, n, _)| Cluster {
            value: s / n as f64,
            multiplicity: n,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub m: usize,
    pub scal_g: f64,
    #[serde(with = "crate::matrix_serde")]
    pub ric_v: DMatrix<f64>,
    #[serde(with = "crate::matrix_serde")]
    pub ric_z: DMatrix<f64>,
    /// Eigenvalues of `ric_v`, ascending.
    pub ric_v_eigs: Vec<f64>,
    pub ric_v_trace: f64,
    pub ric_v_norm_sq: f64,
    /// Critical values of `scal^{C,j}`, ascending, with multiplicities.
    pub critical_values: Vec<Cluster>,
}

pub fn curvature_report(j: &JMap, base: &BaseGroupData) -> CurvatureReport {
    let rv = ric_v(j);
    let eigs = symmetric_eigenvalues(&rv);
    let offset = scal_offset(j, base);
    let mut critical_values: Vec<Cluster> = cluster_sorted(&eigs, EIGEN_CLUSTER_GAP)
        .into_iter()
        .map(|c| Cluster {
            value: offset - c.value,
            multiplicity: c.multiplicity,
        })
        .collect();
    critical_values.reverse();
    CurvatureReport {
        m: j.m(),
        scal_g: scal_g(j),
        ric_z: ric_z(j),
        ric_v_trace: rv.trace(),
        ric_v_norm_sq: rv.norm_squared(),
        ric_v: rv,
        ric_v_eigs: eigs,
        critical_values,
    }
}

/// Sufficient criteria for two isospectral maps to give non-isometric
/// manifolds. `Inconclusive` means neither criterion fires; it does not
/// assert isometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonisometryVerdict {
    DistinctCriticalValues,
    DistinctEigenvalueMultiplicities,
    Inconclusive,
}

pub fn nonisometry_verdict(j: &JMap, j2: &JMap, tol: f64) -> Result<NonisometryVerdict> {
    let iso = is_isospectral(j, j2, DEFAULT_ISO_TOL)?;
    if !iso.isospectral {
        let (a, b) = iso.worst.unwrap_or((0, 0));
        return Err(Error::NotIsospectral {
            a,
            b,
            deviation: iso.max_deviation,
        });
    }
    Ok(compare_ric_spectra(j, j2, tol))
}

/// The classification of [`nonisometry_verdict`] without the isospectrality
/// precondition, for callers that have already checked it at their own tolerance.
pub fn compare_ric_spectra(j: &JMap, j2: &JMap, tol: f64) -> NonisometryVerdict {
    classify_spectra(
        &symmetric_eigenvalues(&ric_v(j)),
        &symmetric_eigenvalues(&ric_v(j2)),
        tol,
    )
}

/// Compares two ascending eigenvalue lists of `Ric_v`.
pub(crate) fn classify_spectra(e1: &[f64], e2: &[f64], tol: f64) -> NonisometryVerdict {
    let c1 = cluster_sorted(e1, EIGEN_CLUSTER_GAP);
    let c2 = cluster_sorted(e2, EIGEN_CLUSTER_GAP);
    let same_set = c1.len() == c2.len()
        && c1
            .iter()
            .zip(&c2)
            .all(|(x, y)| (x.value - y.value).abs() <= tol);
    if !same_set {
        return NonisometryVerdict::DistinctCriticalValues;
    }
    if c1
        .iter()
        .zip(&c2)
        .any(|(x, y)| x.multiplicity != y.multiplicity)
    {
        return NonisometryVerdict::DistinctEigenvalueMultiplicities;
    }
    NonisometryVerdict::Inconclusive
}

/// `∫_C scal^{C,j} = vol(S) vol(S^{m−1}) (scal_G + scal_S + (m−1)(m−2) − tr(Ric_v)/m)`.
pub fn total_scal_integral(j: &JMap, base: &BaseGroupData) -> f64 {
    let m = j.m();
    base.vol_s * sphere_volume(m - 1) * (scal_offset(j, base) - ric_v(j).trace() / m as f64)
}
