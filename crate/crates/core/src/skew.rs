//! Skew-symmetric matrices, maps `j: ℝʳ → so(m)`, and the basic algebra on
//! them: pencil evaluation, traces of words, characteristic polynomials, the
//! bracket of the associated two-step nilpotent Lie algebra, and recovery of
//! an orthogonal conjugator between two skew matrices with equal spectra.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Antisymmetry tolerance applied when a matrix is validated on construction.
pub const SKEW_TOL: f64 = 1e-12;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

/// A real antisymmetric `m × m` matrix, stored dense.
///
/// Construction validates antisymmetry up to [`SKEW_TOL`] (scaled by the
/// largest entry when that exceeds one) and then stores the exact skew part
/// `(A − Aᵀ)/2`, so every stored value satisfies `A = −Aᵀ` bit for bit.
#[derive(Clone, PartialEq)]
pub struct SkewMatrix(DMatrix<f64>);

impl SkewMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        check_square(&a)?;
        let scale = a.amax().max(1.0);
        let defect = skew_defect(&a);
        if !(defect <= SKEW_TOL * scale) {
            return Err(Error::NotSkew { max_defect: defect });
        }
        Ok(Self::project_unchecked(a))
    }

    /// Skew part `(A − Aᵀ)/2` of an arbitrary square matrix.
    pub fn project(a: DMatrix<f64>) -> Result<Self> {
        check_square(&a)?;
        Ok(Self::project_unchecked(a))
    }

    pub(crate) fn project_unchecked(a: DMatrix<f64>) -> Self {
        let t = a.transpose();
        SkewMatrix((a - t) * 0.5)
    }

    pub fn from_row_slice(m: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(m, m, entries))
    }

    pub fn zeros(m: usize) -> Self {
        SkewMatrix(DMatrix::zeros(m, m))
    }

    /// Builds the skew matrix whose strictly upper triangle is `f(i, k)`, `i < k`.
    pub fn from_upper(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut a = DMatrix::zeros(m, m);
        for i in 0..m {
            for k in i + 1..m {
                let x = f(i, k);
                a[(i, k)] = x;
                a[(k, i)] = -x;
            }
        }
        SkewMatrix(a)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, alpha: f64) -> SkewMatrix {
        SkewMatrix(&self.0 * alpha)
    }

    /// `Q A Qᵀ` for an orthogonal (or arbitrary) `Q`, re-projected to exact skewness.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> SkewMatrix {
        Self::project_unchecked(q * &self.0 * q.transpose())
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let m = self.dim();
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for k in 0..m {
                out.push(self.0[(i, k)]);
            }
        }
        out
    }
}

impl fmt::Debug for SkewMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SkewMatrix{}", self.0)
    }
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() == 0 || a.nrows() > MAX_DIM {
        return Err(Error::Domain(format!(
            "matrix dimension {} outside supported range 1..={MAX_DIM}",
            a.nrows()
        )));
    }
    Ok(())
}

fn skew_defect(a: &DMatrix<f64>) -> f64 {
    let m = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..m {
        for k in i..m {
            let d = (a[(i, k)] + a[(k, i)]).abs();
            if d.is_nan() {
                return f64::NAN;
            }
            worst = worst.max(d);
        }
    }
    worst
}

/// A linear map `j: ℝʳ → so(m)`, given by the images `j₁, …, j_r` of the
/// standard basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JMapRecord", into = "JMapRecord")]
pub struct JMap {
    m: usize,
    components: Vec<SkewMatrix>,
}

impl JMap {
    pub fn new(components: Vec<SkewMatrix>) -> Result<Self> {
        let first = components.first().ok_or(Error::EmptyMap)?;
        let m = first.dim();
        for c in &components {
            if c.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: c.dim(),
                });
            }
        }
        Ok(JMap { m, components })
    }

    pub fn pair(j1: SkewMatrix, j2: SkewMatrix) -> Result<Self> {
        Self::new(vec![j1, j2])
    }

    pub fn zeros(m: usize, r: usize) -> Self {
        JMap {
            m,
            components: vec![SkewMatrix::zeros(m); r.max(1)],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SkewMatrix] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &SkewMatrix {
        &self.components[i]
    }

    /// `(j₁, j₂)`; fails for any rank other than two.
    pub fn as_pair(&self) -> Result<(&SkewMatrix, &SkewMatrix)> {
        match self.components.as_slice() {
            [a, b] => Ok((a, b)),
            _ => Err(Error::UnsupportedRank(self.r())),
        }
    }

    pub fn conjugate(&self, q: &DMatrix<f64>) -> JMap {
        JMap {
            m: self.m,
            components: self.components.iter().map(|c| c.conjugate(q)).collect(),
        }
    }

    pub fn scale(&self, alpha: f64) -> JMap {
        JMap {
            m: self.m,
            components: self.components.iter().map(|c| c.scale(alpha)).collect(),
        }
    }

    /// Same components in reverse order (`(j₂, j₁)` for a pair).
    pub fn swapped(&self) -> JMap {
        let mut components = self.components.clone();
        components.reverse();
        JMap {
            m: self.m,
            components,
        }
    }

    /// Euclidean norm over all components.
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.as_matrix().iter().all(|x| x.is_finite()))
    }

    /// Componentwise `self + alpha · other`, re-projected to exact skewness.
    pub fn axpy(&self, alpha: f64, other: &JMap) -> Result<JMap> {
        if other.m != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: other.m,
            });
        }
        if other.r() != self.r() {
            return Err(Error::DimensionMismatch {
                expected: self.r(),
                found: other.r(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| SkewMatrix::project_unchecked(a.as_matrix() + b.as_matrix() * alpha))
            .collect();
        Ok(JMap {
            m: self.m,
            components,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("JMap serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: JMapRecord = serde_json::from_str(s)?;
        JMap::try_from(rec)
    }
}

/// Wire format: `{"m": int, "r": int, "components": [[row-major m·m reals], …]}`.
#[derive(Serialize, Deserialize)]
struct JMapRecord {
    m: usize,
    r: usize,
    components: Vec<Vec<f64>>,
}

impl From<JMap> for JMapRecord {
    fn from(j: JMap) -> Self {
        JMapRecord {
            m: j.m,
            r: j.r(),
            components: j.components.iter().map(SkewMatrix::to_row_major).collect(),
        }
    }
}

impl TryFrom<JMapRecord> for JMap {
    type Error = Error;

    fn try_from(rec: JMapRecord) -> Result<Self> {
        if rec.components.len() != rec.r {
            return Err(Error::DimensionMismatch {
                expected: rec.r,
                found: rec.components.len(),
            });
        }
        let comps = rec
            .components
            .iter()
            .map(|c| SkewMatrix::from_row_slice(rec.m, c))
            .collect::<Result<Vec<_>>>()?;
        JMap::new(comps)
    }
}

/// `Σᵢ wᵢ jᵢ`.
pub fn pencil_eval(j: &JMap, weights: &[f64]) -> Result<SkewMatrix> {
    if weights.len() != j.r() {
        return Err(Error::DimensionMismatch {
            expected: j.r(),
            found: weights.len(),
        });
    }
    let mut acc = DMatrix::zeros(j.m(), j.m());
    for (w, c) in weights.iter().zip(j.components()) {
        acc += c.as_matrix() * *w;
    }
    Ok(SkewMatrix(acc))
}

/// Trace of the ordered product `A₁ A₂ ⋯ A_n`.
pub fn trace_word(matrices: &[&SkewMatrix]) -> Result<f64> {
    let (last, init) = matrices
        .split_last()
        .ok_or_else(|| Error::Domain("trace_word needs at least one matrix".into()))?;
    let m = last.dim();
    for a in init {
        if a.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: a.dim(),
            });
        }
    }
    Ok(trace_product(
        init.iter().map(|a| a.as_matrix()),
        last.as_matrix(),
    ))
}

/// `tr(P · last)` where `P` is the ordered product of `prefix`.
pub(crate) fn trace_product<'a>(
    prefix: impl Iterator<Item = &'a DMatrix<f64>>,
    last: &DMatrix<f64>,
) -> f64 {
    let mut prod: Option<DMatrix<f64>> = None;
    for a in prefix {
        prod = Some(match prod {
            None => a.clone(),
            Some(p) => p * a,
        });
    }
    match prod {
        None => last.trace(),
        Some(p) => trace_of_product(&p, last),
    }
}

/// `tr(XY)` without forming the product.
pub(crate) fn trace_of_product(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.component_mul(&y.transpose()).sum()
}

/// Monic characteristic polynomial `det(λI − A) = λᵐ + c_{m−1}λᵐ⁻¹ + … + c₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharPoly {
    /// `coeffs[k]` is the coefficient of `λᵏ`; `coeffs[m] == 1`.
    coeffs: Vec<f64>,
}

impl CharPoly {
    pub fn from_coeffs(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.last() {
            Some(1.0) => Ok(CharPoly { coeffs }),
            _ => Err(Error::Domain(
                "characteristic polynomial must be monic".into(),
            )),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CharPolyMethod {
    /// Faddeev–LeVerrier recurrence on traces.
    #[default]
    Traces,
    /// Expand `λ^{m mod 2} Π (λ² + μ_k²)` from the eigenvalues `±iμ_k`.
    Eigen,
}

pub fn char_poly(a: &SkewMatrix) -> CharPoly {
    char_poly_with(a, CharPolyMethod::Traces)
}

pub fn char_poly_with(a: &SkewMatrix, method: CharPolyMethod) -> CharPoly {
    match method {
        CharPolyMethod::Traces => faddeev_leverrier(a),
        CharPolyMethod::Eigen => char_poly_from_spectrum(a),
    }
}

fn faddeev_leverrier(a: &SkewMatrix) -> CharPoly {
    let m = a.dim();
    let am = a.as_matrix();
    let norm = am.norm();
    let mut coeffs = vec![0.0; m + 1];
    coeffs[m] = 1.0;
    let mut mk = DMatrix::<f64>::zeros(m, m);
    for k in 1..=m {
        // M_k = A M_{k−1} + c_{m−k+1} I,  c_{m−k} = −tr(A M_k) / k
        mk = am * &mk;
        for i in 0..m {
            mk[(i, i)] += coeffs[m - k + 1];
        }
        let mut c = -trace_of_product(am, &mk) / k as f64;
        // c_{m−k} is homogeneous of degree k and vanishes for odd k on skew input.
        if k % 2 == 1 && c.abs() <= 1e-10 * norm.powi(k as i32).max(f64::MIN_POSITIVE) {
            c = 0.0;
        }
        coeffs[m - k] = c;
    }
    CharPoly { coeffs }
}

fn char_poly_from_spectrum(a: &SkewMatrix) -> CharPoly {
    let m = a.dim();
    let mut poly = vec![0.0; m + 1];
    // start from λ^{m mod 2}
    poly[m % 2] = 1.0;
    let mut deg = m % 2;
    for mu in skew_spectrum(a) {
        let mu2 = mu * mu;
        let mut next = vec![0.0; m + 1];
        for k in 0..=deg {
            next[k] += poly[k] * mu2;
            next[k + 2] += poly[k];
        }
        poly = next;
        deg += 2;
    }
    poly[m] = 1.0;
    CharPoly { coeffs: poly }
}

/// `{μ_k}` with eigenvalues `±iμ_k` (plus a zero when `m` is odd), sorted
/// descending, `floor(m/2)` entries.
pub(crate) fn skew_spectrum(a: &SkewMatrix) -> Vec<f64> {
    let (vals, _) = gram_eigen(a);
    let mut out: Vec<f64> = (0..a.dim() / 2)
        .map(|k| (0.5 * (vals[2 * k] + vals[2 * k + 1])).max(0.0).sqrt())
        .collect();
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// Eigen-decomposition of the positive semi-definite `−A² = AᵀA`, eigenvalues
/// sorted descending with their eigenvectors as columns.
fn gram_eigen(a: &SkewMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let am = a.as_matrix();
    let g = am.transpose() * am;
    let g = (&g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(g);
    let m = a.dim();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &k| {
        eig.eigenvalues[k]
            .total_cmp(&eig.eigenvalues[i])
            .then(i.cmp(&k))
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// `[x, y]` in the centre: component `i` is `⟨jᵢ x, y⟩`.
pub fn bracket(j: &JMap, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let m = j.m();
    for v in [x, y] {
        if v.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
    }
    let x = DVector::from_column_slice(x);
    let y = DVector::from_column_slice(y);
    Ok(j.components()
        .iter()
        .map(|c| (c.as_matrix() * &x).dot(&y))
        .collect())
}

/// Orthogonal block-diagonalization `Pᵀ A P = diag(R(μ₁), …, R(μ_p), 0, …, 0)`
/// with `R(μ) = [[0, −μ], [μ, 0]]` and `μ₁ ≥ μ₂ ≥ … > 0`.
#[derive(Clone, Debug)]
pub struct SkewCanonical {
    /// Orthogonal change of basis; columns come in `(u, A u / μ)` pairs
    /// followed by a basis of the kernel.
    pub basis: DMatrix<f64>,
    /// Rotation speeds `μ` of the 2×2 blocks, descending.
    pub blocks: Vec<f64>,
    /// Groups of (nearly) equal `μ`, as `(μ, number of blocks)`.
    pub clusters: Vec<(f64, usize)>,
}

impl SkewCanonical {
    /// The block-diagonal normal form itself.
    pub fn normal_form(&self) -> DMatrix<f64> {
        let m = self.basis.nrows();
        let mut c = DMatrix::zeros(m, m);
        for (k, mu) in self.blocks.iter().enumerate() {
            c[(2 * k + 1, 2 * k)] = *mu;
            c[(2 * k, 2 * k + 1)] = -*mu;
        }
        c
    }
}

// Relative thresholds for the canonical form.
const ZERO_BLOCK_REL: f64 = 1e-7;
const CLUSTER_REL: f64 = 1e-8;
const NEAR_DEGENERATE_REL: f64 = 1e-6;

pub fn canonical_form(a: &SkewMatrix) -> SkewCanonical {
    let m = a.dim();
    let am = a.as_matrix();
    let (vals, vecs) = gram_eigen(a);
    let scale = am.norm().max(f64::MIN_POSITIVE);

    let half = m / 2;
    let mus: Vec<f64> = (0..half)
        .map(|k| (0.5 * (vals[2 * k] + vals[2 * k + 1])).max(0.0).sqrt())
        .collect();
    let nonzero = mus
        .iter()
        .take_while(|&&mu| mu > ZERO_BLOCK_REL * scale)
        .count();

    // clusters of consecutive (descending) μ
    let mut clusters: Vec<(usize, usize)> = Vec::new(); // (first pair index, count)
    for k in 0..nonzero {
        match clusters.last_mut() {
            Some((start, count)) if mus[*start + *count - 1] - mus[k] <= CLUSTER_REL * scale => {
                *count += 1
            }
            _ => clusters.push((k, 1)),
        }
    }

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(m);
    let mut blocks = Vec::with_capacity(nonzero);
    let mut cluster_summary = Vec::with_capacity(clusters.len());
    for &(start, count) in &clusters {
        let mut candidates: Vec<DVector<f64>> = (2 * start..2 * (start + count))
            .map(|c| normalized_sign(vecs.column(c).into()))
            .collect();
        candidates.sort_by(lex_desc);
        let mut found = 0;
        let mut mu_sum = 0.0;
        for c in candidates {
            if found == count {
                break;
            }
            let Some(u) = orthonormalize(&c, &basis) else {
                continue;
            };
            let au = am * &u;
            let Some(w) = orthonormalize(&au, &basis) else {
                continue;
            };
            // guard against a numerically dependent pair
            let w = match orthonormalize(&w, std::slice::from_ref(&u)) {
                Some(w) => w,
                None => continue,
            };
            let mu = w.dot(&au);
            basis.push(u);
            basis.push(w);
            blocks.push(mu);
            mu_sum += mu;
            found += 1;
        }
        // Degenerate fallback: draw further candidates from the standard basis.
        let mut e = 0;
        while found < count && e < m {
            let c = DVector::from_fn(m, |i, _| if i == e { 1.0 } else { 0.0 });
            e += 1;
            let Some(u) = orthonormalize(&(am * &(am * &c)), &basis) else {
                continue;
            };
            let au = am * &u;
            let Some(w) = orthonormalize(&au, &basis) else {
                continue;
            };
            let mu = w.dot(&au);
            basis.push(u);
            basis.push(w);
            blocks.push(mu);
            mu_sum += mu;
            found += 1;
        }
        cluster_summary.push((mu_sum / found.max(1) as f64, found));
    }

    // kernel (and anything left over)
    let mut rest: Vec<DVector<f64>> = (2 * nonzero..m)
        .map(|c| normalized_sign(vecs.column(c).into()))
        .collect();
    rest.sort_by(lex_desc);
    rest.extend((0..m).map(|e| DVector::from_fn(m, |i, _| if i == e { 1.0 } else { 0.0 })));
    for c in rest {
        if basis.len() == m {
            break;
        }
        if let Some(v) = orthonormalize(&c, &basis) {
            basis.push(v);
        }
    }

    let basis = DMatrix::from_columns(&basis);
    SkewCanonical {
        basis,
        blocks,
        clusters: cluster_summary,
    }
}

fn normalized_sign(mut v: DVector<f64>) -> DVector<f64> {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-8) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    v
}

fn lex_desc(x: &DVector<f64>, y: &DVector<f64>) -> Ordering {
    for (a, b) in x.iter().zip(y.iter()) {
        match b.total_cmp(a) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Gram–Schmidt (two passes) against an orthonormal set; `None` when the
/// remainder is too small to trust.
fn orthonormalize(v: &DVector<f64>, against: &[DVector<f64>]) -> Option<DVector<f64>> {
    let n0 = v.norm();
    if n0 == 0.0 || !n0.is_finite() {
        return None;
    }
    let mut r = v / n0;
    for _ in 0..2 {
        for b in against {
            let p = b.dot(&r);
            r.axpy(-p, b, 1.0);
        }
    }
    let n = r.norm();
    if n < 0.1 {
        return None;
    }
    Some(r / n)
}

/// An orthogonal `Q` with `Q A Qᵀ ≈ B`, plus diagnostics.
#[derive(Clone, Debug)]
pub struct Conjugator {
    pub q: DMatrix<f64>,
    /// `‖Q A Qᵀ − B‖_F`.
    pub residual: f64,
    /// `‖QᵀQ − I‖_F`.
    pub orthogonality_defect: f64,
    /// Rotation speeds shared by several blocks or separated by less than a
    /// relative gap of 1e−6; the conjugator is far from unique there.
    pub near_degenerate: Vec<f64>,
}

pub fn find_conjugator(a: &SkewMatrix, b: &SkewMatrix, tol: f64) -> Result<Conjugator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let ca = canonical_form(a);
    let cb = canonical_form(b);
    if ca.blocks.len() != cb.blocks.len() {
        return Err(Error::NoConjugator {
            reason: format!(
                "ranks differ ({} vs {})",
                2 * ca.blocks.len(),
                2 * cb.blocks.len()
            ),
        });
    }
    let gap = ca
        .blocks
        .iter()
        .zip(&cb.blocks)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    if gap > tol {
        return Err(Error::NoConjugator {
            reason: format!("eigenvalue multisets differ by up to {gap:e}"),
        });
    }
    let q = &cb.basis * ca.basis.transpose();
    let residual = (&q * a.as_matrix() * q.transpose() - b.as_matrix()).norm();
    let m = a.dim();
    let orthogonality_defect = (q.transpose() * &q - DMatrix::<f64>::identity(m, m)).norm();
    if residual > tol {
        return Err(Error::NoConjugator {
            reason: format!("conjugation residual {residual:e} exceeds tolerance {tol:e}"),
        });
    }

    let scale = a.norm().max(f64::MIN_POSITIVE);
    let mut near_degenerate: Vec<f64> = ca
        .clusters
        .iter()
        .filter(|(_, n)| *n > 1)
        .map(|(mu, _)| *mu)
        .collect();
    for w in ca.blocks.windows(2) {
        let d = w[0] - w[1];
        if d > CLUSTER_REL * scale && d <= NEAR_DEGENERATE_REL * scale {
            near_degenerate.push(w[0]);
        }
    }
    Ok(Conjugator {
        q,
        residual,
        orthogonality_defect,
        near_degenerate,
    })
}
