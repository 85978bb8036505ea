//! Trace-polynomial invariants of pairs `j = (j₁, j₂)`.
//!
//! `p_{a,b}(j)` is the sum of `tr(w)` over all words `w` with `a` letters
//! `j₁` and `b` letters `j₂`; equivalently the coefficient of `sᵃuᵇ` in
//! `tr((s j₁ + u j₂)^{a+b})`. Two pairs are isospectral (every `s j₁ + u j₂`
//! orthogonally conjugate to `s j₁′ + u j₂′`) exactly when all `p_{a,b}` with
//! even `a + b ≤ m` agree.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skew::{self, trace_of_product, JMap, SkewMatrix};

/// Default relative tolerance for [`is_isospectral`].
pub const DEFAULT_ISO_TOL: f64 = 1e-8;

// Above this many words the necklace enumeration is replaced by the
// matrix recurrence in `word_sum`.
const MAX_ENUMERATED_WORDS: u128 = 1 << 16;

/// `p_{a,b}(j)`, enumerating words up to cyclic rotation.
pub fn p_ab(j: &JMap, a: usize, b: usize) -> Result<f64> {
    let (j1, j2) = j.as_pair()?;
    check_order(a, b)?;
    if binomial(a + b, a) > MAX_ENUMERATED_WORDS || a + b > 64 {
        return Ok(word_sum(j1, j2, a, b).trace());
    }
    let n = a + b;
    let mut total = 0.0;
    for word in words(n, a) {
        if let Some(class_size) = necklace_class_size(word, n) {
            total += class_size as f64 * word_trace(j1, j2, word, n);
        }
    }
    Ok(total)
}

/// `p_{a,b}(j)` summed over every word individually.
pub fn p_ab_ungrouped(j: &JMap, a: usize, b: usize) -> Result<f64> {
    let (j1, j2) = j.as_pair()?;
    check_order(a, b)?;
    if a + b > 64 {
        return Err(Error::Domain("word length above 64".into()));
    }
    Ok(words(a + b, a).map(|w| word_trace(j1, j2, w, a + b)).sum())
}

/// `p_{a,b}(j)` as the trace of the symmetrized product matrix.
pub fn p_ab_recurrence(j: &JMap, a: usize, b: usize) -> Result<f64> {
    let (j1, j2) = j.as_pair()?;
    check_order(a, b)?;
    Ok(word_sum(j1, j2, a, b).trace())
}

fn check_order(a: usize, b: usize) -> Result<()> {
    if a + b == 0 {
        return Err(Error::Domain("p_{a,b} needs a + b ≥ 1".into()));
    }
    Ok(())
}

/// `Σ_w w` over all words with `a` letters `j₁` and `b` letters `j₂`, via
/// `S(a,b) = j₁ S(a−1,b) + j₂ S(a,b−1)`, `S(0,0) = I`.
pub fn word_sum(j1: &SkewMatrix, j2: &SkewMatrix, a: usize, b: usize) -> DMatrix<f64> {
    let m = j1.dim();
    let (x, y) = (j1.as_matrix(), j2.as_matrix());
    // row over a, rolling over b
    let mut prev: Vec<DMatrix<f64>> = Vec::with_capacity(a + 1);
    for ia in 0..=a {
        let s = if ia == 0 {
            DMatrix::identity(m, m)
        } else {
            x * &prev[ia - 1]
        };
        prev.push(s);
    }
    for _ib in 1..=b {
        let mut cur: Vec<DMatrix<f64>> = Vec::with_capacity(a + 1);
        for ia in 0..=a {
            let mut s = y * &prev[ia];
            if ia > 0 {
                s += x * &cur[ia - 1];
            }
            cur.push(s);
        }
        prev = cur;
    }
    prev.pop().expect("a + 1 ≥ 1 entries")
}

/// Words of length `n` with `a` set bits (bit `i` set ⇔ letter `i` is `j₁`),
/// in increasing numeric order.
fn words(n: usize, a: usize) -> impl Iterator<Item = u64> {
    let limit: u128 = 1u128 << n;
    let first: u64 = if a == 0 { 0 } else { ((1u128 << a) - 1) as u64 };
    let mut next = Some(first);
    std::iter::from_fn(move || {
        let w = next?;
        next = if a == 0 || a == n {
            None
        } else {
            // Gosper's hack
            let c = w & w.wrapping_neg();
            let r = w.wrapping_add(c);
            let nw = (((r ^ w) >> 2) / c) | r;
            if r == 0 || (nw as u128) >= limit {
                None
            } else {
                Some(nw)
            }
        };
        Some(w)
    })
}

fn rotate(w: u64, k: usize, n: usize) -> u64 {
    if k == 0 || n == 0 {
        return w;
    }
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    ((w >> k) | (w << (n - k))) & mask
}

/// `Some(size of the rotation class)` if `w` is the smallest rotation in its
/// class, `None` otherwise.
fn necklace_class_size(w: u64, n: usize) -> Option<usize> {
    let mut period = n;
    for k in 1..n {
        let r = rotate(w, k, n);
        if r < w {
            return None;
        }
        if r == w && period == n {
            period = k;
        }
    }
    Some(period)
}

fn word_trace(j1: &SkewMatrix, j2: &SkewMatrix, w: u64, n: usize) -> f64 {
    let letter = |i: usize| {
        if (w >> i) & 1 == 1 {
            j1.as_matrix()
        } else {
            j2.as_matrix()
        }
    };
    skew::trace_product((0..n - 1).map(letter), letter(n - 1))
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// One `(a, b, p_{a,b})` row of an [`InvariantTable`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantEntry {
    pub a: usize,
    pub b: usize,
    pub value: f64,
}

/// `p_{a,b}(j)` for every `(a, b)` with `a + b` even and `2 ≤ a + b ≤ m`,
/// ordered by `(a + b, a)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantTable {
    pub m: usize,
    pub entries: Vec<InvariantEntry>,
}

impl InvariantTable {
    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.a == a && e.b == b)
            .map(|e| e.value)
    }

    pub fn keys(&self) -> Vec<(usize, usize)> {
        self.entries.iter().map(|e| (e.a, e.b)).collect()
    }
}

/// Keys `(a, b)` with `a + b` even and `2 ≤ a + b ≤ max_order`, sorted by `(a+b, a)`.
pub fn table_keys(max_order: usize) -> Vec<(usize, usize)> {
    (2..=max_order)
        .step_by(2)
        .flat_map(|k| (0..=k).map(move |a| (a, k - a)))
        .collect()
}

pub fn invariant_table(j: &JMap) -> Result<InvariantTable> {
    invariant_table_to_order(j, j.m())
}

/// Like [`invariant_table`] but over even orders up to `max_order`.
pub fn invariant_table_to_order(j: &JMap, max_order: usize) -> Result<InvariantTable> {
    j.as_pair()?;
    let entries = table_keys(max_order)
        .into_par_iter()
        .map(|(a, b)| p_ab(j, a, b).map(|value| InvariantEntry { a, b, value }))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantTable { m: j.m(), entries })
}

/// Outcome of [`is_isospectral`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsospectralReport {
    pub isospectral: bool,
    /// Largest `|p − p′| / (1 + max(|p|, |p′|))`, computed on both maps
    /// rescaled by the larger of their norms.
    pub max_deviation: f64,
    /// Key attaining `max_deviation`.
    pub worst: Option<(usize, usize)>,
}

pub fn is_isospectral(j: &JMap, j2: &JMap, tol: f64) -> Result<IsospectralReport> {
    compare_tables(j, j2, tol, j.m())
}

/// [`is_isospectral`] with the invariant table extended to even orders up
/// to `max_order` (possibly beyond `m`).
pub fn compare_tables(
    j: &JMap,
    j2: &JMap,
    tol: f64,
    max_order: usize,
) -> Result<IsospectralReport> {
    if j.m() != j2.m() {
        return Err(Error::DimensionMismatch {
            expected: j.m(),
            found: j2.m(),
        });
    }
    j.as_pair()?;
    j2.as_pair()?;
    // Both maps are divided by a common factor, which makes the verdict
    // invariant under j, j′ ↦ αj, αj′.
    let scale = j.norm().max(j2.norm());
    if scale == 0.0 {
        return Ok(IsospectralReport {
            isospectral: true,
            max_deviation: 0.0,
            worst: None,
        });
    }
    let t1 = invariant_table_to_order(&j.scale(scale.recip()), max_order)?;
    let t2 = invariant_table_to_order(&j2.scale(scale.recip()), max_order)?;
    let mut max_deviation = 0.0f64;
    let mut worst = None;
    for (e1, e2) in t1.entries.iter().zip(&t2.entries) {
        let dev = (e1.value - e2.value).abs() / (1.0 + e1.value.abs().max(e2.value.abs()));
        if worst.is_none() || dev > max_deviation || dev.is_nan() {
            max_deviation = dev;
            worst = Some((e1.a, e1.b));
        }
    }
    Ok(IsospectralReport {
        isospectral: max_deviation <= tol,
        max_deviation,
        worst,
    })
}

/// `q(j) = tr(j₁² j₂²)`.
pub fn q_poly(j: &JMap) -> Result<f64> {
    let (j1, j2) = j.as_pair()?;
    let (x, y) = (j1.as_matrix(), j2.as_matrix());
    Ok(trace_of_product(&(x * x), &(y * y)))
}

/// `dq|_j(Y) = tr(j₁³ j₂ j₁ j₂² − j₁ j₂ j₁³ j₂²)`.
pub fn dq_along_y(j: &JMap) -> Result<f64> {
    let (j1, j2) = j.as_pair()?;
    let (x, y) = (j1.as_matrix(), j2.as_matrix());
    let x3 = x * x * x;
    let y2 = y * y;
    let first = &x3 * y * x;
    let second = x * y * &x3;
    Ok(trace_of_product(&(first - second), &y2))
}

/// `dp_{a,b}|_j(ε) = (a+b) (Σ_{S_{a−1,b}} tr(ε₁ w) + Σ_{S_{a,b−1}} tr(ε₂ w))`.
pub fn dp_ab_directional(j: &JMap, eps: &JMap, a: usize, b: usize) -> Result<f64> {
    let (j1, j2) = j.as_pair()?;
    let (e1, e2) = eps.as_pair()?;
    if eps.m() != j.m() {
        return Err(Error::DimensionMismatch {
            expected: j.m(),
            found: eps.m(),
        });
    }
    check_order(a, b)?;
    let mut total = 0.0;
    if a > 0 {
        total += trace_of_product(e1.as_matrix(), &word_sum(j1, j2, a - 1, b));
    }
    if b > 0 {
        total += trace_of_product(e2.as_matrix(), &word_sum(j1, j2, a, b - 1));
    }
    Ok((a + b) as f64 * total)
}

/// `{μ_k}` where the eigenvalues of `A` are `±iμ_k` (and 0 for odd `m`),
/// descending, `floor(m/2)` entries.
pub fn eigen_multiset(a: &SkewMatrix) -> Vec<f64> {
    skew::skew_spectrum(a)
}
