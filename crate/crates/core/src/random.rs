//! Random instances: skew matrices, orthogonal matrices, maps, and uniform
//! points on the unit sphere.
//!
//! Everything here draws from a caller-supplied generator so runs are
//! reproducible from a seed.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::skew::{JMap, SkewMatrix};

/// Skew matrix with independent standard normal upper-triangle entries.
pub fn random_skew<R: Rng + ?Sized>(rng: &mut R, m: usize) -> SkewMatrix {
    SkewMatrix::from_upper(m, |_, _| rng.sample(StandardNormal))
}

pub fn random_jmap<R: Rng + ?Sized>(rng: &mut R, m: usize, r: usize) -> JMap {
    JMap::new((0..r).map(|_| random_skew(rng, m)).collect()).expect("components share dimension")
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the
/// sign of `R`'s diagonal folded into `Q`).
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..m {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// Uniform point on `S^{m−1}` via a normalized Gaussian vector, written into `out`.
pub fn sphere_point_into<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut n2 = 0.0;
        for x in out.iter_mut() {
            *x = rng.sample(StandardNormal);
            n2 += *x * *x;
        }
        if n2 > 1e-300 {
            let inv = n2.sqrt().recip();
            out.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

pub fn sphere_point<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    sphere_point_into(rng, &mut v);
    v
}
