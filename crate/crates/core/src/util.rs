//! Small shared helpers: parallel map and quasi-random sampling.

use crate::body::{ConvexBody, Vector};

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    out
}

/// `count` quasi-uniform unit vectors in `R^d` (Halton points pushed through
/// Box–Muller, then normalized).
pub fn halton_directions(d: usize, count: usize, offset: u64) -> Vec<Vector> {
    assert!(d <= PRIMES.len(), "dimension too large for the Halton table");
    let dims = d + d % 2;
    (0..count as u64)
        .map(|i| {
            let idx = i + 1 + offset;
            let u: Vec<f64> = (0..dims).map(|k| radical_inverse(idx, PRIMES[k])).collect();
            let mut v = Vector::zeros(d);
            for k in (0..dims).step_by(2) {
                let r = (-2.0 * u[k].max(1e-300).ln()).sqrt();
                let th = std::f64::consts::TAU * u[k + 1];
                if k < d {
                    v[k] = r * th.cos();
                }
                if k + 1 < d {
                    v[k + 1] = r * th.sin();
                }
            }
            let nv = v.norm();
            if nv > 0.0 {
                v / nv
            } else {
                let mut e = Vector::zeros(d);
                e[0] = 1.0;
                e
            }
        })
        .collect()
}

/// Quasi-uniform points on the boundary of `body`.
pub fn boundary_samples(body: &ConvexBody, count: usize) -> Vec<Vec<f64>> {
    halton_directions(body.dim(), count, 0)
        .iter()
        .map(|u| body.project(u.as_slice()))
        .collect()
}
