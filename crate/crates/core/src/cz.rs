//! Conley–Zehnder index of symplectic paths by crossing counting.
//!
//! Crossings are the instants where `Γ(t)` meets the Maslov cycle
//! `{det(M − I) = 0}`. Each crossing contributes the signature of the crossing
//! form `v ↦ <v, S(t) v>` on `ker(Γ(t) − I)`, where `S = −J Γ' Γ⁻¹`. The start
//! `t = 0` contributes half the signature of `S(0)`. A degenerate endpoint
//! follows the largest lower semicontinuous extension: perturbing by `e^{−εJ}`
//! drops the whole kernel from the count, so the endpoint contributes
//! `(sig − dim ker)/2`. Normalization: `e^{2πJt}` in `Sp(2)` has index `+1`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic::{j_matrix, put_rotation, Mat, SymplecticMatrix, SymplecticPath};

/// Singular-value threshold for kernel dimensions.
pub const TOL_KER: f64 = 1e-8;

/// Crossings closer than this are resolved as one.
const SPLIT_GAP: f64 = 1e-5;

#[derive(Clone, Debug)]
pub struct CzConfig {
    /// Initial uniform grid size for scanning `σ_min(Γ(t) − I)`.
    pub grid: usize,
    /// Largest grid tried while waiting for a stable crossing count.
    pub max_grid: usize,
    pub tol_ker: f64,
    /// Step for finite differences of `Γ`.
    pub fd_step: f64,
}

impl Default for CzConfig {
    fn default() -> Self {
        CzConfig {
            grid: 2048,
            max_grid: 1 << 15,
            tol_ker: TOL_KER,
            fd_step: 1e-6,
        }
    }
}

/// One intersection of the path with the Maslov cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossingRecord {
    pub time: f64,
    pub kernel_dim: usize,
    pub signature_contribution: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CzReport {
    pub index: i64,
    /// `Σ_{t ∈ (0,1)} dim ker(Γ(t) − I)`.
    pub morse_index: usize,
    /// `dim ker(Γ(1) − I)`.
    pub nullity: usize,
    /// Set when a singular value of `Γ(1) − I` sits just above `tol_ker`.
    pub nullity_borderline: bool,
    pub start_contribution: i64,
    pub endpoint_contribution: i64,
    pub crossings: Vec<CrossingRecord>,
    pub grid: usize,
}

/// Conley–Zehnder index with the lower semicontinuous convention.
pub fn cz_index(path: &SymplecticPath) -> Result<i64> {
    analyze(path, &CzConfig::default()).map(|r| r.index)
}

/// Morse index via interior conjugate points.
pub fn morse_index_from_path(path: &SymplecticPath) -> Result<usize> {
    analyze(path, &CzConfig::default()).map(|r| r.morse_index)
}

/// `dim ker(Γ(1) − I)` and a borderline flag.
pub fn cz_nullity(path: &SymplecticPath) -> (usize, bool) {
    let end = path.eval(1.0);
    kernel_dim(&end, TOL_KER)
}

fn kernel_dim(m: &Mat, tol: f64) -> (usize, bool) {
    let d = m.nrows();
    let a = m - Mat::identity(d, d);
    let scale = 1.0f64.max(m.amax());
    let sv = a.singular_values();
    let k = sv.iter().filter(|&&s| s < tol * scale).count();
    let borderline = sv
        .iter()
        .any(|&s| s >= tol * scale && s < 1e3 * tol * scale);
    (k, borderline)
}

fn sigma_min(m: &Mat) -> f64 {
    let d = m.nrows();
    let a = m - Mat::identity(d, d);
    a.singular_values().min()
}

/// Cheap `σ_min` for scanning: from the Gram matrix.
fn sigma_min_fast(m: &Mat) -> f64 {
    let d = m.nrows();
    let a = m - Mat::identity(d, d);
    let g = a.transpose() * &a;
    let ev = SymmetricEigen::new(g).eigenvalues;
    ev.min().max(0.0).sqrt()
}

/// Full crossing analysis with adaptive grid doubling.
pub fn analyze(path: &SymplecticPath, cfg: &CzConfig) -> Result<CzReport> {
    if path.dim() == 0 || path.dim() % 2 != 0 {
        return Err(Error::InvalidInput("path dimension must be even and positive".into()));
    }
    let start = path.eval(0.0);
    if (&start - Mat::identity(path.dim(), path.dim())).amax() > 1e-10 {
        return Err(Error::InvalidInput("path must start at the identity".into()));
    }
    let start_contribution = start_contribution(path, cfg)?;
    let (end_contribution, nullity, borderline) = endpoint(path, cfg)?;

    // A crossing hidden between grid points can be missed by two successive
    // grids alike; a simple crossing flips the parity, so that is checked too.
    let end_parity = parity(&SymplecticMatrix::new_unchecked(path.eval(1.0))).ok();
    let index_of = |c: &[CrossingRecord]| {
        start_contribution + c.iter().map(|c| c.signature_contribution).sum::<i64>() + end_contribution
    };
    let mut grid = cfg.grid.max(16);
    let mut previous = scan(path, cfg, grid)?;
    loop {
        let next_grid = grid * 2;
        if next_grid > cfg.max_grid {
            return Err(Error::UnresolvedCrossing {
                t0: 0.0,
                t1: 1.0,
                reason: format!("crossing count not stable up to grid {grid}"),
            });
        }
        let next = scan(path, cfg, next_grid)?;
        let parity_ok = end_parity.is_none_or(|p| index_of(&next).rem_euclid(2) == p as i64);
        if same_crossings(&previous, &next) && parity_ok {
            break;
        }
        grid = next_grid;
        previous = next;
    }
    let crossings = previous;
    Ok(CzReport {
        index: index_of(&crossings),
        morse_index: crossings.iter().map(|c| c.kernel_dim).sum(),
        nullity,
        nullity_borderline: borderline,
        start_contribution,
        endpoint_contribution: end_contribution,
        crossings,
        grid,
    })
}

fn same_crossings(a: &[CrossingRecord], b: &[CrossingRecord]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.kernel_dim == y.kernel_dim
                && x.signature_contribution == y.signature_contribution
                && (x.time - y.time).abs() < 1e-7
        })
}

/// `S(t) = −J Γ'(t) Γ(t)⁻¹`, symmetrized.
fn generator(path: &SymplecticPath, t: f64, h: f64) -> Mat {
    let d = path.dim();
    let j = j_matrix(d / 2);
    let deriv = if path.extends_beyond_unit_interval() || (t - h >= 0.0 && t + h <= 1.0) {
        (path.eval(t + h) - path.eval(t - h)) / (2.0 * h)
    } else if t - 2.0 * h < 0.0 {
        (path.eval(t + h) * 4.0 - path.eval(t + 2.0 * h) - path.eval(t) * 3.0) / (2.0 * h)
    } else {
        (path.eval(t) * 3.0 - path.eval(t - h) * 4.0 + path.eval(t - 2.0 * h)) / (2.0 * h)
    };
    let inv = SymplecticMatrix::new_unchecked(path.eval(t)).inverse().into_inner();
    let s = -(j * deriv * inv);
    (&s + s.transpose()) * 0.5
}

/// Signature of a symmetric form; errors when it is degenerate.
fn signature(q: Mat, scale: f64, t: f64, h: f64) -> Result<i64> {
    let ev = SymmetricEigen::new(q).eigenvalues;
    let floor = 1e-7 * scale.max(1e-12);
    if ev.iter().any(|e| e.abs() < floor) {
        return Err(Error::UnresolvedCrossing {
            t0: (t - h).max(0.0),
            t1: (t + h).min(1.0),
            reason: "degenerate crossing form".into(),
        });
    }
    Ok(ev.iter().map(|&e| if e > 0.0 { 1 } else { -1 }).sum())
}

fn start_contribution(path: &SymplecticPath, cfg: &CzConfig) -> Result<i64> {
    let s = generator(path, 0.0, cfg.fd_step);
    let scale = s.amax();
    let sig = signature(s, scale, 0.0, cfg.fd_step)?;
    Ok(sig / 2)
}

fn crossing_form(path: &SymplecticPath, t: f64, cfg: &CzConfig) -> Result<(usize, i64)> {
    let m = path.eval(t);
    let d = m.nrows();
    let a = &m - Mat::identity(d, d);
    let scale = 1.0f64.max(m.amax());
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let idx: Vec<usize> = (0..d)
        .filter(|&i| svd.singular_values[i] < cfg.tol_ker * scale)
        .collect();
    if idx.is_empty() {
        return Ok((0, 0));
    }
    let mut basis = DMatrix::zeros(d, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        basis.set_column(c, &vt.row(i).transpose());
    }
    let s = generator(path, t, cfg.fd_step);
    let scale_s = s.amax();
    let q = basis.transpose() * s * &basis;
    let sig = signature(q, scale_s, t, cfg.fd_step)?;
    Ok((idx.len(), sig))
}

fn endpoint(path: &SymplecticPath, cfg: &CzConfig) -> Result<(i64, usize, bool)> {
    let end = path.eval(1.0);
    let (k, borderline) = kernel_dim(&end, cfg.tol_ker);
    if k == 0 {
        return Ok((0, 0, borderline));
    }
    let (k2, sig) = crossing_form(path, 1.0, cfg)?;
    debug_assert_eq!(k, k2);
    if (sig - k as i64).rem_euclid(2) != 0 {
        return Err(Error::UnresolvedCrossing {
            t0: 1.0 - cfg.fd_step,
            t1: 1.0,
            reason: "endpoint signature parity mismatch".into(),
        });
    }
    Ok(((sig - k as i64) / 2, k, borderline))
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn scan(path: &SymplecticPath, cfg: &CzConfig, grid: usize) -> Result<Vec<CrossingRecord>> {
    let ts: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    let mut f = vec![0.0; grid + 1];
    for i in 1..=grid {
        f[i] = sigma_min_fast(&path.eval(ts[i]));
    }
    let end_degenerate = kernel_dim(&path.eval(1.0), cfg.tol_ker).0 > 0;
    let mut candidates = Vec::new();
    for i in 1..=grid {
        let left_ok = i == 1 || f[i] <= f[i - 1];
        let right_ok = i == grid || f[i] <= f[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        if i == grid && end_degenerate {
            continue;
        }
        let a = if i == 1 { ts[1] * 0.5 } else { ts[i - 1] };
        let b = if i == grid { 1.0 } else { ts[i + 1] };
        candidates.push((a, b));
    }

    let mut out: Vec<CrossingRecord> = Vec::new();
    // A bracket may hold two crossings closer than the grid spacing, so every
    // hit splits its bracket and both sides are searched again.
    while let Some((a, b)) = candidates.pop() {
        let (t, val) = golden_min(|t| sigma_min(&path.eval(t)), a, b);
        let scale = 1.0f64.max(path.eval(t).amax());
        if val >= cfg.tol_ker * scale {
            continue;
        }
        if b - t > 2.0 * SPLIT_GAP {
            candidates.push((t + SPLIT_GAP, b));
        }
        if t - a > 2.0 * SPLIT_GAP {
            candidates.push((a, t - SPLIT_GAP));
        }
        if t >= 1.0 - 1e-9 || t <= 1e-12 {
            continue;
        }
        if out.iter().any(|c| (c.time - t).abs() < 1e-9) {
            continue;
        }
        let (k, sig) = crossing_form(path, t, cfg)?;
        if k == 0 {
            continue;
        }
        out.push(CrossingRecord {
            time: t,
            kernel_dim: k,
            signature_contribution: sig,
        });
    }
    out.sort_by(|x, y| x.time.total_cmp(&y.time));
    Ok(out)
}

/// Parity of the index of any identity-based path ending at `m`.
///
/// Non-degenerate `m`: `(−1)^{n − μ} = sign det(m − I)`. Degenerate `m` is
/// first pushed off the Maslov cycle by `e^{−εJ}`, matching the lower
/// semicontinuous convention.
pub fn parity(m: &SymplecticMatrix) -> Result<u8> {
    let n = m.half_dim();
    let d = m.dim();
    let scale = 1.0f64.max(m.matrix().amax()).powi(d as i32);
    let det = (m.matrix() - Mat::identity(d, d)).determinant();
    let (k, _) = kernel_dim(m.matrix(), TOL_KER);
    if k == 0 && det.abs() > 1e-8 * scale {
        return Ok(parity_from_sign(n, det));
    }
    let mut signs = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        let mut r = Mat::zeros(d, d);
        for h in 0..n {
            put_rotation(&mut r, h, -eps / std::f64::consts::TAU);
        }
        let pert = r * m.matrix() - Mat::identity(d, d);
        signs.push(pert.determinant());
    }
    for w in signs.windows(2) {
        if w[0] != 0.0 && w[0].signum() == w[1].signum() {
            return Ok(parity_from_sign(n, w[1]));
        }
    }
    Err(Error::AmbiguousParity { margin: det.abs() })
}

fn parity_from_sign(n: usize, det: f64) -> u8 {
    if det > 0.0 {
        (n % 2) as u8
    } else {
        ((n + 1) % 2) as u8
    }
}
