//! Reeb flow on `Σ = ∂C` by direct integration of `ż = J∇H₂(z)`, closed
//! orbit search by shooting, monodromy block decomposition, Conley–Zehnder
//! indices of found orbits and a sampling test for the Besse property.

use std::sync::Arc;

use nalgebra::{Complex, SymmetricEigen};
use serde::Serialize;

use crate::body::{ConvexBody, Vector};
use crate::cz::{analyze, CzConfig};
use crate::error::{invalid, Error, Result};
use crate::integrator::Dp5;
use crate::symplectic::{j_matrix, symplectic_defect, Mat, PathEvaluator, SymplecticPath};
use crate::util::{boundary_samples, halton_directions, par_map};

pub const TOL_ORBIT: f64 = 1e-9;
pub const TOL_BESSE: f64 = 1e-6;
pub const TOL_DEDUP: f64 = 1e-6;
pub const TOL_ON_SURFACE: f64 = 1e-10;
/// Block decomposition residual above which indices are flagged.
pub const TOL_BLOCKS: f64 = 1e-6;
const KERNEL_TOL: f64 = 1e-7;
const CHECKPOINTS: usize = 128;

/// `X(z) = J∇H₂(z)`, the Reeb vector field on `Σ`.
pub fn reeb_vector(body: &ConvexBody, z: &[f64]) -> Vector {
    let (_, g) = body.h2_grad(z);
    j_matrix(body.n()) * g
}

fn check_on_surface(body: &ConvexBody, z: &[f64]) -> Result<()> {
    if z.len() != body.dim() {
        return invalid(format!("point has {} coordinates, expected {}", z.len(), body.dim()));
    }
    let level = body.h2(z);
    if !((level - 1.0).abs() <= TOL_ON_SURFACE) {
        return Err(Error::OffSurface {
            level,
            expected: 1.0,
        });
    }
    Ok(())
}

fn field(body: &ConvexBody, z: &[f64], out: &mut [f64]) {
    let (_, g) = body.h2_grad(z);
    for h in 0..body.n() {
        out[2 * h] = -g[2 * h + 1];
        out[2 * h + 1] = g[2 * h];
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub point: Vec<f64>,
    pub steps: usize,
    /// Largest `|H₂ − 1|` seen before the radial re-projection of a step.
    pub max_drift: f64,
    pub warnings: Vec<String>,
}

/// `φ^t(z)` by Dormand–Prince with radial projection onto `Σ`.
pub fn integrate_reeb(body: &ConvexBody, z: &[f64], t: f64) -> Result<Vec<f64>> {
    Ok(integrate_reeb_report(body, z, t)?.point)
}

pub fn integrate_reeb_report(body: &ConvexBody, z: &[f64], t: f64) -> Result<FlowReport> {
    check_on_surface(body, z)?;
    let mut max_drift: f64 = 0.0;
    let sol = Dp5::default().integrate(
        |_, y, dy| field(body, y, dy),
        0.0,
        z,
        t,
        None,
        |y| {
            let s = body.h2(y);
            max_drift = max_drift.max((s - 1.0).abs());
            let r = s.sqrt();
            y.iter_mut().for_each(|x| *x /= r);
        },
    )?;
    let mut warnings = Vec::new();
    if max_drift > 1e-9 {
        warnings.push(format!("energy drift {max_drift:e} corrected by re-projection"));
    }
    Ok(FlowReport {
        point: sol.y,
        steps: sol.steps,
        max_drift,
        warnings,
    })
}

/// `(φ^t(z), dφ^t(z))` with the variational equation `Φ' = J∇²H₂ Φ`.
pub fn flow_with_variation(body: &ConvexBody, z: &[f64], t: f64) -> Result<(Vec<f64>, Mat)> {
    let d = body.dim();
    let mut y0 = z.to_vec();
    y0.extend(Mat::identity(d, d).iter());
    let j = j_matrix(body.n());
    let sol = Dp5::default().integrate(
        |_, y, dy| {
            let (_, g, hs) = body.h2_hess(&y[..d]);
            let jg = &j * g;
            dy[..d].copy_from_slice(jg.as_slice());
            let phi = Mat::from_column_slice(d, d, &y[d..]);
            let dphi = &j * hs * phi;
            dy[d..].copy_from_slice(dphi.as_slice());
        },
        0.0,
        &y0,
        t,
        None,
        |y| {
            let r = body.h2(&y[..d]).sqrt();
            y[..d].iter_mut().for_each(|x| *x /= r);
        },
    )?;
    let phi = Mat::from_column_slice(d, d, &sol.y[d..]);
    Ok((sol.y[..d].to_vec(), phi))
}

/// Linearized flow of the degree-`α` Hamiltonian along a `τ`-periodic Reeb
/// orbit, on `[0, 1]`: `Γ' = τ J A_α(γ(τs)) Γ`,
/// `A_α = ∇²H₂ + (α/2 − 1) ∇H₂ ∇H₂ᵀ`. Evaluations restart from stored
/// checkpoints.
struct LinearizedFlow {
    body: ConvexBody,
    tau: f64,
    alpha: f64,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl LinearizedFlow {
    fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let d = self.body.dim();
        let j = j_matrix(self.body.n());
        let (_, g, hs) = self.body.h2_hess(&y[..d]);
        let jg = (&j * &g) * self.tau;
        dy[..d].copy_from_slice(jg.as_slice());
        let a = hs + (&g * g.transpose()) * (self.alpha / 2.0 - 1.0);
        let gamma = Mat::from_column_slice(d, d, &y[d..]);
        let dg = (&j * a * gamma) * self.tau;
        dy[d..].copy_from_slice(dg.as_slice());
    }

    fn build(body: &ConvexBody, z0: &[f64], tau: f64, alpha: f64) -> Result<Self> {
        let d = body.dim();
        let mut flow = LinearizedFlow {
            body: body.clone(),
            tau,
            alpha,
            times: vec![0.0],
            states: vec![],
        };
        let mut y = z0.to_vec();
        y.extend(Mat::identity(d, d).iter());
        flow.states.push(y.clone());
        let mut h = None;
        for k in 1..=CHECKPOINTS {
            let (t0, t1) = ((k - 1) as f64 / CHECKPOINTS as f64, k as f64 / CHECKPOINTS as f64);
            let sol = flow.step(&y, t0, t1, h)?;
            h = Some(sol.1);
            y = sol.0;
            flow.times.push(t1);
            flow.states.push(y.clone());
        }
        Ok(flow)
    }

    fn step(&self, y: &[f64], t0: f64, t1: f64, h: Option<f64>) -> Result<(Vec<f64>, f64)> {
        let d = self.body.dim();
        let sol = Dp5::default().integrate(
            |_, y, dy| self.rhs(y, dy),
            t0,
            y,
            t1,
            h,
            |y| {
                let r = self.body.h2(&y[..d]).sqrt();
                y[..d].iter_mut().for_each(|x| *x /= r);
            },
        )?;
        Ok((sol.y, sol.h))
    }

    fn end(&self) -> Mat {
        let d = self.body.dim();
        Mat::from_column_slice(d, d, &self.states[CHECKPOINTS][d..])
    }
}

impl PathEvaluator for LinearizedFlow {
    fn dim(&self) -> usize {
        self.body.dim()
    }

    fn eval(&self, t: f64) -> Mat {
        let d = self.body.dim();
        let t = t.clamp(0.0, 1.0);
        let k = ((t * CHECKPOINTS as f64).floor() as usize).min(CHECKPOINTS);
        let y = if self.times[k] == t {
            self.states[k].clone()
        } else {
            match self.step(&self.states[k], self.times[k], t, None) {
                Ok((y, _)) => y,
                Err(_) => vec![f64::NAN; d + d * d],
            }
        };
        Mat::from_column_slice(d, d, &y[d..])
    }

    fn label(&self) -> &str {
        "reeb-linearized-flow"
    }
}

/// `Γ_α` along the orbit through `z0` of period `tau`.
pub fn linearized_path(body: &ConvexBody, z0: &[f64], tau: f64, alpha: f64) -> Result<SymplecticPath> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return invalid("alpha must lie in (1, 2]");
    }
    check_on_surface(body, z0)?;
    Ok(SymplecticPath::Custom(Arc::new(LinearizedFlow::build(
        body, z0, tau, alpha,
    )?)))
}

fn omega(u: &Vector, v: &Vector) -> f64 {
    let n = u.len() / 2;
    (0..n)
        .map(|h| -u[2 * h + 1] * v[2 * h] + u[2 * h] * v[2 * h + 1])
        .sum()
}

/// Symplectic basis `(e_1, f_1, …)` of `E^ω`, `E = span(v0, z0)`.
fn symplectic_complement_basis(z0: &Vector, v0: &Vector) -> Vec<Vector> {
    let d = z0.len();
    let j = j_matrix(d / 2);
    let a = (&j * v0).normalize();
    let b = &j * z0;
    let b = (&b - &a * a.dot(&b)).normalize();
    let proj = Mat::identity(d, d) - &a * a.transpose() - &b * b.transpose();
    let eig = SymmetricEigen::new(proj);
    let mut w: Vec<Vector> = (0..d)
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let mut basis = Vec::with_capacity(w.len());
    while !w.is_empty() {
        let e = w.remove(0);
        let (jmax, _) = w
            .iter()
            .enumerate()
            .map(|(i, x)| (i, omega(&e, x).abs()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let f_raw = w.remove(jmax);
        let f = &f_raw / omega(&e, &f_raw);
        for x in w.iter_mut() {
            let (we, wf) = (omega(x, &e), omega(x, &f));
            *x += &f * we - &e * wf;
        }
        basis.push(e);
        basis.push(f);
    }
    basis
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockDecomposition {
    /// `Γ_α(1)` on `E` in the basis `(γ̇(0), γ(0))`.
    pub m_alpha: [[f64; 2]; 2],
    /// `[[1, (α−2)τ], [0, 1]]`.
    pub m_alpha_expected: [[f64; 2]; 2],
    /// `Γ_α(1)` restricted to `E^ω` in a symplectic basis.
    pub return_block: Vec<Vec<f64>>,
    pub residual: f64,
    pub return_block_kernel: usize,
    pub return_block_eigenvalues: Vec<[f64; 2]>,
}

/// Splits `Γ_α(1)` along `E ⊕ E^ω`.
pub fn decompose(gamma1: &Mat, z0: &[f64], tau: f64, alpha: f64, v0: &[f64]) -> BlockDecomposition {
    let d = gamma1.nrows();
    let z = Vector::from_column_slice(z0);
    let v = Vector::from_column_slice(v0);
    let mut cols = vec![v.clone(), z.clone()];
    cols.extend(symplectic_complement_basis(&z, &v));
    let basis = Mat::from_columns(&cols);
    let coords = basis
        .clone()
        .lu()
        .solve(&(gamma1 * &basis))
        .unwrap_or_else(|| Mat::from_element(d, d, f64::NAN));
    let m = [
        [coords[(0, 0)], coords[(0, 1)]],
        [coords[(1, 0)], coords[(1, 1)]],
    ];
    let expected = [[1.0, (alpha - 2.0) * tau], [0.0, 1.0]];
    let nb = coords.view((2, 2), (d - 2, d - 2)).into_owned();
    let scale = 1.0f64.max(gamma1.amax());
    let off = coords
        .view((0, 2), (2, d - 2))
        .amax()
        .max(coords.view((2, 0), (d - 2, 2)).amax());
    let mdiff = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (m[i][j] - expected[i][j]).abs())
        .fold(0.0, f64::max);
    let residual = off.max(mdiff) / scale;
    let (kernel, eigs) = if d > 2 {
        let sv = (&nb - Mat::identity(d - 2, d - 2)).singular_values();
        let k = sv.iter().filter(|&&s| s < KERNEL_TOL * scale).count();
        (k, eigen_pairs(&nb))
    } else {
        (0, vec![])
    };
    BlockDecomposition {
        m_alpha: m,
        m_alpha_expected: expected,
        return_block: (0..d - 2)
            .map(|i| (0..d - 2).map(|j| nb[(i, j)]).collect())
            .collect(),
        residual,
        return_block_kernel: kernel,
        return_block_eigenvalues: eigs,
    }
}

fn eigen_pairs(m: &Mat) -> Vec<[f64; 2]> {
    let ev: nalgebra::DVector<Complex<f64>> = m.complex_eigenvalues();
    let mut out: Vec<[f64; 2]> = ev.iter().map(|c| [c.re, c.im]).collect();
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitIndices {
    pub alpha: f64,
    pub cz: i64,
    pub morse: i64,
    pub nullity: usize,
    /// `1 + dim ker(N − I)`.
    pub nullity_from_return_block: usize,
    pub blocks: BlockDecomposition,
    /// Decomposition residual above tolerance; indices come from the raw path.
    pub flagged: bool,
}

#[derive(Clone, Debug)]
pub struct ClosedOrbit {
    /// Minimal period.
    pub period: f64,
    pub initial_point: Vec<f64>,
    /// `‖φ^τ(z) − z‖`.
    pub residual: f64,
    /// `dφ^τ(z)` of the Reeb flow.
    pub monodromy: Mat,
    /// Multiples `kτ` inside the search window.
    pub multiples: Vec<f64>,
    pub indices: Option<OrbitIndices>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitExport {
    pub period: f64,
    pub initial_point: Vec<f64>,
    pub residual: f64,
    pub cz: Option<i64>,
    pub morse: Option<i64>,
    pub nullity: Option<usize>,
    pub monodromy_eigenvalues: Vec<[f64; 2]>,
}

impl ClosedOrbit {
    pub fn export(&self) -> OrbitExport {
        OrbitExport {
            period: self.period,
            initial_point: self.initial_point.clone(),
            residual: self.residual,
            cz: self.indices.as_ref().map(|i| i.cz),
            morse: self.indices.as_ref().map(|i| i.morse),
            nullity: self.indices.as_ref().map(|i| i.nullity),
            monodromy_eigenvalues: eigen_pairs(&self.monodromy),
        }
    }

    pub fn monodromy_defect(&self) -> f64 {
        symplectic_defect(&self.monodromy)
    }
}

/// Fills in `cz`, `morse = cz − n` and the nullity of the orbit at degree `alpha`.
pub fn monodromy_and_index(body: &ConvexBody, orbit: &ClosedOrbit, alpha: f64) -> Result<ClosedOrbit> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return invalid("alpha must lie in (1, 2)");
    }
    check_on_surface(body, &orbit.initial_point)?;
    let flow = Arc::new(LinearizedFlow::build(
        body,
        &orbit.initial_point,
        orbit.period,
        alpha,
    )?);
    let gamma1 = flow.end();
    let v0 = reeb_vector(body, &orbit.initial_point);
    let blocks = decompose(&gamma1, &orbit.initial_point, orbit.period, alpha, v0.as_slice());
    let path = SymplecticPath::Custom(flow);
    let report = analyze(&path, &CzConfig::default())?;
    let n = body.n() as i64;
    let mut out = orbit.clone();
    out.indices = Some(OrbitIndices {
        alpha,
        cz: report.index,
        morse: report.index - n,
        nullity: report.nullity,
        nullity_from_return_block: 1 + blocks.return_block_kernel,
        flagged: blocks.residual > TOL_BLOCKS,
        blocks,
    });
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct OrbitSearchConfig {
    pub t_max: f64,
    /// Quasi-random surface seeds in addition to the coordinate-plane seeds.
    pub seeds: usize,
    pub plane_seeds: bool,
    /// Trajectory samples per unit time when scanning for near-returns.
    pub samples_per_unit: usize,
    pub max_newton: usize,
    pub tol_orbit: f64,
}

impl Default for OrbitSearchConfig {
    fn default() -> Self {
        OrbitSearchConfig {
            t_max: 3.0,
            seeds: 8,
            plane_seeds: true,
            samples_per_unit: 400,
            max_newton: 30,
            tol_orbit: TOL_ORBIT,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitSearch {
    pub orbits: Vec<ClosedOrbit>,
    pub log: Vec<String>,
}

/// Shooting from `(z, τ)` with the section `⟨z − z_s, X(z_s)⟩ = 0`.
pub fn shoot(body: &ConvexBody, z_start: &[f64], tau_start: f64, max_iter: usize, tol: f64) -> Result<ClosedOrbit> {
    let d = body.dim();
    let zs = body.project(z_start);
    let xs = reeb_vector(body, &zs);
    let mut z = zs.clone();
    let mut tau = tau_start;
    let diameter = body.diameter();
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        let (zt, phi) = flow_with_variation(body, &z, tau)?;
        let disp: Vec<f64> = zt.iter().zip(&z).map(|(a, b)| a - b).collect();
        let res = disp.iter().map(|x| x * x).sum::<f64>().sqrt();
        last = res;
        if res < tol {
            return Ok(ClosedOrbit {
                period: tau,
                initial_point: z,
                residual: res,
                monodromy: phi,
                multiples: vec![],
                indices: None,
            });
        }
        let (s, g) = body.h2_grad(&z);
        let xt = reeb_vector(body, &zt);
        let mut jac = Mat::zeros(d + 2, d + 1);
        jac.view_mut((0, 0), (d, d))
            .copy_from(&(&phi - Mat::identity(d, d)));
        for i in 0..d {
            jac[(i, d)] = xt[i];
            jac[(d, i)] = g[i];
            jac[(d + 1, i)] = xs[i];
        }
        let mut r = Vector::zeros(d + 2);
        r.rows_mut(0, d).copy_from_slice(&disp);
        r[d] = s - 1.0;
        r[d + 1] = z.iter().zip(&zs).zip(xs.iter()).map(|((a, b), x)| (a - b) * x).sum();
        let svd = jac.svd(true, true);
        let eps = 1e-10 * svd.singular_values.max();
        let mut step = svd
            .solve(&r, eps)
            .map_err(|e| Error::Integration(format!("shooting solve failed: {e}")))?;
        let nz = step.rows(0, d).norm();
        if nz > 0.1 * diameter {
            step *= 0.1 * diameter / nz;
        }
        let znew: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a - b).collect();
        z = body.project(&znew);
        tau -= step[d];
        if !(tau > 0.0) {
            return Err(Error::NoConvergence {
                what: "orbit shooting (period collapsed)".into(),
                iterations: max_iter,
                best: res,
                grad_norm: res,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "orbit shooting".into(),
        iterations: max_iter,
        best: last,
        grad_norm: last,
    })
}

fn displacement(body: &ConvexBody, z: &[f64], t: f64) -> Result<f64> {
    let w = integrate_reeb(body, z, t)?;
    Ok(w.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Reduces a converged orbit to its minimal period.
fn minimal_period(body: &ConvexBody, orbit: ClosedOrbit, cfg: &OrbitSearchConfig) -> Result<ClosedOrbit> {
    let scale = body.diameter();
    let mut best = None;
    for k in 2..=24usize {
        let t = orbit.period / k as f64;
        if displacement(body, &orbit.initial_point, t)? < 1e-6 * scale {
            best = Some(k);
        }
    }
    match best {
        None => Ok(orbit),
        Some(k) => shoot(
            body,
            &orbit.initial_point,
            orbit.period / k as f64,
            cfg.max_newton,
            cfg.tol_orbit,
        ),
    }
}

/// Trajectory samples `φ^{t_k}(z)` on a uniform grid.
fn sample_trajectory(body: &ConvexBody, z: &[f64], t_max: f64, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![z.to_vec()];
    let mut y = z.to_vec();
    let mut h = None;
    let dt = t_max / count as f64;
    for k in 0..count {
        let sol = Dp5::default().integrate(
            |_, y, dy| field(body, y, dy),
            k as f64 * dt,
            &y,
            (k + 1) as f64 * dt,
            h,
            |y| {
                let r = body.h2(y).sqrt();
                y.iter_mut().for_each(|x| *x /= r);
            },
        )?;
        h = Some(sol.h);
        y = sol.y;
        out.push(y.clone());
    }
    Ok(out)
}

/// `min_s ‖φ^s(a) − b‖` over one period of the orbit through `a`.
pub fn orbit_distance(body: &ConvexBody, a: &ClosedOrbit, b: &[f64]) -> Result<f64> {
    let count = 256;
    let samples = sample_trajectory(body, &a.initial_point, a.period, count)?;
    let dist = |p: &[f64]| p.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let (kbest, dbest) = samples
        .iter()
        .enumerate()
        .map(|(k, p)| (k, dist(p)))
        .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    let dt = a.period / count as f64;
    let base = &samples[kbest];
    // Golden-section refinement on [−dt, dt] around the best sample.
    let f = |s: f64| -> f64 {
        integrate_reeb(body, base, s).map(|p| dist(&p)).unwrap_or(f64::INFINITY)
    };
    let (mut lo, mut hi) = (-dt, dt);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    Ok(dbest.min(f1).min(f2))
}

fn seeds(body: &ConvexBody, cfg: &OrbitSearchConfig) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    if cfg.plane_seeds {
        for h in 0..body.n() {
            let mut e = vec![0.0; body.dim()];
            e[2 * h] = 1.0;
            out.push(body.project(&e));
        }
    }
    for u in halton_directions(body.dim(), cfg.seeds, 17) {
        out.push(body.project(u.as_slice()));
    }
    out
}

fn candidates_for_seed(body: &ConvexBody, z: &[f64], cfg: &OrbitSearchConfig) -> Result<Vec<f64>> {
    let count = ((cfg.t_max * 1.05) * cfg.samples_per_unit as f64).ceil() as usize;
    let t_end = cfg.t_max * 1.05;
    let traj = sample_trajectory(body, z, t_end, count)?;
    let dist: Vec<f64> = traj
        .iter()
        .map(|p| p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .collect();
    let dt = t_end / count as f64;
    let thresh = 0.2 * body.diameter();
    let mut mins: Vec<(f64, f64)> = (1..count)
        .filter(|&k| dist[k] < dist[k - 1] && dist[k] <= dist[k + 1] && dist[k] < thresh)
        .map(|k| (k as f64 * dt, dist[k]))
        .collect();
    mins.sort_by(|a, b| a.1.total_cmp(&b.1));
    mins.truncate(6);
    Ok(mins.into_iter().map(|m| m.0).collect())
}

/// Closed orbits with minimal period in `(0, t_max]`, deduplicated.
pub fn find_closed_orbits(body: &ConvexBody, cfg: &OrbitSearchConfig) -> Result<OrbitSearch> {
    if !(cfg.t_max > 0.0) {
        return invalid("t_max must be positive");
    }
    let seed_points = seeds(body, cfg);
    let per_seed = par_map(&seed_points, |z| -> (Vec<ClosedOrbit>, Vec<String>) {
        let mut found = Vec::new();
        let mut log = Vec::new();
        let cands = match candidates_for_seed(body, z, cfg) {
            Ok(c) => c,
            Err(e) => {
                log.push(format!("seed scan failed: {e}"));
                return (found, log);
            }
        };
        for tau in cands {
            match shoot(body, z, tau, cfg.max_newton, cfg.tol_orbit)
                .and_then(|o| minimal_period(body, o, cfg))
            {
                Ok(o) if o.period <= cfg.t_max * (1.0 + 1e-9) => found.push(o),
                Ok(_) => {}
                Err(e) => log.push(format!("shooting from candidate period {tau:.6}: {e}")),
            }
        }
        (found, log)
    });
    let mut orbits: Vec<ClosedOrbit> = Vec::new();
    let mut log = Vec::new();
    let scale = body.diameter();
    for (found, l) in per_seed {
        log.extend(l);
        'next: for o in found {
            for kept in &orbits {
                if (kept.period - o.period).abs() <= TOL_DEDUP * kept.period.max(1.0)
                    && orbit_distance(body, kept, &o.initial_point)? < TOL_DEDUP * scale.max(1.0)
                {
                    continue 'next;
                }
            }
            orbits.push(o);
        }
    }
    orbits.sort_by(|a, b| a.period.total_cmp(&b.period));
    for o in &mut orbits {
        let mut k = 1;
        while k as f64 * o.period <= cfg.t_max * (1.0 + 1e-9) {
            o.multiples.push(k as f64 * o.period);
            k += 1;
        }
    }
    Ok(OrbitSearch { orbits, log })
}

/// Runs [`monodromy_and_index`] on every orbit of a search; failures are
/// logged and leave `indices` empty.
pub fn index_orbits(body: &ConvexBody, search: &mut OrbitSearch, alpha: f64) {
    let done = par_map(&search.orbits, |o| monodromy_and_index(body, o, alpha));
    for (o, r) in search.orbits.iter_mut().zip(done) {
        match r {
            Ok(x) => *o = x,
            Err(e) => search.log.push(format!("indices for period {:.9}: {e}", o.period)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BesseTest {
    pub tau: f64,
    pub samples: usize,
    pub max_displacement: f64,
    pub tolerance: f64,
    /// Numerical evidence only, never a proof.
    pub besse: bool,
    pub witness: Option<Vec<f64>>,
    pub evidence: &'static str,
}

/// Largest `‖φ^τ(z) − z‖` over quasi-uniform samples on `Σ`.
pub fn numerical_besse_test(body: &ConvexBody, tau: f64, samples: usize) -> Result<BesseTest> {
    if !(tau > 0.0) || samples == 0 {
        return invalid("numerical Besse test needs tau > 0 and at least one sample");
    }
    let points = boundary_samples(body, samples);
    let disp = par_map(&points, |z| displacement(body, z, tau));
    let mut worst = (0usize, 0.0f64);
    for (i, d) in disp.into_iter().enumerate() {
        let d = d?;
        if d > worst.1 {
            worst = (i, d);
        }
    }
    let tolerance = TOL_BESSE * body.diameter();
    let besse = worst.1 < tolerance;
    Ok(BesseTest {
        tau,
        samples,
        max_displacement: worst.1,
        tolerance,
        besse,
        witness: (!besse).then(|| points[worst.0].clone()),
        evidence: "numerical evidence",
    })
}
