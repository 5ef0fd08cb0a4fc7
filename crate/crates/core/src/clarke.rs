//! Clarke's dual action functional on a truncated Fourier model of
//! zero-mean loops,
//!
//! `Ψ(u) = ∫₀¹ −½⟨Jζ, u⟩ + H*(−Ju) dt`,  `ζ̇ = u`,  `∫ζ = 0`,
//!
//! and its renormalization `𝒜 = (α/2)((2/(α−2))Ψ)^{(α−2)/α}`, whose
//! critical values are periods of closed Reeb orbits and whose minimum is the
//! systole.
//!
//! A loop is stored as `c_k = x_k + i·y_k ∈ C^{2n}`, `k = 1..K`, with
//! `u(t) = Σ_k 2 Re(c_k e^{2πikt})`. The quadratic part is diagonal:
//! `Σ_k ⟨J x_k, y_k⟩/(πk)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::body::ConvexBody;
use crate::error::{invalid, Error, Result};
use crate::optimize::{lbfgs, LbfgsConfig};
use crate::util::par_map;

pub const DEFAULT_MODES: usize = 64;
pub const MIN_OVERSAMPLE: usize = 4;
/// Share of `Σ|c_k|²` in the top quarter of modes above which refinement is advised.
pub const TOP_MODE_ENERGY: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierLoop {
    pub n: usize,
    pub modes: usize,
    /// Quadrature points on `[0, 1)`.
    pub grid: usize,
    /// `[x_1, y_1, x_2, y_2, …]`, each block of length `2n`.
    pub coeffs: Vec<f64>,
}

impl FourierLoop {
    pub fn zeros(n: usize, modes: usize, grid: usize) -> Result<Self> {
        if n == 0 || modes == 0 {
            return invalid("loop needs n >= 1 and at least one mode");
        }
        if grid < 2 * modes * MIN_OVERSAMPLE {
            return invalid(format!(
                "quadrature grid {grid} too coarse for {modes} modes (need >= {})",
                2 * modes * MIN_OVERSAMPLE
            ));
        }
        Ok(FourierLoop {
            n,
            modes,
            grid,
            coeffs: vec![0.0; 4 * n * modes],
        })
    }

    pub fn from_coeffs(n: usize, modes: usize, grid: usize, coeffs: Vec<f64>) -> Result<Self> {
        let mut l = Self::zeros(n, modes, grid)?;
        if coeffs.len() != l.coeffs.len() {
            return invalid("coefficient vector has the wrong length");
        }
        l.coeffs = coeffs;
        Ok(l)
    }

    fn block(&self, k: usize) -> usize {
        (k - 1) * 4 * self.n
    }

    /// `(x_k, y_k)` for `k ≥ 1`.
    pub fn mode(&self, k: usize) -> (&[f64], &[f64]) {
        let b = self.block(k);
        let d = 2 * self.n;
        (&self.coeffs[b..b + d], &self.coeffs[b + d..b + 2 * d])
    }

    pub fn set_mode(&mut self, k: usize, x: &[f64], y: &[f64]) {
        let b = self.block(k);
        let d = 2 * self.n;
        self.coeffs[b..b + d].copy_from_slice(x);
        self.coeffs[b + d..b + 2 * d].copy_from_slice(y);
    }

    /// `u(t)` evaluated directly.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let d = 2 * self.n;
        let mut u = vec![0.0; d];
        for k in 1..=self.modes {
            let (x, y) = self.mode(k);
            let (s, c) = (2.0 * PI * k as f64 * t).sin_cos();
            for i in 0..d {
                u[i] += 2.0 * (x[i] * c - y[i] * s);
            }
        }
        u
    }

    /// Time shift `u(· + s)`: `c_k ↦ c_k e^{2πiks}`.
    pub fn shifted(&self, s: f64) -> Self {
        let mut out = self.clone();
        let d = 2 * self.n;
        for k in 1..=self.modes {
            let (x, y) = self.mode(k);
            let (sn, cs) = (2.0 * PI * k as f64 * s).sin_cos();
            let nx: Vec<f64> = (0..d).map(|i| x[i] * cs - y[i] * sn).collect();
            let ny: Vec<f64> = (0..d).map(|i| x[i] * sn + y[i] * cs).collect();
            out.set_mode(k, &nx, &ny);
        }
        out
    }

    /// `t ↦ u(kt)` with the same truncation (higher modes dropped).
    pub fn iterate(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = 0.0);
        for j in 1..=self.modes {
            if j * k > self.modes {
                break;
            }
            let (x, y) = self.mode(j);
            let (x, y) = (x.to_vec(), y.to_vec());
            out.set_mode(j * k, &x, &y);
        }
        out
    }

    /// Same loop with `modes` modes (truncating or zero-padding).
    pub fn resized(&self, modes: usize, grid: usize) -> Result<Self> {
        let mut out = Self::zeros(self.n, modes, grid)?;
        for k in 1..=modes.min(self.modes) {
            let (x, y) = self.mode(k);
            let (x, y) = (x.to_vec(), y.to_vec());
            out.set_mode(k, &x, &y);
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    /// Fraction of `Σ|c_k|²` carried by modes `k > 3K/4`.
    pub fn top_mode_energy(&self) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c * c).sum();
        if total == 0.0 {
            return 0.0;
        }
        let cut = (3 * self.modes) / 4;
        let top: f64 = self.coeffs[cut * 4 * self.n..].iter().map(|c| c * c).sum();
        top / total
    }
}

/// Reusable FFT plans for one grid size.
#[derive(Clone)]
pub struct Quadrature {
    grid: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Quadrature {
    pub fn new(grid: usize) -> Self {
        let mut planner = FftPlanner::new();
        Quadrature {
            grid,
            forward: planner.plan_fft_forward(grid),
            inverse: planner.plan_fft_inverse(grid),
        }
    }

    /// `u(j/M)` for `j = 0..M` as `M` vectors of length `2n`.
    pub fn samples(&self, u: &FourierLoop) -> Vec<Vec<f64>> {
        let d = 2 * u.n;
        let m = self.grid;
        let mut out = vec![vec![0.0; d]; m];
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..d {
            buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for k in 1..=u.modes {
                let (x, y) = u.mode(k);
                let c = Complex64::new(x[i], y[i]);
                buf[k] = c;
                buf[m - k] = c.conj();
            }
            self.inverse.process(&mut buf);
            for j in 0..m {
                out[j][i] = buf[j].re;
            }
        }
        out
    }
}

fn quadratic_part(u: &FourierLoop) -> f64 {
    let mut q = 0.0;
    for k in 1..=u.modes {
        let (x, y) = u.mode(k);
        let mut s = 0.0;
        for h in 0..u.n {
            // ⟨Jx, y⟩ with Jx = (−x_{2h+1}, x_{2h}).
            s += -x[2 * h + 1] * y[2 * h] + x[2 * h] * y[2 * h + 1];
        }
        q += s / (PI * k as f64);
    }
    q
}

fn check_loop(body: &ConvexBody, u: &FourierLoop) -> Result<()> {
    if u.n != body.n() {
        return invalid("loop dimension does not match the body");
    }
    if u.grid < 2 * u.modes * MIN_OVERSAMPLE {
        return invalid("quadrature grid too coarse (aliasing guard)");
    }
    Ok(())
}

/// `(Q(u), P(u))`: quadratic part and the `H*` integral.
fn parts(body: &ConvexBody, u: &FourierLoop, quad: &Quadrature) -> Result<(f64, f64)> {
    let mut p = 0.0;
    for uj in quad.samples(u) {
        p += body.legendre_dual(&minus_j(&uj))?;
    }
    Ok((quadratic_part(u), p / quad.grid as f64))
}

fn minus_j(u: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; u.len()];
    for h in 0..u.len() / 2 {
        w[2 * h] = u[2 * h + 1];
        w[2 * h + 1] = -u[2 * h];
    }
    w
}

fn j_apply(v: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; v.len()];
    for h in 0..v.len() / 2 {
        w[2 * h] = -v[2 * h + 1];
        w[2 * h + 1] = v[2 * h];
    }
    w
}

pub fn psi(body: &ConvexBody, u: &FourierLoop) -> Result<f64> {
    check_loop(body, u)?;
    let (q, p) = parts(body, u, &Quadrature::new(u.grid))?;
    Ok(q + p)
}

/// `Ψ(u)` and its gradient with respect to `u.coeffs`.
pub fn psi_with_grad(body: &ConvexBody, u: &FourierLoop, quad: &Quadrature) -> Result<(f64, Vec<f64>)> {
    check_loop(body, u)?;
    let d = 2 * u.n;
    let m = quad.grid;
    let samples = quad.samples(u);
    let mut value = quadratic_part(u);
    // g_j = J ∇H*(−J u_j)
    let mut g = vec![vec![0.0; d]; m];
    for (j, uj) in samples.iter().enumerate() {
        let (h, grad) = body.dual_with_grad(&minus_j(uj))?;
        value += h / m as f64;
        g[j] = j_apply(&grad);
    }
    let mut grad = vec![0.0; u.coeffs.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..d {
        for j in 0..m {
            buf[j] = Complex64::new(g[j][i], 0.0);
        }
        quad.forward.process(&mut buf);
        for k in 1..=u.modes {
            let b = u.block(k);
            grad[b + i] = 2.0 / m as f64 * buf[k].re;
            grad[b + d + i] = 2.0 / m as f64 * buf[k].im;
        }
    }
    for k in 1..=u.modes {
        let (x, y) = u.mode(k);
        let c = 1.0 / (PI * k as f64);
        let jx = j_apply(x);
        let jy = j_apply(y);
        let b = u.block(k);
        for i in 0..d {
            grad[b + i] -= c * jy[i];
            grad[b + d + i] += c * jx[i];
        }
    }
    Ok((value, grad))
}

/// `𝒜 = (α/2)((2/(α−2))Ψ)^{(α−2)/α}` for `Ψ < 0`.
pub fn renormalized_action(psi_value: f64, alpha: f64) -> Result<f64> {
    if !(psi_value < 0.0) {
        return invalid("renormalized action needs psi < 0");
    }
    if !(alpha > 1.0 && alpha < 2.0) {
        return invalid("alpha must lie in (1, 2)");
    }
    Ok(alpha / 2.0 * (2.0 / (alpha - 2.0) * psi_value).powf((alpha - 2.0) / alpha))
}

/// `Ψ` at a critical point whose renormalized action is `tau`.
pub fn critical_psi(tau: f64, alpha: f64) -> f64 {
    -(1.0 - alpha / 2.0) * (2.0 * tau / alpha).powf(-alpha / (2.0 - alpha))
}

/// Best multiple `s u` along the ray through `u`; `None` if `Q(u) ≥ 0`.
pub fn ray_optimum(body: &ConvexBody, u: &FourierLoop, quad: &Quadrature) -> Result<Option<(f64, f64)>> {
    let (q, p) = parts(body, u, quad)?;
    if !(q < 0.0) || !(p > 0.0) {
        return Ok(None);
    }
    let beta = body.beta();
    let s = (-2.0 * q / (beta * p)).powf(1.0 / (beta - 2.0));
    Ok(Some((s, s * s * q + s.powf(beta) * p)))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClarkeConfig {
    pub modes: usize,
    pub oversample: usize,
    pub random_starts: usize,
    pub plane_starts: bool,
    pub max_iter: usize,
    pub tol_grad: f64,
    pub seed: u64,
    /// Re-run the best start with `2K` modes and report the change.
    pub doubling_check: bool,
}

impl Default for ClarkeConfig {
    fn default() -> Self {
        ClarkeConfig {
            modes: DEFAULT_MODES,
            oversample: MIN_OVERSAMPLE,
            random_starts: 16,
            plane_starts: true,
            max_iter: 3000,
            tol_grad: 1e-10,
            seed: 2024,
            doubling_check: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StartReport {
    pub label: String,
    pub psi: f64,
    pub action: Option<f64>,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stalled: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoublingCheck {
    pub modes: usize,
    pub systole: f64,
    pub relative_change: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClarkeOrbit {
    pub period: f64,
    /// `γ(τ j/M)` on the quadrature grid.
    pub points: Vec<Vec<f64>>,
    /// `max_j |H₂(γ_j) − 1|`.
    pub surface_defect: f64,
    /// `max_j ‖ζ̇ − J∇H(ζ)‖ / max_j ‖ζ̇‖` with the spectral derivative.
    pub hamiltonian_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystoleResult {
    pub systole: f64,
    pub psi: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    pub modes: usize,
    pub grid: usize,
    pub best_start: String,
    pub starts: Vec<StartReport>,
    pub doubling: Option<DoublingCheck>,
    pub advisories: Vec<String>,
    pub orbit: ClarkeOrbit,
    #[serde(skip)]
    pub minimizer: FourierLoop,
}

fn starts(body: &ConvexBody, cfg: &ClarkeConfig, grid: usize) -> Result<Vec<(String, FourierLoop)>> {
    let n = body.n();
    let d = 2 * n;
    let mut out = Vec::new();
    if cfg.plane_starts {
        for h in 0..n {
            let mut l = FourierLoop::zeros(n, cfg.modes, grid)?;
            let mut x = vec![0.0; d];
            x[2 * h] = 1.0;
            // y = −Jx makes ⟨Jx, y⟩ = −|x|² < 0.
            let y: Vec<f64> = j_apply(&x).iter().map(|v| -v).collect();
            l.set_mode(1, &x, &y);
            out.push((format!("plane-{}", h + 1), l));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for s in 0..cfg.random_starts {
        let mut l = FourierLoop::zeros(n, cfg.modes, grid)?;
        let dominant = 1 + (s % 2) * rng.random_range(0..cfg.modes.min(3));
        for c in l.coeffs.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *c = 0.02 * z;
        }
        let x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        l.set_mode(dominant, &x, &y);
        out.push((format!("random-{s}"), l));
    }
    Ok(out)
}

fn run_start(body: &ConvexBody, start: &FourierLoop, quad: &Quadrature, cfg: &ClarkeConfig) -> Result<(FourierLoop, crate::optimize::LbfgsResult)> {
    let mut u = start.clone();
    let q = quadratic_part(&u);
    if q >= 0.0 {
        // Flip every y_k: this negates the quadratic part.
        for k in 1..=u.modes {
            let b = u.block(k) + 2 * u.n;
            u.coeffs[b..b + 2 * u.n].iter_mut().for_each(|c| *c = -*c);
        }
    }
    if let Some((s, _)) = ray_optimum(body, &u, quad)? {
        u = u.scaled(s);
    }
    let lcfg = LbfgsConfig {
        max_iter: cfg.max_iter,
        tol_grad: cfg.tol_grad,
        ..Default::default()
    };
    let template = u.clone();
    let res = lbfgs(
        |c| {
            let mut l = template.clone();
            l.coeffs.copy_from_slice(c);
            psi_with_grad(body, &l, quad)
        },
        &u.coeffs,
        &lcfg,
    )?;
    let mut out = template;
    out.coeffs.copy_from_slice(&res.x);
    Ok((out, res))
}

/// Reconstructs the Reeb orbit: `z(t) = ∇H*(−J u(t))` is a 1-periodic orbit of
/// `H`, and `γ(τt) = (2τ/α)^{−1/(α−2)} z(t)`.
pub fn reconstruct_orbit(body: &ConvexBody, u: &FourierLoop, period: f64) -> Result<ClarkeOrbit> {
    let quad = Quadrature::new(u.grid);
    let samples = quad.samples(u);
    let alpha = body.alpha();
    let scale = (2.0 * period / alpha).powf(-1.0 / (alpha - 2.0));
    let mut zeta = Vec::with_capacity(samples.len());
    for uj in &samples {
        let (_, g) = body.dual_with_grad(&minus_j(uj))?;
        zeta.push(g);
    }
    // Spectral derivative of ζ compared against u and against J∇H(ζ).
    let m = u.grid;
    let d = 2 * u.n;
    let mut dzeta = vec![vec![0.0; d]; m];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..d {
        for j in 0..m {
            buf[j] = Complex64::new(zeta[j][i], 0.0);
        }
        quad.forward.process(&mut buf);
        for (k, c) in buf.iter_mut().enumerate() {
            let freq = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            let freq = if 2 * k == m { 0.0 } else { freq };
            *c *= Complex64::new(0.0, 2.0 * PI * freq) / m as f64;
        }
        quad.inverse.process(&mut buf);
        for j in 0..m {
            dzeta[j][i] = buf[j].re;
        }
    }
    let mut res: f64 = 0.0;
    let mut size: f64 = 0.0;
    for j in 0..m {
        let rhs = j_apply(body.grad_h(&zeta[j]).as_slice());
        let r = dzeta[j].iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        res = res.max(r);
        size = size.max(dzeta[j].iter().map(|a| a * a).sum::<f64>().sqrt());
    }
    let points: Vec<Vec<f64>> = zeta
        .iter()
        .map(|z| z.iter().map(|v| v * scale).collect())
        .collect();
    let surface_defect = points
        .iter()
        .map(|p| (body.h2(p) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ClarkeOrbit {
        period,
        points,
        surface_defect,
        hamiltonian_residual: if size > 0.0 { res / size } else { res },
    })
}

/// Multi-start minimization of `Ψ`; the systole is `𝒜(min Ψ)`.
pub fn minimize(body: &ConvexBody, cfg: &ClarkeConfig) -> Result<SystoleResult> {
    if cfg.modes < 8 {
        return invalid("at least 8 Fourier modes are required");
    }
    if cfg.oversample < MIN_OVERSAMPLE {
        return invalid(format!("oversample must be at least {MIN_OVERSAMPLE}"));
    }
    let grid = 2 * cfg.modes * cfg.oversample;
    let quad = Quadrature::new(grid);
    let starts = starts(body, cfg, grid)?;
    let runs = par_map(&starts, |(label, l)| (label.clone(), run_start(body, l, &quad, cfg)));
    let mut reports = Vec::new();
    let mut best: Option<(String, FourierLoop, crate::optimize::LbfgsResult)> = None;
    for (label, r) in runs {
        match r {
            Ok((l, res)) => {
                let action = renormalized_action(res.value, body.alpha()).ok();
                reports.push(StartReport {
                    label: label.clone(),
                    psi: res.value,
                    action,
                    grad_norm: res.grad_norm,
                    iterations: res.iterations,
                    converged: res.converged,
                    stalled: res.stalled,
                    error: None,
                });
                let usable = res.converged || res.grad_norm < 1e-6;
                if usable && best.as_ref().is_none_or(|b| res.value < b.2.value) {
                    best = Some((label, l, res));
                }
            }
            Err(e) => reports.push(StartReport {
                label,
                psi: f64::NAN,
                action: None,
                grad_norm: f64::NAN,
                iterations: 0,
                converged: false,
                stalled: false,
                error: Some(e.to_string()),
            }),
        }
    }
    let Some((label, minimizer, res)) = best else {
        let best_grad = reports
            .iter()
            .map(|r| r.grad_norm)
            .filter(|g| g.is_finite())
            .fold(f64::INFINITY, f64::min);
        let best_psi = reports
            .iter()
            .map(|r| r.psi)
            .filter(|g| g.is_finite())
            .fold(f64::INFINITY, f64::min);
        return Err(Error::NoConvergence {
            what: "Clarke dual minimization (all starts stalled)".into(),
            iterations: cfg.max_iter,
            best: best_psi,
            grad_norm: best_grad,
        });
    };
    let systole = renormalized_action(res.value, body.alpha())?;
    let mut advisories = Vec::new();
    let energy = minimizer.top_mode_energy();
    if energy > TOP_MODE_ENERGY {
        advisories.push(format!(
            "{:.2}% of the loop energy sits in the top quarter of modes; increase the mode count",
            100.0 * energy
        ));
    }
    let doubling = if cfg.doubling_check {
        let modes2 = 2 * cfg.modes;
        let grid2 = 2 * modes2 * cfg.oversample;
        let quad2 = Quadrature::new(grid2);
        let start2 = minimizer.resized(modes2, grid2)?;
        let cfg2 = ClarkeConfig {
            modes: modes2,
            ..cfg.clone()
        };
        let (_, res2) = run_start(body, &start2, &quad2, &cfg2)?;
        let sys2 = renormalized_action(res2.value, body.alpha())?;
        let change = (sys2 - systole).abs() / systole;
        if change > 1e-6 {
            advisories.push(format!(
                "systole moved by {change:.2e} (relative) when doubling to {modes2} modes"
            ));
        }
        Some(DoublingCheck {
            modes: modes2,
            systole: sys2,
            relative_change: change,
        })
    } else {
        None
    };
    let orbit = reconstruct_orbit(body, &minimizer, systole)?;
    Ok(SystoleResult {
        systole,
        psi: res.value,
        grad_norm: res.grad_norm,
        alpha: body.alpha(),
        modes: cfg.modes,
        grid,
        best_start: label,
        starts: reports,
        doubling,
        advisories,
        orbit,
        minimizer,
    })
}
