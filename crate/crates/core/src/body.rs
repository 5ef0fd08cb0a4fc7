//! Strongly convex bodies `C ⊂ R^{2n}` with `0 ∈ int C`, given by a base
//! function `F = Q + ε·P` with `Q = π Σ |z_h|²/a_h` and `P = Σ q_h |z_h|⁴`.
//!
//! The boundary is `Σ = F⁻¹(1)`. Its degree-2 homogenization is the squared
//! gauge, which for this family solves `H₂² − Q H₂ − εP = 0`:
//! `H₂ = (Q + √(Q² + 4εP)) / 2`. The degree-`α` Hamiltonian is `H₂^{α/2}`.

use std::sync::OnceLock;

use nalgebra::{DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ellipsoid::Ellipsoid;
use crate::error::{invalid, Error, Result};
use crate::rational::{parse_value, Value};
use crate::symplectic::Mat;

pub type Vector = DVector<f64>;

pub const DEFAULT_ALPHA: f64 = 1.5;

/// Smallest admissible restricted-Hessian eigenvalue on sampled boundary points.
pub const TOL_CONVEX: f64 = 1e-8;
pub const CONVEXITY_SAMPLES: usize = 1000;

const SUPPORT_MAX_ITER: usize = 50;
const SUPPORT_TOL: f64 = 1e-12;
const PINCH_AGREE: f64 = 1e-8;

/// A number in a JSON body spec: integer, float, or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Number {
    pub fn value(&self) -> Result<Value> {
        match self {
            Number::Int(k) => Ok(Value::Exact(crate::rational::int(*k))),
            Number::Float(x) => Ok(Value::Float(*x)),
            Number::Text(s) => parse_value(s),
        }
    }
}

impl From<&Value> for Number {
    fn from(v: &Value) -> Self {
        match v {
            Value::Exact(_) => Number::Text(v.to_string()),
            Value::Float(x) => Number::Float(*x),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BodySpec {
    Ellipsoid {
        a: Vec<Number>,
    },
    Perturbed {
        a: Vec<Number>,
        epsilon: Number,
        quartic: Vec<Number>,
    },
}

#[derive(Clone, Debug)]
pub struct ConvexBody {
    spec: BodySpec,
    quadric: Ellipsoid,
    a: Vec<f64>,
    epsilon: f64,
    quartic: Vec<f64>,
    alpha: f64,
    convexity_margin: f64,
    radii: OnceLock<PinchingRadii>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Support {
    /// `h_C(w) = max {⟨z, w⟩ : z ∈ C}`.
    pub value: f64,
    /// The maximizer `z ∈ Σ`, equal to `∇h_C(w)`.
    pub maximizer: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PinchingRadii {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub closed_form: bool,
    /// Number of starts agreeing with the best value for each radius.
    pub agreeing_starts: (usize, usize),
    /// Fewer than two starts agreed within `1e-8` for some radius.
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub threshold: f64,
    pub ok: bool,
}

impl ConvexBody {
    pub fn from_spec(spec: &BodySpec) -> Result<Self> {
        let values = |v: &[Number]| v.iter().map(Number::value).collect::<Result<Vec<_>>>();
        match spec {
            BodySpec::Ellipsoid { a } => {
                let e = Ellipsoid::from_values(&values(a)?)?;
                Self::assemble(spec.clone(), e, 0.0, vec![0.0; a.len()])
            }
            BodySpec::Perturbed { a, epsilon, quartic } => {
                if quartic.len() != a.len() {
                    return invalid("quartic coefficients must match the number of parameters");
                }
                // The quartic terms are tied to the planes in the given order.
                let av = values(a)?;
                let qv: Vec<f64> = values(quartic)?.iter().map(Value::to_f64).collect();
                let mut order: Vec<usize> = (0..a.len()).collect();
                order.sort_by(|&i, &j| av[i].cmp_value(&av[j]));
                let av: Vec<Value> = order.iter().map(|&i| av[i].clone()).collect();
                let qv: Vec<f64> = order.iter().map(|&i| qv[i]).collect();
                let eps = epsilon.value()?.to_f64();
                if !eps.is_finite() || qv.iter().any(|q| !q.is_finite()) {
                    return invalid("perturbation coefficients must be finite");
                }
                let e = Ellipsoid::from_values(&av)?;
                Self::assemble(spec.clone(), e, eps, qv)
            }
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: BodySpec = serde_json::from_str(s)
            .map_err(|e| Error::InvalidInput(format!("bad body spec: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn from_ellipsoid(e: &Ellipsoid) -> Self {
        let spec = BodySpec::Ellipsoid {
            a: e.a_values().iter().map(Number::from).collect(),
        };
        Self::assemble(spec, e.clone(), 0.0, vec![0.0; e.n()])
            .expect("ellipsoids are strongly convex")
    }

    /// Round ball of radius `r` in `R^{2n}`, i.e. `E(πr², …, πr²)`.
    pub fn ball(r: f64, n: usize) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) || n == 0 {
            return invalid("ball needs r > 0 and n >= 1");
        }
        let a = std::f64::consts::PI * r * r;
        Ok(Self::from_ellipsoid(&Ellipsoid::float(vec![a; n])?))
    }

    pub fn perturbed(a: &[f64], epsilon: f64, quartic: &[f64]) -> Result<Self> {
        Self::from_spec(&BodySpec::Perturbed {
            a: a.iter().map(|&x| Number::Float(x)).collect(),
            epsilon: Number::Float(epsilon),
            quartic: quartic.iter().map(|&x| Number::Float(x)).collect(),
        })
    }

    fn assemble(spec: BodySpec, quadric: Ellipsoid, epsilon: f64, quartic: Vec<f64>) -> Result<Self> {
        let mut body = ConvexBody {
            spec,
            a: quadric.a_f64(),
            quadric,
            epsilon,
            quartic,
            alpha: DEFAULT_ALPHA,
            convexity_margin: f64::INFINITY,
            radii: OnceLock::new(),
        };
        if !body.is_ellipsoid() {
            let report = body.convexity(CONVEXITY_SAMPLES, 0x5eed);
            if !report.ok {
                return invalid(format!(
                    "body is not strongly convex: restricted Hessian eigenvalue {:e} <= {:e}",
                    report.min_eigenvalue, report.threshold
                ));
            }
            body.convexity_margin = report.min_eigenvalue;
        }
        Ok(body)
    }

    /// Same boundary, homogenized with degree `alpha ∈ (1, 2)`.
    pub fn homogenize(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return invalid(format!("alpha must lie in (1, 2), got {alpha}"));
        }
        let mut b = self.clone();
        b.alpha = alpha;
        Ok(b)
    }

    pub fn spec(&self) -> &BodySpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.a.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.alpha / (self.alpha - 1.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn quartic(&self) -> &[f64] {
        &self.quartic
    }

    pub fn quadric_params(&self) -> &[f64] {
        &self.a
    }

    pub fn is_ellipsoid(&self) -> bool {
        self.epsilon == 0.0 || self.quartic.iter().all(|&q| q == 0.0)
    }

    /// The ellipsoid itself when the perturbation vanishes.
    pub fn as_ellipsoid(&self) -> Option<&Ellipsoid> {
        self.is_ellipsoid().then_some(&self.quadric)
    }

    pub fn quadric(&self) -> &Ellipsoid {
        &self.quadric
    }

    fn rho2(z: &[f64], h: usize) -> f64 {
        z[2 * h] * z[2 * h] + z[2 * h + 1] * z[2 * h + 1]
    }

    fn q_and_p(&self, z: &[f64]) -> (f64, f64) {
        let mut q = 0.0;
        let mut p = 0.0;
        for h in 0..self.n() {
            let r2 = Self::rho2(z, h);
            q += std::f64::consts::PI * r2 / self.a[h];
            p += self.quartic[h] * r2 * r2;
        }
        (q, p)
    }

    /// `F(z) = Q + εP`.
    pub fn base_function(&self, z: &[f64]) -> f64 {
        let (q, p) = self.q_and_p(z);
        q + self.epsilon * p
    }

    /// The degree-2 homogenization (squared gauge).
    pub fn h2(&self, z: &[f64]) -> f64 {
        let (q, p) = self.q_and_p(z);
        if self.is_ellipsoid() {
            return q;
        }
        0.5 * (q + (q * q + 4.0 * self.epsilon * p).sqrt())
    }

    /// `(H₂, ∇H₂)`.
    pub fn h2_grad(&self, z: &[f64]) -> (f64, Vector) {
        let n = self.n();
        let (q, p) = self.q_and_p(z);
        let mut gq = Vector::zeros(2 * n);
        let mut gp = Vector::zeros(2 * n);
        for h in 0..n {
            let r2 = Self::rho2(z, h);
            for c in [2 * h, 2 * h + 1] {
                gq[c] = 2.0 * std::f64::consts::PI * z[c] / self.a[h];
                gp[c] = 4.0 * self.quartic[h] * r2 * z[c];
            }
        }
        if self.is_ellipsoid() {
            return (q, gq);
        }
        let d = (q * q + 4.0 * self.epsilon * p).sqrt();
        let s = 0.5 * (q + d);
        if d == 0.0 {
            return (0.0, Vector::zeros(2 * n));
        }
        let g = (&gq * s + &gp * self.epsilon) / d;
        (s, g)
    }

    /// `(H₂, ∇H₂, ∇²H₂)`.
    pub fn h2_hess(&self, z: &[f64]) -> (f64, Vector, Mat) {
        let n = self.n();
        let (s, g) = self.h2_grad(z);
        let mut hq = Mat::zeros(2 * n, 2 * n);
        for h in 0..n {
            let c = 2.0 * std::f64::consts::PI / self.a[h];
            hq[(2 * h, 2 * h)] = c;
            hq[(2 * h + 1, 2 * h + 1)] = c;
        }
        if self.is_ellipsoid() {
            return (s, g, hq);
        }
        let (q, p) = self.q_and_p(z);
        let d = (q * q + 4.0 * self.epsilon * p).sqrt();
        if d == 0.0 {
            return (0.0, g, hq);
        }
        let mut hp = Mat::zeros(2 * n, 2 * n);
        let mut gq = Vector::zeros(2 * n);
        for h in 0..n {
            let r2 = Self::rho2(z, h);
            let k = 4.0 * self.quartic[h];
            for i in 0..2 {
                gq[2 * h + i] = 2.0 * std::f64::consts::PI * z[2 * h + i] / self.a[h];
                for j in 0..2 {
                    let delta = if i == j { r2 } else { 0.0 };
                    hp[(2 * h + i, 2 * h + j)] = k * (delta + 2.0 * z[2 * h + i] * z[2 * h + j]);
                }
            }
        }
        // Differentiating D∇s = s∇Q + ε∇P with D = 2s − Q.
        let hess = (hq * s + hp * self.epsilon + &gq * g.transpose() + &g * gq.transpose()
            - (&g * g.transpose()) * 2.0)
            / d;
        (s, g, hess)
    }

    /// `H = H₂^{α/2}`.
    pub fn h(&self, z: &[f64]) -> f64 {
        self.h2(z).powf(self.alpha / 2.0)
    }

    pub fn grad_h(&self, z: &[f64]) -> Vector {
        let (s, g) = self.h2_grad(z);
        if s == 0.0 {
            return g;
        }
        g * (self.alpha / 2.0 * s.powf(self.alpha / 2.0 - 1.0))
    }

    pub fn hess_h(&self, z: &[f64]) -> Mat {
        let (s, g, hs) = self.h2_hess(z);
        let e = self.alpha / 2.0;
        (hs + (&g * g.transpose()) * ((e - 1.0) / s)) * (e * s.powf(e - 1.0))
    }

    /// Radial projection onto `Σ`.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let s = self.h2(z).sqrt();
        z.iter().map(|x| x / s).collect()
    }

    /// Support function with its maximizer.
    pub fn support(&self, w: &[f64]) -> Result<Support> {
        let n = self.n();
        if w.len() != 2 * n {
            return invalid("dimension mismatch in support function");
        }
        let wn: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn == 0.0 {
            return Ok(Support {
                value: 0.0,
                maximizer: vec![0.0; 2 * n],
                iterations: 0,
            });
        }
        let pi = std::f64::consts::PI;
        // Maximizer of ⟨z, w⟩ on the quadric Q = 1: z_h = a_h w_h / (π h_Q).
        let hq = (0..n)
            .map(|h| self.a[h] * Self::rho2(w, h) / pi)
            .sum::<f64>()
            .sqrt();
        let z0: Vec<f64> = (0..2 * n).map(|c| self.a[c / 2] * w[c] / (pi * hq)).collect();
        if self.is_ellipsoid() {
            return Ok(Support {
                value: hq,
                maximizer: z0,
                iterations: 0,
            });
        }
        let mut z = Vector::from_vec(self.project(&z0));
        let mut mu = 0.5 * z.dot(&Vector::from_column_slice(w));
        let wv = Vector::from_column_slice(w);
        let mut res_norm = f64::INFINITY;
        for it in 0..=SUPPORT_MAX_ITER {
            let (s, g, hs) = self.h2_hess(z.as_slice());
            let mut res = Vector::zeros(2 * n + 1);
            res.rows_mut(0, 2 * n).copy_from(&(&g * mu - &wv));
            res[2 * n] = s - 1.0;
            res_norm = res.norm();
            if res_norm <= SUPPORT_TOL * wn.max(1.0) {
                return Ok(Support {
                    value: z.dot(&wv),
                    maximizer: z.as_slice().to_vec(),
                    iterations: it,
                });
            }
            let mut jac = Mat::zeros(2 * n + 1, 2 * n + 1);
            jac.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&(hs * mu));
            for c in 0..2 * n {
                jac[(c, 2 * n)] = g[c];
                jac[(2 * n, c)] = g[c];
            }
            let step = jac
                .lu()
                .solve(&res)
                .ok_or_else(|| Error::Integration("singular support Newton system".into()))?;
            z -= step.rows(0, 2 * n);
            mu -= step[2 * n];
        }
        Err(Error::NoConvergence {
            what: "support-function Newton".into(),
            iterations: SUPPORT_MAX_ITER,
            best: z.dot(&wv),
            grad_norm: res_norm,
        })
    }

    /// `H*(w) = β⁻¹ α^{1−β} h_C(w)^β`.
    pub fn legendre_dual(&self, w: &[f64]) -> Result<f64> {
        Ok(self.dual_with_grad(w)?.0)
    }

    /// `(H*(w), ∇H*(w))` with `∇H* = α^{1−β} h^{β−1} z*(w)`.
    pub fn dual_with_grad(&self, w: &[f64]) -> Result<(f64, Vec<f64>)> {
        let sup = self.support(w)?;
        if sup.value == 0.0 {
            return Ok((0.0, vec![0.0; w.len()]));
        }
        let (alpha, beta) = (self.alpha, self.beta());
        let c = alpha.powf(1.0 - beta);
        let value = c * sup.value.powf(beta) / beta;
        let scale = c * sup.value.powf(beta - 1.0);
        Ok((value, sup.maximizer.iter().map(|x| x * scale).collect()))
    }

    /// In- and circumradius of `C` about the origin (computed once).
    pub fn pinching_radii(&self) -> PinchingRadii {
        self.radii.get_or_init(|| self.compute_radii()).clone()
    }

    fn compute_radii(&self) -> PinchingRadii {
        if self.is_ellipsoid() {
            let pi = std::f64::consts::PI;
            return PinchingRadii {
                r: (self.a[0] / pi).sqrt(),
                big_r: (self.a[self.n() - 1] / pi).sqrt(),
                closed_form: true,
                agreeing_starts: (0, 0),
                flagged: false,
            };
        }
        let starts = self.pinch_starts();
        // r: maximize H₂ on the unit sphere; R: minimize.
        let maxima: Vec<f64> = starts.iter().map(|u| self.sphere_extremum(u, 1.0)).collect();
        let minima: Vec<f64> = starts.iter().map(|u| self.sphere_extremum(u, -1.0)).collect();
        let hmax = maxima.iter().cloned().fold(f64::MIN, f64::max);
        let hmin = minima.iter().cloned().fold(f64::MAX, f64::min);
        let agree = |v: &[f64], best: f64| {
            v.iter()
                .filter(|&&x| (x - best).abs() <= PINCH_AGREE * best)
                .count()
        };
        let counts = (agree(&maxima, hmax), agree(&minima, hmin));
        PinchingRadii {
            r: 1.0 / hmax.sqrt(),
            big_r: 1.0 / hmin.sqrt(),
            closed_form: false,
            agreeing_starts: counts,
            flagged: counts.0 < 2 || counts.1 < 2,
        }
    }

    fn pinch_starts(&self) -> Vec<Vector> {
        let d = self.dim();
        let mut starts = Vec::new();
        for c in 0..d {
            let mut u = Vector::zeros(d);
            u[c] = 1.0;
            starts.push(u);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x9e37);
        for _ in 0..16 {
            starts.push(random_unit(&mut rng, d));
        }
        starts
    }

    /// Riemannian gradient ascent (`sign = 1`) or descent of `H₂` on the unit sphere.
    fn sphere_extremum(&self, start: &Vector, sign: f64) -> f64 {
        let mut u = start.normalize();
        let mut val = self.h2(u.as_slice());
        let mut step = 0.1;
        for _ in 0..2000 {
            let (_, g) = self.h2_grad(u.as_slice());
            let tangent = &g - &u * g.dot(&u);
            if tangent.norm() <= 1e-13 * g.norm().max(1.0) {
                break;
            }
            loop {
                let cand = (&u + &tangent * (sign * step)).normalize();
                let cv = self.h2(cand.as_slice());
                if sign * (cv - val) > 0.0 {
                    u = cand;
                    val = cv;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
                if step < 1e-16 {
                    return val;
                }
            }
        }
        val
    }

    /// Smallest tangent-restricted Hessian eigenvalue of `H₂` over random
    /// boundary points.
    pub fn convexity(&self, samples: usize, seed: u64) -> ConvexityReport {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut min_ev = f64::INFINITY;
        for _ in 0..samples {
            let u = random_unit(&mut rng, d);
            let s = self.h2(u.as_slice());
            if !(s > 0.0 && s.is_finite()) {
                min_ev = f64::NEG_INFINITY;
                break;
            }
            let z = self.project(u.as_slice());
            let (_, g, hs) = self.h2_hess(&z);
            let nrm = g.normalize();
            let proj = Mat::identity(d, d) - &nrm * nrm.transpose();
            let lift = hs.trace().abs() + 1.0;
            let restricted = &proj * hs * &proj + (&nrm * nrm.transpose()) * lift;
            let ev = SymmetricEigen::new(restricted).eigenvalues.min();
            min_ev = min_ev.min(ev);
        }
        ConvexityReport {
            samples,
            min_eigenvalue: min_ev,
            threshold: TOL_CONVEX,
            ok: min_ev > TOL_CONVEX,
        }
    }

    /// Margin recorded when the body was validated (`∞` for ellipsoids).
    pub fn convexity_margin(&self) -> f64 {
        self.convexity_margin
    }

    /// Euclidean diameter bound `2R`.
    pub fn diameter(&self) -> f64 {
        2.0 * self.pinching_radii().big_r
    }
}

pub(crate) fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    loop {
        let v = Vector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let nv = v.norm();
        if nv > 1e-12 {
            return v / nv;
        }
    }
}
