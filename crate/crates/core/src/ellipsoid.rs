//! Ellipsoids `E(a) = {z : Σ |z_h|²/a_h = 1/π}`: Reeb flow, action spectrum,
//! spectral invariants, Besse classification and the index data of each
//! closed orbit family.
//!
//! Rational parameters are handled exactly: every action value `k·a_h` is put
//! on the common lattice `(1/D)ℤ`, `D = lcm(denominators)`, and enumerated as
//! a `u128`, so multiplicities never depend on rounding.

use std::f64::consts::PI;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::rational::{
    format_rational, lcm_rationals, rational_certificate, rational_to_f64, Rational,
    RationalCertificate, Value, CF_MAX_DENOMINATOR,
};
use crate::symplectic::{j_matrix, put_rotation, Mat, PathEvaluator, SymplecticPath};

/// Relative tolerance for merging float action values.
pub const TOL_MERGE: f64 = 1e-9;

/// Tolerance on the defining equation when a point is handed to the flow.
pub const TOL_SURFACE: f64 = 1e-12;

/// Hard cap on the number of lattice points one spectrum query may enumerate.
pub const MAX_SPECTRUM_TERMS: u128 = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Params {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ellipsoid {
    params: Params,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub tau: Value,
    pub multiplicity: usize,
    pub morse_index: u64,
    pub nullity: u64,
    pub cz_index: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub exact: bool,
    /// Merge tolerance used in float mode.
    pub tol_merge: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Zoll,
    Besse,
    NotBesse,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub tau0: Option<Value>,
    /// Float-mode verdicts rest on rational reconstruction, not proof.
    pub heuristic: bool,
    /// Reconstruction of `a_h / a_1` for each `h` (float mode only).
    pub ratio_certificates: Vec<RationalCertificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityCheck {
    pub relation: String,
    pub lhs: Value,
    pub rhs: Value,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InterleavingReport {
    pub tau: Value,
    pub mu: i64,
    pub i: u64,
    pub checks: Vec<InequalityCheck>,
    pub all_hold: bool,
}

impl Ellipsoid {
    pub fn exact(mut a: Vec<Rational>) -> Result<Self> {
        if a.is_empty() {
            return invalid("ellipsoid needs at least one parameter");
        }
        if a.iter().any(|x| !x.is_positive()) {
            return invalid("ellipsoid parameters must be positive");
        }
        a.sort();
        Ok(Ellipsoid {
            params: Params::Exact(a),
        })
    }

    pub fn float(mut a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return invalid("ellipsoid needs at least one parameter");
        }
        if a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return invalid("ellipsoid parameters must be positive and finite");
        }
        a.sort_by(f64::total_cmp);
        Ok(Ellipsoid {
            params: Params::Float(a),
        })
    }

    /// Exact when every value is exact, float otherwise.
    pub fn from_values(values: &[Value]) -> Result<Self> {
        if values.iter().all(Value::is_exact) {
            Self::exact(
                values
                    .iter()
                    .map(|v| match v {
                        Value::Exact(r) => r.clone(),
                        Value::Float(_) => unreachable!(),
                    })
                    .collect(),
            )
        } else {
            Self::float(values.iter().map(Value::to_f64).collect())
        }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn n(&self) -> usize {
        match &self.params {
            Params::Exact(a) => a.len(),
            Params::Float(a) => a.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.params, Params::Exact(_))
    }

    pub fn a_f64(&self) -> Vec<f64> {
        match &self.params {
            Params::Exact(a) => a.iter().map(rational_to_f64).collect(),
            Params::Float(a) => a.clone(),
        }
    }

    pub fn a_values(&self) -> Vec<Value> {
        match &self.params {
            Params::Exact(a) => a.iter().cloned().map(Value::Exact).collect(),
            Params::Float(a) => a.iter().copied().map(Value::Float).collect(),
        }
    }

    fn a1(&self) -> Value {
        self.a_values().swap_remove(0)
    }

    /// `E(s·a)`, the image of `E(a)` under `z ↦ √s z`.
    pub fn scaled(&self, s: &Value) -> Result<Self> {
        match (&self.params, s) {
            (Params::Exact(a), Value::Exact(r)) => Self::exact(a.iter().map(|x| x * r).collect()),
            _ => Self::float(self.a_f64().iter().map(|x| x * s.to_f64()).collect()),
        }
    }

    /// `π Σ |z_h|²/a_h`, equal to 1 on the ellipsoid.
    pub fn level(&self, z: &[f64]) -> f64 {
        self.a_f64()
            .iter()
            .enumerate()
            .map(|(h, a)| PI * (z[2 * h] * z[2 * h] + z[2 * h + 1] * z[2 * h + 1]) / a)
            .sum()
    }

    /// `φ^t(z)`: rotation of each plane by `2πt/a_h`.
    pub fn reeb_flow(&self, z: &[f64], t: f64) -> Result<Vec<f64>> {
        let n = self.n();
        if z.len() != 2 * n {
            return invalid(format!("point has {} coordinates, expected {}", z.len(), 2 * n));
        }
        let level = self.level(z);
        if !((level - 1.0).abs() <= TOL_SURFACE) {
            return Err(Error::OffSurface {
                level,
                expected: 1.0,
            });
        }
        let mut m = Mat::zeros(2 * n, 2 * n);
        for (h, a) in self.a_f64().iter().enumerate() {
            put_rotation(&mut m, h, t / a);
        }
        let out = m * nalgebra::DVector::from_column_slice(z);
        Ok(out.as_slice().to_vec())
    }

    /// All distinct periods `τ ≤ max_action` of closed orbits.
    pub fn action_spectrum(&self, max_action: &Value) -> Result<Spectrum> {
        if !(max_action.to_f64() > 0.0) {
            return invalid("max_action must be positive");
        }
        match &self.params {
            Params::Exact(a) => {
                let max = match max_action {
                    Value::Exact(r) => r.clone(),
                    Value::Float(x) => Rational::from_float(*x)
                        .ok_or_else(|| Error::InvalidInput("max_action not finite".into()))?,
                };
                exact_spectrum(a, &max)
            }
            Params::Float(a) => float_spectrum(a, max_action.to_f64()),
        }
    }

    /// `c_0, …, c_{count−1}`: the spectrum listed with multiplicity.
    pub fn spectral_invariants(&self, count: usize) -> Result<Vec<Value>> {
        if count == 0 {
            return invalid("count must be at least 1");
        }
        // count·a_1 already contains `count` multiples of a_1.
        let max = match self.a1() {
            Value::Exact(r) => Value::Exact(r * Rational::from_integer(BigInt::from(count))),
            Value::Float(x) => Value::Float(x * count as f64 * (1.0 + 4.0 * TOL_MERGE)),
        };
        let spec = self.action_spectrum(&max)?;
        Ok(expand(&spec.entries, count))
    }

    pub fn classify(&self) -> Classification {
        match &self.params {
            Params::Exact(a) => {
                if a.iter().all(|x| *x == a[0]) {
                    Classification {
                        verdict: Verdict::Zoll,
                        tau0: Some(Value::Exact(a[0].clone())),
                        heuristic: false,
                        ratio_certificates: vec![],
                    }
                } else {
                    Classification {
                        verdict: Verdict::Besse,
                        tau0: Some(Value::Exact(lcm_rationals(a))),
                        heuristic: false,
                        ratio_certificates: vec![],
                    }
                }
            }
            Params::Float(a) => {
                let certs: Vec<RationalCertificate> = a
                    .iter()
                    .map(|x| rational_certificate(x / a[0], CF_MAX_DENOMINATOR))
                    .collect();
                let verdict = if !certs.iter().all(|c| c.reconstructed) {
                    Verdict::NotBesse
                } else if certs.iter().all(|c| c.numerator == c.denominator) {
                    Verdict::Zoll
                } else {
                    Verdict::Besse
                };
                let tau0 = (verdict != Verdict::NotBesse).then(|| {
                    let ratios: Vec<Rational> = certs
                        .iter()
                        .map(|c| {
                            Rational::new(BigInt::from(c.numerator), BigInt::from(c.denominator))
                        })
                        .collect();
                    Value::Float(a[0] * rational_to_f64(&lcm_rationals(&ratios)))
                });
                Classification {
                    verdict,
                    tau0,
                    heuristic: true,
                    ratio_certificates: certs,
                }
            }
        }
    }

    /// `τ/a_h` for each `h`, required to be positive integers.
    fn periods_per_plane(&self, tau: &Value) -> Result<Vec<u64>> {
        let not_common = || Error::NotCommonPeriod(tau.to_string());
        match (&self.params, tau) {
            (Params::Exact(a), Value::Exact(t)) => a
                .iter()
                .map(|x| {
                    let q = t / x;
                    if q.is_integer() && q.is_positive() {
                        q.to_integer().to_u64().ok_or_else(not_common)
                    } else {
                        Err(not_common())
                    }
                })
                .collect(),
            _ => self
                .a_f64()
                .iter()
                .map(|x| {
                    let q = tau.to_f64() / x;
                    let k = q.round();
                    if k >= 1.0 && (q - k).abs() <= TOL_MERGE * q && k < 9.0e15 {
                        Ok(k as u64)
                    } else {
                        Err(not_common())
                    }
                })
                .collect(),
        }
    }

    /// `μ = 2 Σ τ/a_h − n` for a common period `τ`.
    pub fn besse_cz_index(&self, tau: &Value) -> Result<i64> {
        let ks = self.periods_per_plane(tau)?;
        let sum: u64 = ks.iter().sum();
        let n = self.n() as i64;
        let mu = 2 * sum as i64 - n;
        debug_assert!((mu - n).rem_euclid(2) == 0 && mu >= n);
        Ok(mu)
    }

    /// Checks `c_{i−1} < c_i = τ = c_{i+n−1} < c_{i+n}` with `i = (μ−n)/2`
    /// and `c_{−1} = 0`.
    pub fn verify_interleaving(&self, tau: &Value) -> Result<InterleavingReport> {
        let mu = self.besse_cz_index(tau)?;
        let n = self.n();
        let i = ((mu - n as i64) / 2) as usize;
        let c = self.spectral_invariants(i + n + 1)?;
        let zero = tau.zero_like();
        let prev = if i == 0 { zero } else { c[i - 1].clone() };
        let tol = if self.is_exact() && tau.is_exact() {
            0.0
        } else {
            TOL_MERGE
        };
        let name = |k: i64| format!("c_{k}");
        let (ii, nn) = (i as i64, n as i64);
        let checks = vec![
            InequalityCheck {
                relation: format!("{} < {}", name(ii - 1), name(ii)),
                holds: prev.definitely_less(&c[i], tol),
                lhs: prev,
                rhs: c[i].clone(),
            },
            InequalityCheck {
                relation: format!("{} = tau", name(ii)),
                holds: c[i].approx_eq(tau, tol),
                lhs: c[i].clone(),
                rhs: tau.clone(),
            },
            InequalityCheck {
                relation: format!("{} = {}", name(ii), name(ii + nn - 1)),
                holds: c[i].approx_eq(&c[i + n - 1], tol),
                lhs: c[i].clone(),
                rhs: c[i + n - 1].clone(),
            },
            InequalityCheck {
                relation: format!("{} < {}", name(ii + nn - 1), name(ii + nn)),
                holds: c[i + n - 1].definitely_less(&c[i + n], tol),
                lhs: c[i + n - 1].clone(),
                rhs: c[i + n].clone(),
            },
        ];
        let all_hold = checks.iter().all(|c| c.holds);
        Ok(InterleavingReport {
            tau: tau.clone(),
            mu,
            i: i as u64,
            checks,
            all_hold,
        })
    }

    /// Planes `h` with `τ/a_h ∈ ℕ`, i.e. those filled by orbits of period `τ`.
    pub fn resonant_planes(&self, tau: &Value) -> Vec<usize> {
        match (&self.params, tau) {
            (Params::Exact(a), Value::Exact(t)) => a
                .iter()
                .enumerate()
                .filter(|(_, x)| {
                    let q = t / *x;
                    q.is_integer() && q.is_positive()
                })
                .map(|(h, _)| h)
                .collect(),
            _ => self
                .a_f64()
                .iter()
                .enumerate()
                .filter(|(_, x)| {
                    let q = tau.to_f64() / *x;
                    q.round() >= 1.0 && (q - q.round()).abs() <= TOL_MERGE * q
                })
                .map(|(h, _)| h)
                .collect(),
        }
    }

    /// `Γ_2(t) = dφ^{τt}`, a closed-form rotation path.
    pub fn rotation_path(&self, tau: f64) -> SymplecticPath {
        SymplecticPath::Rotation {
            rates: self.a_f64().iter().map(|a| 1.0 / a).collect(),
            total_time: tau,
        }
    }

    /// Linearization along `γ(t) = φ^t(z0)` of the Hamiltonian flow of the
    /// degree-`α` homogenization, reparametrized to `[0, 1]`.
    pub fn linearized_path(&self, tau: f64, z0: &[f64], alpha: f64) -> Result<SymplecticPath> {
        if !(alpha > 1.0 && alpha <= 2.0) {
            return invalid("alpha must lie in (1, 2]");
        }
        let level = self.level(z0);
        if (level - 1.0).abs() > 1e-9 {
            return Err(Error::OffSurface {
                level,
                expected: 1.0,
            });
        }
        Ok(SymplecticPath::Custom(Arc::new(EllipsoidFlowPath {
            a: self.a_f64(),
            tau,
            alpha,
            z0: z0.to_vec(),
        })))
    }

    /// A point on an orbit of period `τ`, lying in the first resonant plane.
    pub fn orbit_point(&self, tau: &Value) -> Option<Vec<f64>> {
        let h = *self.resonant_planes(tau).first()?;
        let a = self.a_f64();
        let mut z = vec![0.0; 2 * self.n()];
        z[2 * h] = (a[h] / PI).sqrt();
        Some(z)
    }
}

/// Closed form of the degree-`α` linearized flow on an ellipsoid:
/// `Γ_α(t) = Γ_2(t) + t·τ(α−2)/2 · X(γ(τt)) ∇H_2(γ(0))ᵀ`, `X = J∇H_2`.
#[derive(Clone, Debug)]
struct EllipsoidFlowPath {
    a: Vec<f64>,
    tau: f64,
    alpha: f64,
    z0: Vec<f64>,
}

impl EllipsoidFlowPath {
    fn grad(&self, z: &nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
        let mut g = z.clone();
        for (h, a) in self.a.iter().enumerate() {
            g[2 * h] *= 2.0 * PI / a;
            g[2 * h + 1] *= 2.0 * PI / a;
        }
        g
    }
}

impl PathEvaluator for EllipsoidFlowPath {
    fn dim(&self) -> usize {
        2 * self.a.len()
    }

    fn eval(&self, t: f64) -> Mat {
        let n = self.a.len();
        let mut rot = Mat::zeros(2 * n, 2 * n);
        for (h, a) in self.a.iter().enumerate() {
            put_rotation(&mut rot, h, self.tau * t / a);
        }
        if self.alpha == 2.0 {
            return rot;
        }
        let z0 = nalgebra::DVector::from_column_slice(&self.z0);
        let zt = &rot * &z0;
        let x = j_matrix(n) * self.grad(&zt);
        let g0 = self.grad(&z0);
        rot + (x * g0.transpose()) * (t * self.tau * (self.alpha - 2.0) / 2.0)
    }

    fn label(&self) -> &str {
        "ellipsoid-linearized-flow"
    }
}

fn expand(entries: &[SpectrumEntry], count: usize) -> Vec<Value> {
    let mut out = Vec::with_capacity(count);
    'outer: for e in entries {
        for _ in 0..e.multiplicity {
            if out.len() == count {
                break 'outer;
            }
            out.push(e.tau.clone());
        }
    }
    out
}

fn to_u128(x: &BigInt, what: &str) -> Result<u128> {
    x.to_u128()
        .ok_or_else(|| Error::ExactOverflow(format!("{what} = {x} does not fit in 128 bits")))
}

fn exact_spectrum(a: &[Rational], max: &Rational) -> Result<Spectrum> {
    let n = a.len();
    let d = a
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let lattice: Vec<u128> = a
        .iter()
        .map(|x| to_u128(&(x.numer() * (&d / x.denom())), "scaled parameter"))
        .collect::<Result<_>>()?;
    let top = to_u128(&(max * Rational::from_integer(d.clone())).floor().to_integer(), "scaled bound")?;
    let mut terms: u128 = 0;
    for &l in &lattice {
        terms = terms.saturating_add(top / l);
    }
    if terms > MAX_SPECTRUM_TERMS {
        return invalid(format!(
            "spectrum query would enumerate {terms} values (limit {MAX_SPECTRUM_TERMS})"
        ));
    }
    let mut values: Vec<(u128, usize)> = Vec::with_capacity(terms as usize);
    for (h, &l) in lattice.iter().enumerate() {
        let mut v = l;
        while v <= top {
            values.push((v, h));
            v = v
                .checked_add(l)
                .ok_or_else(|| Error::ExactOverflow("lattice enumeration".into()))?;
        }
    }
    values.sort_unstable();
    let mut entries = Vec::new();
    let mut idx = 0;
    while idx < values.len() {
        let v = values[idx].0;
        let mut m = 0;
        while idx < values.len() && values[idx].0 == v {
            m += 1;
            idx += 1;
        }
        let mut morse: u128 = 0;
        for &l in &lattice {
            morse += 2 * (v.div_ceil(l) - 1);
        }
        let morse = u64::try_from(morse)
            .map_err(|_| Error::ExactOverflow("Morse index exceeds 64 bits".into()))?;
        entries.push(SpectrumEntry {
            tau: Value::Exact(Rational::new(BigInt::from(v), d.clone())),
            multiplicity: m,
            morse_index: morse,
            nullity: 2 * m as u64 - 1,
            cz_index: morse as i64 + n as i64,
        });
    }
    Ok(Spectrum {
        entries,
        exact: true,
        tol_merge: None,
        warnings: vec![],
    })
}

fn float_spectrum(a: &[f64], max: f64) -> Result<Spectrum> {
    let n = a.len();
    let terms: f64 = a.iter().map(|x| (max / x).floor()).sum();
    if terms > MAX_SPECTRUM_TERMS as f64 {
        return invalid(format!("spectrum query would enumerate {terms} values"));
    }
    let mut values: Vec<(f64, usize, u64)> = Vec::new();
    for (h, &x) in a.iter().enumerate() {
        let mut k = 1u64;
        while k as f64 * x <= max * (1.0 + TOL_MERGE) {
            values.push((k as f64 * x, h, k));
            k += 1;
        }
    }
    values.sort_by(|p, q| p.0.total_cmp(&q.0));
    let recon: Vec<RationalCertificate> = a
        .iter()
        .map(|&x| rational_certificate(x, CF_MAX_DENOMINATOR))
        .collect();
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    let mut idx = 0;
    while idx < values.len() {
        let start = idx;
        let tau = values[idx].0;
        while idx < values.len() && values[idx].0 - tau <= TOL_MERGE * tau {
            idx += 1;
        }
        let group = &values[start..idx];
        if group.len() > 1 && !group_exactly_equal(group, &recon) {
            warnings.push(format!(
                "values {} and {} merged within tol_merge but differ under rational reconstruction",
                group[0].0,
                group[group.len() - 1].0
            ));
        }
        let mut planes: Vec<usize> = group.iter().map(|g| g.1).collect();
        planes.sort_unstable();
        planes.dedup();
        let m = planes.len();
        let mut morse: u64 = 0;
        for (h, &x) in a.iter().enumerate() {
            let ceil = match group.iter().find(|g| g.1 == h) {
                Some(g) => g.2,
                None => (tau / x).ceil() as u64,
            };
            morse += 2 * (ceil - 1);
        }
        entries.push(SpectrumEntry {
            tau: Value::Float(tau),
            multiplicity: m,
            morse_index: morse,
            nullity: 2 * m as u64 - 1,
            cz_index: morse as i64 + n as i64,
        });
    }
    Ok(Spectrum {
        entries,
        exact: false,
        tol_merge: Some(TOL_MERGE),
        warnings,
    })
}

fn group_exactly_equal(group: &[(f64, usize, u64)], recon: &[RationalCertificate]) -> bool {
    let as_rational = |&(_, h, k): &(f64, usize, u64)| -> Option<Rational> {
        let c = &recon[h];
        c.reconstructed.then(|| {
            Rational::new(
                BigInt::from(c.numerator) * BigInt::from(k),
                BigInt::from(c.denominator),
            )
        })
    };
    let Some(first) = as_rational(&group[0]) else {
        return false;
    };
    group[1..]
        .iter()
        .all(|g| as_rational(g).is_some_and(|r| r == first))
}

/// Formats a parameter vector for reports.
pub fn describe(e: &Ellipsoid) -> Vec<String> {
    match e.params() {
        Params::Exact(a) => a.iter().map(format_rational).collect(),
        Params::Float(a) => a.iter().map(|x| x.to_string()).collect(),
    }
}
