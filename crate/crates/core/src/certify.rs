//! Decision procedures built on spectral invariants and pinching.
//!
//! Every procedure returns a [`Certificate`] that is serialized as-is: a tag
//! naming the criterion, the inputs, the tolerances and the witnesses.

use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::json;

use crate::body::ConvexBody;
use crate::ellipsoid::Ellipsoid;
use crate::error::{invalid, Result};
use crate::rational::{Rational, Value};

/// Relative tolerance for equality of float invariants.
pub const TOL_EQ: f64 = 1e-9;
/// Relative slack in the bound `c_{n−1} ≤ πR²` for numerically computed radii.
pub const TOL_CHAIN: f64 = 1e-9;

pub const TAG_INVARIANT_EQUALITY: &str = "besse-iff-invariant-equality";
pub const TAG_ZOLL_EQUALITY: &str = "zoll-iff-first-invariants-equal";
pub const TAG_PINCHING: &str = "zoll-iff-pinched-spectral-gap";
pub const TAG_SUFFICIENT: &str = "besse-sufficient-invariant-equality";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesseHit {
    pub i: usize,
    pub tau: Value,
    pub mu: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub theorem: String,
    pub verdict: String,
    pub inputs: serde_json::Value,
    pub tolerances: serde_json::Value,
    pub witnesses: serde_json::Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantScan {
    pub n: usize,
    pub hits: Vec<BesseHit>,
    /// Hit at `i = 0`.
    pub zoll: bool,
    /// Every compared pair was exact.
    pub exact: bool,
    /// Some equality was decided in floating point.
    pub flagged: bool,
    pub certificate: Certificate,
}

fn check_invariants(c: &[Value], n: usize) -> Result<bool> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    if c.len() < n {
        return invalid(format!("need at least n = {n} invariants, got {}", c.len()));
    }
    for w in c.windows(2) {
        if w[1].definitely_less(&w[0], TOL_EQ) {
            return invalid(format!("invariants must be non-decreasing ({} > {})", w[0], w[1]));
        }
    }
    Ok(c.iter().all(Value::is_exact))
}

fn scan(c: &[Value], n: usize, exact: bool) -> Vec<BesseHit> {
    let tol = if exact { 0.0 } else { TOL_EQ };
    (0..=c.len() - n)
        .filter(|&i| c[i].approx_eq(&c[i + n - 1], tol))
        .map(|i| BesseHit {
            i,
            tau: c[i].clone(),
            mu: 2 * i as i64 + n as i64,
        })
        .collect()
}

/// Every `i` with `c_i = c_{i+n−1}`: the body is Besse with common period
/// `τ = c_i` and index `μ = 2i + n`. A hit at `i = 0` means Zoll.
pub fn besse_by_invariants(c: &[Value], n: usize) -> Result<InvariantScan> {
    let exact = check_invariants(c, n)?;
    let hits = scan(c, n, exact);
    let zoll = hits.first().is_some_and(|h| h.i == 0);
    let verdict = if zoll {
        "zoll"
    } else if hits.is_empty() {
        "no-equality-in-range"
    } else {
        "besse"
    };
    let certificate = Certificate {
        theorem: if zoll { TAG_ZOLL_EQUALITY } else { TAG_INVARIANT_EQUALITY }.into(),
        verdict: verdict.into(),
        inputs: json!({ "n": n, "invariants": c }),
        tolerances: json!({ "equality": if exact { json!("exact") } else { json!(TOL_EQ) } }),
        witnesses: json!(hits),
    };
    Ok(InvariantScan {
        n,
        zoll,
        exact,
        flagged: !exact && !hits.is_empty(),
        hits,
        certificate,
    })
}

/// Caller's statement that `values` contains every period up to `up_to`.
#[derive(Clone, Debug, Serialize)]
pub struct Coverage {
    pub up_to: f64,
    pub source: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundChain {
    /// `c_{n−1}` when known exactly (ellipsoids).
    pub c_n_minus_1: Option<f64>,
    pub pi_big_r_sq: f64,
    pub delta_sq_pi_r_sq: f64,
    pub lower_holds: Option<bool>,
    pub upper_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum PinchingOutcome {
    Certified { certificate: Certificate, chain: BoundChain },
    Refused {
        certificate: Certificate,
        reason: String,
        chain: BoundChain,
    },
    NotApplicable { certificate: Certificate, ratio_sq: f64 },
}

impl PinchingOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, PinchingOutcome::Certified { .. })
    }

    /// `c_{n−1} ≤ πR² < δ²πr²`, present whenever the pinching hypothesis holds.
    pub fn chain(&self) -> Option<&BoundChain> {
        match self {
            PinchingOutcome::Certified { chain, .. } | PinchingOutcome::Refused { chain, .. } => Some(chain),
            PinchingOutcome::NotApplicable { .. } => None,
        }
    }

    pub fn certificate(&self) -> &Certificate {
        match self {
            PinchingOutcome::Certified { certificate, .. }
            | PinchingOutcome::Refused { certificate, .. }
            | PinchingOutcome::NotApplicable { certificate, .. } => certificate,
        }
    }
}

/// Zoll test for a `δ`-pinched body: certified iff no period lies in the open
/// interval `(sys, δ²·sys)`.
///
/// `δ` is passed squared so that `δ = √2` stays exact. `spectrum` must hold
/// every period up to `δ²·sys`, as stated by `coverage`.
pub fn zoll_by_pinching(
    body: &ConvexBody,
    spectrum: &[Value],
    delta_sq: &Value,
    coverage: Option<&Coverage>,
) -> Result<PinchingOutcome> {
    let d2 = delta_sq.to_f64();
    let two = Value::Exact(Rational::from_integer(2.into()));
    if !(d2 > 1.0) || two.definitely_less(delta_sq, 0.0) {
        return invalid("delta^2 must lie in (1, 2]");
    }
    let radii = body.pinching_radii();
    let ratio_sq = (radii.big_r / radii.r).powi(2);
    let tolerances = json!({
        "equality": TOL_EQ,
        "chain": TOL_CHAIN,
        "radii_flagged": radii.flagged,
    });
    let mut inputs = json!({
        "body": body.spec(),
        "delta_sq": delta_sq,
        "r": radii.r,
        "R": radii.big_r,
        "spectrum": spectrum,
        "coverage": coverage,
    });
    // Exact comparison R²/r² < δ² when both sides are exact rationals.
    let ratio_ok = match (body.as_ellipsoid().map(|e| e.a_values()), delta_sq) {
        (Some(a), Value::Exact(d)) if a.iter().all(Value::is_exact) => {
            let ex: Vec<Rational> = a
                .into_iter()
                .map(|v| match v {
                    Value::Exact(r) => r,
                    Value::Float(_) => unreachable!(),
                })
                .collect();
            let max = ex.iter().max().unwrap();
            let min = ex.iter().min().unwrap();
            max / min < *d
        }
        _ => ratio_sq < d2,
    };
    if !ratio_ok {
        return Ok(PinchingOutcome::NotApplicable {
            certificate: Certificate {
                theorem: TAG_PINCHING.into(),
                verdict: "not-applicable".into(),
                inputs,
                tolerances,
                witnesses: json!({ "ratio_sq": ratio_sq }),
            },
            ratio_sq,
        });
    }
    let pi = std::f64::consts::PI;
    let pi_big_r_sq = pi * radii.big_r * radii.big_r;
    let delta_sq_pi_r_sq = d2 * pi * radii.r * radii.r;
    let c_n_minus_1 = match body.as_ellipsoid() {
        Some(e) => Some(e.spectral_invariants(e.n())?[e.n() - 1].to_f64()),
        None => None,
    };
    let chain = BoundChain {
        c_n_minus_1,
        pi_big_r_sq,
        delta_sq_pi_r_sq,
        lower_holds: c_n_minus_1.map(|c| c <= pi_big_r_sq * (1.0 + TOL_CHAIN)),
        upper_holds: pi_big_r_sq < delta_sq_pi_r_sq,
    };
    let refuse = |inputs: serde_json::Value, reason: String, witness: serde_json::Value| {
        Ok(PinchingOutcome::Refused {
            chain: chain.clone(),
            certificate: Certificate {
                theorem: TAG_PINCHING.into(),
                verdict: "refused".into(),
                inputs,
                tolerances: tolerances.clone(),
                witnesses: witness,
            },
            reason,
        })
    };
    let Some(cov) = coverage else {
        return refuse(inputs, "no spectrum coverage attestation".into(), json!({ "chain": chain }));
    };
    let Some(sys) = spectrum.iter().min_by(|a, b| a.cmp_value(b)).cloned() else {
        return refuse(inputs, "empty spectrum".into(), json!({ "chain": chain }));
    };
    let upper = match (&sys, delta_sq) {
        (Value::Exact(s), Value::Exact(d)) => Value::Exact(s * d),
        _ => Value::Float(sys.to_f64() * d2),
    };
    if cov.up_to < upper.to_f64() * (1.0 - TOL_EQ) {
        return refuse(
            inputs,
            format!("coverage up to {} does not reach delta^2 * sys = {}", cov.up_to, upper),
            json!({ "sys": sys, "delta_sq_sys": upper, "chain": chain }),
        );
    }
    // Open interval, read literally: endpoints themselves do not count.
    let inside: Vec<&Value> = spectrum
        .iter()
        .filter(|v| sys.definitely_less(v, TOL_EQ) && v.cmp_value(&upper) == std::cmp::Ordering::Less)
        .collect();
    if let Some(w) = inside.first() {
        return refuse(
            inputs,
            format!("period {w} lies in (sys, delta^2 * sys) = ({sys}, {upper})"),
            json!({ "sys": sys, "delta_sq_sys": upper, "in_gap": inside, "chain": chain }),
        );
    }
    inputs["sys"] = json!(sys);
    Ok(PinchingOutcome::Certified {
        certificate: Certificate {
            theorem: TAG_PINCHING.into(),
            verdict: "zoll".into(),
            inputs,
            tolerances,
            witnesses: json!({ "sys": sys, "delta_sq_sys": upper, "chain": chain }),
        },
        chain,
    })
}

/// Runs [`zoll_by_pinching`] on an ellipsoid with its own exact spectrum
/// up to `δ²·a_1` as the attested coverage.
pub fn ellipsoid_pinching(e: &Ellipsoid, delta_sq: &Value) -> Result<PinchingOutcome> {
    let a1 = e
        .a_values()
        .into_iter()
        .min_by(|a, b| a.cmp_value(b))
        .expect("n >= 1");
    let max = match (&a1, delta_sq) {
        (Value::Exact(a), Value::Exact(d)) => Value::Exact(a * d),
        _ => Value::Float(a1.to_f64() * delta_sq.to_f64() * (1.0 + 4.0 * TOL_EQ)),
    };
    let spec = e.action_spectrum(&max)?;
    let values: Vec<Value> = spec.entries.iter().map(|x| x.tau.clone()).collect();
    let coverage = Coverage {
        up_to: max.to_f64(),
        source: if spec.exact { "exact ellipsoid spectrum" } else { "float ellipsoid spectrum" }.into(),
    };
    zoll_by_pinching(&ConvexBody::from_ellipsoid(e), &values, delta_sq, Some(&coverage))
}

/// Caller's statement that the action spectrum is discrete and that the list
/// holds capacity values.
#[derive(Clone, Debug, Serialize)]
pub struct Discreteness {
    pub source: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SufficientOutcome {
    Besse {
        hits: Vec<BesseHit>,
        degenerate: bool,
        certificate: Certificate,
    },
    Inconclusive {
        certificate: Certificate,
    },
    Refused {
        reason: String,
    },
}

/// One-directional test: `c_i = c_{i+n−1}` for some `i` implies Besse. No
/// conclusion is drawn from the absence of a hit.
pub fn besse_sufficient_eh(c: &[Value], n: usize, discreteness: Option<&Discreteness>) -> Result<SufficientOutcome> {
    let Some(att) = discreteness else {
        return Ok(SufficientOutcome::Refused {
            reason: "spectrum discreteness not attested".into(),
        });
    };
    let exact = check_invariants(c, n)?;
    let hits = scan(c, n, exact);
    let degenerate = n == 1;
    let mut certificate = Certificate {
        theorem: TAG_SUFFICIENT.into(),
        verdict: "sufficient condition met: besse".into(),
        inputs: json!({ "n": n, "invariants": c, "discreteness": att }),
        tolerances: json!({ "equality": if exact { json!("exact") } else { json!(TOL_EQ) } }),
        witnesses: json!({ "hits": hits, "degenerate": degenerate }),
    };
    if hits.is_empty() {
        certificate.verdict = "inconclusive (no converse)".into();
        return Ok(SufficientOutcome::Inconclusive { certificate });
    }
    Ok(SufficientOutcome::Besse {
        hits,
        degenerate,
        certificate,
    })
}

/// `(i, τ)` pairs predicted for a Besse ellipsoid: `i = (μ(kτ₀) − n)/2` for
/// each common period `kτ₀ ≤ max`.
pub fn predicted_hits(e: &Ellipsoid, max_k: u64) -> Result<Vec<(usize, Value)>> {
    let c = e.classify();
    let Some(tau0) = c.tau0 else {
        return Ok(vec![]);
    };
    let mut out = Vec::new();
    for k in 1..=max_k {
        let tau = match &tau0 {
            Value::Exact(t) => Value::Exact(t * Rational::from_integer(k.into())),
            Value::Float(t) => Value::Float(t * k as f64),
        };
        let mu = e.besse_cz_index(&tau)?;
        let i = ((mu - e.n() as i64) / 2).to_usize().expect("mu >= n");
        out.push((i, tau));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse_value, ratio};

    fn vals(s: &[&str]) -> Vec<Value> {
        s.iter().map(|x| parse_value(x).unwrap()).collect()
    }

    fn ell(a: &[(i64, i64)]) -> Ellipsoid {
        Ellipsoid::exact(a.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    #[test]
    fn e12_hit_at_one() {
        let s = besse_by_invariants(&vals(&["1", "2", "2", "3"]), 2).unwrap();
        assert_eq!(s.hits.len(), 1);
        assert_eq!(s.hits[0].i, 1);
        assert_eq!(s.hits[0].tau, parse_value("2").unwrap());
        assert_eq!(s.hits[0].mu, 4);
        assert!(!s.zoll && s.exact);
        let e = ell(&[(1, 1), (2, 1)]);
        assert_eq!(e.besse_cz_index(&parse_value("2").unwrap()).unwrap(), 4);
    }

    #[test]
    fn e11_is_zoll() {
        let s = besse_by_invariants(&vals(&["1", "1", "2", "2"]), 2).unwrap();
        assert!(s.zoll);
        assert_eq!(s.hits[0].mu, 2);
        assert_eq!(s.certificate.theorem, TAG_ZOLL_EQUALITY);
    }

    #[test]
    fn increasing_list_has_no_hits() {
        let s = besse_by_invariants(&vals(&["1", "1.5", "2", "2.5"]), 2).unwrap();
        assert!(s.hits.is_empty());
        let f: Vec<Value> = [1.0, 1.0 + 1e-12, 3.0].iter().map(|x| Value::Float(*x)).collect();
        let s = besse_by_invariants(&f, 2).unwrap();
        assert!(s.zoll && s.flagged);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(besse_by_invariants(&vals(&["2", "1"]), 1).is_err());
        assert!(besse_by_invariants(&vals(&["1"]), 2).is_err());
    }

    #[test]
    fn hits_match_prediction_on_ellipsoids() {
        for a in [vec![(1, 1), (2, 1)], vec![(2, 3), (1, 1), (3, 2)], vec![(1, 2), (1, 3)]] {
            let e = ell(&a);
            let c = e.spectral_invariants(60).unwrap();
            let s = besse_by_invariants(&c, e.n()).unwrap();
            let predicted = predicted_hits(&e, 20).unwrap();
            let got: Vec<(usize, Value)> = s.hits.iter().map(|h| (h.i, h.tau.clone())).collect();
            let want: Vec<(usize, Value)> = predicted
                .into_iter()
                .filter(|(i, _)| i + e.n() - 1 < c.len())
                .collect();
            assert_eq!(got, want, "{a:?}");
        }
    }

    #[test]
    fn ball_is_certified() {
        let b = ConvexBody::ball(1.0, 2).unwrap();
        let pi = std::f64::consts::PI;
        let spec = vec![Value::Float(pi), Value::Float(2.0 * pi)];
        let cov = Coverage { up_to: 2.0 * pi, source: "test".into() };
        let d = Value::Float(1.0 + 1e-6);
        let o = zoll_by_pinching(&b, &spec, &d, Some(&cov)).unwrap();
        assert!(o.is_certified(), "{o:?}");
        let o = ellipsoid_pinching(&ell(&[(1, 1), (1, 1)]), &parse_value("2").unwrap()).unwrap();
        assert!(o.is_certified());
    }

    #[test]
    fn non_round_ellipsoids_refused() {
        let two = parse_value("2").unwrap();
        let o = ellipsoid_pinching(&ell(&[(1, 1), (3, 2)]), &two).unwrap();
        assert!(matches!(o, PinchingOutcome::Refused { .. }), "{o:?}");
        let o = ellipsoid_pinching(&ell(&[(1, 1), (11, 10)]), &parse_value("6/5").unwrap()).unwrap();
        assert!(matches!(o, PinchingOutcome::Refused { .. }));
        // R/r = √1.5 is not below δ = √1.2.
        let o = ellipsoid_pinching(&ell(&[(1, 1), (3, 2)]), &parse_value("6/5").unwrap()).unwrap();
        assert!(matches!(o, PinchingOutcome::NotApplicable { .. }));
        // E(1,2) is never √2-pinched: R²/r² = 2 is not below 2.
        let o = ellipsoid_pinching(&ell(&[(1, 1), (2, 1)]), &two).unwrap();
        assert!(matches!(o, PinchingOutcome::NotApplicable { .. }));
    }

    #[test]
    fn pinching_gates() {
        let b = ConvexBody::ball(1.0, 2).unwrap();
        let pi = std::f64::consts::PI;
        let spec = vec![Value::Float(pi)];
        let d = parse_value("2").unwrap();
        let o = zoll_by_pinching(&b, &spec, &d, None).unwrap();
        assert!(matches!(o, PinchingOutcome::Refused { .. }));
        let cov = Coverage { up_to: 1.5 * pi, source: "short".into() };
        let o = zoll_by_pinching(&b, &spec, &d, Some(&cov)).unwrap();
        assert!(matches!(o, PinchingOutcome::Refused { .. }));
        assert!(zoll_by_pinching(&b, &spec, &parse_value("3").unwrap(), None).is_err());
        assert!(zoll_by_pinching(&b, &spec, &parse_value("1").unwrap(), None).is_err());
        // Endpoint 2·sys is outside the open interval.
        let spec = vec![Value::Float(pi), Value::Float(2.0 * pi)];
        let cov = Coverage { up_to: 2.0 * pi, source: "test".into() };
        assert!(zoll_by_pinching(&b, &spec, &d, Some(&cov)).unwrap().is_certified());
    }

    #[test]
    fn sufficient_condition() {
        let c = vals(&["1", "2", "2", "3"]);
        let att = Discreteness { source: "ellipsoid".into() };
        let o = besse_sufficient_eh(&c, 2, Some(&att)).unwrap();
        match o {
            SufficientOutcome::Besse { hits, degenerate, .. } => {
                assert_eq!(hits, besse_by_invariants(&c, 2).unwrap().hits);
                assert!(!degenerate);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(besse_sufficient_eh(&c, 2, None).unwrap(), SufficientOutcome::Refused { .. }));
        match besse_sufficient_eh(&c, 1, Some(&att)).unwrap() {
            SufficientOutcome::Besse { hits, degenerate, .. } => {
                assert!(degenerate);
                assert_eq!(hits.len(), 4);
            }
            other => panic!("{other:?}"),
        }
        let inc = vals(&["1", "3/2", "2"]);
        assert!(matches!(
            besse_sufficient_eh(&inc, 2, Some(&att)).unwrap(),
            SufficientOutcome::Inconclusive { .. }
        ));
    }
}
