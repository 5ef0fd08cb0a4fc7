//! Exact/float numeric values, `"p/q"` parsing, rational lcm and
//! continued-fraction reconstruction.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};

pub type Rational = BigRational;

/// Largest denominator tried by continued-fraction reconstruction.
pub const CF_MAX_DENOMINATOR: i64 = 1_000_000;

/// Relative distance below which a float is taken to *be* a rational `p/q`.
/// A few ulps: decimals such as `1.05` reconstruct, while best approximations
/// of typical irrationals with `q ≤ 10⁶` miss by far more.
pub const CF_EXACT_TOL: f64 = 1e-15;

/// A scalar that is either an exact rational or a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => rational_to_f64(r),
            Value::Float(x) => *x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    /// Exact equality for exact values, relative tolerance otherwise.
    pub fn approx_eq(&self, other: &Value, rel_tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= rel_tol * a.abs().max(b.abs())
            }
        }
    }

    /// Strict `<` that treats values equal under `approx_eq` as equal.
    pub fn definitely_less(&self, other: &Value, rel_tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a < b,
            _ => !self.approx_eq(other, rel_tol) && self.to_f64() < other.to_f64(),
        }
    }

    pub fn cmp_value(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }

    pub fn zero_like(&self) -> Value {
        match self {
            Value::Exact(_) => Value::Exact(Rational::zero()),
            Value::Float(_) => Value::Float(0.0),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{}", format_rational(r)),
            Value::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => s.serialize_str(&format_rational(r)),
            Value::Float(x) => s.serialize_f64(*x),
        }
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"` or an integer as an exact value, anything else that parses
/// as `f64` (decimals, exponents) as a float.
pub fn parse_value(s: &str) -> Result<Value> {
    let s = s.trim();
    if s.is_empty() {
        return invalid("empty number");
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad_number(s))?;
        let q: BigInt = q.trim().parse().map_err(|_| bad_number(s))?;
        if q.is_zero() {
            return invalid(format!("zero denominator in {s:?}"));
        }
        return Ok(Value::Exact(Rational::new(p, q)));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Ok(Value::Exact(Rational::from_integer(n)));
    }
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(Value::Float(x)),
        _ => Err(bad_number(s)),
    }
}

fn bad_number(s: &str) -> crate::Error {
    crate::Error::InvalidInput(format!("cannot parse number {s:?}"))
}

/// `lcm(p_h/q_h) = lcm(p_h) / gcd(q_h)` for positive reduced rationals.
pub fn lcm_rationals(values: &[Rational]) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::zero();
    for v in values {
        num = num.lcm(v.numer());
        den = den.gcd(v.denom());
    }
    Rational::new(num, den)
}

/// Best rational approximation of `x` among continued-fraction convergents
/// with denominator `≤ max_den`; returns `(p, q, |x − p/q|)`.
pub fn best_convergent(x: f64, max_den: i64) -> (i64, i64, f64) {
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rem = x;
    let mut best = (x.round() as i64, 1i64, (x - x.round()).abs());
    for _ in 0..64 {
        let a = rem.floor();
        if !a.is_finite() || a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        let err = (x - h2 as f64 / k2 as f64).abs();
        if err <= best.2 {
            best = (h2 as i64, k2 as i64, err);
        }
        if err == 0.0 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = rem - a as f64;
        if frac == 0.0 {
            break;
        }
        rem = 1.0 / frac;
    }
    best
}

/// Outcome of trying to read a float as a rational with bounded denominator.
#[derive(Clone, Debug, Serialize)]
pub struct RationalCertificate {
    pub value: f64,
    pub numerator: i64,
    pub denominator: i64,
    pub error: f64,
    pub max_denominator: i64,
    /// Whether `error ≤ CF_EXACT_TOL · |value|`.
    pub reconstructed: bool,
}

pub fn rational_certificate(x: f64, max_den: i64) -> RationalCertificate {
    let (p, q, err) = best_convergent(x, max_den);
    RationalCertificate {
        value: x,
        numerator: p,
        denominator: q,
        error: err,
        max_denominator: max_den,
        reconstructed: err <= CF_EXACT_TOL * x.abs().max(f64::MIN_POSITIVE),
    }
}

/// Integer ceiling of a rational.
pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn is_positive_integer(r: &Rational) -> bool {
    r.is_integer() && r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_and_float() {
        assert_eq!(parse_value("3/6").unwrap(), Value::Exact(ratio(1, 2)));
        assert_eq!(parse_value(" 7 ").unwrap(), Value::Exact(int(7)));
        assert_eq!(parse_value("1.5").unwrap(), Value::Float(1.5));
        assert!(parse_value("1/0").is_err());
        assert!(parse_value("x").is_err());
        assert!(parse_value("").is_err());
    }

    #[test]
    fn lcm_of_rationals() {
        assert_eq!(lcm_rationals(&[int(1), int(2)]), int(2));
        assert_eq!(lcm_rationals(&[int(1), ratio(3, 2)]), int(3));
        assert_eq!(lcm_rationals(&[ratio(7, 3), ratio(9, 8)]), int(63));
        assert_eq!(lcm_rationals(&[ratio(1, 2), ratio(1, 3)]), int(1));
    }

    #[test]
    fn continued_fractions() {
        let c = rational_certificate(1.05, CF_MAX_DENOMINATOR);
        assert!(c.reconstructed);
        assert_eq!((c.numerator, c.denominator), (21, 20));
        let s = rational_certificate(std::f64::consts::SQRT_2, CF_MAX_DENOMINATOR);
        assert!(!s.reconstructed);
        assert!(s.denominator <= CF_MAX_DENOMINATOR);
        assert!(s.error > 0.0);
        let third = rational_certificate(1.0 / 3.0, CF_MAX_DENOMINATOR);
        assert!(third.reconstructed);
        assert_eq!((third.numerator, third.denominator), (1, 3));
    }

    #[test]
    fn value_comparisons() {
        let a = Value::Exact(ratio(1, 3));
        let b = Value::Float(1.0 / 3.0);
        assert!(a.approx_eq(&b, 1e-12));
        assert!(!a.definitely_less(&b, 1e-12));
        assert!(Value::Exact(int(1)).definitely_less(&Value::Exact(int(2)), 0.0));
        assert_eq!(Value::Exact(ratio(3, 2)).to_string(), "3/2");
    }
}
