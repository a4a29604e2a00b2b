//! Exact constants of the form `sum q * sqrt(2)^a * pi^k * sqrt(pi)^b`
//! with rational `q`, `a, b` in `{0, 1}` and integer `k`.
//!
//! Products reduce `sqrt(2)^2 = 2` into the coefficient and
//! `sqrt(pi)^2 = pi` into the power of `pi`, so every value has one
//! canonical representation and equality is structural.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Symbolic part of a term. Ordered so `Display` lists rational terms first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub pi_pow: i32,
    pub sqrt_pi: bool,
    pub sqrt2: bool,
}

impl Monomial {
    const ONE: Monomial = Monomial {
        pi_pow: 0,
        sqrt_pi: false,
        sqrt2: false,
    };
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactValue {
    terms: BTreeMap<Monomial, BigRational>,
}

const PI_DIGITS: &str = "3.14159265358979323846264338327950288419716939937510582097494459230781640628620899862803483";
const SQRT2_DIGITS: &str = "1.41421356237309504880168872420969807856967187537694807317667973799073247846210703885038753";
const SQRT_PI_DIGITS: &str = "1.77245385090551602729816748334114518279754945612238712821380778985291128459103218137495066";

fn decimal_to_rational(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal literal");
    BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl ExactValue {
    pub fn zero() -> Self {
        ExactValue::default()
    }

    pub fn one() -> Self {
        ExactValue::rational(BigRational::one())
    }

    pub fn rational(q: BigRational) -> Self {
        ExactValue::term(q, Monomial::ONE)
    }

    pub fn frac(num: i64, den: i64) -> Self {
        ExactValue::rational(rat(num, den))
    }

    pub fn integer<T: Into<BigInt>>(n: T) -> Self {
        ExactValue::rational(BigRational::from_integer(n.into()))
    }

    pub fn term(coeff: BigRational, monomial: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(monomial, coeff);
        }
        ExactValue { terms }
    }

    pub fn sqrt2() -> Self {
        ExactValue::term(
            BigRational::one(),
            Monomial {
                sqrt2: true,
                ..Monomial::ONE
            },
        )
    }

    pub fn sqrt_pi() -> Self {
        ExactValue::term(
            BigRational::one(),
            Monomial {
                sqrt_pi: true,
                ..Monomial::ONE
            },
        )
    }

    pub fn pi_pow(k: i32) -> Self {
        ExactValue::term(
            BigRational::one(),
            Monomial {
                pi_pow: k,
                ..Monomial::ONE
            },
        )
    }

    /// `pi^(half_exp / 2)`, any integer `half_exp`.
    pub fn pi_half_pow(half_exp: i32) -> Self {
        let k = Integer::div_floor(&half_exp, &2);
        ExactValue::term(
            BigRational::one(),
            Monomial {
                pi_pow: k,
                sqrt_pi: half_exp - 2 * k == 1,
                sqrt2: false,
            },
        )
    }

    /// `2^(half_exp / 2)`, any integer `half_exp`.
    pub fn two_half_pow(half_exp: i64) -> Self {
        let k = Integer::div_floor(&half_exp, &2);
        let two = BigInt::from(2u32);
        let coeff = if k >= 0 {
            BigRational::from_integer(two.pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), two.pow((-k) as u32))
        };
        ExactValue::term(
            coeff,
            Monomial {
                sqrt2: half_exp - 2 * k == 1,
                ..Monomial::ONE
            },
        )
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// The value as a rational, if it has no irrational part.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, q: &BigRational) -> ExactValue {
        if q.is_zero() {
            return ExactValue::zero();
        }
        ExactValue {
            terms: self.terms.iter().map(|(k, c)| (*k, c * q)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> ExactValue {
        (0..e).fold(ExactValue::one(), |acc, _| &acc * self)
    }

    fn insert(&mut self, monomial: Monomial, coeff: BigRational) {
        let entry = self.terms.entry(monomial).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&monomial);
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut x = c.to_f64().unwrap_or(f64::NAN) * std::f64::consts::PI.powi(m.pi_pow);
                if m.sqrt2 {
                    x *= std::f64::consts::SQRT_2;
                }
                if m.sqrt_pi {
                    x *= std::f64::consts::PI.sqrt();
                }
                x
            })
            .sum()
    }

    /// Rational approximation accurate to about 85 decimal digits.
    pub fn approximate(&self) -> BigRational {
        let pi = decimal_to_rational(PI_DIGITS);
        let sqrt2 = decimal_to_rational(SQRT2_DIGITS);
        let sqrt_pi = decimal_to_rational(SQRT_PI_DIGITS);
        let mut sum = BigRational::zero();
        for (m, c) in &self.terms {
            let mut x = c.clone();
            if m.pi_pow >= 0 {
                x *= pi.pow(m.pi_pow);
            } else {
                x /= pi.pow(-m.pi_pow);
            }
            if m.sqrt2 {
                x *= &sqrt2;
            }
            if m.sqrt_pi {
                x *= &sqrt_pi;
            }
            sum += x;
        }
        sum
    }

    /// Decimal rendering rounded to `digits` places after the point.
    pub fn to_decimal(&self, digits: usize) -> String {
        format_decimal(&self.approximate(), digits)
    }
}

pub fn format_decimal(x: &BigRational, digits: usize) -> String {
    let negative = x.is_negative();
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = x.abs() * BigRational::from_integer(scale.clone());
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let (int, frac) = rounded.div_rem(&scale);
    let mut s = String::new();
    if negative && !rounded.is_zero() {
        s.push('-');
    }
    s.push_str(&int.to_string());
    if digits > 0 {
        s.push('.');
        let f = frac.to_string();
        s.push_str(&"0".repeat(digits - f.len()));
        s.push_str(&f);
    }
    s
}

fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `5/128*sqrt(pi)`, `5/24 - 1/16*pi`, `sqrt(2)/...` style rendering.
impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mut symbols = Vec::new();
            if m.sqrt2 {
                symbols.push("sqrt(2)".to_string());
            }
            match m.pi_pow {
                0 => {}
                1 => symbols.push("pi".into()),
                k => symbols.push(format!("pi^{k}")),
            }
            if m.sqrt_pi {
                symbols.push("sqrt(pi)".into());
            }
            let magnitude = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else if c.is_negative() {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let body = if symbols.is_empty() {
                format_rational(&magnitude)
            } else if magnitude.is_one() {
                symbols.join("*")
            } else {
                format!("{}*{}", format_rational(&magnitude), symbols.join("*"))
            };
            f.write_str(&body)?;
        }
        Ok(())
    }
}

impl Add for &ExactValue {
    type Output = ExactValue;
    fn add(self, rhs: &ExactValue) -> ExactValue {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(*m, c.clone());
        }
        out
    }
}

impl Sub for &ExactValue {
    type Output = ExactValue;
    fn sub(self, rhs: &ExactValue) -> ExactValue {
        self + &(-rhs)
    }
}

impl Neg for &ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        ExactValue {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Mul for &ExactValue {
    type Output = ExactValue;
    fn mul(self, rhs: &ExactValue) -> ExactValue {
        let mut out = ExactValue::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut coeff = ca * cb;
                let mut pi_pow = ma.pi_pow + mb.pi_pow;
                if ma.sqrt2 && mb.sqrt2 {
                    coeff *= BigRational::from_integer(BigInt::from(2u32));
                }
                if ma.sqrt_pi && mb.sqrt_pi {
                    pi_pow += 1;
                }
                let m = Monomial {
                    pi_pow,
                    sqrt_pi: ma.sqrt_pi ^ mb.sqrt_pi,
                    sqrt2: ma.sqrt2 ^ mb.sqrt2,
                };
                out.insert(m, coeff);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: ExactValue) -> ExactValue {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&ExactValue> for ExactValue {
            type Output = ExactValue;
            fn $method(self, rhs: &ExactValue) -> ExactValue {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ExactValue {
    type Output = ExactValue;
    fn neg(self) -> ExactValue {
        -&self
    }
}

impl From<BigRational> for ExactValue {
    fn from(q: BigRational) -> Self {
        ExactValue::rational(q)
    }
}

impl From<BigUint> for ExactValue {
    fn from(n: BigUint) -> Self {
        ExactValue::integer(BigInt::from(n))
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    sqrt2: u8,
    pi_pow: i32,
    sqrtpi: u8,
}

#[derive(Serialize, Deserialize)]
struct ExactJson {
    terms: Vec<TermJson>,
}

impl Serialize for ExactValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ExactJson {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson {
                    coeff: format_rational(c),
                    sqrt2: m.sqrt2 as u8,
                    pi_pow: m.pi_pow,
                    sqrtpi: m.sqrt_pi as u8,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ExactJson::deserialize(deserializer)?;
        let mut out = ExactValue::zero();
        for t in raw.terms {
            if t.sqrt2 > 1 || t.sqrtpi > 1 {
                return Err(D::Error::custom("sqrt2 and sqrtpi flags must be 0 or 1"));
            }
            let coeff: BigRational = t
                .coeff
                .parse()
                .map_err(|_| D::Error::custom(format!("bad coefficient {:?}", t.coeff)))?;
            out.insert(
                Monomial {
                    pi_pow: t.pi_pow,
                    sqrt_pi: t.sqrtpi == 1,
                    sqrt2: t.sqrt2 == 1,
                },
                coeff,
            );
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reductions() {
        assert_eq!(ExactValue::sqrt2() * ExactValue::sqrt2(), ExactValue::integer(2));
        assert_eq!(ExactValue::sqrt_pi() * ExactValue::sqrt_pi(), ExactValue::pi_pow(1));
        assert_eq!(ExactValue::pi_pow(2) * ExactValue::pi_pow(-2), ExactValue::one());
        assert_eq!(ExactValue::two_half_pow(-1), ExactValue::sqrt2().scale(&rat(1, 2)));
        assert_eq!(ExactValue::two_half_pow(3), ExactValue::sqrt2().scale(&rat(2, 1)));
        assert_eq!(ExactValue::pi_half_pow(-1) * ExactValue::sqrt_pi(), ExactValue::one());
        assert!((ExactValue::sqrt2() - ExactValue::sqrt2()).is_zero());
    }

    #[test]
    fn rendering() {
        let v = ExactValue::sqrt_pi().scale(&rat(5, 128));
        assert_eq!(v.to_string(), "5/128*sqrt(pi)");
        let w = ExactValue::frac(5, 24) - ExactValue::pi_pow(1).scale(&rat(1, 16));
        assert_eq!(w.to_string(), "5/24 - 1/16*pi");
        assert_eq!(ExactValue::zero().to_string(), "0");
        assert_eq!((-ExactValue::sqrt_pi()).to_string(), "-sqrt(pi)");
        assert_eq!(w.to_decimal(5), "0.01198");
        assert_eq!(v.to_decimal(50).len(), 52);
        assert!(v.to_decimal(50).starts_with("0.0692"));
        assert_eq!(ExactValue::frac(-1, 3).to_decimal(3), "-0.333");
    }

    #[test]
    fn decimal_agrees_with_f64() {
        let v = ExactValue::sqrt2() * ExactValue::pi_half_pow(-3) + ExactValue::frac(7, 3);
        let d: f64 = v.to_decimal(30).parse().unwrap();
        assert!((d - v.to_f64()).abs() < 1e-14);
    }

    #[test]
    fn json_shape() {
        let v = ExactValue::sqrt_pi().scale(&rat(5, 128));
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"terms": [{"coeff": "5/128", "sqrt2": 0, "pi_pow": 0, "sqrtpi": 1}]})
        );
    }

    fn arb_value() -> impl Strategy<Value = ExactValue> {
        prop::collection::vec((-20i64..20, 1i64..12, any::<bool>(), -2i32..3, any::<bool>()), 0..4)
            .prop_map(|terms| {
                terms.into_iter().fold(ExactValue::zero(), |acc, (n, d, s2, k, sp)| {
                    acc + ExactValue::term(
                        rat(n, d),
                        Monomial {
                            pi_pow: k,
                            sqrt_pi: sp,
                            sqrt2: s2,
                        },
                    )
                })
            })
    }

    proptest! {
        #[test]
        fn ring_laws_and_canonical_form(a in arb_value(), b in arb_value(), c in arb_value()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert!((&a - &a).is_zero());
            prop_assert!((&a * &b).terms().all(|(_, q)| !q.is_zero()));
            let lhs = (&a * &b).to_f64();
            let rhs = a.to_f64() * b.to_f64();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn json_round_trip(a in arb_value()) {
            let s = serde_json::to_string(&a).unwrap();
            let back: ExactValue = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
