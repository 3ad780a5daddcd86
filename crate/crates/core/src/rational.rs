//! Exact rationals: parsing, formatting and rational approximation.
//!
//! Every area, capacity and volume in the crate is a [`Rational`]. On the
//! wire they are always strings `p/q` (or a bare integer), never floats.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `n/d` as a [`Rational`]. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `p/q`, an integer, or a finite decimal such as `0.15`.
pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    if t.is_empty() {
        return Err(Error::MalformedRational(s.to_string()));
    }
    let lower = t.to_ascii_lowercase();
    if ["sqrt", "pi", "inf", "nan", "e^", "ln", "log"]
        .iter()
        .any(|w| lower.contains(w))
    {
        return Err(Error::ApproximationRequired(s.to_string()));
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_int(n).ok_or_else(|| Error::MalformedRational(s.to_string()))?;
        let d = parse_int(d).ok_or_else(|| Error::MalformedRational(s.to_string()))?;
        if d.is_zero() {
            return Err(Error::MalformedRational(s.to_string()));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::MalformedRational(s.to_string()));
        }
        let negative = whole.starts_with('-');
        let whole = match whole {
            "" | "-" | "+" => BigInt::zero(),
            w => parse_int(w).ok_or_else(|| Error::MalformedRational(s.to_string()))?,
        };
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let frac: BigInt = frac.parse().expect("digits only");
        let mag = whole.abs() * &scale + frac;
        let n = if negative { -mag } else { mag };
        return Ok(Rational::new(n, scale));
    }
    parse_int(t)
        .map(Rational::from_integer)
        .ok_or_else(|| Error::MalformedRational(s.to_string()))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses a comma separated list. An entry `cxn` stands for `n` copies of `c`.
pub fn parse_list(s: &str) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        match item.split_once(['x', '×']) {
            Some((cap, count)) => {
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|_| Error::MalformedRational(item.to_string()))?;
                let cap = parse(cap)?;
                out.extend(std::iter::repeat_n(cap, count));
            }
            None => out.push(parse(item)?),
        }
    }
    Ok(out)
}

/// Formats as `p/q`, or `p` for integers.
pub fn format(x: &Rational) -> String {
    x.to_string()
}

/// Decimal expansion truncated toward negative infinity.
pub fn to_decimal_floor(x: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10u32), digits);
    let scaled = (x * Rational::from_integer(scale.clone())).floor().to_integer();
    let negative = scaled.is_negative();
    let (whole, frac) = scaled.abs().div_rem(&scale);
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    format!("{sign}{whole}.{:0>width$}", frac, width = digits)
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// The largest rational `p/q <= x` with `q <= max_den`.
///
/// Stern-Brocot descent with batched steps, so the cost is logarithmic in
/// `max_den`.
pub fn approximate_below(x: &Rational, max_den: u64) -> Rational {
    assert!(max_den >= 1, "max_den must be positive");
    let n_max = BigInt::from(max_den);
    if x.denom() <= &n_max {
        return x.clone();
    }
    let fl = x.floor().to_integer();
    let (mut p0, mut q0) = (fl.clone(), BigInt::one());
    let (mut p1, mut q1) = (&fl + BigInt::one(), BigInt::one());
    let xr = x.clone();
    loop {
        let qm = &q0 + &q1;
        if qm > n_max {
            break;
        }
        let mediant = Rational::new(&p0 + &p1, qm);
        if mediant <= xr {
            // (p0 + k p1)/(q0 + k q1) <= x  <=>  k <= (x q0 - p0)/(p1 - x q1)
            let num = &xr * Rational::from_integer(q0.clone()) - Rational::from_integer(p0.clone());
            let den = Rational::from_integer(p1.clone()) - &xr * Rational::from_integer(q1.clone());
            let mut k = (num / den).floor().to_integer();
            let cap = (&n_max - &q0) / &q1;
            if k > cap {
                k = cap;
            }
            p0 += &k * &p1;
            q0 += &k * &q1;
            if Rational::new(p0.clone(), q0.clone()) == xr {
                break;
            }
        } else {
            // (p1 + k p0)/(q1 + k q0) > x  <=>  k < (p1 - x q1)/(x q0 - p0)
            let num = Rational::from_integer(p1.clone()) - &xr * Rational::from_integer(q1.clone());
            let den = &xr * Rational::from_integer(q0.clone()) - Rational::from_integer(p0.clone());
            let mut k = (num / den).ceil().to_integer() - 1;
            let cap = (&n_max - &q1) / &q0;
            if k > cap {
                k = cap;
            }
            p1 += &k * &p0;
            q1 += &k * &q0;
        }
    }
    Rational::new(p0, q0)
}

/// Best lower rational approximation of a float, for inputs that are only
/// known numerically (e.g. an irrational aspect ratio).
pub fn approximate_f64_below(x: f64, max_den: u64) -> Result<Rational> {
    let exact = Rational::from_float(x).ok_or_else(|| Error::ApproximationRequired(x.to_string()))?;
    Ok(approximate_below(&exact, max_den))
}

pub mod serde_str {
    //! `#[serde(with = ...)]` adapters writing rationals as `"p/q"` strings.
    use serde::{Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use serde::ser::SerializeSeq;
        use serde::{Deserialize, Deserializer, Serializer};

        use super::super::Rational;

        pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&x.to_string())?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| super::super::parse(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        use super::super::Rational;

        pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => s.collect_str(x),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| super::super::parse(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_notations() {
        assert_eq!(parse("5/2").unwrap(), ratio(5, 2));
        assert_eq!(parse("10/4").unwrap(), ratio(5, 2));
        assert_eq!(parse("-3").unwrap(), int(-3));
        assert_eq!(parse("0.15").unwrap(), ratio(3, 20));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse(" 7 ").unwrap(), int(7));
    }

    #[test]
    fn rejects_garbage_and_irrationals() {
        for bad in ["", "1/0", "a/b", "1.", "1/2/3", "--1", "1e5"] {
            assert!(matches!(parse(bad), Err(Error::MalformedRational(_))), "{bad}");
        }
        assert!(matches!(parse("sqrt(2)"), Err(Error::ApproximationRequired(_))));
        assert!(matches!(parse("pi"), Err(Error::ApproximationRequired(_))));
    }

    #[test]
    fn list_with_repetition() {
        let xs = parse_list("13/100x3, 1/2").unwrap();
        assert_eq!(xs, vec![ratio(13, 100), ratio(13, 100), ratio(13, 100), ratio(1, 2)]);
        assert_eq!(parse_list("1/5x0").unwrap(), vec![]);
        assert!(parse_list("1/5xq").is_err());
    }

    #[test]
    fn decimal_floor() {
        assert_eq!(to_decimal_floor(&ratio(1, 3), 4), "0.3333");
        assert_eq!(to_decimal_floor(&ratio(2, 3), 4), "0.6666");
        assert_eq!(to_decimal_floor(&ratio(-1, 3), 2), "-0.34");
        assert_eq!(to_decimal_floor(&int(5), 0), "5");
        assert_eq!(to_decimal_floor(&ratio(1, 8), 5), "0.12500");
    }

    fn brute_below(x: &Rational, n: u64) -> Rational {
        (1..=n as i64)
            .map(|q| {
                let p = (x * int(q)).floor().to_integer();
                Rational::new(p, BigInt::from(q))
            })
            .max()
            .unwrap()
    }

    #[test]
    fn approximation_matches_brute_force() {
        let xs = [
            ratio(355, 113),
            ratio(314159, 100000),
            ratio(-7, 3),
            ratio(1000001, 1000000),
            ratio(2, 1),
            ratio(99999, 70711),
        ];
        for x in &xs {
            for n in [1, 2, 5, 7, 50, 113, 500] {
                let got = approximate_below(x, n);
                assert!(got <= *x);
                assert!(got.denom() <= &BigInt::from(n));
                assert_eq!(got, brute_below(x, n), "x={x} n={n}");
            }
        }
    }

    #[test]
    fn float_approximation_is_below() {
        let r = approximate_f64_below(std::f64::consts::SQRT_2, 1000).unwrap();
        assert!(to_f64(&r) <= std::f64::consts::SQRT_2);
        assert!(std::f64::consts::SQRT_2 - to_f64(&r) < 1e-5);
        assert!(approximate_f64_below(f64::NAN, 10).is_err());
    }

    proptest::proptest! {
        #[test]
        fn format_parse_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let x = ratio(n, d);
            proptest::prop_assert_eq!(parse(&format(&x)).unwrap(), x);
        }
    }
}
