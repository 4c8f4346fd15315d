//! Fixed-point currency.
//!
//! Every bid, payment, reserve price and true value is an integer number of
//! micro-units (10^-6 of a currency unit). Arithmetic on [`Money`] is exact;
//! anything that needs a fraction (expected values, discounted revenue) is
//! lifted into [`crate::Rat`].

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Number of micro-units in one currency unit.
pub const MICROS_PER_UNIT: i64 = 1_000_000;

const FRACTION_DIGITS: usize = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i64);

impl Money {
    pub const ZERO: Money = Money(0);
    /// The smallest representable positive amount.
    pub const MICRO: Money = Money(1);

    pub const fn from_micros(micros: i64) -> Self {
        Money(micros)
    }

    pub const fn from_units(units: i64) -> Self {
        Money(units * MICROS_PER_UNIT)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn max(self, other: Money) -> Money {
        Money(self.0.max(other.0))
    }

    pub fn min(self, other: Money) -> Money {
        Money(self.0.min(other.0))
    }

    /// `self - other`, clipped at zero.
    pub fn saturating_sub_floor(self, other: Money) -> Money {
        Money((self.0 - other.0).max(0))
    }

    pub fn checked_add(self, other: Money) -> Option<Money> {
        self.0.checked_add(other.0).map(Money)
    }

    pub fn checked_sub(self, other: Money) -> Option<Money> {
        self.0.checked_sub(other.0).map(Money)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let unit = MICROS_PER_UNIT as u64;
        write!(f, "{sign}{}.{:06}", abs / unit, abs % unit)
    }
}

impl FromStr for Money {
    type Err = Error;

    /// Parses `[-]digits[.digits]` with at most six fractional digits.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::MoneyParse(s.to_string());
        let trimmed = s.trim();
        let (negative, body) = match trimmed.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, trimmed.strip_prefix('+').unwrap_or(trimmed)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > FRACTION_DIGITS
        {
            return Err(bad());
        }
        let int_value: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut frac_value: i64 = 0;
        for (pos, digit) in frac_part.bytes().enumerate() {
            frac_value += i64::from(digit - b'0') * 10_i64.pow((FRACTION_DIGITS - 1 - pos) as u32);
        }
        let micros = int_value
            .checked_mul(MICROS_PER_UNIT)
            .and_then(|v| v.checked_add(frac_value))
            .ok_or_else(bad)?;
        Ok(Money(if negative { -micros } else { micros }))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MoneyRepr {
    Text(String),
    Number(serde_json::Number),
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = match MoneyRepr::deserialize(deserializer)? {
            MoneyRepr::Text(s) => s,
            MoneyRepr::Number(n) => n.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses a comma-separated list of amounts, e.g. `10,8,5.5`.
pub fn parse_money_list(s: &str) -> Result<Vec<Money>, Error> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|part| part.trim().parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_six_fraction_digits() {
        assert_eq!(Money::from_micros(7_900_000).to_string(), "7.900000");
        assert_eq!(Money::from_micros(-250_000).to_string(), "-0.250000");
        assert_eq!(Money::ZERO.to_string(), "0.000000");
        assert_eq!(Money::MICRO.to_string(), "0.000001");
    }

    #[test]
    fn parses_common_forms() {
        assert_eq!("7.9".parse::<Money>().unwrap(), Money::from_micros(7_900_000));
        assert_eq!("10".parse::<Money>().unwrap(), Money::from_units(10));
        assert_eq!(".25".parse::<Money>().unwrap(), Money::from_micros(250_000));
        assert_eq!("-3.5".parse::<Money>().unwrap(), Money::from_micros(-3_500_000));
        assert_eq!("0.000001".parse::<Money>().unwrap(), Money::MICRO);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", ".", "1.2345678", "abc", "1,5", "--1", "1e3"] {
            assert!(bad.parse::<Money>().is_err(), "{bad:?} should not parse");
        }
    }

    #[test]
    fn json_accepts_strings_and_numbers() {
        let a: Money = serde_json::from_str("\"2.5\"").unwrap();
        let b: Money = serde_json::from_str("2.5").unwrap();
        let c: Money = serde_json::from_str("10").unwrap();
        assert_eq!(a, b);
        assert_eq!(c, Money::from_units(10));
        assert_eq!(serde_json::to_string(&a).unwrap(), "\"2.500000\"");
    }

    #[test]
    fn money_list() {
        let v = parse_money_list("10, 8,5.5").unwrap();
        assert_eq!(v, vec![Money::from_units(10), Money::from_units(8), Money::from_micros(5_500_000)]);
        assert!(parse_money_list("").unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(micros in -(1_i64 << 50)..(1_i64 << 50)) {
            let m = Money::from_micros(micros);
            prop_assert_eq!(m.to_string().parse::<Money>().unwrap(), m);
        }
    }
}
