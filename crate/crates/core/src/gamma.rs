use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;
use crate::rat::Rat;

/// Discount factor in `[0, 1]`, stored in lowest terms.
///
/// Charged against offending transactions (overbids and fakes) that are
/// included but not confirmed. `0` recovers the classical utility, `1` is the
/// worst-case ("weak") model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gamma {
    numer: u64,
    denom: u64,
}

impl Gamma {
    pub const ZERO: Gamma = Gamma { numer: 0, denom: 1 };
    pub const ONE: Gamma = Gamma { numer: 1, denom: 1 };

    pub fn new(numer: u64, denom: u64) -> Result<Self, Error> {
        if denom == 0 || numer > denom {
            return Err(Error::InvalidGamma(format!("{numer}/{denom}")));
        }
        let g = numer.gcd(&denom);
        Ok(Gamma {
            numer: numer / g,
            denom: denom / g,
        })
    }

    pub fn numer(self) -> u64 {
        self.numer
    }

    pub fn denom(self) -> u64 {
        self.denom
    }

    pub fn is_zero(self) -> bool {
        self.numer == 0
    }

    pub fn to_rat(self) -> Rat {
        Rat::new(self.numer.into(), self.denom.into())
    }

    /// `floor(gamma * k / c)`.
    pub fn floor_scaled(self, k: u64, c: u64) -> u64 {
        (self.numer * k) / (self.denom * c)
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

impl FromStr for Gamma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidGamma(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => Gamma::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
            None => {
                // Decimal forms such as "0.5" go through the money parser,
                // which is exact to six places.
                let m: crate::Money = s.parse().map_err(|_| bad())?;
                if m.is_negative() {
                    return Err(bad());
                }
                Gamma::new(m.micros() as u64, crate::money::MICROS_PER_UNIT as u64)
            }
        }
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
