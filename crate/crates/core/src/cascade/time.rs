use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid_input, Error, Result};

const MAX_SCALE: u8 = 18;

/// Exact non-negative decimal time (`units / 10^scale`).
///
/// The scale is the number of fractional digits as written, so `1.50`
/// formats back as `1.50`. Comparison and equality are by value.
#[derive(Clone, Copy, Debug, Default)]
pub struct Timestamp {
    units: u64,
    scale: u8,
}

impl Timestamp {
    pub const ZERO: Timestamp = Timestamp { units: 0, scale: 0 };

    /// Integer time, e.g. a synchronous diffusion round.
    pub const fn from_int(value: u64) -> Self {
        Timestamp { units: value, scale: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.units == 0
    }

    pub fn to_f64(self) -> f64 {
        self.units as f64 / 10f64.powi(i32::from(self.scale))
    }

    fn widened(self, scale: u8) -> u128 {
        u128::from(self.units) * 10u128.pow(u32::from(scale - self.scale))
    }
}

impl PartialEq for Timestamp {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Timestamp {}

impl PartialOrd for Timestamp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Timestamp {
    fn cmp(&self, other: &Self) -> Ordering {
        let scale = self.scale.max(other.scale);
        self.widened(scale).cmp(&other.widened(scale))
    }
}

impl Hash for Timestamp {
    fn hash<H: Hasher>(&self, state: &mut H) {
        let (mut units, mut scale) = (self.units, self.scale);
        while scale > 0 && units % 10 == 0 {
            units /= 10;
            scale -= 1;
        }
        units.hash(state);
        scale.hash(state);
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.units);
        }
        let div = 10u64.pow(u32::from(self.scale));
        write!(f, "{}.{:0width$}", self.units / div, self.units % div, width = usize::from(self.scale))
    }
}

impl FromStr for Timestamp {
    type Err = Error;

    /// Accepts canonical decimals only: no sign, no exponent, no redundant
    /// leading zeros, at least one digit on each side of a point.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid_input(format!("malformed time `{s}`"));
        let (int, frac) = match s.split_once('.') {
            Some((i, f)) => (i, Some(f)),
            None => (s, None),
        };
        let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
        if !digits(int) || (int.len() > 1 && int.starts_with('0')) {
            return Err(bad());
        }
        let frac = frac.unwrap_or("");
        if s.contains('.') && !digits(frac) {
            return Err(bad());
        }
        let scale = u8::try_from(frac.len()).ok().filter(|&n| n <= MAX_SCALE).ok_or_else(bad)?;
        let int_part: u64 = int.parse().map_err(|_| bad())?;
        let frac_part: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let units = int_part
            .checked_mul(10u64.pow(u32::from(scale)))
            .and_then(|v| v.checked_add(frac_part))
            .ok_or_else(bad)?;
        Ok(Timestamp { units, scale })
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
