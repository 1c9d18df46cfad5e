//! Fixed-point quantities: fantasy points and player credits.
//!
//! Scoring never touches floating point. Schema values and C/VC multipliers
//! are restricted to multiples of 0.5, so every product lands on a multiple
//! of 0.25 and is stored exactly as an integer count of quarter points.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixedPointError {
    #[error("{value} is not a multiple of {step}")]
    Granularity { value: f64, step: f64 },
    #[error("{0} is not a finite number")]
    NotFinite(f64),
}

/// Fantasy points stored as an integer number of quarter points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Points(i64);

impl Points {
    pub const ZERO: Points = Points(0);

    pub const fn from_quarters(q: i64) -> Self {
        Points(q)
    }

    pub const fn whole(p: i64) -> Self {
        Points(p * 4)
    }

    pub const fn quarters(self) -> i64 {
        self.0
    }

    /// Parses a decimal that must sit on the 0.5 grid (schema values).
    pub fn from_half_step(value: f64) -> Result<Self, FixedPointError> {
        let halves = to_grid(value, 2.0)?;
        Ok(Points(halves * 2))
    }

    /// Parses any decimal on the 0.25 grid (report inputs, points files).
    pub fn from_decimal(value: f64) -> Result<Self, FixedPointError> {
        Ok(Points(to_grid(value, 4.0)?))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 4.0
    }

    pub fn times(self, k: i64) -> Self {
        Points(self.0 * k)
    }

    /// `self × multiplier` where the multiplier is on the 0.5 grid.
    ///
    /// Exact as long as `self` is on the 0.5 grid, which holds for every base
    /// score produced from a validated schema.
    pub fn scale(self, multiplier: Multiplier) -> Self {
        Points(self.0 * multiplier.halves() / 2)
    }

    /// True when the value is a whole multiple of 0.5.
    pub fn is_half_granular(self) -> bool {
        self.0 % 2 == 0
    }
}

fn to_grid(value: f64, per_unit: f64) -> Result<i64, FixedPointError> {
    if !value.is_finite() {
        return Err(FixedPointError::NotFinite(value));
    }
    let scaled = value * per_unit;
    let rounded = scaled.round();
    if (scaled - rounded).abs() > 1e-9 {
        return Err(FixedPointError::Granularity {
            value,
            step: 1.0 / per_unit,
        });
    }
    Ok(rounded as i64)
}

impl Add for Points {
    type Output = Points;
    fn add(self, rhs: Points) -> Points {
        Points(self.0 + rhs.0)
    }
}

impl AddAssign for Points {
    fn add_assign(&mut self, rhs: Points) {
        self.0 += rhs.0;
    }
}

impl Sub for Points {
    type Output = Points;
    fn sub(self, rhs: Points) -> Points {
        Points(self.0 - rhs.0)
    }
}

impl Neg for Points {
    type Output = Points;
    fn neg(self) -> Points {
        Points(-self.0)
    }
}

impl Sum for Points {
    fn sum<I: Iterator<Item = Points>>(iter: I) -> Points {
        iter.fold(Points::ZERO, Add::add)
    }
}

impl fmt::Display for Points {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_decimal(f, self.0, 4)
    }
}

fn write_decimal(f: &mut fmt::Formatter<'_>, units: i64, per_whole: i64) -> fmt::Result {
    let sign = if units < 0 { "-" } else { "" };
    let abs = units.unsigned_abs() as i64;
    let whole = abs / per_whole;
    let frac = abs % per_whole;
    if frac == 0 {
        return write!(f, "{sign}{whole}");
    }
    // per_whole is 2 or 4, so two decimals always suffice.
    let hundredths = frac * 100 / per_whole;
    let text = format!("{hundredths:02}");
    write!(f, "{sign}{whole}.{}", text.trim_end_matches('0'))
}

impl Serialize for Points {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0 % 4 == 0 {
            s.serialize_i64(self.0 / 4)
        } else {
            s.serialize_f64(self.to_f64())
        }
    }
}

impl<'de> Deserialize<'de> for Points {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Points::from_decimal(v).map_err(serde::de::Error::custom)
    }
}

/// A C/VC multiplier on the 0.5 grid, stored in halves (2.0 → 4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiplier(i64);

impl Multiplier {
    pub const ONE: Multiplier = Multiplier(2);

    pub fn from_f64(value: f64) -> Result<Self, FixedPointError> {
        Ok(Multiplier(to_grid(value, 2.0)?))
    }

    pub const fn from_halves(h: i64) -> Self {
        Multiplier(h)
    }

    pub const fn halves(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl Serialize for Multiplier {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Multiplier {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Multiplier::from_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Player credit cost in half-credit units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Credits(u32);

impl Credits {
    pub const fn from_halves(h: u32) -> Self {
        Credits(h)
    }

    pub fn from_f64(value: f64) -> Result<Self, FixedPointError> {
        let h = to_grid(value, 2.0)?;
        if h < 0 {
            return Err(FixedPointError::Granularity { value, step: 0.5 });
        }
        Ok(Credits(h as u32))
    }

    pub const fn halves(self) -> u32 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl Add for Credits {
    type Output = Credits;
    fn add(self, rhs: Credits) -> Credits {
        Credits(self.0 + rhs.0)
    }
}

impl Sum for Credits {
    fn sum<I: Iterator<Item = Credits>>(iter: I) -> Credits {
        iter.fold(Credits::default(), Add::add)
    }
}

impl fmt::Display for Credits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_decimal(f, self.0 as i64, 2)
    }
}

impl Serialize for Credits {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Credits {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Credits::from_f64(v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_trims_fraction() {
        assert_eq!(Points::from_quarters(3330).to_string(), "832.5");
        assert_eq!(Points::whole(512).to_string(), "512");
        assert_eq!(Points::from_quarters(-3).to_string(), "-0.75");
        assert_eq!(Credits::from_halves(17).to_string(), "8.5");
    }

    #[test]
    fn half_step_rejects_off_grid() {
        assert!(Points::from_half_step(1.25).is_err());
        assert_eq!(Points::from_half_step(-2.0).unwrap(), Points::whole(-2));
        assert!(Credits::from_f64(8.3).is_err());
    }

    #[test]
    fn scale_is_exact_for_half_grid() {
        let base = Points::from_half_step(71.5).unwrap();
        let m = Multiplier::from_f64(1.5).unwrap();
        assert_eq!(base.scale(m).to_f64(), 107.25);
        assert_eq!(base.scale(Multiplier::ONE), base);
    }
}
