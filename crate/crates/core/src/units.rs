//! The canonical unit set `I(n)`: products `i1^a1 · i2^a2 ··· in^an` with
//! every exponent in `{0, 1}`.
//!
//! A unit is stored as a bitmask whose bit `k` is the exponent of `i_{k+1}`.
//! Because all generators commute and square to `-1`, the product of two
//! units is `(-1)^popcount(a & b) · u_{a ^ b}`.

use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported order. Unit masks must fit the `u8` fields of the
/// voxel file format.
pub const MAX_ORDER: u32 = 8;

pub(crate) fn check_order(n: u32, min: u32) -> Result<()> {
    if n < min || n > MAX_ORDER {
        return Err(Error::OrderOutOfRange(
            n,
            match min {
                0 => "0..=8",
                1 => "1..=8",
                2 => "2..=8",
                _ => "3..=8",
            },
        ));
    }
    Ok(())
}

/// A sign in `{+1, -1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_parity(self != rhs)
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Whether a unit is `1`, squares to `-1`, or squares to `+1` without being `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnitNature {
    Real,
    Imaginary,
    Hyperbolic,
}

/// An element of `I(n)`, encoded as an exponent bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UnitMask(pub u32);

impl UnitMask {
    pub const ONE: UnitMask = UnitMask(0);
    pub const I1: UnitMask = UnitMask(0b001);
    pub const I2: UnitMask = UnitMask(0b010);
    pub const I3: UnitMask = UnitMask(0b100);
    /// `i4 := i1 i2 i3`, the tricomplex naming (not the fourth generator).
    pub const I4: UnitMask = UnitMask(0b111);
    pub const J1: UnitMask = UnitMask(0b011);
    pub const J2: UnitMask = UnitMask(0b101);
    pub const J3: UnitMask = UnitMask(0b110);

    /// Validated constructor for a unit of `I(order)`.
    pub fn new(mask: u32, order: u32) -> Result<Self> {
        check_order(order, 0)?;
        if mask >= 1 << order {
            return Err(Error::InvalidMask { mask, order });
        }
        Ok(UnitMask(mask))
    }

    /// The generator `i_k` (1-based).
    pub fn generator(k: u32) -> Self {
        assert!((1..=MAX_ORDER).contains(&k), "generator index out of range");
        UnitMask(1 << (k - 1))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Smallest order whose unit set contains this unit.
    pub fn min_order(self) -> u32 {
        32 - self.0.leading_zeros()
    }

    pub fn is_valid_for(self, order: u32) -> bool {
        order <= MAX_ORDER && self.0 < (1 << order)
    }

    pub fn nature(self) -> UnitNature {
        unit_nature(self)
    }

    pub fn square_sign(self) -> Sign {
        unit_square_sign(self)
    }

    pub fn times(self, other: UnitMask) -> SignedUnit {
        unit_product(self, other)
    }
}

/// Tricomplex names where they exist, the mask integer otherwise.
impl fmt::Display for UnitMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            UnitMask::ONE => f.write_str("1"),
            UnitMask::I1 => f.write_str("i1"),
            UnitMask::I2 => f.write_str("i2"),
            UnitMask::I3 => f.write_str("i3"),
            UnitMask::I4 => f.write_str("i4"),
            UnitMask::J1 => f.write_str("j1"),
            UnitMask::J2 => f.write_str("j2"),
            UnitMask::J3 => f.write_str("j3"),
            UnitMask(m) => write!(f, "{m}"),
        }
    }
}

/// Accepts `1`, `i1`..`i4`, `j1`..`j3` (case-insensitive) or a mask integer.
/// A bare `1` is the real unit, so mask 1 must be written `i1`.
impl FromStr for UnitMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let named = match t.as_str() {
            "1" => Some(UnitMask::ONE),
            "i1" => Some(UnitMask::I1),
            "i2" => Some(UnitMask::I2),
            "i3" => Some(UnitMask::I3),
            "i4" => Some(UnitMask::I4),
            "j1" => Some(UnitMask::J1),
            "j2" => Some(UnitMask::J2),
            "j3" => Some(UnitMask::J3),
            _ => None,
        };
        if let Some(u) = named {
            return Ok(u);
        }
        match t.parse::<u32>() {
            Ok(m) if m < (1 << MAX_ORDER) => Ok(UnitMask(m)),
            _ => Err(Error::UnitName(s.to_string())),
        }
    }
}

/// A unit together with a sign, i.e. an element of `±I(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedUnit {
    pub sign: Sign,
    pub mask: UnitMask,
}

impl SignedUnit {
    pub fn new(sign: Sign, mask: UnitMask) -> Self {
        SignedUnit { sign, mask }
    }

    pub fn positive(mask: UnitMask) -> Self {
        SignedUnit::new(Sign::Plus, mask)
    }
}

impl Mul for SignedUnit {
    type Output = SignedUnit;

    fn mul(self, rhs: SignedUnit) -> SignedUnit {
        let p = unit_product(self.mask, rhs.mask);
        SignedUnit::new(self.sign * rhs.sign * p.sign, p.mask)
    }
}

impl Neg for SignedUnit {
    type Output = SignedUnit;

    fn neg(self) -> SignedUnit {
        SignedUnit::new(-self.sign, self.mask)
    }
}

impl fmt::Display for SignedUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign, self.mask)
    }
}

/// `u_a · u_b = (-1)^popcount(a & b) · u_{a ^ b}`.
pub fn unit_product(a: UnitMask, b: UnitMask) -> SignedUnit {
    SignedUnit::new(
        Sign::from_parity((a.0 & b.0).count_ones() % 2 == 1),
        UnitMask(a.0 ^ b.0),
    )
}

pub fn unit_square_sign(a: UnitMask) -> Sign {
    Sign::from_parity(a.0.count_ones() % 2 == 1)
}

pub fn unit_nature(a: UnitMask) -> UnitNature {
    if a.0 == 0 {
        UnitNature::Real
    } else if a.0.count_ones() % 2 == 1 {
        UnitNature::Imaginary
    } else {
        UnitNature::Hyperbolic
    }
}

/// All `2^n` units of `I(n)` in ascending mask order.
pub fn enumerate_units(n: u32) -> Result<Vec<UnitMask>> {
    check_order(n, 1)?;
    Ok((0..1u32 << n).map(UnitMask).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_examples() {
        assert_eq!(
            unit_product(UnitMask::I1, UnitMask::I2),
            SignedUnit::positive(UnitMask::J1)
        );
        assert_eq!(
            unit_product(UnitMask::I1, UnitMask::I1),
            SignedUnit::new(Sign::Minus, UnitMask::ONE)
        );
        assert_eq!(
            unit_product(UnitMask::J1, UnitMask::J1),
            SignedUnit::positive(UnitMask::ONE)
        );
        for m in 0..16 {
            assert_eq!(
                unit_product(UnitMask::ONE, UnitMask(m)),
                SignedUnit::positive(UnitMask(m))
            );
        }
    }

    #[test]
    fn squares() {
        assert_eq!(unit_square_sign(UnitMask::I1), Sign::Minus);
        assert_eq!(unit_square_sign(UnitMask::J1), Sign::Plus);
        // i4 = i1 i2 i3, reduced pairwise by hand
        let i4 = unit_product(unit_product(UnitMask::I1, UnitMask::I2).mask, UnitMask::I3);
        assert_eq!(i4, SignedUnit::positive(UnitMask::I4));
        assert_eq!(unit_product(UnitMask::I4, UnitMask::I4).sign, Sign::Minus);
        assert_eq!(unit_square_sign(UnitMask::I4), Sign::Minus);
    }

    #[test]
    fn natures() {
        assert_eq!(unit_nature(UnitMask::ONE), UnitNature::Real);
        assert_eq!(unit_nature(UnitMask::I3), UnitNature::Imaginary);
        assert_eq!(unit_nature(UnitMask::J3), UnitNature::Hyperbolic);
        let units = enumerate_units(3).unwrap();
        let count = |k| units.iter().filter(|u| u.nature() == k).count();
        assert_eq!(count(UnitNature::Imaginary), 4);
        assert_eq!(count(UnitNature::Hyperbolic), 3);
        assert_eq!(count(UnitNature::Real), 1);
    }

    #[test]
    fn enumerate() {
        assert_eq!(
            enumerate_units(2).unwrap(),
            vec![UnitMask::ONE, UnitMask::I1, UnitMask::I2, UnitMask::J1]
        );
        assert_eq!(enumerate_units(3).unwrap().len(), 8);
        assert_eq!(enumerate_units(1).unwrap(), vec![UnitMask::ONE, UnitMask::I1]);
        assert!(enumerate_units(0).is_err());
        assert!(enumerate_units(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn exhaustive_algebra_up_to_order_5() {
        let units = enumerate_units(5).unwrap();
        for &a in &units {
            assert_eq!(unit_square_sign(a), unit_product(a, a).sign);
            for &b in &units {
                let ab = unit_product(a, b);
                assert_eq!(ab, unit_product(b, a));
                assert_eq!(ab.mask.0, a.0 ^ b.0);
                for &c in &units {
                    let left = ab * SignedUnit::positive(c);
                    let right = SignedUnit::positive(a) * unit_product(b, c);
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn counts_closed_forms() {
        for n in 1..=6u32 {
            let units = enumerate_units(n).unwrap();
            let count = |k| units.iter().filter(|u| u.nature() == k).count();
            assert_eq!(count(UnitNature::Imaginary), 1 << (n - 1));
            assert_eq!(count(UnitNature::Hyperbolic), (1 << (n - 1)) - 1);
            assert_eq!(count(UnitNature::Real), 1);
        }
    }

    #[test]
    fn names_round_trip() {
        for m in 0..16u32 {
            let u = UnitMask(m);
            assert_eq!(u.to_string().parse::<UnitMask>().unwrap(), u);
        }
        assert_eq!("I4".parse::<UnitMask>().unwrap(), UnitMask(7));
        assert_eq!("5".parse::<UnitMask>().unwrap().to_string(), "j2");
        assert!("k1".parse::<UnitMask>().is_err());
        assert!("i5".parse::<UnitMask>().is_err());
        assert!("256".parse::<UnitMask>().is_err());
    }

    #[test]
    fn validated_constructor() {
        assert!(UnitMask::new(7, 3).is_ok());
        assert!(UnitMask::new(8, 3).is_err());
        assert_eq!(UnitMask::generator(4), UnitMask(8));
        assert_eq!(UnitMask(9).min_order(), 4);
        assert_eq!(UnitMask::ONE.min_order(), 0);
    }
}
