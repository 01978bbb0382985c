//! Standard normal kernel: CDF, upper tail and quantile.
//!
//! Everything is plain `f64`. The CDF is returned as `1 - tail(x)` for
//! positive arguments, so it rounds to exactly `1.0` once the tail drops
//! below half an ulp of one (`x >~ 8.29`). The revised t-test relies on
//! that rounding, and [`tail`] is the cancellation-free complement used to
//! observe it.

use core::cmp::Ordering;
use core::f64::consts::FRAC_1_SQRT_2;
use core::fmt;
use core::ops::Neg;

use crate::error::{Error, Result};

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const ONE: Probability = Probability(1.0);
    pub const HALF: Probability = Probability(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::ProbabilityOutOfRange(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - p`, rounded like any other double subtraction.
    #[inline]
    pub fn complement(self) -> Probability {
        Probability(1.0 - self.0)
    }
}

impl TryFrom<f64> for Probability {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Probability::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// A real number extended by `-inf` / `+inf` sentinels. Never NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    /// Maps `f64` infinities onto the sentinels; NaN is rejected.
    pub fn from_f64(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::NonFinite(x))
        } else if x == f64::INFINITY {
            Ok(ExtendedReal::PosInfinity)
        } else if x == f64::NEG_INFINITY {
            Ok(ExtendedReal::NegInfinity)
        } else {
            Ok(ExtendedReal::Finite(x))
        }
    }

    /// The IEEE representation (`±inf` for the sentinels).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::NegInfinity => f64::NEG_INFINITY,
            ExtendedReal::Finite(x) => x,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// Scales by a finite, strictly positive factor. Sentinels are preserved.
    pub fn scale(self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter {
                name: "factor",
                value: factor,
                reason: "must be finite and positive",
            });
        }
        Ok(match self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(x * factor),
            s => s,
        })
    }

    /// `x <= self` under extended-real ordering.
    pub fn ge_f64(self, x: f64) -> bool {
        self.partial_cmp(&ExtendedReal::Finite(x))
            .is_some_and(|o| o != Ordering::Less)
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        use ExtendedReal::*;
        match (self, other) {
            (NegInfinity, NegInfinity) | (PosInfinity, PosInfinity) => Some(Ordering::Equal),
            (NegInfinity, _) | (_, PosInfinity) => Some(Ordering::Less),
            (PosInfinity, _) | (_, NegInfinity) => Some(Ordering::Greater),
            (Finite(a), Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl Neg for ExtendedReal {
    type Output = ExtendedReal;

    fn neg(self) -> ExtendedReal {
        match self {
            ExtendedReal::NegInfinity => ExtendedReal::PosInfinity,
            ExtendedReal::Finite(x) => ExtendedReal::Finite(-x),
            ExtendedReal::PosInfinity => ExtendedReal::NegInfinity,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::NegInfinity => f.write_str("-inf"),
            ExtendedReal::Finite(x) => fmt::Display::fmt(x, f),
            ExtendedReal::PosInfinity => f.write_str("+inf"),
        }
    }
}

// Finite values serialize as numbers, sentinels as the strings "+inf" / "-inf"
// so the JSON stays standard.
#[cfg(feature = "serde")]
mod extended_serde {
    use super::ExtendedReal;
    use core::fmt;
    use serde::de::{self, Visitor};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    impl Serialize for ExtendedReal {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            match self {
                ExtendedReal::NegInfinity => s.serialize_str("-inf"),
                ExtendedReal::Finite(x) => s.serialize_f64(*x),
                ExtendedReal::PosInfinity => s.serialize_str("+inf"),
            }
        }
    }

    struct ExtendedVisitor;

    impl Visitor<'_> for ExtendedVisitor {
        type Value = ExtendedReal;

        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a finite number, \"+inf\" or \"-inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtendedReal, E> {
            ExtendedReal::from_f64(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtendedReal, E> {
            Ok(ExtendedReal::Finite(v as f64))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtendedReal, E> {
            Ok(ExtendedReal::Finite(v as f64))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtendedReal, E> {
            match v {
                "+inf" | "inf" => Ok(ExtendedReal::PosInfinity),
                "-inf" => Ok(ExtendedReal::NegInfinity),
                other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
            }
        }
    }

    impl<'de> Deserialize<'de> for ExtendedReal {
        fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
            d.deserialize_any(ExtendedVisitor)
        }
    }
}

/// Upper tail `1 - Φ(x)` without cancellation.
///
/// Relative error stays below `1e-10` for `x <= 37`.
pub fn tail(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(Probability(tail_f64(x)))
}

/// `Φ(x)`. For `x > 0` this is `1 - tail(x)` in double precision and rounds
/// to exactly `1.0` deep in the upper tail.
pub fn cdf(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(Probability(cdf_f64(x)))
}

/// The quantile `z_p`, with `quantile(0) = -inf` and `quantile(1) = +inf`.
///
/// The smaller tail is evaluated and negated, so `quantile(1 - p)` is
/// exactly `-quantile(p)` whenever `1 - p` is representable.
pub fn quantile(p: Probability) -> ExtendedReal {
    let z = quantile_f64(p.0);
    if z == f64::INFINITY {
        ExtendedReal::PosInfinity
    } else if z == f64::NEG_INFINITY {
        ExtendedReal::NegInfinity
    } else {
        ExtendedReal::Finite(z)
    }
}

/// Density of the standard normal.
pub fn pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * libm::exp(-0.5 * x * x)
}

pub(crate) fn tail_f64(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x == f64::NEG_INFINITY {
        return 1.0;
    }
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

pub(crate) fn cdf_f64(x: f64) -> f64 {
    if x > 0.0 {
        1.0 - tail_f64(x)
    } else {
        tail_f64(-x)
    }
}

/// Quantile for a double already known to lie in `[0, 1]`.
pub(crate) fn quantile_f64(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    if p > 0.5 {
        // 1 - p is exact on [0.5, 1].
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    }
}

/// `z_{1-p}` for `p` in `(0, 1)`, evaluated as `-z_p` without forming `1 - p`.
pub(crate) fn upper_quantile(p: f64) -> f64 {
    -quantile_f64(p)
}

// Wichura's AS 241 (PPND16), relative accuracy about 1e-16. Coefficients as published.
#[allow(clippy::excessive_precision)]
const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
#[allow(clippy::excessive_precision)]
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
#[allow(clippy::excessive_precision)]
const MID_NUM: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
#[allow(clippy::excessive_precision)]
const MID_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
#[allow(clippy::excessive_precision)]
const FAR_NUM: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
#[allow(clippy::excessive_precision)]
const FAR_DEN: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn horner(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Quantile for `p` in `[0, 0.5]`.
fn lower_quantile(p: f64) -> f64 {
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * horner(&CENTRAL_NUM, r) / horner(&CENTRAL_DEN, r);
    }
    let r = libm::sqrt(-libm::log(p));
    let z = if r <= 5.0 {
        let r = r - 1.6;
        horner(&MID_NUM, r) / horner(&MID_DEN, r)
    } else {
        let r = r - 5.0;
        horner(&FAR_NUM, r) / horner(&FAR_DEN, r)
    };
    -z
}
