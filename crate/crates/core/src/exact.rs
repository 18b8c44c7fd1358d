//! Exact rational scalars for the combinatorial phase.
//!
//! Every target sum, ratio and flow value that drives a combinatorial
//! decision is a [`Ratio`]; comparisons are exact. Floating point only
//! appears in the iterative scaling loop.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational.
pub type Ratio = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatioError {
    #[error("empty number")]
    Empty,
    #[error("invalid number `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses decimal text (`"0.25"`, `"-3"`, `"1.5e-3"`) or a fraction
/// (`"17/11"`) into an exact rational. No float round-trip is involved.
pub fn parse_ratio(text: &str) -> Result<Ratio, ParseRatioError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRatioError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(|| ParseRatioError::Invalid(s.into()))?;
        let den = parse_decimal(den.trim()).ok_or_else(|| ParseRatioError::Invalid(s.into()))?;
        if den.is_zero() {
            return Err(ParseRatioError::ZeroDenominator(s.into()));
        }
        return Ok(num / den);
    }
    parse_decimal(s).ok_or_else(|| ParseRatioError::Invalid(s.into()))
}

fn parse_decimal(s: &str) -> Option<Ratio> {
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Ratio::from_integer(digits.parse::<BigInt>().ok()?);
    let shift = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    let ten = BigInt::from(10u32);
    let power = num_traits::pow(ten, shift.unsigned_abs() as usize);
    if shift >= 0 {
        value *= Ratio::from_integer(power);
    } else {
        value /= Ratio::from_integer(power);
    }
    Some(if negative { -value } else { value })
}

/// Exact rational value of a finite `f64` (every finite double is a dyadic rational).
pub fn ratio_from_f64(x: f64) -> Option<Ratio> {
    Ratio::from_float(x)
}

pub fn to_f64(x: &Ratio) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(num: i64, den: i64) -> Ratio {
    Ratio::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Ratio {
    Ratio::from_integer(BigInt::from(n))
}

/// Renders `p/q`, or just `p` when the value is an integer.
pub fn fraction_string(x: &Ratio) -> String {
    x.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MediantError {
    #[error("mediant bounds need at least one ratio")]
    EmptyInput,
    #[error("mediant bounds need equally long inputs ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("entry {0} is not strictly positive")]
    NonPositive(usize),
}

/// Extreme component ratios of a family `p_i / q_i` together with the
/// combined ratio `Σp / Σq`, which always lies in `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediantBounds {
    pub lo: Ratio,
    pub hi: Ratio,
    pub combined: Ratio,
    /// Set iff the combined ratio touches `lo` or `hi`, in which case every
    /// component ratio is equal to it.
    pub all_equal: bool,
}

pub fn mediant_bounds(p: &[Ratio], q: &[Ratio]) -> Result<MediantBounds, MediantError> {
    if p.len() != q.len() {
        return Err(MediantError::LengthMismatch(p.len(), q.len()));
    }
    if p.is_empty() {
        return Err(MediantError::EmptyInput);
    }
    for (k, (a, b)) in p.iter().zip(q).enumerate() {
        if !a.is_positive() || !b.is_positive() {
            return Err(MediantError::NonPositive(k));
        }
    }
    let mut lo = &p[0] / &q[0];
    let mut hi = lo.clone();
    let mut sum_p = Ratio::zero();
    let mut sum_q = Ratio::zero();
    for (a, b) in p.iter().zip(q) {
        let r = a / b;
        if r < lo {
            lo = r.clone();
        }
        if r > hi {
            hi = r;
        }
        sum_p += a;
        sum_q += b;
    }
    let combined = sum_p / sum_q;
    let all_equal = combined == lo || combined == hi;
    debug_assert!(!all_equal || lo == hi);
    Ok(MediantBounds { lo, hi, combined, all_equal })
}

pub(crate) fn sum<'a>(values: impl IntoIterator<Item = &'a Ratio>) -> Ratio {
    values.into_iter().fold(Ratio::zero(), |acc, v| acc + v)
}

pub(crate) fn one() -> Ratio {
    Ratio::one()
}
