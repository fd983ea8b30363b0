use std::fmt;
use std::str::FromStr;

/// A DS value held in its textual form so that it re-encodes byte for byte.
///
/// Always at most 16 characters and parseable as a finite decimal number.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecimalString(String);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecimalError {
    #[error("{0:?} is not a decimal string")]
    Syntax(String),
    #[error("{0:?} exceeds 16 characters")]
    TooLong(String),
    #[error("value {0} is not finite")]
    NotFinite(f64),
}

impl DecimalString {
    pub const MAX_LEN: usize = 16;

    pub fn new(text: &str) -> Result<Self, DecimalError> {
        let text = text.trim_matches(' ');
        if text.len() > Self::MAX_LEN {
            return Err(DecimalError::TooLong(text.to_string()));
        }
        if !is_decimal_syntax(text) {
            return Err(DecimalError::Syntax(text.to_string()));
        }
        Ok(DecimalString(text.to_string()))
    }

    /// Shortest rendering of `value` that fits in 16 characters.
    pub fn from_f64(value: f64) -> Result<Self, DecimalError> {
        if !value.is_finite() {
            return Err(DecimalError::NotFinite(value));
        }
        let plain = format!("{value}");
        if plain.len() <= Self::MAX_LEN {
            return Ok(DecimalString(plain));
        }
        // Scientific notation with shrinking mantissa precision.
        for precision in (0..=15).rev() {
            let sci = format!("{value:.precision$e}");
            if sci.len() <= Self::MAX_LEN {
                return Ok(DecimalString(sci));
            }
        }
        Err(DecimalError::TooLong(plain))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        // The syntax check guarantees this succeeds.
        self.0.parse().unwrap_or(f64::NAN)
    }
}

fn is_decimal_syntax(s: &str) -> bool {
    let bytes = s.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == bytes.len()
}

impl fmt::Display for DecimalString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for DecimalString {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DecimalString::new(s)
    }
}

impl TryFrom<f64> for DecimalString {
    type Error = DecimalError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        DecimalString::from_f64(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn accepts_common_forms() {
        for s in ["7.5", "-1", "+0.25", "1e3", "1.5E-07", ".5", "5."] {
            assert!(DecimalString::new(s).is_ok(), "{s}");
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", ".", "e5", "1.2.3", "abc", "1e", "NaN"] {
            assert!(DecimalString::new(s).is_err(), "{s}");
        }
        assert!(matches!(
            DecimalString::new("12345678901234567"),
            Err(DecimalError::TooLong(_))
        ));
    }

    #[test]
    fn long_floats_are_shortened() {
        let d = DecimalString::from_f64(std::f64::consts::PI * 1e-7).unwrap();
        assert!(d.as_str().len() <= 16);
        assert!((d.to_f64() - std::f64::consts::PI * 1e-7).abs() < 1e-17);
        assert!(DecimalString::from_f64(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn from_f64_always_fits(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let d = DecimalString::from_f64(v).unwrap();
            prop_assert!(d.as_str().len() <= 16);
            let back = d.to_f64();
            prop_assert!((back - v).abs() <= v.abs() * 1e-8);
        }
    }
}
