//! Exact hexadecimal float text, C99 `%a` style with a fixed 13-digit mantissa.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed hex float `{0}`")]
pub struct ParseHexError(pub String);

/// `0x1.8000000000000p+1` for 3.0; `inf`, `-inf`, `nan` for the specials.
pub fn format(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let sign = if v.is_sign_negative() { "-" } else { "" };
    if v.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = v.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = bits & ((1u64 << 52) - 1);
    match (exp, mant) {
        (0, 0) => format!("{sign}0x0.0000000000000p+0"),
        (0, m) => format!("{sign}0x0.{m:013x}p-1022"),
        (e, m) => format!("{sign}0x1.{m:013x}p{:+}", e - 1023),
    }
}

/// Inverse of [`format`]; accepts any mantissa length up to 13 digits.
pub fn parse(s: &str) -> Result<f64, ParseHexError> {
    let bad = || ParseHexError(s.to_string());
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let signed = |x: f64| if neg { -x } else { x };
    match body {
        "inf" => return Ok(signed(f64::INFINITY)),
        "nan" if !neg => return Ok(f64::NAN),
        _ => {}
    }
    let body = body.strip_prefix("0x").ok_or_else(bad)?;
    let (mantissa, exp) = body.split_once('p').ok_or_else(bad)?;
    let exp: i32 = exp.parse().map_err(|_| bad())?;
    let (lead, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.len() > 13 || !frac.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(bad());
    }
    let frac_bits = if frac.is_empty() { 0 } else { u64::from_str_radix(frac, 16).map_err(|_| bad())? << (4 * (13 - frac.len())) };
    let bits = match lead {
        "1" => {
            let biased = exp + 1023;
            if !(1..=2046).contains(&biased) {
                return Err(bad());
            }
            ((biased as u64) << 52) | frac_bits
        }
        "0" => {
            if frac_bits != 0 && exp != -1022 {
                return Err(bad());
            }
            frac_bits
        }
        _ => return Err(bad()),
    };
    Ok(signed(f64::from_bits(bits)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(format(3.0), "0x1.8000000000000p+1");
        assert_eq!(format(1.0), "0x1.0000000000000p+0");
        assert_eq!(format(-0.5), "-0x1.0000000000000p-1");
        assert_eq!(format(0.0), "0x0.0000000000000p+0");
        assert_eq!(format(-0.0), "-0x0.0000000000000p+0");
        assert_eq!(format(f64::from_bits(1)), "0x0.0000000000001p-1022");
        assert_eq!(format(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn round_trip_edges() {
        for v in [0.1, -1e-310, f64::MAX, f64::MIN_POSITIVE, 1.0 / 3.0, -0.0, f64::INFINITY] {
            let back = parse(&format(v)).unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
        assert!(parse("nan").unwrap().is_nan());
        assert_eq!(parse("0x1.8p+1").unwrap(), 3.0);
        assert!(parse("0x2.0p+0").is_err());
        assert!(parse("1.5").is_err());
    }
}
