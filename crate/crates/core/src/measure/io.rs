//! Plain-text measure files: a header line `n=<dim> count=<N> h=<resolution>`
//! followed by one atom per line, `x_1 ... x_n w`, all floats in C99 hex
//! notation so that a write/read round trip is bit exact.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::DiscreteMeasure;

/// Shortest C99 hex-float spelling of `x` (`0x1.8p+1` for 3).
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 { (0, -1022) } else { (1, exp_bits - 1023) };
    let digits = format!("{mant:013x}");
    let digits = digits.trim_end_matches('0');
    if digits.is_empty() {
        format!("{sign}0x{lead}p{exp:+}")
    } else {
        format!("{sign}0x{lead}.{digits}p{exp:+}")
    }
}

/// `x * 2^e` without intermediate overflow or underflow.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        x *= f64::from_bits(((1023 + step) as u64) << 52);
        e -= step;
    }
    x
}

fn bad(s: &str) -> Error {
    Error::Format(format!("not a float: {s:?}"))
}

/// Parse a hex float (`[-]0x<hex>[.<hex>]p<dec>`) or, failing that, a
/// decimal float. Hex input with more than 53 significant bits is rounded.
pub fn parse_hex(s: &str) -> Result<f64> {
    let t = s.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) else {
        return t.parse::<f64>().map_err(|_| bad(s));
    };
    let (mantissa, exp) = match hex.find(['p', 'P']) {
        Some(i) => (&hex[..i], hex[i + 1..].parse::<i64>().map_err(|_| bad(s))?),
        None => (hex, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad(s));
    }
    let mut acc: u64 = 0;
    let mut shift: i64 = 0;
    let mut sticky = false;
    for (i, c) in int_part.chars().chain(frac_part.chars()).enumerate() {
        let d = c.to_digit(16).ok_or_else(|| bad(s))? as u64;
        let is_frac = i >= int_part.len();
        if acc >> 56 == 0 {
            acc = (acc << 4) | d;
            if is_frac {
                shift -= 4;
            }
        } else {
            sticky |= d != 0;
            if !is_frac {
                shift += 4;
            }
        }
    }
    if sticky {
        acc |= 1;
    }
    let v = ldexp(acc as f64, shift + exp);
    Ok(if neg { -v } else { v })
}

pub fn write_text<W: Write>(mu: &DiscreteMeasure, mut out: W) -> Result<()> {
    writeln!(
        out,
        "n={} count={} h={}",
        mu.dim(),
        mu.len(),
        format_hex(mu.resolution())
    )?;
    let mut line = String::new();
    for (p, w) in mu.positions().zip(mu.weights()) {
        line.clear();
        for x in p {
            line.push_str(&format_hex(*x));
            line.push(' ');
        }
        line.push_str(&format_hex(*w));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_text<R: BufRead>(input: R) -> Result<DiscreteMeasure> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty measure file".into()))??;
    let (mut dim, mut count, mut h) = (None, None, None);
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field {field:?}")))?;
        match k {
            "n" => dim = v.parse::<usize>().ok(),
            "count" => count = v.parse::<usize>().ok(),
            "h" => h = Some(parse_hex(v)?),
            _ => return Err(Error::Format(format!("unknown header key {k:?}"))),
        }
    }
    let (Some(dim), Some(count), Some(h)) = (dim, count, h) else {
        return Err(Error::Format("header needs n, count and h".into()));
    };
    let mut coords = Vec::with_capacity(count * dim);
    let mut weights = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line.split_whitespace().map(parse_hex).collect::<Result<_>>()?;
        if vals.len() != dim + 1 {
            return Err(Error::Format(format!(
                "atom line has {} fields, expected {}",
                vals.len(),
                dim + 1
            )));
        }
        coords.extend_from_slice(&vals[..dim]);
        weights.push(vals[dim]);
    }
    if weights.len() != count {
        return Err(Error::Format(format!(
            "header announces {count} atoms, file has {}",
            weights.len()
        )));
    }
    DiscreteMeasure::new(dim, coords, weights, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_spellings() {
        assert_eq!(format_hex(1.0), "0x1p+0");
        assert_eq!(format_hex(3.0), "0x1.8p+1");
        assert_eq!(format_hex(0.1), "0x1.999999999999ap-4");
        assert_eq!(format_hex(-0.0), "-0x0p+0");
        assert_eq!(format_hex(f64::MIN_POSITIVE / 4.0), "0x0.4p-1022");
        assert_eq!(parse_hex("0x1.8p+1").unwrap(), 3.0);
        assert_eq!(parse_hex("0x.8p0").unwrap(), 0.5);
        assert_eq!(parse_hex("0x10").unwrap(), 16.0);
        assert_eq!(parse_hex("2.5").unwrap(), 2.5);
        assert!(parse_hex("0xg").is_err());
        assert!(parse_hex("0xp1").is_err());
    }

    #[test]
    fn measure_round_trip() {
        let mu = crate::measure::build(&crate::measure::MeasureSpec::CantorFourCorners {
            generation: 3,
        })
        .unwrap();
        let mut buf = Vec::new();
        write_text(&mu, &mut buf).unwrap();
        let back = read_text(&buf[..]).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn count_mismatch_is_an_error() {
        let text = "n=2 count=2 h=0x1p-2\n0x1p-1 0x0p+0 0x1p+0\n";
        assert!(read_text(text.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn hex_round_trip_is_bit_exact(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let y = parse_hex(&format_hex(x)).unwrap();
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
