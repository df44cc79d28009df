//! Bitstring helpers.
//!
//! Outcome indices are big-endian: qubit 0 is the leftmost character of the
//! bitstring and the most significant bit of the index.

use crate::error::{Error, Result};

/// Parity of the bitwise AND of `a` and `b`, i.e. the exponent of
/// `(-1)^{a·b}`.
#[inline]
pub fn dot_parity(a: usize, b: usize) -> u32 {
    (a & b).count_ones() & 1
}

/// Renders `index` as a `width`-character bitstring.
pub fn to_bitstring(index: usize, width: usize) -> String {
    (0..width)
        .map(|q| if (index >> (width - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Parses a `width`-character bitstring into an index.
pub fn parse_bitstring(s: &str, width: usize) -> Result<usize> {
    if s.len() != width {
        return Err(Error::Parse(format!(
            "bitstring {s:?} has length {}, expected {width}",
            s.len()
        )));
    }
    s.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Parse(format!("bitstring {s:?} contains {c:?}"))),
    })
}

/// Index mask of the bit that carries qubit `q` in a `width`-qubit register.
#[inline]
pub fn qubit_mask(q: usize, width: usize) -> usize {
    1 << (width - 1 - q)
}

/// Formats `x` with 17 significant digits in positional notation, which is
/// enough for the text to parse back to the identical `f64`.
pub fn fmt_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0.0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-20..=20).contains(&exp) {
        return sci;
    }
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        if split >= digits.len() {
            format!("{}{}.0", digits, "0".repeat(split - digits.len()))
        } else {
            format!("{}.{}", &digits[..split], &digits[split..])
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    format!("{sign}{body}")
}
