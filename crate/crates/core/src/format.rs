//! Locale-independent decimal rendering with a fixed number of significant
//! digits. Used for every numeric cell the toolkit writes.

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Render `x` in plain decimal notation (never exponent form) rounded to
/// nine significant digits. Negative zero prints as zero.
pub fn fmt_num(x: f64) -> String {
    fmt_sig(x, SIGNIFICANT_DIGITS)
}

pub fn fmt_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if digits == 1 {
            "0".into()
        } else {
            format!("0.{}", "0".repeat(digits - 1))
        };
    }
    // Rust's exponent formatting rounds correctly and never consults a locale.
    let sci = format!("{:.*e}", digits - 1, x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mantissa: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();

    let point = exp + 1; // digits before the decimal point
    let mut out = String::with_capacity(digits + 8);
    if x < 0.0 {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.push_str(&"0".repeat((-point) as usize));
        out.push_str(&mantissa);
    } else if point as usize >= mantissa.len() {
        out.push_str(&mantissa);
        out.push_str(&"0".repeat(point as usize - mantissa.len()));
    } else {
        let (int, frac) = mantissa.split_at(point as usize);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}
