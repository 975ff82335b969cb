//! Locale-independent number rendering for CSV/JSON output.

/// Significant digits of every emitted real.
pub const SIG_DIGITS: usize = 12;

/// Renders `x` with 12 significant digits, ties rounded half to even.
///
/// Magnitudes in `[1e-6, 1e12)` are written positionally (`0.820761998546`),
/// everything else in exponent form (`1.23456789012e-9`).
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("0.{}", "0".repeat(SIG_DIGITS - 1));
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    if !(-6..12).contains(&exp) {
        return sci;
    }
    let mut out = String::with_capacity(SIG_DIGITS + 8);
    if negative {
        out.push('-');
    }
    if exp >= 0 {
        let split = exp as usize + 1;
        out.push_str(&digits[..split]);
        if split < digits.len() {
            out.push('.');
            out.push_str(&digits[split..]);
        }
    } else {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(&digits);
    }
    out
}
