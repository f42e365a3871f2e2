//! Stable decimal rendering for reports and golden files.

/// Rounds `x` to `digits` significant digits and prints the shortest decimal
/// that round-trips that value. Magnitudes below 1e-6 or from 1e15 up use
/// exponent notation. Negative zero prints as `0`.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("scientific notation parses");
    let magnitude = rounded.abs();
    if rounded == 0.0 {
        "0".to_string()
    } else if !(1e-6..1e15).contains(&magnitude) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

/// [`format_sig`] with 12 significant digits.
pub fn sig12(x: f64) -> String {
    format_sig(x, 12)
}

/// `x` rounded to 12 significant digits, for structured output.
pub fn round12(x: f64) -> f64 {
    sig12(x).parse().unwrap_or(x)
}
