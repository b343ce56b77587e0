//! Decimal formatting shared by every CSV writer.
//!
//! Values are written as the shortest decimal string that parses back to the
//! identical `f64`, so a write/read cycle is lossless. Magnitudes outside
//! `[1e-7, 1e16)` use scientific notation. Non-finite values are written as
//! `inf`, `-inf` and `NaN`, which `str::parse::<f64>` accepts.

/// Formats `x` as its shortest round-trip decimal representation.
pub fn format_decimal(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let magnitude = x.abs();
    if (1e-7..1e16).contains(&magnitude) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
