//! Shared text-format helpers.
//!
//! All numeric artifacts (flight files, model files, reports) write floats
//! with 17 significant decimal digits so that reloading reproduces every
//! `f64` bit-exactly.

/// Format a float with 17 significant digits (round-trip exact for `f64`).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parse a float written by [`fmt_f64`] (or any ordinary decimal).
pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| !v.is_nan())
}
