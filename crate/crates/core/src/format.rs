//! Numeric formatting shared by every text output.

/// 12 significant digits in scientific notation; empty for non-finite values.
pub fn sig(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        String::new()
    }
}
