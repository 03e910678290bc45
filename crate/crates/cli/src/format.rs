//! Locale-independent number formatting for CSV and reports.

/// `v` rounded to 10 significant digits, printed in the shortest form that
/// round-trips that rounded value. Magnitudes below `1e-6` use exponent form.
pub fn sig10(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.9e}").parse().expect("scientific literal parses");
    if rounded.abs() < 1e-6 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(1.4352809395601036), "1.43528094");
        assert_eq!(sig10(2.0), "2");
        assert_eq!(sig10(-0.0), "0");
        assert_eq!(sig10(3.169925001442312), "3.169925001");
        assert_eq!(sig10(1.234e-7), "1.234e-7");
        assert_eq!(sig10(8.881784197001252e-16), "8.881784197e-16");
        assert_eq!(sig10(0.00125), "0.00125");
        assert_eq!(sig10(f64::INFINITY), "inf");
    }
}
