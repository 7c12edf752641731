//! Exact rendering of ratios as fixed-point decimal strings.

/// Renders `100 * num / den` with `decimals` digits, rounding half away from
/// zero. Works on integers throughout, so the printed digits never depend on
/// binary floating-point.
pub fn percent(num: i128, den: i128, decimals: u32) -> String {
    ratio(num * 100, den, decimals)
}

/// Renders `num / den` with `decimals` digits, rounding half away from zero.
pub fn ratio(num: i128, den: i128, decimals: u32) -> String {
    assert!(den != 0, "denominator must be non-zero");
    let negative = (num < 0) != (den < 0) && num != 0;
    let (num, den) = (num.abs(), den.abs());
    let scale = 10i128.pow(decimals);
    let scaled = (2 * num * scale + den) / (2 * den);
    let whole = scaled / scale;
    let frac = scaled % scale;
    let sign = if negative && scaled != 0 { "-" } else { "" };
    if decimals == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{frac:0width$}", width = decimals as usize)
    }
}

/// Like [`ratio`] but positive values carry an explicit `+`. Zero has no sign.
pub fn signed_ratio(num: i128, den: i128, decimals: u32) -> String {
    let s = ratio(num, den, decimals);
    if s.starts_with('-') || s.chars().all(|c| c == '0' || c == '.') {
        s
    } else {
        format!("+{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_rounds_away_from_zero() {
        assert_eq!(ratio(1, 8, 2), "0.13");
        assert_eq!(ratio(-1, 8, 2), "-0.13");
        assert_eq!(ratio(1, 1000, 2), "0.00");
        assert_eq!(ratio(-1, 1000, 2), "0.00");
        assert_eq!(percent(38, 44, 1), "86.4");
        assert_eq!(percent(0, 9, 1), "0.0");
        assert_eq!(ratio(7, 2, 0), "4");
    }

    #[test]
    fn signs() {
        assert_eq!(signed_ratio(1208, 100, 2), "+12.08");
        assert_eq!(signed_ratio(0, 5, 2), "0.00");
        assert_eq!(signed_ratio(-3, 1, 2), "-3.00");
    }

    proptest! {
        #[test]
        fn agrees_with_wide_float_rounding(num in -100_000i128..100_000, den in 1i128..5_000) {
            // Compare against f64 only away from exact ties, where binary
            // representation cannot flip the result.
            let exact = num as f64 / den as f64;
            let shifted = exact * 100.0;
            let frac = (shifted.abs() - shifted.abs().floor() - 0.5).abs();
            prop_assume!(frac > 1e-6);
            let expected = format!("{:.2}", (shifted.abs().round() / 100.0) * exact.signum());
            let got = ratio(num, den, 2);
            let normalized = if expected == "-0.00" { "0.00".to_string() } else { expected };
            prop_assert_eq!(got, normalized);
        }
    }
}
